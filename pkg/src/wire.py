"""
Bit-exact DLMT control and hello packets.

Layout (all integers big-endian):
    0..24   header: destination, source, packet number, packet length, 8 reserved bytes
    24..36  diffusion scope attribute
    36..48  diffusion type attribute
    48..60  control type attribute (first byte: 1 = CONTROL, 2 = HELLO)
    60..    body
A control body is 12 fixed bytes (restart, sender node + energy, tree entry
count, dlmt entry count, pad) followed by the tree entries and then the dlmt
entries, each as initiator, path length, path Eids. Entries are written in
ascending initiator order so equal messages always give equal bytes.
A hello body is sender + root (4 bytes).
"""
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Tuple

from src import config
from src.model import BrList, DlmtSelection, Eid, MalformedBranchError, TreeTable
from src.node import ControlMessage, HelloMessage, ProtocolError

HEADER = struct.Struct(">IIII8x")
ATTRIBUTE_SIZE = 12
CONTROL_FIXED = struct.Struct(">BHIHHx")
ENTRY_PREFIX = struct.Struct(">HB")
EID = struct.Struct(">HI")
HELLO_BODY = struct.Struct(">HH")

SCOPE_OFFSET = HEADER.size
TYPE_OFFSET = SCOPE_OFFSET + ATTRIBUTE_SIZE
CONTROL_TYPE_OFFSET = TYPE_OFFSET + ATTRIBUTE_SIZE
ENVELOPE_SIZE = CONTROL_TYPE_OFFSET + ATTRIBUTE_SIZE
MAX_PATH_LENGTH = 255

# Event-region scope and DLMT diffusion type; both constant for this protocol
SCOPE_ATTRIBUTE = bytes([1]).ljust(ATTRIBUTE_SIZE, b"\x00")
TYPE_ATTRIBUTE = bytes([1]).ljust(ATTRIBUTE_SIZE, b"\x00")


class PacketKind(IntEnum):
    CONTROL = 1
    HELLO = 2


class WireError(ValueError):
    pass


class DecodeError(WireError):
    pass


class WrongPacketTypeError(DecodeError):
    pass


class IntegrityError(DecodeError):
    pass


class EncodingOverflowError(WireError):
    pass


@dataclass(frozen=True)
class PacketHeader:
    destination_id: int
    source_id: int
    packet_number: int
    packet_length: int


def _envelope(kind: PacketKind, source_id: int, packet_number: int, destination_id: int,
              body: bytes) -> bytes:
    length = ENVELOPE_SIZE + len(body)
    try:
        header = HEADER.pack(destination_id, source_id, packet_number, length)
    except struct.error as exc:
        raise EncodingOverflowError(f"Header field out of range: {exc}") from exc
    control_type = bytes([kind]).ljust(ATTRIBUTE_SIZE, b"\x00")
    return header + SCOPE_ATTRIBUTE + TYPE_ATTRIBUTE + control_type + body


def _encode_entries(table: TreeTable) -> bytes:
    chunks = []
    for initiator in sorted(table.entries):
        branch = table.entries[initiator]
        if len(branch) > MAX_PATH_LENGTH:
            raise EncodingOverflowError(
                f"Branch of {initiator} has {len(branch)} Eids, the limit is {MAX_PATH_LENGTH}")
        try:
            chunks.append(ENTRY_PREFIX.pack(initiator, len(branch)))
            for eid in branch.path:
                chunks.append(EID.pack(eid.node, eid.energy))
        except struct.error as exc:
            raise EncodingOverflowError(f"Entry of {initiator} does not fit: {exc}") from exc
    return b"".join(chunks)


def encode_control(msg: ControlMessage, packet_number: int = 0,
                   destination_id: int = config.BROADCAST_ID) -> bytes:
    try:
        fixed = CONTROL_FIXED.pack(
            1 if msg.restart else 0,
            msg.sender.node,
            msg.sender.energy,
            len(msg.tree.entries),
            len(msg.dlmt.tree.entries),
        )
    except struct.error as exc:
        raise EncodingOverflowError(f"Sender {msg.sender} does not fit: {exc}") from exc
    body = fixed + _encode_entries(msg.tree) + _encode_entries(msg.dlmt.tree)
    return _envelope(PacketKind.CONTROL, msg.sender.node, packet_number, destination_id, body)


def encode_hello(hello: HelloMessage, packet_number: int = 0,
                 destination_id: int = config.BROADCAST_ID) -> bytes:
    try:
        body = HELLO_BODY.pack(hello.sender, hello.root)
    except struct.error as exc:
        raise EncodingOverflowError(f"Hello {hello} does not fit: {exc}") from exc
    return _envelope(PacketKind.HELLO, hello.sender, packet_number, destination_id, body)


def read_header(data: bytes) -> PacketHeader:
    if len(data) < HEADER.size:
        raise DecodeError(f"Buffer of {len(data)} bytes is shorter than the header")
    return PacketHeader(*HEADER.unpack_from(data, 0))


def packet_kind(data: bytes) -> PacketKind:
    """Validate the envelope and return the control type discriminator."""
    if len(data) < ENVELOPE_SIZE:
        raise DecodeError(f"Buffer of {len(data)} bytes is shorter than the {ENVELOPE_SIZE}-byte envelope")
    header = read_header(data)
    if header.packet_length != len(data):
        raise DecodeError(
            f"Header announces {header.packet_length} bytes but the buffer holds {len(data)}")
    try:
        return PacketKind(data[CONTROL_TYPE_OFFSET])
    except ValueError as exc:
        raise DecodeError(f"Unknown control type {data[CONTROL_TYPE_OFFSET]}") from exc


def _expect(data: bytes, kind: PacketKind):
    found = packet_kind(data)
    if found != kind:
        raise WrongPacketTypeError(f"Expected a {kind.name} packet, got {found.name}")


def _decode_entries(data: bytes, offset: int, count: int) -> Tuple[Dict[int, BrList], int]:
    entries = {}
    try:
        for _ in range(count):
            initiator, length = ENTRY_PREFIX.unpack_from(data, offset)
            offset += ENTRY_PREFIX.size
            path = []
            for _ in range(length):
                node, energy = EID.unpack_from(data, offset)
                offset += EID.size
                path.append(Eid(energy=energy, node=node))
            branch = BrList(tuple(path))
            if branch.initiator != initiator:
                raise IntegrityError(f"Entry keyed {initiator} starts at node {branch.initiator}")
            if initiator in entries:
                raise IntegrityError(f"Initiator {initiator} appears twice")
            entries[initiator] = branch
    except struct.error as exc:
        raise DecodeError(f"Truncated entry list: {exc}") from exc
    except MalformedBranchError as exc:
        raise IntegrityError(str(exc)) from exc
    return entries, offset


def _table(entries: Dict[int, BrList], what: str) -> TreeTable:
    if not entries:
        raise IntegrityError(f"{what} has no entries")
    owner = next(iter(entries.values())).holder
    try:
        return TreeTable(owner, entries)
    except MalformedBranchError as exc:
        raise IntegrityError(f"{what}: {exc}") from exc


def decode_control(data: bytes) -> ControlMessage:
    _expect(data, PacketKind.CONTROL)
    offset = ENVELOPE_SIZE
    if len(data) < offset + CONTROL_FIXED.size:
        raise DecodeError("Buffer ends inside the fixed control payload")
    restart, node, energy, tree_count, dlmt_count = CONTROL_FIXED.unpack_from(data, offset)
    offset += CONTROL_FIXED.size
    if restart not in (0, 1):
        raise DecodeError(f"Restart flag byte is {restart}")

    tree_entries, offset = _decode_entries(data, offset, tree_count)
    dlmt_entries, offset = _decode_entries(data, offset, dlmt_count)
    if offset != len(data):
        raise DecodeError(f"{len(data) - offset} trailing bytes after the entries")

    sender = Eid(energy=energy, node=node)
    tree = _table(tree_entries, "tree")
    if tree.owner_eid != sender:
        raise IntegrityError(f"Tree owner {tree.owner_eid} does not match sender {sender}")
    dlmt = DlmtSelection.from_tree(_table(dlmt_entries, "dlmt"))
    try:
        return ControlMessage(sender=sender, restart=bool(restart), tree=tree, dlmt=dlmt)
    except ProtocolError as exc:
        raise IntegrityError(str(exc)) from exc


def decode_hello(data: bytes) -> HelloMessage:
    _expect(data, PacketKind.HELLO)
    if len(data) != ENVELOPE_SIZE + HELLO_BODY.size:
        raise DecodeError(f"Hello packets are {ENVELOPE_SIZE + HELLO_BODY.size} bytes, got {len(data)}")
    sender, root = HELLO_BODY.unpack_from(data, ENVELOPE_SIZE)
    return HelloMessage(sender=sender, root=root)

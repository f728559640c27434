"""
tools/make_golden_fixtures.py
Rewrites the binary packets in tests/fixtures from their semantic description.
Run it only when the wire layout changes on purpose; tests compare against the
committed bytes.
"""
import sys
from pathlib import Path

# --- PATH SETUP ---
ROOT_DIR = Path(__file__).parent.parent.resolve()
sys.path.append(str(ROOT_DIR))

import src.config as config
from src.model import BrList, DlmtSelection, Eid, TreeTable, path_of
from src.node import ControlMessage, HelloMessage
from src.wire import encode_control, encode_hello


def singleton_control() -> bytes:
    me = Eid(energy=10_000, node=4)
    tree = TreeTable.singleton(me)
    return encode_control(ControlMessage(me, True, tree, DlmtSelection.from_tree(tree)), packet_number=1)


def path_control() -> bytes:
    # a(3 J) - b(7 J) - c(5 J) as seen by b once both leaves are attached
    me = Eid(energy=7_000, node=2)
    tree = TreeTable(2, {
        1: BrList(path_of((1, 3_000), (2, 7_000))),
        2: BrList.singleton(me),
        3: BrList(path_of((3, 5_000), (2, 7_000))),
    })
    return encode_control(ControlMessage(me, False, tree, DlmtSelection.from_tree(tree)), packet_number=5)


def hello() -> bytes:
    return encode_hello(HelloMessage(sender=4, root=7), packet_number=2)


FIXTURES = {
    "control_singleton.bin": singleton_control,
    "control_path.bin": path_control,
    "hello.bin": hello,
}


def run():
    config.FIXTURES_DIR.mkdir(parents=True, exist_ok=True)
    for name, build in FIXTURES.items():
        data = build()
        (config.FIXTURES_DIR / name).write_bytes(data)
        print(f"💾 {name}: {len(data)} bytes")


if __name__ == "__main__":
    run()

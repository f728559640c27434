import os
from pathlib import Path

# --- PROTOCOL TIMING ---
# The maintenance timer expires every T seconds; a non-root that has not
# heard its parent for Tf seconds re-initializes.
HELLO_PERIOD_T = 25.0
PARENT_TIMEOUT_TF = 50.0

# --- HARNESS DEFAULTS ---
# Any field missing from a scenario file falls back to these.
LATENCY = (0.001, 0.010)        # seconds, uniform per delivery
LOSS_PROBABILITY = 0.0          # per receiver, independent
TX_COST_PER_BYTE = 0.0          # joules
RX_COST_PER_BYTE = 0.0          # joules
DURATION = 600.0                # seconds of simulated time
DEFAULT_SEED = 0

# --- TOPOLOGY GENERATION ---
AREA_SIDE = 100.0               # meters
TRANSMISSION_RANGE = 40.0       # meters, identical for every node
ENERGY_RANGE = (1.0, 10.0)      # joules, uniform
MAX_TOPOLOGY_ATTEMPTS = 200

# --- ORACLE ---
BRUTE_FORCE_MAX_SOURCES = 8

# --- WIRE ---
BROADCAST_ID = 0xFFFFFFFF

# --- CLI EXIT CODES ---
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GENERATION_FAILED = 2
EXIT_NOT_CONVERGED = 3

# --- LOGGING ---
# DLMT_LOG = off | info | debug
LOG_LEVEL = os.getenv("DLMT_LOG", "info").strip().lower()

# --- PATHS ---
# config.py lives in /src, the project root is one level up
SRC_DIR = Path(__file__).parent.resolve()
ROOT_DIR = SRC_DIR.parent
FIXTURES_DIR = ROOT_DIR / "tests" / "fixtures"

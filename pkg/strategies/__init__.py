from .base import (BaseTreeStrategy, GraphTooLargeError, OracleResult, SourceGraph,
                   UnreachableSourceError, score_tree)
from .bfs_strategy import BfsStrategy, bfs_baseline
from .brute_force_strategy import BruteForceStrategy, brute_force_dlmt
from .espan_like_strategy import EspanLikeStrategy, espan_like_baseline
from .oracle_strategy import OracleStrategy, oracle_dlmt, widest_branches

# Order of the rows after the protocol row in `compare`
COMPARISON_STRATEGIES = (
    OracleStrategy(),
    BruteForceStrategy(),
    BfsStrategy(),
    EspanLikeStrategy(),
)

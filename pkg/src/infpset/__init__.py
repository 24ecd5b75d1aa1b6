"""Counter-based add/remove set CRDT with unbounded re-adds, plus tooling.

The set itself lives in :mod:`infpset.core`; :mod:`infpset.baselines`
holds reference set CRDTs, :mod:`infpset.laws` the lattice-law checks and
:mod:`infpset.netsim` the replica simulator.
"""

from .core import (
    INF_P_SET,
    MAX_COUNTER,
    CounterMap,
    CounterOverflowError,
    InvalidElementError,
    StateCrdt,
    StateFormatError,
    add,
    compare,
    deserialize,
    initialize,
    merge,
    query,
    remove,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "INF_P_SET",
    "MAX_COUNTER",
    "CounterMap",
    "CounterOverflowError",
    "InvalidElementError",
    "StateCrdt",
    "StateFormatError",
    "add",
    "compare",
    "deserialize",
    "initialize",
    "merge",
    "query",
    "remove",
    "serialize",
]

"""Longest-alternating-chain oracle over a simulator trace.

Causality is rebuilt from the trace alone: a replica knows its own ops
plus whatever rode in on messages it received. No counters are consulted,
so the oracle is independent of the CRDT it checks.

Trace entries are tuples:

* ``("op", replica, kind, element)``
* ``("send", msg_id, source)``
* ``("deliver", msg_id, dest)``
* ``("sync", source, dest)``  (direct merge during quiescence)
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass


@dataclass(frozen=True)
class OpRecord:
    index: int
    replica: str
    kind: str
    element: str
    past: frozenset[int]


@dataclass
class CausalHistory:
    ops: list[OpRecord]
    knowledge: dict[str, frozenset[int]]


def reconstruct_history(trace: Iterable[tuple], replicas: Sequence[str] = ()) -> CausalHistory:
    known: dict[str, set[int]] = {r: set() for r in replicas}
    in_transit: dict[int, frozenset[int]] = {}
    ops: list[OpRecord] = []
    for entry in trace:
        tag = entry[0]
        if tag == "op":
            _, replica, kind, element = entry
            mine = known.setdefault(replica, set())
            ops.append(OpRecord(len(ops), replica, kind, element, frozenset(mine)))
            mine.add(len(ops) - 1)
        elif tag == "send":
            _, msg_id, source = entry
            in_transit[msg_id] = frozenset(known.setdefault(source, set()))
        elif tag == "deliver":
            _, msg_id, dest = entry
            known.setdefault(dest, set()).update(in_transit[msg_id])
        elif tag == "sync":
            _, source, dest = entry
            known.setdefault(dest, set()).update(known.setdefault(source, set()))
        else:
            raise ValueError(f"unknown trace entry {entry!r}")
    return CausalHistory(ops, {r: frozenset(k) for r, k in known.items()})


def longest_chain(history: Sequence[OpRecord], element: str, within: frozenset[int] | None = None) -> int:
    """Length of the longest causal chain add -> remove -> add -> ... on ``element``.

    Chains must start with an add. Ops ignored by the set never lengthen
    the longest chain, so all ops can be considered without knowing which
    ones took effect. ``within`` restricts the search to one replica's
    causal past.
    """
    best: dict[int, int] = {}
    longest = 0
    for rec in history:
        if rec.element != element or (within is not None and rec.index not in within):
            continue
        want = "remove" if rec.kind == "add" else "add"
        prior = max(
            (best[j] for j in rec.past if j in best and history[j].kind == want),
            default=0,
        )
        if rec.kind == "add":
            length = prior + 1
        else:
            length = prior + 1 if prior else 0
        if length:
            best[rec.index] = length
            longest = max(longest, length)
    return longest


def longest_sequence_oracle(
    history: Sequence[OpRecord], element: str, within: frozenset[int] | None = None
) -> bool:
    """Membership predicted by the longest alternating chain: odd length means present."""
    return longest_chain(history, element, within) % 2 == 1

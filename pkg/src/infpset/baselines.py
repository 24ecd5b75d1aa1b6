"""Reference set CRDTs used as foils for the counter-based set.

``TwoPhaseSet`` cross-checks semantics on histories that never re-add an
element. ``ORSet`` and ``LWWSet`` exist so that :func:`metadata_tokens`
can put numbers on how much bookkeeping each design carries.

All three follow the same value-semantics contract as :mod:`infpset.core`:
operations return new frozen states.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

from . import core
from .core import CounterMap, validate_element

__all__ = [
    "TwoPhaseState",
    "TwoPhaseSet",
    "Tag",
    "OrSetState",
    "ORSet",
    "TagReuseError",
    "Timestamp",
    "LwwSetState",
    "LWWSet",
    "NonMonotoneTimestampError",
    "metadata_tokens",
    "MemoryRow",
    "memory_workload",
]


# -- 2P-Set -----------------------------------------------------------------


@dataclass(frozen=True)
class TwoPhaseState:
    added: frozenset[str] = frozenset()
    removed: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.removed <= self.added:
            raise ValueError("remove-set must be a subset of the add-set")


class TwoPhaseSet:
    """Add once, remove once, then removed forever."""

    name = "2p-set"

    @staticmethod
    def initialize() -> TwoPhaseState:
        return TwoPhaseState()

    @staticmethod
    def add(state: TwoPhaseState, element: str) -> TwoPhaseState:
        validate_element(element)
        if element in state.added:
            return state
        return TwoPhaseState(state.added | {element}, state.removed)

    @staticmethod
    def remove(state: TwoPhaseState, element: str) -> TwoPhaseState:
        validate_element(element)
        if element not in state.added or element in state.removed:
            return state
        return TwoPhaseState(state.added, state.removed | {element})

    @staticmethod
    def query(state: TwoPhaseState) -> frozenset[str]:
        return state.added - state.removed

    @staticmethod
    def merge(left: TwoPhaseState, right: TwoPhaseState) -> TwoPhaseState:
        return TwoPhaseState(left.added | right.added, left.removed | right.removed)

    @staticmethod
    def compare(left: TwoPhaseState, right: TwoPhaseState) -> bool:
        return left.added <= right.added and left.removed <= right.removed


# -- OR-Set -----------------------------------------------------------------


class Tag(NamedTuple):
    replica: str
    seq: int


class TagReuseError(ValueError):
    """An OR-Set add was issued with a tag already present in the state."""


@dataclass(frozen=True)
class OrSetState:
    # Tombstone-keeping variant: observed retains every pair ever added.
    observed: frozenset[tuple[str, Tag]] = frozenset()
    tombstones: frozenset[tuple[str, Tag]] = frozenset()

    def __post_init__(self):
        if not self.tombstones <= self.observed:
            raise ValueError("tombstones must be a subset of observed pairs")


class ORSet:
    """Observed-remove set: a remove only cancels the adds it has seen."""

    name = "or-set"

    @staticmethod
    def initialize() -> OrSetState:
        return OrSetState()

    @staticmethod
    def add(state: OrSetState, element: str, tag: Tag) -> OrSetState:
        validate_element(element)
        tag = Tag(*tag)
        if any(t == tag for _, t in state.observed):
            raise TagReuseError(f"tag {tag} already used")
        return OrSetState(state.observed | {(element, tag)}, state.tombstones)

    @staticmethod
    def remove(state: OrSetState, element: str) -> OrSetState:
        validate_element(element)
        visible = {p for p in state.observed - state.tombstones if p[0] == element}
        if not visible:
            return state
        return OrSetState(state.observed, state.tombstones | visible)

    @staticmethod
    def query(state: OrSetState) -> frozenset[str]:
        return frozenset(e for e, _ in state.observed - state.tombstones)

    @staticmethod
    def merge(left: OrSetState, right: OrSetState) -> OrSetState:
        return OrSetState(left.observed | right.observed, left.tombstones | right.tombstones)

    @staticmethod
    def compare(left: OrSetState, right: OrSetState) -> bool:
        return left.observed <= right.observed and left.tombstones <= right.tombstones


# -- LWW-Set ----------------------------------------------------------------


class Timestamp(NamedTuple):
    """Logical clock with replica id as tiebreak; compares lexicographically."""

    clock: int
    replica: str


class NonMonotoneTimestampError(ValueError):
    """A replica issued a timestamp not above one it issued before."""


def _frozen_map(entries: dict[str, Timestamp]) -> tuple[tuple[str, Timestamp], ...]:
    return tuple(sorted(entries.items(), key=lambda kv: core.element_sort_key(kv[0])))


@dataclass(frozen=True)
class LwwSetState:
    # Stored as sorted tuples so states hash and compare by value.
    add_entries: tuple[tuple[str, Timestamp], ...] = ()
    remove_entries: tuple[tuple[str, Timestamp], ...] = ()

    @property
    def adds(self) -> dict[str, Timestamp]:
        return dict(self.add_entries)

    @property
    def removes(self) -> dict[str, Timestamp]:
        return dict(self.remove_entries)


class LWWSet:
    """Last-writer-wins element set, ties broken inside the timestamp order."""

    name = "lww-set"

    @staticmethod
    def initialize() -> LwwSetState:
        return LwwSetState()

    @staticmethod
    def _check_fresh(state: LwwSetState, ts: Timestamp) -> None:
        issued = [t.clock for _, t in state.add_entries + state.remove_entries if t.replica == ts.replica]
        if issued and ts.clock <= max(issued):
            raise NonMonotoneTimestampError(
                f"replica {ts.replica!r} issued clock {ts.clock} after {max(issued)}"
            )

    @staticmethod
    def _put(entries: dict[str, Timestamp], element: str, ts: Timestamp) -> dict[str, Timestamp]:
        current = entries.get(element)
        if current is None or ts > current:
            entries[element] = ts
        return entries

    @classmethod
    def add(cls, state: LwwSetState, element: str, ts: Timestamp) -> LwwSetState:
        validate_element(element)
        ts = Timestamp(*ts)
        cls._check_fresh(state, ts)
        return LwwSetState(_frozen_map(cls._put(state.adds, element, ts)), state.remove_entries)

    @classmethod
    def remove(cls, state: LwwSetState, element: str, ts: Timestamp) -> LwwSetState:
        validate_element(element)
        ts = Timestamp(*ts)
        cls._check_fresh(state, ts)
        return LwwSetState(state.add_entries, _frozen_map(cls._put(state.removes, element, ts)))

    @staticmethod
    def query(state: LwwSetState) -> frozenset[str]:
        removes = state.removes
        return frozenset(
            e for e, ts in state.add_entries if e not in removes or removes[e] < ts
        )

    @classmethod
    def merge(cls, left: LwwSetState, right: LwwSetState) -> LwwSetState:
        adds, removes = left.adds, left.removes
        for e, ts in right.add_entries:
            cls._put(adds, e, ts)
        for e, ts in right.remove_entries:
            cls._put(removes, e, ts)
        return LwwSetState(_frozen_map(adds), _frozen_map(removes))

    @staticmethod
    def compare(left: LwwSetState, right: LwwSetState) -> bool:
        for mine, theirs in ((left.adds, right.adds), (left.removes, right.removes)):
            for e, ts in mine.items():
                if e not in theirs or ts > theirs[e]:
                    return False
        return True


# -- metadata footprint -----------------------------------------------------


def metadata_tokens(state: CounterMap | TwoPhaseState | OrSetState | LwwSetState) -> int:
    """Count stored atoms in a state, in a representation-independent unit.

    * counter set: element + counter per key;
    * 2P-Set: one per entry in either set;
    * OR-Set: element + tag per pair, plus replica id + sequence per tag,
      counted for observed pairs and tombstones alike;
    * LWW-Set: element + clock + replica id per entry in either map.
    """
    if isinstance(state, CounterMap):
        return 2 * len(state)
    if isinstance(state, TwoPhaseState):
        return len(state.added) + len(state.removed)
    if isinstance(state, OrSetState):
        pairs = len(state.observed) + len(state.tombstones)
        return 2 * pairs + 2 * pairs
    if isinstance(state, LwwSetState):
        return 3 * (len(state.add_entries) + len(state.remove_entries))
    raise TypeError(f"no token model for {type(state).__name__}")


@dataclass(frozen=True)
class MemoryRow:
    elements: int
    alternations: int
    concurrent_adds: int
    tokens: dict[str, int] = field(default_factory=dict)


def _merge_all(crdt, states: Iterable):
    states = list(states)
    result = states[0]
    for s in states[1:]:
        result = crdt.merge(result, s)
    return result


def memory_workload(elements: int, alternations: int, concurrent_adds: int) -> MemoryRow:
    """Replay one workload through every set type and count tokens.

    For each of ``elements`` elements, replica 0 performs ``alternations``
    add/remove cycles, the state is shared, and then ``concurrent_adds``
    replicas each add the element concurrently before everything is merged.
    """
    if elements < 0 or alternations < 0 or concurrent_adds < 0:
        raise ValueError("workload sizes must be non-negative")
    replicas = max(concurrent_adds, 1)
    names = [f"e{i}" for i in range(elements)]

    inf = core.initialize()
    twop = TwoPhaseSet.initialize()
    orset = ORSet.initialize()
    lww = LWWSet.initialize()
    seq = [0] * replicas
    clock = 0

    def next_tag(r: int) -> Tag:
        seq[r] += 1
        return Tag(f"r{r}", seq[r])

    def next_ts(r: int) -> Timestamp:
        nonlocal clock
        clock += 1
        return Timestamp(clock, f"r{r}")

    for e in names:
        for _ in range(alternations):
            inf = core.remove(core.add(inf, e), e)
            twop = TwoPhaseSet.remove(TwoPhaseSet.add(twop, e), e)
            orset = ORSet.remove(ORSet.add(orset, e, next_tag(0)), e)
            lww = LWWSet.add(lww, e, next_ts(0))
            lww = LWWSet.remove(lww, e, next_ts(0))
        # every branch starts from the shared state and adds once
        branches = range(concurrent_adds)
        if concurrent_adds:
            inf = _merge_all(core.INF_P_SET, [core.add(inf, e) for _ in branches])
            twop = _merge_all(TwoPhaseSet, [TwoPhaseSet.add(twop, e) for _ in branches])
            orset = _merge_all(ORSet, [ORSet.add(orset, e, next_tag(r)) for r in branches])
            lww = _merge_all(LWWSet, [LWWSet.add(lww, e, next_ts(r)) for r in branches])

    return MemoryRow(
        elements=elements,
        alternations=alternations,
        concurrent_adds=concurrent_adds,
        tokens={
            core.INF_P_SET.name: metadata_tokens(inf),
            TwoPhaseSet.name: metadata_tokens(twop),
            ORSet.name: metadata_tokens(orset),
            LWWSet.name: metadata_tokens(lww),
        },
    )

"""Exhaustive and sampled checks of the lattice laws behind convergence.

Small state windows are enumerated in full so that partial-order, least
upper bound and monotonicity claims can be checked by brute force rather
than argued. Every check takes the operation under test as a keyword
argument, which is how the mutation self-tests inject faults.

These are finite checks over a bounded window; they do not replace a proof
over the unbounded state space.
"""

from __future__ import annotations

import itertools
import random
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

from . import core
from .baselines import TwoPhaseSet
from .core import CounterMap

__all__ = [
    "MAX_ELEMENTS",
    "MAX_COUNTER_BOUND",
    "SpaceTooLargeError",
    "StateSpace",
    "Counterexample",
    "LawReport",
    "PhaseSetState",
    "PhaseSetSaturated",
    "check_partial_order",
    "check_lub",
    "check_monotonicity",
    "check_phase_equivalence",
    "check_two_phase_agreement",
    "check_merge_algebra",
    "sample_histories",
    "sample_single_phase_histories",
    "is_single_phase",
    "random_counter_map",
    "MUTANTS",
    "run_self_tests",
]

MAX_ELEMENTS = 3
MAX_COUNTER_BOUND = 4

History = Sequence[tuple[str, str]]


class SpaceTooLargeError(ValueError):
    def __init__(self, elements: int, max_counter: int):
        estimate = (max_counter + 1) ** elements
        super().__init__(
            f"state space with {elements} elements and max counter {max_counter} has "
            f"{estimate} states; limit is {MAX_ELEMENTS} elements and max counter "
            f"{MAX_COUNTER_BOUND} ({(MAX_COUNTER_BOUND + 1) ** MAX_ELEMENTS} states)"
        )
        self.estimate = estimate


@dataclass(frozen=True)
class StateSpace:
    """Every counter map over ``elements`` with counters in ``[1, max_counter]``."""

    elements: tuple[str, ...]
    max_counter: int

    def __post_init__(self):
        for e in self.elements:
            core.validate_element(e)
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("duplicate elements in state space")
        if self.max_counter < 1:
            raise ValueError("max_counter must be >= 1")
        if len(self.elements) > MAX_ELEMENTS or self.max_counter > MAX_COUNTER_BOUND:
            raise SpaceTooLargeError(len(self.elements), self.max_counter)

    @classmethod
    def of_size(cls, elements: int, max_counter: int) -> StateSpace:
        if elements < 1:
            raise ValueError("need at least one element")
        if elements > MAX_ELEMENTS or max_counter > MAX_COUNTER_BOUND:
            raise SpaceTooLargeError(elements, max_counter)
        return cls(tuple("abcdefghijklmnopqrstuvwxyz"[:elements]), max_counter)

    @property
    def size(self) -> int:
        return (self.max_counter + 1) ** len(self.elements)

    def enumerate(self) -> list[CounterMap]:
        # None stands for "element absent"; a stored 0 is never reachable.
        choices = [None, *range(1, self.max_counter + 1)]
        states = []
        for combo in itertools.product(choices, repeat=len(self.elements)):
            states.append(CounterMap({e: c for e, c in zip(self.elements, combo) if c is not None}))
        return states


@dataclass
class Counterexample:
    states: tuple[str, ...]
    clause: str

    def to_dict(self) -> dict:
        return {"states": list(self.states), "clause": self.clause}


@dataclass
class LawReport:
    law_name: str
    cases_checked: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def fail(self, clause: str, *states) -> None:
        self.counterexamples.append(Counterexample(tuple(_show(s) for s in states), clause))

    def to_dict(self) -> dict:
        return {
            "lawName": self.law_name,
            "casesChecked": self.cases_checked,
            "passed": self.passed,
            "counterexamples": [c.to_dict() for c in self.counterexamples],
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.law_name}: {self.cases_checked} cases, {len(self.counterexamples)} counterexamples"
        if self.notes:
            line += f" ({'; '.join(self.notes)})"
        return line


def _show(state) -> str:
    if isinstance(state, CounterMap):
        return core.serialize(state).decode("utf-8")
    return repr(state)


def _bitsets(states: Sequence[CounterMap], compare: Callable) -> tuple[list[int], list[int]]:
    """``ups[i]`` has bit j set iff states[i] <= states[j]; ``downs`` is the transpose."""
    n = len(states)
    ups = [0] * n
    downs = [0] * n
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            if compare(a, b):
                ups[i] |= 1 << j
                downs[j] |= 1 << i
    return ups, downs


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def check_partial_order(space: StateSpace, *, compare: Callable = core.compare) -> LawReport:
    states = space.enumerate()
    report = LawReport("partial-order")
    ups, _ = _bitsets(states, compare)
    for i, a in enumerate(states):
        report.cases_checked += 1
        if not ups[i] >> i & 1:
            report.fail("reflexivity: not compare(D, D)", a)
    for i, j in itertools.permutations(range(len(states)), 2):
        report.cases_checked += 1
        if ups[i] >> j & 1 and ups[j] >> i & 1:
            report.fail("antisymmetry: D <= D2 and D2 <= D but D != D2", states[i], states[j])
    # transitivity only over triples whose premises hold
    for i in range(len(states)):
        for j in _bits(ups[i]):
            for k in _bits(ups[j]):
                report.cases_checked += 1
                if not ups[i] >> k & 1:
                    report.fail("transitivity: D <= D2 <= D3 but not D <= D3", states[i], states[j], states[k])
    return report


def check_lub(
    space: StateSpace, *, merge: Callable = core.merge, compare: Callable = core.compare
) -> LawReport:
    """Check that merge is the unique least upper bound of every pair.

    The least upper bound is found independently by listing all upper
    bounds in the window and keeping the minimal ones; there must be
    exactly one and it must equal the merge result.
    """
    states = space.enumerate()
    index = {s: i for i, s in enumerate(states)}
    report = LawReport("least-upper-bound")
    ups, downs = _bitsets(states, compare)
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            report.cases_checked += 1
            m = merge(a, b)
            if not compare(a, m):
                report.fail("upper bound: not compare(D, merge)", a, b, m)
            if not compare(b, m):
                report.fail("upper bound: not compare(D2, merge)", a, b, m)
            if i == j and m != a:
                report.fail("idempotence: merge(D, D) != D", a, m)

            bounds = ups[i] & ups[j]
            minimal = [u for u in _bits(bounds) if downs[u] & bounds == 1 << u]
            if len(minimal) != 1:
                report.fail(f"uniqueness: {len(minimal)} minimal upper bounds", a, b)
                continue
            lub = states[minimal[0]]
            if m != lub:
                report.fail("minimality: merge differs from least upper bound", a, b, m, lub)
            k = index.get(m)
            if k is not None:
                for u in _bits(bounds & downs[k]):
                    if u != k:
                        report.fail("minimality: smaller upper bound below merge", a, b, m, states[u])
    return report


def check_monotonicity(
    space: StateSpace,
    *,
    add: Callable = core.add,
    remove: Callable = core.remove,
    compare: Callable = core.compare,
) -> LawReport:
    states = space.enumerate()
    report = LawReport("monotonicity")
    for d in states:
        for e in space.elements:
            for kind, op in (("add", add), ("remove", remove)):
                report.cases_checked += 1
                result = op(d, e)
                if not compare(d, result):
                    report.fail(f"{kind}({e}) result is not >= input", d, result)
                    continue
                counter = d.get(e)
                if kind == "add":
                    expect_growth = counter is None or counter % 2 == 0
                else:
                    expect_growth = counter is not None and counter % 2 == 1
                grew = result != d
                if grew != expect_growth:
                    wanted = "strict growth" if expect_growth else "no-op"
                    report.fail(f"{kind}({e}) case table expects {wanted}", d, result)
                elif grew and compare(result, d):
                    report.fail(f"{kind}({e}) changed state without strict growth", d, result)
    return report


# -- phase-set oracle -------------------------------------------------------


class PhaseSetSaturated(Exception):
    """The truncated phase-set ran out of add/remove pairs."""


class PhaseSetState:
    """Finite stack of grow-only add/remove-set pairs generalizing the 2P-Set.

    An element climbs through (A1, R1, A2, R2, ...) one set at a time; an
    add or remove that would need a pair beyond ``depth`` raises
    :class:`PhaseSetSaturated`.
    """

    def __init__(self, depth: int):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.depth = depth
        self.pairs = [(set(), set()) for _ in range(depth)]

    def _sets(self):
        for added, removed in self.pairs:
            yield added
            yield removed

    def count(self, element: str) -> int:
        """How many of the add- and remove-sets contain ``element``."""
        return sum(element in s for s in self._sets())

    def add(self, element: str) -> None:
        for i, (added, removed) in enumerate(self.pairs):
            if element not in added:
                if i == 0 or element in self.pairs[i - 1][1]:
                    added.add(element)
                return
            if element not in removed:
                return  # currently in the set; add ignored
        raise PhaseSetSaturated(element)

    def remove(self, element: str) -> None:
        for added, removed in self.pairs:
            if element not in added:
                return  # never added at this depth; remove ignored
            if element not in removed:
                removed.add(element)
                return
        # every pair complete: element is out, remove is ignored

    def query(self) -> frozenset[str]:
        members = set()
        for added, removed in self.pairs:
            members |= added - removed
        return frozenset(members)

    def nested(self) -> bool:
        sets = list(self._sets())
        return all(later <= earlier for earlier, later in zip(sets, sets[1:]))


def check_phase_equivalence(
    depth: int,
    histories: Iterable[History],
    *,
    add: Callable = core.add,
    remove: Callable = core.remove,
) -> LawReport:
    """Replay histories through the phase-set oracle and the counter set.

    Membership must agree after every step and each counter must equal the
    number of phase sets holding its element. A history that would
    overflow the truncated phase stack is checked up to that point and then
    counted as truncated.
    """
    if not 1 <= depth <= 3:
        raise ValueError("phase depth must be between 1 and 3")
    report = LawReport(f"phase-equivalence(depth={depth})")
    truncated = 0
    for history in histories:
        report.cases_checked += 1
        oracle = PhaseSetState(depth)
        state = core.initialize()
        for step, (kind, element) in enumerate(history):
            try:
                getattr(oracle, kind)(element)
            except PhaseSetSaturated:
                truncated += 1
                break
            state = (add if kind == "add" else remove)(state, element)
            label = f"history {list(history)!r} step {step}"
            if oracle.query() != core.query(state):
                report.fail(f"membership differs at {label}", state)
            for e in {el for _, el in history}:
                if state.get(e, 0) != oracle.count(e):
                    report.fail(f"counter for {e} != phase-set count {oracle.count(e)} at {label}", state)
            if not oracle.nested():
                report.fail(f"phase sets lost nesting at {label}")
    if truncated:
        report.notes.append(f"{truncated} histories truncated at phase depth {depth}")
    return report


def is_single_phase(history: History) -> bool:
    """No element is added after it has been removed."""
    removed: set[str] = set()
    for kind, element in history:
        if kind == "remove":
            removed.add(element)
        elif element in removed:
            return False
    return True


def check_two_phase_agreement(histories: Iterable[History]) -> LawReport:
    """The 2P-Set and the counter set agree step by step on single-phase histories."""
    report = LawReport("two-phase-agreement")
    skipped = 0
    for history in histories:
        if not is_single_phase(history):
            skipped += 1
            continue
        report.cases_checked += 1
        twop = TwoPhaseSet.initialize()
        state = core.initialize()
        for step, (kind, element) in enumerate(history):
            twop = getattr(TwoPhaseSet, kind)(twop, element)
            state = getattr(core, kind)(state, element)
            if TwoPhaseSet.query(twop) != core.query(state):
                report.fail(f"membership differs at history {list(history)!r} step {step}", state, twop)
    if skipped:
        report.notes.append(f"{skipped} multi-phase histories skipped")
    return report


def sample_histories(
    count: int = 500, *, max_length: int = 12, elements: Sequence[str] = ("a", "b", "c"), seed: int = 0
) -> list[list[tuple[str, str]]]:
    """Uniform random add/remove over uniform elements, lengths 0..max_length."""
    rng = random.Random(seed)
    histories = []
    for _ in range(count):
        length = rng.randint(0, max_length)
        histories.append([(rng.choice(("add", "remove")), rng.choice(elements)) for _ in range(length)])
    return histories


def sample_single_phase_histories(
    count: int = 500, *, max_length: int = 20, elements: Sequence[str] = ("a", "b", "c"), seed: int = 0
) -> list[list[tuple[str, str]]]:
    """Random histories rearranged so that, per element, every add precedes every remove.

    Each element keeps the positions it was drawn at; only the kinds of its
    ops are reordered among those positions.
    """
    rng = random.Random(seed)
    histories = []
    for _ in range(count):
        ops = [(rng.choice(("add", "remove")), rng.choice(elements)) for _ in range(rng.randint(0, max_length))]
        kinds: dict[str, list[str]] = {}
        for kind, element in ops:
            kinds.setdefault(element, []).append(kind)
        queues = {e: iter(sorted(ks, key=lambda k: k == "remove")) for e, ks in kinds.items()}
        histories.append([(next(queues[e]), e) for _, e in ops])
    return histories


# -- sampled merge algebra --------------------------------------------------


def random_counter_map(rng: random.Random, elements: Sequence[str] = tuple("abcdefgh"), max_counter: int = 9) -> CounterMap:
    return CounterMap({e: rng.randint(1, max_counter) for e in elements if rng.random() < 0.6})


def check_merge_algebra(
    states: Sequence,
    *,
    merge: Callable = core.merge,
    key: Callable = core.serialize,
    triples: int = 1000,
    seed: int = 0,
    name: str = "merge-algebra",
) -> LawReport:
    """Commutativity, associativity and idempotence over sampled states.

    ``key`` maps a state to something whose equality is the notion under
    test; for counter maps it is the canonical byte form.
    """
    rng = random.Random(seed)
    report = LawReport(name)
    for _ in range(triples):
        a, b, c = (rng.choice(states) for _ in range(3))
        report.cases_checked += 1
        if key(merge(a, b)) != key(merge(b, a)):
            report.fail("commutativity", a, b)
        if key(merge(a, merge(b, c))) != key(merge(merge(a, b), c)):
            report.fail("associativity", a, b, c)
        if key(merge(a, a)) != key(a):
            report.fail("idempotence", a)
    return report


# -- mutation self-tests ----------------------------------------------------


def _flip_first_reflexive(compare: Callable = core.compare) -> Callable:
    def broken(a, b):
        result = compare(a, b)
        return not result if (len(a) == 0 and len(b) == 0) else result

    return broken


def _merge_plus_one(a: CounterMap, b: CounterMap) -> CounterMap:
    entries = core.merge(a, b).to_dict()
    for e in a.keys() & b.keys():
        entries[e] += 1
    return CounterMap(entries)


def _remove_decrements(d: CounterMap, e: str) -> CounterMap:
    if e in d and d[e] % 2 == 1:
        entries = d.to_dict()
        if d[e] == 1:
            del entries[e]
        else:
            entries[e] -= 1
        return CounterMap(entries)
    return d


def _phase_free_add(d: CounterMap, e: str) -> CounterMap:
    # ignores the parity rule and always bumps
    return CounterMap({**d.to_dict(), e: d.get(e, 0) + 1})


MUTANTS: dict[str, Callable[[StateSpace], LawReport]] = {
    "partial-order": lambda space: check_partial_order(space, compare=_flip_first_reflexive()),
    "least-upper-bound": lambda space: check_lub(space, merge=_merge_plus_one),
    "monotonicity": lambda space: check_monotonicity(space, remove=_remove_decrements),
    "phase-equivalence": lambda space: check_phase_equivalence(
        2, sample_histories(50, elements=space.elements), add=_phase_free_add
    ),
}


def run_self_tests(space: StateSpace) -> dict[str, LawReport]:
    """Run every suite against its injected fault; each should find counterexamples."""
    return {name: mutant(space) for name, mutant in MUTANTS.items()}

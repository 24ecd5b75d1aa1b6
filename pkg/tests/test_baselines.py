import pytest
from conftest import histories
from hypothesis import given
from hypothesis import strategies as st

from infpset import core
from infpset.baselines import (
    LWWSet,
    NonMonotoneTimestampError,
    ORSet,
    Tag,
    TagReuseError,
    Timestamp,
    TwoPhaseSet,
    TwoPhaseState,
    metadata_tokens,
    memory_workload,
)
from infpset.laws import check_merge_algebra, is_single_phase


class TestTwoPhaseSet:
    def test_removed_forever(self):
        s = TwoPhaseSet.add(TwoPhaseSet.remove(TwoPhaseSet.add(TwoPhaseSet.initialize(), "a"), "a"), "a")
        assert TwoPhaseSet.query(s) == frozenset()

    def test_merge_of_empty(self):
        assert TwoPhaseSet.merge(TwoPhaseState(), TwoPhaseState()) == TwoPhaseState()

    def test_remove_requires_add(self):
        s = TwoPhaseSet.remove(TwoPhaseSet.initialize(), "a")
        assert s == TwoPhaseState()
        with pytest.raises(ValueError):
            TwoPhaseState(frozenset(), frozenset({"a"}))

    def test_compare(self):
        a = TwoPhaseSet.add(TwoPhaseSet.initialize(), "a")
        b = TwoPhaseSet.remove(a, "a")
        assert TwoPhaseSet.compare(a, b) and not TwoPhaseSet.compare(b, a)

    @given(histories)
    def test_agrees_with_counter_set_on_single_phase(self, history):
        if not is_single_phase(history):
            return
        twop, inf = TwoPhaseSet.initialize(), core.initialize()
        for kind, e in history:
            twop = getattr(TwoPhaseSet, kind)(twop, e)
            inf = getattr(core, kind)(inf, e)
            assert TwoPhaseSet.query(twop) == core.query(inf)


class TestORSet:
    def test_add_remove(self):
        s = ORSet.remove(ORSet.add(ORSet.initialize(), "e", Tag("r1", 1)), "e")
        assert ORSet.query(s) == frozenset()

    def test_concurrent_add_survives_remove(self):
        # hand oracle: r2's remove only cancels r2's own tag, r1's tag is unseen
        base = ORSet.initialize()
        r1 = ORSet.add(base, "e", Tag("r1", 1))
        r2 = ORSet.add(base, "e", Tag("r2", 1))
        r2 = ORSet.remove(r2, "e")
        merged = ORSet.merge(r1, r2)
        assert ORSet.query(merged) == {"e"}
        assert merged.tombstones == {("e", Tag("r2", 1))}

    def test_tag_reuse_rejected(self):
        s = ORSet.add(ORSet.initialize(), "e", Tag("r1", 1))
        with pytest.raises(TagReuseError):
            ORSet.add(s, "f", ("r1", 1))

    @pytest.mark.parametrize("n", [1, 2, 5, 8])
    def test_tokens_grow_with_concurrent_adds(self, n):
        states = [ORSet.add(ORSet.initialize(), "e", Tag(f"r{i}", 1)) for i in range(n)]
        merged = states[0]
        for s in states[1:]:
            merged = ORSet.merge(merged, s)
        assert metadata_tokens(merged) == 4 * n


class TestLWWSet:
    def test_add_then_remove(self):
        s = LWWSet.remove(LWWSet.add(LWWSet.initialize(), "e", Timestamp(1, "r1")), "e", Timestamp(2, "r1"))
        assert LWWSet.query(s) == frozenset()

    def test_replica_tiebreak(self):
        a = LWWSet.add(LWWSet.initialize(), "e", (2, "r1"))
        r = LWWSet.remove(LWWSet.initialize(), "e", (2, "r2"))
        assert LWWSet.query(LWWSet.merge(a, r)) == frozenset()
        # reversed ids: the add carries the larger timestamp
        a = LWWSet.add(LWWSet.initialize(), "e", (2, "r2"))
        r = LWWSet.remove(LWWSet.initialize(), "e", (2, "r1"))
        assert LWWSet.query(LWWSet.merge(a, r)) == {"e"}

    def test_non_monotone_timestamp(self):
        s = LWWSet.add(LWWSet.initialize(), "e", (5, "r1"))
        with pytest.raises(NonMonotoneTimestampError):
            LWWSet.remove(s, "e", (5, "r1"))
        LWWSet.remove(s, "e", (5, "r2"))

    def test_tokens(self):
        s = LWWSet.add(LWWSet.initialize(), "e", (1, "r1"))
        s = LWWSet.remove(s, "e", (2, "r1"))
        # element + clock + replica in each of the two maps
        assert metadata_tokens(s) == 6

    def test_compare(self):
        a = LWWSet.add(LWWSet.initialize(), "e", (1, "r1"))
        b = LWWSet.add(a, "e", (2, "r1"))
        assert LWWSet.compare(a, b) and not LWWSet.compare(b, a)


# -- merge algebra over reachable baseline states --------------------------

def _reachable_baselines(seed, count=60):
    import random

    rng = random.Random(seed)
    twop, orsets, lwws = [], [], []
    for h in range(count):
        t, o, w = TwoPhaseSet.initialize(), ORSet.initialize(), LWWSet.initialize()
        for step in range(rng.randint(0, 8)):
            kind, e = rng.choice(("add", "remove")), rng.choice("abc")
            rid = rng.choice(("r1", "r2", "r3"))
            t = getattr(TwoPhaseSet, kind)(t, e)
            o = ORSet.add(o, e, Tag(f"{rid}-{h}", step)) if kind == "add" else ORSet.remove(o, e)
            w = getattr(LWWSet, kind)(w, e, Timestamp(step + 1, f"{rid}-{h}"))
        twop.append(t)
        orsets.append(o)
        lwws.append(w)
    return twop, orsets, lwws


@pytest.mark.parametrize("crdt, index", [(TwoPhaseSet, 0), (ORSet, 1), (LWWSet, 2)])
def test_baseline_merge_algebra(crdt, index):
    states = _reachable_baselines(seed=3)[index]
    report = check_merge_algebra(states, merge=crdt.merge, key=lambda s: s, triples=1000, seed=11, name=crdt.name)
    assert report.passed, report.counterexamples[:3]
    for a in states[:20]:
        for b in states[:20]:
            m = crdt.merge(a, b)
            assert crdt.compare(a, m) and crdt.compare(b, m)


# -- token model --------------------------------------------------------------

@given(histories)
def test_counter_set_tokens_are_two_per_touched_element(history):
    state = core.initialize()
    for kind, e in history:
        state = getattr(core, kind)(state, e)
    touched = {e for kind, e in history if kind == "add"}
    assert metadata_tokens(state) == 2 * len(touched)


def test_empty_states_have_no_tokens():
    for crdt in (core.INF_P_SET, TwoPhaseSet, ORSet, LWWSet):
        assert metadata_tokens(crdt.initialize()) == 0


def test_unknown_state_type():
    with pytest.raises(TypeError):
        metadata_tokens({"a": 1})


@pytest.mark.parametrize("k", [1, 2, 4, 8, 10])
def test_memory_counter_set_flat_in_alternations(k):
    assert memory_workload(1, k, 1).tokens["inf-p-set"] == 2


def test_memory_examples():
    row = memory_workload(1, 1, 8)
    assert row.tokens["or-set"] >= 8 * 4
    assert row.tokens["inf-p-set"] == 2
    assert set(memory_workload(0, 3, 3).tokens.values()) == {0}
    # k cycles leave k tombstoned pairs (counted in both sets) plus n live pairs
    assert memory_workload(1, 3, 5).tokens["or-set"] == 4 * (2 * 3 + 5)


@given(st.integers(0, 4), st.integers(0, 6), st.integers(0, 6))
def test_memory_counter_set_is_two_per_element(m, k, n):
    tokens = memory_workload(m, k, n).tokens["inf-p-set"]
    assert tokens == (2 * m if (k or n) else 0)


def test_memory_rejects_negative():
    with pytest.raises(ValueError):
        memory_workload(-1, 1, 1)

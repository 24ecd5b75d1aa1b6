import pytest
from conftest import counter_maps, elements, reachable
from hypothesis import given

from infpset import core
from infpset.core import CounterMap, add, compare, deserialize, initialize, merge, query, remove, serialize


def cm(**entries):
    return CounterMap(entries)


def test_initialize_is_empty():
    assert initialize() == cm()
    assert len(initialize()) == 0
    assert query(initialize()) == frozenset()


@pytest.mark.parametrize(
    "state, expected",
    [
        (cm(), set()),
        (cm(a=1, b=2), {"a"}),
        (cm(a=3, b=4, c=1), {"a", "c"}),
    ],
)
def test_query(state, expected):
    assert query(state) == expected


@pytest.mark.parametrize(
    "state, expected",
    [
        (cm(), cm(a=1)),
        (cm(a=1), cm(a=1)),
        (cm(a=2), cm(a=3)),
        (cm(a=4, b=1), cm(a=5, b=1)),
        (cm(b=2), cm(a=1, b=2)),
    ],
)
def test_add_branches(state, expected):
    assert add(state, "a") == expected


@pytest.mark.parametrize(
    "state, expected",
    [
        (cm(), cm()),
        (cm(a=1), cm(a=2)),
        (cm(a=2), cm(a=2)),
        (cm(a=5, b=1), cm(a=6, b=1)),
        (cm(b=1), cm(b=1)),
    ],
)
def test_remove_branches(state, expected):
    assert remove(state, "a") == expected


@pytest.mark.parametrize(
    "left, right, expected",
    [
        (cm(), cm(a=5), True),
        (cm(a=1), cm(a=2, b=1), True),
        (cm(a=1), cm(b=1), False),
        (cm(b=1), cm(a=1), False),
        (cm(a=3), cm(a=2), False),
        (cm(a=2, b=1), cm(a=2), False),
        (cm(a=2), cm(a=2), True),
    ],
)
def test_compare(left, right, expected):
    assert compare(left, right) is expected


@pytest.mark.parametrize(
    "left, right, expected",
    [
        (cm(), cm(), cm()),
        (cm(a=1), cm(a=2), cm(a=2)),
        (cm(a=1), cm(b=3), cm(a=1, b=3)),
        (cm(a=4, b=1), cm(a=3, b=2, c=1), cm(a=4, b=2, c=1)),
    ],
)
def test_merge(left, right, expected):
    assert merge(left, right) == expected
    assert merge(right, left) == expected


def test_ignored_ops_return_equal_state():
    d = cm(a=1)
    assert add(d, "a") is d
    assert remove(cm(a=2), "a") == cm(a=2)


def test_serialize_examples():
    assert serialize(cm()) == b""
    assert serialize(cm(b=2, a=1)) == b"a\t1\nb\t2\n"
    # byte order, not code-point-insensitive or locale order
    assert serialize(CounterMap({"é": 1, "z": 2, "B": 3})) == "B\t3\nz\t2\né\t1\n".encode()


def test_deserialize_examples():
    assert deserialize(b"") == cm()
    assert deserialize(b"a\t1\nb\t2\n") == cm(a=1, b=2)
    assert deserialize("é\t7\n") == CounterMap({"é": 7})


@pytest.mark.parametrize(
    "data, line",
    [
        (b"a\t0\n", 1),
        (b"a\t1\nb\tx\n", 2),
        (b"a\t1\na\t2\n", 2),
        (b"b\t1\na\t2\n", 2),
        (b"a\t01\n", 1),
        (b"a\t1", 1),
        (b"a 1\n", 1),
        (b"a\t1\t2\n", 1),
        (b"\t1\n", 1),
        (b"a\t1\n\n", 2),
        (b"a\t-1\n", 1),
        (b"a\t\xd9\xa3\n", 1),
        (b"\xff\t1\n", 1),
        (b"a\t18446744073709551616\n", 1),
    ],
)
def test_deserialize_rejects_noncanonical(data, line):
    with pytest.raises(core.StateFormatError) as info:
        deserialize(data)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize("bad", ["", "a\tb", "a\nb", 3, None, "\ud800"])
def test_invalid_elements(bad):
    with pytest.raises(core.InvalidElementError):
        add(initialize(), bad)
    with pytest.raises(core.InvalidElementError):
        remove(initialize(), bad)


def test_counter_map_rejects_bad_counters():
    with pytest.raises(ValueError):
        CounterMap({"a": 0})
    with pytest.raises(TypeError):
        CounterMap({"a": True})
    with pytest.raises(ValueError):
        CounterMap([("a", 1), ("a", 2)])
    with pytest.raises(core.CounterOverflowError):
        CounterMap({"a": core.MAX_COUNTER + 1})


def test_overflow_is_a_hard_error():
    top = CounterMap({"a": core.MAX_COUNTER})  # odd: present
    with pytest.raises(core.CounterOverflowError):
        remove(top, "a")
    assert add(top, "a") == top
    even = CounterMap({"a": core.MAX_COUNTER - 1})
    assert add(even, "a")["a"] == core.MAX_COUNTER


def test_counter_map_is_immutable_and_hashable():
    d = cm(a=1)
    with pytest.raises(TypeError):
        d["a"] = 2  # type: ignore[index]
    assert hash(d) == hash(cm(a=1))
    assert {d: 1}[cm(a=1)] == 1
    assert repr(cm(b=2, a=1)) == "CounterMap({'a': 1, 'b': 2})"


# -- properties ---------------------------------------------------------------


@given(counter_maps)
def test_round_trip(d):
    assert deserialize(serialize(d)) == d


@given(counter_maps, counter_maps)
def test_equality_is_byte_equality(d1, d2):
    assert (d1 == d2) == (serialize(d1) == serialize(d2))


@given(reachable, elements)
def test_parity_membership(d, e):
    assert (e in query(d)) == (e in d and d[e] % 2 == 1)


@given(reachable, elements)
def test_add_idempotent(d, e):
    once = add(d, e)
    assert add(once, e) == once
    assert query(add(once, e)) == query(once)


@given(reachable, elements)
def test_remove_idempotent(d, e):
    once = remove(d, e)
    assert remove(once, e) == once


@given(reachable, elements)
def test_alternation_adds_two(d, e):
    result = add(remove(add(d, e), e), e)
    assert e in query(result)
    if e not in d:
        assert result[e] == 3
    elif d[e] % 2 == 1:
        assert result[e] == d[e] + 2
    else:
        # add first lifts the even counter to odd, then two more steps
        assert result[e] == d[e] + 3


@given(reachable, elements)
def test_updates_are_monotone(d, e):
    assert compare(d, add(d, e))
    assert compare(d, remove(d, e))


@given(counter_maps, counter_maps, counter_maps)
def test_merge_laws_bytewise(d1, d2, d3):
    assert serialize(merge(d1, d2)) == serialize(merge(d2, d1))
    assert serialize(merge(d1, merge(d2, d3))) == serialize(merge(merge(d1, d2), d3))
    assert serialize(merge(d1, d1)) == serialize(d1)


@given(counter_maps, counter_maps)
def test_merge_is_upper_bound(d1, d2):
    m = merge(d1, d2)
    assert compare(d1, m) and compare(d2, m)


@given(counter_maps, counter_maps, counter_maps)
def test_compare_is_partial_order(d1, d2, d3):
    assert compare(d1, d1)
    if compare(d1, d2) and compare(d2, d1):
        assert d1 == d2
    if compare(d1, d2) and compare(d2, d3):
        assert compare(d1, d3)


@given(counter_maps, counter_maps, elements)
def test_no_mutation(d1, d2, e):
    snap1, snap2 = serialize(d1), serialize(d2)
    add(d1, e), remove(d1, e), merge(d1, d2), compare(d1, d2), query(d1), serialize(d1)
    assert serialize(d1) == snap1 and serialize(d2) == snap2


def test_contract_object():
    crdt = core.INF_P_SET
    d = crdt.add(crdt.initialize(), "a")
    assert crdt.query(d) == {"a"}
    assert crdt.compare(crdt.initialize(), d)
    assert crdt.merge(d, crdt.initialize()) == d


def test_module_docstring_example():
    import doctest

    assert doctest.testmod(core).failed == 0

"""The infinite-phase set: a grow-only map of max-merged counters.

Each element maps to a positive counter. An odd counter means the element
is in the set, an even one means it was removed. ``add`` and ``remove``
only ever bump a counter to flip its parity, and ``merge`` takes the
pointwise maximum, so the longest alternating add/remove sequence seen by
any replica decides membership.

All operations are pure: they take a :class:`CounterMap` and return a new
one, never touching their inputs.

    >>> d = add(initialize(), "apple")
    >>> d = remove(d, "apple")
    >>> d = add(d, "apple")
    >>> d["apple"], sorted(query(d))
    (3, ['apple'])
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from typing import Protocol, TypeVar

__all__ = [
    "MAX_COUNTER",
    "CounterMap",
    "CounterOverflowError",
    "InvalidElementError",
    "StateFormatError",
    "StateCrdt",
    "INF_P_SET",
    "validate_element",
    "element_sort_key",
    "initialize",
    "query",
    "add",
    "remove",
    "compare",
    "merge",
    "serialize",
    "deserialize",
]

# Counters are unsigned 64-bit; incrementing past this is an error, never a wrap.
MAX_COUNTER = 2**64 - 1


class InvalidElementError(ValueError):
    """Element is empty, not a string, or contains a tab/newline."""


class CounterOverflowError(OverflowError):
    """An increment would push a counter past :data:`MAX_COUNTER`."""


class StateFormatError(ValueError):
    """Canonical state text could not be parsed.

    ``line`` is the 1-based line number of the offending entry.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def validate_element(element: object) -> str:
    if not isinstance(element, str):
        raise InvalidElementError(f"element must be str, got {type(element).__name__}")
    if not element:
        raise InvalidElementError("element must be non-empty")
    if "\t" in element or "\n" in element:
        raise InvalidElementError(f"element {element!r} contains a tab or newline")
    try:
        element.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise InvalidElementError(f"element {element!r} is not valid UTF-8") from exc
    return element


def element_sort_key(element: str) -> bytes:
    """Byte-wise ordering used everywhere a canonical order is needed."""
    return element.encode("utf-8")


def _validate_counter(element: str, counter: object) -> int:
    if isinstance(counter, bool) or not isinstance(counter, int):
        raise TypeError(f"counter for {element!r} must be int, got {type(counter).__name__}")
    if counter < 1:
        raise ValueError(f"counter for {element!r} must be >= 1, got {counter}")
    if counter > MAX_COUNTER:
        raise CounterOverflowError(f"counter for {element!r} exceeds {MAX_COUNTER}")
    return counter


class CounterMap(Mapping[str, int]):
    """Immutable mapping from elements to counters (all >= 1).

    Equality is plain mapping equality, which coincides with byte equality
    of :func:`serialize` output.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        checked: dict[str, int] = {}
        for element, counter in items:
            validate_element(element)
            if element in checked:
                raise ValueError(f"duplicate element {element!r}")
            checked[element] = _validate_counter(element, counter)
        self._entries = checked
        self._hash: int | None = None

    @classmethod
    def _trusted(cls, entries: dict[str, int]) -> CounterMap:
        # Skip validation for dicts built by the operations below.
        obj = cls.__new__(cls)
        obj._entries = entries
        obj._hash = None
        return obj

    def __getitem__(self, element: str) -> int:
        return self._entries[element]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CounterMap):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{e!r}: {c}" for e, c in sorted(self._entries.items(), key=lambda kv: element_sort_key(kv[0]))
        )
        return f"CounterMap({{{inner}}})"

    def to_dict(self) -> dict[str, int]:
        return dict(self._entries)


def initialize() -> CounterMap:
    return CounterMap._trusted({})


def query(state: CounterMap) -> frozenset[str]:
    """Elements whose counter is odd."""
    return frozenset(e for e, c in state.items() if c % 2 == 1)


def _bump(state: CounterMap, element: str) -> CounterMap:
    counter = state[element]
    if counter >= MAX_COUNTER:
        raise CounterOverflowError(f"counter for {element!r} is already at {MAX_COUNTER}")
    entries = state.to_dict()
    entries[element] = counter + 1
    return CounterMap._trusted(entries)


def add(state: CounterMap, element: str) -> CounterMap:
    """Put ``element`` in the set.

    Absent elements start at 1, even counters are bumped to odd, and an
    element that is already present (odd) leaves the state untouched.
    """
    validate_element(element)
    if element not in state:
        entries = state.to_dict()
        entries[element] = 1
        return CounterMap._trusted(entries)
    if state[element] % 2 == 0:
        return _bump(state, element)
    return state


def remove(state: CounterMap, element: str) -> CounterMap:
    """Take ``element`` out of the set; ignored unless its counter is odd."""
    validate_element(element)
    if element in state and state[element] % 2 == 1:
        return _bump(state, element)
    return state


def compare(left: CounterMap, right: CounterMap) -> bool:
    """True iff ``left <= right`` in the lattice order."""
    if not left.keys() <= right.keys():
        return False
    return all(c <= right[e] for e, c in left.items())


def merge(left: CounterMap, right: CounterMap) -> CounterMap:
    """Least upper bound: union of keys, max of shared counters."""
    entries = left.to_dict()
    for element, counter in right.items():
        mine = entries.get(element)
        if mine is None or counter > mine:
            entries[element] = counter
    return CounterMap._trusted(entries)


def serialize(state: CounterMap) -> bytes:
    """Canonical text form: ``<element>\\t<counter>\\n`` per entry, sorted by element bytes."""
    lines = [
        element_sort_key(e) + b"\t" + str(state[e]).encode("ascii") + b"\n"
        for e in sorted(state, key=element_sort_key)
    ]
    return b"".join(lines)


def deserialize(data: bytes | str) -> CounterMap:
    """Parse the canonical form produced by :func:`serialize`.

    Parsing is strict so that byte equality and state equality stay the
    same thing: unsorted keys, duplicates, leading zeros, a zero counter or
    a missing final newline are all rejected.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    if not data:
        return initialize()
    if not data.endswith(b"\n"):
        raise StateFormatError(data.count(b"\n") + 1, "missing trailing newline")

    entries: dict[str, int] = {}
    previous: bytes | None = None
    for lineno, raw in enumerate(data[:-1].split(b"\n"), start=1):
        parts = raw.split(b"\t")
        if len(parts) != 2:
            raise StateFormatError(lineno, "expected <element><TAB><counter>")
        key_bytes, digits = parts
        try:
            element = key_bytes.decode("utf-8")
        except UnicodeDecodeError:
            raise StateFormatError(lineno, "element is not valid UTF-8") from None
        if not element:
            raise StateFormatError(lineno, "empty element")
        if not digits.isdigit():
            raise StateFormatError(lineno, f"counter {digits!r} is not a decimal integer")
        if digits.startswith(b"0"):
            if digits == b"0":
                raise StateFormatError(lineno, "counter must be >= 1")
            raise StateFormatError(lineno, f"counter {digits!r} has leading zeros")
        counter = int(digits)
        if counter > MAX_COUNTER:
            raise StateFormatError(lineno, f"counter exceeds {MAX_COUNTER}")
        if previous is not None:
            if key_bytes == previous:
                raise StateFormatError(lineno, f"duplicate element {element!r}")
            if key_bytes < previous:
                raise StateFormatError(lineno, f"element {element!r} out of order")
        previous = key_bytes
        entries[element] = counter
    return CounterMap._trusted(entries)


S = TypeVar("S")


class StateCrdt(Protocol[S]):
    """What the law harness needs from any state-based CRDT.

    Update operations differ per type (tags, timestamps) and are not part
    of the protocol.
    """

    name: str

    def initialize(self) -> S: ...

    def query(self, state: S) -> frozenset[str]: ...

    def compare(self, left: S, right: S) -> bool: ...

    def merge(self, left: S, right: S) -> S: ...


class _InfPSet:
    name = "inf-p-set"
    initialize = staticmethod(initialize)
    query = staticmethod(query)
    add = staticmethod(add)
    remove = staticmethod(remove)
    compare = staticmethod(compare)
    merge = staticmethod(merge)


INF_P_SET: StateCrdt[CounterMap] = _InfPSet()

"""Line-oriented scenario scripts.

::

    # comments run to end of line
    replicas r1 r2
    op r1 add e
    send r1 r2
    crash r2
    recover r2
    quiesce
    assert r1 contains e
    assert r2 lacks e
    assert-equal r1 r2

Once ``quiesce`` appears, only assertions and further ``quiesce`` lines
may follow.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from ..core import InvalidElementError, validate_element

REPLICA_ID = re.compile(r"[A-Za-z][A-Za-z0-9_.-]{0,31}\Z")


class ScenarioParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Op:
    line: int
    replica: str
    kind: str
    element: str


@dataclass(frozen=True)
class Send:
    line: int
    source: str
    dest: str


@dataclass(frozen=True)
class Crash:
    line: int
    replica: str


@dataclass(frozen=True)
class Recover:
    line: int
    replica: str


@dataclass(frozen=True)
class AssertContains:
    line: int
    replica: str
    element: str
    expected: bool


@dataclass(frozen=True)
class AssertEqual:
    line: int
    left: str
    right: str


@dataclass(frozen=True)
class Quiesce:
    line: int


Event = Union[Op, Send, Crash, Recover, AssertContains, AssertEqual, Quiesce]


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    replicas: tuple[str, ...]
    events: tuple[Event, ...]
    source_lines: tuple[str, ...] = ()

    def text_of(self, event: Event) -> str:
        if 0 < event.line <= len(self.source_lines):
            return self.source_lines[event.line - 1].split("#", 1)[0].strip()
        return type(event).__name__

    def elements(self) -> list[str]:
        seen: dict[str, None] = {}
        for ev in self.events:
            if isinstance(ev, (Op, AssertContains)):
                seen.setdefault(ev.element, None)
        return list(seen)


def parse_scenario(text: str, name: str = "scenario") -> ScenarioScript:
    replicas: tuple[str, ...] | None = None
    events: list[Event] = []
    quiesced = False
    lines = text.splitlines()

    for lineno, raw in enumerate(lines, start=1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        keyword, args = words[0], words[1:]

        def fail(message: str):
            raise ScenarioParseError(lineno, message)

        def replica(token: str) -> str:
            if replicas is None:
                fail("'replicas' must be declared before any event")
            if token not in replicas:
                fail(f"unknown replica {token!r}")
            return token

        def element(token: str) -> str:
            try:
                return validate_element(token)
            except InvalidElementError as exc:
                fail(str(exc))

        def arity(n: int):
            if len(args) != n:
                fail(f"'{keyword}' takes {n} argument(s), got {len(args)}")

        if keyword == "replicas":
            if replicas is not None:
                fail("'replicas' declared twice")
            if not args:
                fail("'replicas' needs at least one replica id")
            for token in args:
                if not REPLICA_ID.match(token):
                    fail(f"invalid replica id {token!r}")
            if len(set(args)) != len(args):
                fail("duplicate replica id")
            replicas = tuple(args)
            continue

        if quiesced and keyword not in ("assert", "assert-equal", "quiesce"):
            fail(f"'{keyword}' after quiesce; only assertions may follow")

        if keyword == "op":
            arity(3)
            if args[1] not in ("add", "remove"):
                fail(f"op kind must be add or remove, got {args[1]!r}")
            events.append(Op(lineno, replica(args[0]), args[1], element(args[2])))
        elif keyword == "send":
            arity(2)
            src, dst = replica(args[0]), replica(args[1])
            if src == dst:
                fail("send needs two distinct replicas")
            events.append(Send(lineno, src, dst))
        elif keyword == "crash":
            arity(1)
            events.append(Crash(lineno, replica(args[0])))
        elif keyword == "recover":
            arity(1)
            events.append(Recover(lineno, replica(args[0])))
        elif keyword == "assert":
            arity(3)
            if args[1] not in ("contains", "lacks"):
                fail(f"assert expects contains or lacks, got {args[1]!r}")
            events.append(AssertContains(lineno, replica(args[0]), element(args[2]), args[1] == "contains"))
        elif keyword == "assert-equal":
            arity(2)
            events.append(AssertEqual(lineno, replica(args[0]), replica(args[1])))
        elif keyword == "quiesce":
            arity(0)
            if replicas is None:
                fail("'replicas' must be declared before any event")
            events.append(Quiesce(lineno))
            quiesced = True
        else:
            fail(f"unknown keyword {keyword!r}")

    if replicas is None:
        raise ScenarioParseError(len(lines) + 1, "no 'replicas' declaration")
    return ScenarioScript(name, replicas, tuple(events), tuple(lines))


def load_scenario(path: str | Path) -> ScenarioScript:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), name=path.stem)

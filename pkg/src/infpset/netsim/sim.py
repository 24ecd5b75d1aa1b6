"""Deterministic multi-replica simulation of state-based gossip."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .. import core
from ..core import CounterMap
from .channel import RELIABLE, Channel, FaultPolicy
from .oracle import longest_chain, reconstruct_history
from .scenario import (
    AssertContains,
    AssertEqual,
    Crash,
    Op,
    Quiesce,
    Recover,
    ScenarioScript,
    Send,
)

DEFAULT_SEED = 1729


class ScenarioError(RuntimeError):
    """A well-formed script asked for something impossible at run time."""

    def __init__(self, position: int, line: int, message: str):
        super().__init__(f"event {position} (line {line}): {message}")
        self.position = position
        self.line = line


@dataclass
class Replica:
    id: str
    state: CounterMap = field(default_factory=core.initialize)
    crashed: bool = False
    applied_ops: list[tuple[str, str, bool]] = field(default_factory=list)


class Simulator:
    """Owns every replica, the channel and the trace.

    Callers drive time with :meth:`advance`; everything else acts at the
    current tick.
    """

    def __init__(self, replica_ids, policy: FaultPolicy = RELIABLE, seed: int = DEFAULT_SEED):
        self.replicas = {rid: Replica(rid) for rid in replica_ids}
        self.channel = Channel(policy, random.Random(f"channel:{seed}"))
        self.tick = 0
        self.trace: list[tuple] = []
        self.quiesce_rounds = 0

    @property
    def crashed(self) -> set[str]:
        return {rid for rid, r in self.replicas.items() if r.crashed}

    def live(self) -> list[str]:
        return [rid for rid, r in self.replicas.items() if not r.crashed]

    def _absorb(self, dest: str, other: CounterMap) -> bool:
        replica = self.replicas[dest]
        merged = core.merge(replica.state, other)
        changed = merged != replica.state
        replica.state = merged
        return changed

    def advance(self) -> None:
        self.tick += 1
        for msg in self.channel.due(self.tick, self.crashed):
            self._absorb(msg.dest, core.deserialize(msg.payload))
            self.trace.append(("deliver", msg.msg_id, msg.dest))

    def apply(self, rid: str, kind: str, element: str) -> bool:
        replica = self.replicas[rid]
        if replica.crashed:
            raise RuntimeError(f"replica {rid} is crashed")
        before = replica.state
        replica.state = core.add(before, element) if kind == "add" else core.remove(before, element)
        effective = replica.state != before
        replica.applied_ops.append((kind, element, effective))
        self.trace.append(("op", rid, kind, element))
        return effective

    def send(self, source: str, dest: str) -> None:
        if self.replicas[source].crashed:
            raise RuntimeError(f"replica {source} is crashed")
        payload = core.serialize(self.replicas[source].state)
        msg_id = self.channel.send(source, dest, payload, self.tick)
        self.trace.append(("send", msg_id, source))

    def crash(self, rid: str) -> None:
        if self.replicas[rid].crashed:
            raise RuntimeError(f"replica {rid} is already crashed")
        self.replicas[rid].crashed = True

    def recover(self, rid: str) -> None:
        if not self.replicas[rid].crashed:
            raise RuntimeError(f"replica {rid} is not crashed")
        self.replicas[rid].crashed = False
        self.channel.release(rid, self.tick)

    def quiesce(self) -> int:
        """Fault-free all-pairs gossip among live replicas until a round changes nothing."""
        crashed = self.crashed
        for msg in self.channel.drain(crashed):
            self._absorb(msg.dest, core.deserialize(msg.payload))
            self.trace.append(("deliver", msg.msg_id, msg.dest))
        live = self.live()
        rounds = 0
        while True:
            rounds += 1
            changed = False
            for src in live:
                for dst in live:
                    if src != dst:
                        changed |= self._absorb(dst, self.replicas[src].state)
                        self.trace.append(("sync", src, dst))
            if not changed:
                break
        self.quiesce_rounds += rounds
        return rounds

    def serialized(self, rid: str) -> str:
        return core.serialize(self.replicas[rid].state).decode("utf-8")

    def oracle_check(self, elements) -> list[dict]:
        """Compare every replica's membership with the longest-chain oracle."""
        history = reconstruct_history(self.trace, list(self.replicas))
        rows = []
        for rid, replica in self.replicas.items():
            members = core.query(replica.state)
            for element in elements:
                length = longest_chain(history.ops, element, history.knowledge[rid])
                observed = element in members
                rows.append(
                    {
                        "replica": rid,
                        "element": element,
                        "observed": observed,
                        "chainLength": length,
                        "oracle": length % 2 == 1,
                        "agree": observed == (length % 2 == 1),
                    }
                )
        return rows


def _replica_dump(sim: Simulator) -> dict:
    return {
        rid: {
            "state": sim.serialized(rid),
            "members": sorted(core.query(r.state), key=core.element_sort_key),
            "crashed": r.crashed,
            "appliedOps": [[k, e, eff] for k, e, eff in r.applied_ops],
        }
        for rid, r in sim.replicas.items()
    }


# -- scripted scenarios -----------------------------------------------------


@dataclass
class ScenarioReport:
    scenario: str
    seed: int
    policy: FaultPolicy
    assertions: list[dict]
    replicas: dict
    converged: bool
    oracle: list[dict]
    channel: dict
    ticks: int
    quiesce_rounds: int

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    @property
    def oracle_agrees(self) -> bool:
        return all(row["agree"] for row in self.oracle)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "faultPolicy": self.policy.to_dict(),
            "passed": self.passed,
            "assertions": self.assertions,
            "replicas": self.replicas,
            "converged": self.converged,
            "oracleAgreement": self.oracle_agrees,
            "oracle": self.oracle,
            "channel": self.channel,
            "ticks": self.ticks,
            "quiesceRounds": self.quiesce_rounds,
        }


def run_scenario(
    script: ScenarioScript, seed: int = DEFAULT_SEED, policy: FaultPolicy = RELIABLE
) -> ScenarioReport:
    sim = Simulator(script.replicas, policy, seed)
    assertions = []
    for position, event in enumerate(script.events):
        sim.advance()
        try:
            if isinstance(event, Op):
                sim.apply(event.replica, event.kind, event.element)
            elif isinstance(event, Send):
                sim.send(event.source, event.dest)
            elif isinstance(event, Crash):
                sim.crash(event.replica)
            elif isinstance(event, Recover):
                sim.recover(event.replica)
            elif isinstance(event, Quiesce):
                sim.quiesce()
            elif isinstance(event, AssertContains):
                present = event.element in core.query(sim.replicas[event.replica].state)
                assertions.append(
                    {
                        "line": event.line,
                        "text": script.text_of(event),
                        "passed": present == event.expected,
                        "detail": f"{event.element} {'present' if present else 'absent'} on {event.replica}",
                    }
                )
            elif isinstance(event, AssertEqual):
                left, right = sim.serialized(event.left), sim.serialized(event.right)
                assertions.append(
                    {
                        "line": event.line,
                        "text": script.text_of(event),
                        "passed": left == right,
                        "detail": "states identical" if left == right else f"{left!r} != {right!r}",
                    }
                )
        except RuntimeError as exc:
            raise ScenarioError(position, event.line, str(exc)) from None

    states = {sim.serialized(rid) for rid in sim.replicas}
    return ScenarioReport(
        scenario=script.name,
        seed=seed,
        policy=policy,
        assertions=assertions,
        replicas=_replica_dump(sim),
        converged=len(states) == 1,
        oracle=sim.oracle_check(script.elements()),
        channel=sim.channel.stats.to_dict(),
        ticks=sim.tick,
        quiesce_rounds=sim.quiesce_rounds,
    )


# -- randomized convergence runs --------------------------------------------


@dataclass
class ConvergenceReport:
    params: dict
    converged: bool
    state: str
    divergence: dict
    crashes: list[dict]
    lost_ops: list[str]
    oracle_disagreements: list[dict]
    channel: dict
    quiesce_rounds: int
    dump: dict | None = None

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.state.encode("utf-8")).hexdigest()

    @property
    def ok(self) -> bool:
        return self.converged and not self.lost_ops and not self.oracle_disagreements

    def to_dict(self) -> dict:
        out = {
            "params": self.params,
            "converged": self.converged,
            "digest": self.digest,
            "convergedState": self.state,
            "divergenceBeforeQuiesce": self.divergence,
            "crashes": self.crashes,
            "lostOps": self.lost_ops,
            "oracleDisagreements": self.oracle_disagreements,
            "channel": self.channel,
            "quiesceRounds": self.quiesce_rounds,
        }
        if self.dump is not None:
            out["replicaDump"] = self.dump
        return out


def _crash_plan(rng: random.Random, ids: list[str], ops: int, crashes: int) -> list[tuple[str, int, int]]:
    plan = []
    for _ in range(crashes):
        if ops == 0:
            break
        start = rng.randrange(ops)
        plan.append((rng.choice(ids), start, rng.randint(start + 1, ops)))
    return plan


def run_fuzz(
    replicas: int = 5,
    ops: int = 200,
    universe: int = 10,
    policy: FaultPolicy = RELIABLE,
    seed: int = DEFAULT_SEED,
    *,
    crashes: int = 0,
    crash_windows: list[tuple[str, int, int]] | None = None,
    sends_per_op: int = 1,
) -> ConvergenceReport:
    """Random ops and lossy gossip, then quiesce and check byte-identical convergence.

    ``crash_windows`` entries are ``(replica_id, first_op, recover_before_op)``;
    when omitted, ``crashes`` random windows are drawn. A crash is skipped
    if it would leave no replica up.
    """
    if replicas < 2:
        raise ValueError("fuzzing needs at least 2 replicas")
    if ops < 0 or universe < 1 or sends_per_op < 0 or crashes < 0:
        raise ValueError("ops, crashes and sends_per_op must be >= 0 and universe >= 1")

    rng = random.Random(f"workload:{seed}")
    ids = [f"r{i + 1}" for i in range(replicas)]
    elements = [f"e{i}" for i in range(universe)]
    sim = Simulator(ids, policy, seed)
    plan = crash_windows if crash_windows is not None else _crash_plan(rng, ids, ops, crashes)
    for rid, start, end in plan:
        if rid not in sim.replicas or not 0 <= start < end:
            raise ValueError(f"bad crash window {(rid, start, end)!r}")

    applied_crashes: list[dict] = []
    open_crash: dict[str, dict] = {}
    at_crash: dict[str, CounterMap] = {}

    def do_recover(rid: str, at: int) -> None:
        sim.recover(rid)
        open_crash.pop(rid)["recoveredAtOp"] = at

    for i in range(ops):
        for rid, start, end in plan:
            if end == i and rid in open_crash:
                do_recover(rid, i)
        for rid, start, end in plan:
            if start == i and rid not in open_crash and len(sim.live()) > 1:
                sim.crash(rid)
                at_crash[f"{rid}@{i}"] = sim.replicas[rid].state
                record = {"replica": rid, "crashedAtOp": i, "recoveredAtOp": None}
                open_crash[rid] = record
                applied_crashes.append(record)
        sim.advance()
        live = sim.live()
        sim.apply(rng.choice(live), rng.choice(("add", "remove")), rng.choice(elements))
        for _ in range(sends_per_op):
            src = rng.choice(live)
            sim.send(src, rng.choice([r for r in ids if r != src]))

    for rid in list(open_crash):
        do_recover(rid, ops)

    before = {rid: sim.replicas[rid].state for rid in ids}
    sim.advance()
    sim.quiesce()

    serial = {rid: sim.serialized(rid) for rid in ids}
    converged = len(set(serial.values())) == 1
    final = sim.replicas[ids[0]].state

    lost = [
        f"state of {rid} before quiesce is not below converged state"
        for rid, s in before.items()
        if not core.compare(s, final)
    ]
    lost += [f"state of {key} at crash time is not below converged state" for key, s in at_crash.items() if not core.compare(s, final)]

    per_replica = {}
    for rid, s in before.items():
        differing = sum(1 for e in final.keys() | s.keys() if s.get(e) != final.get(e))
        per_replica[rid] = differing
    divergence = {
        "distinctStates": len(set(before.values())),
        "elementsBehind": per_replica,
    }

    touched = sorted({e for rid in ids for _, e, _ in sim.replicas[rid].applied_ops}, key=core.element_sort_key)
    disagreements = [row for row in sim.oracle_check(touched) if not row["agree"]]

    return ConvergenceReport(
        params={
            "replicas": replicas,
            "ops": ops,
            "universe": universe,
            "seed": seed,
            "faultPolicy": policy.to_dict(),
            "sendsPerOp": sends_per_op,
            "crashWindows": [list(w) for w in plan],
        },
        converged=converged,
        state=serial[ids[0]],
        divergence=divergence,
        crashes=applied_crashes,
        lost_ops=lost,
        oracle_disagreements=disagreements,
        channel=sim.channel.stats.to_dict(),
        quiesce_rounds=sim.quiesce_rounds,
        dump=None if converged else _replica_dump(sim),
    )

"""Lossy, duplicating, reordering point-to-point channel on a tick clock."""

from __future__ import annotations

import random
from dataclasses import dataclass, field


@dataclass(frozen=True)
class FaultPolicy:
    p_drop: float = 0.0
    duplicate: float = 0.0
    max_reorder: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_drop < 1.0:
            raise ValueError(f"p_drop must be in [0, 1), got {self.p_drop}")
        if not 0.0 <= self.duplicate <= 1.0:
            raise ValueError(f"duplicate probability must be in [0, 1], got {self.duplicate}")
        if isinstance(self.max_reorder, bool) or not isinstance(self.max_reorder, int) or self.max_reorder < 0:
            raise ValueError(f"max_reorder must be a non-negative integer, got {self.max_reorder!r}")

    def to_dict(self) -> dict:
        return {"pDrop": self.p_drop, "duplicate": self.duplicate, "maxReorder": self.max_reorder}


RELIABLE = FaultPolicy()


@dataclass
class Message:
    msg_id: int
    source: str
    dest: str
    payload: bytes
    deliver_at: int
    copy: int = 0
    held: bool = False


@dataclass
class ChannelStats:
    sent: int = 0
    dropped: int = 0
    duplicated: int = 0
    delivered: int = 0
    held: int = 0

    def to_dict(self) -> dict:
        return {
            "sent": self.sent,
            "dropped": self.dropped,
            "duplicated": self.duplicated,
            "delivered": self.delivered,
            "held": self.held,
        }


class Channel:
    """Messages in flight, with every fault decision drawn from one seeded RNG.

    A message addressed to a crashed replica is held rather than lost and
    gets a fresh drop/delay draw when that replica recovers.
    """

    def __init__(self, policy: FaultPolicy, rng: random.Random):
        self.policy = policy
        self.rng = rng
        self.in_flight: list[Message] = []
        self.stats = ChannelStats()
        self._next_id = 0
        self._order = 0

    def _schedule(self, msg: Message, tick: int) -> bool:
        if self.rng.random() < self.policy.p_drop:
            self.stats.dropped += 1
            return False
        delay = self.rng.randint(0, self.policy.max_reorder) if self.policy.max_reorder else 0
        msg.deliver_at = tick + 1 + delay
        msg.held = False
        self.in_flight.append(msg)
        return True

    def send(self, source: str, dest: str, payload: bytes, tick: int) -> int:
        """Queue ``payload``; returns the message id shared by all its copies."""
        msg_id = self._next_id
        self._next_id += 1
        self.stats.sent += 1
        copies = 1
        if self.policy.duplicate and self.rng.random() < self.policy.duplicate:
            copies = 2
            self.stats.duplicated += 1
        for copy in range(copies):
            self._schedule(Message(msg_id, source, dest, payload, tick, copy), tick)
        return msg_id

    def due(self, tick: int, crashed: set[str]) -> list[Message]:
        """Pop messages ready at ``tick`` whose destination is up."""
        ready, waiting = [], []
        for msg in self.in_flight:
            if msg.held or msg.deliver_at > tick:
                waiting.append(msg)
            elif msg.dest in crashed:
                msg.held = True
                self.stats.held += 1
                waiting.append(msg)
            else:
                ready.append(msg)
        self.in_flight = waiting
        ready.sort(key=lambda m: (m.deliver_at, m.msg_id, m.copy))
        self.stats.delivered += len(ready)
        return ready

    def release(self, dest: str, tick: int) -> None:
        """Reschedule messages held for ``dest``, drawing faults again."""
        held = [m for m in self.in_flight if m.held and m.dest == dest]
        self.in_flight = [m for m in self.in_flight if not (m.held and m.dest == dest)]
        for msg in held:
            self._schedule(msg, tick)

    def drain(self, crashed: set[str]) -> list[Message]:
        """Hand over everything not addressed to a crashed replica, fault-free."""
        ready = [m for m in self.in_flight if m.dest not in crashed]
        self.in_flight = [m for m in self.in_flight if m.dest in crashed]
        ready.sort(key=lambda m: (m.deliver_at, m.msg_id, m.copy))
        self.stats.delivered += len(ready)
        return ready

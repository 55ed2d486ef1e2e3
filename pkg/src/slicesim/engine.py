"""Deterministic discrete-event core: virtual clock + stable-ordered queue.

Events pop in (time, insertion sequence) order, so simultaneous events
resolve in the order they were scheduled, every run.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any


class SchedulingError(RuntimeError):
    """An event was scheduled in the past; this is a programming bug."""


@dataclass(frozen=True)
class SimEvent:
    time: float
    sequence: int
    payload: Any = None


@dataclass
class SimClock:
    now: float = 0.0

    def advance_to(self, t: float) -> None:
        if t < self.now:
            raise SchedulingError(f"clock cannot move backwards: {t} < {self.now}")
        self.now = t


@dataclass
class EventQueue:
    _heap: list[tuple[float, int, SimEvent]] = field(default_factory=list)
    _next_seq: int = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, time: float, payload: Any, clock: SimClock | None = None) -> SimEvent:
        if clock is not None and time < clock.now:
            raise SchedulingError(f"event at t={time} is before now={clock.now}")
        event = SimEvent(time=time, sequence=self._next_seq, payload=payload)
        self._next_seq += 1
        heapq.heappush(self._heap, (event.time, event.sequence, event))
        return event

    def peek_time(self) -> float | None:
        return self._heap[0][0] if self._heap else None

    def pop_next(self, clock: SimClock) -> SimEvent | None:
        """Minimal (time, sequence) event, advancing the clock; None at end.

        The clock never moves backwards: popping an event that became due
        while the clock sat at a later barrier leaves `now` unchanged.
        """
        if not self._heap:
            return None
        _, _, event = heapq.heappop(self._heap)
        if event.time > clock.now:
            clock.advance_to(event.time)
        return event


def push_event(queue: EventQueue, clock: SimClock, time: float, payload: Any) -> SimEvent:
    return queue.push(time, payload, clock)


def pop_next(queue: EventQueue, clock: SimClock) -> SimEvent | None:
    return queue.pop_next(clock)

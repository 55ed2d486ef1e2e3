import random

import pytest

from slicesim.engine import EventQueue, SchedulingError, SimClock


def test_pop_order_by_time():
    clock = SimClock()
    queue = EventQueue()
    queue.push(5.0, "a", clock)
    queue.push(3.0, "b", clock)
    assert queue.pop_next(clock).payload == "b"
    assert queue.pop_next(clock).payload == "a"
    assert clock.now == 5.0


def test_stable_tie_break():
    clock = SimClock()
    queue = EventQueue()
    queue.push(7.0, "A", clock)
    queue.push(7.0, "B", clock)
    assert [queue.pop_next(clock).payload for _ in range(2)] == ["A", "B"]


def test_push_in_past_rejected():
    clock = SimClock()
    queue = EventQueue()
    queue.push(10.0, "x", clock)
    queue.pop_next(clock)
    assert clock.now == 10.0
    with pytest.raises(SchedulingError):
        queue.push(9.0, "late", clock)


def test_pop_same_time_keeps_clock():
    clock = SimClock()
    queue = EventQueue()
    queue.push(10.0, "x", clock)
    queue.push(10.0, "y", clock)
    queue.pop_next(clock)
    assert clock.now == 10.0
    queue.pop_next(clock)
    assert clock.now == 10.0


def test_empty_pop_signals_end():
    clock = SimClock()
    queue = EventQueue()
    assert queue.pop_next(clock) is None


def test_clock_never_decreases():
    clock = SimClock()
    clock.advance_to(5.0)
    with pytest.raises(SchedulingError):
        clock.advance_to(4.0)


def test_random_events_pop_globally_sorted():
    rng = random.Random(0)
    clock = SimClock()
    queue = EventQueue()
    pushed = []
    popped = []
    # Interleaved pushes and pops; pushes never in the past.
    for i in range(100_000):
        if queue._heap and rng.random() < 0.4:
            event = queue.pop_next(clock)
            popped.append((event.time, event.sequence))
        else:
            t = clock.now + rng.random() * 100.0
            event = queue.push(t, i, clock)
            pushed.append((event.time, event.sequence))
    while True:
        event = queue.pop_next(clock)
        if event is None:
            break
        popped.append((event.time, event.sequence))
    # Conservation: every pushed event popped exactly once.
    assert sorted(popped) == sorted(pushed)
    assert len(popped) == len(pushed)
    # Sort-comparison oracle: the popped sequence is globally sorted by
    # (time, sequence) because pushes can never be scheduled in the past.
    assert popped == sorted(popped)

"""Deterministic discrete-event engine: monotone clock, ordered event queue,
reproducible pseudo-random stream."""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass


class SimulationError(Exception):
    """Fatal error raised by the engine or an event handler."""


class SchedulingInPastError(SimulationError):
    """An event was scheduled before the current clock (programming error)."""


# Event kinds. Plain ints keep heap entries cheap to compare and dispatch.
PACKET_ARRIVAL = 0
TX_COMPLETE = 1
TIMER_EXPIRY = 2
SOURCE_START = 3
SOURCE_STOP = 4

KIND_NAMES = {
    PACKET_ARRIVAL: "packet-arrival",
    TX_COMPLETE: "transmission-complete",
    TIMER_EXPIRY: "timer-expiry",
    SOURCE_START: "source-start",
    SOURCE_STOP: "source-stop",
}


class Event:
    """A timestamped unit of simulated work.

    Ordering is (fire_at, insertion_index): ties between simultaneous events
    resolve in scheduling order, which keeps runs fully deterministic.
    """

    __slots__ = ("fire_at", "insertion_index", "kind", "target", "packet")

    def __init__(self, fire_at, kind, target, packet=None):
        self.fire_at = fire_at
        self.insertion_index = -1  # assigned by the queue on schedule()
        self.kind = kind
        self.target = target
        self.packet = packet

    def __repr__(self):
        return (f"Event(t={self.fire_at:.6f}, #{self.insertion_index}, "
                f"{KIND_NAMES.get(self.kind, self.kind)})")


class RngStream:
    """Seeded pseudo-random stream; same seed yields the same sequence on
    every platform. None of the shipped scenarios draw from it, but entities
    that declare randomness must use this stream, never the global RNG."""

    def __init__(self, seed: int):
        self.seed = seed
        self.position = 0
        self._rng = random.Random(seed)

    def uniform(self, a: float, b: float) -> float:
        self.position += 1
        return self._rng.uniform(a, b)

    def randint(self, a: int, b: int) -> int:
        self.position += 1
        return self._rng.randint(a, b)


@dataclass
class RunStats:
    events_processed: int = 0
    final_clock_s: float = 0.0


END_OF_SIMULATION = None


class Simulator:
    """Single-threaded event loop. Owns the clock, the event queue and the
    run's random stream; every entity it drives is confined to it."""

    def __init__(self, seed: int = 0, horizon_s: float = math.inf):
        self.now = 0.0
        self.horizon_s = horizon_s
        self.rng = RngStream(seed)
        self._heap = []
        self._counter = 0
        self._id_counter = 0
        self.stats = RunStats()

    def new_id(self) -> int:
        """Monotone per-run identifier (packet ids etc.); never shared
        across runs, so concurrent runs stay independent."""
        self._id_counter += 1
        return self._id_counter

    def schedule(self, event: Event) -> None:
        """Insert an event. Scheduling before the current clock is fatal."""
        t = event.fire_at
        if t < self.now:
            raise SchedulingInPastError(
                f"event at t={t!r} scheduled while clock is {self.now!r}")
        if not (t < math.inf) or t != t:  # rejects +inf and NaN
            raise SimulationError(f"non-finite event time {t!r}")
        self._counter += 1
        event.insertion_index = self._counter
        heapq.heappush(self._heap, (t, self._counter, event))

    def schedule_at(self, fire_at, kind, target, packet=None) -> Event:
        ev = Event(fire_at, kind, target, packet)
        self.schedule(ev)
        return ev

    def queue_len(self) -> int:
        return len(self._heap)

    def pop_next(self):
        """Pop the event with minimal (fire_at, insertion_index) and advance
        the clock to it. Returns END_OF_SIMULATION when the queue is empty or
        the next event lies beyond the horizon (hard cut)."""
        if not self._heap:
            return END_OF_SIMULATION
        t, _, event = self._heap[0]
        if t > self.horizon_s:
            return END_OF_SIMULATION
        heapq.heappop(self._heap)
        self.now = t
        return event

    def run_until(self, horizon_s=None) -> RunStats:
        """Process all events with fire_at <= horizon in order."""
        if horizon_s is not None:
            self.horizon_s = horizon_s
        while True:
            event = self.pop_next()
            if event is END_OF_SIMULATION:
                break
            event.target.handle_event(self, event)
            self.stats.events_processed += 1
        self.stats.final_clock_s = self.now
        return self.stats

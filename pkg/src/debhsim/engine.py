"""Discrete-event kernel: virtual clock, event queue, seeded randomness."""

import heapq
import random


class SchedulingError(ValueError):
    pass


class EventHandle:
    """Returned by schedule(); lets the caller cancel a pending event."""

    __slots__ = ("cancelled",)

    def __init__(self):
        self.cancelled = False

    def cancel(self):
        self.cancelled = True


class Simulator:
    """Virtual-time event loop.

    Events at the same fire time run in insertion order.  All randomness
    for a run must come from self.rng so a seed reproduces the run.
    """

    def __init__(self, seed=0, trace=False):
        self.now = 0.0
        self.rng = random.Random(seed)
        self._queue = []
        self._seq = 0
        self.processed = 0
        self.trace = [] if trace else None

    def schedule(self, fire_time, action, node=None, kind="", detail=""):
        if fire_time < self.now:
            raise SchedulingError(
                "event at %.4f is before clock %.4f" % (fire_time, self.now))
        handle = EventHandle()
        heapq.heappush(self._queue,
                       (fire_time, self._seq, action, handle, node, kind, detail))
        self._seq += 1
        return handle

    def schedule_in(self, delay, action, node=None, kind="", detail=""):
        return self.schedule(self.now + delay, action, node, kind, detail)

    def log(self, node, kind, detail=""):
        if self.trace is not None:
            self.trace.append("%.4f,%s,%s,%s" % (self.now, node, kind, detail))

    def run_until(self, t_end):
        """Process every event due at or before t_end; returns the count."""
        if t_end < self.now:
            raise SchedulingError(
                "cannot run backward to %.4f from %.4f" % (t_end, self.now))
        count = 0
        while self._queue and self._queue[0][0] <= t_end:
            fire_time, _, action, handle, node, kind, detail = heapq.heappop(self._queue)
            if handle.cancelled:
                continue
            self.now = fire_time
            if kind:
                self.log(node, kind, detail)
            action()
            count += 1
        self.now = t_end
        self.processed += count
        return count

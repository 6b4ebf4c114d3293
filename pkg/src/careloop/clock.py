"""Monotonic time abstraction with a deterministic virtual implementation.

Latency-sensitive code never calls time.sleep directly; it goes through a
Clock so tests can replay multi-threaded schedules in virtual time. The
virtual clock is a discrete-event coordinator: it only advances when every
registered task thread is parked in sleep(), and then jumps straight to the
earliest wake-up. Real threads, zero wall-clock waiting.

Protocol for virtual time:
  * the coordinating thread calls task() once per worker BEFORE starting it
    (so a not-yet-started worker blocks advancement), and the worker adopts
    the handle as a context manager around its body;
  * a thread that wants to sleep inline (no separate worker) wraps the sleep
    in scoped();
  * never hold a lock that another participating thread may need while
    sleeping on the clock.
"""

from __future__ import annotations

import bisect
import contextlib
import threading
import time


class TaskHandle:
    """Registration token for a thread participating in virtual time."""

    def __init__(self, clock: "VirtualClock"):
        self._clock = clock
        self._done = False

    def __enter__(self) -> "TaskHandle":
        _local.depth = getattr(_local, "depth", 0) + 1
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _local.depth -= 1
        self.close()

    def close(self) -> None:
        if not self._done:
            self._done = True
            self._clock._release()


class _NullHandle:
    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        return None

    def close(self) -> None:
        return None


_local = threading.local()


class RealClock:
    """Wall-clock implementation; task bookkeeping is a no-op."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)

    def task(self):
        return _NullHandle()

    def scoped(self):
        return _NullHandle()

    def suspended(self):
        return _NullHandle()


class VirtualClock:
    """Deterministic clock driven by the sleep pattern of its task threads.

    now() starts at `start` and advances only via sleep(): when all known
    tasks are simultaneously asleep, time jumps to the earliest wake-up.
    """

    def __init__(self, start: float = 0.0):
        self._now = float(start)
        self._cond = threading.Condition()
        self._busy = 0
        self._wakes: list[float] = []

    def now(self) -> float:
        with self._cond:
            return self._now

    def task(self) -> TaskHandle:
        with self._cond:
            self._busy += 1
        return TaskHandle(self)

    def scoped(self):
        """Task context for an inline sleep; no-op if already inside one."""
        if getattr(_local, "depth", 0) > 0:
            return _NullHandle()
        return self.task()

    @contextlib.contextmanager
    def suspended(self):
        """Release this thread's busy registration around a blocking wait.

        A registered task that joins child tasks must suspend itself,
        otherwise it counts as busy and virtual time can never advance to
        wake the children. No-op outside a task context.
        """
        if getattr(_local, "depth", 0) == 0:
            yield
            return
        with self._cond:
            self._busy -= 1
            self._advance_if_parked()
        try:
            yield
        finally:
            with self._cond:
                self._busy += 1

    def sleep(self, seconds: float) -> None:
        if seconds <= 0:
            return
        with self._cond:
            if self._busy <= 0:
                raise RuntimeError("sleep() outside a clock task context")
            wake = self._now + seconds
            bisect.insort(self._wakes, wake)
            self._busy -= 1
            self._advance_if_parked()
            while self._now < wake:
                self._cond.wait()
            self._wakes.remove(wake)
            self._busy += 1

    def _release(self) -> None:
        with self._cond:
            self._busy -= 1
            self._advance_if_parked()

    def _advance_if_parked(self) -> None:
        # Called with the lock held. Jump only when no task can still act and
        # nobody is already due to wake at the current time.
        if self._busy == 0 and self._wakes and self._wakes[0] > self._now:
            self._now = self._wakes[0]
            self._cond.notify_all()


def spawn(clock, fn, *args, handle=None, **kwargs):
    """Run fn on a daemon thread registered with the clock.

    The task handle is created before the thread starts, so virtual time
    cannot advance past the worker's first sleep. When spawning a BATCH of
    workers whose relative timing matters, create every handle first (or
    use spawn_all); otherwise an early worker can sleep and advance the
    clock before its siblings are registered. Returns a minimal future
    (result() joins the thread).
    """
    handle = handle if handle is not None else clock.task()
    done = threading.Event()
    box: dict = {}

    def body():
        with handle:
            try:
                box["value"] = fn(*args, **kwargs)
            except BaseException as exc:  # noqa: BLE001 - transported to caller
                box["error"] = exc
        done.set()

    thread = threading.Thread(target=body, daemon=True)
    thread.start()
    return _SpawnResult(done, box)


def spawn_all(clock, calls):
    """Spawn a batch of (fn, *args) with all handles created up front."""
    calls = list(calls)
    handles = [clock.task() for _ in calls]
    return [
        spawn(clock, call[0], *call[1:], handle=handle)
        for call, handle in zip(calls, handles)
    ]


class _SpawnResult:
    def __init__(self, done: threading.Event, box: dict):
        self._done = done
        self._box = box

    def wait(self, timeout: float | None = None) -> bool:
        return self._done.wait(timeout)

    def result(self, timeout: float | None = None):
        if not self._done.wait(timeout):
            raise TimeoutError("spawned task did not finish")
        if "error" in self._box:
            raise self._box["error"]
        return self._box["value"]

    def exception(self, timeout: float | None = None):
        if not self._done.wait(timeout):
            raise TimeoutError("spawned task did not finish")
        return self._box.get("error")


REAL_CLOCK = RealClock()

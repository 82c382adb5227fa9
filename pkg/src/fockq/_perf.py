import contextlib
import time


class PerfRegions:
    """
    Accumulates wall-clock time spent in named regions of a computation.

    Instances are pickled without their in-flight state, so a region must not
    be active when a result crosses a process boundary.
    """

    def __init__(self, names=()):
        self.times = {name: 0 for name in names}
        self._active = {}

    def start_region(self, name):
        if name not in self.times:
            raise KeyError(f"unknown region: {name!r}")
        elif name in self._active:
            raise RuntimeError(f"region {name!r} is already active")
        self._active[name] = time.perf_counter_ns()

    def stop_region(self, name):
        stop = time.perf_counter_ns()
        try:
            start = self._active.pop(name)
        except KeyError:
            raise RuntimeError(f"region {name!r} is not active") from None
        self.times[name] += stop - start

    def any_active_regions(self):
        return len(self._active) > 0

    @contextlib.contextmanager
    def region(self, name):
        self.start_region(name)
        try:
            yield
        finally:
            self.stop_region(name)

    def __add__(self, other):
        if not isinstance(other, PerfRegions):
            return NotImplemented
        elif self.any_active_regions() or other.any_active_regions():
            raise RuntimeError("can't add PerfRegions with active regions")
        elif self.times.keys() != other.times.keys():
            raise ValueError("operands don't have the same region names")
        out = PerfRegions(self.times)
        out.times = {k: v + other.times[k] for k, v in self.times.items()}
        return out

    def times_sec(self):
        if self.any_active_regions():
            raise RuntimeError("timings were requested while a region is active")
        return {k: v / 1e9 for k, v in self.times.items()}

    def summarize_timing_sec(self):
        return "  ".join(f"{k}: {v:.3f}s" for k, v in self.times_sec().items())

    def __getstate__(self):
        if self.any_active_regions():
            raise RuntimeError("can't pickle PerfRegions with active regions")
        return {"times": dict(self.times)}

    def __setstate__(self, state):
        self.times = state["times"]
        self._active = {}

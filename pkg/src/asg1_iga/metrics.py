"""Stage timings for asg1-iga.

Each pipeline stage (gluing, basis, matrices, mass, condition, verify) records
its wall time and the size of the problem it worked on, so runs at different
refinement levels can be compared per function. Cache hits and misses of the
dimension and condition results are counted alongside.
"""
import os
import threading
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from datetime import datetime
from typing import Deque, Dict, Optional

# Recent durations kept per stage
HISTORY_LENGTH = 1000


@dataclass
class StageMetrics:
    """Accumulated timings of one pipeline stage."""

    runs: int = 0
    failures: int = 0
    total_ms: float = 0.0
    slowest_ms: float = 0.0
    total_size: int = 0
    largest_size: int = 0
    durations: Deque[float] = field(default_factory=lambda: deque(maxlen=HISTORY_LENGTH))

    @property
    def mean_ms(self) -> float:
        return self.total_ms / self.runs if self.runs else 0.0

    @property
    def median_ms(self) -> float:
        """Median of the retained durations."""
        if not self.durations:
            return 0.0
        ordered = sorted(self.durations)
        mid = len(ordered) // 2
        if len(ordered) % 2:
            return ordered[mid]
        return 0.5 * (ordered[mid - 1] + ordered[mid])

    @property
    def ms_per_function(self) -> Optional[float]:
        """Time per basis function over the runs that reported a size."""
        return self.total_ms / self.total_size if self.total_size else None


class MetricsCollector:
    """Thread-safe registry of stage timings and cache counts."""

    _instance: Optional["MetricsCollector"] = None
    _lock = threading.Lock()

    def __init__(self):
        self._stages: Dict[str, StageMetrics] = defaultdict(StageMetrics)
        self._cache_hits = 0
        self._cache_misses = 0
        self._started = datetime.now()
        self._stages_lock = threading.Lock()
        self._enabled = os.getenv("ASG1_METRICS_ENABLED", "true").lower() == "true"

    @classmethod
    def get_instance(cls) -> "MetricsCollector":
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = cls()
        return cls._instance

    def record_stage(self, stage: str, elapsed_ms: float, ok: bool, size: Optional[int] = None):
        """
        Record one run of a pipeline stage.

        Args:
            stage: Stage name
            elapsed_ms: Wall time of the run
            ok: False when the stage raised
            size: Number of basis functions (or matrix order) the run handled
        """
        if not self._enabled:
            return

        with self._stages_lock:
            metrics = self._stages[stage]
            metrics.runs += 1
            if not ok:
                metrics.failures += 1
            metrics.total_ms += elapsed_ms
            metrics.slowest_ms = max(metrics.slowest_ms, elapsed_ms)
            metrics.durations.append(elapsed_ms)
            if size:
                metrics.total_size += size
                metrics.largest_size = max(metrics.largest_size, size)

    def record_cache_hit(self):
        if self._enabled:
            with self._stages_lock:
                self._cache_hits += 1

    def record_cache_miss(self):
        if self._enabled:
            with self._stages_lock:
                self._cache_misses += 1

    def get_summary(self) -> Dict:
        """Timings and cache counts as a JSON-ready dict."""
        with self._stages_lock:
            lookups = self._cache_hits + self._cache_misses
            stages = {}
            for name, m in self._stages.items():
                per_function = m.ms_per_function
                stages[name] = {
                    "runs": m.runs,
                    "failures": m.failures,
                    "mean_ms": round(m.mean_ms, 2),
                    "median_ms": round(m.median_ms, 2),
                    "slowest_ms": round(m.slowest_ms, 2),
                    "largest_size": m.largest_size,
                    "ms_per_function": round(per_function, 4) if per_function is not None else None,
                }
            return {
                "uptime_seconds": (datetime.now() - self._started).total_seconds(),
                "cache": {
                    "hits": self._cache_hits,
                    "misses": self._cache_misses,
                    "hit_rate": self._cache_hits / lookups if lookups else 0,
                },
                "stages": stages,
            }

    def format_summary(self) -> str:
        """Stage timings as a text table."""
        summary = self.get_summary()
        lines = ["⏱️ Stage timings (ms)", ""]
        for name, stage in summary["stages"].items():
            size = f"n={stage['largest_size']}" if stage["largest_size"] else ""
            lines.append(
                f"  {name:<10} runs={stage['runs']:<4} mean={stage['mean_ms']:<10} "
                f"slowest={stage['slowest_ms']:<10} {size}".rstrip()
            )
        cache = summary["cache"]
        lines.append("")
        lines.append(f"  cache hits={cache['hits']} misses={cache['misses']}")
        return "\n".join(lines)

    def reset(self):
        with self._stages_lock:
            self._stages.clear()
            self._cache_hits = 0
            self._cache_misses = 0
            self._started = datetime.now()


def get_metrics() -> MetricsCollector:
    """Global accessor for the metrics collector."""
    return MetricsCollector.get_instance()


class TimedOperation:
    """
    Time a pipeline stage.

    Set ``size`` inside the block when the stage knows how many functions it handled::

        with TimedOperation("basis") as timer:
            basis = build_full_basis(G, gluing)
            timer.size = len(basis)
    """

    def __init__(self, stage: str, size: Optional[int] = None):
        self.stage = stage
        self.size = size
        self.start_time: Optional[float] = None
        self.ok = True

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        elapsed_ms = (time.perf_counter() - self.start_time) * 1000
        self.ok = exc_type is None
        get_metrics().record_stage(self.stage, elapsed_ms, self.ok, self.size)
        return False

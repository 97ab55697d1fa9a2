"""Request counters and per-stage latency quantiles.

Lifetime and rolling-window views; updates are lock-protected so pipeline
workers can record concurrently.
"""

from __future__ import annotations

import threading
import time
from collections import defaultdict, deque

import numpy as np

DEFAULT_WINDOW_SECONDS = 300.0


def _quantiles(samples: list[float]) -> dict[str, float]:
    if not samples:
        return {"count": 0, "p50": 0.0, "p90": 0.0, "p99": 0.0}
    arr = np.asarray(samples, dtype=np.float64)
    p50, p90, p99 = np.percentile(arr, [50, 90, 99])
    return {
        "count": len(samples),
        "p50": float(p50),
        "p90": float(p90),
        "p99": float(p99),
    }


class MetricsRegistry:
    def __init__(self, window_seconds: float = DEFAULT_WINDOW_SECONDS) -> None:
        self._lock = threading.Lock()
        self._window_seconds = window_seconds
        self._counters: dict[str, int] = defaultdict(int)
        self._latencies: dict[str, list[float]] = defaultdict(list)
        self._window: dict[str, deque[tuple[float, float]]] = defaultdict(deque)

    def inc(self, name: str, amount: int = 1) -> None:
        with self._lock:
            self._counters[name] += amount

    def record_latency(self, stage: str, millis: float, now: float | None = None) -> None:
        now = time.monotonic() if now is None else now
        with self._lock:
            self._latencies[stage].append(millis)
            window = self._window[stage]
            window.append((now, millis))
            horizon = now - self._window_seconds
            while window and window[0][0] < horizon:
                window.popleft()

    def snapshot(self, now: float | None = None) -> dict:
        now = time.monotonic() if now is None else now
        with self._lock:
            horizon = now - self._window_seconds
            stages = {}
            for stage, samples in self._latencies.items():
                recent = [v for t, v in self._window[stage] if t >= horizon]
                stages[stage] = {
                    "lifetime": _quantiles(samples),
                    "window": _quantiles(recent),
                }
            return {
                "counters": dict(self._counters),
                "latency_ms": stages,
                "window_seconds": self._window_seconds,
            }

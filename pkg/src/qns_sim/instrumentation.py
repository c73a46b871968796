"""Lightweight evaluation counters.

Used by tests to assert that certain code paths are never taken, e.g. that
the effective-velocity right-hand side at the special transform constant
evaluates neither the cold pressure nor the capillarity tensor.  Counters
are process-global and not synchronized; they are a test instrument, not a
profiler.
"""

from collections import Counter

_counts = Counter()


def bump(name: str) -> None:
    _counts[name] += 1


def get(name: str) -> int:
    return _counts[name]


def snapshot() -> dict:
    return dict(_counts)


def reset() -> None:
    _counts.clear()

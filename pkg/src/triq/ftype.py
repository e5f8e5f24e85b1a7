"""f-type functions: nonnegative-orthant maps that preserve monotone bounds.

An f-type function satisfies ``f(0) = 0``, is nondecreasing in every
coordinate and is concave.  Composing one with entanglement monotones gives
another monotone whose conversion ratio never beats the componentwise ratios:
``f(x)/f(y) >= min_i min(x_i/y_i, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-10
RATIO_TOL = 1e-9
P_GRID = np.linspace(0.1, 0.9, 9)


@dataclass(frozen=True, eq=False)
class FTypeSample:
    """Points in the nonnegative orthant at which ``f`` is probed."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if np.any(pts < 0):
            raise ValueError("f-type samples live in the nonnegative orthant")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def uniform(cls, rng: np.random.Generator, dim: int, count: int = 200, high: float = 1.0) -> "FTypeSample":
        return cls(rng.uniform(0.0, high, size=(count, dim)))


@dataclass(frozen=True)
class FTypeResult:
    ok: bool
    failed: str | None = None
    witness: tuple | None = None  # (x, y, p) for the first failing check

    def __bool__(self):
        return self.ok


def _pairs(n: int):
    # consecutive pairs plus a fixed shuffle keep the probe count linear
    idx = np.arange(n)
    return list(zip(idx, np.roll(idx, 1))) + list(zip(idx, idx[::-1]))


def check_f_type(f, samples: FTypeSample, ps=P_GRID, tol: float = TOL) -> FTypeResult:
    """Test ``f(0) = 0``, coordinate-wise monotonicity and concavity on samples."""
    pts = samples.points
    zero = np.zeros(samples.dim)
    if abs(f(zero)) > tol:
        return FTypeResult(False, "f(0) = 0", (zero, zero, 1.0))
    for i, j in _pairs(len(pts)):
        x, y = pts[i], pts[j]
        lo = np.minimum(x, y)
        for big in (x, y):
            if f(lo) > f(big) + tol:
                return FTypeResult(False, "monotone", (lo, big, 1.0))
        fx, fy = f(x), f(y)
        for p in ps:
            if f(p * x + (1 - p) * y) < p * fx + (1 - p) * fy - tol:
                return FTypeResult(False, "concave", (x, y, float(p)))
    return FTypeResult(True)


@dataclass(frozen=True)
class RatioReport:
    pairs: int
    failures: int
    worst: float  # most negative f(x)/f(y) - min_i min(x_i/y_i, 1)
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0


def min_ratio(x: np.ndarray, y: np.ndarray) -> float:
    """``min_i min(x_i / y_i, 1)`` over coordinates with ``y_i > 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    live = y > 0
    if not live.any():
        return 1.0
    return float(min(np.min(x[live] / y[live]), 1.0))


def ratio_property(f, pairs, tol: float = RATIO_TOL) -> RatioReport:
    """Check ``f(x)/f(y) >= min_i min(x_i/y_i, 1)`` on every ``(x, y)`` pair."""
    failures, worst, witness, n = 0, np.inf, None, 0
    for x, y in pairs:
        fy = f(y)
        if fy <= 1e-12:
            continue
        n += 1
        gap = f(x) / fy - min_ratio(x, y)
        if gap < worst:
            worst = gap
        if gap < -tol:
            failures += 1
            if witness is None:
                witness = (np.asarray(x), np.asarray(y))
    return RatioReport(n, failures, float(worst) if n else 0.0, witness)


def min_of_linear(weights):
    """``x -> min_j w_j . x`` for rows ``w_j`` with positive entries (an f-type function)."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")

    def f(x):
        return float(np.min(w @ np.asarray(x, dtype=float)))

    return f


def random_min_of_linear(rng: np.random.Generator, dim: int, forms: int = 3):
    return min_of_linear(rng.uniform(0.05, 1.0, size=(forms, dim)))

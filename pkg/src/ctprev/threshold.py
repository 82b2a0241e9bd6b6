"""Global threshold selection over 256-bin histograms.

Two selectors share one result type: an exhaustive sweep maximizing the
between-class variance (Otsu's criterion) and an iterative mean-split
selection that walks to the same neighbourhood in a handful of steps.
Both split the histogram at T into region A = bins[0..T) and region
B = bins[T..255], foreground being every voxel with value >= T.

The sweep compares candidate splits in exact integer arithmetic, so the
reported threshold never depends on floating-point rounding.  For a split
with region counts ``c_a, c_b`` and intensity sums ``s_a, s_b`` out of
``total`` mass, the between-class variance is

    sigma_b = w_a * w_b * (u_a - u_b)^2
            = (s_a*c_b - s_b*c_a)^2 / (c_a * c_b * total^2)

and two splits compare by cross-multiplying the total-free part.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHistogram,
    EmptyHistogram,
    EmptyRegion,
    NonConvergence,
    RangeOutOfBounds,
)
from .volume import Histogram256, Volume

__all__ = [
    "OtsuSweepStats",
    "ItsStep",
    "ThresholdResult",
    "otsu_threshold",
    "its_threshold",
    "apply_threshold",
]

OTSU_SWEEP_STEPS = 256  # the exhaustive sweep always evaluates T = 0..255


@dataclass(frozen=True)
class OtsuSweepStats:
    """Per-candidate statistics from the exhaustive sweep.

    Weights are class probability masses, means are class mean intensities,
    and ``var_a``/``var_b`` are the within-class variances, so the within-
    class objective ``w_a*var_a + w_b*var_b`` can be recovered from the
    trace alongside ``sigma_b``.  Empty regions report zeros throughout.
    """

    t: int
    w_a: float
    w_b: float
    u_a: float
    u_b: float
    var_a: float
    var_b: float
    sigma_b: float


@dataclass(frozen=True)
class ItsStep:
    iteration: int
    t: int
    mu_lo: float
    mu_hi: float
    t_next: int


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold selection.

    ``iterations`` counts full histogram passes: 256 for the exhaustive
    sweep, and for the iterative selector the number of mean evaluations
    including the one that confirms the fixed point.  Each iteration scans
    the two regions once, so ``region_scans == 2 * iterations``.
    """

    value: int
    method: str
    iterations: int
    trace: tuple | None = None

    @property
    def region_scans(self) -> int:
        return 2 * self.iterations


def _region_sums(bins: np.ndarray, t: int) -> tuple[int, int, int, int]:
    """Counts and intensity sums of regions [0, t) and [t, 256)."""
    idx = np.arange(256, dtype=np.int64)
    a = bins[:t]
    b = bins[t:]
    return (
        int(a.sum()),
        int((a * idx[:t]).sum()),
        int(b.sum()),
        int((b * idx[t:]).sum()),
    )


def otsu_threshold(hist: Histogram256, with_trace: bool = False) -> ThresholdResult:
    """Exhaustive 256-candidate sweep maximizing the between-class variance.

    Ties keep the smallest T (strict improvement is required to replace the
    running best).  Raises EmptyHistogram when there is no mass at all and
    DegenerateHistogram when every split scores zero, which happens exactly
    when all mass sits in one bin.
    """
    bins = hist.bins
    total = hist.total
    if total == 0:
        raise EmptyHistogram("histogram has no mass")

    best_t = 0
    best_num = 0  # (s_a*c_b - s_b*c_a)^2 for the best split so far
    best_den = 1  # c_a*c_b for the best split so far
    trace = [] if with_trace else None

    for t in range(256):
        c_a, s_a, c_b, s_b = _region_sums(bins, t)
        if c_a == 0 or c_b == 0:
            num, den = 0, 1
        else:
            d = s_a * c_b - s_b * c_a
            num, den = d * d, c_a * c_b
        # num/den > best_num/best_den, exactly
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
        if with_trace:
            if c_a == 0 or c_b == 0:
                trace.append(OtsuSweepStats(t, c_a / total, c_b / total, 0.0, 0.0, 0.0, 0.0, 0.0))
            else:
                q_a = int((bins[:t] * np.arange(t, dtype=np.int64) ** 2).sum())
                q_b = int((bins[t:] * np.arange(t, 256, dtype=np.int64) ** 2).sum())
                u_a, u_b = s_a / c_a, s_b / c_b
                w_a, w_b = c_a / total, c_b / total
                trace.append(
                    OtsuSweepStats(
                        t,
                        w_a,
                        w_b,
                        u_a,
                        u_b,
                        q_a / c_a - u_a**2,
                        q_b / c_b - u_b**2,
                        w_a * w_b * (u_a - u_b) ** 2,
                    )
                )

    if best_num == 0:
        raise DegenerateHistogram("all histogram mass in a single bin")
    return ThresholdResult(
        value=best_t,
        method="otsu",
        iterations=OTSU_SWEEP_STEPS,
        trace=tuple(trace) if with_trace else None,
    )


def its_threshold(
    hist: Histogram256,
    t_start: int = 128,
    max_iterations: int = 64,
    with_trace: bool = False,
) -> ThresholdResult:
    """Iterative mean-split threshold selection.

    From the current split the region means mu_lo and mu_hi are averaged
    and rounded half up to give the next integer threshold; the procedure
    stops when the threshold reproduces itself.  The residual that drives
    termination is |T_prev - T_new|, the change between successive
    thresholds.

    Raises EmptyRegion if a split leaves a region with zero mass and
    NonConvergence (covers oscillation) if ``max_iterations`` passes do
    not reach a fixed point.
    """
    if hist.total == 0:
        raise EmptyHistogram("histogram has no mass")
    if not 1 <= t_start <= 254:
        raise RangeOutOfBounds(f"t_start {t_start} outside [1, 254]")

    bins = hist.bins
    t = int(t_start)
    trace = [] if with_trace else None
    for iteration in range(1, max_iterations + 1):
        c_a, s_a, c_b, s_b = _region_sums(bins, t)
        if c_a == 0 or c_b == 0:
            raise EmptyRegion(f"split at T={t} leaves an empty region")
        # round_half_up((mu_lo + mu_hi) / 2) in exact integers:
        # the average of means is p/q with p = s_a*c_b + s_b*c_a, q = 2*c_a*c_b
        p = s_a * c_b + s_b * c_a
        q = 2 * c_a * c_b
        t_next = (2 * p + q) // (2 * q)
        if with_trace:
            trace.append(ItsStep(iteration, t, s_a / c_a, s_b / c_b, t_next))
        if t_next == t:
            return ThresholdResult(
                value=t,
                method="its",
                iterations=iteration,
                trace=tuple(trace) if with_trace else None,
            )
        t = t_next
    raise NonConvergence(f"no fixed point within {max_iterations} iterations")


def apply_threshold(volume: Volume, t: int) -> np.ndarray:
    """Boolean foreground mask: voxels with value >= t."""
    if not 0 <= t <= 255:
        raise RangeOutOfBounds(f"threshold {t} outside [0, 255]")
    return volume.voxels >= t

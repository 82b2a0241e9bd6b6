"""Brute-force reference implementations for threshold selection.

Everything here is exact rational arithmetic over prefix sums, written
independently of the library code so the two can disagree.  Tests freeze
expected values computed from these oracles.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def _prefix(bins: list[int]) -> tuple[list[int], list[int], list[int]]:
    """Cumulative count, first and second moments; index t covers bins[:t]."""
    c = [0] * 257
    s = [0] * 257
    q = [0] * 257
    for i, n in enumerate(bins):
        c[i + 1] = c[i] + n
        s[i + 1] = s[i] + i * n
        q[i + 1] = q[i] + i * i * n
    return c, s, q


def between_class_argmax(bins: list[int]) -> tuple[int, Fraction]:
    """Exact argmax of w_a*w_b*(u_a-u_b)^2 over T in [0,255]; smallest T wins ties."""
    c, s, _ = _prefix(bins)
    total = c[256]
    best_t, best = 0, Fraction(0)
    for t in range(256):
        ca, cb = c[t], total - c[t]
        if ca == 0 or cb == 0:
            continue
        sa, sb = s[t], s[256] - s[t]
        sigma = (
            Fraction(ca, total)
            * Fraction(cb, total)
            * (Fraction(sa, ca) - Fraction(sb, cb)) ** 2
        )
        if sigma > best:
            best, best_t = sigma, t
    return best_t, best


def within_class_argmin(bins: list[int]) -> tuple[int, Fraction]:
    """Exact argmin of w_a*var_a + w_b*var_b; smallest T wins ties."""
    c, s, q = _prefix(bins)
    total = c[256]
    best_t, best = None, None
    for t in range(256):
        ca, cb = c[t], total - c[t]
        if ca == 0 or cb == 0:
            continue
        sa, sb = s[t], s[256] - s[t]
        qa, qb = q[t], q[256] - q[t]
        var_a = Fraction(qa, ca) - Fraction(sa, ca) ** 2
        var_b = Fraction(qb, cb) - Fraction(sb, cb) ** 2
        sw = Fraction(ca, total) * var_a + Fraction(cb, total) * var_b
        if best is None or sw < best:
            best, best_t = sw, t
    return best_t, best


def mean_split_iterate(
    bins: list[int], t_start: int = 128, cap: int = 64
) -> tuple[int, int, list[int]]:
    """Hand iteration of T <- round_half_up((mu1 + mu2) / 2).

    Returns (threshold, mean evaluations, trace of T values).  The count
    includes the final evaluation that confirms the fixed point.
    """
    c, s, _ = _prefix(bins)
    t = t_start
    trace = [t]
    for it in range(1, cap + 1):
        ca, cb = c[t], c[256] - c[t]
        assert ca > 0 and cb > 0, f"empty region at t={t}"
        mu1 = Fraction(s[t], ca)
        mu2 = Fraction(s[256] - s[t], cb)
        t_new = ((mu1 + mu2) / 2 + Fraction(1, 2)).__floor__()
        if t_new == t:
            return t, it, trace
        t = t_new
        trace.append(t)
    raise AssertionError(f"no fixed point within {cap} iterations")


def two_spike_hist() -> list[int]:
    bins = [0] * 256
    bins[50] = 100
    bins[200] = 100
    return bins


def bimodal_fixture_hist(seed: int = 1234, n: int = 100_000) -> list[int]:
    rng = np.random.default_rng(seed)
    lo = rng.normal(60, 10, n // 2)
    hi = rng.normal(180, 10, n - n // 2)
    vals = np.clip(np.rint(np.concatenate([lo, hi])), 0, 255).astype(np.uint8)
    return np.bincount(vals, minlength=256).tolist()


def random_histogram(seed: int) -> list[int]:
    """Seeded histogram family covering dense, sparse, narrow and spiky shapes."""
    rng = np.random.default_rng(900_000 + seed)
    kind = seed % 5
    bins = np.zeros(256, dtype=np.int64)
    if kind == 0:
        bins[:] = rng.integers(0, 1000, size=256)
    elif kind == 1:
        k = int(rng.integers(2, 12))
        idx = rng.choice(256, size=k, replace=False)
        bins[idx] = rng.integers(1, 1_000_000, size=k)
    elif kind == 2:
        n = 2000
        m1, m2 = rng.uniform(20, 110), rng.uniform(130, 235)
        s1, s2 = rng.uniform(3, 25), rng.uniform(3, 25)
        w = rng.uniform(0.2, 0.8)
        vals = np.concatenate(
            [
                rng.normal(m1, s1, int(n * w)),
                rng.normal(m2, s2, n - int(n * w)),
            ]
        )
        vals = np.clip(np.rint(vals), 0, 255).astype(np.int64)
        bins = np.bincount(vals, minlength=256).astype(np.int64)
    elif kind == 3:
        a = int(rng.integers(0, 200))
        w = int(rng.integers(2, 40))
        bins[a : a + w] = rng.integers(1, 500, size=min(w, 256 - a))
    else:
        bins[0] = int(rng.integers(10_000, 1_000_000))
        a = int(rng.integers(40, 200))
        w = int(rng.integers(3, 30))
        bins[a : a + w] = rng.integers(100, 5000, size=min(w, 256 - a))
    if (bins > 0).sum() < 2:
        bins[10] += 1
        bins[210] += 1
    return bins.tolist()

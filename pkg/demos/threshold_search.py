"""Exhaustive threshold sweep versus iterative search on the same histogram.

Builds a noisy two-material volume, runs both threshold selectors, and
prints what each one cost.  The iterative search converges in a handful of
mean evaluations where the sweep always scans all 256 candidates, while
the selected thresholds land within a gray value or two of each other.

    python3 demos/threshold_search.py
"""
from __future__ import annotations

import numpy as np

from ctprev import Volume, apply_threshold, its_threshold, otsu_threshold, volume_histogram


def bimodal_volume(seed: int = 7) -> Volume:
    # a dark-heavy mixture, so the search has to walk down from midscale
    rng = np.random.default_rng(seed)
    n = 64**3
    n_noise = round(0.02 * n)
    n1 = round(0.75 * (n - n_noise))
    parts = np.concatenate(
        [
            rng.normal(30.0, 12.0, n1),
            rng.normal(110.0, 12.0, n - n_noise - n1),
            rng.uniform(0.0, 255.0, n_noise),
        ]
    )
    vox = np.clip(np.rint(parts), 0, 255).astype(np.uint8)
    rng.shuffle(vox)
    return Volume(vox.reshape(64, 64, 64))


def main() -> None:
    volume = bimodal_volume()
    hist = volume_histogram(volume)

    sweep = otsu_threshold(hist)
    iterative = its_threshold(hist, with_trace=True)

    print(f"{'':18s}{'threshold':>10s}{'iterations':>12s}{'region scans':>14s}")
    for label, r in (("sweep", sweep), ("iterative", iterative)):
        print(f"{label:18s}{r.value:>10d}{r.iterations:>12d}{r.region_scans:>14d}")
    print(f"\nscan-cost ratio: {sweep.region_scans / iterative.region_scans:.0f}x")

    print("\niterative trace (threshold, region means, next threshold):")
    for step in iterative.trace:
        print(
            f"  step {step.iteration}: t={step.t:3d}"
            f"  mu_lo={float(step.mu_lo):7.2f}  mu_hi={float(step.mu_hi):7.2f}"
            f"  -> {step.t_next}"
        )

    mask_a = apply_threshold(volume, sweep.value)
    mask_b = apply_threshold(volume, iterative.value)
    diff = np.count_nonzero(mask_a != mask_b) / mask_a.size
    print(f"\nforeground masks differ on {diff:.4%} of voxels")


if __name__ == "__main__":
    main()

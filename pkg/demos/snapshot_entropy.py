"""Choosing a thumbnail view by image entropy.

Renders an L-shaped phantom from evenly spaced azimuths and prints the
entropy of every view.  Seen down one arm the silhouette collapses and
carries little information; the chosen azimuth is the one where the
rendered image says the most about the shape.  Best and worst views are
written next to this script for comparison.

    python3 demos/snapshot_entropy.py
"""
from __future__ import annotations

from pathlib import Path

from PIL import Image

from ctprev import (
    BoxSpec,
    PhantomSpec,
    SphereSpec,
    ViewParams,
    generate_phantom,
    image_entropy,
    optimal_snapshot,
    render_view,
)

OUT = Path(__file__).resolve().parent / "out" / "snapshot_entropy"


def main() -> None:
    spec = PhantomSpec(
        dims=(96, 96, 96),
        objects=(
            BoxSpec(lo=(8, 40, 8), hi=(88, 56, 24), value=150),
            BoxSpec(lo=(8, 40, 24), hi=(24, 56, 88), value=220),
            SphereSpec(cx=70.0, cy=48.0, cz=60.0, r=10.0, value=90),
        ),
        seed=4,
    )
    volume = generate_phantom(spec).volume

    params = ViewParams(image_dim=256, steps=256, threshold=60)
    snap = optimal_snapshot(volume, n_views=12, params=params)

    print(f"{'azimuth':>8s}  {'entropy':>8s}")
    for azimuth, entropy in snap.per_view:
        marker = "  <- chosen" if azimuth == snap.azimuth_deg else ""
        print(f"{azimuth:8.1f}  {entropy:8.5f}{marker}")

    OUT.mkdir(parents=True, exist_ok=True)
    Image.fromarray(snap.image, mode="L").save(OUT / "best.png")

    worst_az = min(snap.per_view, key=lambda pair: pair[1])[0]
    worst = render_view(
        volume,
        ViewParams(azimuth_deg=worst_az, image_dim=256, steps=256, threshold=60),
    )
    Image.fromarray(worst, mode="L").save(OUT / "worst.png")

    print(f"\nbest view  : azimuth {snap.azimuth_deg}, entropy {snap.entropy:.5f}")
    print(f"worst view : azimuth {worst_az}, entropy {image_entropy(worst).entropy:.5f}")
    print(f"images in {OUT}")


if __name__ == "__main__":
    main()

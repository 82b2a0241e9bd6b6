"""End-to-end walkthrough: synthetic scan -> ingest -> preview bundle.

Generates a small mounted-sample phantom (a thin cylindrical container
holding a sphere), writes it out as a PNG slice stack the way a beamline
reconstruction would land on disk, ingests it, builds all three preview
products, and prints a tour of the resulting bundle.

Run from the repository root after an editable install:

    python3 demos/full_pipeline.py

Then browse the result:

    ctprev serve --root demos/out/full_pipeline/bundles
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ctprev import (
    CylinderSpec,
    PhantomSpec,
    SphereSpec,
    build_bundle,
    generate_phantom,
    ingest_stack,
)

OUT = Path(__file__).resolve().parent / "out" / "full_pipeline"


def write_stack(volume, directory: Path, name: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for z in range(volume.nz):
        fname = f"slice_{z:04d}.png"
        Image.fromarray(np.asarray(volume.voxels[z]), mode="L").save(directory / fname)
        names.append(fname)
    manifest = directory / "stack.json"
    manifest.write_text(json.dumps({"name": name, "slices": names, "bit_depth": 8}))
    return manifest


def main() -> None:
    spec = PhantomSpec(
        dims=(160, 160, 96),
        container=CylinderSpec(cx=81.0, cy=78.0, r=65.0, wall=2.0, value=(140, 145)),
        objects=(SphereSpec(cx=75.0, cy=85.0, cz=40.0, r=22.0, value=(200, 210)),),
        salt_pepper=0.001,
        seed=5,
    )
    phantom = generate_phantom(spec)
    print(f"phantom: dims {spec.dims}, container circle {phantom.circle}")

    manifest = write_stack(phantom.volume, OUT / "stack", "Demo Scan 01")
    print(f"wrote slice stack: {manifest.parent} ({spec.dims[2]} slices)")

    root = OUT / "bundles"
    meta = ingest_stack(manifest, root)
    print(f"ingested as dataset {meta.dataset_id!r}, raw size {meta.raw_bytes:,} bytes")

    meta = build_bundle(root, meta.dataset_id, n_views=6)
    bundle = root / meta["id"]

    print("\nbundle contents:")
    for path in sorted(bundle.rglob("*")):
        if path.is_file():
            rel = path.relative_to(bundle)
            print(f"  {str(rel):48s} {path.stat().st_size:>10,} bytes")

    sidecar = json.loads((bundle / "thumbnail.json").read_text())
    print("\nlist preview (thumbnail) sidecar:")
    for key in ("azimuth", "entropy", "threshold", "circle", "mode", "warnings"):
        print(f"  {key}: {sidecar[key]}")

    inter = meta["previews"]["interactive"]
    print(f"\ninteractive preview: schemes {inter['schemes']}")
    print(f"  per-scheme thresholds: {inter['thresholds']}")
    print(f"  detected container: {inter['container']}")

    data = meta["previews"]["data"]
    print(f"\ndata preview: scheme {data['scheme']}, filtered bins {data['filtered_bins']}")

    print(f"\nserve it:  ctprev serve --root {root}")
    print("then GET /api/datasets, /api/datasets/" + meta["id"] + ", .../thumbnail.png")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Generate the viewer test fixtures from the preview pipeline.

Produces, under tests/fixtures/:

  bundles/fixture-128/     a served bundle built from a 128^3 phantom,
                           with the raw working volume pruned (the
                           service only reads meta.json and artifacts)
  parity.json              slice index -> [map, cell_x, cell_y] for
                           every index of every scheme, the addressing
                           oracle the viewer must reproduce
  frames/*.png             reference renders of the decoded 128-scheme
                           atlases, the images the viewer's software
                           raycaster is checked against
  frames/params.json       the exact parameters those renders used

Run from frontend/ after an editable install of the main package:

    python3 scripts/make-fixtures.py
"""
from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from ctprev import (
    CylinderSpec,
    PhantomSpec,
    SphereSpec,
    ViewParams,
    build_bundle,
    decode_slicemaps,
    generate_phantom,
    ingest_stack,
    load_slicemaps,
    plan_scheme,
    render_view,
    slice_cell,
)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
DATASET_ID = "fixture-128"
AZIMUTHS = (30.0, 120.0, 250.0)
IMAGE_DIM = 256
STEPS = 256
GAIN = 4.0


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


def build_fixture_bundle(root: Path) -> dict:
    spec = PhantomSpec(
        dims=(128, 128, 128),
        fill=(4, 18),
        container=CylinderSpec(cx=65.0, cy=63.0, r=52.0, wall=2.5, value=(140, 145)),
        objects=(
            SphereSpec(cx=60.0, cy=68.0, cz=52.0, r=20.0, value=(200, 210)),
            SphereSpec(cx=76.0, cy=54.0, cz=92.0, r=10.0, value=(220, 230)),
        ),
        salt_pepper=0.0005,
        seed=11,
    )
    phantom = generate_phantom(spec)
    stack = write_stack(phantom.volume, root.parent / "stack", "Viewer Fixture")
    ingest_stack(stack, root, dataset_id=DATASET_ID)
    meta = build_bundle(root, DATASET_ID, n_views=4)
    shutil.rmtree(stack.parent)

    # the service never reads the working volume; keep the fixture light
    bundle = root / DATASET_ID
    (bundle / "volume.raw").unlink()
    (bundle / "volume.json").unlink()
    return meta


def write_parity_table(path: Path) -> None:
    table = {}
    for s in (128, 256, 512):
        scheme = plan_scheme(s)
        table[str(s)] = [list(slice_cell(i, scheme)) for i in range(s)]
    path.write_text(json.dumps(table))


def write_reference_frames(bundle: Path, meta: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    sset = load_slicemaps(bundle / "interactive" / "128" / "manifest.json")
    volume = decode_slicemaps(sset)
    threshold = meta["previews"]["interactive"]["thresholds"]["128"]
    if threshold is None:
        sys.exit("fixture phantom produced no threshold for the 128 scheme")

    frames = []
    for az in AZIMUTHS:
        params = ViewParams(
            azimuth_deg=az, image_dim=IMAGE_DIM, steps=STEPS,
            mode="surface", threshold=threshold, gain=GAIN,
        )
        name = f"surface_az{int(az):03d}.png"
        Image.fromarray(render_view(volume, params), mode="L").save(out / name)
        frames.append({"file": name, "azimuth": az, "mode": "surface", "threshold": threshold})

    params = ViewParams(
        azimuth_deg=AZIMUTHS[0], image_dim=IMAGE_DIM, steps=STEPS,
        mode="additive", threshold=threshold, gain=GAIN,
    )
    name = f"additive_az{int(AZIMUTHS[0]):03d}.png"
    Image.fromarray(render_view(volume, params), mode="L").save(out / name)
    frames.append({"file": name, "azimuth": AZIMUTHS[0], "mode": "additive", "threshold": threshold})

    (out / "params.json").write_text(
        json.dumps(
            {"image_dim": IMAGE_DIM, "steps": STEPS, "gain": GAIN, "frames": frames},
            indent=2,
        )
    )


def main() -> None:
    root = FIXTURES / "bundles"
    if root.exists():
        shutil.rmtree(root)
    meta = build_fixture_bundle(root)

    write_parity_table(FIXTURES / "parity.json")
    write_reference_frames(root / DATASET_ID, meta, FIXTURES / "frames")

    inter = meta["previews"]["interactive"]
    print(f"bundle: {root / DATASET_ID}")
    print(f"thresholds: {inter['thresholds']}")
    print(f"container: {inter['container']}")
    sizes = sorted(
        (p.relative_to(root), p.stat().st_size)
        for p in (root / DATASET_ID).rglob("*") if p.is_file()
    )
    total = sum(n for _, n in sizes)
    print(f"{len(sizes)} files, {total:,} bytes total")


if __name__ == "__main__":
    main()

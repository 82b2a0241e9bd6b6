"""Shared test configuration.

Acceptance tests in test_acceptance.py carry a ``criterion`` marker; a
terminal-summary hook prints one pass/fail line per criterion so the
whole contract is readable at a glance.
"""
from __future__ import annotations

import warnings

import pytest
from hypothesis import HealthCheck, settings

# numba's TBB probe warns on this image; not ours to fix
warnings.filterwarnings("ignore", message=".*TBB.*")

settings.register_profile(
    "ctprev",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ctprev")


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line(
        "markers",
        "criterion(num, label): acceptance criterion covered by this test",
    )
    config._criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item: pytest.Item, call: pytest.CallInfo):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    num, label = marker.args
    item.config._criterion_results[num] = (report.outcome, label)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    results = getattr(config, "_criterion_results", {})
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(results):
        outcome, label = results[num]
        word = "PASS" if outcome == "passed" else "FAIL"
        tr.write_line(f"criterion {num:2d}: {word}  {label}")


def write_stack(volume, directory, name="fixture scan"):
    """Persist a volume as PNG slices plus a stack manifest; returns the path."""
    import json

    import numpy as np
    from PIL import Image

    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for z in range(volume.nz):
        fname = f"slice_{z:04d}.png"
        Image.fromarray(np.asarray(volume.voxels[z]), mode="L").save(directory / fname)
        names.append(fname)
    manifest = directory / "stack.json"
    manifest.write_text(
        json.dumps({"name": name, "slices": names, "bit_depth": 8})
    )
    return manifest


def mounted_phantom():
    """Container + off-center sphere, sized so the 128 scheme downscales."""
    from ctprev.phantom import CylinderSpec, PhantomSpec, SphereSpec

    return PhantomSpec(
        dims=(160, 160, 96),
        container=CylinderSpec(cx=81.0, cy=78.0, r=65.0, wall=2.0, value=(140, 145)),
        objects=(SphereSpec(cx=75.0, cy=85.0, cz=40.0, r=22.0, value=(200, 210)),),
        seed=5,
    )


@pytest.fixture(scope="session")
def demo_bundle(tmp_path_factory):
    """One ingested and fully built bundle, shared across test modules."""
    from ctprev.phantom import generate_phantom
    from ctprev.pipeline import build_bundle, ingest_stack

    root = tmp_path_factory.mktemp("bundles")
    ph = generate_phantom(mounted_phantom())
    manifest = write_stack(ph.volume, tmp_path_factory.mktemp("stack"))
    meta = ingest_stack(manifest, root)
    build_bundle(root, meta.dataset_id, n_views=4)
    return root, meta.dataset_id, ph

"""The three preview builds and their on-disk bundle layout.

Each preview tier is a short pipeline over a loaded volume:

* list preview: working-copy conversion, container removal plus Otsu
  threshold, then an entropy-ranked snapshot rendered server-side.
* data preview: slicemap conversion at 256^3, then histogram filtering
  keyed off the artifact bins of the top slices.
* interactive preview: slicemap conversion at 128/256/512, then container
  removal and per-scheme Otsu thresholds recorded for the client.

Builders are pure (volume in, product out); persistence is separate, so a
failed build never leaves partial files.  A bundle directory holds one
dataset's products plus a ``meta.json`` with stage logs and checksums.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DegenerateHistogram,
    EmptyVolume,
    InvalidManifest,
    NoCircleFound,
)
from .mask import (
    Circle,
    apply_circle_mask,
    artifact_bins,
    detect_container_circle,
    filter_histogram_bins,
)
from .render import SnapshotResult, ViewParams, optimal_snapshot
from .slicemap import (
    SlicemapSet,
    decode_slicemaps,
    encode_slicemaps,
    save_slicemaps,
)
from .threshold import otsu_threshold
from .volume import (
    DatasetMeta,
    Volume,
    downscale_volume,
    load_slice_stack,
    load_volume,
    save_volume,
    volume_histogram,
)

__all__ = [
    "STAGES_LIST",
    "STAGES_DATA",
    "STAGES_INTERACTIVE",
    "INTERACTIVE_SCHEMES",
    "ListPreview",
    "DataPreview",
    "InteractivePreview",
    "build_list_preview",
    "build_data_preview",
    "build_interactive_preview",
    "ingest_stack",
    "build_bundle",
    "verify_bundle",
    "read_meta",
]

log = logging.getLogger("ctprev.pipeline")

# stage names, one tuple per preview tier, in execution order
STAGES_LIST = ("3d_conversion", "thresholding_container_removal", "server_side_rendering")
STAGES_DATA = ("slicemaps_conversion", "histogram_filtering")
STAGES_INTERACTIVE = ("slicemaps_conversion", "thresholding_container_removal")

INTERACTIVE_SCHEMES = (128, 256, 512)

DATA_SCHEME = 256
THUMBNAIL_DIM = 512
WORKING_EDGE = 256  # list preview renders from a copy capped at this edge


@dataclass(frozen=True)
class ListPreview:
    """Thumbnail product: the chosen view plus how it was obtained."""

    image: np.ndarray
    azimuth_deg: float
    entropy: float
    threshold: int | None
    circle: Circle | None
    mode: str
    warnings: tuple[str, ...]
    stages: tuple[str, ...]

    def sidecar(self) -> dict:
        return {
            "azimuth": self.azimuth_deg,
            "entropy": self.entropy,
            "threshold": self.threshold,
            "circle": _circle_json(self.circle),
            "mode": self.mode,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class DataPreview:
    """Filtered slicemap product at the data-preview scheme."""

    slicemaps: SlicemapSet
    filtered_bins: tuple[int, ...]
    stages: tuple[str, ...]


@dataclass(frozen=True)
class InteractivePreview:
    """Multi-resolution slicemaps with container and threshold metadata."""

    slicemaps: dict[int, SlicemapSet]
    circle: Circle | None  # in 512-scheme pixel coordinates
    thresholds: dict[int, int | None]
    warnings: tuple[str, ...]
    stages: tuple[str, ...]


def _circle_json(circle: Circle | None) -> dict | None:
    if circle is None:
        return None
    return {"cx": circle.cx, "cy": circle.cy, "r": circle.r, "votes": circle.votes}


def _working_copy(volume: Volume, edge: int = WORKING_EDGE) -> Volume:
    """Downscale so the longest edge is at most ``edge``, keeping aspect.

    Cell size is the same integer along every axis, so isotropic voxels
    stay isotropic.
    """
    longest = max(volume.dims)
    if longest <= edge:
        return volume
    k = -(-longest // edge)
    nx, ny, nz = volume.dims
    target = (-(-nx // k), -(-ny // k), -(-nz // k))
    return downscale_volume(volume, target)


def build_list_preview(
    volume: Volume,
    n_views: int = 36,
    full_res: bool = False,
) -> ListPreview:
    """Thumbnail pipeline: convert, remove container, render best view.

    The snapshot is normally rendered from a working copy capped at
    256 on the longest edge; ``full_res`` renders from the raw volume.
    Missing container or a single-value histogram degrade the product
    (flagged in ``warnings``) instead of failing the build.
    """
    if volume.voxels.size == 0 or int(volume.voxels.max()) == 0:
        raise EmptyVolume("volume has no nonzero voxels")

    working = volume if full_res else _working_copy(volume)

    warnings: list[str] = []
    circle: Circle | None = None
    try:
        circle = detect_container_circle(working.top_slice())
        masked = apply_circle_mask(working, circle)
    except NoCircleFound as exc:
        log.info("list preview: no container circle (%s)", exc)
        warnings.append("no_container_circle")
        masked = working

    threshold: int | None = None
    mode = "surface"
    try:
        threshold = otsu_threshold(volume_histogram(masked)).value
    except DegenerateHistogram as exc:
        log.info("list preview: degenerate histogram (%s)", exc)
        warnings.append("degenerate_histogram")
        mode = "additive"

    params = ViewParams(
        image_dim=THUMBNAIL_DIM,
        steps=THUMBNAIL_DIM,
        mode=mode,
        threshold=threshold if threshold is not None else 1,
    )
    snap: SnapshotResult = optimal_snapshot(masked, n_views=n_views, params=params)
    if circle is not None and working is not volume:
        # report the circle in raw-volume pixel coordinates
        circle = _rescale_circle(circle, working, volume)
    return ListPreview(
        image=snap.image,
        azimuth_deg=snap.azimuth_deg,
        entropy=snap.entropy,
        threshold=threshold,
        circle=circle,
        mode=mode,
        warnings=tuple(warnings),
        stages=STAGES_LIST,
    )


def _scheme_volume(volume: Volume, s: int) -> Volume:
    """The volume at slicemap resolution: box-downscaled, never upscaled.

    Axes already at or below the scheme edge keep their resolution;
    padding up to the s^3 cube happens only at encode time.
    """
    nx, ny, nz = volume.dims
    target = (min(s, nx), min(s, ny), min(s, nz))
    return downscale_volume(volume, target)


def _pad_to_cube(volume: Volume, s: int) -> Volume:
    """Zero-pad an at-most-s^3 volume to exactly s^3, origin-anchored.

    Mirrors the trailing-cell convention: cells past the real data stay
    zero, so payload size depends only on the scheme.
    """
    if volume.dims == (s, s, s):
        return volume
    cube = np.zeros((s, s, s), dtype=np.uint8)
    tz, ty, tx = volume.voxels.shape
    cube[:tz, :ty, :tx] = volume.voxels
    return Volume(cube)


def build_data_preview(volume: Volume) -> DataPreview:
    """Filtered slicemaps: encode at 256^3, then zero the artifact bins.

    Filtering happens after the downscale (the atlas pixels are what get
    filtered), so bin populations are those of the 256^3 copy.  Artifact
    bins come from the top slices of the real downscaled data, not from
    any zero padding.
    """
    down = _scheme_volume(volume, DATA_SCHEME)
    sset = encode_slicemaps(_pad_to_cube(down, DATA_SCHEME), DATA_SCHEME)
    bins = artifact_bins(down)
    filtered = filter_histogram_bins(decode_slicemaps(sset), bins)
    fset = encode_slicemaps(filtered, sset.scheme)
    return DataPreview(
        slicemaps=fset,
        filtered_bins=tuple(sorted(bins)),
        stages=STAGES_DATA,
    )


def _rescale_circle(circle: Circle, src: Volume, dst: Volume) -> Circle:
    """Map a circle between two downscaled copies of the same volume."""
    fx = dst.nx / src.nx
    fy = dst.ny / src.ny
    return Circle(circle.cx * fx, circle.cy * fy, circle.r * min(fx, fy), circle.votes)


def build_interactive_preview(volume: Volume) -> InteractivePreview:
    """Multi-resolution slicemaps with the container carved out.

    The circle is detected once on the 512-scheme top slice and rescaled
    to the other schemes; each scheme records the Otsu threshold of its
    own masked copy.  A missing circle degrades to unmasked atlases with
    a null container rather than failing.
    """
    downs = {s: _scheme_volume(volume, s) for s in INTERACTIVE_SCHEMES}

    warnings: list[str] = []
    circle: Circle | None = None
    try:
        circle = detect_container_circle(downs[512].top_slice())
    except NoCircleFound as exc:
        log.info("interactive preview: no container circle (%s)", exc)
        warnings.append("no_container_circle")

    slicemaps: dict[int, SlicemapSet] = {}
    thresholds: dict[int, int | None] = {}
    for s in INTERACTIVE_SCHEMES:
        down = downs[s]
        if circle is not None:
            down = apply_circle_mask(down, _rescale_circle(circle, downs[512], down))
        try:
            thresholds[s] = otsu_threshold(volume_histogram(down)).value
        except DegenerateHistogram:
            if "degenerate_histogram" not in warnings:
                warnings.append("degenerate_histogram")
            thresholds[s] = None
        slicemaps[s] = encode_slicemaps(_pad_to_cube(down, s), s)

    return InteractivePreview(
        slicemaps=slicemaps,
        circle=circle,
        thresholds=thresholds,
        warnings=tuple(warnings),
        stages=STAGES_INTERACTIVE,
    )


# ---------------------------------------------------------------------------
# persistence: bundle directories


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _slug(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    if not slug:
        raise InvalidManifest(f"cannot derive a dataset id from name {name!r}")
    return slug


def _write_json(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def read_meta(bundle_dir: str | Path) -> dict:
    path = Path(bundle_dir) / "meta.json"
    try:
        meta = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidManifest(f"{path}: {exc}") from exc
    if not isinstance(meta, dict) or "id" not in meta or "dims" not in meta:
        raise InvalidManifest(f"{path}: not a bundle meta file")
    return meta


def _refresh_checksums(bundle_dir: Path, meta: dict) -> None:
    sums = {}
    for path in sorted(bundle_dir.rglob("*")):
        if not path.is_file() or path.name == "meta.json":
            continue
        rel = path.relative_to(bundle_dir)
        if any(part.startswith(".") for part in rel.parts):
            continue  # staging leftovers are not artifacts
        sums[rel.as_posix()] = _sha256(path)
    meta["checksums"] = sums


def ingest_stack(
    manifest_path: str | Path,
    out_root: str | Path,
    dataset_id: str | None = None,
) -> DatasetMeta:
    """Load a slice stack and store it as a new bundle's working volume.

    The bundle directory appears atomically: it is staged under a
    temporary name inside the root and renamed into place when complete.
    An existing bundle with the same id is replaced only at that final
    rename, never left half-written.
    """
    volume = load_slice_stack(manifest_path)
    stack = json.loads(Path(manifest_path).read_text())
    name = stack["name"]
    bid = dataset_id if dataset_id is not None else _slug(name)

    root = Path(out_root)
    root.mkdir(parents=True, exist_ok=True)
    meta = DatasetMeta.from_dims(bid, name, volume.dims, volume.voxel_size_um)

    stage = Path(tempfile.mkdtemp(prefix=f".ingest-{bid}-", dir=root))
    try:
        save_volume(volume, stage, "volume")
        payload = {
            "id": meta.dataset_id,
            "name": meta.name,
            "dims": list(meta.dims),
            "raw_bytes": meta.raw_bytes,
            "voxel_size_um": meta.voxel_size_um,
            "previews": {},
        }
        _refresh_checksums(stage, payload)
        _write_json(stage / "meta.json", payload)
        final = root / bid
        if final.exists():
            # single-writer per dataset: replace wholesale
            backup = root / f".old-{bid}"
            os.replace(final, backup)
            os.replace(stage, final)
            _rmtree(backup)
        else:
            os.replace(stage, final)
    except BaseException:
        _rmtree(stage)
        raise
    return meta


def _rmtree(path: Path) -> None:
    if not path.exists():
        return
    for child in sorted(path.rglob("*"), reverse=True):
        if child.is_dir():
            child.rmdir()
        else:
            child.unlink()
    path.rmdir()


def _save_png(image: np.ndarray, path: Path) -> None:
    Image.fromarray(image, mode="L").save(path)


def build_bundle(
    root: str | Path,
    dataset_id: str,
    previews: tuple[str, ...] = ("list", "data", "interactive"),
    n_views: int = 36,
    full_res: bool = False,
) -> dict:
    """Run the requested preview builds for one ingested dataset.

    Products are built in memory first and written only on success; each
    product directory is staged and renamed into place, so an interrupted
    build leaves the previous product intact.  Returns the updated meta.
    """
    bundle = Path(root) / dataset_id
    meta = read_meta(bundle)
    volume = load_volume(bundle / "volume.json")
    for stale in bundle.glob(".tmp-*"):
        _rmtree(stale) if stale.is_dir() else stale.unlink()

    for which in previews:
        if which == "list":
            product = build_list_preview(volume, n_views=n_views, full_res=full_res)
            tmp = bundle / ".tmp-thumbnail.png"
            _save_png(product.image, tmp)
            os.replace(tmp, bundle / "thumbnail.png")
            _write_json(bundle / "thumbnail.json", product.sidecar())
            meta["previews"]["list"] = {
                "thumbnail": "thumbnail.png",
                "sidecar": "thumbnail.json",
                "stages": list(product.stages),
            }
        elif which == "data":
            dprod = build_data_preview(volume)
            stage_dir = bundle / ".tmp-data"
            _rmtree(stage_dir)
            manifest_path = save_slicemaps(dprod.slicemaps, stage_dir)
            manifest = json.loads(manifest_path.read_text())
            manifest["product"] = "filtered"
            manifest["filtered_bins"] = list(dprod.filtered_bins)
            _write_json(manifest_path, manifest)
            _rmtree(bundle / "data")
            os.replace(stage_dir, bundle / "data")
            meta["previews"]["data"] = {
                "dir": "data",
                "scheme": dprod.slicemaps.scheme.s,
                "product": "filtered",
                "filtered_bins": list(dprod.filtered_bins),
                "stages": list(dprod.stages),
            }
        elif which == "interactive":
            iprod = build_interactive_preview(volume)
            stage_dir = bundle / ".tmp-interactive"
            _rmtree(stage_dir)
            stage_dir.mkdir(parents=True)
            for s, sset in iprod.slicemaps.items():
                save_slicemaps(sset, stage_dir / str(s))
            _write_json(
                stage_dir / "manifest.json",
                {
                    "schemes": list(INTERACTIVE_SCHEMES),
                    "container": _circle_json(iprod.circle),
                    "thresholds": {str(s): t for s, t in iprod.thresholds.items()},
                    "warnings": list(iprod.warnings),
                },
            )
            _rmtree(bundle / "interactive")
            os.replace(stage_dir, bundle / "interactive")
            meta["previews"]["interactive"] = {
                "dir": "interactive",
                "schemes": list(INTERACTIVE_SCHEMES),
                "container": _circle_json(iprod.circle),
                "thresholds": {str(s): t for s, t in iprod.thresholds.items()},
                "warnings": list(iprod.warnings),
                "stages": list(iprod.stages),
            }
        else:
            raise InvalidManifest(f"unknown preview kind {which!r}")

    _refresh_checksums(bundle, meta)
    _write_json(bundle / "meta.json", meta)
    return meta


def verify_bundle(bundle_dir: str | Path) -> list[str]:
    """Check a bundle against its own manifest; returns problems found.

    An empty list means every referenced file exists and matches its
    checksum.  Used by the service to exclude malformed bundles.
    """
    bundle = Path(bundle_dir)
    problems: list[str] = []
    try:
        meta = read_meta(bundle)
    except InvalidManifest as exc:
        return [str(exc)]
    for rel, want in meta.get("checksums", {}).items():
        path = bundle / rel
        if not path.is_file():
            problems.append(f"missing file: {rel}")
        elif _sha256(path) != want:
            problems.append(f"checksum mismatch: {rel}")
    return problems

"""8-bit volume container, slice-stack ingest, histograms, and box downscaling.

A volume is a dense uint8 grid stored x-fastest (C-contiguous array indexed
``[z, y, x]``).  Slice stacks arrive as a JSON manifest naming one grayscale
image per z layer, ordered bottom to top.  The on-disk interchange format is
a raw little blob plus a JSON header, see :func:`save_volume`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DimensionMismatch,
    InvalidManifest,
    InvalidTarget,
    MissingSlice,
    RangeOutOfBounds,
    UnsupportedPixelFormat,
)

__all__ = [
    "Volume",
    "Histogram256",
    "DatasetMeta",
    "load_slice_stack",
    "save_volume",
    "load_volume",
    "volume_histogram",
    "downscale_volume",
]


@dataclass(eq=False)
class Volume:
    """Dense 8-bit intensity grid.

    Args:
        voxels: array of shape ``(nz, ny, nx)``, dtype uint8.  The array is
            frozen in place (``writeable=False``); pass a copy if the caller
            still needs to mutate it.
        voxel_size_um: optional isotropic voxel pitch in micrometers.
    """

    voxels: np.ndarray
    voxel_size_um: float | None = None

    def __post_init__(self) -> None:
        v = self.voxels
        if not isinstance(v, np.ndarray) or v.ndim != 3:
            raise DimensionMismatch("voxels must be a 3-d array (nz, ny, nx)")
        if v.dtype != np.uint8:
            raise UnsupportedPixelFormat(f"voxels must be uint8, got {v.dtype}")
        if min(v.shape) < 1:
            raise DimensionMismatch(f"degenerate volume shape {v.shape}")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        self.voxels = v

    @property
    def dims(self) -> tuple[int, int, int]:
        """(nx, ny, nz)"""
        nz, ny, nx = self.voxels.shape
        return nx, ny, nz

    @property
    def nx(self) -> int:
        return self.voxels.shape[2]

    @property
    def ny(self) -> int:
        return self.voxels.shape[1]

    @property
    def nz(self) -> int:
        return self.voxels.shape[0]

    @property
    def raw_bytes(self) -> int:
        return self.voxels.size

    def slice_xy(self, z: int) -> np.ndarray:
        """The xy slice at layer ``z`` as a read-only (ny, nx) view."""
        if not 0 <= z < self.nz:
            raise RangeOutOfBounds(f"z={z} outside [0, {self.nz})")
        return self.voxels[z]

    def top_slice(self) -> np.ndarray:
        """The highest-z slice.  'Top' is the end of the stack away from the
        sample mount, so it is the layer most likely to show container only."""
        return self.voxels[-1]


@dataclass(eq=False)
class Histogram256:
    """Counts over the 256 intensity bins of an 8-bit volume or image."""

    bins: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.bins, dtype=np.int64)
        if b.shape != (256,):
            raise DimensionMismatch(f"histogram must have 256 bins, got {b.shape}")
        if (b < 0).any():
            raise RangeOutOfBounds("histogram counts must be non-negative")
        b.setflags(write=False)
        self.bins = b

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    @classmethod
    def of(cls, values: np.ndarray) -> "Histogram256":
        """Histogram of any uint8 array."""
        if values.dtype != np.uint8:
            raise UnsupportedPixelFormat(f"expected uint8 values, got {values.dtype}")
        return cls(np.bincount(values.ravel(), minlength=256))


@dataclass(frozen=True)
class DatasetMeta:
    """Identity and size bookkeeping for one dataset."""

    dataset_id: str
    name: str
    dims: tuple[int, int, int]
    raw_bytes: int
    voxel_size_um: float | None = None

    def __post_init__(self) -> None:
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise DimensionMismatch(f"degenerate dims {self.dims}")
        if self.raw_bytes != nx * ny * nz:
            raise DimensionMismatch(
                f"raw_bytes {self.raw_bytes} != nx*ny*nz = {nx * ny * nz}"
            )

    @classmethod
    def from_dims(
        cls,
        dataset_id: str,
        name: str,
        dims: tuple[int, int, int],
        voxel_size_um: float | None = None,
    ) -> "DatasetMeta":
        nx, ny, nz = dims
        return cls(dataset_id, name, (nx, ny, nz), nx * ny * nz, voxel_size_um)


def _read_slice(path: Path) -> np.ndarray:
    if not path.is_file():
        raise MissingSlice(str(path))
    with Image.open(path) as im:
        if im.mode != "L":
            raise UnsupportedPixelFormat(
                f"{path.name}: mode {im.mode!r}, need 8-bit grayscale ('L')"
            )
        return np.asarray(im, dtype=np.uint8)


def load_slice_stack(manifest_path: str | Path) -> Volume:
    """Assemble a volume from a stack manifest.

    The manifest is JSON of the form
    ``{"name": str, "slices": [paths...], "bit_depth": 8}`` with slice paths
    resolved relative to the manifest file.  Slice order is z order, index 0
    at the bottom.  All slices must be 8-bit grayscale and share one size.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidManifest(f"{manifest_path}: {exc}") from exc
    if not isinstance(manifest, dict) or "slices" not in manifest:
        raise InvalidManifest(f"{manifest_path}: no 'slices' key")
    if manifest.get("bit_depth", 8) != 8:
        raise UnsupportedPixelFormat(
            f"bit_depth {manifest.get('bit_depth')}, only 8 is supported"
        )
    rel = manifest["slices"]
    if not isinstance(rel, list) or len(rel) == 0:
        raise InvalidManifest(f"{manifest_path}: manifest lists no slices")

    base = manifest_path.parent
    first = _read_slice(base / rel[0])
    ny, nx = first.shape
    stack = np.empty((len(rel), ny, nx), dtype=np.uint8)
    stack[0] = first
    for z, name in enumerate(rel[1:], start=1):
        sl = _read_slice(base / name)
        if sl.shape != (ny, nx):
            raise DimensionMismatch(
                f"slice {name}: {sl.shape[::-1]} does not match first slice {(nx, ny)}"
            )
        stack[z] = sl
    return Volume(stack)


def save_volume(volume: Volume, out_dir: str | Path, name: str) -> tuple[Path, Path]:
    """Write ``<name>.raw`` (x-fastest voxel bytes) plus a JSON header.

    Returns (raw_path, header_path).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_path = out_dir / f"{name}.raw"
    header_path = out_dir / f"{name}.json"
    nx, ny, nz = volume.dims
    header = {
        "dims": [nx, ny, nz],
        "dtype": "u8",
        "order": "xyz",
        "voxel_size_um": volume.voxel_size_um,
    }
    raw_path.write_bytes(volume.voxels.tobytes())
    header_path.write_text(json.dumps(header, indent=2) + "\n")
    return raw_path, header_path


def load_volume(header_path: str | Path) -> Volume:
    """Load a volume saved by :func:`save_volume` given its header path."""
    header_path = Path(header_path)
    try:
        header = json.loads(header_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidManifest(f"{header_path}: {exc}") from exc
    if header.get("dtype") != "u8":
        raise UnsupportedPixelFormat(f"dtype {header.get('dtype')!r}, expected 'u8'")
    if header.get("order") != "xyz":
        raise UnsupportedPixelFormat(f"order {header.get('order')!r}, expected 'xyz'")
    try:
        nx, ny, nz = (int(d) for d in header["dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidManifest(f"{header_path}: bad 'dims'") from exc
    raw_path = header_path.with_suffix(".raw")
    if not raw_path.is_file():
        raise MissingSlice(str(raw_path))
    data = np.fromfile(raw_path, dtype=np.uint8)
    if data.size != nx * ny * nz:
        raise DimensionMismatch(
            f"{raw_path.name}: {data.size} bytes, header implies {nx * ny * nz}"
        )
    return Volume(data.reshape(nz, ny, nx), header.get("voxel_size_um"))


def volume_histogram(
    volume: Volume, z_range: tuple[int, int] | None = None
) -> Histogram256:
    """Intensity histogram of a volume, optionally restricted to z slab
    ``[z0, z1)``."""
    if z_range is None:
        return Histogram256.of(volume.voxels)
    z0, z1 = z_range
    if not (0 <= z0 < z1 <= volume.nz):
        raise RangeOutOfBounds(f"z_range {z_range} outside [0, {volume.nz}]")
    return Histogram256.of(volume.voxels[z0:z1])


def _cell_starts(n: int, t: int) -> np.ndarray:
    # Output cell j covers the source interval [j*n/t, (j+1)*n/t); a voxel
    # belongs to the cell containing its center i + 1/2.  Exact in integers:
    # start[j] = ceil((2*j*n - t) / (2*t)), forced non-negative at j = 0.
    j = np.arange(t + 1, dtype=np.int64)
    num = 2 * j * n - t
    starts = -((-num) // (2 * t))
    starts[0] = 0
    starts[t] = n
    return starts


def downscale_volume(volume: Volume, target: tuple[int, int, int]) -> Volume:
    """Box-filter downscale to ``target`` dims (nx, ny, nz).

    Every output voxel is the mean of its source cell, rounded half up.
    Non-integer ratios are handled by assigning each source voxel to the
    cell containing its center, so cells differ in population by at most
    one voxel per axis.  Upscaling is not supported.
    """
    tx, ty, tz = (int(t) for t in target)
    nx, ny, nz = volume.dims
    for t, n, ax in ((tx, nx, "x"), (ty, ny, "y"), (tz, nz, "z")):
        if not 1 <= t <= n:
            raise InvalidTarget(f"target {ax}={t} outside [1, {n}]")
    if (tx, ty, tz) == (nx, ny, nz):
        return Volume(volume.voxels, volume.voxel_size_um)

    xs = _cell_starts(nx, tx)
    ys = _cell_starts(ny, ty)
    zs = _cell_starts(nz, tz)
    cx = np.diff(xs)
    cy = np.diff(ys)
    counts_xy = cy[:, None] * cx[None, :]

    out = np.empty((tz, ty, tx), dtype=np.uint8)
    for jz in range(tz):
        acc = np.zeros((ty, tx), dtype=np.int64)
        for z in range(zs[jz], zs[jz + 1]):
            sl = volume.voxels[z].astype(np.int64)
            acc += np.add.reduceat(np.add.reduceat(sl, ys[:-1], axis=0), xs[:-1], axis=1)
        cnt = counts_xy * (zs[jz + 1] - zs[jz])
        # round half up without leaving integer arithmetic
        out[jz] = (2 * acc + cnt) // (2 * cnt)
    return Volume(out, volume.voxel_size_um)

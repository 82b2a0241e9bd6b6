"""Slicemap atlases: a volume packed into a handful of 2-d texture mosaics.

A scheme with edge length ``s`` lays the ``s`` xy slices of an s^3 volume
into square atlases on an 8x8 grid, 64 slices per map, filling cells left
to right then top to bottom.  Slice k lands in map ``k // 64`` at cell
``((k % 64) % 8, (k % 64) // 8)``.  Cells past the last slice stay zero.
Atlases round-trip losslessly through PNG, so a browser can reassemble
the exact volume from a few texture fetches.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    IndexOutOfRange,
    InvalidManifest,
    ManifestMismatch,
    MissingSlice,
    UnsupportedScheme,
)
from .volume import Volume, downscale_volume

__all__ = [
    "SlicemapScheme",
    "SlicemapSet",
    "plan_scheme",
    "slice_cell",
    "encode_slicemaps",
    "decode_slicemaps",
    "save_slicemaps",
    "load_slicemaps",
]

# edge length -> atlas edge; grid is 8x8 (64 slices per map) throughout
_PLANNED: dict[int, int] = {128: 1024, 256: 2048, 512: 4096}


@dataclass(frozen=True)
class SlicemapScheme:
    """Layout of one slicemap encoding."""

    s: int
    atlas_dim: int
    grid: int
    map_count: int

    def __post_init__(self) -> None:
        if self.grid * self.s != self.atlas_dim:
            raise UnsupportedScheme(
                f"grid {self.grid} x slice {self.s} != atlas {self.atlas_dim}"
            )
        per_map = self.grid * self.grid
        if self.map_count != -(-self.s // per_map):
            raise UnsupportedScheme(
                f"{self.map_count} maps cannot hold {self.s} slices at {per_map}/map"
            )

    @property
    def slices_per_map(self) -> int:
        return self.grid * self.grid

    def atlas_names(self, ext: str = "png") -> list[str]:
        return [f"sm_{self.s}_{i}.{ext}" for i in range(self.map_count)]


def plan_scheme(s: int) -> SlicemapScheme:
    """The planned atlas layout for edge length ``s`` in {128, 256, 512}."""
    if s not in _PLANNED:
        raise UnsupportedScheme(f"no planned layout for s={s}, expected one of {sorted(_PLANNED)}")
    atlas = _PLANNED[s]
    return SlicemapScheme(s=s, atlas_dim=atlas, grid=8, map_count=-(-s // 64))


def slice_cell(index: int, scheme: SlicemapScheme) -> tuple[int, int, int]:
    """(map_index, cell_x, cell_y) where slice ``index`` lives."""
    if not 0 <= index < scheme.s:
        raise IndexOutOfRange(f"slice index {index} outside [0, {scheme.s})")
    m, within = divmod(index, scheme.slices_per_map)
    cell_y, cell_x = divmod(within, scheme.grid)
    return m, cell_x, cell_y


@dataclass(eq=False)
class SlicemapSet:
    """Encoded atlases plus their layout."""

    scheme: SlicemapScheme
    atlases: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.atlases) != self.scheme.map_count:
            raise ManifestMismatch(
                f"{len(self.atlases)} atlases for a {self.scheme.map_count}-map scheme"
            )
        frozen = []
        for i, a in enumerate(self.atlases):
            if a.shape != (self.scheme.atlas_dim, self.scheme.atlas_dim) or a.dtype != np.uint8:
                raise ManifestMismatch(
                    f"atlas {i}: shape {a.shape} dtype {a.dtype}, expected "
                    f"({self.scheme.atlas_dim}, {self.scheme.atlas_dim}) uint8"
                )
            a = np.ascontiguousarray(a)
            a.setflags(write=False)
            frozen.append(a)
        self.atlases = tuple(frozen)

    def manifest(self) -> dict:
        sc = self.scheme
        return {
            "scheme": {"s": sc.s, "atlas": sc.atlas_dim, "grid": sc.grid, "maps": sc.map_count},
            "atlases": sc.atlas_names(),
        }


def encode_slicemaps(volume: Volume, scheme: SlicemapScheme | int) -> SlicemapSet:
    """Downscale ``volume`` to s^3 and pack its slices into atlases.

    A volume already at s^3 is packed as-is; anything larger is first
    box-downscaled through :func:`downscale_volume` (whose errors
    propagate, in particular for volumes smaller than the scheme).
    """
    if isinstance(scheme, int):
        scheme = plan_scheme(scheme)
    s = scheme.s
    cube = downscale_volume(volume, (s, s, s))

    g = scheme.grid
    per_map = scheme.slices_per_map
    atlases = []
    for m in range(scheme.map_count):
        block = np.zeros((per_map, s, s), dtype=np.uint8)
        have = cube.voxels[m * per_map : (m + 1) * per_map]
        block[: have.shape[0]] = have
        # (cell_y, cell_x, y, x) -> (cell_y, y, cell_x, x) row-major mosaic
        atlas = block.reshape(g, g, s, s).transpose(0, 2, 1, 3).reshape(g * s, g * s)
        atlases.append(atlas)
    return SlicemapSet(scheme=scheme, atlases=tuple(atlases))


def decode_slicemaps(sset: SlicemapSet) -> Volume:
    """Rebuild the s^3 volume that :func:`encode_slicemaps` packed."""
    sc = sset.scheme
    s, g, per_map = sc.s, sc.grid, sc.slices_per_map
    cube = np.empty((s, s, s), dtype=np.uint8)
    for m, atlas in enumerate(sset.atlases):
        block = atlas.reshape(g, s, g, s).transpose(0, 2, 1, 3).reshape(per_map, s, s)
        z0 = m * per_map
        take = min(per_map, s - z0)
        cube[z0 : z0 + take] = block[:take]
    return Volume(cube)


def save_slicemaps(sset: SlicemapSet, out_dir: str | Path) -> Path:
    """Write atlases as PNG plus ``manifest.json``; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, atlas in zip(sset.scheme.atlas_names(), sset.atlases):
        Image.fromarray(atlas, mode="L").save(out_dir / name)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(sset.manifest(), indent=2) + "\n")
    return manifest_path


def load_slicemaps(manifest_path: str | Path) -> SlicemapSet:
    """Read a slicemap set back; disk state must agree with the manifest."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
        sc = manifest["scheme"]
        scheme = SlicemapScheme(
            s=int(sc["s"]), atlas_dim=int(sc["atlas"]), grid=int(sc["grid"]), map_count=int(sc["maps"])
        )
        names = list(manifest["atlases"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InvalidManifest(f"{manifest_path}: {exc}") from exc
    if len(names) != scheme.map_count:
        raise ManifestMismatch(
            f"manifest lists {len(names)} atlases for a {scheme.map_count}-map scheme"
        )
    atlases = []
    for name in names:
        p = manifest_path.parent / name
        if not p.is_file():
            raise MissingSlice(str(p))
        with Image.open(p) as im:
            if im.mode != "L":
                raise ManifestMismatch(f"{name}: mode {im.mode!r}, expected 8-bit grayscale")
            a = np.asarray(im, dtype=np.uint8)
        if a.shape != (scheme.atlas_dim, scheme.atlas_dim):
            raise ManifestMismatch(
                f"{name}: {a.shape} does not match atlas dim {scheme.atlas_dim}"
            )
        atlases.append(a)
    return SlicemapSet(scheme=scheme, atlases=tuple(atlases))

"""Synthetic test volumes with known ground truth.

Phantoms mimic the geometry of mounted micro-CT scans: a cylindrical
container wall running the full z extent, sample objects inside it, an
optional base fill standing in for air, and optional salt-and-pepper
noise.  Alongside the voxels the generator returns the container circle
and per-voxel masks so detection and masking can be scored exactly.

Coordinates follow the pixel convention used by circle detection: voxel
``(ix, iy, iz)`` sits at position ``(ix, iy, iz)``, no half-pixel offset.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec
from .mask import Circle
from .volume import Volume

__all__ = [
    "CylinderSpec",
    "SphereSpec",
    "BoxSpec",
    "PhantomSpec",
    "Phantom",
    "generate_phantom",
]


def _band(value: int | tuple[int, int]) -> tuple[int, int]:
    if isinstance(value, (int, np.integer)):
        lo = hi = int(value)
    else:
        lo, hi = (int(v) for v in value)
    if not (0 <= lo <= hi <= 255):
        raise InvalidSpec(f"intensity band {value!r} outside 0..255")
    return lo, hi


@dataclass(frozen=True)
class CylinderSpec:
    """Container wall: ``r - wall < dist((x, y), (cx, cy)) <= r``, full z.

    ``wall >= r`` yields a solid disc.  ``value`` is a single intensity or
    an inclusive band sampled uniformly per voxel.
    """

    cx: float
    cy: float
    r: float
    wall: float = 2.0
    value: int | tuple[int, int] = 60


@dataclass(frozen=True)
class SphereSpec:
    cx: float
    cy: float
    cz: float
    r: float
    value: int | tuple[int, int] = 180


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box over half-open index ranges ``lo[i] <= i < hi[i]``."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]
    value: int | tuple[int, int] = 200


@dataclass(frozen=True)
class PhantomSpec:
    dims: tuple[int, int, int]
    fill: int | tuple[int, int] = 0
    container: CylinderSpec | None = None
    objects: tuple[SphereSpec | BoxSpec, ...] = ()
    salt_pepper: float = 0.0
    seed: int = 0


@dataclass(eq=False)
class Phantom:
    """A generated volume plus its ground truth."""

    volume: Volume
    circle: Circle | None
    object_mask: np.ndarray
    wall_mask: np.ndarray
    spec: PhantomSpec = field(repr=False, default=None)


def _paint(
    voxels: np.ndarray,
    where: np.ndarray,
    value: int | tuple[int, int],
    rng: np.random.Generator,
) -> None:
    lo, hi = _band(value)
    n = int(where.sum())
    if n == 0:
        return
    if lo == hi:
        voxels[where] = lo
    else:
        voxels[where] = rng.integers(lo, hi + 1, size=n, dtype=np.uint8)


def generate_phantom(spec: PhantomSpec) -> Phantom:
    """Deterministically build the phantom described by ``spec``.

    The same spec (seed included) always yields the same voxels.  Noise is
    painted last and may overwrite geometry; ground-truth masks describe
    the geometry before noise.
    """
    nx, ny, nz = spec.dims
    if min(nx, ny, nz) < 16:
        raise InvalidSpec(f"phantom dims must be at least 16^3, got {spec.dims}")
    rng = np.random.default_rng(spec.seed)

    voxels = np.empty((nz, ny, nx), dtype=np.uint8)
    lo, hi = _band(spec.fill)
    if lo == hi:
        voxels.fill(lo)
    else:
        voxels[:] = rng.integers(lo, hi + 1, size=voxels.shape, dtype=np.uint8)

    iy, ix = np.ogrid[0:ny, 0:nx]

    circle = None
    wall_mask = np.zeros((nz, ny, nx), dtype=bool)
    if spec.container is not None:
        c = spec.container
        if c.r <= 0 or not (0 <= c.cx < nx and 0 <= c.cy < ny):
            raise InvalidSpec(f"container {c} does not fit inside {spec.dims}")
        rho2 = (ix - c.cx) ** 2 + (iy - c.cy) ** 2
        inner = max(c.r - c.wall, 0.0)
        ring = (rho2 <= c.r**2) & (rho2 > inner**2)
        wall_mask[:] = ring[None, :, :]
        _paint(voxels, wall_mask, c.value, rng)
        # ground truth is the wall centerline, the circle a detector should
        # report; for a solid disc the only edge is the rim itself
        gt_r = (c.r + inner) / 2.0 if inner > 0 else c.r
        circle = Circle(c.cx, c.cy, gt_r)

    object_mask = np.zeros((nz, ny, nx), dtype=bool)
    for obj in spec.objects:
        if isinstance(obj, SphereSpec):
            if obj.r <= 0:
                raise InvalidSpec(f"sphere radius {obj.r} must be positive")
            iz = np.arange(nz, dtype=np.float64)[:, None, None]
            m = (
                (ix - obj.cx) ** 2 + (iy - obj.cy) ** 2 + (iz - obj.cz) ** 2
            ) <= obj.r**2
        elif isinstance(obj, BoxSpec):
            m = np.zeros((nz, ny, nx), dtype=bool)
            (x0, y0, z0), (x1, y1, z1) = obj.lo, obj.hi
            if not (0 <= x0 < x1 <= nx and 0 <= y0 < y1 <= ny and 0 <= z0 < z1 <= nz):
                raise InvalidSpec(f"box {obj.lo}..{obj.hi} outside {spec.dims}")
            m[z0:z1, y0:y1, x0:x1] = True
        else:
            raise InvalidSpec(f"unknown object spec {obj!r}")
        _paint(voxels, m, obj.value, rng)
        object_mask |= m

    if spec.salt_pepper > 0:
        if spec.salt_pepper > 1:
            raise InvalidSpec(f"salt_pepper {spec.salt_pepper} must be a fraction")
        n_noise = int(round(spec.salt_pepper * voxels.size))
        flat_idx = rng.choice(voxels.size, size=n_noise, replace=False)
        values = rng.choice(np.array([0, 255], dtype=np.uint8), size=n_noise)
        voxels.ravel()[flat_idx] = values

    return Phantom(Volume(voxels), circle, object_mask, wall_mask, spec)

"""Software orthographic raycaster and entropy-optimal snapshot selection.

The camera orbits the volume's z axis at zero elevation.  The volume is
scaled so its longest axis spans one world unit and centered at the
origin; rays cover the bounding sphere (radius R) so any azimuth sees the
whole volume.  Pixel (i, j) of a dim^2 image maps to the world window
[-R, R]^2 with row 0 at +z, and each ray takes ``steps`` midpoint samples
of t in [-R, R] by trilinear interpolation, front to back.

Surface mode stops at the first sample at or above the threshold, refines
the hit by bisection, and shades with a Lambert term from the central-
difference gradient against a headlight.  Additive mode averages all
samples and applies a gain.  Background stays 0 in both modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import RangeOutOfBounds
from .volume import Volume

__all__ = [
    "ViewParams",
    "EntropyResult",
    "SnapshotResult",
    "render_view",
    "image_entropy",
    "optimal_snapshot",
]

SURFACE = "surface"
ADDITIVE = "additive"


@dataclass(frozen=True)
class ViewParams:
    """Parameters of one rendered view.

    The azimuth is normalized into [0, 360) at construction, so views a
    full turn apart are the same view, bit for bit.
    """

    azimuth_deg: float = 0.0
    image_dim: int = 512
    steps: int = 512
    mode: str = SURFACE
    threshold: int = 1
    gain: float = 4.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuth_deg", float(self.azimuth_deg) % 360.0)
        if self.image_dim < 16:
            raise RangeOutOfBounds(f"image_dim {self.image_dim} below minimum 16")
        if self.steps < 32:
            raise RangeOutOfBounds(f"steps {self.steps} below minimum 32")
        if self.mode not in (SURFACE, ADDITIVE):
            raise RangeOutOfBounds(f"mode {self.mode!r} not one of ({SURFACE!r}, {ADDITIVE!r})")
        if not 0 <= self.threshold <= 255:
            raise RangeOutOfBounds(f"threshold {self.threshold} outside [0, 255]")
        if self.gain <= 0:
            raise RangeOutOfBounds(f"gain {self.gain} must be positive")


@numba.njit(cache=True, inline="always")
def _sample(vox, ux, uy, uz, nx, ny, nz):
    # trilinear fetch at continuous index coords; caller guarantees the
    # point is inside the volume's outer faces (within half a voxel)
    x0 = int(math.floor(ux))
    y0 = int(math.floor(uy))
    z0 = int(math.floor(uz))
    fx = ux - x0
    fy = uy - y0
    fz = uz - z0
    x1 = x0 + 1
    y1 = y0 + 1
    z1 = z0 + 1
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    if z0 < 0:
        z0 = 0
    if x1 < 0:
        x1 = 0
    if y1 < 0:
        y1 = 0
    if z1 < 0:
        z1 = 0
    if x0 > nx - 1:
        x0 = nx - 1
    if y0 > ny - 1:
        y0 = ny - 1
    if z0 > nz - 1:
        z0 = nz - 1
    if x1 > nx - 1:
        x1 = nx - 1
    if y1 > ny - 1:
        y1 = ny - 1
    if z1 > nz - 1:
        z1 = nz - 1
    c00 = vox[z0, y0, x0] * (1.0 - fx) + vox[z0, y0, x1] * fx
    c10 = vox[z0, y1, x0] * (1.0 - fx) + vox[z0, y1, x1] * fx
    c01 = vox[z1, y0, x0] * (1.0 - fx) + vox[z1, y0, x1] * fx
    c11 = vox[z1, y1, x0] * (1.0 - fx) + vox[z1, y1, x1] * fx
    c0 = c00 * (1.0 - fy) + c10 * fy
    c1 = c01 * (1.0 - fy) + c11 * fy
    return c0 * (1.0 - fz) + c1 * fz


@numba.njit(cache=True, inline="always")
def _sample_world(vox, px, py, pz, nx, ny, nz, inv_vx):
    # world -> continuous index: u = (p * inv_vx) + (n - 1) / 2
    ux = px * inv_vx + (nx - 1) * 0.5
    uy = py * inv_vx + (ny - 1) * 0.5
    uz = pz * inv_vx + (nz - 1) * 0.5
    if ux < -0.5 or ux > nx - 0.5 or uy < -0.5 or uy > ny - 0.5 or uz < -0.5 or uz > nz - 0.5:
        return -1.0
    return _sample(vox, ux, uy, uz, nx, ny, nz)


@numba.njit(cache=True, parallel=True)
def _render_additive(vox, dim, steps, dx, dy, rx, ry, big_r, inv_vx, gain, out):
    nz, ny, nx = vox.shape
    px_size = 2.0 * big_r / dim
    dt = 2.0 * big_r / steps
    for j in numba.prange(dim):
        wy = big_r - (j + 0.5) * px_size
        for i in range(dim):
            wx = -big_r + (i + 0.5) * px_size
            ox = rx * wx
            oy = ry * wx
            oz = wy
            acc = 0.0
            for k in range(steps):
                t = -big_r + (k + 0.5) * dt
                v = _sample_world(vox, ox + dx * t, oy + dy * t, oz, nx, ny, nz, inv_vx)
                if v > 0.0:
                    acc += v
            val = gain * acc / steps
            if val > 255.0:
                val = 255.0
            out[j, i] = np.uint8(int(math.floor(val + 0.5)))


@numba.njit(cache=True, parallel=True)
def _render_surface(vox, dim, steps, dx, dy, rx, ry, big_r, inv_vx, threshold, out):
    nz, ny, nx = vox.shape
    px_size = 2.0 * big_r / dim
    dt = 2.0 * big_r / steps
    thr = float(threshold)
    for j in numba.prange(dim):
        wy = big_r - (j + 0.5) * px_size
        for i in range(dim):
            wx = -big_r + (i + 0.5) * px_size
            ox = rx * wx
            oy = ry * wx
            oz = wy
            shade = 0.0
            for k in range(steps):
                t = -big_r + (k + 0.5) * dt
                v = _sample_world(vox, ox + dx * t, oy + dy * t, oz, nx, ny, nz, inv_vx)
                if v >= thr:
                    # bisect between the previous (below-threshold) sample
                    # and the hit to land close to the isosurface
                    t_lo = t - dt
                    t_hi = t
                    for _ in range(4):
                        tm = 0.5 * (t_lo + t_hi)
                        vm = _sample_world(vox, ox + dx * tm, oy + dy * tm, oz, nx, ny, nz, inv_vx)
                        if vm >= thr:
                            t_hi = tm
                        else:
                            t_lo = tm
                    th = t_hi
                    hx = ox + dx * th
                    hy = oy + dy * th
                    hz = oz
                    ux = hx * inv_vx + (nx - 1) * 0.5
                    uy = hy * inv_vx + (ny - 1) * 0.5
                    uz = hz * inv_vx + (nz - 1) * 0.5
                    gx = _sample(vox, ux + 1.0, uy, uz, nx, ny, nz) - _sample(
                        vox, ux - 1.0, uy, uz, nx, ny, nz
                    )
                    gy = _sample(vox, ux, uy + 1.0, uz, nx, ny, nz) - _sample(
                        vox, ux, uy - 1.0, uz, nx, ny, nz
                    )
                    gz = _sample(vox, ux, uy, uz + 1.0, nx, ny, nz) - _sample(
                        vox, ux, uy, uz - 1.0, nx, ny, nz
                    )
                    gn = math.sqrt(gx * gx + gy * gy + gz * gz)
                    if gn < 1e-12:
                        shade = 1.0  # interior hit, face the light
                    else:
                        # outward normal is -grad; headlight shines along -d
                        lam = (gx * dx + gy * dy) / gn
                        shade = lam if lam > 0.0 else 0.0
                    break
            out[j, i] = np.uint8(int(math.floor(255.0 * shade + 0.5)))


def render_view(volume: Volume, params: ViewParams) -> np.ndarray:
    """Render one orthographic view; returns a (dim, dim) uint8 image.

    Output is deterministic: the same volume and params give the same
    bytes on every run and any thread count, because each pixel is an
    independent fixed-order computation.
    """
    nx, ny, nz = volume.dims
    n_max = max(nx, ny, nz)
    # half extents in world units; voxel pitch is 1/n_max on every axis
    hx = nx / (2.0 * n_max)
    hy = ny / (2.0 * n_max)
    hz = nz / (2.0 * n_max)
    big_r = math.sqrt(hx * hx + hy * hy + hz * hz)
    inv_vx = float(n_max)

    theta = math.radians(params.azimuth_deg)
    dx, dy = -math.cos(theta), -math.sin(theta)  # ray direction
    rx, ry = -math.sin(theta), math.cos(theta)  # image right axis

    out = np.empty((params.image_dim, params.image_dim), dtype=np.uint8)
    if params.mode == ADDITIVE:
        _render_additive(
            volume.voxels, params.image_dim, params.steps, dx, dy, rx, ry,
            big_r, inv_vx, params.gain, out,
        )
    else:
        _render_surface(
            volume.voxels, params.image_dim, params.steps, dx, dy, rx, ry,
            big_r, inv_vx, params.threshold, out,
        )
    return out


@dataclass(frozen=True)
class EntropyResult:
    """Shannon entropy of an image's 256-bin intensity distribution."""

    entropy: float
    probabilities: np.ndarray
    bins: int = 256


def image_entropy(image: np.ndarray) -> EntropyResult:
    """Shannon entropy H = -sum(p * log2(p)) over the image histogram.

    A constant image has entropy 0; an image using all 256 values equally
    has entropy 8.
    """
    if image.ndim != 2 or image.dtype != np.uint8:
        raise RangeOutOfBounds("entropy expects a 2-d uint8 image")
    counts = np.bincount(image.ravel(), minlength=256)
    p = counts / image.size
    nz = p[p > 0]
    entropy = float(-(nz * np.log2(nz)).sum())
    if entropy == 0.0:
        entropy = 0.0  # a single-bin image sums to -0.0
    return EntropyResult(entropy=entropy, probabilities=p)


@dataclass(frozen=True)
class SnapshotResult:
    azimuth_deg: float
    image: np.ndarray
    entropy: float
    per_view: tuple[tuple[float, float], ...]  # (azimuth_deg, entropy) per view


def optimal_snapshot(
    volume: Volume,
    n_views: int = 36,
    params: ViewParams | None = None,
) -> SnapshotResult:
    """Render ``n_views`` evenly spaced azimuths and keep the one with the
    highest image entropy.

    Azimuths are k * (360 / n_views) for k = 0..n_views-1.  Ties keep the
    smallest azimuth (strict improvement replaces the running best), so a
    rotationally symmetric object reports azimuth 0.
    """
    if n_views < 1:
        raise RangeOutOfBounds(f"n_views {n_views} must be positive")
    template = params if params is not None else ViewParams()

    best_k = 0
    best_entropy = -1.0
    best_image: np.ndarray | None = None
    per_view = []
    step = 360.0 / n_views
    for k in range(n_views):
        azimuth = k * step
        view = ViewParams(
            azimuth_deg=azimuth,
            image_dim=template.image_dim,
            steps=template.steps,
            mode=template.mode,
            threshold=template.threshold,
            gain=template.gain,
        )
        img = render_view(volume, view)
        h = image_entropy(img).entropy
        per_view.append((azimuth, h))
        if h > best_entropy:
            best_k, best_entropy, best_image = k, h, img
    return SnapshotResult(
        azimuth_deg=best_k * step,
        image=best_image,
        entropy=best_entropy,
        per_view=tuple(per_view),
    )

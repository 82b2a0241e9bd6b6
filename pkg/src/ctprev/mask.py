"""Container removal and histogram-based артефact filtering.

Sample containers show up as a bright circular wall in every slice.  The
wall is located once on the topmost slice (the layer farthest from the
sample mount, usually container-only) with a circle Hough transform, then
every voxel outside the slightly shrunken circle is zeroed across all z.

For previews that must stay unthresholded, container and mount signal is
instead suppressed by zeroing whole intensity bins that dominate the top
few slices, see :func:`artifact_bins` / :func:`filter_histogram_bins`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    CircleOutOfBounds,
    NoCircleFound,
    RangeOutOfBounds,
)
from .volume import Histogram256, Volume

__all__ = [
    "Circle",
    "detect_container_circle",
    "apply_circle_mask",
    "artifact_bins",
    "filter_histogram_bins",
]


@dataclass(frozen=True)
class Circle:
    """Detected (or ground-truth) container circle in pixel coordinates.

    ``votes`` is the fraction of the circumference supported by edge
    pixels, in [0, 1]; ground-truth circles default to full support.
    """

    cx: float
    cy: float
    r: float
    votes: float = 1.0

    def __post_init__(self) -> None:
        if self.r <= 0:
            raise CircleOutOfBounds(f"radius {self.r} must be positive")
        if not 0.0 <= self.votes <= 1.0:
            raise RangeOutOfBounds(f"votes {self.votes} outside [0, 1]")

    def scaled(self, factor: float) -> "Circle":
        """The same circle at another resolution."""
        return Circle(self.cx * factor, self.cy * factor, self.r * factor, self.votes)


def _sobel_edges(
    image: np.ndarray, threshold: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Edge mask, gradient components, and magnitude from a 3x3 Sobel.

    The magnitude is the raw hypot of the two Sobel responses (a unit
    step of height d produces magnitude 4*d on an axis-aligned edge).
    """
    img = image.astype(np.float64)
    gx = ndimage.sobel(img, axis=1)
    gy = ndimage.sobel(img, axis=0)
    mag = np.hypot(gx, gy)
    return mag >= threshold, gx, gy, mag


def _ridge_radius(
    mag: np.ndarray, cx: float, cy: float, r: int, n_pts: int
) -> float:
    """Sub-pixel radius of the gradient-magnitude ridge near integer ``r``.

    Samples the mean bilinear gradient magnitude along circles of nearby
    radii and fits a parabola through the peak, which centers the radius
    on the wall rather than on whichever edge of it won the integer vote.
    """
    ny, nx = mag.shape
    theta = np.linspace(0.0, 2 * np.pi, n_pts, endpoint=False)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    radii = np.arange(max(2.0, r - 2.0), r + 2.5, 1.0)
    scores = np.empty(radii.shape)
    for i, rho in enumerate(radii):
        sx = np.clip(cx + rho * cos_t, 0.0, nx - 1.0)
        sy = np.clip(cy + rho * sin_t, 0.0, ny - 1.0)
        x0 = np.minimum(sx.astype(np.int64), nx - 2)
        y0 = np.minimum(sy.astype(np.int64), ny - 2)
        fx, fy = sx - x0, sy - y0
        v = (
            mag[y0, x0] * (1 - fx) * (1 - fy)
            + mag[y0, x0 + 1] * fx * (1 - fy)
            + mag[y0 + 1, x0] * (1 - fx) * fy
            + mag[y0 + 1, x0 + 1] * fx * fy
        )
        scores[i] = v.mean()
    k = int(np.argmax(scores))
    if 0 < k < len(radii) - 1:
        s0, s1, s2 = scores[k - 1], scores[k], scores[k + 1]
        denom = s0 - 2 * s1 + s2
        if denom < 0:
            return float(radii[k] + 0.5 * (s0 - s2) / denom)
    return float(radii[k])


def detect_container_circle(
    top_slice: np.ndarray,
    r_min_frac: float = 0.2,
    r_max_frac: float = 0.49,
    edge_threshold: float = 96.0,
    accept_votes: float = 0.25,
) -> Circle:
    """Find the container wall circle on one slice.

    Edge pixels vote for centers one radius away along their gradient
    direction (both polarities), one vote per candidate radius, into a
    full-resolution accumulator.  The best cell per radius is then scored
    by the fraction of circle circumference points landing on (or next
    to) an edge pixel, which normalizes votes by circumference and makes
    scores comparable across radii.  The best-supported circle wins;
    anything below ``accept_votes`` support raises NoCircleFound.

    Radius candidates span ``[r_min_frac, r_max_frac] * min(nx, ny)``.
    """
    if top_slice.ndim != 2:
        raise CircleOutOfBounds("detection needs a single 2-d slice")
    ny, nx = top_slice.shape
    m = min(nx, ny)
    r_lo = max(2, int(round(r_min_frac * m)))
    r_hi = int(round(r_max_frac * m))
    if r_lo > r_hi:
        raise NoCircleFound(f"radius range [{r_lo}, {r_hi}] is empty for {nx}x{ny}")

    edges, gx, gy, mag_all = _sobel_edges(top_slice, edge_threshold)
    ey, ex = np.nonzero(edges)
    if ex.size == 0:
        raise NoCircleFound("no edge pixels above the gradient threshold")

    mag = np.hypot(gx[ey, ex], gy[ey, ex])
    ux = gx[ey, ex] / mag
    uy = gy[ey, ex] / mag
    # edge support lookup with one pixel of tolerance
    near_edge = ndimage.binary_dilation(edges, structure=np.ones((3, 3), dtype=bool))

    best: Circle | None = None
    for r in range(r_lo, r_hi + 1):
        acc = np.zeros(ny * nx, dtype=np.int32)
        for sign in (1.0, -1.0):
            cx = np.rint(ex + sign * r * ux).astype(np.int64)
            cy = np.rint(ey + sign * r * uy).astype(np.int64)
            ok = (cx >= 0) & (cx < nx) & (cy >= 0) & (cy < ny)
            np.add.at(acc, cy[ok] * nx + cx[ok], 1)
        peak = int(np.argmax(acc))
        py, px = divmod(peak, nx)

        # centroid refinement over a 5x5 window around the peak cell
        y0, y1 = max(py - 2, 0), min(py + 3, ny)
        x0, x1 = max(px - 2, 0), min(px + 3, nx)
        win = acc.reshape(ny, nx)[y0:y1, x0:x1].astype(np.float64)
        wsum = win.sum()
        if wsum == 0:
            continue
        wy, wx = np.mgrid[y0:y1, x0:x1]
        cyf = float((win * wy).sum() / wsum)
        cxf = float((win * wx).sum() / wsum)

        # circumference support score
        n_pts = max(32, int(round(2 * np.pi * r)))
        theta = np.linspace(0.0, 2 * np.pi, n_pts, endpoint=False)
        sx = np.rint(cxf + r * np.cos(theta)).astype(np.int64)
        sy = np.rint(cyf + r * np.sin(theta)).astype(np.int64)
        inside = (sx >= 0) & (sx < nx) & (sy >= 0) & (sy < ny)
        hits = int(near_edge[sy[inside], sx[inside]].sum())
        votes = hits / n_pts
        if best is None or votes > best.votes:
            best = Circle(cxf, cyf, float(r), votes)

    if best is None or best.votes < accept_votes:
        got = 0.0 if best is None else best.votes
        raise NoCircleFound(
            f"best candidate support {got:.3f} below acceptance floor {accept_votes}"
        )
    # center the radius on the gradient ridge (the wall itself), undoing
    # the low bias of picking the smallest fully supported integer radius
    n_pts = max(32, int(round(2 * np.pi * best.r)))
    r_ridge = _ridge_radius(mag_all, best.cx, best.cy, int(best.r), n_pts)
    return Circle(best.cx, best.cy, r_ridge, best.votes)


def apply_circle_mask(volume: Volume, circle: Circle, margin: float = 0.02) -> Volume:
    """Zero every voxel outside the circle shrunk by ``margin``, all layers.

    The shrink keeps the wall itself outside the retained region even when
    the detected radius sits on the wall's outer edge.  Voxels inside come
    through bit-identical.
    """
    nx, ny, _ = volume.dims
    if not (0 <= circle.cx < nx and 0 <= circle.cy < ny):
        raise CircleOutOfBounds(
            f"center ({circle.cx:.1f}, {circle.cy:.1f}) outside {nx}x{ny} slice"
        )
    if not 0.0 <= margin < 1.0:
        raise RangeOutOfBounds(f"margin {margin} outside [0, 1)")
    r_eff = circle.r * (1.0 - margin)
    iy, ix = np.ogrid[0:ny, 0:nx]
    inside = (ix - circle.cx) ** 2 + (iy - circle.cy) ** 2 <= r_eff**2
    out = np.where(inside[None, :, :], volume.voxels, np.uint8(0))
    return Volume(out, volume.voxel_size_um)


def artifact_bins(volume: Volume, n_top: int = 3, frac: float = 0.0005) -> frozenset[int]:
    """Intensity bins dominated by container and mount signal.

    The top ``n_top`` slices of a mounted scan show container wall, glue,
    and air but little sample, so any bin holding more than ``frac`` of
    those slices' pixels is tagged as artifact signal.  Bin 0 is always
    included.
    """
    if not 1 <= n_top <= volume.nz:
        raise RangeOutOfBounds(f"n_top {n_top} outside [1, {volume.nz}]")
    if frac < 0:
        raise RangeOutOfBounds(f"frac {frac} must be non-negative")
    top = volume.voxels[volume.nz - n_top :]
    hist = Histogram256.of(top)
    cutoff = frac * top.size
    flagged = np.nonzero(hist.bins > cutoff)[0]
    return frozenset({0} | {int(b) for b in flagged})


def filter_histogram_bins(volume: Volume, bins) -> Volume:
    """Zero all voxels whose value falls in ``bins``.

    Implemented as a 256-entry lookup table, so cost is one pass over the
    volume regardless of how many bins are dropped.  Filtering is
    idempotent: zeroed voxels land in bin 0, which maps to 0.
    """
    lut = np.arange(256, dtype=np.uint8)
    for b in bins:
        if not 0 <= int(b) <= 255:
            raise RangeOutOfBounds(f"bin {b} outside [0, 255]")
        lut[int(b)] = 0
    return Volume(lut[volume.voxels], volume.voxel_size_um)

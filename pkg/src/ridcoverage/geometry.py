"""Planar chord, disk and segment-disk geometry.

Two routes to a trajectory's coverage proportion live here:

* the closed form for a chord of the environment circle against the
  concentric coverage disk, which only needs the midpoint distance ``ell``;
* a general route that intersects each polyline segment with any number of
  (possibly overlapping) disks and measures the union of the covered
  parameter intervals.

The second route is what the urban simulations use and doubles as an
independent check of the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
MERGE_TOL = 1e-12


class Point2(NamedTuple):
    x: float
    y: float

    @classmethod
    def of(cls, p) -> "Point2":
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite point ({x}, {y})")
        return cls(x, y)


@dataclass(frozen=True)
class CoverageGeometry:
    """Environment circle of radius ``r_e`` with a concentric coverage disk ``r_c``."""

    r_c: float
    r_e: float
    center: Point2 = Point2(0.0, 0.0)

    def __post_init__(self):
        if not (self.r_c > 0 and self.r_e > 0):
            raise ValueError("radii must be positive")
        if not (math.isfinite(self.r_c) and math.isfinite(self.r_e)):
            raise ValueError("radii must be finite")
        if self.r_c > self.r_e:
            raise ValueError(f"r_c={self.r_c} exceeds r_e={self.r_e}")
        object.__setattr__(self, "center", Point2.of(self.center))

    @property
    def rho(self) -> float:
        return self.r_c / self.r_e


@dataclass(frozen=True)
class Disk:
    center: Point2
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"disk radius must be finite and positive, got {self.radius}")
        object.__setattr__(self, "center", Point2.of(self.center))


@dataclass(frozen=True)
class Chord:
    alpha: float
    beta: float
    endpoint_a: Point2
    endpoint_b: Point2
    midpoint: Point2
    ell: float

    @property
    def degenerate(self) -> bool:
        """Coincident endpoints (alpha == beta mod 2*pi)."""
        return self.endpoint_a == self.endpoint_b or self.alpha == self.beta

    @property
    def length(self) -> float:
        if self.degenerate:
            return 0.0
        return math.dist(self.endpoint_a, self.endpoint_b)


def chord_from_angles(alpha: float, beta: float, geom: CoverageGeometry) -> Chord:
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("chord angles must be finite")
    alpha = alpha % TWO_PI
    beta = beta % TWO_PI
    cx, cy = geom.center
    a = Point2(cx + geom.r_e * math.cos(alpha), cy + geom.r_e * math.sin(alpha))
    if alpha == beta:
        b = a
    else:
        b = Point2(cx + geom.r_e * math.cos(beta), cy + geom.r_e * math.sin(beta))
    m = Point2(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
    ell = min(math.hypot(m.x - cx, m.y - cy), geom.r_e)
    return Chord(alpha, beta, a, b, m, ell)


def ell_squared_ude(beta, r_e: float):
    """Squared midpoint distance of the chord from angle 0 to ``beta``."""
    return r_e**2 * (1.0 + np.cos(beta)) / 2.0


def concentric_coverage_proportion(ell, geom: CoverageGeometry):
    """Fraction of a chord with midpoint distance ``ell`` inside the coverage disk.

    Accepts scalars or arrays. Chords that miss or only touch the disk give 0;
    with ``r_c == r_e`` every chord is fully covered, including the rim limit.
    """
    return coverage_from_ell(ell, geom.r_c, geom.r_e)


def coverage_from_ell(ell, r_c: float, r_e: float):
    ell = np.asarray(ell, dtype=float)
    if np.any(ell < 0) or np.any(ell > r_e * (1 + 1e-12)):
        raise ValueError("ell must lie in [0, r_e]")
    if r_c >= r_e:
        out = np.ones_like(ell)
    else:
        e2 = ell * ell
        inside = ell < r_c
        num = np.where(inside, r_c * r_c - e2, 0.0)
        den = np.where(inside, r_e * r_e - e2, 1.0)
        out = np.minimum(np.sqrt(num / den), 1.0)
    return float(out) if out.ndim == 0 else out


def chord_coverage_proportion(chord: Chord, geom: CoverageGeometry) -> float:
    """Coverage of a sampled chord; degenerate (point) chords count as 0."""
    if chord.degenerate:
        return 0.0
    return concentric_coverage_proportion(chord.ell, geom)


# --- segment / disk intersection -------------------------------------------


def segment_disk_parameters(a, b, centers, radii):
    """Clamped parameter intervals ``[t_in, t_out]`` of segment ``a->b`` in each disk.

    ``centers`` is ``(n, 2)`` and ``radii`` is ``(n,)``. Disks that are missed
    or only touched return an empty interval (``t_in == t_out``).
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (centers.shape[0],))
    qa = float(d @ d)
    t_in = np.zeros(centers.shape[0])
    t_out = np.zeros(centers.shape[0])
    if qa == 0.0 or centers.shape[0] == 0:
        return t_in, t_out
    f = a - centers
    qb = 2.0 * (f @ d)
    qc = np.einsum("ij,ij->i", f, f) - radii * radii
    disc = qb * qb - 4.0 * qa * qc
    hit = disc > 0.0
    if not np.any(hit):
        return t_in, t_out
    sq = np.sqrt(disc[hit])
    b_h = qb[hit]
    # numerically stable root pair
    q = -0.5 * (b_h + np.copysign(sq, b_h))
    r1 = q / qa
    r2 = qc[hit] / q
    lo = np.clip(np.minimum(r1, r2), 0.0, 1.0)
    hi = np.clip(np.maximum(r1, r2), 0.0, 1.0)
    t_in[hit] = lo
    t_out[hit] = np.maximum(hi, lo)
    return t_in, t_out


def segment_disk_intersection_length(a, b, disk: Disk) -> float:
    """Length of segment ``[a, b]`` inside ``disk``; tangency gives 0."""
    t_in, t_out = segment_disk_parameters(a, b, [disk.center], [disk.radius])
    seg = math.dist(a, b)
    return float(t_out[0] - t_in[0]) * seg


def merge_intervals(starts, ends, tol: float = MERGE_TOL) -> list[tuple[float, float]]:
    """Sort-and-merge closed intervals; gaps up to ``tol`` are bridged."""
    pairs = sorted((float(s), float(e)) for s, e in zip(starts, ends) if e > s)
    merged: list[list[float]] = []
    for s, e in pairs:
        if merged and s <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def union_length(starts, ends, tol: float = MERGE_TOL) -> float:
    """Total length of the union of intervals, same semantics as :func:`merge_intervals`."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    keep = ends > starts
    if not np.any(keep):
        return 0.0
    starts, ends = starts[keep], ends[keep]
    order = np.lexsort((ends, starts))
    s, e = starts[order], ends[order]
    prev = np.empty_like(e)
    prev[0] = -np.inf
    np.maximum.accumulate(e[:-1], out=prev[1:])
    base = np.where(s <= prev + tol, prev, s)
    return float(np.sum(np.maximum(e - base, 0.0)))


def _as_polyline(polyline) -> np.ndarray:
    pts = np.asarray(polyline, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("polyline needs at least two 2D points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("polyline has non-finite coordinates")
    return pts


def _disk_arrays(disks) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(disks, tuple) and len(disks) == 2 and not isinstance(disks[0], Disk):
        centers = np.asarray(disks[0], dtype=float).reshape(-1, 2)
        radii = np.broadcast_to(np.asarray(disks[1], dtype=float), (centers.shape[0],))
        return centers, np.ascontiguousarray(radii)
    disks = list(disks)
    if not disks:
        return np.zeros((0, 2)), np.zeros(0)
    centers = np.array([d.center for d in disks], dtype=float)
    radii = np.array([d.radius for d in disks], dtype=float)
    return centers, radii


def polyline_covered_length(polyline, disks) -> tuple[float, float]:
    """Return ``(covered_length, total_length)`` of a polyline against a disk union.

    ``disks`` is an iterable of :class:`Disk` or a ``(centers, radii)`` pair of
    arrays (``radii`` may be a scalar).
    """
    pts = _as_polyline(polyline)
    centers, radii = _disk_arrays(disks)
    seg_vec = np.diff(pts, axis=0)
    seg_len = np.hypot(seg_vec[:, 0], seg_vec[:, 1])
    total = float(seg_len.sum())
    if total <= 0.0:
        raise ValueError("degenerate trajectory: zero total length")
    if centers.shape[0] == 0:
        return 0.0, total

    # cheap rejection: disk must reach the segment's bounding box
    lo = np.minimum(pts[:-1], pts[1:])
    hi = np.maximum(pts[:-1], pts[1:])
    covered = 0.0
    for i in range(seg_vec.shape[0]):
        if seg_len[i] == 0.0:
            continue
        near = np.all(centers >= lo[i] - radii[:, None], axis=1) & np.all(
            centers <= hi[i] + radii[:, None], axis=1
        )
        if not np.any(near):
            continue
        t_in, t_out = segment_disk_parameters(pts[i], pts[i + 1], centers[near], radii[near])
        covered += union_length(t_in, t_out) * seg_len[i]
    return min(covered, total), total


def polyline_coverage_proportion(polyline: Sequence, disks: Iterable) -> float:
    covered, total = polyline_covered_length(polyline, disks)
    return min(max(covered / total, 0.0), 1.0)

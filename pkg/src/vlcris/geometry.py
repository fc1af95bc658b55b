"""3D primitives: segments, vertical cylinders, planes, reflections.

Everything here is a pure function over immutable values. The scalar
functions mirror the batch versions (``*_batch``) used by the simulator;
the test-suite checks that both agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Point3",
    "Segment3",
    "VerticalCylinder",
    "OrientedPlane",
    "as_vec",
    "unit",
    "segment_intersects_cylinder",
    "segments_hit_cylinders",
    "reflect_point_across_plane",
    "reflect_direction",
    "angle_between",
]


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.z])):
            raise ValueError(f"non-finite point {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def of(cls, p) -> "Point3":
        p = np.asarray(p, dtype=float)
        return cls(float(p[0]), float(p[1]), float(p[2]))


@dataclass(frozen=True)
class Segment3:
    a: Point3
    b: Point3

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("degenerate segment (a == b)")


@dataclass(frozen=True)
class VerticalCylinder:
    """Finite upright cylinder standing on the floor (z in [0, height])."""

    center_xy: tuple[float, float]
    radius: float = 0.3
    height: float = 1.8

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("cylinder radius and height must be positive")


@dataclass(frozen=True)
class OrientedPlane:
    point: Point3
    unit_normal: tuple[float, float, float]

    def __post_init__(self):
        n = np.asarray(self.unit_normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("plane normal must have unit length")

    @classmethod
    def from_normal(cls, point, normal) -> "OrientedPlane":
        n = unit(normal)
        p = point if isinstance(point, Point3) else Point3.of(point)
        return cls(p, (float(n[0]), float(n[1]), float(n[2])))


def as_vec(p) -> np.ndarray:
    if isinstance(p, Point3):
        return p.as_array()
    return np.asarray(p, dtype=float)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def _open_interval_hits(a, b, centers, radius, height):
    """Core of the segment/cylinder test, broadcast over leading axes.

    ``a``, ``b`` have shape (S, 3); ``centers`` (C, 2). Returns (S, C) bool.
    """
    a = a[:, None, :]
    d = b[:, None, :] - a
    rel = a[..., :2] - centers[None, :, :]
    dxy = d[..., :2]

    qa = np.einsum("...k,...k->...", dxy, dxy)
    qb = 2.0 * np.einsum("...k,...k->...", dxy, rel)
    qc = np.einsum("...k,...k->...", rel, rel) - radius**2

    vertical = qa <= 1e-300
    disc = qb * qb - 4.0 * qa * qc
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.where(disc > 0, disc, 0.0))
        safe_qa = np.where(vertical, 1.0, qa)
        t1 = (-qb - sq) / (2.0 * safe_qa)
        t2 = (-qb + sq) / (2.0 * safe_qa)
    # vertical segments are laterally inside either everywhere or nowhere
    lat_ok = np.where(vertical, qc < 0, disc > 0)
    t1 = np.where(vertical, -np.inf, t1)
    t2 = np.where(vertical, np.inf, t2)

    dz = d[..., 2]
    az = np.broadcast_to(a[..., 2], dz.shape)
    flat = dz == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z0 = np.where(flat, 0.0, (0.0 - az) / np.where(flat, 1.0, dz))
        zh = np.where(flat, 0.0, (height - az) / np.where(flat, 1.0, dz))
    zlo = np.where(flat, -np.inf, np.minimum(z0, zh))
    zhi = np.where(flat, np.inf, np.maximum(z0, zh))
    z_ok = np.where(flat, (az > 0) & (az < height), True)

    lo = np.maximum(t1, zlo)
    hi = np.minimum(t2, zhi)
    return lat_ok & z_ok & (lo < hi) & (lo < 1.0) & (hi > 0.0)


def segments_hit_cylinders(a, b, centers, radius: float, height: float) -> np.ndarray:
    """Batch segment/cylinder strict-interior test.

    Parameters
    ----------
    a, b : array_like, shape (S, 3)
        Segment end points.
    centers : array_like, shape (C, 2)
        Cylinder axes (x, y); all cylinders share ``radius`` and ``height``.

    Returns
    -------
    ndarray of bool, shape (S, C)
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if centers.shape[0] == 0 or a.shape[0] == 0:
        return np.zeros((a.shape[0], centers.shape[0]), dtype=bool)
    return _open_interval_hits(a, b, centers, radius, height)


def segment_intersects_cylinder(seg: Segment3, cyl: VerticalCylinder) -> bool:
    """True iff some point of ``seg`` lies strictly inside ``cyl``.

    Grazing contact (lateral distance equal to the radius, or touching a
    cap plane) does not count.
    """
    hit = segments_hit_cylinders(
        seg.a.as_array()[None], seg.b.as_array()[None],
        np.asarray(cyl.center_xy, dtype=float)[None], cyl.radius, cyl.height,
    )
    return bool(hit[0, 0])


def reflect_point_across_plane(p, plane: OrientedPlane):
    q = plane.point.as_array()
    n = np.asarray(plane.unit_normal, dtype=float)
    v = as_vec(p)
    out = v - 2.0 * np.dot(v - q, n) * n
    return Point3.of(out) if isinstance(p, Point3) else out


def reflect_direction(v, normal) -> np.ndarray:
    """Mirror a free vector in a plane with (unit) ``normal``; broadcasts."""
    v = np.asarray(v, dtype=float)
    n = np.asarray(normal, dtype=float)
    return v - 2.0 * np.sum(v * n, axis=-1, keepdims=True) * n


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two nonzero vectors.

    Uses atan2(|u x v|, u.v), which keeps full precision near 0 and pi.
    """
    u = as_vec(u)
    v = as_vec(v)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("angle_between: zero-length vector")
    u = u / nu
    v = v / nv
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))

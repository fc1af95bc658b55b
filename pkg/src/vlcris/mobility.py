"""Random-waypoint walkers and geometric LoS blockage by human bodies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point3, VerticalCylinder, as_vec, segments_hit_cylinders

__all__ = [
    "WaypointTrack",
    "Blocker",
    "position_at",
    "jitter_offsets",
    "blockage_indicator",
    "blockage_degree",
    "blockage_degrees_batch",
]


@dataclass
class WaypointTrack:
    """Straight-line walk between uniformly drawn waypoints at constant speed.

    Legs are generated lazily from ``rng`` and cached, so ``position_at`` can
    be queried at any time in any order and stays deterministic.
    """

    width: float
    depth: float
    speed: float
    rng: np.random.Generator
    start: np.ndarray | None = None
    _legs: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("walking speed must be positive")
        if self.start is None:
            self.start = self._draw()
        self.start = np.asarray(self.start, dtype=float)[:2]
        self._legs.append(self._make_leg(0.0, self.start))

    def _draw(self) -> np.ndarray:
        return self.rng.uniform((0.0, 0.0), (self.width, self.depth))

    def _make_leg(self, t0, p0):
        p1 = self._draw()
        dur = float(np.hypot(*(p1 - p0))) / self.speed
        return (t0, p0, p1, dur)

    @property
    def current_start(self) -> Point3:
        return Point3(float(self._legs[0][1][0]), float(self._legs[0][1][1]), 0.0)

    @property
    def current_end(self) -> Point3:
        return Point3(float(self._legs[0][2][0]), float(self._legs[0][2][1]), 0.0)

    def xy_at(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("time must be nonnegative")
        while True:
            t0, p0, p1, dur = self._legs[-1]
            if t <= t0 + dur:
                break
            self._legs.append(self._make_leg(t0 + dur, p1))
        # bisect over cached legs
        lo, hi = 0, len(self._legs) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            t0, _, _, dur = self._legs[mid]
            if t <= t0 + dur:
                hi = mid
            else:
                lo = mid + 1
        t0, p0, p1, dur = self._legs[lo]
        if dur == 0.0:
            return p1.copy()
        frac = (t - t0) / dur
        if frac >= 1.0:
            return p1.copy()
        return p0 + frac * (p1 - p0)

    def position_at(self, t: float) -> Point3:
        x, y = self.xy_at(t)
        return Point3(float(x), float(y), 0.0)


def position_at(track: WaypointTrack, t: float) -> Point3:
    return track.position_at(t)


@dataclass
class Blocker:
    track: WaypointTrack
    radius: float = 0.3
    height: float = 1.8

    def cylinder_at(self, t: float) -> VerticalCylinder:
        x, y = self.track.xy_at(t)
        return VerticalCylinder((float(x), float(y)), self.radius, self.height)


def jitter_offsets(samples: int, radius: float) -> np.ndarray:
    """Fixed horizontal sample points in a disc around the photodiode.

    Point 0 is the disc centre; the rest follow a golden-angle spiral out to
    the rim. Shape (samples, 3) with zero z-offset.
    """
    if samples < 1:
        raise ValueError("need at least one sample ray")
    if samples == 1:
        return np.zeros((1, 3))
    k = np.arange(samples)
    r = radius * np.sqrt(k / (samples - 1))
    theta = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([r * np.cos(theta), r * np.sin(theta), np.zeros(samples)], axis=1)


def _resolve(blockers, t):
    cyls = [b if isinstance(b, VerticalCylinder) else b.cylinder_at(t) for b in blockers]
    return cyls


def _hits_per_blocker(a, b, cyls):
    """(S, B) boolean matrix, blockers may differ in size."""
    if not cyls:
        return np.zeros((np.atleast_2d(a).shape[0], 0), dtype=bool)
    cols = [segments_hit_cylinders(a, b, np.asarray(c.center_xy)[None], c.radius, c.height)[:, 0]
            for c in cyls]
    return np.stack(cols, axis=1)


def blockage_indicator(ap, rx, blockers, t: float = 0.0) -> int:
    """1 when the AP -> PD segment is clear of every blocker, else 0."""
    a = as_vec(ap.position)[None]
    b = as_vec(rx.position)[None]
    per_blocker = 1 - _hits_per_blocker(a, b, _resolve(blockers, t))[0].astype(int)
    return int(np.prod(per_blocker))


def blockage_degree(ap, rx, blockers, t: float = 0.0, samples: int = 16,
                    disc_radius: float = 0.05) -> float:
    """Fraction of ``samples`` AP -> PD-disc rays that some blocker cuts."""
    pts = as_vec(rx.position)[None] + jitter_offsets(samples, disc_radius)
    a = np.repeat(as_vec(ap.position)[None], samples, axis=0)
    hits = _hits_per_blocker(a, pts, _resolve(blockers, t))
    return float(hits.any(axis=1).mean())


def blockage_degrees_batch(ap_pos, pd_pos, centers, radius, height, offsets) -> np.ndarray:
    """Blockage degree of every AP at once for equally sized blockers.

    ``ap_pos`` (N, 3), ``pd_pos`` (3,), ``centers`` (B, 2), ``offsets`` (K, 3).
    """
    ap_pos = np.asarray(ap_pos, dtype=float)
    n, k = ap_pos.shape[0], offsets.shape[0]
    if len(centers) == 0:
        return np.zeros(n)
    pts = np.asarray(pd_pos, dtype=float)[None] + offsets
    a = np.repeat(ap_pos, k, axis=0)
    b = np.tile(pts, (n, 1))
    hits = segments_hit_cylinders(a, b, centers, radius, height).any(axis=1)
    return hits.reshape(n, k).mean(axis=1)

"""Optical channel: Lambertian LoS gain, steerable mirror elements, SNR and rate.

Conventions
-----------
* APs sit on the ceiling and radiate downwards (normal ``(0, 0, -1)``).
* The photodiode faces straight up (normal ``(0, 0, 1)``).
* A mirror element sits on a wall. Its orientation is described by a yaw
  (rotation of the wall's inward normal about the vertical axis) followed by
  a roll (rotation about the yawed horizontal in-wall axis)::

      n(yaw, roll) = cos(roll) cos(yaw) n0 + cos(roll) sin(yaw) t0 + sin(roll) ez

  where ``n0`` is the inward wall normal and ``t0 = ez x n0``.
* Reflected-path gain uses the image-source model. The element is treated as
  a point reflector at its midpoint for path loss; the finite aperture only
  decides whether the specular ray actually lands on the mirror.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import (
    Point3,
    VerticalCylinder,
    as_vec,
    segments_hit_cylinders,
)

DOWN = np.array([0.0, 0.0, -1.0])
UP = np.array([0.0, 0.0, 1.0])
EZ = UP

# inward normal of each wall of an axis-aligned room [0, W] x [0, D]
WALL_NORMALS = {
    "x0": np.array([1.0, 0.0, 0.0]),
    "x1": np.array([-1.0, 0.0, 0.0]),
    "y0": np.array([0.0, 1.0, 0.0]),
    "y1": np.array([0.0, -1.0, 0.0]),
}


class InfeasibleSteeringError(ValueError):
    """AP or receiver lies behind the wall carrying the mirror."""


def lambertian_order(half_power_angle: float) -> float:
    """Lambertian order from the LED half-power semi-angle (radians)."""
    return -math.log(2.0) / math.log(math.cos(half_power_angle))


@dataclass(frozen=True)
class AccessPoint:
    id: int
    position: Point3
    power: float = 3.0
    lambertian_order: float = 1.0
    code_index: int = 1

    def __post_init__(self):
        if self.power <= 0:
            raise ValueError("optical power must be positive")
        if self.lambertian_order < 1:
            raise ValueError("Lambertian order must be >= 1")


@dataclass(frozen=True)
class Receiver:
    position: Point3
    area: float = 1e-4
    fov: float = math.radians(85.0)
    responsivity: float = 0.5
    filter_gain: float = 1.0
    concentrator_gain: float = 1.0

    def __post_init__(self):
        if self.area <= 0 or self.responsivity <= 0:
            raise ValueError("receiver area and responsivity must be positive")
        if not 0 < self.fov <= math.pi / 2:
            raise ValueError("receiver FOV must lie in (0, pi/2]")
        if self.filter_gain <= 0 or self.concentrator_gain <= 0:
            raise ValueError("filter and concentrator gains must be positive")

    def at(self, position) -> "Receiver":
        p = position if isinstance(position, Point3) else Point3.of(position)
        return replace(self, position=p)


@dataclass(frozen=True)
class RisElement:
    id: int
    midpoint: Point3
    wall: str = "x0"
    width: float = 0.1
    height: float = 0.1
    yaw: float = 0.0
    roll: float = 0.0
    reflectance: float = 0.95
    yaw_limit: float = math.pi / 4
    roll_limit: float = math.pi / 4

    def __post_init__(self):
        if self.wall not in WALL_NORMALS:
            raise ValueError(f"unknown wall {self.wall!r}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("element width and height must be positive")
        if not 0 < self.reflectance <= 1:
            raise ValueError("reflectance must lie in (0, 1]")
        if abs(self.yaw) > self.yaw_limit + 1e-12 or abs(self.roll) > self.roll_limit + 1e-12:
            raise ValueError("element angles exceed mechanical limits")

    @property
    def wall_normal(self) -> np.ndarray:
        return WALL_NORMALS[self.wall]

    @property
    def wall_tangent(self) -> np.ndarray:
        return np.cross(EZ, self.wall_normal)

    def normal(self) -> np.ndarray:
        return mirror_axes(self.wall_normal, self.yaw, self.roll)[0]

    def oriented(self, yaw: float, roll: float) -> "RisElement":
        return replace(self, yaw=float(yaw), roll=float(roll))


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise: one-sided PSD in A^2/Hz over the signal bandwidth."""

    psd: float = 1e-23
    bandwidth: float = 20e6

    def __post_init__(self):
        if self.psd <= 0 or self.bandwidth <= 0:
            raise ValueError("noise PSD and bandwidth must be positive")

    @property
    def power(self) -> float:
        return self.psd * self.bandwidth


@dataclass(frozen=True)
class LinkSnapshot:
    ap_id: int
    los_gain: float
    blockage_indicator: int
    blockage_degree: float
    ris_gains: tuple[float, ...]
    total_gain: float
    snr: float


class MirrorAngles(NamedTuple):
    yaw: float
    roll: float
    saturated: bool


def mirror_axes(n0, yaw, roll):
    """Normal, width axis and height axis of a yawed-then-rolled element.

    ``n0`` has shape (..., 3); ``yaw`` and ``roll`` broadcast against the
    leading axes.
    """
    n0 = np.asarray(n0, dtype=float)
    t0 = np.cross(EZ, n0)
    yaw = np.asarray(yaw, dtype=float)[..., None]
    roll = np.asarray(roll, dtype=float)[..., None]
    horiz = np.cos(yaw) * n0 + np.sin(yaw) * t0
    normal = np.cos(roll) * horiz + np.sin(roll) * EZ
    width_axis = -np.sin(yaw) * n0 + np.cos(yaw) * t0
    height_axis = np.cos(roll) * EZ - np.sin(roll) * horiz
    return normal, width_axis, height_axis


# ---------------------------------------------------------------------------
# Line-of-sight


def lambertian_gain_batch(src, dst, m, area, fov, filter_gain=1.0, concentrator_gain=1.0):
    """Downward Lambertian source to upward photodiode; broadcasts.

    Returns 0 where the incidence angle exceeds ``fov`` or the receiver is
    not below the source.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    d = dst - src
    dist2 = np.sum(d * d, axis=-1)
    if np.any(dist2 == 0):
        raise ValueError("coincident source and receiver")
    dist = np.sqrt(dist2)
    cos_phi = -d[..., 2] / dist  # irradiance angle, source normal points down
    cos_psi = cos_phi  # PD normal is anti-parallel to source normal
    ok = (cos_phi > 0) & (cos_psi >= math.cos(fov) - 1e-15)
    m = np.asarray(m, dtype=float)
    gain = (m + 1.0) * area / (2.0 * math.pi * dist2) * np.clip(cos_phi, 0, None) ** m
    gain = gain * filter_gain * concentrator_gain * cos_psi
    return np.where(ok, gain, 0.0)


def lambertian_gain(ap: AccessPoint, rx: Receiver) -> float:
    """LoS DC gain between a ceiling AP and an upward-facing photodiode.

    ``(m+1) A / (2 pi d^2) cos^m(phi) T g cos(psi)`` inside the FOV, else 0.
    """
    return float(lambertian_gain_batch(
        as_vec(ap.position), as_vec(rx.position), ap.lambertian_order,
        rx.area, rx.fov, rx.filter_gain, rx.concentrator_gain,
    ))


def source_gain(src, src_normal, dst, m, rx: Receiver) -> float:
    """Lambertian gain from an arbitrarily oriented source to the up-facing PD.

    Used to evaluate image sources, whose normal is the mirrored LED normal.
    """
    src = as_vec(src)
    dst = as_vec(dst)
    d = dst - src
    dist2 = float(d @ d)
    dist = math.sqrt(dist2)
    cos_phi = float(np.dot(src_normal, d)) / dist
    cos_psi = float(-d[2]) / dist
    if cos_phi <= 0 or cos_psi < math.cos(rx.fov) - 1e-15:
        return 0.0
    return ((m + 1.0) * rx.area / (2.0 * math.pi * dist2) * cos_phi**m
            * rx.filter_gain * rx.concentrator_gain * cos_psi)


# ---------------------------------------------------------------------------
# Mirror elements


def steer_batch(ap_pos, mid, n0, rx_pos, yaw_limit, roll_limit):
    """Vectorised mirror steering.

    All position arguments broadcast to (..., 3). Returns
    ``(yaw, roll, saturated, feasible)`` where ``feasible`` is False when
    AP or receiver is not strictly in front of the wall.
    """
    ap_pos = np.asarray(ap_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    mid = np.asarray(mid, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    va = ap_pos - mid
    vr = rx_pos - mid
    feasible = (np.sum(va * n0, -1) > 0) & (np.sum(vr * n0, -1) > 0)
    ua = va / np.linalg.norm(va, axis=-1, keepdims=True)
    ur = vr / np.linalg.norm(vr, axis=-1, keepdims=True)
    bis = ua + ur
    n = bis / np.linalg.norm(bis, axis=-1, keepdims=True)
    t0 = np.cross(EZ, n0)
    yaw = np.arctan2(np.sum(n * t0, -1), np.sum(n * n0, -1))
    roll = np.arcsin(np.clip(n[..., 2], -1.0, 1.0))
    yaw_c = np.clip(yaw, -yaw_limit, yaw_limit)
    roll_c = np.clip(roll, -roll_limit, roll_limit)
    saturated = (yaw_c != yaw) | (roll_c != roll)
    return yaw_c, roll_c, saturated, feasible


def compute_mirror_angles(ap_pos, elem: RisElement, rx_pos) -> MirrorAngles:
    """Yaw/roll that send the AP's ray through the element midpoint to the PD.

    The element normal is set to the bisector of the unit directions from the
    midpoint towards the AP and towards the receiver, then clamped to the
    element's mechanical limits.

    Raises
    ------
    InfeasibleSteeringError
        If the AP or the receiver is on or behind the wall plane.
    """
    yaw, roll, sat, ok = steer_batch(
        as_vec(ap_pos), as_vec(elem.midpoint), elem.wall_normal, as_vec(rx_pos),
        elem.yaw_limit, elem.roll_limit,
    )
    if not bool(ok):
        raise InfeasibleSteeringError(
            f"element {elem.id}: AP or receiver behind wall {elem.wall!r}")
    return MirrorAngles(float(yaw), float(roll), bool(sat))


def mirror_gain_batch(ap_pos, m, mid, n0, yaw, roll, width, height, reflectance,
                      rx_pos, rx: Receiver):
    """Reflected-path gain through oriented mirror elements (no blockage).

    Broadcasts over leading axes of the position arrays and angle arrays.
    """
    ap_pos = np.asarray(ap_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    mid = np.asarray(mid, dtype=float)
    normal, w_axis, h_axis = mirror_axes(n0, yaw, roll)

    va = ap_pos - mid
    vr = rx_pos - mid
    da = np.sum(va * normal, -1)
    dr = np.sum(vr * normal, -1)
    n0 = np.asarray(n0, dtype=float)
    front = (da > 0) & (dr > 0) & (np.sum(va * n0, -1) > 0) & (np.sum(vr * n0, -1) > 0)

    # image source and the point where its ray to the PD pierces the mirror plane
    vs = ap_pos - 2.0 * da[..., None] * normal
    ray = rx_pos - vs
    denom = np.sum(ray * normal, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sum((mid - vs) * normal, -1) / np.where(front, denom, 1.0)
    hit_pt = vs + s[..., None] * ray
    off = hit_pt - mid
    tol = 1e-9
    in_aperture = ((np.abs(np.sum(off * w_axis, -1)) <= np.asarray(width) / 2 + tol)
                   & (np.abs(np.sum(off * h_axis, -1)) <= np.asarray(height) / 2 + tol))

    la = np.linalg.norm(va, axis=-1)
    lr = np.linalg.norm(vr, axis=-1)
    total = la + lr
    cos_phi = va[..., 2] / la  # AP -> midpoint against the downward LED normal
    cos_psi = -vr[..., 2] / lr  # midpoint as seen from the up-facing PD
    in_fov = (cos_phi > 0) & (cos_psi >= math.cos(rx.fov) - 1e-15)
    m = np.asarray(m, dtype=float)
    gain = (np.asarray(reflectance) * (m + 1.0) * rx.area / (2.0 * math.pi * total**2)
            * np.clip(cos_phi, 0, None) ** m * np.clip(cos_psi, 0, None)
            * rx.filter_gain * rx.concentrator_gain)
    return np.where(front & in_aperture & in_fov, gain, 0.0)


def _cylinders(blockers, t) -> list[VerticalCylinder]:
    out = []
    for b in blockers or ():
        out.append(b if isinstance(b, VerticalCylinder) else b.cylinder_at(t))
    return out


def _any_blocked(a, b, cyls: Sequence[VerticalCylinder]) -> bool:
    for c in cyls:
        hit = segments_hit_cylinders(a[None], b[None], np.asarray(c.center_xy)[None],
                                     c.radius, c.height)
        if hit[0, 0]:
            return True
    return False


def mirror_element_gain(ap: AccessPoint, elem: RisElement, rx: Receiver,
                        blockers=(), t: float = 0.0, block_ris: bool = True) -> float:
    """Gain of the AP -> element -> PD path for the element's current angles.

    Zero when the specular ray misses the element aperture, when the PD sees
    the element outside its FOV, or (with ``block_ris``) when a blocker cuts
    either hop.
    """
    ap_p = as_vec(ap.position)
    mid = as_vec(elem.midpoint)
    rx_p = as_vec(rx.position)
    g = float(mirror_gain_batch(ap_p, ap.lambertian_order, mid, elem.wall_normal,
                                elem.yaw, elem.roll, elem.width, elem.height,
                                elem.reflectance, rx_p, rx))
    if g == 0.0 or not block_ris:
        return g
    cyls = _cylinders(blockers, t)
    if _any_blocked(ap_p, mid, cyls) or _any_blocked(mid, rx_p, cyls):
        return 0.0
    return g


def total_gain(indicator: int, los_gain: float, ris_gains: Sequence[float] = ()) -> float:
    """Channel gain of one AP: gated LoS term plus its assigned mirror paths."""
    return indicator * los_gain + float(sum(ris_gains))


# ---------------------------------------------------------------------------
# SNR and rate

RATE_FACTOR = math.e / (2.0 * math.pi)


def snr(h, ap: AccessPoint, rx: Receiver, noise: NoiseModel):
    """Electrical SNR ``(r h P)^2 / (N0 B)``."""
    if noise.power <= 0:
        raise ValueError("noise power must be positive")
    return (rx.responsivity * np.asarray(h) * ap.power) ** 2 / noise.power


def achievable_rate(bandwidth: float, eta) -> float:
    """``B log2(1 + e/(2 pi) eta)`` in bit/s."""
    return bandwidth * np.log1p(RATE_FACTOR * np.asarray(eta)) / math.log(2.0)


def combined_rate(bandwidth: float, snrs: Sequence[float]) -> float:
    """Rate when the receiver combines the same data from several APs."""
    snrs = np.asarray(snrs, dtype=float)
    if snrs.size == 0:
        raise ValueError("combined_rate needs at least one SNR")
    return float(achievable_rate(bandwidth, snrs.sum()))

"""Scenario geometry: AP placement, mirror layout, walkers, per-instant channel.

Random streams for one trial are derived from ``(master seed, trial index)``
with a splitmix64 mix followed by ``numpy.random.SeedSequence.spawn``:

* child 0 places the APs (drawn one after another, so the first ``k`` APs of
  an ``N``-AP layout are the ``k``-AP layout);
* child 1 drives the user;
* child ``2 + b`` drives blocker ``b``.

Changing the AP count therefore leaves the walkers untouched, which keeps
sweeps over N paired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .geometry import Point3, segments_hit_cylinders
from .handover import ChannelState
from .mobility import Blocker, WaypointTrack, jitter_offsets
from .ocdma import spreading_factor_for
from .optics import (
    WALL_NORMALS,
    AccessPoint,
    NoiseModel,
    Receiver,
    RisElement,
    lambertian_gain_batch,
    lambertian_order,
    mirror_gain_batch,
    steer_batch,
)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    """Independent 64-bit seed for trial ``index`` of run ``master``."""
    return splitmix64(splitmix64(int(master) & MASK64) ^ (int(index) & MASK64))


def trial_streams(master: int, index: int, n_blockers: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(derive_seed(master, index)).spawn(2 + n_blockers)
    return [np.random.default_rng(c) for c in children]


def place_aps(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Ceiling AP positions, shape (N, 3)."""
    room, n = cfg.room, cfg.aps.count
    if cfg.aps.placement == "grid":
        cols = math.ceil(math.sqrt(n))
        rows = math.ceil(n / cols)
        pts = [((c + 0.5) * room.width / cols, (r + 0.5) * room.depth / rows)
               for r in range(rows) for c in range(cols)][:n]
        return np.array([(x, y, room.height) for x, y in pts])
    if rng is None:
        raise ValueError("random placement needs a generator")
    pts: list[np.ndarray] = []
    tries = 0
    while len(pts) < n:
        p = rng.uniform((0.0, 0.0), (room.width, room.depth))
        tries += 1
        if all(np.hypot(*(p - q)) >= cfg.aps.min_spacing for q in pts):
            pts.append(p)
        elif tries > 10000 * n:
            raise ValueError("cannot place APs with the requested minimum spacing")
    return np.array([(x, y, room.height) for x, y in pts])


def layout_elements(cfg: ScenarioConfig) -> list[RisElement]:
    ris, room = cfg.ris, cfg.room
    m = ris.elements
    if m == 0:
        return []
    n0 = WALL_NORMALS[ris.wall]
    t0 = np.cross((0.0, 0.0, 1.0), n0)
    centre = {
        "x0": (0.0, room.depth / 2), "x1": (room.width, room.depth / 2),
        "y0": (room.width / 2, 0.0), "y1": (room.width / 2, room.depth),
    }[ris.wall]
    per_row = math.ceil(m / ris.rows)
    out = []
    for j in range(m):
        r, c = divmod(j, per_row)
        along = (c - (per_row - 1) / 2) * ris.spacing
        up = ((ris.rows - 1) / 2 - r) * ris.spacing
        x = centre[0] + along * t0[0]
        y = centre[1] + along * t0[1]
        out.append(RisElement(
            id=j + 1, midpoint=Point3(float(x), float(y), ris.center_height + up), wall=ris.wall,
            width=ris.element_width, height=ris.element_height, reflectance=ris.reflectance,
            yaw_limit=math.radians(ris.yaw_limit_deg), roll_limit=math.radians(ris.roll_limit_deg),
        ))
    return out


@dataclass
class Scene:
    """Static part of a scenario plus the vectorised channel evaluation."""

    cfg: ScenarioConfig
    aps: list[AccessPoint]
    elements: list[RisElement]
    receiver: Receiver
    noise: NoiseModel
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, cfg: ScenarioConfig, ap_positions: np.ndarray) -> "Scene":
        m_order = lambertian_order(math.radians(cfg.aps.half_power_angle_deg))
        sf = spreading_factor_for(len(ap_positions))
        aps = [AccessPoint(i + 1, Point3.of(p), cfg.aps.power, m_order, code_index=(i % (sf - 1)) + 1)
               for i, p in enumerate(ap_positions)]
        rc = cfg.receiver
        rx = Receiver(Point3(0.0, 0.0, rc.height), rc.area, math.radians(rc.fov_deg),
                      rc.responsivity, rc.filter_gain, rc.concentrator_gain)
        return cls(cfg, aps, layout_elements(cfg), rx, NoiseModel(cfg.noise.psd, cfg.noise.bandwidth))

    def __post_init__(self):
        c = self._cache
        c["ap"] = np.array([p.position.as_array() for p in self.aps]).reshape(-1, 3)
        c["m"] = np.array([p.lambertian_order for p in self.aps])
        c["power"] = np.array([p.power for p in self.aps])
        c["ids"] = np.array([p.id for p in self.aps])
        els = self.elements
        c["mid"] = np.array([e.midpoint.as_array() for e in els]).reshape(-1, 3)
        c["n0"] = np.array([e.wall_normal for e in els]).reshape(-1, 3)
        c["w"] = np.array([e.width for e in els])
        c["h"] = np.array([e.height for e in els])
        c["rho"] = np.array([e.reflectance for e in els])
        c["ylim"] = np.array([e.yaw_limit for e in els])
        c["rlim"] = np.array([e.roll_limit for e in els])
        n, m = len(self.aps), len(els)
        c["hop1_a"] = np.repeat(c["ap"], m, axis=0)
        c["hop1_b"] = np.tile(c["mid"], (n, 1))
        c["elem_dist"] = np.linalg.norm(c["ap"][:, None, :] - c["mid"][None, :, :], axis=-1)
        mob = self.cfg.mobility
        c["offsets"] = jitter_offsets(mob.xi_samples, mob.xi_disc_radius)

    @property
    def ap_positions(self) -> np.ndarray:
        return self._cache["ap"]

    def pd_position(self, xy) -> np.ndarray:
        return np.array([xy[0], xy[1], self.cfg.receiver.height], dtype=float)

    def _steered_gains(self, pd) -> np.ndarray:
        c = self._cache
        ap = c["ap"][:, None, :]
        yaw, roll, _, ok = steer_batch(ap, c["mid"][None], c["n0"][None], pd,
                                       c["ylim"][None], c["rlim"][None])
        g = mirror_gain_batch(ap, c["m"][:, None], c["mid"][None], c["n0"][None], yaw, roll,
                              c["w"][None], c["h"][None], c["rho"][None], pd, self.receiver)
        return np.where(ok, g, 0.0)

    def channel(self, xy, centers) -> ChannelState:
        """Blockage degrees, LoS gains and steered mirror gains at one instant.

        All blocker tests (jittered LoS rays and both mirror hops) go through
        a single batched segment/cylinder call.
        """
        c = self._cache
        mob = self.cfg.mobility
        rx = self.receiver
        pd = self.pd_position(xy)
        centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        n, m, k = c["ap"].shape[0], c["mid"].shape[0], c["offsets"].shape[0]

        los = lambertian_gain_batch(c["ap"], pd, c["m"], rx.area, rx.fov,
                                    rx.filter_gain, rx.concentrator_gain)
        ris = self._steered_gains(pd) if m else np.zeros((n, 0))
        if len(centers):
            block_ris = self.cfg.ris.block_paths and m > 0
            a = [np.repeat(c["ap"], k, axis=0)]
            b = [np.tile(pd[None] + c["offsets"], (n, 1))]
            if block_ris:
                a += [c["hop1_a"], c["mid"]]
                b += [c["hop1_b"], np.broadcast_to(pd, (m, 3))]
            hit = segments_hit_cylinders(np.concatenate(a), np.concatenate(b), centers,
                                         mob.blocker_radius, mob.blocker_height).any(axis=1)
            xi = hit[:n * k].reshape(n, k).mean(axis=1)
            if block_ris:
                hop1 = hit[n * k:n * k + n * m].reshape(n, m)
                hop2 = hit[n * k + n * m:]
                ris = np.where(hop1 | hop2[None, :], 0.0, ris)
        else:
            xi = np.zeros(n)
        return ChannelState(
            xi=xi, los=los, ris=ris,
            rx_distance=np.linalg.norm(c["ap"] - pd, axis=1), power=c["power"],
            responsivity=rx.responsivity, noise_power=self.noise.power,
            bandwidth=self.noise.bandwidth, elem_distance=c["elem_dist"],
            rx_xy=(float(xy[0]), float(xy[1])), ap_ids=c["ids"],
        )


@dataclass
class World:
    """One trial's scene and walkers."""

    scene: Scene
    user: WaypointTrack
    blockers: list[Blocker]

    @classmethod
    def build(cls, cfg: ScenarioConfig, trial: int, user_speed: float | None = None) -> "World":
        mob = cfg.mobility
        streams = trial_streams(cfg.sim.seed, trial, mob.blockers)
        scene = Scene.build(cfg, place_aps(cfg, streams[0]))
        speed = mob.user_speed if user_speed is None else user_speed
        w, d = cfg.room.width, cfg.room.depth
        user = WaypointTrack(w, d, speed, streams[1])
        blockers = []
        for g in streams[2:]:
            v = float(g.uniform(mob.blocker_speed_min, mob.blocker_speed_max))
            blockers.append(Blocker(WaypointTrack(w, d, v, g), mob.blocker_radius, mob.blocker_height))
        return cls(scene, user, blockers)

    def centers_at(self, t: float, user_xy=None) -> np.ndarray:
        """Blocker axes at ``t``, pushed out of the user's personal space."""
        if not self.blockers:
            return np.zeros((0, 2))
        c = np.array([b.track.xy_at(t) for b in self.blockers])
        if user_xy is None:
            return c
        mob = self.scene.cfg.mobility
        return push_out(c, user_xy, mob.blocker_radius + mob.personal_space)

    def channel_at(self, t: float) -> ChannelState:
        xy = self.user.xy_at(t)
        return self.scene.channel(xy, self.centers_at(t, xy))


def push_out(centers, user_xy, keep: float) -> np.ndarray:
    """Move blocker axes closer than ``keep`` to the user onto that radius.

    Walkers never step onto the user; an exact overlap is pushed along +x.
    """
    c = np.array(centers, dtype=float).reshape(-1, 2)
    user = np.asarray(user_xy, dtype=float)
    rel = c - user
    d = np.hypot(rel[:, 0], rel[:, 1])
    close = d < keep
    if close.any():
        safe = np.where(d > 0, d, 1.0)[:, None]
        direction = np.where((d > 0)[:, None], rel / safe, np.array([1.0, 0.0]))
        c[close] = user + direction[close] * keep
    return c

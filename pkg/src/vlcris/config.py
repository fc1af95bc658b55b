"""Scenario configuration: dataclasses, JSON loading and validation.

A config file is a JSON object whose sections mirror :class:`ScenarioConfig`.
Every key has a default, so ``{}`` is a valid file. See README.md for the
full key reference.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .handover import HandoverConfig


class ConfigError(ValueError):
    """Raised with the list of every problem found in a configuration."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class RoomConfig:
    width: float = 5.0
    depth: float = 5.0
    height: float = 3.0


@dataclass(frozen=True)
class ApConfig:
    count: int = 4
    placement: str = "random"  # "random" ceiling positions or a "grid"
    min_spacing: float = 0.5
    power: float = 3.0
    half_power_angle_deg: float = 60.0


@dataclass(frozen=True)
class ReceiverConfig:
    height: float = 0.85
    area: float = 1e-4
    fov_deg: float = 85.0
    responsivity: float = 0.5
    filter_gain: float = 1.0
    concentrator_gain: float = 1.0


@dataclass(frozen=True)
class RisConfig:
    wall: str = "x0"
    elements: int = 6
    rows: int = 1
    spacing: float = 0.6
    center_height: float = 2.0
    element_width: float = 0.1
    element_height: float = 0.1
    reflectance: float = 0.95
    yaw_limit_deg: float = 45.0
    roll_limit_deg: float = 45.0
    block_paths: bool = True


@dataclass(frozen=True)
class NoiseConfig:
    psd: float = 1e-23  # A^2/Hz
    bandwidth: float = 20e6  # Hz


@dataclass(frozen=True)
class MobilityConfig:
    blockers: int = 3
    blocker_radius: float = 0.3
    blocker_height: float = 1.8
    blocker_speed_min: float = 0.5
    blocker_speed_max: float = 1.5
    user_speed: float = 1.0
    classes: dict = field(default_factory=lambda: {"low": 0.5, "high": 2.0})
    xi_samples: int = 16
    xi_disc_radius: float = 0.05
    personal_space: float = 0.1  # min gap between a blocker's body and the PD


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    duration: float = 60.0
    trials: int = 50
    seed: int = 2024
    workers: int = 1


@dataclass(frozen=True)
class AnnConfig:
    hidden: tuple = (64, 64, 32)
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 60
    seed: int = 0
    dataset_size: int = 10000


@dataclass(frozen=True)
class ScenarioConfig:
    room: RoomConfig = field(default_factory=RoomConfig)
    aps: ApConfig = field(default_factory=ApConfig)
    receiver: ReceiverConfig = field(default_factory=ReceiverConfig)
    ris: RisConfig = field(default_factory=RisConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    handover: HandoverConfig = field(default_factory=HandoverConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    ann: AnnConfig = field(default_factory=AnnConfig)

    def replace(self, **sections) -> "ScenarioConfig":
        """Return a copy with fields of named sections overridden.

        ``cfg.replace(aps={"count": 6}, handover={"ris_enabled": False})``
        """
        updates = {}
        for name, changes in sections.items():
            updates[name] = dataclasses.replace(getattr(self, name), **changes)
        return dataclasses.replace(self, **updates)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


SECTIONS = {f.name: f.default_factory for f in dataclasses.fields(ScenarioConfig)}


def from_dict(data: dict) -> ScenarioConfig:
    problems = []
    built = {}
    if not isinstance(data, dict):
        raise ConfigError(["top level must be an object"])
    for key in data:
        if key not in SECTIONS:
            problems.append(f"unknown section {key!r}")
    for name, factory in SECTIONS.items():
        section = data.get(name, {})
        default = factory()
        known = {f.name for f in dataclasses.fields(default)}
        if not isinstance(section, dict):
            problems.append(f"{name}: must be an object")
            continue
        bad = sorted(set(section) - known)
        problems += [f"{name}.{k}: unknown key" for k in bad]
        kwargs = {k: v for k, v in section.items() if k in known}
        if "hidden" in kwargs:
            kwargs["hidden"] = tuple(kwargs["hidden"])
        try:
            built[name] = dataclasses.replace(default, **kwargs)
        except (TypeError, ValueError) as exc:
            problems.append(f"{name}: {exc}")
    if problems:
        raise ConfigError(problems)
    cfg = ScenarioConfig(**built)
    validate(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    return from_dict(data)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    p = []
    r = cfg.room
    if min(r.width, r.depth, r.height) <= 0:
        p.append("room: dimensions must be positive")
    if cfg.aps.count < 1:
        p.append("aps.count: need at least one AP")
    if cfg.aps.placement not in ("random", "grid"):
        p.append("aps.placement: must be 'random' or 'grid'")
    if cfg.aps.power <= 0:
        p.append("aps.power: must be positive")
    if not 0 < cfg.aps.half_power_angle_deg < 90:
        p.append("aps.half_power_angle_deg: must lie in (0, 90)")
    if not 0 < cfg.receiver.height < r.height:
        p.append("receiver.height: must lie inside the room")
    if not 0 < cfg.receiver.fov_deg <= 90:
        p.append("receiver.fov_deg: must lie in (0, 90]")
    if cfg.ris.wall not in ("x0", "x1", "y0", "y1"):
        p.append("ris.wall: one of x0, x1, y0, y1")
    if cfg.ris.elements < 0 or cfg.ris.rows < 1:
        p.append("ris: elements >= 0 and rows >= 1")
    if not 0 < cfg.ris.reflectance <= 1:
        p.append("ris.reflectance: must lie in (0, 1]")
    if cfg.noise.psd <= 0 or cfg.noise.bandwidth <= 0:
        p.append("noise: psd and bandwidth must be positive")
    mob = cfg.mobility
    if mob.blockers < 0:
        p.append("mobility.blockers: must be >= 0")
    if mob.blocker_height >= r.height:
        p.append("mobility.blocker_height: must be below the ceiling")
    if not 0 < mob.blocker_speed_min <= mob.blocker_speed_max:
        p.append("mobility: need 0 < blocker_speed_min <= blocker_speed_max")
    if mob.user_speed <= 0 or any(v <= 0 for v in mob.classes.values()):
        p.append("mobility: speeds must be positive")
    if mob.personal_space < 0:
        p.append("mobility.personal_space: must be >= 0")
    if mob.xi_samples < 1:
        p.append("mobility.xi_samples: must be >= 1")
    s = cfg.sim
    if s.dt <= 0 or s.duration <= 0:
        p.append("sim: dt and duration must be positive")
    if s.trials < 1:
        p.append("sim.trials: must be >= 1")
    if s.workers < 1:
        p.append("sim.workers: must be >= 1")
    if cfg.ann.dataset_size < 1 or cfg.ann.epochs < 0 or cfg.ann.batch_size < 1:
        p.append("ann: dataset_size, batch_size >= 1 and epochs >= 0")
    if not all(math.isfinite(v) for v in (r.width, r.depth, r.height)):
        p.append("room: dimensions must be finite")
    if p:
        raise ConfigError(p)
    return cfg


def default_config_json() -> str:
    return json.dumps(ScenarioConfig().to_dict(), indent=2, sort_keys=False)

"""Proactive blockage-driven handover with optional mirror-array assistance.

One call to :func:`step` consumes the channel at a single time instant and
decides between keeping the current link, a hard handover (one unblocked
AP), a soft handover (several unblocked APs, combined SNR) and, when every
LoS link is blocked, bridging through the mirror array. Without mirrors the
all-blocked case is a connectivity hole, as is any step whose rate is zero
(latency is undefined there).

A handover *execution* is a change of serving set. Re-confirming the same
set is ``NO_CHANGE``. A hole empties the serving set, so reconnecting after
a hole counts as a handover.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .optics import achievable_rate
from .ris_assign.oracle import AssignmentProblem, coordinate_ascent_assign

__all__ = [
    "HandoverConfig",
    "HandoverState",
    "HandoverRecord",
    "Decision",
    "ChannelState",
    "electrical_current",
    "blockage_probability",
    "blockage_probability_threshold",
    "blocked_mask",
    "handover_latency",
    "step",
]


class Decision(enum.Enum):
    NO_CHANGE = "no_change"
    HARD = "hard"
    SOFT = "soft"
    RIS_BRIDGE = "ris_bridge"
    HOLE = "hole"


@dataclass(frozen=True)
class HandoverConfig:
    current_threshold: float = 1e-7  # A, only used by the "threshold" rule
    signaling_bits: float = 1000.0
    ris_enabled: bool = True
    blockage_rule: str = "binary-approx"
    max_rounds: int = 50

    def __post_init__(self):
        if self.current_threshold <= 0:
            raise ValueError("current_threshold must be positive")
        if self.signaling_bits <= 0:
            raise ValueError("signaling_bits must be positive")
        if self.blockage_rule not in ("binary-approx", "threshold"):
            raise ValueError(f"unknown blockage_rule {self.blockage_rule!r}")


@dataclass
class ChannelState:
    """Per-AP channel quantities at one instant plus the link budget.

    ``ris`` holds, for every (AP, element) pair, the reflected-path gain the
    element delivers when steered for that AP (0 where it cannot).
    """

    xi: np.ndarray
    los: np.ndarray
    ris: np.ndarray
    rx_distance: np.ndarray
    power: np.ndarray
    responsivity: float
    noise_power: float
    bandwidth: float
    elem_distance: np.ndarray | None = None
    rx_xy: tuple[float, float] = (0.0, 0.0)
    ap_ids: np.ndarray | None = None

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        n = self.xi.size
        self.los = np.asarray(self.los, dtype=float)
        self.ris = np.asarray(self.ris, dtype=float).reshape(n, -1)
        self.rx_distance = np.asarray(self.rx_distance, dtype=float)
        self.power = np.broadcast_to(np.asarray(self.power, dtype=float), (n,))
        if self.ap_ids is None:
            self.ap_ids = np.arange(1, n + 1)

    @property
    def n_aps(self) -> int:
        return self.xi.size

    def problem(self, los_gate, use_ris: bool = True) -> AssignmentProblem:
        ris = self.ris if use_ris else np.zeros_like(self.ris)
        return AssignmentProblem(self.los * los_gate, ris, self.power, self.responsivity,
                                 self.noise_power, self.bandwidth, self.elem_distance, self.ap_ids)


@dataclass
class HandoverRecord:
    decision: Decision
    aps: tuple[int, ...]
    rate: float
    latency: float
    assignment: tuple[int, ...]
    counted: bool = False


@dataclass
class HandoverState:
    serving: frozenset = frozenset()
    n_hard: int = 0
    n_soft: int = 0
    bridge_events: int = 0
    hole_steps: int = 0
    steps: int = 0
    rate_sum: float = 0.0
    hard_rates: list = field(default_factory=list)
    soft_rates: list = field(default_factory=list)
    hard_latencies: list = field(default_factory=list)
    soft_latencies: list = field(default_factory=list)


def electrical_current(xi, responsivity, los_gain, power):
    """Photocurrent ``(1 - xi) r h P``."""
    return (1.0 - np.asarray(xi)) * responsivity * np.asarray(los_gain) * np.asarray(power)


def blockage_probability(xi):
    """1 if the blockage degree is at least one half, else 0."""
    out = (np.asarray(xi) >= 0.5).astype(int)
    return int(out) if out.ndim == 0 else out


def blockage_probability_threshold(current, threshold: float):
    """1 if the realised photocurrent falls strictly below ``threshold``."""
    if threshold <= 0:
        raise ValueError("current threshold must be positive")
    out = (np.asarray(current) < threshold).astype(int)
    return int(out) if out.ndim == 0 else out


def blocked_mask(ch: ChannelState, cfg: HandoverConfig) -> np.ndarray:
    if cfg.blockage_rule == "threshold":
        cur = electrical_current(ch.xi, ch.responsivity, ch.los, ch.power)
        return blockage_probability_threshold(cur, cfg.current_threshold).astype(bool)
    return np.asarray(ch.xi) >= 0.5


def handover_latency(rate: float, signaling_bits: float) -> float:
    """Time to move ``signaling_bits`` of handover signalling at ``rate``."""
    if signaling_bits <= 0:
        raise ValueError("signaling size must be positive")
    if not rate > 0:
        raise ValueError("latency undefined at zero rate")
    return signaling_bits / rate


Assigner = Callable[[list, AssignmentProblem, ChannelState], np.ndarray]


def _closest(ch: ChannelState, pool) -> int:
    """Id of the AP in ``pool`` nearest to the receiver; ties to the lower id."""
    pool = sorted(pool)
    d = [ch.rx_distance[int(np.flatnonzero(ch.ap_ids == a)[0])] for a in pool]
    return pool[int(np.argmin(d))]


def _rate(problem: AssignmentProblem, assignment, active) -> float:
    eta = problem.snrs(assignment, active).sum()
    return float(achievable_rate(problem.bandwidth, eta))


def _hole(state: HandoverState, m: int) -> HandoverRecord:
    state.serving = frozenset()
    state.hole_steps += 1
    return HandoverRecord(Decision.HOLE, (), 0.0, 0.0, (0,) * m)


def step(state: HandoverState, ch: ChannelState, cfg: HandoverConfig,
         assigner: Assigner | None = None) -> HandoverRecord:
    """Advance the handover state machine by one instant.

    ``assigner(candidates, problem, ch)`` distributes the mirror elements in
    the soft case; coordinate ascent on the combined rate by default.
    """
    if ch.n_aps == 0:
        raise ValueError("no access points configured")
    m = ch.ris.shape[1]
    use_ris = cfg.ris_enabled and m > 0
    blocked = blocked_mask(ch, cfg)
    ids = [int(a) for a in ch.ap_ids]
    unblocked = [a for a, b, h in zip(ids, blocked, ch.los) if not b and h > 0]
    state.steps += 1

    if not unblocked:
        feasible = [a for k, a in enumerate(ids) if ch.ris[k].sum() > 0] if use_ris else []
        if not feasible:
            return _hole(state, m)
        # keep an existing association alive through the mirrors when possible
        kept = [a for a in feasible if a in state.serving]
        ap = _closest(ch, kept or feasible)
        problem = ch.problem(np.zeros(ch.n_aps))
        assignment = np.full(m, ap, dtype=int)
        rate = _rate(problem, assignment, [ap])
        if not rate > 0:
            return _hole(state, m)
        state.rate_sum += rate
        if kept:
            return HandoverRecord(Decision.NO_CHANGE, (ap,), rate, 0.0, tuple(assignment))
        latency = handover_latency(rate, cfg.signaling_bits)
        state.serving = frozenset([ap])
        state.n_hard += 1
        state.bridge_events += 1
        state.hard_rates.append(rate)
        state.hard_latencies.append(latency)
        return HandoverRecord(Decision.RIS_BRIDGE, (ap,), rate, latency, tuple(assignment), True)

    problem = ch.problem(np.where(blocked, 0.0, 1.0), use_ris=use_ris)
    if len(unblocked) == 1:
        kind = Decision.HARD
        assignment = np.full(m, unblocked[0], dtype=int) if use_ris else np.zeros(m, dtype=int)
    else:
        kind = Decision.SOFT
        if not use_ris:
            assignment = np.zeros(m, dtype=int)
        elif assigner is None:
            assignment = coordinate_ascent_assign(unblocked, problem, cfg.max_rounds)
        else:
            assignment = np.asarray(assigner(unblocked, problem, ch), dtype=int)
    rate = _rate(problem, assignment, unblocked)
    if not rate > 0:  # gains too small to carry anything: no usable link
        return _hole(state, m)
    state.rate_sum += rate
    new = frozenset(unblocked)
    if new == state.serving:
        return HandoverRecord(Decision.NO_CHANGE, tuple(unblocked), rate, 0.0, tuple(assignment))
    latency = handover_latency(rate, cfg.signaling_bits)
    state.serving = new
    if kind is Decision.HARD:
        state.n_hard += 1
        state.hard_rates.append(rate)
        state.hard_latencies.append(latency)
    else:
        state.n_soft += 1
        state.soft_rates.append(rate)
        state.soft_latencies.append(latency)
    return HandoverRecord(kind, tuple(unblocked), rate, latency, tuple(assignment), True)


def mean_or_nan(values) -> float:
    return float(np.mean(values)) if len(values) else math.nan

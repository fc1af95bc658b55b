"""Seeded trials, parameter sweeps, metric aggregation and CSV/JSON export."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, validate
from .handover import HandoverState, mean_or_nan, step
from .scene import World

METRICS = ("R_h", "R_s", "delta_h", "delta_s", "N_h", "N_s", "bridge_events", "hole_frac")
EXTRA = ("rate", "delta")
COLUMNS = (("axis", "ris", "mobility") + METRICS + tuple(f"{k}_std" for k in METRICS)
           + ("rate", "rate_std", "delta", "delta_std", "trials"))
AXES = {
    "N": ("aps", "count", int),
    "speed": ("mobility", "user_speed", float),
    "NB": ("mobility", "blockers", int),
    "ris": ("handover", "ris_enabled", None),
}


@dataclass(frozen=True)
class TrialMetrics:
    """Per-trial summary. Rate and latency means cover executed handovers only."""

    R_h: float
    R_s: float
    delta_h: float
    delta_s: float
    N_h: int
    N_s: int
    bridge_events: int
    hole_frac: float
    rate: float  # time average over every step
    steps: int
    delta: float = math.nan  # mean latency over all executed handovers

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TrialTrace:
    metrics: TrialMetrics
    rates: np.ndarray
    decisions: list
    holes: np.ndarray
    ris_feasible: np.ndarray


def n_steps(cfg: ScenarioConfig) -> int:
    return int(round(cfg.sim.duration / cfg.sim.dt))


def _metrics(state: HandoverState) -> TrialMetrics:
    return TrialMetrics(
        R_h=mean_or_nan(state.hard_rates), R_s=mean_or_nan(state.soft_rates),
        delta_h=mean_or_nan(state.hard_latencies), delta_s=mean_or_nan(state.soft_latencies),
        N_h=state.n_hard, N_s=state.n_soft, bridge_events=state.bridge_events,
        hole_frac=state.hole_steps / state.steps if state.steps else 0.0,
        rate=state.rate_sum / state.steps if state.steps else 0.0, steps=state.steps,
        delta=mean_or_nan(state.hard_latencies + state.soft_latencies),
    )


def simulate(cfg: ScenarioConfig, trial: int, ris_modes=(True, False), user_speed=None,
             assigner=None, trace: bool = False) -> dict:
    """Run one trial once per RIS mode over the same walkers and layout.

    Returns ``{ris_enabled: TrialMetrics}``, or ``{ris_enabled: TrialTrace}``
    with per-step rates and decisions when ``trace`` is set.
    """
    validate(cfg)
    world = World.build(cfg, trial, user_speed)
    hcfgs = {mode: dataclasses.replace(cfg.handover, ris_enabled=mode) for mode in ris_modes}
    states = {mode: HandoverState() for mode in ris_modes}
    steps = n_steps(cfg)
    logs = {mode: ([], []) for mode in ris_modes}
    feasible = []
    for k in range(steps):
        ch = world.channel_at(k * cfg.sim.dt)
        if trace:
            feasible.append(bool(ch.ris.sum() > 0))
        for mode in ris_modes:
            rec = step(states[mode], ch, hcfgs[mode], assigner)
            if trace:
                logs[mode][0].append(rec.rate)
                logs[mode][1].append(rec.decision)
    out = {}
    for mode in ris_modes:
        m = _metrics(states[mode])
        if trace:
            rates, decisions = logs[mode]
            holes = np.array([d.value == "hole" for d in decisions], dtype=bool)
            out[mode] = TrialTrace(m, np.array(rates), decisions, holes, np.array(feasible, dtype=bool))
        else:
            out[mode] = m
    return out


def run_trial(cfg: ScenarioConfig, trial: int = 0, assigner=None) -> TrialMetrics:
    """Metrics of trial ``trial`` under ``cfg`` (RIS per ``cfg.handover``)."""
    mode = cfg.handover.ris_enabled
    return simulate(cfg, trial, (mode,), assigner=assigner)[mode]


def _aggregate(items: list[TrialMetrics]) -> dict:
    row = {}
    for key in METRICS + EXTRA:
        vals = np.array([getattr(t, key) for t in items], dtype=float)
        finite = vals[np.isfinite(vals)]
        row[key] = float(finite.mean()) if finite.size else math.nan
        row[f"{key}_std"] = float(finite.std(ddof=1)) if finite.size > 1 else 0.0
    row["trials"] = len(items)
    return row


def _sweep_task(args):
    cfg, trial, modes, speed = args
    return simulate(cfg, trial, modes, user_speed=speed)


def run_sweep(cfg: ScenarioConfig, axis: str, values, ris_modes=(True, False),
              mobility=None, trials: int | None = None, workers: int | None = None,
              progress=None) -> list[dict]:
    """Aggregate mean and sample std over trials for every axis value.

    Rows are keyed by (axis value, RIS flag, mobility class). ``mobility``
    selects classes from ``cfg.mobility.classes`` (all by default); sweeping
    ``speed`` replaces the classes by the swept speeds. ``progress(done,
    total)`` is called after every finished trial when given.
    """
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(AXES)}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    section, key, cast = AXES[axis]
    trials = cfg.sim.trials if trials is None else trials
    workers = cfg.sim.workers if workers is None else workers
    classes = dict(cfg.mobility.classes)
    if mobility is not None:
        classes = {name: classes[name] for name in mobility}

    jobs, keys = [], []
    for value in values:
        if axis == "ris":
            modes = (bool(value),)
            vcfg = cfg
        else:
            modes = tuple(ris_modes)
            vcfg = cfg.replace(**{section: {key: cast(value)}})
        validate(vcfg)
        if axis == "speed":
            plan = [("custom", float(value))]
        else:
            plan = list(classes.items())
        for label, speed in plan:
            for t in range(trials):
                jobs.append((vcfg, t, modes, speed))
                keys.append((value, label))

    results = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_sweep_task, jobs, chunksize=4):
                results.append(res)
                if progress:
                    progress(len(results), len(jobs))
    else:
        for job in jobs:
            results.append(_sweep_task(job))
            if progress:
                progress(len(results), len(jobs))

    grouped: dict = {}
    for (value, label), res in zip(keys, results):
        for mode, met in res.items():
            grouped.setdefault((value, mode, label), []).append(met)
    rows = []
    for (value, mode, label), items in grouped.items():
        row = {"axis": value, "ris": bool(mode), "mobility": label}
        row.update(_aggregate(items))
        rows.append(row)
    order = {v: i for i, v in enumerate(values)}
    rows.sort(key=lambda r: (order[r["axis"]], not r["ris"], list(classes).index(r["mobility"])
                             if r["mobility"] in classes else 0))
    return rows


# ---------------------------------------------------------------------------
# export


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".9g")
    return str(v)


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    if not math.isfinite(f):
        return None
    return float(format(f, ".9g"))


def export(rows, fmt: str, path) -> Path:
    """Write a metrics table as CSV (fixed column order) or JSON."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(COLUMNS)
                for r in rows:
                    w.writerow([_fmt(r.get(c, "")) for c in COLUMNS])
        elif fmt == "json":
            table = [{c: _json_value(r[c]) for c in COLUMNS if c in r} for r in rows]
            path.write_text(json.dumps({"columns": list(COLUMNS), "rows": table}, indent=2) + "\n")
        else:
            raise ValueError(f"unknown export format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _parse(v: str):
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def read_table(path) -> list[dict]:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        return [{k: (math.nan if v is None else v) for k, v in r.items()} for r in data["rows"]]
    with path.open(newline="") as fh:
        return [{k: _parse(v) for k, v in r.items()} for r in csv.DictReader(fh)]

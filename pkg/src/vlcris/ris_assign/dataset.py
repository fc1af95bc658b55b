"""Oracle-labelled training sets for the assignment network.

Every instance uses one fixed AP/mirror layout: the layout of trial 0 under
``cfg.sim.seed``. The ``seed`` argument only drives the sampled receiver and
blocker positions, so sets drawn with different seeds come from the same
generator and can serve as held-out data for each other.

Only soft-handover instances (at least two unblocked APs) are kept, since
that is the only case where elements have to be distributed.

CSV layout: ``xi_1..xi_N, x, y, X_1..X_M, oracle, candidates`` where
``oracle`` is ``brute`` or ``ascent`` and ``candidates`` lists the unblocked
AP ids separated by ``;``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .ann import AnnModel, ann_predict
from .oracle import ENUMERATION_LIMIT, brute_force_assign, coordinate_ascent_assign

if TYPE_CHECKING:  # the scenario modules import this package themselves
    from ..config import ScenarioConfig


@dataclass
class TrainingSet:
    xi: np.ndarray  # (S, N) blockage degrees
    position: np.ndarray  # (S, 2) receiver x, y [m]
    labels: np.ndarray  # (S, M) AP ids
    oracle: list  # "brute" or "ascent" per row
    candidates: list  # tuple of unblocked AP ids per row

    def __len__(self) -> int:
        return self.xi.shape[0]

    @property
    def n_aps(self) -> int:
        return self.xi.shape[1]

    @property
    def n_elements(self) -> int:
        return self.labels.shape[1]

    def subset(self, rows) -> "TrainingSet":
        rows = np.asarray(rows, dtype=int)
        return TrainingSet(self.xi[rows], self.position[rows], self.labels[rows],
                           [self.oracle[i] for i in rows], [self.candidates[i] for i in rows])


def reference_scene(cfg: ScenarioConfig):
    """The fixed layout every dataset instance is drawn in."""
    from ..scene import Scene, place_aps, trial_streams

    rng = trial_streams(cfg.sim.seed, 0, cfg.mobility.blockers)[0]
    return Scene.build(cfg, place_aps(cfg, rng))


def label_instance(candidates, problem, n_elements: int):
    """Oracle assignment over ``candidates`` and the name of the oracle used."""
    if len(candidates) ** n_elements <= ENUMERATION_LIMIT:
        return brute_force_assign(candidates, problem), "brute"
    return coordinate_ascent_assign(candidates, problem), "ascent"


def generate_dataset(cfg: ScenarioConfig, count: int, seed: int = 0,
                     max_draws: int | None = None) -> TrainingSet:
    """Sample ``count`` soft-handover instances and label them with the oracle.

    Receiver and blocker axes are uniform over the floor; blockers inside the
    receiver's personal space are pushed to its edge, as during simulation.
    """
    from ..handover import blocked_mask
    from ..scene import push_out

    if count < 1:
        raise ValueError("count must be >= 1")
    scene = reference_scene(cfg)
    room, mob = cfg.room, cfg.mobility
    keep = mob.blocker_radius + mob.personal_space
    m = len(scene.elements)
    if m == 0:
        raise ValueError("the scenario has no mirror elements to assign")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    hi = (room.width, room.depth)
    max_draws = 1000 * count if max_draws is None else max_draws

    xi, pos, labels, oracle, cands = [], [], [], [], []
    draws = 0
    while len(labels) < count:
        if draws >= max_draws:
            raise RuntimeError(f"only {len(labels)} soft instances in {draws} draws; "
                               "the scenario rarely has two unblocked APs")
        draws += 1
        xy = rng.uniform((0.0, 0.0), hi)
        centers = push_out(rng.uniform((0.0, 0.0), hi, size=(mob.blockers, 2)), xy, keep)
        ch = scene.channel(xy, centers)
        blocked = blocked_mask(ch, cfg.handover)
        ok = [int(a) for a, b, h in zip(ch.ap_ids, blocked, ch.los) if not b and h > 0]
        if len(ok) < 2:
            continue
        assignment, name = label_instance(ok, ch.problem(np.where(blocked, 0.0, 1.0)), m)
        xi.append(ch.xi)
        pos.append(xy)
        labels.append(assignment)
        oracle.append(name)
        cands.append(tuple(ok))
    return TrainingSet(np.array(xi), np.array(pos), np.array(labels, dtype=int), oracle, cands)


def agreement(model: AnnModel, data: TrainingSet) -> tuple[float, float]:
    """Top-1 per-element agreement with the oracle and the uniform baseline.

    Predictions are masked to each instance's unblocked set. The baseline
    is the mean over instances of ``1/|candidates|``.
    """
    if len(data) == 0:
        raise ValueError("empty data set")
    hits = 0
    for k in range(len(data)):
        pred = ann_predict(model, data.xi[k], data.position[k], data.candidates[k])
        hits += int((pred == data.labels[k]).sum())
    agree = hits / (len(data) * data.n_elements)
    baseline = float(np.mean([1.0 / len(c) for c in data.candidates]))
    return agree, baseline


def write_dataset(data: TrainingSet, path) -> Path:
    path = Path(path)
    n, m = data.n_aps, data.n_elements
    header = ([f"xi_{i + 1}" for i in range(n)] + ["x", "y"]
              + [f"X_{j + 1}" for j in range(m)] + ["oracle", "candidates"])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(len(data)):
            w.writerow([repr(float(v)) for v in data.xi[k]]
                       + [repr(float(v)) for v in data.position[k]]
                       + [str(int(v)) for v in data.labels[k]]
                       + [data.oracle[k], ";".join(str(c) for c in data.candidates[k])])
    return path


def read_dataset(path) -> TrainingSet:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        rows = list(reader)
    xi_cols = [k for k, h in enumerate(header) if h.startswith("xi_")]
    x_cols = [k for k, h in enumerate(header) if h.startswith("X_")]
    try:
        ix, iy = header.index("x"), header.index("y")
        io, ic = header.index("oracle"), header.index("candidates")
    except ValueError as exc:
        raise ValueError(f"{path}: missing column ({exc})") from None
    if not xi_cols or not x_cols:
        raise ValueError(f"{path}: missing xi_* or X_* columns")
    n, m = len(xi_cols), len(x_cols)
    xi = np.array([[float(r[k]) for k in xi_cols] for r in rows]).reshape(-1, n)
    pos = np.array([[float(r[ix]), float(r[iy])] for r in rows]).reshape(-1, 2)
    labels = np.array([[int(r[k]) for k in x_cols] for r in rows], dtype=int).reshape(-1, m)
    cands = [tuple(int(c) for c in r[ic].split(";")) for r in rows]
    return TrainingSet(xi, pos, labels, [r[io] for r in rows], cands)

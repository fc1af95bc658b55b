"""Exact and greedy element-to-AP assignment for a fixed channel snapshot."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..optics import achievable_rate

ENUMERATION_LIMIT = 10**6
MOVE_TOL = 1e-12  # relative objective gain needed to move an element


class EnumerationLimitError(ValueError):
    """Brute force would enumerate more than ``ENUMERATION_LIMIT`` cases."""


@dataclass(frozen=True)
class AssignmentProblem:
    """Everything needed to score an assignment at one time instant.

    Attributes
    ----------
    los : (N,) effective LoS gains, already multiplied by the blockage gate
    ris : (N, M) gain of element j when steered for AP i (0 if unusable)
    power : (N,) optical power per AP [W]
    responsivity : PD responsivity [A/W]
    noise_power : N0 * B [A^2]
    bandwidth : B [Hz]
    distances : (N, M) AP-to-element distances, used to seed the greedy search
    ap_ids : (N,) public AP ids, 1-based by default
    """

    los: np.ndarray
    ris: np.ndarray
    power: np.ndarray
    responsivity: float
    noise_power: float
    bandwidth: float
    distances: np.ndarray | None = None
    ap_ids: np.ndarray | None = None

    def __post_init__(self):
        los = np.asarray(self.los, dtype=float)
        ris = np.asarray(self.ris, dtype=float).reshape(los.size, -1)
        object.__setattr__(self, "los", los)
        object.__setattr__(self, "ris", ris)
        object.__setattr__(self, "power", np.broadcast_to(
            np.asarray(self.power, dtype=float), los.shape))
        if self.ap_ids is None:
            object.__setattr__(self, "ap_ids", np.arange(1, los.size + 1))
        else:
            object.__setattr__(self, "ap_ids", np.asarray(self.ap_ids, dtype=int))
        if self.distances is not None:
            object.__setattr__(self, "distances",
                               np.asarray(self.distances, dtype=float).reshape(ris.shape))
        object.__setattr__(self, "_index", {int(a): k for k, a in enumerate(self.ap_ids)})

    @property
    def n_aps(self) -> int:
        return self.los.size

    @property
    def n_elements(self) -> int:
        return self.ris.shape[1]

    def index_of(self, ap_id: int) -> int:
        try:
            return self._index[int(ap_id)]
        except KeyError:
            raise KeyError(f"unknown AP id {ap_id}") from None

    def gains(self, assignment, active) -> np.ndarray:
        """Total gain of each AP in ``active`` under ``assignment``."""
        idx = [self.index_of(a) for a in active]
        x = np.asarray(assignment, dtype=int)
        mine = x[None, :] == self.ap_ids[idx][:, None]
        return self.los[idx] + np.where(mine, self.ris[idx], 0.0).sum(axis=1)

    def snrs(self, assignment, active) -> np.ndarray:
        idx = [self.index_of(a) for a in active]
        h = self.gains(assignment, active)
        return (self.responsivity * h * self.power[idx]) ** 2 / self.noise_power

    def rate(self, assignment, active) -> float:
        """Combined rate over ``active`` APs for the given assignment."""
        return float(achievable_rate(self.bandwidth, self.snrs(assignment, active).sum()))


def _candidate_indices(problem: AssignmentProblem, candidates) -> list[int]:
    cands = sorted(int(c) for c in candidates)
    if not cands:
        raise ValueError("empty candidate set")
    return [problem.index_of(c) for c in cands]


def brute_force_assign(candidates, problem: AssignmentProblem) -> np.ndarray:
    """Rate-optimal assignment by exhaustive enumeration over ``candidates``.

    Ties go to the lexicographically smallest id vector.
    """
    idx = _candidate_indices(problem, candidates)
    c, m = len(idx), problem.n_elements
    if c**m > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"{c}^{m} assignments exceed {ENUMERATION_LIMIT}; use coordinate_ascent_assign")
    ids = problem.ap_ids[idx]
    if m == 0:
        return np.zeros(0, dtype=int)
    if c == 1:
        return np.full(m, ids[0], dtype=int)

    scale = problem.responsivity * problem.power[idx]
    los = problem.los[idx]
    ris = problem.ris[idx]  # (c, m)
    best_val, best_code = -np.inf, None
    chunk = max(1, 2**16 // c)
    combos = itertools.product(range(c), repeat=m)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        onehot = block[:, :, None] == np.arange(c)[None, None, :]  # (K, m, c)
        h = los[None, :] + np.einsum("kmc,cm->kc", onehot, ris)
        obj = ((scale[None, :] * h) ** 2).sum(axis=1)
        k = int(np.argmax(obj))
        if obj[k] > best_val:
            best_val, best_code = obj[k], block[k]
    return ids[best_code]


def coordinate_ascent_assign(candidates, problem: AssignmentProblem, max_rounds: int = 50,
                             history: list | None = None, start=None) -> np.ndarray:
    """Greedy one-element-at-a-time improvement of the combined SNR.

    Starts with every element on its nearest candidate AP (``distances``;
    lowest id if no distances are known), or at ``start`` when given, and
    sweeps the elements in order, moving one whenever that raises the
    objective by more than ``MOVE_TOL`` (relative). Stops after a
    sweep with no move or after ``max_rounds`` sweeps. If ``history`` is a
    list, the achieved rate after initialisation and after every sweep is
    appended to it.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    idx = np.array(_candidate_indices(problem, candidates))
    c, m = idx.size, problem.n_elements
    ids = problem.ap_ids[idx]
    if m == 0:
        return np.zeros(0, dtype=int)

    scale = problem.responsivity * problem.power[idx]
    ris = problem.ris[idx]
    if start is not None:
        pos = {int(a): k for k, a in enumerate(ids)}
        try:
            code = np.array([pos[int(a)] for a in start], dtype=int)
        except KeyError as exc:
            raise ValueError(f"start uses AP {exc.args[0]} outside the candidates") from None
        if code.size != m:
            raise ValueError(f"start has {code.size} entries, expected {m}")
    elif problem.distances is not None:
        code = np.argmin(problem.distances[idx], axis=0)
    else:
        code = np.zeros(m, dtype=int)

    def _gains():
        return problem.los[idx] + np.array([ris[k, code == k].sum() for k in range(c)])

    h = _gains()

    def _record():
        if history is not None:
            eta = ((scale * h) ** 2).sum() / problem.noise_power
            history.append(float(achievable_rate(problem.bandwidth, eta)))

    _record()
    if c == 1:
        return ids[code]
    for _ in range(max_rounds):
        moved = False
        for j in range(m):
            base = h.copy()
            base[code[j]] -= ris[code[j], j]
            sq = (scale * base) ** 2
            total = sq.sum()
            trial = total - sq + (scale * (base + ris[:, j])) ** 2
            cur = trial[code[j]]
            best = int(np.argmax(trial))
            # moves below rounding level could undo each other forever
            if trial[best] > cur * (1 + MOVE_TOL):
                code[j] = best
                moved = True
                base[best] += ris[best, j]
                h = base
        h = _gains()  # drop accumulated rounding
        _record()
        if not moved:
            break
    return ids[code]

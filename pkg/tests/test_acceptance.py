"""Acceptance suite: one PASS/FAIL line per criterion, printed in the summary.

Run alone with ``pytest tests/test_acceptance.py -v``. The trend sweep
(criterion 5) takes a few minutes on one core.
"""

import hashlib
import itertools
import json
import math
import time

import numpy as np
import pytest

from vlcris.cli import main
from vlcris.config import ScenarioConfig
from vlcris.handover import blockage_probability, electrical_current
from vlcris.ocdma import despread, estimate_ap_powers, hadamard_codebook, spread
from vlcris.optics import achievable_rate, total_gain
from vlcris.ris_assign import (
    AssignmentProblem,
    brute_force_assign,
    coordinate_ascent_assign,
    init_model,
    loss_and_grads,
)
from vlcris.simkit import simulate

# desk-scale trend sweep
SWEEP_N = tuple(range(2, 11))
SWEEP_TRIALS = 50
SWEEP_DURATION = 20.0  # s of simulated walking per trial
SWEEP_DT = 0.1  # s


def test_c1_formula_fidelity(criterion):
    rng = np.random.default_rng(1)
    checks = {
        "I_elec(0.25; r=0.5, h=2e-6, P=3) = 2.25e-6":
            abs(electrical_current(0.25, 0.5, 2e-6, 3.0) - 2.25e-6) <= 1e-21,
        "I_elec(xi=1) = 0": electrical_current(1.0, 0.5, 2e-6, 3.0) == 0.0,
        "p_b(0.5) = 1": blockage_probability(0.5) == 1,
        "p_b(0.49) = 0": blockage_probability(0.49) == 0,
        "p_b(1) = 1": blockage_probability(1.0) == 1,
        "p_b(0) = 0": blockage_probability(0.0) == 0,
    }
    r_unit = float(achievable_rate(1.0, 2 * math.pi / math.e))
    checks["R(B=1, eta=2pi/e) = 1 within 1e-12"] = abs(r_unit - 1.0) < 1e-12
    worst = 0.0
    for _ in range(10_000):
        ind = int(rng.integers(0, 2))
        los = rng.uniform(0, 1e-5)
        parts = rng.uniform(0, 1e-6, size=int(rng.integers(0, 8)))
        expected = ind * los + math.fsum(parts)
        worst = max(worst, abs(total_gain(ind, los, parts) - expected) / max(expected, 1e-300))
    checks["gain additivity on 1e4 inputs within 1e-12"] = worst < 1e-12
    failed = [k for k, ok in checks.items() if not ok]
    assert criterion("1 formula fidelity", not failed,
                     f"|R-1|={abs(r_unit - 1):.1e}, worst additivity rel err {worst:.1e}"
                     + (f", failed: {failed}" if failed else ""))


def test_c2_ocdma_exactness(criterion):
    ortho = True
    for sf in (2, 4, 8, 16):
        c = hadamard_codebook(sf).codes
        g = c @ c.T
        ortho &= bool(np.all(g[~np.eye(sf, dtype=bool)] == 0))
    cases = exact = 0
    amps_grid = (0.0, 0.25, 0.5, 1.0, 2.0)
    for sf in (4, 8):
        cb = hadamard_codebook(sf)
        rows_all = range(1, sf - 1 + 1)
        max_k = 3 if sf == 4 else 2
        for k in range(1, max_k + 1):
            for rows in itertools.combinations(rows_all, k):
                for amps in itertools.product(amps_grid, repeat=k):
                    for bits in itertools.product(itertools.product((0, 1), repeat=2), repeat=k):
                        rx = sum(a * spread(b, cb.row(r)).chips for a, b, r in zip(amps, bits, rows))
                        est = estimate_ap_powers(rx, cb, rows)
                        cases += 1
                        exact += est.tolist() == list(amps)
                        # despreading with an unused row sees nothing at all
                        unused = [r for r in rows_all if r not in rows]
                        if unused:
                            exact -= int(np.any(despread(rx, cb.row(unused[0])) != 0))
    ok = ortho and exact == cases
    assert criterion("2 OCDMA exactness", ok,
                     f"orthogonal SF 2..16: {ortho}; exact power recovery {exact}/{cases} cases")


def _random_instance(rng):
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 7))
    los = rng.uniform(0, 1e-5, n) * (rng.random(n) < 0.8)
    ris = rng.uniform(0, 2e-6, (n, m)) * (rng.random((n, m)) < 0.8)
    return AssignmentProblem(los, ris, rng.uniform(1, 3, n), 0.5, 1e-15, 20e6,
                             distances=rng.uniform(1, 5, (n, m)))


def test_c3_oracle_equivalence(criterion):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    match = exceed = 0
    for _ in range(1000):
        p = _random_instance(rng)
        cands = list(range(1, p.n_aps + 1))
        rb = p.rate(brute_force_assign(cands, p), cands)
        rg = p.rate(coordinate_ascent_assign(cands, p), cands)
        match += rg >= rb * (1 - 1e-12)
        exceed += rg > rb * (1 + 1e-12)
    dt = time.perf_counter() - t0
    ok = match >= 950 and exceed == 0 and dt < 60
    assert criterion("3 oracle equivalence", ok,
                     f"match {match}/1000 (need >= 950), exceed {exceed}, {dt:.1f} s")


def test_c4_gradient_check(criterion):
    rng = np.random.default_rng(4)
    model = init_model(4, 4, seed=4)
    for b in model.biases:
        b += rng.normal(0, 0.05, b.shape)
    x = rng.uniform(0, 1, (8, 6))
    y = rng.integers(0, 4, (8, 4))
    _, grads = loss_and_grads(model, x, y)
    h = 1e-5
    worst = 0.0
    for p, g in zip(model.params(), grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = loss_and_grads(model, x, y)[0]
            flat[i] = old - h
            down = loss_and_grads(model, x, y)[0]
            flat[i] = old
            num = (up - down) / (2 * h)
            worst = max(worst, abs(num - gflat[i]) / max(abs(num), abs(gflat[i]), 1e-8))
    assert criterion("4 ANN gradient check", worst < 1e-4,
                     f"max relative error {worst:.2e} over {sum(p.size for p in model.params())} params")


# -- 5: trends ---------------------------------------------------------------


@pytest.fixture(scope="module")
def trend_sweep():
    cfg = ScenarioConfig().replace(sim={"duration": SWEEP_DURATION, "dt": SWEEP_DT})
    t0 = time.perf_counter()
    out = {}
    for n in SWEEP_N:
        ncfg = cfg.replace(aps={"count": n})
        for mob, speed in cfg.mobility.classes.items():
            out[(n, mob)] = [simulate(ncfg, t, user_speed=speed, trace=True)
                             for t in range(SWEEP_TRIALS)]
    return out, time.perf_counter() - t0, cfg


def _mean(traces, mode, key):
    vals = np.array([getattr(tr[mode].metrics, key) for tr in traces], dtype=float)
    return float(np.nanmean(vals)) if np.isfinite(vals).any() else math.nan


def _classes(cfg):
    return list(cfg.mobility.classes)


def test_c5a_ris_rate_dominance(trend_sweep, criterion):
    res, _, cfg = trend_sweep
    per_step = all(np.all(tr[True].rates >= tr[False].rates) for v in res.values() for tr in v)
    means = all(_mean(res[(n, c)], True, "rate") >= _mean(res[(n, c)], False, "rate")
                for n in SWEEP_N for c in _classes(cfg))
    assert criterion("5a RIS mean rate >= no-RIS at every N", per_step and means,
                     f"per-step dominance {per_step}, mean dominance {means}")


def test_c5b_relative_improvement(trend_sweep, criterion):
    res, _, cfg = trend_sweep
    parts, ok = [], True
    for c in _classes(cfg):
        gain = {n: _mean(res[(n, c)], True, "rate") / _mean(res[(n, c)], False, "rate") - 1
                for n in (SWEEP_N[0], SWEEP_N[-1])}
        ok &= gain[SWEEP_N[0]] > gain[SWEEP_N[-1]]
        parts.append(f"{c}: {100 * gain[SWEEP_N[0]]:.1f}% at N=2 vs {100 * gain[SWEEP_N[-1]]:.1f}% at N=10")
    assert criterion("5b RIS improvement larger at N=2 than N=10", ok, "; ".join(parts))


def test_c5c_soft_over_hard(trend_sweep, criterion):
    res, _, cfg = trend_sweep
    bad = []
    for n in SWEEP_N:
        for c in _classes(cfg):
            for mode in (True, False):
                rh, rs = _mean(res[(n, c)], mode, "R_h"), _mean(res[(n, c)], mode, "R_s")
                if not (rs >= rh):
                    bad.append((n, c, "ris" if mode else "noris", f"{rs:.3g} < {rh:.3g}"))
    assert criterion("5c soft mean rate >= hard mean rate at every N", not bad,
                     f"violations: {bad}" if bad else "all N, both mobility classes, both modes")


def test_c5d_holes(trend_sweep, criterion):
    res, _, cfg = trend_sweep
    feasible_holes = sum(int(np.sum(tr[True].holes & tr[True].ris_feasible))
                         for v in res.values() for tr in v)
    base = {c: _mean(res[(2, c)], False, "hole_frac") for c in _classes(cfg)}
    ok = feasible_holes == 0 and all(v > 0 for v in base.values())
    assert criterion("5d no holes with RIS when steerable; holes without RIS at N=2", ok,
                     f"RIS holes on steerable steps: {feasible_holes}; no-RIS hole fraction at N=2: "
                     + ", ".join(f"{c} {v:.4f}" for c, v in base.items()))


def test_c5e_latency(trend_sweep, criterion):
    res, _, cfg = trend_sweep
    ok, parts = True, []
    lo, hi = math.inf, -math.inf
    for c in _classes(cfg):
        for mode in (True, False):
            series = [_mean(res[(n, c)], mode, "delta") for n in SWEEP_N]
            dec = all(b < a for a, b in zip(series, series[1:]))
            ok &= dec
            parts.append(f"{c}/{'ris' if mode else 'noris'} {1e6 * series[0]:.2f}->{1e6 * series[-1]:.2f} us"
                         + ("" if dec else " NOT decreasing"))
            for n in SWEEP_N:
                for key in ("delta", "delta_h", "delta_s"):
                    v = _mean(res[(n, c)], mode, key)
                    if math.isfinite(v):
                        lo, hi = min(lo, v), max(hi, v)
    in_band = 0.5e-6 <= lo and hi <= 10e-6
    assert criterion("5e latency decreasing in N and within [0.5, 10] us", ok and in_band,
                     "; ".join(parts) + f"; range {1e6 * lo:.2f}..{1e6 * hi:.2f} us")


def test_c5f_handover_counts(trend_sweep, criterion):
    res, _, cfg = trend_sweep
    bad = []
    for n in SWEEP_N:
        for c in _classes(cfg):
            on = _mean(res[(n, c)], True, "N_h") + _mean(res[(n, c)], True, "N_s")
            off = _mean(res[(n, c)], False, "N_h") + _mean(res[(n, c)], False, "N_s")
            if on > off:
                bad.append(f"N={n} {c}: {on:.2f} > {off:.2f}")
    assert criterion("5f handover executions with RIS <= without at every N", not bad,
                     "; ".join(bad) if bad else "all N, both mobility classes")


def test_c5_runtime(trend_sweep, criterion):
    _, seconds, _ = trend_sweep
    assert criterion("5 runtime < 10 min", seconds < 600,
                     f"{seconds:.0f} s for N=2..10 x {SWEEP_TRIALS} trials x 2 classes x 2 modes")


# -- 6, 7: end-to-end --------------------------------------------------------


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_c6_determinism(tmp_path, criterion):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sim": {"duration": 2.0, "dt": 0.1, "trials": 2},
                               "ann": {"epochs": 3}}))
    c = ["--config", str(cfg), "--seed", "11", "--quiet"]
    cmds = {
        "run": lambda d: ["run", *c, "--out", str(d / "run.json")],
        "sweep": lambda d: ["sweep", *c, "--axis", "N", "--values", "2,3", "--out", str(d / "s.csv")],
        "gen-dataset": lambda d: ["gen-dataset", *c, "--count", "50", "--out", str(d / "d.csv")],
        "train-ann": lambda d: ["train-ann", *c, "--dataset", str(d / "d.csv"), "--out", str(d / "m.txt")],
        "eval-ann": lambda d: ["eval-ann", *c, "--model", str(d / "m.txt"), "--count", "20",
                               "--out", str(d / "r.json")],
        "plot-data": lambda d: ["plot-data", *c, "--values", "2,3", "--out", str(d / "figs")],
    }
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        for name, argv in cmds.items():
            assert main(argv(d)) == 0, name
        runs.append({p.relative_to(d).as_posix(): _sha(p) for p in sorted(d.rglob("*")) if p.is_file()})
    same = runs[0] == runs[1]
    assert criterion("6 determinism", same,
                     f"{len(runs[0])} output files byte-identical across repeats: {same}")


def test_c7_ann_pipeline(tmp_path, criterion):
    t0 = time.perf_counter()
    data, model, report = tmp_path / "train.csv", tmp_path / "model.txt", tmp_path / "report.json"
    assert main(["gen-dataset", "--count", "10000", "--seed", "1", "--out", str(data), "--quiet"]) == 0
    assert main(["train-ann", "--dataset", str(data), "--out", str(model), "--quiet"]) == 0
    # held-out instances: same generator, different seed
    assert main(["eval-ann", "--model", str(model), "--seed", "1", "--count", "2000",
                 "--out", str(report), "--quiet"]) == 0
    seconds = time.perf_counter() - t0
    rep = json.loads(report.read_text())
    ok = rep["agreement"] > 2 * rep["uniform_baseline"] and seconds < 600
    assert criterion("7 ANN pipeline", ok,
                     f"held-out agreement {rep['agreement']:.4f} vs 2x baseline {rep['bound']:.4f} "
                     f"on {rep['instances']} instances, {seconds:.0f} s")

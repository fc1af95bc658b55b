"""Command-line front end.

Subcommands: run, sweep, gen-dataset, train-ann, eval-ann, plot-data. Every
subcommand accepts ``--config``; relative config paths that do not exist in
the working directory are looked up in ``$VLCRIS_CONFIG_DIR``. Without
``--config``, ``$VLCRIS_CONFIG_DIR/default.json`` is used when present.

Exit status: 0 when every requested file was written, 1 on configuration or
runtime errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .ris_assign import (
    agreement,
    ann_train,
    generate_dataset,
    init_model,
    load_model,
    read_dataset,
    save_model,
    write_dataset,
)
from .simkit import AXES, export, run_sweep, simulate

CONFIG_ENV = "VLCRIS_CONFIG_DIR"
SERIES_KINDS = (("hard", "R_h", "delta_h", "N_h"), ("soft", "R_s", "delta_s", "N_s"))


def resolve_config(arg: str | None) -> Path | None:
    base = os.environ.get(CONFIG_ENV)
    if arg is None:
        if base and (Path(base) / "default.json").is_file():
            return Path(base) / "default.json"
        return None
    path = Path(arg)
    if not path.is_absolute() and not path.exists() and base:
        candidate = Path(base) / path
        if candidate.exists():
            return candidate
    if not path.exists():
        raise ConfigError([f"config file not found: {arg}"])
    return path


def _config(args) -> ScenarioConfig:
    path = resolve_config(args.config)
    cfg = ScenarioConfig() if path is None else load_config(path)
    if args.seed is not None:
        cfg = cfg.replace(sim={"seed": args.seed})
    if getattr(args, "trials", None) is not None:
        cfg = cfg.replace(sim={"trials": args.trials})
    return cfg


def _log(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _progress(args, label: str):
    if args.quiet:
        return None
    step = {"last": -1}

    def report(done, total):
        pct = 100 * done // total
        if pct // 10 != step["last"] // 10 or done == total:
            step["last"] = pct
            print(f"{label}: {done}/{total} trials", file=sys.stderr)
    return report


def _parse_values(axis: str, text: str) -> list:
    items = [v.strip() for v in text.split(",") if v.strip()]
    if not items:
        raise ValueError("--values is empty")
    cast = AXES[axis][2]
    if axis == "ris":
        table = {"true": True, "1": True, "false": False, "0": False}
        try:
            return [table[v.lower()] for v in items]
        except KeyError as exc:
            raise ValueError(f"ris values must be true/false, got {exc.args[0]!r}") from None
    try:
        return [cast(v) for v in items]
    except ValueError:
        raise ValueError(f"cannot parse --values {text!r} for axis {axis}") from None


def _ris_modes(args) -> tuple:
    return (True, False) if args.ris is None else (args.ris,)


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> None:
    cfg = _config(args)
    mode = cfg.handover.ris_enabled if args.ris is None else args.ris
    metrics = simulate(cfg, args.trial, (mode,))[mode]
    payload = {"seed": cfg.sim.seed, "trial": args.trial, "ris": mode,
               "n_aps": cfg.aps.count, "metrics": {}}
    for key, value in metrics.to_dict().items():
        payload["metrics"][key] = value if isinstance(value, int) else _num(value)
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    _log(args, f"wrote {args.out}")


def _num(v: float):
    v = float(v)
    return None if v != v else float(format(v, ".9g"))


def cmd_sweep(args) -> None:
    cfg = _config(args)
    values = _parse_values(args.axis, args.values)
    rows = run_sweep(cfg, args.axis, values, _ris_modes(args),
                     progress=_progress(args, "sweep"))
    fmt = "json" if str(args.out).endswith(".json") else "csv"
    export(rows, fmt, args.out)
    _log(args, f"wrote {args.out} ({len(rows)} rows)")


def cmd_gen_dataset(args) -> None:
    cfg = _config(args)
    count = cfg.ann.dataset_size if args.count is None else args.count
    seed = cfg.sim.seed if args.seed is None else args.seed
    data = generate_dataset(cfg, count, seed)
    write_dataset(data, args.out)
    _log(args, f"wrote {args.out} ({len(data)} instances)")


def cmd_train_ann(args) -> None:
    cfg = _config(args)
    data = read_dataset(args.dataset)
    a = cfg.ann
    epochs = a.epochs if args.epochs is None else args.epochs
    seed = a.seed if args.seed is None else args.seed
    model = init_model(data.n_aps, data.n_elements, a.hidden, seed,
                       scale=(cfg.room.width, cfg.room.depth))
    model, history = ann_train(model, data, a.batch_size, a.learning_rate, epochs, seed)
    save_model(model, args.out)
    hist = Path(args.history) if args.history else Path(str(args.out) + ".loss.csv")
    with hist.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss"])
        for k, loss in enumerate(history):
            w.writerow([k, repr(float(loss))])
    _log(args, f"wrote {args.out} and {hist} (loss {history[0]:.4g} -> {history[-1]:.4g})")


def cmd_eval_ann(args) -> None:
    cfg = _config(args)
    model = load_model(args.model)
    if args.dataset:
        data = read_dataset(args.dataset)
    else:
        count = max(1, cfg.ann.dataset_size // 5) if args.count is None else args.count
        seed = (cfg.sim.seed if args.seed is None else args.seed) + 1
        data = generate_dataset(cfg, count, seed)
    if (data.n_aps, data.n_elements) != (model.n_aps, model.n_elements):
        raise ValueError(f"model expects N={model.n_aps}, M={model.n_elements}; "
                         f"data has N={data.n_aps}, M={data.n_elements}")
    agree, baseline = agreement(model, data)
    report = {"instances": len(data), "agreement": _num(agree), "uniform_baseline": _num(baseline),
              "bound": _num(2 * baseline), "passed": bool(agree > 2 * baseline)}
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    _log(args, f"agreement {agree:.4f} vs bound {2 * baseline:.4f}; wrote {args.out}")


def figure_tables(rows) -> dict:
    """Reshape sweep rows into one table per figure, one column per series."""
    ns = sorted({r["axis"] for r in rows})
    series = []
    for kind, *_ in SERIES_KINDS:
        for ris in (True, False):
            for mob in dict.fromkeys(r["mobility"] for r in rows):
                series.append((kind, ris, mob))
    index = {(r["axis"], r["ris"], r["mobility"]): r for r in rows}
    tables = {}
    for name, pos in (("fig2_rate", 1), ("fig3_latency", 2), ("handovers", 3)):
        header = ["N"] + [f"{k}_{'ris' if ris else 'noris'}_{mob}" for k, ris, mob in series]
        body = []
        for n in ns:
            line = [n]
            for kind, ris, mob in series:
                key = dict((s[0], s[pos]) for s in SERIES_KINDS)[kind]
                row = index.get((n, ris, mob))
                line.append(row[key] if row else float("nan"))
            body.append(line)
        tables[name] = (header, body)
    return tables


def cmd_plot_data(args) -> None:
    cfg = _config(args)
    values = _parse_values("N", args.values)
    rows = run_sweep(cfg, "N", values, _ris_modes(args), progress=_progress(args, "plot-data"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, body) in figure_tables(rows).items():
        path = out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for line in body:
                w.writerow([line[0]] + [format(float(v), ".9g") for v in line[1:]])
        _log(args, f"wrote {path}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON scenario file (relative paths also "
                                         f"searched in ${CONFIG_ENV})")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--quiet", action="store_true", help="no progress output on stderr")

    parser = argparse.ArgumentParser(
        prog="vlcris",
        description="RIS-assisted VLC handover simulator.",
        epilog=f"Environment: ${CONFIG_ENV} is the default config directory "
               "(default.json there is used when --config is omitted).")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", parents=[common], help="one trial, metrics as JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--trial", type=int, default=0, help="trial index (default 0)")
    p.add_argument("--ris", action=argparse.BooleanOptionalAction, default=None,
                   help="enable/disable the mirror array (default from config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep, metrics table")
    p.add_argument("--axis", required=True, choices=sorted(AXES))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--trials", type=int, help="trials per point (default from config)")
    p.add_argument("--ris", action=argparse.BooleanOptionalAction, default=None,
                   help="only with / without mirrors (default both)")
    p.add_argument("--out", required=True, help=".csv or .json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-dataset", parents=[common], help="oracle-labelled training set")
    p.add_argument("--count", type=int, help="instances (default ann.dataset_size)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("train-ann", parents=[common], help="train the assignment network")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--history", help="loss history CSV (default <out>.loss.csv)")
    p.set_defaults(func=cmd_train_ann)

    p = sub.add_parser("eval-ann", parents=[common], help="agreement with the oracle")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", help="held-out CSV; generated with seed+1 when omitted")
    p.add_argument("--count", type=int, help="held-out size when generating")
    p.add_argument("--out", required=True, help="JSON report")
    p.set_defaults(func=cmd_eval_ann)

    p = sub.add_parser("plot-data", parents=[common], help="per-figure CSV series over N")
    p.add_argument("--values", default="2,3,4,5,6,7,8,9,10", help="AP counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--ris", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"vlcris: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"vlcris {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

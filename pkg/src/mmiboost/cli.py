"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .boosting import Ensemble, adaboost, arcgv, error_rate, write_round_log
from .dataset import (GENERATOR_KINDS, Dataset, GeneratorSpec, apply_norm, generate, load,
                      normalize_unit_interval, write_csv, write_meta)
from .errors import DataError, NumericalError
from .experiment import (DatasetSource, ExperimentConfig, load_config,
                         mix_seed, prepare_dataset, run_experiment, sweep_rounds)
from .margins import DEFAULT_DELTA, bound_report, margin_stats, margins
from .mmi import build_mmi_lp, mmi_reweight, reweighted_ensemble, signed_predictions
from .modelfile import load_model, save_model
from .report import emit_cmd, emit_table, write_records, write_sweep, write_timings
from .weak_learner import ThresholdGrid, log_hypothesis_count

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load_data(path: str, label_column: int) -> Dataset:
    return load(path, label_column=label_column)


def _normalized_for(e: Ensemble, ds: Dataset) -> Dataset:
    """Map raw data through the model's stored normalization."""
    if e.normalization is not None:
        return apply_norm(ds, e.normalization)
    if ds.features.size and (ds.features.min() < 0 or ds.features.max() > 1):
        raise DataError("model has no stored normalization and the data is not in [0, 1]")
    return replace(ds, raw=False)


def _ln_H(e: Ensemble, p: int) -> Optional[float]:
    return log_hypothesis_count(p, e.grid.m, e.depth) if e.depth in (1, 2) else None


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    ds = generate(GeneratorSpec(args.kind, args.n, args.dim, args.seed))
    write_csv(ds, args.out)
    write_meta(ds, args.out)
    print(f"wrote {ds.n} rows x {ds.p} features to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    raw = _load_data(args.data, args.label_column)
    train, _, norm = normalize_unit_interval(raw)
    grid = ThresholdGrid(args.thresholds)
    run = arcgv if args.algorithm == "arcgv" else adaboost
    e, logs = run(train, args.T, args.depth, grid)
    e = replace(e, normalization=norm)
    save_model(e, args.model)
    log_path = args.log or str(args.model) + ".rounds.csv"
    write_round_log(logs, log_path)
    print(f"algorithm={e.algorithm}")
    print(f"T_requested={args.T}")
    print(f"T_completed={e.T}")
    print(f"train_error={error_rate(e, train)!r}")
    if not logs[-1].completed:
        print(f"stopped_early_at_round={logs[-1].t}")
    return EXIT_OK


def cmd_mmi(args) -> int:
    e = load_model(args.model)
    train = _normalized_for(e, _load_data(args.data, args.label_column))
    if args.dump_lp:
        H = e.prediction_matrix(train.features)
        lp = build_mmi_lp(signed_predictions(H, train.labels),
                          margins(e, train).margins)
        Path(args.dump_lp).write_text(lp.dump(), encoding="utf-8")
    res = mmi_reweight(e, train)
    save_model(reweighted_ensemble(e, res), args.out)
    block = res.as_block()
    if args.report:
        Path(args.report).write_text(block, encoding="utf-8")
    sys.stdout.write(block)
    return EXIT_OK


def cmd_analyze(args) -> int:
    e = load_model(args.model)
    data = _normalized_for(e, _load_data(args.data, args.label_column))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prof = margins(e, data)
    np.savetxt(out / "margins.csv", prof.margins, fmt="%.17g", header="margin", comments="")
    lines = [f"n={data.n}", f"T={e.T}", f"algorithm={e.algorithm}",
             f"train_error={error_rate(e, data)!r}"]
    if args.test:
        test = _normalized_for(e, _load_data(args.test, args.label_column))
        lines.append(f"test_error={error_rate(e, test)!r}")
    st = margin_stats(prof)
    lines += [f"margin_{k}={getattr(st, k)!r}" for k in ("min", "q1", "median", "mean", "q3", "max")]
    ln_H = _ln_H(e, data.p)
    em = None
    if ln_H is not None:
        rep = bound_report(prof, ln_H, error_rate(e, data), e.T, args.delta)
        em = rep.emargin
        lines.append(f"ln_H={ln_H!r}")
        lines.append(f"freund_schapire_bound={rep.freund_schapire!r}")
        with open(out / "schapire.csv", "w", encoding="utf-8") as fh:
            fh.write("theta,empirical,capacity,total\n")
            for row in rep.schapire_curve:
                fh.write(",".join(repr(v) for v in row) + "\n")
        if em is not None:
            lines += em.as_block().rstrip("\n").split("\n")
            with open(out / "emargin.csv", "w", encoding="utf-8") as fh:
                fh.write("q,theta_hat,u,kl_inverse\n")
                for row in em.per_q_table:
                    fh.write(",".join(repr(v) for v in row) + "\n")
        else:
            lines.append("emargin=")
    else:
        lines.append("bounds=unavailable for depth > 2")
    emit_cmd({e.algorithm: (prof, em)}, out)
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def _experiment_overrides(args) -> dict:
    ov = {
        "depths": args.depths, "T_values": args.T, "thresholds": args.thresholds,
        "train_fraction": args.train_fraction, "delta": args.delta,
        "master_seed": args.seed, "output_dir": args.output,
        "include_arcgv": args.arcgv, "save_models": args.save_models,
    }
    if args.dataset:
        ov["datasets"] = tuple(DatasetSource.parse(d) for d in args.dataset)
    return ov


def cmd_experiment(args) -> int:
    ov = _experiment_overrides(args)
    if args.config:
        cfg = load_config(args.config, ov)
    else:
        if "datasets" not in ov:
            raise UsageError("experiment: give a config file or at least one --dataset")
        cfg = ExperimentConfig(**{k: v for k, v in ov.items() if v is not None})
    if not cfg.output_dir:
        raise UsageError("experiment: no output directory (set output= or --output)")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg)
    md = emit_table(records, "markdown")
    (out / "table.md").write_text(md, encoding="utf-8")
    (out / "table.csv").write_text(emit_table(records, "csv"), encoding="utf-8")
    write_records(records, out / "records.csv")
    write_timings(records, out / "timings.csv")
    sys.stdout.write(md)
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"failed: {r.dataset} depth={r.depth} T={r.T} {r.algorithm}: {r.error}",
              file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    source = DatasetSource.parse(args.dataset)
    data = prepare_dataset(source, mix_seed(args.seed, 0), args.train_fraction)
    points = sweep_rounds(data.train, data.test, args.depth, args.T_max, args.stride,
                          ThresholdGrid(args.thresholds))
    write_sweep(points, args.out)
    print(f"wrote {len(points)} points to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmiboost", description="AdaBoost vs. margin-improving reweighting.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", help="write a synthetic dataset as CSV")
    g.add_argument("--kind", choices=GENERATOR_KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dim", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="boost on a dataset and save the ensemble")
    t.add_argument("data")
    t.add_argument("--model", required=True, help="output model file (JSON)")
    t.add_argument("--T", type=int, default=250)
    t.add_argument("--depth", type=int, default=1)
    t.add_argument("--thresholds", type=int, default=100)
    t.add_argument("--algorithm", choices=("ada", "arcgv"), default="ada")
    t.add_argument("--log", help="per-round CSV (default: <model>.rounds.csv)")
    t.add_argument("--label-column", type=int, default=-1)
    t.set_defaults(func=cmd_train)

    m = sub.add_parser("mmi", help="reweight a saved ensemble on its training data")
    m.add_argument("model")
    m.add_argument("data")
    m.add_argument("--out", required=True, help="output model file (JSON)")
    m.add_argument("--report", help="also write the result block to this file")
    m.add_argument("--dump-lp", help="write the linear program in plain-text form")
    m.add_argument("--label-column", type=int, default=-1)
    m.set_defaults(func=cmd_mmi)

    a = sub.add_parser("analyze", help="margins, margin distribution and bounds")
    a.add_argument("model")
    a.add_argument("data", help="data the margins are computed on (usually the training set)")
    a.add_argument("--test", help="optional test data for the test error")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    a.add_argument("--label-column", type=int, default=-1)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("experiment", help="run a configured experiment and emit tables")
    e.add_argument("config", nargs="?")
    e.add_argument("--dataset", action="append",
                   help="dataset entry; repeatable, replaces the config's list")
    e.add_argument("--depths", type=_int_list)
    e.add_argument("--T", type=_int_list)
    e.add_argument("--thresholds", type=int)
    e.add_argument("--train-fraction", type=float)
    e.add_argument("--delta", type=float)
    e.add_argument("--seed", type=int)
    e.add_argument("--output")
    e.add_argument("--arcgv", action=argparse.BooleanOptionalAction, default=None)
    e.add_argument("--save-models", action=argparse.BooleanOptionalAction, default=None)
    e.set_defaults(func=cmd_experiment)

    s = sub.add_parser("sweep", help="ADA vs. MMI at every multiple of a stride")
    s.add_argument("dataset", help="dataset entry, e.g. 'twonorm n=300 test=3000'")
    s.add_argument("--depth", type=int, default=1)
    s.add_argument("--T-max", type=int, required=True)
    s.add_argument("--stride", type=int, default=10)
    s.add_argument("--thresholds", type=int, default=100)
    s.add_argument("--train-fraction", type=float, default=0.7)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

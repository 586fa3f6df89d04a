"""Plain-text outputs: result tables, record dumps and margin-curve data."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataError
from .experiment import RECORD_COLUMNS, RunRecord, SweepPoint
from .margins import EMarginResult, MarginProfile, cmd

TABLE_COLUMNS = ("Dataset", "Algorithm", "Test Error", "Min. MI", "Avg. MI", "EMargin",
                 "EMargin Error")
DISPLAY_NAMES = {"ADA": "AB", "ARCGV": "ARC-GV", "MMI": "MMI"}
DASH = "-"


def fmt4(x: Optional[float]) -> str:
    """Four decimals; missing values become ``-`` and ``-0.0000`` becomes ``0.0000``."""
    if x is None or not np.isfinite(x):
        return DASH
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


@dataclass(frozen=True)
class BlockSummary:
    ada_wins: int
    mmi_wins: int
    ties: int


def summarize(rows: Sequence[RunRecord]) -> BlockSummary:
    """Wins and ties by test error, compared at the printed precision.

    Datasets where either side failed are not counted.
    """
    by_ds: Dict[int, Dict[str, RunRecord]] = {}
    for r in rows:
        by_ds.setdefault(r.dataset_index, {})[r.algorithm] = r
    ada = mmi = ties = 0
    for pair in by_ds.values():
        a, m = pair.get("ADA"), pair.get("MMI")
        if a is None or m is None or not (a.ok and m.ok):
            continue
        ea, em = float(fmt4(a.test_error)), float(fmt4(m.test_error))
        if ea < em:
            ada += 1
        elif em < ea:
            mmi += 1
        else:
            ties += 1
    return BlockSummary(ada, mmi, ties)


def blocks(records: Iterable[RunRecord]) -> List[Tuple[Tuple[int, int], List[RunRecord]]]:
    """Records grouped by (depth, T) in ascending order, rows in record order."""
    grouped: Dict[Tuple[int, int], List[RunRecord]] = {}
    for r in sorted(records, key=RunRecord.sort_key):
        grouped.setdefault((r.depth, r.T), []).append(r)
    return sorted(grouped.items())


def _row_cells(r: RunRecord, first: bool) -> List[str]:
    name = r.dataset if first else ""
    alg = DISPLAY_NAMES.get(r.algorithm, r.algorithm)
    if not r.ok:
        return [name, alg, "failed", DASH, DASH, DASH, DASH]
    mi = r.algorithm == "MMI"
    return [name, alg, fmt4(r.test_error),
            fmt4(r.min_mi) if mi else DASH, fmt4(r.avg_mi) if mi else DASH,
            fmt4(r.emargin), fmt4(r.emargin_error)]


def _block_rows(rows: Sequence[RunRecord]) -> List[List[str]]:
    out, last = [], None
    for r in rows:
        out.append(_row_cells(r, r.dataset_index != last))
        last = r.dataset_index
    s = summarize(rows)
    blank = [""] * 4
    out.append(["Summary", "AB", f"{s.ada_wins} wins"] + blank)
    out.append(["", "MMI", f"{s.mmi_wins} wins"] + blank)
    out.append(["", "", f"{s.ties} ties"] + blank)
    return out


def block_title(depth: int, T: int) -> str:
    return f"{T} Trees (k={2 ** depth}, depth = {depth})"


def emit_table(records: Sequence[RunRecord], fmt: str = "markdown") -> str:
    """One block per (depth, T) with its wins/ties summary."""
    records = list(records)
    if not records:
        raise DataError("no records to tabulate")
    if fmt not in ("markdown", "csv"):
        raise DataError(f"unknown table format {fmt!r}")
    parts = []
    for (depth, T), rows in blocks(records):
        body = _block_rows(rows)
        if fmt == "markdown":
            lines = [f"### {block_title(depth, T)}", "",
                     "| " + " | ".join(TABLE_COLUMNS) + " |",
                     "|" + "|".join(["---"] * len(TABLE_COLUMNS)) + "|"]
            lines += ["| " + " | ".join(row) + " |" for row in body]
            parts.append("\n".join(lines) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            buf.write(f"# {block_title(depth, T)}\n")
            w.writerow(TABLE_COLUMNS)
            w.writerows(body)
            parts.append(buf.getvalue())
    return "\n".join(parts)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_records(records: Sequence[RunRecord], path) -> None:
    """Every record field except wall time, full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS + ["k"])
        for r in records:
            w.writerow([_cell(getattr(r, c)) for c in RECORD_COLUMNS] + [r.k])


def write_timings(records: Sequence[RunRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "depth", "T", "algorithm", "wall_time"])
        for r in records:
            w.writerow([r.dataset, r.depth, r.T, r.algorithm, f"{r.wall_time:.6f}"])


def write_sweep(points: Sequence[SweepPoint], path) -> None:
    cols = ["T", "ada_test_error", "mmi_test_error", "min_mi", "avg_mi", "xi_star",
            "support_count", "support_fraction"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for p in points:
            w.writerow([_cell(getattr(p, c)) for c in cols])


def emit_cmd(profiles: Dict[str, Tuple[MarginProfile, Optional[EMarginResult]]],
             out_dir, stem: str = "cmd") -> Dict[str, Path]:
    """Cumulative margin distributions in long format, for plotting.

    Writes ``<stem>.csv`` (series, theta, fraction), ``<stem>.meta`` with the
    EMargin and EMargin error of each series, and, when exactly two series
    of equal length are given, ``<stem>_scatter.csv`` pairing their margins
    observation by observation.
    """
    if not profiles:
        raise DataError("no margin profiles to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"cmd": out_dir / f"{stem}.csv", "meta": out_dir / f"{stem}.meta"}
    with open(paths["cmd"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "theta", "fraction"])
        for name, (prof, _) in profiles.items():
            for theta, frac in cmd(prof):
                w.writerow([name, repr(theta), repr(frac)])
    with open(paths["meta"], "w", encoding="utf-8") as fh:
        for name, (_, em) in profiles.items():
            if em is None:
                fh.write(f"{name}.emargin=\n{name}.emargin_error=\n")
            else:
                fh.write(f"{name}.emargin={em.theta_star!r}\n"
                         f"{name}.emargin_error={em.q_star!r}\n")
    items = list(profiles.items())
    if len(items) == 2 and items[0][1][0].n == items[1][1][0].n:
        (a, (pa, _)), (b, (pb, _)) = items
        paths["scatter"] = out_dir / f"{stem}_scatter.csv"
        with open(paths["scatter"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", f"m_{a}", f"m_{b}"])
            for i, (x, y) in enumerate(zip(pa.margins, pb.margins)):
                w.writerow([i, repr(float(x)), repr(float(y))])
    return paths

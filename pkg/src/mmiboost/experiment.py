"""Experiment orchestration: AdaBoost vs. MMI over datasets, depths and T.

Seeds
-----
Every seed is derived from the master seed with :func:`mix_seed`, a
splitmix64 chain over 64-bit integers::

    h = splitmix64(master)
    for part in parts: h = splitmix64(h xor part)

The split (or generator) seed of dataset ``i`` is ``mix_seed(master, i)``;
it does not depend on depth or T, so all ensemble sizes of one dataset
share a training set.  Each record also carries its run seed
``mix_seed(master, i, depth, T)``.
"""

from __future__ import annotations

import os
import shlex
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .boosting import Ensemble, adaboost, arcgv, error_rate
from .dataset import (GENERATOR_KINDS, Dataset, GeneratorSpec, NormParams, generate, load,
                      normalize_unit_interval, split_train_test)
from .errors import DataError, MMIBoostError, NumericalError
from .margins import emargin_bound, margins
from .mmi import mmi_reweight, reweighted_ensemble
from .modelfile import save_model
from .weak_learner import ThresholdGrid, log_hypothesis_count

_MASK = (1 << 64) - 1
ALGORITHM_ORDER = {"ADA": 0, "ARCGV": 1, "MMI": 2}
WORKERS_ENV = "MMIBOOST_WORKERS"


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix_seed(master: int, *parts: int) -> int:
    h = _splitmix64(master & _MASK)
    for p in parts:
        h = _splitmix64(h ^ (p & _MASK))
    return h


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class DatasetSource:
    """A file (optionally with its own test file) or a synthetic generator.

    Text form, as used on ``dataset=`` lines::

        path/to/data.csv [test=path/to/test.csv] [name=Foo] [label_column=0]
        twonorm [n=300] [test=3000] [dim=20] [seed=7] [name=TwoNorm]

    A generator without ``test=`` is split like a file.
    """

    name: str
    path: Optional[str] = None
    generator: Optional[GeneratorSpec] = None
    test_path: Optional[str] = None
    test_n: Optional[int] = None
    label_column: int = -1
    seed: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "DatasetSource":
        tokens = shlex.split(text)
        if not tokens:
            raise DataError("empty dataset entry")
        head, opts = tokens[0], {}
        for tok in tokens[1:]:
            key, sep, value = tok.partition("=")
            if not sep or not value:
                raise DataError(f"dataset option {tok!r} is not key=value")
            opts[key.strip()] = value.strip()
        try:
            if head in GENERATOR_KINDS:
                bad = set(opts) - {"n", "test", "dim", "seed", "name"}
                if bad:
                    raise DataError(f"unknown generator option(s): {', '.join(sorted(bad))}")
                spec = GeneratorSpec(head, int(opts.get("n", 300)), int(opts.get("dim", 20)))
                return cls(opts.get("name", head), generator=spec,
                           test_n=int(opts["test"]) if "test" in opts else None,
                           seed=int(opts["seed"]) if "seed" in opts else None)
            bad = set(opts) - {"test", "name", "label_column"}
            if bad:
                raise DataError(f"unknown dataset option(s): {', '.join(sorted(bad))}")
            return cls(opts.get("name", Path(head).stem), path=head, test_path=opts.get("test"),
                       label_column=int(opts.get("label_column", -1)))
        except ValueError as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"bad dataset entry {text!r}: {exc}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: Tuple[DatasetSource, ...]
    depths: Tuple[int, ...] = (1, 2)
    T_values: Tuple[int, ...] = (250, 500, 750, 1000)
    thresholds: int = 100
    train_fraction: float = 0.7
    delta: float = 0.05
    master_seed: int = 0
    output_dir: Optional[str] = None
    include_arcgv: bool = False
    save_models: bool = False

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "depths", tuple(sorted(set(self.depths))))
        object.__setattr__(self, "T_values", tuple(sorted(set(self.T_values))))
        if not self.datasets:
            raise DataError("the experiment needs at least one dataset")
        if not self.T_values or min(self.T_values) < 1:
            raise DataError("T values must be positive and nonempty")
        if not self.depths or not set(self.depths) <= {1, 2}:
            raise DataError("depths must be a nonempty subset of {1, 2}")
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must lie strictly between 0 and 1")
        if not 0.0 < self.delta < 1.0:
            raise DataError("delta must lie in (0, 1)")
        if self.thresholds < 1:
            raise DataError("thresholds must be positive")
        if self.save_models and not self.output_dir:
            raise DataError("save_models needs an output directory")


def _int_list(value: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in value.replace(",", " ").split())


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


# config key -> (ExperimentConfig field, parser)
CONFIG_KEYS = {
    "depths": ("depths", _int_list),
    "T": ("T_values", _int_list),
    "thresholds": ("thresholds", int),
    "train_fraction": ("train_fraction", float),
    "delta": ("delta", float),
    "seed": ("master_seed", int),
    "output": ("output_dir", str),
    "arcgv": ("include_arcgv", _bool),
    "save_models": ("save_models", _bool),
}


def parse_config(text: str) -> Dict[str, object]:
    """Flat ``key=value`` lines; ``#`` starts a comment; ``dataset=`` repeats.

    Returns keyword arguments for :class:`ExperimentConfig`.
    """
    out: Dict[str, object] = {}
    datasets: List[DatasetSource] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise DataError(f"expected key=value, got {raw.strip()!r}", line=lineno)
        if key == "dataset":
            try:
                datasets.append(DatasetSource.parse(value))
            except DataError as exc:
                raise DataError(str(exc), line=lineno) from None
            continue
        if key not in CONFIG_KEYS:
            raise DataError(f"unknown key {key!r}", line=lineno)
        name, conv = CONFIG_KEYS[key]
        try:
            out[name] = conv(value)
        except ValueError as exc:
            raise DataError(f"bad value for {key}: {exc}", line=lineno) from None
    if datasets:
        out["datasets"] = tuple(datasets)
    return out


def load_config(path, overrides: Optional[Dict[str, object]] = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        kwargs = parse_config(fh.read())
    kwargs.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "datasets" not in kwargs:
        raise DataError("the configuration lists no dataset")
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# data preparation


@dataclass(frozen=True, eq=False)
class PreparedData:
    name: str
    train: Dataset
    test: Dataset
    norm: NormParams
    seed: int


def prepare_dataset(source: DatasetSource, seed: int,
                    train_fraction: float = 0.7) -> PreparedData:
    """Load or generate, split when there is no test set, and normalize."""
    if source.generator is not None:
        spec = source.generator
        base = seed if source.seed is None else source.seed
        full = generate(replace(spec, seed=mix_seed(base, 0)), name=source.name)
        if source.test_n is not None:
            train = full
            test = generate(replace(spec, n=source.test_n, seed=mix_seed(base, 1)),
                            name=source.name)
        else:
            train, test = split_train_test(full, train_fraction, seed)
    else:
        full = load(source.path, label_column=source.label_column, name=source.name)
        if source.test_path:
            train = full
            extra = {} if str(source.test_path).lower().endswith(".csv") else {"n_features": full.p}
            test = load(source.test_path, label_column=source.label_column, name=source.name,
                        label_map=full.label_mapping, **extra)
        else:
            train, test = split_train_test(full, train_fraction, seed)
    if not train.has_both_classes():
        raise DataError(f"training data of {source.name} has a single class")
    if test.n == 0:
        raise DataError(f"{source.name} has an empty test set")
    tr, te, norm = normalize_unit_interval(train, test)
    return PreparedData(source.name, tr, te, norm, seed)


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    dataset_index: int
    depth: int
    T: int
    algorithm: str
    seed: int
    T_used: Optional[int] = None
    test_error: Optional[float] = None
    train_error: Optional[float] = None
    min_mi: Optional[float] = None
    avg_mi: Optional[float] = None
    emargin: Optional[float] = None
    emargin_error: Optional[float] = None
    bound_value: Optional[float] = None
    xi_star: Optional[float] = None
    support_count: Optional[int] = None
    support_fraction: Optional[float] = None
    model_path: Optional[str] = None
    error: Optional[str] = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def k(self) -> int:
        return 2 ** self.depth

    @property
    def ok(self) -> bool:
        return self.error is None

    def sort_key(self):
        return (self.dataset_index, self.depth, self.T, ALGORITHM_ORDER.get(self.algorithm, 9))


RECORD_COLUMNS = [f.name for f in fields(RunRecord) if f.name != "wall_time"]


def _emargin(e: Ensemble, train: Dataset, ln_H: Optional[float], delta: float):
    if ln_H is None:
        return None, None, None
    try:
        em = emargin_bound(margins(e, train), ln_H, train.n, delta)
    except NumericalError:
        return None, None, None
    return em.theta_star, em.q_star, em.bound_value


def _model_path(cfg: ExperimentConfig, data: PreparedData, index: int, depth: int, T: int,
                algorithm: str) -> Optional[str]:
    if not cfg.save_models:
        return None
    d = Path(cfg.output_dir) / "models"
    d.mkdir(parents=True, exist_ok=True)
    safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in data.name)
    return str(d / f"{index:02d}_{safe}_d{depth}_T{T}_{algorithm.lower()}.json")


def _evaluated(cfg, data, index, depth, T, e: Ensemble, ln_H, **extra) -> RunRecord:
    e = replace(e, normalization=data.norm) if e.normalization is None else e
    path = _model_path(cfg, data, index, depth, T, e.algorithm)
    if path:
        save_model(e, path)
    theta, q, bound = _emargin(e, data.train, ln_H, cfg.delta)
    return RunRecord(
        dataset=data.name, dataset_index=index, depth=depth, T=T, algorithm=e.algorithm,
        seed=mix_seed(cfg.master_seed, index, depth, T), T_used=e.T,
        test_error=error_rate(e, data.test), train_error=error_rate(e, data.train),
        emargin=theta, emargin_error=q, bound_value=bound, model_path=path, **extra,
    )


def _failed(cfg, name, index, depth, T, algorithm, exc) -> RunRecord:
    return RunRecord(dataset=name, dataset_index=index, depth=depth, T=T, algorithm=algorithm,
                     seed=mix_seed(cfg.master_seed, index, depth, T),
                     error=f"{type(exc).__name__}: {exc}")


def _run_job(cfg: ExperimentConfig, index: int, depth: int) -> List[RunRecord]:
    """All T values of one (dataset, depth): boost once to max T, then truncate."""
    source = cfg.datasets[index]
    algos = ("ADA", "ARCGV", "MMI") if cfg.include_arcgv else ("ADA", "MMI")
    try:
        data = prepare_dataset(source, mix_seed(cfg.master_seed, index), cfg.train_fraction)
        grid = ThresholdGrid(cfg.thresholds)
        ln_H = log_hypothesis_count(data.train.p, grid.m, depth)
        t0 = time.perf_counter()
        ada, _ = adaboost(data.train, max(cfg.T_values), depth, grid)
        ada_time = time.perf_counter() - t0
        arc, arc_time = None, 0.0
        if cfg.include_arcgv:
            t0 = time.perf_counter()
            arc, _ = arcgv(data.train, max(cfg.T_values), depth, grid)
            arc_time = time.perf_counter() - t0
    except MMIBoostError as exc:
        return [_failed(cfg, source.name, index, depth, T, a, exc)
                for T in cfg.T_values for a in algos]

    out = []
    for T in cfg.T_values:
        t0 = time.perf_counter()
        e = ada.truncate(min(T, ada.T))
        ada_rec = _evaluated(cfg, data, index, depth, T, e, ln_H)
        out.append(replace(ada_rec, wall_time=ada_time * e.T / ada.T
                           + time.perf_counter() - t0))
        if arc is not None:
            t0 = time.perf_counter()
            rec = _evaluated(cfg, data, index, depth, T, arc.truncate(min(T, arc.T)), ln_H)
            out.append(replace(rec, wall_time=arc_time * rec.T_used / arc.T
                               + time.perf_counter() - t0))
        t0 = time.perf_counter()
        try:
            res = mmi_reweight(e, data.train)
            diff = res.new_margins - res.old_margins
            rec = _evaluated(cfg, data, index, depth, T, reweighted_ensemble(e, res), ln_H,
                             min_mi=float(diff.min()), avg_mi=float(diff.mean()),
                             xi_star=res.xi_star, support_count=int(res.support.size),
                             support_fraction=res.support_fraction)
        except MMIBoostError as exc:
            rec = _failed(cfg, data.name, index, depth, T, "MMI", exc)
        out.append(replace(rec, wall_time=time.perf_counter() - t0))
    return out


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DataError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise DataError(f"{WORKERS_ENV} must be at least 1")
        return n
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> List[RunRecord]:
    """Run every (dataset, depth, T) cell; records come back sorted by
    (dataset index, depth, T, algorithm) regardless of completion order."""
    jobs = [(i, d) for i in range(len(cfg.datasets)) for d in cfg.depths]
    workers = min(workers or worker_count(), len(jobs))
    records: List[RunRecord] = []
    if workers <= 1:
        for i, d in jobs:
            records.extend(_run_job(cfg, i, d))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, cfg, i, d) for i, d in jobs]
            for f in futures:
                records.extend(f.result())
    records.sort(key=RunRecord.sort_key)
    return records


# ---------------------------------------------------------------------------
# round sweep


@dataclass(frozen=True)
class SweepPoint:
    T: int
    ada_test_error: float
    mmi_test_error: float
    min_mi: float
    avg_mi: float
    xi_star: float
    support_count: int
    support_fraction: float


def sweep_rounds(train: Dataset, test: Dataset, depth: int, T_max: int, stride: int,
                 grid: Optional[ThresholdGrid] = None) -> List[SweepPoint]:
    """Boost once to ``T_max`` and compare ADA with MMI at every multiple of
    ``stride``, truncating and renormalizing the weights at each point.

    Points beyond an early AdaBoost stop are omitted.
    """
    if not T_max >= stride >= 1:
        raise DataError("need T_max >= stride >= 1")
    grid = grid or ThresholdGrid()
    ada, _ = adaboost(train, T_max, depth, grid)
    points = []
    for T in range(stride, min(T_max, ada.T) + 1, stride):
        e = ada.truncate(T)
        res = mmi_reweight(e, train)
        diff = res.new_margins - res.old_margins
        points.append(SweepPoint(
            T, error_rate(e, test), error_rate(reweighted_ensemble(e, res), test),
            float(diff.min()), float(diff.mean()), res.xi_star, int(res.support.size),
            res.support_fraction,
        ))
    return points

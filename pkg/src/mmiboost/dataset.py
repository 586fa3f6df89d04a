"""Binary classification datasets: loading, splitting, normalization and
Breiman's synthetic generators.

Features are stored as a dense ``float64`` matrix and labels as an ``int8``
vector over {-1, +1}.  Arrays are made read-only on construction so a
:class:`Dataset` can be shared between jobs without copying.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DataError

GENERATOR_KINDS = ("twonorm", "threenorm", "ringnorm")
MAX_SPLIT_ATTEMPTS = 100


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """A labelled sample ``S = {(x_i, y_i)}``.

    ``raw`` is True until the features have been mapped into [0, 1].
    ``label_mapping`` records how source labels were translated to -1/+1.
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = "data"
    raw: bool = True
    label_mapping: Mapping[str, int] = field(default_factory=dict)
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, 0)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(
                f"labels length {y.shape} does not match {X.shape[0]} feature rows"
            )
        if y.size and not np.all((y == 1) | (y == -1)):
            raise DataError("labels must be -1 or +1")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN or infinite values")
        object.__setattr__(self, "features", _frozen(X, np.float64))
        object.__setattr__(self, "labels", _frozen(y, np.int8))
        object.__setattr__(self, "label_mapping", dict(self.label_mapping))
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def has_both_classes(self) -> bool:
        return bool(np.any(self.labels == 1) and np.any(self.labels == -1))

    def subset(self, index, name=None) -> "Dataset":
        return Dataset(
            self.features[index],
            self.labels[index],
            name=name or self.name,
            raw=self.raw,
            label_mapping=self.label_mapping,
            meta=self.meta,
        )


@dataclass(frozen=True)
class NormParams:
    """Per-feature min-max normalization fitted on a training set."""

    minimum: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "minimum", _frozen(self.minimum, np.float64))
        object.__setattr__(self, "scale", _frozen(self.scale, np.float64))

    @classmethod
    def fit(cls, X: np.ndarray) -> "NormParams":
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return cls(np.zeros(X.shape[1]), np.ones(X.shape[1]))
        lo = X.min(axis=0)
        rng = X.max(axis=0) - lo
        # constant columns map to 0 instead of being dropped, keeping p fixed
        rng[rng == 0] = 1.0
        return cls(lo, rng)

    def apply(self, X: np.ndarray, clamp: bool = True) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.minimum.shape[0]:
            raise DataError(
                f"feature count mismatch: data has {X.shape[1]}, "
                f"normalization expects {self.minimum.shape[0]}"
            )
        Z = (X - self.minimum) / self.scale
        if clamp:
            np.clip(Z, 0.0, 1.0, out=Z)
        return Z


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    dimension: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise DataError(f"unknown generator {self.kind!r}; expected one of {GENERATOR_KINDS}")
        if self.n < 0:
            raise DataError("n must be non-negative")
        if self.dimension < 1:
            raise DataError("dimension must be at least 1")

    @property
    def offset(self) -> float:
        """Mean offset ``a`` used by the generator."""
        if self.kind == "ringnorm":
            return 1.0 / math.sqrt(self.dimension)
        return 2.0 / math.sqrt(self.dimension)


# ---------------------------------------------------------------------------
# label handling


def _map_labels(tokens: Sequence[str], label_map=None):
    """Translate raw label tokens into -1/+1.

    Accepted encodings: {-1, +1}, {0, 1}, or any two distinct tokens, where
    the lexicographically smaller one becomes -1.
    """
    tokens = [t.strip() for t in tokens]
    if label_map is not None:
        try:
            return np.array([label_map[t] for t in tokens], dtype=np.int8), dict(label_map)
        except KeyError as exc:
            raise DataError(f"label {exc.args[0]!r} not in the supplied label map") from None

    distinct = sorted(set(tokens))
    if len(distinct) > 2:
        raise DataError(f"expected two classes, found {len(distinct)}: {distinct[:5]}")
    if len(distinct) < 2:
        raise DataError(f"only one class present ({distinct!r})")

    try:
        values = {t: float(t) for t in distinct}
    except ValueError:
        values = None
    if values is not None and set(values.values()) == {-1.0, 1.0}:
        mapping = {t: int(v) for t, v in values.items()}
    elif values is not None and set(values.values()) == {0.0, 1.0}:
        mapping = {t: (1 if v == 1.0 else -1) for t, v in values.items()}
    else:
        mapping = {distinct[0]: -1, distinct[1]: 1}
    return np.array([mapping[t] for t in tokens], dtype=np.int8), mapping


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# loaders


def load_csv(path, label_column: int = -1, name: Optional[str] = None,
             label_map=None) -> Dataset:
    """Read a comma-separated file into a raw :class:`Dataset`.

    A header row is detected when any of its feature cells is non-numeric.
    ``label_column`` may be negative (``-1`` is the last column).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")

    width = len(rows[0][1])
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise DataError(f"label column {label_column} out of range for {width} columns")
    feat_cols = [j for j in range(width) if j != col]

    first = rows[0][1]
    if any(not _is_number(first[j]) for j in feat_cols):
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path} has a header but no data")

    X = np.empty((len(rows), len(feat_cols)))
    tokens = []
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise DataError(f"expected {width} columns, found {len(cells)}", line=line)
        for k, j in enumerate(feat_cols):
            try:
                X[r, k] = float(cells[j])
            except ValueError:
                raise DataError(f"non-numeric feature value {cells[j]!r}", line=line) from None
        tokens.append(cells[col])
    y, mapping = _map_labels(tokens, label_map)
    return Dataset(X, y, name=name or path.stem, raw=True, label_mapping=mapping)


def load_libsvm(path, n_features: Optional[int] = None, name: Optional[str] = None,
                label_map=None) -> Dataset:
    """Read a sparse ``label idx:value ...`` file (1-based indices) densely.

    Indices must be strictly increasing within a line; absent entries are 0.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    tokens, rows, lines = [], [], []
    max_index = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            text = text.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            entries = []
            last = 0
            for item in parts[1:]:
                try:
                    idx_s, val_s = item.split(":", 1)
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise DataError(f"malformed entry {item!r}", line=lineno) from None
                if idx <= last:
                    raise DataError(f"feature indices must increase (got {idx} after {last})",
                                    line=lineno)
                last = idx
                entries.append((idx, val))
            max_index = max(max_index, last)
            tokens.append(parts[0])
            rows.append(entries)
            lines.append(lineno)
    if not rows:
        raise DataError(f"{path} is empty")
    p = max_index if n_features is None else n_features
    if p < max_index:
        raise DataError(f"index {max_index} exceeds declared feature count {p}")
    X = np.zeros((len(rows), p))
    for r, entries in enumerate(rows):
        for idx, val in entries:
            X[r, idx - 1] = val
    y, mapping = _map_labels(tokens, label_map)
    return Dataset(X, y, name=name or path.stem, raw=True, label_mapping=mapping)


def load(path, label_column: int = -1, **kwargs) -> Dataset:
    """Dispatch on extension: ``.csv`` is CSV, anything else LIBSVM."""
    if str(path).lower().endswith(".csv"):
        return load_csv(path, label_column=label_column, **kwargs)
    return load_libsvm(path, **kwargs)


def write_csv(ds: Dataset, path) -> None:
    """Write features followed by the label column, with a header row."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(ds.p)] + ["label"])
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


def write_meta(ds: Dataset, path) -> Path:
    meta_path = Path(str(path) + ".meta")
    with open(meta_path, "w", encoding="utf-8") as fh:
        for k, v in ds.meta.items():
            fh.write(f"{k}={v}\n")
    return meta_path


# ---------------------------------------------------------------------------
# protocol steps


def split_train_test(ds: Dataset, train_fraction: float = 0.7, seed: int = 0):
    """Random disjoint split with ``ceil(n * train_fraction)`` training rows.

    Permutations are redrawn (up to 100 times) until the training part has
    both classes.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    n = ds.n
    # guard against 10 * 0.7 == 7.000000000000001
    n_train = min(n, math.ceil(n * train_fraction - 1e-9))
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SPLIT_ATTEMPTS):
        perm = rng.permutation(n)
        tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        y = ds.labels[tr]
        if np.any(y == 1) and np.any(y == -1):
            return ds.subset(tr, ds.name), ds.subset(te, ds.name)
    raise DataError(
        f"could not draw a two-class training split of {ds.name} in {MAX_SPLIT_ATTEMPTS} attempts"
    )


def normalize_unit_interval(train: Dataset, test: Optional[Dataset] = None):
    """Min-max scale ``train`` into [0, 1]; map ``test`` with the same
    parameters and clamp it into [0, 1].

    Returns ``(train, test, params)``; ``test`` is None when not given.
    """
    params = NormParams.fit(train.features)
    tr = Dataset(params.apply(train.features, clamp=False), train.labels, name=train.name,
                 raw=False, label_mapping=train.label_mapping, meta=train.meta)
    te = None
    if test is not None:
        if test.p != train.p:
            raise DataError(f"train has {train.p} features but test has {test.p}")
        te = Dataset(params.apply(test.features, clamp=True), test.labels, name=test.name,
                     raw=False, label_mapping=test.label_mapping, meta=test.meta)
    return tr, te, params


def apply_norm(ds: Dataset, params: NormParams) -> Dataset:
    return Dataset(params.apply(ds.features, clamp=True), ds.labels, name=ds.name, raw=False,
                   label_mapping=ds.label_mapping, meta=ds.meta)


# ---------------------------------------------------------------------------
# synthetic data


def generate(spec: GeneratorSpec, name: Optional[str] = None) -> Dataset:
    """Draw a raw dataset from one of Breiman's Gaussian problems.

    Uses numpy's PCG64 bit generator; normals come from its ziggurat sampler.
    Labels are fair coin flips.

    twonorm
        +1 ~ N(a 1, I), -1 ~ N(-a 1, I), a = 2/sqrt(d)
    threenorm
        +1 ~ equal mixture of N(a 1, I) and N(-a 1, I);
        -1 ~ N((a, -a, a, ...), I), a = 2/sqrt(d)
    ringnorm
        +1 ~ N(0, 4 I), -1 ~ N(a 1, I), a = 1/sqrt(d)
    """
    rng = np.random.default_rng(spec.seed)
    n, d, a = spec.n, spec.dimension, spec.offset
    y = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
    Z = rng.standard_normal((n, d))
    pos = y == 1
    if spec.kind == "twonorm":
        X = Z + np.where(pos, a, -a)[:, None]
    elif spec.kind == "threenorm":
        sign = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        alt = a * np.where(np.arange(d) % 2 == 0, 1.0, -1.0)
        X = np.where(pos[:, None], Z + (sign * a)[:, None], Z + alt)
    else:
        X = np.where(pos[:, None], 2.0 * Z, Z + a)
    meta = {"kind": spec.kind, "n": str(n), "dim": str(d), "seed": str(spec.seed),
            "a": repr(a)}
    return Dataset(X.reshape(n, d), y, name=name or spec.kind, raw=True,
                   label_mapping={"-1": -1, "1": 1}, meta=meta)

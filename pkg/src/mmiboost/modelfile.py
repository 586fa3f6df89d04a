"""JSON persistence for ensembles.

Weights are written as hex-float strings so a load/save round trip is
exact.  Decimal strings and plain JSON numbers are accepted on load for
hand-written files.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List

import numpy as np

from .boosting import Ensemble
from .dataset import NormParams
from .errors import (DataError, ModelSchemaError, ModelTruncatedError,
                     ModelVersionError)
from .weak_learner import DecisionTree, ThresholdGrid

FORMAT = "mmiboost-model"
VERSION = 1


def _hex(values) -> List[str]:
    return [float(v).hex() for v in np.asarray(values, dtype=np.float64)]


def _float(value, what: str) -> float:
    if isinstance(value, bool):
        raise ModelSchemaError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        s = value.strip()
        try:
            if s.lstrip("+-").lower().startswith("0x"):
                return float.fromhex(s)
            return float(s)
        except ValueError:
            pass
    raise ModelSchemaError(f"{what}: cannot parse {value!r} as a number")


def _floats(values, what: str) -> np.ndarray:
    if not isinstance(values, list):
        raise ModelSchemaError(f"{what}: expected a list")
    return np.array([_float(v, f"{what}[{k}]") for k, v in enumerate(values)], dtype=np.float64)


def _ints(values, what: str) -> tuple:
    if not isinstance(values, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise ModelSchemaError(f"{what}: expected a list of integers")
    return tuple(values)


def to_document(e: Ensemble) -> Dict[str, Any]:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "grid": {"m": e.grid.m},
        "depth": e.depth,
        "algorithm": e.algorithm,
        "trees": [
            {"features": list(t.features), "thresholds": list(t.thresholds),
             "leaves": list(t.leaf_labels)}
            for t in e.trees
        ],
        "raw_alphas": _hex(e.raw_alphas),
        "weights": _hex(e.weights),
        "provenance": {k: v for k, v in sorted(e.provenance.items())},
        "normalization": None,
    }
    if e.normalization is not None:
        doc["normalization"] = {"minimum": _hex(e.normalization.minimum),
                                "scale": _hex(e.normalization.scale)}
    return doc


def dumps(e: Ensemble) -> str:
    return json.dumps(to_document(e), indent=1, sort_keys=True) + "\n"


def save_model(e: Ensemble, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(e))


def _require(doc: dict, key: str, kind):
    if key not in doc:
        raise ModelSchemaError(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ModelSchemaError(f"field {key!r} has the wrong type")
    return value


def from_document(doc) -> Ensemble:
    if not isinstance(doc, dict):
        raise ModelSchemaError("model document must be a JSON object")
    if doc.get("format") != FORMAT:
        raise ModelSchemaError(f"not a model file (format={doc.get('format')!r})")
    if doc.get("version") != VERSION:
        raise ModelVersionError(
            f"unsupported model version {doc.get('version')!r} (expected {VERSION})"
        )
    grid_doc = _require(doc, "grid", dict)
    depth = _require(doc, "depth", int)
    tree_docs = _require(doc, "trees", list)
    provenance = _require(doc, "provenance", dict)
    algorithm = _require(doc, "algorithm", str)
    raw = _floats(_require(doc, "raw_alphas", list), "raw_alphas")
    weights = _floats(_require(doc, "weights", list), "weights")
    if np.any(raw < 0) or np.any(weights < 0):
        raise ModelSchemaError("weights must be non-negative")
    if not (np.all(np.isfinite(raw)) and np.all(np.isfinite(weights))):
        raise ModelSchemaError("weights must be finite")
    try:
        grid = ThresholdGrid(int(grid_doc["m"]))
        trees = []
        for k, t in enumerate(tree_docs):
            if not isinstance(t, dict):
                raise ModelSchemaError(f"trees[{k}] must be an object")
            trees.append(DecisionTree(
                depth,
                _ints(t.get("features"), f"trees[{k}].features"),
                _ints(t.get("thresholds"), f"trees[{k}].thresholds"),
                _ints(t.get("leaves"), f"trees[{k}].leaves"),
                grid,
            ))
        norm = None
        if doc.get("normalization") is not None:
            nd = doc["normalization"]
            if not isinstance(nd, dict):
                raise ModelSchemaError("normalization must be an object")
            norm = NormParams(_floats(nd.get("minimum"), "normalization.minimum"),
                              _floats(nd.get("scale"), "normalization.scale"))
        return Ensemble(tuple(trees), raw, weights, algorithm=algorithm,
                        provenance=provenance, normalization=norm)
    except ModelSchemaError:
        raise
    except (DataError, KeyError, TypeError, ValueError) as exc:
        raise ModelSchemaError(f"invalid model: {exc}") from None


def loads(text: str) -> Ensemble:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        # a complete document always closes its top-level object
        end = text.rstrip()
        if exc.pos >= len(end) or not end.endswith("}"):
            raise ModelTruncatedError(f"model file ends unexpectedly ({exc.msg})") from None
        raise ModelSchemaError(f"model file is not valid JSON: {exc}") from None
    return from_document(doc)


def load_model(path) -> Ensemble:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())

"""Plain-text formats: CSV point clouds and fields, TSV edge lists, JSON reports."""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import Graph

__all__ = [
    "read_graph",
    "read_labels",
    "read_points",
    "read_vector",
    "write_field",
    "write_graph",
    "write_json",
    "write_labels",
    "write_points",
]

FLOAT_FMT = "%.17g"


def _load(path, dtype):
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=dtype, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return arr


def read_points(path):
    X = _load(path, np.float64)
    if X.size == 0:
        raise DataError(f"{path} holds no points")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{path} contains non-finite coordinates")
    return X


def write_points(path, X):
    np.savetxt(path, np.atleast_2d(X), delimiter=",", fmt=FLOAT_FMT)


def read_labels(path):
    y = _load(path, np.int64)
    if y.shape[1] != 1:
        raise DataError(f"{path} must have a single column")
    return y[:, 0]


def write_labels(path, labels):
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d")


def read_vector(path):
    v = _load(path, np.float64)
    return v[:, 0]


def read_graph(path):
    """Edge list TSV with a ``#n=<count>`` header line."""
    path = Path(path)
    try:
        with path.open() as fh:
            header = fh.readline().strip()
            if not header.startswith("#n="):
                raise DataError(f"{path}: first line must be '#n=<count>'")
            n = int(header[3:])
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                rows = np.loadtxt(fh, delimiter="\t", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read graph {path}: {exc}") from exc
    if rows.size == 0:
        return Graph.from_edges(n, [], [], [])
    if rows.shape[1] != 3:
        raise DataError(f"{path}: expected three tab-separated columns")
    src, dst = rows[:, 0], rows[:, 1]
    if np.any(src != np.round(src)) or np.any(dst != np.round(dst)):
        raise DataError(f"{path}: node ids must be integers")
    try:
        return Graph.from_edges(n, src.astype(np.int64), dst.astype(np.int64), rows[:, 2])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_graph(path, graph):
    src, dst, w = graph.edges()
    with Path(path).open("w") as fh:
        fh.write(f"#n={graph.n}\n")
        for i, j, x in zip(src.tolist(), dst.tolist(), w.tolist()):
            fh.write(f"{i}\t{j}\t{x:.17g}\n")


def write_field(path, values, visit_order=None):
    """One value per line (``inf`` for unreached); optional second column with the visit rank."""
    values = np.asarray(values, dtype=np.float64)
    with Path(path).open("w") as fh:
        if visit_order is None:
            for v in values.tolist():
                fh.write(f"{v:.17g}\n")
        else:
            rank = np.full(values.size, -1, dtype=np.int64)
            rank[np.asarray(visit_order, dtype=np.int64)] = np.arange(len(visit_order))
            for v, r in zip(values.tolist(), rank.tolist()):
                fh.write(f"{v:.17g},{r}\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if np.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, payload):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")
    return text

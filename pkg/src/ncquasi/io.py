"""CSV/JSON persistence.

Floats are written with ``repr`` (shortest round-trip form, at most 17
significant digits), independent of locale.
"""
from __future__ import annotations

import datetime as _dt
import json
import math
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .spats import QUADRATURE_CONVENTION, QuadratureDataset, SpatsParams


class DataError(ValueError):
    """An input file is missing, empty, or malformed."""


def fmt(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def _write(path, comments: dict, header, rows):
    lines = [f"# {k}={v}" for k, v in comments.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_table(path):
    """Return ``(comments, header, columns)`` of a CSV written by this module."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    comments, header, rows = {}, None, []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            comments[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        else:
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: not a numeric row: {line!r}") from None
    if header is None or not rows:
        raise DataError(f"{path}: file is empty or contains no data rows")
    data = np.array(rows)
    if data.shape[1] != len(header):
        raise DataError(f"{path}: {data.shape[1]} columns but header has {len(header)}")
    return comments, header, {name: data[:, i] for i, name in enumerate(header)}


def write_dataset(path, data: QuadratureDataset, extra: dict | None = None):
    comments = {}
    if data.params is not None:
        comments.update(nbar=fmt(data.params.nbar), eta=fmt(data.params.eta))
    if data.seed is not None:
        comments["seed"] = str(data.seed)
    comments["count"] = str(data.count)
    comments["convention"] = data.convention
    comments.update(extra or {})
    _write(path, comments, ["x"], ((v,) for v in data.samples))


def read_dataset(path) -> QuadratureDataset:
    comments, header, cols = read_table(path)
    if header != ["x"]:
        raise DataError(f"{path}: expected a single column 'x', found {header}")
    x = cols["x"]
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise DataError(f"{path}: sample {bad} is not finite")
    if "count" in comments and int(comments["count"]) != x.size:
        raise DataError(f"{path}: header says count={comments['count']} but found {x.size} rows")
    params = None
    try:
        if "nbar" in comments and "eta" in comments:
            params = SpatsParams(float(comments["nbar"]), float(comments["eta"]))
        seed = int(comments["seed"]) if "seed" in comments else None
    except ValueError as exc:
        raise DataError(f"{path}: bad metadata comment: {exc}") from None
    return QuadratureDataset(x, params=params, seed=seed,
                             convention=comments.get("convention", QUADRATURE_CONVENTION))


def write_cf_estimate(path, est, extra: dict | None = None):
    comments = {"N": str(est.source_count)}
    comments.update(extra or {})
    rows = zip(est.radii, est.values.real, est.values.imag, est.variances)
    _write(path, comments, ["b", "re", "im", "sigma2"], rows)


def write_filter_table(path, table):
    _write(path, {"order": table.order, "norm": fmt(table.norm)}, ["s", "omega1"],
           zip(table.s, np.exp(table.log_omega1)))


def write_profile(path, prof, meta: dict | None = None):
    """Profile CSV plus a JSON sidecar (same stem, ``.json``) holding the metadata."""
    path = Path(path)
    meta = dict(meta or {})
    meta.setdefault("filter", prof.filter)
    meta.setdefault("N", prof.source_count)
    meta.setdefault("integration", prof.settings)
    sidecar = path.with_suffix(".json")
    _write(path, {"metadata": sidecar.name}, ["alpha", "p", "sigma", "significance"],
           zip(prof.alpha_radii, prof.values, prof.sigmas, prof.significance))
    write_json(sidecar, meta)
    return sidecar


def read_profile(path):
    _, _, cols = read_table(path)
    return cols


def write_table(path, header, rows, comments: dict | None = None):
    _write(path, comments or {}, header, rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, SpatsParams):
        return {"nbar": obj.nbar, "eta": obj.eta}
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def manifest(command: str, argv, resolved: dict) -> dict:
    return {
        "command": command,
        "argv": list(argv),
        "parameters": resolved,
        "version": __version__,
        "backend": _backend.BACKEND,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }

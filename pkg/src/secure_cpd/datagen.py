"""Seeded synthetic series with one planted change, and CSV ingestion."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import DataError, ParameterError
from .pipeline import TimeSeries

KINDS = ("mean_shift", "variance_shift", "ar1_shift")
DISTS = ("gaussian", "uniform", "laplace", "student_t")
T_DOF = 5

DEFAULTS = {
    "mean_shift": {"mu1": 0.0, "mu2": 1.0, "sigma": 1.0},
    "variance_shift": {"mu": 0.0, "sigma1": 1.0, "sigma2": 2.0},
    "ar1_shift": {"phi1": 0.3, "phi2": 0.7, "sigma": 1.0, "x0": 0.0},
}


def draw(rng: np.random.Generator, dist: str, size: int, mean: float = 0.0, sd: float = 1.0) -> np.ndarray:
    """Samples with the requested mean and standard deviation."""
    if sd < 0:
        raise ParameterError("standard deviation must be non-negative")
    if dist == "gaussian":
        z = rng.standard_normal(size)
    elif dist == "uniform":
        z = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size)
    elif dist == "laplace":
        z = rng.laplace(0.0, 1.0 / np.sqrt(2.0), size)
    elif dist == "student_t":
        z = rng.standard_t(T_DOF, size) * np.sqrt((T_DOF - 2) / T_DOF)
    else:
        raise ParameterError(f"distribution must be one of {DISTS}, got {dist!r}")
    return mean + sd * z


def _ar1(e: np.ndarray, phi: float, y_prev: float) -> np.ndarray:
    y, _ = lfilter([1.0], [1.0, -phi], e, zi=[phi * y_prev])
    return y


def gen_series(
    kind: str,
    n: int,
    tau: int | None = None,
    dist: str = "gaussian",
    params: dict | None = None,
    seed: int = 0,
) -> TimeSeries:
    """Points 0..tau-1 follow the first regime, tau..n-1 the second.

    Distribution parameters are means and standard deviations whatever the
    family.  AR(1) innovations have mean zero and sd ``sigma``; the process
    starts from X_0 = ``x0``.
    """
    if kind not in KINDS:
        raise ParameterError(f"kind must be one of {KINDS}, got {kind!r}")
    if dist not in DISTS:
        raise ParameterError(f"distribution must be one of {DISTS}, got {dist!r}")
    tau = n // 2 if tau is None else int(tau)
    if not 1 <= tau < n:
        raise ParameterError(f"need 1 <= tau < n, got tau={tau}, n={n}")
    unknown = set(params or {}) - set(DEFAULTS[kind])
    if unknown:
        raise ParameterError(f"unknown parameters for {kind}: {sorted(unknown)}")
    p = {**DEFAULTS[kind], **(params or {})}
    rng = np.random.default_rng(seed)

    if kind == "mean_shift":
        x = np.concatenate([draw(rng, dist, tau, p["mu1"], p["sigma"]), draw(rng, dist, n - tau, p["mu2"], p["sigma"])])
    elif kind == "variance_shift":
        x = np.concatenate([draw(rng, dist, tau, p["mu"], p["sigma1"]), draw(rng, dist, n - tau, p["mu"], p["sigma2"])])
    else:
        for phi in (p["phi1"], p["phi2"]):
            if not -1 < phi < 1:
                raise ParameterError(f"AR coefficient {phi} outside (-1, 1)")
        e = draw(rng, dist, n, 0.0, p["sigma"])
        first = _ar1(e[:tau], p["phi1"], p["x0"])
        x = np.concatenate([first, _ar1(e[tau:], p["phi2"], first[-1])])
    return TimeSeries(x, None, f"{kind}-{dist}-n{n}-seed{seed}")


def load_csv(path, column=0, bounds=None, header: bool = False, name: str | None = None) -> TimeSeries:
    """One value per row.  ``column`` is an index, or a header name when ``header``."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    values = []
    with fh:
        reader = csv.reader(fh)
        col = column
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                if isinstance(column, str):
                    if column not in row:
                        raise DataError(f"{path}: no column named {column!r}")
                    col = row.index(column)
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if isinstance(col, str):
                raise DataError("a column name needs header=True")
            if col >= len(row):
                raise DataError(f"{path}: row {lineno} has no column {col}")
            cell = row[col].strip()
            if cell == "":
                raise DataError(f"{path}: missing value on row {lineno}")
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric value {cell!r} on row {lineno}") from None
            if not np.isfinite(v):
                raise DataError(f"{path}: non-finite value on row {lineno}")
            values.append(v)
    if not values:
        raise DataError(f"{path}: no data rows")
    return TimeSeries(np.array(values), bounds, name or path.stem)


def save_csv(ts: TimeSeries, dest, header: str | None = None) -> None:
    """Write one value per row to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(dest, ts, header)
        return
    with Path(dest).open("w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, ts, header)


def _write_rows(fh, ts: TimeSeries, header) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow([header])
    w.writerows([repr(float(v))] for v in ts.values)

"""CSV snapshots and profile comparison.

The interchange format is plain ASCII CSV: a header row, comma separators,
values printed with 17 significant digits so identical runs produce
byte-identical files.  Snapshot columns are

    x, rho, u1, theta, sigma11, q1 [, f0, f1, ... one column per ordinal]
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .state import sigma11_q1

SNAPSHOT_COLUMNS = ("x", "rho", "u1", "theta", "sigma11", "q1")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_columns(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = [np.asarray(columns[c], dtype=float) for c in names]
    n = data[0].shape[0]
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(n):
            writer.writerow([_fmt(col[i]) for col in data])


def snapshot_columns(state, dump_coeffs: bool = False) -> dict[str, np.ndarray]:
    """Snapshot of a moment SimState (solver) as named columns."""
    sig, q1 = sigma11_q1(state.layout, state.coeffs)
    cols = {
        "x": state.x, "rho": state.rho, "u1": state.u[:, 0],
        "theta": state.theta, "sigma11": sig, "q1": q1,
    }
    if dump_coeffs:
        for k in range(state.layout.size):
            cols[f"f{k}"] = state.coeffs[:, k]
    return cols


def write_snapshot(path, state, dump_coeffs: bool = False) -> None:
    write_columns(path, snapshot_columns(state, dump_coeffs))


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows)
    return {name: data[:, j] for j, name in enumerate(names)}


@dataclass
class ComparisonReport:
    column: str
    l1_rel: float
    linf: float
    n_points: int

    def __str__(self) -> str:
        return (f"{self.column}: L1(rel) = {self.l1_rel:.6g}, "
                f"Linf = {self.linf:.6g} over {self.n_points} points")


def _center_offset(x: np.ndarray, y: np.ndarray, level: float = 0.5) -> float:
    """x where the monotone-trend profile crosses ``level`` (interpolated)."""
    lo, hi = y[0], y[-1]
    t = (y - lo) / (hi - lo)
    k = int(np.argmax(t >= level)) if hi > lo else int(np.argmax(t <= level))
    if k == 0:
        return float(x[0])
    t0, t1 = t[k - 1], t[k]
    w = (level - t0) / (t1 - t0) if t1 != t0 else 0.0
    return float(x[k - 1] + w * (x[k] - x[k - 1]))


def _nested_restriction(xa, xb, yb):
    """Cell-average yb onto xa when xb is an aligned integer refinement.

    Finite-volume data are cell means, so a fine reference is compared by
    averaging its cells into the coarse cells, not by point interpolation.
    Returns None when the grids do not nest.
    """
    if xb.size % xa.size != 0 or xb.size == xa.size:
        return None
    m = xb.size // xa.size
    blocks = xb.reshape(xa.size, m).mean(axis=1)
    dxa = xa[1] - xa[0] if xa.size > 1 else 1.0
    if np.abs(blocks - xa).max() > 1e-9 * abs(dxa):
        return None
    return yb.reshape(xa.size, m).mean(axis=1)


def compare_profiles(xa, ya, xb, yb, column: str = "value",
                     normalize: bool = False, align_center: bool = False) -> ComparisonReport:
    """Error norms of profile a against reference profile b.

    When b lives on an aligned integer refinement of a's grid it is restricted
    by cell averaging; otherwise it is interpolated linearly onto a's grid
    (restricted to the overlap).  ``normalize`` maps both profiles affinely so
    their end values go to 0 and 1; ``align_center`` shifts each x-axis so the
    half-level crossing sits at the origin before comparing (steady shocks are
    translation-invariant).
    """
    xa = np.asarray(xa, dtype=float)
    ya = np.asarray(ya, dtype=float)
    xb = np.asarray(xb, dtype=float)
    yb = np.asarray(yb, dtype=float)
    if normalize:
        ya = (ya - ya[0]) / (ya[-1] - ya[0])
        yb = (yb - yb[0]) / (yb[-1] - yb[0])
    if align_center:
        xa = xa - _center_offset(xa, ya)
        xb = xb - _center_offset(xb, yb)
    else:
        restricted = _nested_restriction(xa, xb, yb)
        if restricted is not None:
            scale = np.abs(restricted).sum()
            diff = np.abs(ya - restricted)
            l1 = diff.sum() / scale if scale > 0 else diff.sum()
            return ComparisonReport(column=column, l1_rel=float(l1),
                                    linf=float(diff.max()), n_points=xa.size)
    lo = max(xa[0], xb[0])
    hi = min(xa[-1], xb[-1])
    keep = (xa >= lo) & (xa <= hi)
    if not keep.any():
        raise ValueError("profiles do not overlap")
    x = xa[keep]
    a = ya[keep]
    b = np.interp(x, xb, yb)
    scale = np.abs(b).sum()
    l1 = np.abs(a - b).sum() / scale if scale > 0 else np.abs(a - b).sum()
    return ComparisonReport(column=column, l1_rel=float(l1),
                            linf=float(np.abs(a - b).max()), n_points=int(keep.sum()))


def compare_files(path_a, path_b, column: str, normalize: bool = False,
                  align_center: bool = False) -> ComparisonReport:
    a = read_csv(path_a)
    b = read_csv(path_b)
    for data, path in ((a, path_a), (b, path_b)):
        if column not in data or "x" not in data:
            raise ValueError(f"{path} has no column {column!r} (columns: {list(data)})")
    return compare_profiles(a["x"], a[column], b["x"], b[column], column=column,
                            normalize=normalize, align_center=align_center)

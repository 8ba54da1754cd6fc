"""Invariants, residual bookkeeping and convergence tables.

Two energy conventions live side by side on purpose: the particle system
uses ``(1/2) int |E|^2`` and the reduced model uses ``(1/(4 pi)) int |E|^2``
with the kinetic part integrated against ``w dw dv_par`` (no ``2 pi``).
Each one matches its own conservation law.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .distribution import ReducedDistribution
from .poisson import VectorField


class InsufficientDataError(ValueError):
    pass


# -- records ------------------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    """One time sample. ``total_energy`` is always ``kinetic + field``."""

    t: float
    s: float = math.nan
    kinetic_energy: float = 0.0
    field_energy: float = 0.0
    total_energy: float = math.nan
    mass: float = math.nan
    L1: float = math.nan
    L2: float = math.nan
    Linf: float = math.nan
    min_value: float = math.nan
    longitudinal_momentum_variation: float = math.nan
    constraint_residual: float = math.nan
    defect_norm: float = math.nan
    drift_estimate: tuple[float, float] = (math.nan, math.nan)

    def __post_init__(self) -> None:
        self.total_energy = self.kinetic_energy + self.field_energy
        self.drift_estimate = tuple(float(d) for d in self.drift_estimate)

    @staticmethod
    def columns() -> list[str]:
        out = []
        for f in fields(DiagnosticsRecord):
            if f.name == "drift_estimate":
                out += ["drift_estimate_x", "drift_estimate_y"]
            else:
                out.append(f.name)
        return out

    def row(self) -> list[str]:
        vals = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "drift_estimate":
                vals += [repr(float(v[0])), repr(float(v[1]))]
            else:
                vals.append(repr(float(v)))
        return vals

    @classmethod
    def from_row(cls, row: dict) -> "DiagnosticsRecord":
        kw = {k: float(v) for k, v in row.items() if not k.startswith("drift_estimate")}
        kw.pop("total_energy", None)
        kw["drift_estimate"] = (float(row["drift_estimate_x"]), float(row["drift_estimate_y"]))
        return cls(**kw)


def write_diagnostics_csv(records, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(DiagnosticsRecord.columns())
        for r in records:
            out.writerow(r.row())
    return path


def read_diagnostics_csv(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        return [DiagnosticsRecord.from_row(r) for r in csv.DictReader(fh)]


# -- energies and norms -------------------------------------------------------


def energy_full(ensemble, E: VectorField | None):
    """``(kinetic, field, total)`` with ``sum w |v|^2 / 2`` and ``(1/2) int |E|^2``."""
    kin = 0.0
    if ensemble is not None and len(ensemble.weights):
        kin = 0.5 * float(np.sum(ensemble.weights * np.sum(ensemble.v**2, axis=1)))
    fld = 0.0 if E is None else 0.5 * E.norm_squared_integral()
    return kin, fld, kin + fld


def energy_reduced(F: ReducedDistribution, E_F: VectorField | None):
    """Reduced energy ``int (w^2+v_par^2)/2 F w dw dv_par dx + (1/4pi) int |E|^2``."""
    if F.chart != "w":
        raise ValueError("energy_reduced needs the w-chart; convert with chart_transform first")
    W, V = F.velocity.mesh()
    kin = F.integrate(F.values * (0.5 * (W**2 + V**2)))
    fld = 0.0 if E_F is None else E_F.norm_squared_integral() / (4.0 * math.pi)
    return kin, fld, kin + fld


def lp_norm_reduced(F: ReducedDistribution, p, b_values=None) -> float:
    """``L^p`` norm for ``p`` in ``{1, 2, inf}`` with the chart's measure."""
    if p in (math.inf, "inf", np.inf):
        return float(np.max(np.abs(F.values)))
    if p == 1:
        return F.integrate(np.abs(F.values), b_values)
    if p == 2:
        return math.sqrt(F.integrate(F.values**2, b_values))
    raise ValueError(f"unsupported norm exponent {p!r}; use 1, 2 or inf")


def casimir(values: np.ndarray, cell_volume: float, kind: str) -> float:
    """``int Theta(G) dx`` for ``Theta`` in ``{id, square, positive-part}``."""
    theta = {"id": lambda g: g, "square": lambda g: g**2, "positive-part": lambda g: np.maximum(g, 0.0)}
    if kind not in theta:
        raise ValueError(f"unknown Casimir {kind!r}")
    return float(np.sum(theta[kind](values)) * cell_volume)


def longitudinal_momentum_variation(F: ReducedDistribution) -> float:
    """Normalised size of ``dM/dx_par`` with ``M(x) = int v_par F w dw dv_par``.

    Returns ``max |dM/dx_par| / (max int |v_par| F w dw dv_par + 1e-30)``, the
    derivative being spectral along ``x_par``. Zero when there is no
    ``x_par`` axis.
    """
    if F.chart != "w":
        raise ValueError("longitudinal_momentum_variation needs the w-chart")
    if F.grid.dim < 3:
        return 0.0
    from .gyro import spatial_derivative

    vp = F.velocity.v_par[None, :]
    M = F.velocity_moment(vp)
    scale = F.velocity_moment(np.abs(vp))
    dM = spatial_derivative(M, F.grid, 2)
    return float(np.max(np.abs(dM)) / (np.max(np.abs(scale)) + 1e-30))


# -- drift measurement --------------------------------------------------------


@dataclass
class Trajectory:
    """Positions ``x`` (``(n, d)``) sampled at fast times ``s``; ``t = eps * s``."""

    s: np.ndarray
    x: np.ndarray
    eps: float

    @property
    def t(self) -> np.ndarray:
        return self.eps * self.s


def _interp_position(traj: Trajectory, s_query: float) -> np.ndarray:
    s = traj.s
    ds = s[1] - s[0]
    k = (s_query - s[0]) / ds
    i = int(round(k))
    if abs(k - i) < 1e-9 and 0 <= i < len(s):
        return traj.x[i]
    # 4-point Lagrange through the surrounding samples
    i0 = min(max(int(math.floor(k)) - 1, 0), len(s) - 4)
    nodes = s[i0 : i0 + 4]
    out = np.zeros(traj.x.shape[1])
    for j in range(4):
        lj = 1.0
        for m in range(4):
            if m != j:
                lj *= (s_query - nodes[m]) / (nodes[j] - nodes[m])
        out += lj * traj.x[i0 + j]
    return out


def drift_measurement(traj: Trajectory, gyroperiod: float, n_periods: int, start: float | None = None):
    """Window-averaged drift velocity in slow time ``t``.

    The window covers exactly ``n_periods`` gyroperiods (``gyroperiod`` in
    fast time ``s``) starting at ``start`` (default: first sample), so the
    fast gyration cancels. Positions off the sampling grid are interpolated.
    """
    if n_periods < 1 or gyroperiod <= 0.0:
        raise ValueError("need n_periods >= 1 and a positive gyroperiod")
    s0 = traj.s[0] if start is None else float(start)
    window = n_periods * gyroperiod
    if s0 + window > traj.s[-1] + 1e-12 * window or len(traj.s) < 4:
        raise InsufficientDataError(
            f"trajectory spans {traj.s[-1] - traj.s[0]:.6g} < required window {window:.6g}"
        )
    dx = _interp_position(traj, s0 + window) - _interp_position(traj, s0)
    return dx / (traj.eps * window)


# -- convergence studies ------------------------------------------------------


@dataclass
class ConvergenceRow:
    epsilon: float
    error: float
    ratio: float = math.nan
    failed: bool = False
    message: str = ""


@dataclass
class ConvergenceTable:
    rows: list
    order: float
    flag: str = ""

    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows[1:]]

    def to_json(self, path=None) -> str:
        data = []
        for r in self.rows:
            item = {"epsilon": r.epsilon, "error": _json_num(r.error), "ratio": _json_num(r.ratio)}
            if r.failed:
                item["failed"] = True
                item["message"] = r.message
            data.append(item)
        text = json.dumps(data, indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def _json_num(x: float):
    return None if not math.isfinite(x) else x


def _run_all(runner, eps, workers):
    if workers <= 1:
        out = []
        for e in eps:
            try:
                out.append((float(runner(e)), None))
            except Exception as exc:  # noqa: BLE001 - recorded in the table
                out.append((math.nan, exc))
        return out
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(runner, e) for e in eps]
        out = []
        for fut in futures:
            try:
                out.append((float(fut.result()), None))
            except Exception as exc:  # noqa: BLE001
                out.append((math.nan, exc))
        return out


def convergence_study(runner, eps_list, trivial_tol: float = 1e-10, workers: int = 1) -> ConvergenceTable:
    """Evaluate ``runner(eps) -> error`` on a decreasing list of ``eps``.

    Ratios are ``error[i-1] / error[i]``; the order comes from a least-squares
    fit of ``log error`` against ``log eps`` over successful runs. A failing
    sub-run is recorded with its message and does not stop the study.
    ``workers > 1`` runs the sub-runs in separate processes (``runner`` must
    then be picklable); each run is independent, so results match. If
    every error is below ``trivial_tol`` the order is NaN with flag
    ``"trivial"``.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 3 or any(b >= a for a, b in zip(eps, eps[1:])) or eps[-1] <= 0.0:
        raise ValueError("eps_list must be strictly decreasing, positive, with >= 3 entries")
    rows = []
    for e, (err, exc) in zip(eps, _run_all(runner, eps, workers)):
        if exc is None:
            rows.append(ConvergenceRow(e, err))
        else:
            rows.append(ConvergenceRow(e, math.nan, failed=True, message=f"{type(exc).__name__}: {exc}"))
    for prev, cur in zip(rows, rows[1:]):
        if not (prev.failed or cur.failed) and cur.error != 0.0:
            cur.ratio = prev.error / cur.error
    ok = [r for r in rows if not r.failed]
    if ok and all(abs(r.error) <= trivial_tol for r in ok):
        return ConvergenceTable(rows, math.nan, "trivial")
    good = [r for r in ok if r.error > 0.0]
    if len(good) < 2:
        return ConvergenceTable(rows, math.nan, "insufficient")
    slope = np.polyfit(np.log([r.epsilon for r in good]), np.log([r.error for r in good]), 1)[0]
    return ConvergenceTable(rows, float(slope), "partial" if len(ok) < len(rows) else "")

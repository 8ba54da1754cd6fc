"""Full-orbit particle-in-cell solver and the Hilbert-expansion defect.

Everything runs in fast time ``s = t / eps``::

    dx/ds = v,   dv/ds = E + (b/eps) v^perp,   v^perp = (v_y, -v_x, 0),

so the magnetic force only rotates ``(v_x, v_y)`` (clockwise) and never acts
on ``v_z``. Physical time is reported as ``t = eps * s``. The electrostatic
field solves ``-Laplace(phi) = rho - rho_0`` with a fixed neutralising
background.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .diagnostics import DiagnosticsRecord, energy_full, write_diagnostics_csv
from .distribution import GyroResolved, ReducedDistribution
from .fields import MagneticFieldModel, eval_b
from .gyro import (
    DEFAULT_SOLVABILITY_TOL,
    NotSolvableError,
    dtheta_spectral,
    perp_gradient,
    parallel_derivative,
    solvability_residual_order0,
    solvability_residual_parallel,
)
from .poisson import ScalarField, TorusGrid, VectorField, export_raw, solve_poisson

logger = logging.getLogger(__name__)


class InvalidSpecError(ValueError):
    """Initial-distribution settings cannot be normalised or sampled."""


class ConfigurationError(ValueError):
    """Time step violates the gyration-resolution guard."""


class SolverFailure(RuntimeError):
    """A run produced non-finite values; ``record`` labels where."""

    def __init__(self, message: str, record: dict):
        super().__init__(message)
        self.record = record


# -- ensembles ----------------------------------------------------------------


@dataclass
class FullParticleEnsemble:
    """Weighted markers; positions are kept inside ``[0, L)^3``."""

    x: np.ndarray
    v: np.ndarray
    weights: np.ndarray
    lengths: tuple[float, float, float]
    seed: int | None = None

    def __post_init__(self) -> None:
        self.x = np.ascontiguousarray(self.x, dtype=float).reshape(-1, 3)
        self.v = np.ascontiguousarray(self.v, dtype=float).reshape(-1, 3)
        self.weights = np.ascontiguousarray(self.weights, dtype=float).reshape(-1)
        if not (len(self.x) == len(self.v) == len(self.weights)):
            raise ValueError("positions, velocities and weights must have equal length")
        if np.any(self.weights < 0.0):
            raise ValueError("weights must be nonnegative")
        self.lengths = tuple(float(L) for L in self.lengths)
        self.wrap()

    @property
    def count(self) -> int:
        return len(self.weights)

    def wrap(self) -> None:
        np.mod(self.x, np.asarray(self.lengths), out=self.x)
        # mod can round a tiny negative up to exactly L
        self.x[self.x >= np.asarray(self.lengths)] = 0.0

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def copy(self) -> "FullParticleEnsemble":
        return FullParticleEnsemble(self.x.copy(), self.v.copy(), self.weights.copy(), self.lengths, self.seed)


@dataclass
class InitialSpec:
    """Product of a spatial profile and a velocity profile.

    density: ``uniform`` or ``cosine`` (``rho0 (1 + delta cos(2 pi mode x / Lx))``).
    velocity: ``maxwellian`` (temperature ``vth^2``, mean ``drift``), ``ring``
        (perpendicular speed ``ring_speed``, parallel velocity ``v_par``) or
        ``delta`` (every marker has velocity ``drift``).
    sampling: ``random`` or ``quiet`` (lattice positions; for rings also
        ``n_phases`` equally spaced gyrophases).

    Total marker weight equals ``rho0 * volume`` in the cosine and uniform cases.
    """

    density: str = "uniform"
    rho0: float = 1.0
    delta: float = 0.0
    mode: int = 1
    velocity: str = "maxwellian"
    vth: float = 1.0
    drift: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ring_speed: float = 1.0
    v_par: float = 0.0
    sampling: str = "random"
    n_phases: int = 8
    lengths: tuple[float, float, float] = (2.0 * math.pi,) * 3
    lattice: tuple[int, int, int] | None = None
    gyrocenter_eps: float | None = None

    def validate(self) -> None:
        if self.density not in ("uniform", "cosine"):
            raise InvalidSpecError(f"unknown density profile {self.density!r}")
        if self.velocity not in ("maxwellian", "ring", "delta"):
            raise InvalidSpecError(f"unknown velocity profile {self.velocity!r}")
        if self.sampling not in ("random", "quiet"):
            raise InvalidSpecError(f"unknown sampling {self.sampling!r}")
        if not (self.rho0 > 0.0 and math.isfinite(self.rho0)):
            raise InvalidSpecError("rho0 must be positive and finite")
        if self.density == "cosine" and not abs(self.delta) < 1.0:
            raise InvalidSpecError("|delta| must be < 1 for a nonnegative density")
        if self.velocity == "maxwellian" and not self.vth > 0.0:
            raise InvalidSpecError("vth must be positive")
        if self.velocity == "ring" and self.ring_speed < 0.0:
            raise InvalidSpecError("ring_speed must be nonnegative")
        if any(not L > 0.0 for L in self.lengths):
            raise InvalidSpecError("box lengths must be positive")

    def profile(self, x: np.ndarray) -> np.ndarray:
        if self.density == "uniform":
            return np.full(len(x), self.rho0)
        k = 2.0 * math.pi * self.mode / self.lengths[0]
        return self.rho0 * (1.0 + self.delta * np.cos(k * x[:, 0]))


def sample_initial(spec: InitialSpec, n_particles: int, seed: int = 0) -> FullParticleEnsemble:
    """Draw markers for ``spec``; deterministic for a given ``seed``.

    Random sampling places markers uniformly and carries the density profile
    in the weights. With ``gyrocenter_eps`` set, lattice points are taken as
    guiding centres and each marker is shifted by its gyroradius vector
    ``eps w e_theta / b`` (``b = 1``).
    """
    spec.validate()
    if n_particles < 1:
        raise InvalidSpecError("need at least one particle")
    rng = np.random.default_rng(seed)
    L = np.asarray(spec.lengths, dtype=float)
    n = int(n_particles)
    if spec.sampling == "quiet":
        phases = spec.n_phases if spec.velocity == "ring" else 1
        if n % phases:
            raise InvalidSpecError("quiet start needs n_particles divisible by n_phases")
        n_sites = n // phases
        lat = spec.lattice or _default_lattice(n_sites)
        if int(np.prod(lat)) != n_sites:
            raise InvalidSpecError(f"lattice {lat} does not hold {n_sites} sites")
        axes = [(np.arange(m) + 0.5) * L[i] / m for i, m in enumerate(lat)]
        sites = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        x = np.repeat(sites, phases, axis=0)
        theta = np.tile(2.0 * math.pi * np.arange(phases) / phases, n_sites)
    else:
        x = rng.random((n, 3)) * L
        theta = rng.random(n) * 2.0 * math.pi
    if spec.velocity == "maxwellian":
        v = np.asarray(spec.drift) + spec.vth * rng.standard_normal((n, 3))
    elif spec.velocity == "ring":
        v = np.empty((n, 3))
        v[:, 0] = spec.ring_speed * np.cos(theta)
        v[:, 1] = spec.ring_speed * np.sin(theta)
        v[:, 2] = spec.v_par
    else:
        v = np.broadcast_to(np.asarray(spec.drift, dtype=float), (n, 3)).copy()
    weights = spec.profile(x)
    if spec.gyrocenter_eps is not None:
        w = np.hypot(v[:, 0], v[:, 1])
        th = np.arctan2(v[:, 1], v[:, 0])
        x[:, 0] += -spec.gyrocenter_eps * w * np.sin(th)
        x[:, 1] += spec.gyrocenter_eps * w * np.cos(th)
    total = spec.rho0 * float(np.prod(L))
    s = weights.sum()
    if not (s > 0.0 and math.isfinite(s)):
        raise InvalidSpecError("density profile does not normalise")
    weights = weights * (total / s)
    return FullParticleEnsemble(x, v, weights, tuple(L), seed)


def _default_lattice(n_sites: int) -> tuple[int, int, int]:
    side = round(n_sites ** (1.0 / 3.0))
    if side**3 == n_sites:
        return (side, side, side)
    return (n_sites, 1, 1)


# -- single-particle dynamics -------------------------------------------------


def lorentz_rhs(x, v, E_at_x, b_at_x, eps: float):
    """Fast-time right-hand side ``(v, E + (b/eps) v^perp)``."""
    v = np.asarray(v, dtype=float)
    E = np.asarray(E_at_x, dtype=float)
    b = np.asarray(b_at_x, dtype=float)
    acc = np.array(E, dtype=float, copy=True) * np.ones_like(v)
    acc[..., 0] += b / eps * v[..., 1]
    acc[..., 1] -= b / eps * v[..., 0]
    return v.copy(), acc


def check_step(ds: float, b_max: float, eps: float, limit: float = 0.5) -> None:
    if not (ds > 0.0 and eps > 0.0):
        raise ConfigurationError("need positive ds and eps")
    if ds * b_max / eps > limit + 1e-12:
        raise ConfigurationError(
            f"ds * b_max / eps = {ds * b_max / eps:.4g} exceeds {limit}; the gyration is not resolved"
        )


def default_step(eps: float, b_max: float, per_period: int = 64) -> float:
    """``ds`` giving ``per_period`` steps per gyroperiod ``2 pi eps / b``."""
    return 2.0 * math.pi * eps / b_max / per_period


def boris_push(x, v, E, b, eps: float, ds: float, lengths=(), kern=None, check: bool = True):
    """Exact-angle Boris step in place: half kick, rotation by ``ds b/eps``,
    half kick, drift. ``v`` is staggered half a step behind ``x``."""
    kern = kern or _kernels
    b = np.ascontiguousarray(np.broadcast_to(np.asarray(b, dtype=float), (len(x),)))
    if check:
        check_step(ds, float(np.max(b)), eps)
    E = np.ascontiguousarray(np.broadcast_to(np.asarray(E, dtype=float), x.shape))
    kern.boris_push(x, v, E, b, 1.0 / eps, ds, tuple(float(L) for L in lengths))
    return x, v


def half_step_back(v, E, b, eps: float, ds: float) -> np.ndarray:
    """Velocity at ``s - ds/2`` from the velocity at ``s`` (inverse half step)."""
    v = np.array(v, dtype=float, copy=True)
    ang = -0.5 * ds * np.asarray(b, dtype=float) / eps
    c, s = np.cos(ang), np.sin(ang)
    vx = v[..., 0].copy()
    v[..., 0] = c * vx + s * v[..., 1]
    v[..., 1] = -s * vx + c * v[..., 1]
    return v - 0.5 * ds * np.asarray(E, dtype=float)


def push_orbit(x0, v0, E_func, model: MagneticFieldModel, eps: float, ds: float, n_steps: int, kern=None):
    """Free-space single-particle orbit; returns ``(s, x, v)`` samples.

    ``E_func(x) -> (N, 3)`` gives the field at positions ``x`` (``(N, 3)``).
    ``v`` samples are staggered by ``-ds/2`` against ``x``.
    """
    x = np.ascontiguousarray(np.array(x0, dtype=float).reshape(1, 3))
    v0 = np.array(v0, dtype=float).reshape(1, 3)
    b0 = eval_b(model, 0.0, x[:, :2])
    v = np.ascontiguousarray(half_step_back(v0, E_func(x), b0, eps, ds))
    xs = np.empty((n_steps + 1, 3))
    vs = np.empty((n_steps + 1, 3))
    xs[0], vs[0] = x[0], v[0]
    bmax = float(np.max(b0))
    check_step(ds, bmax, eps)
    for i in range(n_steps):
        b = np.atleast_1d(eval_b(model, 0.0, x[:, :2]))
        boris_push(x, v, E_func(x), b, eps, ds, (), kern, check=False)
        xs[i + 1], vs[i + 1] = x[0], v[0]
    check_step(ds, float(np.max(model.value(xs[:, :2]))), eps)
    return ds * np.arange(n_steps + 1), xs, vs


# -- particle-in-cell ---------------------------------------------------------


def deposit_charge(ensemble: FullParticleEnsemble, grid: TorusGrid, kern=None) -> ScalarField:
    """Cloud-in-cell charge density; ``sum(rho) * cell_volume`` is the total weight."""
    kern = kern or _kernels
    nodes = kern.deposit_cic(ensemble.x, ensemble.weights, grid.counts, grid.spacing)
    return ScalarField(grid, nodes / grid.cell_volume)


@dataclass
class PICState:
    ensemble: FullParticleEnsemble
    grid: TorusGrid
    phi: ScalarField
    E: VectorField
    eps: float
    model: MagneticFieldModel
    background: float
    s: float = 0.0
    step: int = 0
    displacement: np.ndarray | None = None
    kern: object = None

    @property
    def t(self) -> float:
        return self.eps * self.s

    def field_at_markers(self) -> np.ndarray:
        kern = self.kern or _kernels
        d = self.grid.dim
        pos = np.ascontiguousarray(self.ensemble.x[:, :d])
        e = kern.gather_cic(np.ascontiguousarray(self.E.values), pos, self.grid.spacing)
        out = np.zeros((self.ensemble.count, 3))
        out[:, :d] = e
        return out


def make_pic_state(
    ensemble: FullParticleEnsemble,
    grid: TorusGrid,
    eps: float,
    model: MagneticFieldModel,
    ds: float,
    background: float | None = None,
    kern=None,
) -> PICState:
    """Deposit, solve and stagger the velocities half a step back.

    ``background`` defaults to the mean deposited density (neutral plasma).
    The guard ``ds * b_max / eps <= 0.5`` is checked here.
    """
    if tuple(ensemble.lengths[: grid.dim]) != tuple(grid.lengths):
        raise ValueError("ensemble box does not match the grid")
    b = eval_b(model, 0.0, ensemble.x[:, :2])
    check_step(ds, float(np.max(b)), eps)
    rho = deposit_charge(ensemble, grid, kern)
    bg = rho.mean() if background is None else float(background)
    phi, E = solve_poisson(rho, background=bg)
    state = PICState(ensemble, grid, phi, E, eps, model, bg, kern=kern)
    state.displacement = np.zeros((ensemble.count, 3))
    state.ensemble.v[:] = half_step_back(state.ensemble.v, state.field_at_markers(), b, eps, ds)
    return state


def step_pic(state: PICState, ds: float) -> PICState:
    """Push with the current field, then deposit and re-solve (self-consistent)."""
    ens = state.ensemble
    kern = state.kern or _kernels
    b = np.ascontiguousarray(np.atleast_1d(eval_b(state.model, state.t, ens.x[:, :2])))
    E = state.field_at_markers()
    x_old = ens.x.copy()
    boris_push(ens.x, ens.v, E, b, state.eps, ds, ens.lengths, kern, check=False)
    if not np.all(np.isfinite(ens.x)):
        # never hand non-finite positions to the deposition kernels
        raise FloatingPointError(f"non-finite marker positions after step {state.step + 1}")
    L = np.asarray(ens.lengths)
    jump = ens.x - x_old
    jump -= L * np.round(jump / L)
    state.displacement += jump
    rho = deposit_charge(ens, state.grid, kern)
    state.phi, state.E = solve_poisson(rho, background=state.background)
    state.s += ds
    state.step += 1
    return state


def pic_record(state: PICState) -> DiagnosticsRecord:
    kin, fld, _ = energy_full(state.ensemble, state.E)
    drift = (math.nan, math.nan)
    if state.s > 0.0:
        mean = np.average(state.displacement[:, :2], axis=0, weights=state.ensemble.weights)
        drift = tuple(mean / state.t)
    return DiagnosticsRecord(
        t=state.t,
        s=state.s,
        kinetic_energy=kin,
        field_energy=fld,
        mass=state.ensemble.total_weight(),
        L1=state.ensemble.total_weight(),
        min_value=float(state.ensemble.weights.min()) if state.ensemble.count else math.nan,
        drift_estimate=drift,
    )


@dataclass
class PICConfig:
    """Full-kinetic run setup (fast-time step ``ds``; ``None`` = gyroperiod/64)."""

    eps: float = 0.05
    grid_lengths: tuple = (2.0 * math.pi, 2.0 * math.pi)
    grid_counts: tuple = (32, 8)
    initial: InitialSpec = field(default_factory=InitialSpec)
    n_particles: int = 4096
    seed: int = 0
    ds: float | None = None
    t_end: float = 1.0
    output_every: int = 64
    snapshot_every: int = 0
    model: MagneticFieldModel = field(default_factory=MagneticFieldModel)

    def step_size(self) -> float:
        if self.ds is not None:
            return float(self.ds)
        return default_step(self.eps, self.model.b0 + max(self.model.amplitude, 0.0))


@dataclass
class PICResult:
    records: list
    state: PICState
    snapshots: list = field(default_factory=list)


def _snapshot(state: PICState, out_dir: Path) -> Path:
    base = out_dir / f"snapshot_{state.step}"
    export_raw(state.phi.values, state.grid, base.with_suffix(".phi.raw"))
    np.ascontiguousarray(state.ensemble.x, dtype="<f8").tofile(base.with_suffix(".x.raw"))
    np.ascontiguousarray(state.ensemble.v, dtype="<f8").tofile(base.with_suffix(".v.raw"))
    meta = {
        "step": state.step,
        "s": state.s,
        "t": state.t,
        "eps": state.eps,
        "n_particles": state.ensemble.count,
        "phi": base.with_suffix(".phi.raw").name,
        "positions": base.with_suffix(".x.raw").name,
        "velocities": base.with_suffix(".v.raw").name,
        "dtype": "<f8",
    }
    path = base.with_suffix(".json")
    path.write_text(json.dumps(meta, indent=2))
    return path


def run_full_kinetic(config: PICConfig, out_dir=None, kern=None) -> PICResult:
    """PIC run from ``t = 0`` to ``t_end`` (rounded to whole steps).

    Writes ``diagnostics.csv`` and scheduled snapshots when ``out_dir`` is
    given. Non-finite values abort with :class:`SolverFailure` after the
    records so far are written.
    """
    grid = TorusGrid(config.grid_lengths, config.grid_counts)
    ds = config.step_size()
    ens = sample_initial(config.initial, config.n_particles, config.seed)
    state = make_pic_state(ens, grid, config.eps, config.model, ds, config.initial.rho0, kern)
    n_steps = int(round(config.t_end / (config.eps * ds)))
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    records = [pic_record(state)]
    snaps = []
    every = max(1, int(config.output_every))
    try:
        for i in range(1, n_steps + 1):
            try:
                step_pic(state, ds)
            except FloatingPointError as exc:
                raise SolverFailure(str(exc), {"error": "non-finite", "step": i, "s": state.s, "t": state.t}) from exc
            if not (np.all(np.isfinite(state.ensemble.v)) and np.all(np.isfinite(state.E.values))):
                raise SolverFailure(
                    f"non-finite state at step {i}",
                    {"error": "non-finite", "step": i, "s": state.s, "t": state.t},
                )
            if i % every == 0 or i == n_steps:
                records.append(pic_record(state))
            if out is not None and config.snapshot_every and i % config.snapshot_every == 0:
                snaps.append(_snapshot(state, out))
    except SolverFailure as exc:
        if out is not None:
            write_diagnostics_csv(records, out / "diagnostics.csv")
            (out / "error.json").write_text(json.dumps(exc.record, indent=2))
        raise
    if out is not None:
        write_diagnostics_csv(records, out / "diagnostics.csv")
    return PICResult(records, state, snaps)


# -- Hilbert defect -----------------------------------------------------------


@dataclass
class DefectReport:
    norm: float
    parallel_residual: float
    order0_residual: float
    field: np.ndarray | None = None


def assemble_expansion(F: ReducedDistribution, f1: GyroResolved, eps: float) -> np.ndarray:
    """``F + eps f1`` on the ``(x, w, theta, v_par)`` grid."""
    return F.values[..., :, None, :] + eps * f1.values


def hilbert_defect(
    F: ReducedDistribution,
    f1: GyroResolved,
    phi_F: ScalarField,
    phi_P: ScalarField | None,
    b: MagneticFieldModel,
    eps: float,
    dFdt: np.ndarray | None = None,
    df1dt: np.ndarray | None = None,
    tol: float = DEFAULT_SOLVABILITY_TOL,
    keep_field: bool = False,
) -> DefectReport:
    """Discrete L2 norm of the full kinetic operator applied to ``F + eps f1``.

    The operator is ``eps d/dt + w e_w . grad_perp + v_par d/dx_par
    + E_perp . (e_w d/dw + e_theta (1/w) d/dtheta) + E_par d/dv_par
    - (1/eps) b d/dtheta`` with ``E = -grad(phi_F + eps phi_P)``. The ``1/w``
    term is set to zero on the ``w = 0`` nodes (measure zero). Norm measure:
    ``w dw dtheta dv_par dx``.

    Raises:
        NotSolvableError: when either solvability residual exceeds ``tol``.
    """
    from .gyro import _ddw, b_on_grid

    _, par = solvability_residual_parallel(F, phi_F)
    if par > tol:
        raise NotSolvableError(par, tol)
    P = ReducedDistribution(F.grid, F.velocity, f1.gyroaverage(), F.chart)
    _, o0 = solvability_residual_order0(F, P, phi_F, phi_P, b, dFdt)
    if o0 > tol:
        raise NotSolvableError(o0, tol)

    grid = F.grid
    d = grid.dim
    ax_w, ax_th, ax_v = d, d + 1, d + 2
    f = assemble_expansion(F, f1, eps)
    th = f1.theta
    w = F.velocity.w
    cos = np.cos(th)[None, :, None]
    sin = np.sin(th)[None, :, None]
    wcol = w[:, None, None]

    phi = phi_F.values if phi_P is None else phi_F.values + eps * phi_P.values
    gphi = perp_gradient(phi, grid)

    def sp(a):
        return a[(...,) + (None, None, None)]

    Ex, Ey = sp(-gphi[0]), sp(-gphi[1])
    gf = perp_gradient(f, grid)
    dfdw = _ddw(f, F.velocity.dperp, ax_w)
    dfdth = dtheta_spectral(f, axis=ax_th)
    inv_w = np.where(w > 0.0, 1.0 / np.where(w > 0.0, w, 1.0), 0.0)[:, None, None]

    out = wcol * (cos * gf[0] + sin * gf[1])
    out += (Ex * cos + Ey * sin) * dfdw
    out += (-Ex * sin + Ey * cos) * inv_w * dfdth
    out -= sp(b_on_grid(b, grid)) / eps * dfdth
    if d == 3:
        vp = F.velocity.v_par[None, None, :]
        out += vp * parallel_derivative(f, grid)
        Ez = sp(-parallel_derivative(phi, grid))
        out += Ez * _ddw(f, F.velocity.dv, ax_v)
    if dFdt is not None:
        out += eps * dFdt[..., :, None, :]
    if df1dt is not None:
        out += eps * eps * df1dt

    from .distribution import trapezoid_weights

    wts = (trapezoid_weights(w) * w)[:, None, None] * trapezoid_weights(F.velocity.v_par)[None, None, :]
    wts = wts * (2.0 * math.pi / f1.n_theta)
    norm = math.sqrt(float(np.sum(out**2 * wts) * grid.cell_volume))
    return DefectReport(norm, par, o0, out if keep_field else None)

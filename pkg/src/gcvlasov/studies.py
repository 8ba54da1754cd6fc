"""Reusable numerical experiments shared by the CLI and the test-suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import Trajectory, drift_measurement
from .distribution import VelocityGrid
from .fields import MagneticFieldModel
from .guiding_center import (
    AnalyticPotential,
    GriddedPotential,
    GuidingCenterState,
    gradb_velocity,
    integrate_drift_orbit,
    maxwellian_family,
)
from .gyro import construct_f1
from .kinetic import (
    InitialSpec,
    default_step,
    hilbert_defect,
    make_pic_state,
    pic_record,
    push_orbit,
    sample_initial,
    step_pic,
)
from .poisson import ScalarField, TorusGrid, solve_poisson


@dataclass
class DriftResult:
    eps: float
    measured: np.ndarray
    predicted: np.ndarray

    @property
    def rel_error(self) -> float:
        return float(np.linalg.norm(self.measured - self.predicted) / np.linalg.norm(self.predicted))


def exb_drift(eps: float, e0: float = 1.0, w: float = 1.0, n_periods: int = 10, per_period: int = 64, kern=None):
    """Full orbit in ``E = (-e0, 0, 0)``, ``b = 1``; drift in slow time.

    The particle starts on the gyro-ring of a guiding centre at the origin,
    with the ``E x B`` velocity ``eps (E_y, -E_x) / b`` added.
    """
    model = MagneticFieldModel("uniform", b0=1.0, alpha=0.5)
    ds = default_step(eps, 1.0, per_period)
    v0 = np.array([w, eps * e0, 0.0])
    x0 = np.array([0.0, eps * w, 0.0])
    field = np.array([-e0, 0.0, 0.0])
    s, xs, _ = push_orbit(x0, v0, lambda x: np.tile(field, (len(x), 1)), model, eps, ds, per_period * n_periods + 4, kern)
    d = drift_measurement(Trajectory(s, xs[:, :2], eps), 2.0 * math.pi * eps, n_periods)
    return DriftResult(eps, d, np.array([0.0, e0]))


def gradb_drift(eps: float, grad: float = 0.1, w: float = 1.0, n_periods: int = 10, per_period: int = 64, kern=None):
    """Full orbit in ``b = 1 + grad x`` with ``E = 0`` against the grad-B drift.

    The gyroperiod used to align the window comes from ``b`` at the mean
    orbit position.
    """
    model = MagneticFieldModel("linear-ramp", b0=1.0, grad=(grad, 0.0), alpha=0.5)
    ds = default_step(eps, 1.0, per_period)
    x0 = np.array([0.0, eps * w, 0.0])
    v0 = np.array([w, 0.0, 0.0])
    s, xs, _ = push_orbit(
        x0, v0, lambda x: np.zeros((len(x), 3)), model, eps, ds, per_period * (n_periods + 1), kern
    )
    b_mean = float(model.value(xs[:, :2].mean(axis=0)))
    d = drift_measurement(Trajectory(s, xs[:, :2], eps), 2.0 * math.pi * eps / b_mean, n_periods)
    gc = np.zeros(2)
    pred = gradb_velocity(w, model.gradient(gc), model.value(gc))
    return DriftResult(eps, d, pred)


def bump_model() -> MagneticFieldModel:
    return MagneticFieldModel("smooth-periodic-bump", b0=1.0, alpha=0.5, amplitude=0.5)


def mu_potential() -> AnalyticPotential:
    return AnalyticPotential("modes", (0.3, 1.0, 0.0, 0.0, 0.2, 0.0, 1.0, 0.5, 0.1, 1.0, 1.0, 0.3))


def default_orbit_states() -> GuidingCenterState:
    x = np.array([[1.0, 2.0], [3.5, 1.0], [2.0, 4.5], [5.0, 5.0]])
    return GuidingCenterState(x, np.array([1.0, 0.5, 2.0, 1.5]))


def mu_drift(dt: float, T: float = 10.0, states=None, model=None, potential=None):
    """Max relative change of ``mu`` over drift orbits in a static bump field."""
    states = states or default_orbit_states()
    orbit = integrate_drift_orbit(states, potential or mu_potential(), model or bump_model(), T, dt)
    mu0 = orbit.mu[0]
    err = np.abs(orbit.mu - mu0) / np.maximum(mu0, 1e-12)
    return float(err.max()), orbit


def vortex_family(n: int = 16, n_w: int = 64, n_v: int = 32, n_theta: int = 8, delta: float = 0.2, rho0: float = 1.0):
    """Steady vortex: ``G = rho0 + phi``, ``phi = delta (cos x + cos y)``, ``b = 1``.

    ``-Laplace(phi) = phi = G - rho0`` so the Poisson solve is consistent and
    ``U . grad G = 0`` pointwise.
    """
    grid = TorusGrid.cube(n, 2)
    X, Y = grid.mesh()
    G = rho0 + delta * (np.cos(X) + np.cos(Y))
    vel = VelocityGrid.uniform(n_w, 8.0, n_v, 8.0)
    F = maxwellian_family(grid, vel, G)
    phi, _ = solve_poisson(ScalarField(grid, G), background=rho0)
    model = MagneticFieldModel()
    f1 = construct_f1(F, phi, model, None, n_theta)
    return F, f1, phi, model


def defect_scan(eps_list, **family):
    F, f1, phi, model = vortex_family(**family)
    return [hilbert_defect(F, f1, phi, None, model, e).norm for e in eps_list]


@dataclass
class PICComparison:
    eps: float
    error: float
    energy_drift: float
    t_end: float
    n_particles: int


def pic_gc_error(
    eps: float,
    counts=(128, 8),
    lattice=(128, 8, 1),
    n_phases: int = 8,
    delta: float = 0.5,
    t_target: float = 1.0,
    per_period: int = 64,
    kern=None,
) -> PICComparison:
    """Marker displacement from a PIC run against the drift-orbit prediction.

    Quiet start: a lattice of sites with density ``1 + delta cos x`` and a
    ring ``w = 1`` of ``n_phases`` gyrophases per site, ``b = 1``, neutralising
    background. The run stops at the whole number of gyroperiods closest to
    ``t_target``. The prediction integrates the drift orbit of every marker in
    the frozen initial potential. Error: RMS deviation over RMS prediction.
    """
    L = 2.0 * math.pi
    spec = InitialSpec(
        density="cosine",
        rho0=1.0,
        delta=delta,
        velocity="ring",
        ring_speed=1.0,
        sampling="quiet",
        n_phases=n_phases,
        lattice=tuple(lattice),
        lengths=(L, L, L),
    )
    ens = sample_initial(spec, int(np.prod(lattice)) * n_phases, 0)
    grid = TorusGrid((L, L), counts)
    model = MagneticFieldModel("uniform", 1.0, 0.5)
    ds = default_step(eps, 1.0, per_period)
    state = make_pic_state(ens, grid, eps, model, ds, 1.0, kern)
    potential = GriddedPotential(state.phi)
    x0 = ens.x[:, :2].copy()
    period_t = 2.0 * math.pi * eps * eps
    n_periods = max(1, round(t_target / period_t))
    t_end = n_periods * period_t
    e0 = pic_record(state).total_energy
    drift = 0.0
    for i in range(per_period * n_periods):
        step_pic(state, ds)
        if (i + 1) % per_period == 0:
            e = pic_record(state).total_energy
            if abs(e - e0) > abs(drift) * abs(e0):
                drift = (e - e0) / e0
    orbit = integrate_drift_orbit(GuidingCenterState(x0, np.ones(len(x0))), potential, model, t_end, t_end / 16)
    pred = orbit.x[-1] - orbit.x[0]
    meas = state.displacement[:, :2]
    err = math.sqrt(np.mean((meas - pred) ** 2)) / math.sqrt(np.mean(pred**2))
    return PICComparison(eps, err, drift, t_end, ens.count)

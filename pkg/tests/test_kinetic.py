import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from gcvlasov.distribution import ReducedDistribution, VelocityGrid, maxwellian
from gcvlasov.diagnostics import Trajectory, drift_measurement
from gcvlasov.fields import MagneticFieldModel
from gcvlasov.guiding_center import gradb_velocity
from gcvlasov.gyro import NotSolvableError, construct_f1
from gcvlasov.kinetic import (
    ConfigurationError,
    FullParticleEnsemble,
    InitialSpec,
    InvalidSpecError,
    PICConfig,
    SolverFailure,
    boris_push,
    check_step,
    default_step,
    deposit_charge,
    hilbert_defect,
    lorentz_rhs,
    make_pic_state,
    pic_record,
    push_orbit,
    run_full_kinetic,
    sample_initial,
    step_pic,
)
from gcvlasov.poisson import ScalarField, TorusGrid

UNIFORM = MagneticFieldModel()
L3 = (2 * math.pi,) * 3


# -- sampling ---------------------------------------------------------------------


def test_maxwellian_sample_mean():
    ens = sample_initial(InitialSpec(), 100_000, seed=1)
    assert np.linalg.norm(ens.v.mean(axis=0)) <= 0.02
    assert ens.v.var(axis=0) == pytest.approx([1.0, 1.0, 1.0], abs=0.02)
    assert ens.total_weight() == pytest.approx((2 * math.pi) ** 3, rel=1e-12)


def test_delta_sample_copies():
    ens = sample_initial(InitialSpec(velocity="delta", drift=(0.5, -1.0, 2.0)), 50, seed=3)
    assert np.all(ens.v == [0.5, -1.0, 2.0])


def test_ring_sample_speed():
    ens = sample_initial(InitialSpec(velocity="ring", ring_speed=1.0, v_par=0.3), 1000, seed=2)
    assert np.allclose(np.hypot(ens.v[:, 0], ens.v[:, 1]), 1.0, atol=1e-15)
    assert np.all(ens.v[:, 2] == 0.3)


def test_sampling_is_deterministic():
    a = sample_initial(InitialSpec(density="cosine", delta=0.3), 500, seed=7)
    b = sample_initial(InitialSpec(density="cosine", delta=0.3), 500, seed=7)
    c = sample_initial(InitialSpec(density="cosine", delta=0.3), 500, seed=8)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v) and np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.x, c.x)


def test_quiet_start_layout():
    spec = InitialSpec(density="cosine", delta=0.5, velocity="ring", sampling="quiet", n_phases=4, lattice=(8, 2, 1))
    ens = sample_initial(spec, 64, 0)
    assert ens.count == 64
    assert np.allclose(ens.x[:4], ens.x[0])
    th = np.arctan2(ens.v[:4, 1], ens.v[:4, 0]) % (2 * math.pi)
    assert np.allclose(th, [0, math.pi / 2, math.pi, 3 * math.pi / 2])
    # weights follow 1 + delta cos x and sum to rho0 * volume
    x = ens.x[:, 0]
    ratio = ens.weights / (1 + 0.5 * np.cos(x))
    assert np.ptp(ratio) <= 1e-14 * ratio.max()
    assert ens.total_weight() == pytest.approx(float(np.prod(L3)), rel=1e-13)


@pytest.mark.parametrize(
    "spec",
    [
        InitialSpec(density="cosine", delta=1.5),
        InitialSpec(rho0=0.0),
        InitialSpec(vth=-1.0),
        InitialSpec(velocity="kappa"),
        InitialSpec(sampling="quiet", velocity="ring", n_phases=3),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpecError):
        sample_initial(spec, 16, 0)


# -- single particle ------------------------------------------------------------


def test_lorentz_rhs_examples():
    _, dv = lorentz_rhs(np.zeros(3), np.array([1.0, 0.0, 0.0]), np.zeros(3), 1.0, 0.1)
    assert np.allclose(dv, [0.0, -10.0, 0.0])
    eps = 0.1
    _, dv = lorentz_rhs(np.zeros(3), np.array([0.0, eps, 0.0]), np.array([-1.0, 0.0, 0.0]), 1.0, eps)
    assert np.abs(dv).max() <= 1e-15
    _, dv = lorentz_rhs(np.zeros(3), np.array([0.3, -0.7, 2.0]), np.array([0.0, 0.0, -1.0]), 1.0, 0.05)
    assert dv[2] == -1.0


def test_boris_speed_conserved_without_field():
    rng = np.random.default_rng(0)
    x = rng.random((200, 3))
    v = rng.standard_normal((200, 3))
    w0 = np.hypot(v[:, 0], v[:, 1])
    for _ in range(100):
        boris_push(x, v, np.zeros(3), 1.0, 0.1, 0.01, L3)
        assert np.abs(np.hypot(v[:, 0], v[:, 1]) - w0).max() <= 1e-12 * w0.max()


def gyro_orbit(ds, n):
    E0 = lambda x: np.zeros((len(x), 3))  # noqa: E731
    return push_orbit(np.zeros(3), np.array([1.0, 0.0, 0.0]), E0, UNIFORM, 0.1, ds, n)


def test_boris_one_gyroperiod_against_ode_oracle():
    eps = 0.1

    def rhs(s, z):
        return [z[3], z[4], z[5], z[4] / eps, -z[3] / eps, 0.0]

    errs = []
    for ds, n in ((0.01, 628), (0.005, 1256)):
        s, xs, vs = gyro_orbit(ds, n)
        ref = solve_ivp(rhs, (0, s[-1]), [0, 0, 0, 1, 0, 0], rtol=1e-12, atol=1e-14).y[:3, -1]
        assert np.abs(np.hypot(vs[:, 0], vs[:, 1]) - 1.0).max() <= 1e-12
        errs.append(np.linalg.norm(xs[-1] - ref))
    assert errs[0] < 1e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_parallel_streaming():
    E0 = lambda x: np.zeros((len(x), 3))  # noqa: E731
    s, xs, _ = push_orbit(np.zeros(3), np.array([0.0, 0.0, 3.0]), E0, UNIFORM, 0.1, 0.01, 10)
    assert np.allclose(np.diff(xs[:, 2]), 0.03, atol=1e-15)
    assert np.all(xs[:, :2] == 0.0)


def test_step_guard():
    check_step(0.05, 1.0, 0.1)
    with pytest.raises(ConfigurationError):
        check_step(0.051, 1.0, 0.1)
    assert default_step(0.1, 2.0) * 2.0 / 0.1 == pytest.approx(2 * math.pi / 64)
    x = np.zeros((1, 3))
    with pytest.raises(ConfigurationError):
        boris_push(x, np.zeros((1, 3)), np.zeros(3), 1.0, 0.01, 0.1)


def drift_in_combined_field(eps, n_periods=10, per_period=64):
    ramp = MagneticFieldModel("linear-ramp", grad=(0.1, 0.0), alpha=0.5)
    field = np.array([-1.0, 0.0, 0.0])
    ds = default_step(eps, 1.0, per_period)
    x0 = np.array([0.0, eps, 0.0])
    v0 = np.array([1.0, eps, 0.0])
    s, xs, _ = push_orbit(x0, v0, lambda x: np.tile(field, (len(x), 1)), ramp, eps, ds, per_period * (n_periods + 1))
    b_mean = float(ramp.value(xs[:, :2].mean(axis=0)))
    d = drift_measurement(Trajectory(s, xs[:, :2], eps), 2 * math.pi * eps / b_mean, n_periods)
    pred = np.array([0.0, 1.0]) + gradb_velocity(1.0, ramp.gradient(np.zeros(2)), 1.0)
    return np.linalg.norm(d - pred) / np.linalg.norm(pred)


def test_drift_in_uniform_E_plus_ramp():
    e1, e2 = drift_in_combined_field(0.05), drift_in_combined_field(0.025)
    assert e1 <= 0.05 and e2 < e1


# -- deposition -------------------------------------------------------------------


def ens_from(x, w):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return FullParticleEnsemble(x, np.zeros_like(x), np.asarray(w, dtype=float), L3, 0)


def test_deposit_at_node():
    grid = TorusGrid.cube(8, 3)
    h = grid.spacing[0]
    rho = deposit_charge(ens_from([[2 * h, 3 * h, h]], [2.0]), grid)
    nodes = rho.values * grid.cell_volume
    assert nodes[2, 3, 1] == pytest.approx(2.0, abs=1e-14)
    assert np.count_nonzero(np.abs(nodes) > 1e-15) == 1


def test_deposit_cell_centre():
    grid = TorusGrid.cube(8, 3)
    h = grid.spacing[0]
    nodes = deposit_charge(ens_from([[7.5 * h, 0.5 * h, 3.5 * h]], [1.0]), grid).values * grid.cell_volume
    assert np.allclose(nodes[np.ix_([7, 0], [0, 1], [3, 4])], 0.125, atol=1e-15)
    assert nodes.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("dim", [2, 3])
def test_deposit_total(dim):
    rng = np.random.default_rng(4)
    grid = TorusGrid.cube(16, dim)
    ens = ens_from(rng.random((5000, 3)) * 2 * math.pi, rng.random(5000))
    rho = deposit_charge(ens, grid)
    assert rho.values.sum() * grid.cell_volume == pytest.approx(ens.total_weight(), rel=1e-12)


# -- PIC --------------------------------------------------------------------------


def quiet_ring(lattice=(16, 16, 1), delta=0.0, n_phases=4):
    spec = InitialSpec(
        density="cosine", delta=delta, velocity="ring", sampling="quiet", n_phases=n_phases, lattice=lattice
    )
    return sample_initial(spec, int(np.prod(lattice)) * n_phases, 0)


def test_zero_field_equilibrium():
    ens = quiet_ring()
    grid = TorusGrid.cube(16, 2)
    eps = 0.1
    ds = default_step(eps, 1.0)
    state = make_pic_state(ens, grid, eps, UNIFORM, ds, 1.0)
    w0 = ens.total_weight()
    q0 = state.E.values
    assert np.abs(q0).max() <= 1e-10
    for _ in range(200):
        step_pic(state, ds)
        assert np.abs(state.E.values).max() <= 1e-10
    assert state.ensemble.total_weight() == w0


def test_charge_conserved_over_1000_steps():
    ens = sample_initial(InitialSpec(density="cosine", delta=0.2), 2000, seed=5)
    grid = TorusGrid.cube(16, 2)
    eps = 0.2
    ds = default_step(eps, 1.0)
    state = make_pic_state(ens, grid, eps, UNIFORM, ds)
    q0 = deposit_charge(state.ensemble, grid).values.sum() * grid.cell_volume
    w0 = state.ensemble.weights.copy()
    for _ in range(1000):
        step_pic(state, ds)
    q1 = deposit_charge(state.ensemble, grid).values.sum() * grid.cell_volume
    assert np.array_equal(state.ensemble.weights, w0)
    assert q1 == pytest.approx(q0, rel=1e-12)
    assert np.all((state.ensemble.x >= 0) & (state.ensemble.x < 2 * math.pi))
    assert state.t == pytest.approx(eps * 1000 * ds)


def test_strong_field_freezes_perpendicular_energy():
    ens = quiet_ring(lattice=(32, 4, 1), delta=1e-3, n_phases=8)
    grid = TorusGrid((2 * math.pi, 2 * math.pi), (32, 8))
    eps = 0.05
    ds = default_step(eps, 1.0)
    state = make_pic_state(ens, grid, eps, UNIFORM, ds, 1.0)

    def perp():
        return 0.5 * float(np.sum(state.ensemble.weights * (state.ensemble.v[:, 0] ** 2 + state.ensemble.v[:, 1] ** 2)))

    e0 = perp()
    for _ in range(640):
        step_pic(state, ds)
    assert abs(perp() - e0) <= 0.01 * e0


def test_energy_bounded_over_unit_time():
    spec = InitialSpec(density="cosine", delta=0.5, velocity="ring", sampling="quiet", n_phases=8, lattice=(64, 8, 1))
    cfg = PICConfig(eps=0.1, grid_counts=(64, 8), initial=spec, n_particles=64 * 8 * 8, t_end=1.0)
    res = run_full_kinetic(cfg)
    tot = np.array([r.total_energy for r in res.records])
    assert np.all(tot <= tot[0] * 1.01)
    assert np.abs(tot - tot[0]).max() <= 0.01 * tot[0]
    # t_end is rounded to a whole number of steps
    assert abs(res.records[-1].t - 1.0) <= 0.5 * cfg.eps * cfg.step_size()


def test_zero_perturbation_keeps_fields_quiet(tmp_path):
    spec = InitialSpec(density="uniform", velocity="ring", sampling="quiet", n_phases=4, lattice=(16, 16, 1))
    cfg = PICConfig(eps=0.1, grid_counts=(16, 16), initial=spec, n_particles=1024, t_end=0.2)
    res = run_full_kinetic(cfg, tmp_path)
    assert max(r.field_energy for r in res.records) <= 1e-10
    assert (tmp_path / "diagnostics.csv").exists()


def test_determinism(tmp_path):
    spec = InitialSpec(density="cosine", delta=0.3)
    cfg = PICConfig(eps=0.2, grid_counts=(16, 8), initial=spec, n_particles=512, seed=11, t_end=0.5, snapshot_every=50)
    run_full_kinetic(cfg, tmp_path / "a")
    run_full_kinetic(cfg, tmp_path / "b")
    a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    assert a == (tmp_path / "b" / "diagnostics.csv").read_bytes()
    meta = json.loads((tmp_path / "a" / "snapshot_50.json").read_text())
    x = np.fromfile(tmp_path / "a" / meta["positions"], dtype="<f8").reshape(-1, 3)
    assert x.shape == (512, 3)


def test_nan_aborts_with_error_record(tmp_path):
    spec = InitialSpec(velocity="delta", drift=(math.nan, 0.0, 0.0))
    cfg = PICConfig(eps=0.2, grid_counts=(8, 8), initial=spec, n_particles=64, t_end=0.1)
    with pytest.raises(SolverFailure):
        run_full_kinetic(cfg, tmp_path)
    err = json.loads((tmp_path / "error.json").read_text())
    assert err["error"] == "non-finite" and err["step"] == 1
    assert (tmp_path / "diagnostics.csv").read_text().startswith("t,s,")


def test_pic_record_columns():
    ens = quiet_ring()
    state = make_pic_state(ens, TorusGrid.cube(16, 2), 0.1, UNIFORM, default_step(0.1, 1.0), 1.0)
    rec = pic_record(state)
    assert rec.total_energy == rec.kinetic_energy + rec.field_energy
    assert rec.mass == pytest.approx(ens.total_weight())


# -- Hilbert defect ------------------------------------------------------------------


def test_defect_vanishes_for_uniform_maxwellian():
    grid = TorusGrid.cube(8, 2)
    vel = VelocityGrid.uniform(32, 8.0, 16, 8.0)
    F = ReducedDistribution.from_function(grid, vel, lambda x, y, w, v: maxwellian(w, v) + 0 * x)
    zero = ScalarField(grid, np.zeros(grid.counts))
    f1 = construct_f1(F, zero, UNIFORM, None, 8)
    for eps in (0.1, 0.01):
        assert hilbert_defect(F, f1, zero, None, UNIFORM, eps).norm <= 1e-14


def test_defect_rejects_unsolvable_data():
    grid = TorusGrid.cube(8, 2)
    vel = VelocityGrid.uniform(16, 6.0, 8, 6.0)
    X, Y = grid.mesh()
    F = ReducedDistribution.from_function(grid, vel, lambda x, y, w, v: np.exp(-(w**2) - v**2) * (2 + np.cos(x)))
    phi = ScalarField(grid, 0.3 * np.cos(Y))  # U is not tangent to the level sets of F
    f1 = construct_f1(F, phi, UNIFORM, None, 8)
    with pytest.raises(NotSolvableError):
        hilbert_defect(F, f1, phi, None, UNIFORM, 0.1)

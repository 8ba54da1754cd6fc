import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcvlasov.fields import (
    FieldModelViolation,
    InvalidParameterError,
    MagneticFieldModel,
    ScalingParameters,
    epsilon_from_scales,
    eval_b,
    grad_b,
    validate_field,
    validation_lattice,
)


def scales(wp, wc):
    return ScalingParameters(1.0, 1.0, wp, wc)


@pytest.mark.parametrize("wp, wc, eps", [(1.0, 10.0, 0.1), (3.0, 3.0, 1.0), (2.0, 40.0, 0.05)])
def test_epsilon_examples(wp, wc, eps):
    assert epsilon_from_scales(scales(wp, wc)) == pytest.approx(eps, rel=1e-15)


def test_epsilon_equals_inverse_long_time_frequency():
    s = scales(2.0, 40.0)
    assert epsilon_from_scales(s) == pytest.approx(1.0 / (s.long_time_scale * s.plasma_frequency))


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_nonpositive_scales_rejected(bad):
    with pytest.raises(InvalidParameterError):
        scales(bad, 1.0)
    with pytest.raises(InvalidParameterError):
        ScalingParameters(bad, 1.0, 1.0, 1.0)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_epsilon_scale_invariant(wp, wc, lam):
    a = epsilon_from_scales(scales(wp, wc))
    b = epsilon_from_scales(scales(lam * wp, lam * wc))
    assert b == pytest.approx(a, rel=1e-13)


def test_eval_b_examples():
    assert eval_b(MagneticFieldModel(), 0.0, [3.0, -7.0]) == 1.0
    ramp = MagneticFieldModel("linear-ramp", b0=1.0, grad=(0.1, 0.0))
    assert eval_b(ramp, 0.0, [2.0, 5.0]) == pytest.approx(1.2, abs=1e-15)
    bump = MagneticFieldModel("smooth-periodic-bump", b0=1.0, amplitude=0.2)
    assert eval_b(bump, 0.0, bump.center) == pytest.approx(1.2, abs=1e-15)


def test_eval_b_violation_names_point():
    ramp = MagneticFieldModel("linear-ramp", b0=1.0, grad=(0.1, 0.0), alpha=0.5)
    with pytest.raises(FieldModelViolation, match="x_perp"):
        eval_b(ramp, 0.0, [-6.0, 0.0])


def test_grad_b_examples():
    assert np.array_equal(grad_b(MagneticFieldModel(), 0.0, [1.0, 2.0]), [0.0, 0.0])
    ramp = MagneticFieldModel("linear-ramp", grad=(0.1, 0.0))
    assert np.allclose(grad_b(ramp, 0.0, [4.0, 1.0]), [0.1, 0.0], atol=0)
    bump = MagneticFieldModel("smooth-periodic-bump", amplitude=0.2)
    assert np.allclose(grad_b(bump, 0.0, bump.center), [0.0, 0.0], atol=1e-16)


def test_validate_examples():
    rep = validate_field(MagneticFieldModel(alpha=0.5), validation_lattice((0, 0), (1, 1), 5))
    assert rep.passed and rep.min_b == 1.0
    ramp = MagneticFieldModel("linear-ramp", b0=1.0, grad=(0.1, 0.0), alpha=0.5)
    rep = validate_field(ramp, validation_lattice((-7.0, 0.0), (0.0, 1.0), 8))
    assert not rep.passed and rep.min_b == pytest.approx(0.3)
    assert "FAIL" in rep.summary()


def test_validate_bump_against_lattice_scan():
    bump = MagneticFieldModel("smooth-periodic-bump", amplitude=0.2, alpha=0.5)
    pts = validation_lattice((0.0, 0.0), (2 * math.pi, 2 * math.pi), 65)
    rep = validate_field(bump, pts)
    # independent scan: b = 1 + 0.2 px py has gradient magnitude <= 0.1 * sqrt(2)
    b = np.array([1.0 + 0.2 * 0.25 * (1 + math.cos(x - math.pi)) * (1 + math.cos(y - math.pi)) for x, y in pts])
    assert rep.passed
    assert rep.min_b == pytest.approx(b.min(), abs=1e-15)
    assert 0.0 < rep.max_grad_b <= 0.1 * math.sqrt(2.0)


def test_empty_lattice_rejected():
    with pytest.raises(InvalidParameterError):
        validate_field(MagneticFieldModel(), np.empty((0, 2)))


MODELS = [
    MagneticFieldModel("linear-ramp", b0=2.0, grad=(0.1, -0.3), alpha=0.1),
    MagneticFieldModel("smooth-periodic-bump", b0=1.0, amplitude=0.4, center=(1.0, 2.0), lengths=(5.0, 7.0)),
    MagneticFieldModel("smooth-periodic-bump", b0=1.5, amplitude=-0.5),
]


@pytest.mark.parametrize("model", MODELS)
def test_gradient_matches_centered_differences(model):
    pts = validation_lattice((0.0, 0.0), (3.0, 3.0), 9)
    h = 1e-4
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    fd = np.stack(
        [(model.value(pts + ex) - model.value(pts - ex)) / (2 * h), (model.value(pts + ey) - model.value(pts - ey)) / (2 * h)],
        axis=-1,
    )
    g = model.gradient(pts)
    scale = np.maximum(np.abs(g).max(), 1e-300)
    assert np.max(np.abs(fd - g)) / scale <= 1e-6


@pytest.mark.parametrize("model", MODELS)
def test_value_and_gradient_consistent(model):
    pts = validation_lattice((-1.0, -1.0), (4.0, 4.0), 7)
    b, g = model.value_and_gradient(pts)
    assert np.array_equal(b, model.value(pts))
    assert np.allclose(g, model.gradient(pts), rtol=0, atol=1e-15)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_bump_never_below_alpha(x, y):
    bump = MagneticFieldModel("smooth-periodic-bump", b0=1.0, amplitude=-0.4, alpha=0.5)
    assert eval_b(bump, 0.0, [x, y]) >= 0.6 - 1e-15


def test_field_is_independent_of_time():
    bump = MagneticFieldModel("smooth-periodic-bump", amplitude=0.3)
    assert eval_b(bump, 0.0, [1.0, 2.0]) == eval_b(bump, 5.0, [1.0, 2.0])


def test_invalid_models_rejected():
    with pytest.raises(InvalidParameterError):
        MagneticFieldModel("dipole")
    with pytest.raises(InvalidParameterError):
        MagneticFieldModel(alpha=0.0)

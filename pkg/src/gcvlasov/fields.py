"""External magnetic-field models and physical scaling.

The external field is ``B = (0, 0, b(t, x_perp))``: it only depends on the
perpendicular coordinates, so ``div B = 0`` holds for every model by
construction. All models are analytic closures with exact gradients.

Variants
--------
uniform
    ``b = b0``.
linear-ramp
    ``b = b0 + g . x_perp``. Unbounded, so meant for free-space orbits.
smooth-periodic-bump
    ``b = b0 + A * prod_i (1 + cos(k_i (x_i - c_i))) / 2`` with
    ``k_i = 2 pi / L_i``. Smooth across periodic boundaries, peak ``b0 + A`` at
    the centre ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VARIANTS = ("uniform", "linear-ramp", "smooth-periodic-bump")


class InvalidParameterError(ValueError):
    """A scaling or model parameter is outside its admissible range."""


class FieldModelViolation(ValueError):
    """The field dropped to or below its declared lower bound ``alpha``."""


@dataclass(frozen=True)
class ScalingParameters:
    """Characteristic plasma scales used to nondimensionalise the system."""

    debye_length: float
    thermal_velocity: float
    plasma_frequency: float
    cyclotron_frequency: float
    temperature: float = 1.0
    density: float = 1.0
    field_scale: float = 1.0
    magnetic_scale: float = 1.0

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")

    @property
    def long_time_scale(self) -> float:
        """Observation time ``t_bar`` such that ``1 / (t_bar omega_p) = eps``."""
        return self.cyclotron_frequency / self.plasma_frequency**2


def epsilon_from_scales(s: ScalingParameters) -> float:
    """Dimensionless cyclotron period ``omega_p / omega_c``."""
    if s.plasma_frequency <= 0.0 or s.cyclotron_frequency <= 0.0:
        raise InvalidParameterError("frequencies must be positive")
    return s.plasma_frequency / s.cyclotron_frequency


@dataclass(frozen=True)
class MagneticFieldModel:
    """Analytic ``b(t, x_perp)`` with a declared positive lower bound.

    Attributes:
        variant: one of ``VARIANTS``.
        b0: base value.
        alpha: lower bound the field must stay strictly above.
        grad: gradient vector for ``linear-ramp``.
        amplitude: bump height for ``smooth-periodic-bump``.
        center: bump centre.
        lengths: periods of the bump profile in x and y.
    """

    variant: str = "uniform"
    b0: float = 1.0
    alpha: float = 0.5
    grad: tuple[float, float] = (0.0, 0.0)
    amplitude: float = 0.0
    center: tuple[float, float] = (math.pi, math.pi)
    lengths: tuple[float, float] = (2.0 * math.pi, 2.0 * math.pi)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"unknown field variant {self.variant!r}")
        if not self.alpha > 0.0:
            raise InvalidParameterError("alpha must be positive")
        if not self.b0 > 0.0:
            raise InvalidParameterError("b0 must be positive")
        if any(L <= 0.0 for L in self.lengths):
            raise InvalidParameterError("bump periods must be positive")

    def value(self, x_perp) -> np.ndarray:
        """Evaluate ``b`` without the lower-bound check (vectorised over ``...x2``)."""
        x = np.asarray(x_perp, dtype=float)
        if self.variant == "uniform":
            return np.full(x.shape[:-1], self.b0)
        if self.variant == "linear-ramp":
            return self.b0 + x[..., 0] * self.grad[0] + x[..., 1] * self.grad[1]
        kx, ky = (2.0 * math.pi / L for L in self.lengths)
        px = 0.5 * (1.0 + np.cos(kx * (x[..., 0] - self.center[0])))
        py = 0.5 * (1.0 + np.cos(ky * (x[..., 1] - self.center[1])))
        return self.b0 + self.amplitude * px * py

    def gradient(self, x_perp) -> np.ndarray:
        """Exact ``grad_perp b`` with shape ``(..., 2)``."""
        x = np.asarray(x_perp, dtype=float)
        out = np.zeros(x.shape[:-1] + (2,))
        if self.variant == "linear-ramp":
            out[..., 0] = self.grad[0]
            out[..., 1] = self.grad[1]
        elif self.variant == "smooth-periodic-bump":
            kx, ky = (2.0 * math.pi / L for L in self.lengths)
            ux = kx * (x[..., 0] - self.center[0])
            uy = ky * (x[..., 1] - self.center[1])
            px, py = 0.5 * (1.0 + np.cos(ux)), 0.5 * (1.0 + np.cos(uy))
            out[..., 0] = -0.5 * self.amplitude * kx * np.sin(ux) * py
            out[..., 1] = -0.5 * self.amplitude * ky * np.sin(uy) * px
        return out


    def value_and_gradient(self, x_perp):
        """``(b, grad b)`` in one pass (shares the trigonometric factors)."""
        x = np.asarray(x_perp, dtype=float)
        if self.variant != "smooth-periodic-bump":
            return self.value(x), self.gradient(x)
        kx, ky = (2.0 * math.pi / L for L in self.lengths)
        ux = kx * (x[..., 0] - self.center[0])
        uy = ky * (x[..., 1] - self.center[1])
        cx, cy = np.cos(ux), np.cos(uy)
        px, py = 0.5 * (1.0 + cx), 0.5 * (1.0 + cy)
        g = np.empty(x.shape[:-1] + (2,))
        g[..., 0] = -0.5 * self.amplitude * kx * np.sin(ux) * py
        g[..., 1] = -0.5 * self.amplitude * ky * np.sin(uy) * px
        return self.b0 + self.amplitude * px * py, g


def eval_b(model: MagneticFieldModel, t: float, x_perp) -> np.ndarray | float:
    """Field magnitude at ``x_perp``; raises if it is not above ``alpha``."""
    b = model.value(x_perp)
    if np.any(b <= model.alpha):
        bad = np.argmin(b)
        point = np.asarray(x_perp, dtype=float).reshape(-1, 2)[bad]
        raise FieldModelViolation(
            f"b = {np.min(b):.6g} <= alpha = {model.alpha:g} at x_perp = {point.tolist()}"
        )
    return float(b) if np.ndim(b) == 0 else b


def grad_b(model: MagneticFieldModel, t: float, x_perp) -> np.ndarray:
    """Exact perpendicular gradient of ``b``."""
    return model.gradient(x_perp)


@dataclass
class ValidationReport:
    passed: bool
    min_b: float
    max_grad_b: float
    n_points: int
    worst_point: tuple[float, float]

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"field validation {status}: min b = {self.min_b:.6g}, "
            f"max |grad b| = {self.max_grad_b:.6g} over {self.n_points} points"
        )


def validation_lattice(lower, upper, n: int = 33) -> np.ndarray:
    """Uniform ``n x n`` lattice of points on the box ``[lower, upper]``."""
    xs = np.linspace(lower[0], upper[0], n)
    ys = np.linspace(lower[1], upper[1], n)
    return np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)


def validate_field(model: MagneticFieldModel, lattice) -> ValidationReport:
    """Scan ``lattice`` (points ``(N, 2)``) and report min ``b`` and max ``|grad b|``.

    A violation of ``b > alpha`` gives a failing report rather than an exception.
    """
    pts = np.asarray(lattice, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise InvalidParameterError("validation lattice is empty")
    b = model.value(pts)
    g = np.linalg.norm(model.gradient(pts), axis=-1)
    worst = int(np.argmin(b))
    return ValidationReport(
        passed=bool(np.all(b > model.alpha) and np.all(np.isfinite(g))),
        min_b=float(b[worst]),
        max_grad_b=float(np.max(g)),
        n_points=len(pts),
        worst_point=(float(pts[worst, 0]), float(pts[worst, 1])),
    )

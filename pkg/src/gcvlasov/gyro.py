"""Gyrophase calculus for the strong-field expansion.

Polar velocity coordinates ``v_perp = w (cos theta, sin theta)``, the
gyroaverage ``Pi`` (mean over a uniform, even gyrophase grid), the gyration
operator ``L f = b d f / d theta`` and the first-order corrector

    f1 = -(1/b) e_theta . G + P,   G = w grad_perp F - grad_perp(phi_F) dF/dw,

together with the two solvability residuals that must vanish for the
hierarchy to be solvable at orders -1 and 0.

Discretisation (fixed for the whole module): spectral derivatives in periodic
space and in ``theta``; second-order centred differences in ``w`` and
``v_par`` with one-sided second-order closures at the ends
(``numpy.gradient(..., edge_order=2)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import GyroResolved, ReducedDistribution
from .fields import MagneticFieldModel
from .poisson import ScalarField, TorusGrid

DEFAULT_SOLVABILITY_TOL = 1e-8


class InvalidSamplingError(ValueError):
    pass


class NotSolvableError(ValueError):
    """The parallel solvability condition fails; carries the residual norm."""

    def __init__(self, residual_norm: float, tol: float):
        super().__init__(
            f"parallel solvability residual {residual_norm:.3e} exceeds tolerance {tol:.1e}"
        )
        self.residual_norm = residual_norm
        self.tol = tol


# -- polar coordinates --------------------------------------------------------


@dataclass
class GyroCoordinates:
    w: np.ndarray | float
    theta: np.ndarray | float
    v_par: np.ndarray | float


def to_gyro(v) -> GyroCoordinates:
    """Cartesian velocity ``(..., 3)`` to ``(w, theta, v_par)``; ``theta = 0`` when ``w = 0``."""
    v = np.asarray(v, dtype=float)
    w = np.hypot(v[..., 0], v[..., 1])
    theta = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2.0 * math.pi)
    theta = np.where(w == 0.0, 0.0, theta)
    # mod can round 2*pi - tiny up to exactly 2*pi
    theta = np.where(theta >= 2.0 * math.pi, 0.0, theta)
    if v.ndim == 1:
        return GyroCoordinates(float(w), float(theta), float(v[2]))
    return GyroCoordinates(w, theta, v[..., 2].copy())


def from_gyro(c: GyroCoordinates) -> np.ndarray:
    w = np.asarray(c.w, dtype=float)
    th = np.asarray(c.theta, dtype=float)
    return np.stack(np.broadcast_arrays(w * np.cos(th), w * np.sin(th), np.asarray(c.v_par, float)), axis=-1)


def e_w(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def e_theta(theta):
    return np.stack([-np.sin(theta), np.cos(theta)], axis=-1)


# -- gyroaverage and gyration operator ----------------------------------------


@dataclass
class GyrophaseSampling:
    """Samples ``values[..., j]`` of a function at ``theta_j = 2 pi j / N``."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        n = self.values.shape[-1] if self.values.ndim else 0
        if n < 4 or n % 2:
            raise InvalidSamplingError(f"need an even number >= 4 of gyrophase nodes, got {n}")

    @property
    def n_theta(self) -> int:
        return self.values.shape[-1]

    @property
    def theta(self) -> np.ndarray:
        return theta_nodes(self.n_theta)

    @classmethod
    def of(cls, func, n_theta: int) -> "GyrophaseSampling":
        if n_theta < 4 or n_theta % 2:
            raise InvalidSamplingError(f"need an even number >= 4 of gyrophase nodes, got {n_theta}")
        return cls(func(theta_nodes(n_theta)))


def theta_nodes(n: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n) / n


def gyroaverage(s: GyrophaseSampling) -> np.ndarray | float:
    """Rectangle rule for ``(1/2pi) int_0^2pi . dtheta`` (exact below degree N)."""
    out = s.values.mean(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def dtheta_spectral(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Spectral theta-derivative of uniform periodic samples; Nyquist mode dropped."""
    n = values.shape[axis]
    vh = np.fft.rfft(values, axis=axis)
    m = np.arange(n // 2 + 1, dtype=float)
    m[-1] = 0.0 if n % 2 == 0 else m[-1]
    shape = [1] * values.ndim
    shape[axis] = len(m)
    return np.fft.irfft(1j * m.reshape(shape) * vh, n=n, axis=axis)


def apply_L(s: GyrophaseSampling, b) -> GyrophaseSampling:
    """Gyration operator ``L f = -b v_perp^perp . grad_v f = b df/dtheta``."""
    b = np.asarray(b, dtype=float)
    return GyrophaseSampling(b[..., None] * dtheta_spectral(s.values) if b.ndim else b * dtheta_spectral(s.values))


# -- phase-space derivatives --------------------------------------------------


def spatial_derivative(values: np.ndarray, grid: TorusGrid, axis: int) -> np.ndarray:
    """Spectral derivative along spatial ``axis`` of an array whose leading
    ``grid.dim`` axes are the grid (trailing axes are carried along)."""
    n = grid.counts[axis]
    k = 2.0 * math.pi * np.fft.fftfreq(n, 1.0 / n) / grid.lengths[axis]
    k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    vh = np.fft.fft(values, axis=axis)
    return np.real(np.fft.ifft(1j * k.reshape(shape) * vh, axis=axis))


def _ddw(values: np.ndarray, dw: float, axis: int) -> np.ndarray:
    return np.gradient(values, dw, axis=axis, edge_order=2)


def perp_gradient(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.stack([spatial_derivative(values, grid, 0), spatial_derivative(values, grid, 1)])


def parallel_derivative(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    if grid.dim < 3:
        return np.zeros_like(values)
    return spatial_derivative(values, grid, 2)


def _check_compatible(F: ReducedDistribution, phi: ScalarField) -> None:
    if phi.grid != F.grid:
        raise ValueError(f"grid mismatch: F on {F.grid.counts}, phi on {phi.grid.counts}")


def b_on_grid(model: MagneticFieldModel, grid: TorusGrid, t: float = 0.0) -> np.ndarray:
    """``b`` at every spatial node (constant along ``x_par``)."""
    X, Y = np.meshgrid(grid.axis(0), grid.axis(1), indexing="ij")
    b = model.value(np.stack([X, Y], axis=-1))
    if grid.dim == 3:
        b = np.broadcast_to(b[:, :, None], grid.counts)
    return np.array(b)


def _vel(arr: np.ndarray, nvel: int = 2) -> np.ndarray:
    """Append ``nvel`` singleton axes so a spatial array broadcasts over velocity."""
    return arr[(...,) + (None,) * nvel]


# -- G, f1 and solvability ----------------------------------------------------


def vector_G(F: ReducedDistribution, phi_F: ScalarField) -> np.ndarray:
    """``G = w grad_perp F - grad_perp(phi_F) dF/dw``, shape ``(2,) + F.values.shape``."""
    _check_compatible(F, phi_F)
    w = F.velocity.w[:, None]
    gF = perp_gradient(F.values, F.grid)
    gphi = perp_gradient(phi_F.values, F.grid)
    dFdw = _ddw(F.values, F.velocity.dperp, axis=F.grid.dim)
    return np.stack([w * gF[c] - _vel(gphi[c]) * dFdw for c in range(2)])


def solvability_residual_parallel(F: ReducedDistribution, phi_F: ScalarField):
    """Residual ``v_par dF/dx_par - dphi_F/dx_par dF/dv_par`` and its L2 norm
    (measure ``w dw dv_par dx``)."""
    _check_compatible(F, phi_F)
    if F.grid.dim < 3:
        res = np.zeros_like(F.values)
    else:
        vp = F.velocity.v_par[None, :]
        dFdz = parallel_derivative(F.values, F.grid)
        dphidz = parallel_derivative(phi_F.values, F.grid)
        dFdv = _ddw(F.values, F.velocity.dv, axis=F.grid.dim + 1)
        res = vp * dFdz - _vel(dphidz) * dFdv
    return res, l2_norm(F, res)


def l2_norm(F: ReducedDistribution, values: np.ndarray) -> float:
    return math.sqrt(max(F.integrate(values**2), 0.0))


def construct_f1(
    F: ReducedDistribution,
    phi_F: ScalarField,
    b: MagneticFieldModel,
    P: ReducedDistribution | None = None,
    n_theta: int = 16,
    t: float = 0.0,
    tol: float = DEFAULT_SOLVABILITY_TOL,
) -> GyroResolved:
    """First-order corrector ``f1(x, w, theta, v_par) = -(1/b) e_theta . G + P``.

    Raises:
        NotSolvableError: if the parallel solvability residual exceeds ``tol``.
    """
    _, norm = solvability_residual_parallel(F, phi_F)
    if norm > tol:
        raise NotSolvableError(norm, tol)
    if n_theta < 4 or n_theta % 2:
        raise InvalidSamplingError("n_theta must be even and >= 4")
    G = vector_G(F, phi_F)
    bx = _vel(b_on_grid(b, F.grid, t))
    th = theta_nodes(n_theta)
    sin = np.sin(th)[:, None]
    cos = np.cos(th)[:, None]
    # e_theta . G = -sin G_x + cos G_y; theta axis inserted between w and v_par
    Gx = G[0][..., :, None, :]
    Gy = G[1][..., :, None, :]
    vals = (sin * Gx - cos * Gy) / bx[..., None]
    if P is not None:
        vals = vals + P.values[..., :, None, :]
    return GyroResolved(F.grid, F.velocity, n_theta, vals)


def solvability_residual_order0(
    F: ReducedDistribution,
    P: ReducedDistribution | None,
    phi_F: ScalarField,
    phi_P: ScalarField | None,
    b: MagneticFieldModel,
    dFdt: np.ndarray | None = None,
    t: float = 0.0,
):
    """Residual of the evolution equation for ``F`` (solvability at order 0)::

        dF/dt + U_perp . grad_perp F + u_w dF/dw - dphi_P/dx_par dF/dv_par
              + v_par dP/dx_par - dphi_F/dx_par dP/dv_par

    ``dFdt`` is supplied by the caller (analytic or from snapshots); omitted
    means a stationary ``F``. Returns ``(field, L2 norm)``.
    """
    from .guiding_center import drift_velocity

    _check_compatible(F, phi_F)
    grid = F.grid
    d = grid.dim
    X, Y = np.meshgrid(grid.axis(0), grid.axis(1), indexing="ij")
    xp = np.stack([X, Y], axis=-1)
    gphi = perp_gradient(phi_F.values, grid)
    if d == 3:
        xp = np.broadcast_to(xp[:, :, None, :], grid.counts + (2,))
    gphi_last = np.moveaxis(gphi, 0, -1)
    U, u_w = drift_velocity(
        xp[..., None, :], F.velocity.w[None, :] * np.ones(grid.counts + (1,)), gphi_last[..., None, :], b, t
    )
    # U: counts + (Nw, 2); u_w: counts + (Nw,)
    gF = perp_gradient(F.values, grid)
    dFdw = _ddw(F.values, F.velocity.dperp, axis=d)
    res = (U[..., 0][..., None] * gF[0] + U[..., 1][..., None] * gF[1]) + u_w[..., None] * dFdw
    if dFdt is not None:
        res = res + dFdt
    dv_axis = d + 1
    if phi_P is not None and d == 3:
        res = res - _vel(parallel_derivative(phi_P.values, grid)) * _ddw(F.values, F.velocity.dv, dv_axis)
    if P is not None and d == 3:
        vp = F.velocity.v_par[None, :]
        res = res + vp * parallel_derivative(P.values, grid)
        res = res - _vel(parallel_derivative(phi_F.values, grid)) * _ddw(P.values, F.velocity.dv, dv_axis)
    return res, l2_norm(F, res)


def time_derivative(snapshots, dt: float) -> np.ndarray:
    """Second-order centred difference at the middle of three equally spaced snapshots."""
    prev, _, nxt = snapshots
    return (np.asarray(nxt) - np.asarray(prev)) / (2.0 * dt)

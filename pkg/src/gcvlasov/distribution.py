"""Gridded reduced distributions ``F(x, w, v_par)`` and their quadrature.

The spatial grid is a :class:`~gcvlasov.poisson.TorusGrid` of dimension 2
(``x_perp`` only, nothing depends on ``x_par``) or 3 (axis 2 is ``x_par``).
Velocity space is a uniform tensor grid ``w in [0, w_max]`` (or
``mu in [0, mu_max]`` in the magnetic-moment chart) times
``v_par in [-v_max, v_max]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .poisson import TorusGrid


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for uniform nodes ``x``."""
    h = x[1] - x[0]
    w = np.full(len(x), h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform ``(perp, v_par)`` tensor grid.

    ``perp`` is the perpendicular speed ``w`` in the w-chart and the magnetic
    moment ``mu`` in the mu-chart.
    """

    perp: np.ndarray
    v_par: np.ndarray

    @classmethod
    def uniform(cls, n_perp: int, perp_max: float, n_par: int, v_max: float) -> "VelocityGrid":
        if n_perp < 3 or n_par < 3:
            raise ValueError("velocity grids need at least 3 nodes per axis")
        return cls(np.linspace(0.0, perp_max, n_perp), np.linspace(-v_max, v_max, n_par))

    @property
    def w(self) -> np.ndarray:
        return self.perp

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.perp), len(self.v_par))

    @property
    def dperp(self) -> float:
        return float(self.perp[1] - self.perp[0])

    @property
    def dv(self) -> float:
        return float(self.v_par[1] - self.v_par[0])

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.perp, self.v_par, indexing="ij")


@dataclass
class ReducedDistribution:
    """Gyrophase-independent distribution sampled on ``grid x velocity``.

    ``values`` has shape ``grid.counts + velocity.shape``.
    """

    grid: TorusGrid
    velocity: VelocityGrid
    values: np.ndarray
    chart: str = "w"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        expected = self.grid.counts + self.velocity.shape
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")
        if self.chart not in ("w", "mu"):
            raise ValueError("chart must be 'w' or 'mu'")

    @classmethod
    def from_function(cls, grid: TorusGrid, velocity: VelocityGrid, func, chart: str = "w"):
        """Sample ``func(*x, perp, v_par)`` with full broadcasting."""
        d = grid.dim
        xs = []
        for i in range(d):
            shape = [1] * (d + 2)
            shape[i] = -1
            xs.append(grid.axis(i).reshape(shape))
        perp = velocity.perp.reshape((-1, 1))
        vp = velocity.v_par.reshape((1, -1))
        vals = np.broadcast_to(func(*xs, perp, vp), grid.counts + velocity.shape)
        return cls(grid, velocity, np.array(vals, dtype=float), chart)

    @property
    def has_parallel_axis(self) -> bool:
        return self.grid.dim == 3

    def measure_weights(self, b_values: np.ndarray | None = None) -> np.ndarray:
        """Velocity quadrature weights with the chart's measure.

        w-chart: ``w dw dv_par``. mu-chart: ``b(x) dmu dv_par``, which needs the
        field sampled on the spatial grid (``b_values``).
        """
        wp = trapezoid_weights(self.velocity.perp)
        wv = trapezoid_weights(self.velocity.v_par)
        if self.chart == "w":
            return (wp * self.velocity.perp)[:, None] * wv[None, :]
        if b_values is None:
            raise ValueError("mu-chart quadrature needs the field values b(x)")
        base = wp[:, None] * wv[None, :]
        return np.asarray(b_values)[(...,) + (None, None)] * base

    def velocity_moment(self, g, b_values=None) -> np.ndarray:
        """``int F g dmeasure`` over velocity at each spatial node."""
        wts = self.measure_weights(b_values)
        return np.sum(self.values * g * wts, axis=(-2, -1))

    def integrate(self, values: np.ndarray | None = None, b_values=None) -> float:
        """Integral over phase space with the chart's measure."""
        vals = self.values if values is None else values
        wts = self.measure_weights(b_values)
        return float(np.sum(vals * wts) * self.grid.cell_volume)

    def mass(self, b_values=None) -> float:
        return self.integrate(b_values=b_values)

    def copy_with(self, values: np.ndarray) -> "ReducedDistribution":
        return ReducedDistribution(self.grid, self.velocity, values, self.chart)


def maxwellian(w, v_par):
    """Unit 3D Maxwellian in ``(w, v_par)``: integrates to 1 over ``R^3``."""
    return (2.0 * math.pi) ** -1.5 * np.exp(-0.5 * (np.asarray(w) ** 2 + np.asarray(v_par) ** 2))


@dataclass
class GyroResolved:
    """Gyrophase-resolved samples on ``grid x (w, theta, v_par)``.

    ``values`` has shape ``grid.counts + (Nw, Ntheta, Nv)`` with uniform
    ``theta_j = 2 pi j / Ntheta``.
    """

    grid: TorusGrid
    velocity: VelocityGrid
    n_theta: int
    values: np.ndarray

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_theta) / self.n_theta

    def gyroaverage(self) -> np.ndarray:
        return self.values.mean(axis=-2)

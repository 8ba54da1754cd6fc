"""Periodic spectral Poisson solver and charge-density assembly.

Conventions: ``-Laplace(phi) = rho - rho_0`` on a torus, ``E = -grad phi``,
``phi`` has zero mean. Wavenumbers are ``2 pi m / L``; the Nyquist mode is
dropped from first derivatives so the discrete gradient stays skew-adjoint.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


class DataError(ValueError):
    """Input field contains non-finite values."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid with nodes at ``i * h`` on ``[0, L)`` per axis."""

    lengths: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))
        if len(self.lengths) != len(self.counts) or len(self.counts) not in (2, 3):
            raise ValueError("TorusGrid needs 2 or 3 matching lengths and counts")
        for n in self.counts:
            if n < 8 or n & (n - 1):
                raise ValueError(f"node counts must be powers of two >= 8, got {n}")
        if any(L <= 0.0 for L in self.lengths):
            raise ValueError("lengths must be positive")

    @classmethod
    def cube(cls, n: int, dim: int = 3, length: float = 2.0 * math.pi) -> "TorusGrid":
        return cls((length,) * dim, (n,) * dim)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def axis(self, i: int) -> np.ndarray:
        return np.arange(self.counts[i]) * self.spacing[i]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.axis(i) for i in range(self.dim)), indexing="ij")

    def wavenumbers(self, zero_nyquist: bool = False) -> list[np.ndarray]:
        """Broadcastable wavenumber arrays for the ``rfftn`` layout."""
        ks = []
        for i, (L, n) in enumerate(zip(self.lengths, self.counts)):
            if i == self.dim - 1:
                m = np.fft.rfftfreq(n, 1.0 / n)
            else:
                m = np.fft.fftfreq(n, 1.0 / n)
            k = 2.0 * math.pi * m / L
            if zero_nyquist:
                k = np.where(np.abs(m) == n // 2, 0.0, k)
            shape = [1] * self.dim
            shape[i] = len(k)
            ks.append(k.reshape(shape))
        return ks

    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.wavenumbers())


@dataclass
class ScalarField:
    grid: TorusGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.counts:
            raise ValueError(f"values shape {self.values.shape} != grid {self.grid.counts}")

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)


@dataclass
class VectorField:
    """Component-major samples: ``values[c]`` is component ``c`` on the grid."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[1:] != self.grid.counts:
            raise ValueError("vector field shape does not match grid")

    def norm_squared_integral(self) -> float:
        return float(np.sum(self.values**2) * self.grid.cell_volume)


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise DataError(f"{what} contains non-finite values")


def gradient_spectral(phi: ScalarField) -> VectorField:
    """Spectral gradient of a periodic field (Nyquist modes dropped)."""
    _check_finite(phi.values, "phi")
    grid = phi.grid
    ph = np.fft.rfftn(phi.values)
    comps = [
        np.fft.irfftn(1j * k * ph, s=grid.counts, axes=tuple(range(grid.dim))) for k in grid.wavenumbers(zero_nyquist=True)
    ]
    return VectorField(grid, np.stack(comps))


def laplacian_spectral(phi: ScalarField) -> ScalarField:
    ph = np.fft.rfftn(phi.values)
    return ScalarField(phi.grid, np.fft.irfftn(-phi.grid.k_squared() * ph, s=phi.grid.counts, axes=tuple(range(phi.grid.dim))))


def solve_poisson(rho: ScalarField, background: float | None = None):
    """Solve ``-Laplace(phi) = rho - rho_0`` and return ``(phi, E)``.

    Without a background the mean of ``rho`` is removed (the periodic problem
    is only solvable for zero-mean sources) and stored in
    ``phi.meta["removed_mean"]``.
    """
    _check_finite(rho.values, "rho")
    grid = rho.grid
    src = rho.values if background is None else rho.values - background
    removed = float(src.mean())
    if background is None and abs(removed) > 1e-12 * (1.0 + np.abs(src).max()):
        logger.debug("poisson: removing nonzero source mean %.3e", removed)
    rh = np.fft.rfftn(src)
    k2 = grid.k_squared()
    k2.flat[0] = 1.0
    ph = rh / k2
    ph.flat[0] = 0.0
    phi = ScalarField(grid, np.fft.irfftn(ph, s=grid.counts, axes=tuple(range(grid.dim))), meta={"removed_mean": removed})
    E = VectorField(
        grid,
        np.stack(
            [-np.fft.irfftn(1j * k * ph, s=grid.counts, axes=tuple(range(grid.dim))) for k in grid.wavenumbers(zero_nyquist=True)]
        ),
    )
    return phi, E


def density_from_reduced(Q) -> ScalarField:
    """Charge density ``rho_Q = 2 pi * int Q w dw dv_par`` of a reduced distribution.

    ``Q`` is a ``ReducedDistribution`` in the w-chart; trapezoid quadrature in
    ``w`` and ``v_par``.
    """
    from .distribution import ReducedDistribution

    if not isinstance(Q, ReducedDistribution):
        raise TypeError("density_from_reduced expects a ReducedDistribution")
    if Q.chart != "w":
        raise ValueError("density_from_reduced needs the w-chart")
    rho = 2.0 * math.pi * Q.velocity_moment(np.ones_like(Q.velocity.v_par)[None, :])
    return ScalarField(Q.grid, rho)


# -- export -------------------------------------------------------------------


def export_csv(f: ScalarField, path) -> None:
    """Write ``index..., coordinate..., value`` rows with a header."""
    grid = f.grid
    names = "ijk"[: grid.dim]
    coords = "xyz"[: grid.dim]
    mesh = grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*names, *coords, "value"])
        for idx in np.ndindex(*grid.counts):
            w.writerow([*idx, *(repr(float(m[idx])) for m in mesh), repr(float(f.values[idx]))])


def export_raw(values: np.ndarray, grid: TorusGrid, path, **extra) -> Path:
    """Write little-endian float64 samples plus a ``.json`` header next to them."""
    path = Path(path)
    arr = np.ascontiguousarray(values, dtype="<f8")
    arr.tofile(path)
    header = {
        "dims": list(arr.shape),
        "lengths": list(grid.lengths),
        "counts": list(grid.counts),
        "dtype": "<f8",
        "order": "C",
        **extra,
    }
    hpath = path.with_suffix(path.suffix + ".json")
    hpath.write_text(json.dumps(header, indent=2))
    return hpath


def load_raw(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    header = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    arr = np.fromfile(path, dtype=header["dtype"]).reshape(header["dims"])
    return arr, header

"""Vectorised numpy implementations of the hot kernels.

Used whenever the compiled extension is unavailable (or disabled with the
``GCVLASOV_PURE_PYTHON`` environment variable). The call signatures are
identical to the Cython versions in ``_ckernels.pyx``.
"""

from __future__ import annotations

import numpy as np


def boris_push(x, v, e, b, inv_eps, ds, lengths):
    """Advance markers by one exact-angle Boris step, in place.

    ``x`` and ``v`` are ``(N, 3)`` arrays, ``e`` the electric field at the
    markers and ``b`` the (z-directed) magnetic field magnitude there. The
    magnetic rotation is clockwise in the (v_x, v_y) plane and leaves v_z
    untouched. ``lengths`` may be empty (free space) or hold the 3 box sizes.
    """
    half = 0.5 * ds
    v += half * e
    ang = ds * inv_eps * b
    c = np.cos(ang)
    s = np.sin(ang)
    vx = v[:, 0].copy()
    v[:, 0] = c * vx + s * v[:, 1]
    v[:, 1] = -s * vx + c * v[:, 1]
    v += half * e
    x += ds * v
    if len(lengths):
        np.mod(x, np.asarray(lengths, dtype=float), out=x)


def _cic_corners(pos, counts, spacing):
    d = len(counts)
    s = pos[:, :d] / np.asarray(spacing, dtype=float)
    i0 = np.floor(s).astype(np.int64)
    a = s - i0
    corners = []
    for bits in range(1 << d):
        idx = 0
        wgt = np.ones(len(pos))
        for k in range(d):
            up = (bits >> k) & 1
            ik = np.mod(i0[:, k] + up, counts[k])
            idx = idx * counts[k] + ik
            wgt = wgt * (a[:, k] if up else 1.0 - a[:, k])
        corners.append((idx, wgt))
    return corners


def deposit_cic(pos, weights, counts, spacing):
    """Cloud-in-cell deposit of marker weights onto periodic grid nodes.

    Returns the summed weight at each node (not divided by the cell volume).
    """
    counts = tuple(int(n) for n in counts)
    size = int(np.prod(counts))
    out = np.zeros(size)
    for idx, wgt in _cic_corners(pos, counts, spacing):
        out += np.bincount(idx, weights=wgt * weights, minlength=size)
    return out.reshape(counts)


def gather_cic(field, pos, spacing):
    """Interpolate a component-major grid field ``(ncomp, *counts)`` to markers."""
    counts = field.shape[1:]
    flat = field.reshape(field.shape[0], -1)
    out = np.zeros((len(pos), field.shape[0]))
    for idx, wgt in _cic_corners(pos, counts, spacing):
        out += wgt[:, None] * flat[:, idx].T
    return out


def lagrange3_rows(f, s, jump):
    """Four-point Lagrange interpolation along rows of a periodic table.

    ``f`` has shape ``(M, N)``; row ``m`` is extended by
    ``f[m, i + N] = f[m, i] + jump[m]``. ``s`` holds ``(M, K)`` evaluation
    points in index units.
    """
    m, n = f.shape
    i = np.floor(s).astype(np.int64)
    a = s - i
    rows = np.arange(m)[:, None]
    jump = np.asarray(jump, dtype=float)[:, None]

    def val(j):
        q, r = np.divmod(j, n)
        return f[rows, r] + q * jump

    w0 = -a * (a - 1.0) * (a - 2.0) / 6.0
    w1 = (a + 1.0) * (a - 1.0) * (a - 2.0) / 2.0
    w2 = -(a + 1.0) * a * (a - 2.0) / 2.0
    w3 = (a + 1.0) * a * (a - 1.0) / 6.0
    return w0 * val(i - 1) + w1 * val(i) + w2 * val(i + 1) + w3 * val(i + 2)

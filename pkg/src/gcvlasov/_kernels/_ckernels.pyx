# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Boris push, cloud-in-cell deposit/gather and
periodic four-point Lagrange interpolation along rows."""

import numpy as np

from libc.math cimport cos, sin, floor


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) nogil:
    cdef Py_ssize_t r = i % n
    if r < 0:
        r += n
    return r


cdef inline double _fmod_pos(double x, double L) nogil:
    cdef double r = x - L * floor(x / L)
    if r >= L:
        r -= L
    return r


def boris_push(double[:, ::1] x, double[:, ::1] v, const double[:, ::1] e,
               const double[::1] b, double inv_eps, double ds, lengths):
    cdef Py_ssize_t n = x.shape[0], p
    cdef double half = 0.5 * ds, ang, c, s, vx, vy, vz
    cdef bint wrap = len(lengths) > 0
    cdef double Lx = 0.0, Ly = 0.0, Lz = 0.0
    if wrap:
        Lx = lengths[0]
        Ly = lengths[1]
        Lz = lengths[2]
    with nogil:
        for p in range(n):
            vx = v[p, 0] + half * e[p, 0]
            vy = v[p, 1] + half * e[p, 1]
            vz = v[p, 2] + half * e[p, 2]
            ang = ds * inv_eps * b[p]
            c = cos(ang)
            s = sin(ang)
            v[p, 0] = c * vx + s * vy + half * e[p, 0]
            v[p, 1] = -s * vx + c * vy + half * e[p, 1]
            v[p, 2] = vz + half * e[p, 2]
            x[p, 0] += ds * v[p, 0]
            x[p, 1] += ds * v[p, 1]
            x[p, 2] += ds * v[p, 2]
            if wrap:
                x[p, 0] = _fmod_pos(x[p, 0], Lx)
                x[p, 1] = _fmod_pos(x[p, 1], Ly)
                x[p, 2] = _fmod_pos(x[p, 2], Lz)


def deposit_cic(pos, weights, counts, spacing):
    counts = tuple(int(c) for c in counts)
    if len(counts) == 2:
        return _deposit2(np.ascontiguousarray(pos, dtype=float),
                         np.ascontiguousarray(weights, dtype=float),
                         counts[0], counts[1], float(spacing[0]), float(spacing[1]))
    return _deposit3(np.ascontiguousarray(pos, dtype=float),
                     np.ascontiguousarray(weights, dtype=float),
                     counts[0], counts[1], counts[2],
                     float(spacing[0]), float(spacing[1]), float(spacing[2]))


def _deposit2(const double[:, ::1] pos, const double[::1] wts, Py_ssize_t nx, Py_ssize_t ny,
              double hx, double hy):
    out_arr = np.zeros((nx, ny))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t p, i, j, i1, j1
    cdef double sx, sy, ax, ay, w
    with nogil:
        for p in range(pos.shape[0]):
            sx = pos[p, 0] / hx
            sy = pos[p, 1] / hy
            i = <Py_ssize_t>floor(sx)
            j = <Py_ssize_t>floor(sy)
            ax = sx - i
            ay = sy - j
            w = wts[p]
            i1 = _wrap(i + 1, nx)
            j1 = _wrap(j + 1, ny)
            i = _wrap(i, nx)
            j = _wrap(j, ny)
            out[i, j] += w * (1.0 - ax) * (1.0 - ay)
            out[i1, j] += w * ax * (1.0 - ay)
            out[i, j1] += w * (1.0 - ax) * ay
            out[i1, j1] += w * ax * ay
    return out_arr


def _deposit3(const double[:, ::1] pos, const double[::1] wts, Py_ssize_t nx, Py_ssize_t ny,
              Py_ssize_t nz, double hx, double hy, double hz):
    out_arr = np.zeros((nx, ny, nz))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t p, i, j, k, i1, j1, k1
    cdef double sx, sy, sz, ax, ay, az, w
    with nogil:
        for p in range(pos.shape[0]):
            sx = pos[p, 0] / hx
            sy = pos[p, 1] / hy
            sz = pos[p, 2] / hz
            i = <Py_ssize_t>floor(sx)
            j = <Py_ssize_t>floor(sy)
            k = <Py_ssize_t>floor(sz)
            ax = sx - i
            ay = sy - j
            az = sz - k
            w = wts[p]
            i1 = _wrap(i + 1, nx)
            j1 = _wrap(j + 1, ny)
            k1 = _wrap(k + 1, nz)
            i = _wrap(i, nx)
            j = _wrap(j, ny)
            k = _wrap(k, nz)
            out[i, j, k] += w * (1.0 - ax) * (1.0 - ay) * (1.0 - az)
            out[i1, j, k] += w * ax * (1.0 - ay) * (1.0 - az)
            out[i, j1, k] += w * (1.0 - ax) * ay * (1.0 - az)
            out[i1, j1, k] += w * ax * ay * (1.0 - az)
            out[i, j, k1] += w * (1.0 - ax) * (1.0 - ay) * az
            out[i1, j, k1] += w * ax * (1.0 - ay) * az
            out[i, j1, k1] += w * (1.0 - ax) * ay * az
            out[i1, j1, k1] += w * ax * ay * az
    return out_arr


def gather_cic(field, pos, spacing):
    field = np.ascontiguousarray(field, dtype=float)
    pos = np.ascontiguousarray(pos, dtype=float)
    if field.ndim == 3:
        return _gather2(field, pos, float(spacing[0]), float(spacing[1]))
    return _gather3(field, pos, float(spacing[0]), float(spacing[1]), float(spacing[2]))


def _gather2(const double[:, :, ::1] f, const double[:, ::1] pos, double hx, double hy):
    cdef Py_ssize_t nc = f.shape[0], nx = f.shape[1], ny = f.shape[2]
    out_arr = np.zeros((pos.shape[0], nc))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t p, c, i, j, i1, j1
    cdef double sx, sy, ax, ay
    with nogil:
        for p in range(pos.shape[0]):
            sx = pos[p, 0] / hx
            sy = pos[p, 1] / hy
            i = <Py_ssize_t>floor(sx)
            j = <Py_ssize_t>floor(sy)
            ax = sx - i
            ay = sy - j
            i1 = _wrap(i + 1, nx)
            j1 = _wrap(j + 1, ny)
            i = _wrap(i, nx)
            j = _wrap(j, ny)
            for c in range(nc):
                out[p, c] = ((1.0 - ax) * (1.0 - ay) * f[c, i, j] + ax * (1.0 - ay) * f[c, i1, j]
                             + (1.0 - ax) * ay * f[c, i, j1] + ax * ay * f[c, i1, j1])
    return out_arr


def _gather3(const double[:, :, :, ::1] f, const double[:, ::1] pos, double hx, double hy, double hz):
    cdef Py_ssize_t nc = f.shape[0], nx = f.shape[1], ny = f.shape[2], nz = f.shape[3]
    out_arr = np.zeros((pos.shape[0], nc))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t p, c, i, j, k, i1, j1, k1
    cdef double sx, sy, sz, ax, ay, az, bx, by, bz
    with nogil:
        for p in range(pos.shape[0]):
            sx = pos[p, 0] / hx
            sy = pos[p, 1] / hy
            sz = pos[p, 2] / hz
            i = <Py_ssize_t>floor(sx)
            j = <Py_ssize_t>floor(sy)
            k = <Py_ssize_t>floor(sz)
            ax = sx - i
            ay = sy - j
            az = sz - k
            bx = 1.0 - ax
            by = 1.0 - ay
            bz = 1.0 - az
            i1 = _wrap(i + 1, nx)
            j1 = _wrap(j + 1, ny)
            k1 = _wrap(k + 1, nz)
            i = _wrap(i, nx)
            j = _wrap(j, ny)
            k = _wrap(k, nz)
            for c in range(nc):
                out[p, c] = (bx * by * bz * f[c, i, j, k] + ax * by * bz * f[c, i1, j, k]
                             + bx * ay * bz * f[c, i, j1, k] + ax * ay * bz * f[c, i1, j1, k]
                             + bx * by * az * f[c, i, j, k1] + ax * by * az * f[c, i1, j, k1]
                             + bx * ay * az * f[c, i, j1, k1] + ax * ay * az * f[c, i1, j1, k1])
    return out_arr


def lagrange3_rows(f, s, jump):
    f = np.ascontiguousarray(f, dtype=float)
    s = np.ascontiguousarray(s, dtype=float)
    jump = np.ascontiguousarray(np.broadcast_to(np.asarray(jump, dtype=float), (f.shape[0],)))
    return _lagrange3(f, s, jump)


def _lagrange3(const double[:, ::1] f, const double[:, ::1] s, const double[::1] jump):
    cdef Py_ssize_t m = f.shape[0], n = f.shape[1], kk = s.shape[1]
    out_arr = np.empty((m, kk))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, k, i, j, q, idx
    cdef double a, w[4], acc
    with nogil:
        for r in range(m):
            for k in range(kk):
                i = <Py_ssize_t>floor(s[r, k])
                a = s[r, k] - i
                w[0] = -a * (a - 1.0) * (a - 2.0) / 6.0
                w[1] = (a + 1.0) * (a - 1.0) * (a - 2.0) / 2.0
                w[2] = -(a + 1.0) * a * (a - 2.0) / 2.0
                w[3] = (a + 1.0) * a * (a - 1.0) / 6.0
                acc = 0.0
                for j in range(4):
                    idx = i - 1 + j
                    q = idx // n
                    if idx - q * n < 0:
                        q -= 1
                    acc += w[j] * (f[r, idx - q * n] + q * jump[r])
                out[r, k] = acc
    return out_arr

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_pykernels`` for the contracts."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef inline double _d0(double[:, ::1] F, Py_ssize_t i, Py_ssize_t j,
                       Py_ssize_t n, double h) nogil:
    if i == 0:
        return (-3.0 * F[0, j] + 4.0 * F[1, j] - F[2, j]) / (2.0 * h)
    if i == n - 1:
        return (3.0 * F[n - 1, j] - 4.0 * F[n - 2, j] + F[n - 3, j]) / (2.0 * h)
    return (F[i + 1, j] - F[i - 1, j]) / (2.0 * h)


cdef inline double _d1(double[:, ::1] F, Py_ssize_t i, Py_ssize_t j,
                       Py_ssize_t n, double h) nogil:
    if j == 0:
        return (-3.0 * F[i, 0] + 4.0 * F[i, 1] - F[i, 2]) / (2.0 * h)
    if j == n - 1:
        return (3.0 * F[i, n - 1] - 4.0 * F[i, n - 2] + F[i, n - 3]) / (2.0 * h)
    return (F[i, j + 1] - F[i, j - 1]) / (2.0 * h)


def nodal_metric(X, Y, U, double dxi, double deta, double a, double b,
                 double floor):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[:, ::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t ni = x.shape[0], nj = x.shape[1], i, j
    out11 = np.empty((ni, nj))
    out12 = np.empty((ni, nj))
    out22 = np.empty((ni, nj))
    cdef double[:, ::1] m11 = out11, m12 = out12, m22 = out22
    cdef double xx, xe, yx, ye, ux, ue, jac, w1, w2, k
    cdef double a2 = a * a
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(ni):
            for j in range(nj):
                xx = _d0(x, i, j, ni, dxi)
                yx = _d0(y, i, j, ni, dxi)
                ux = _d0(u, i, j, ni, dxi)
                xe = _d1(x, i, j, nj, deta)
                ye = _d1(y, i, j, nj, deta)
                ue = _d1(u, i, j, nj, deta)
                jac = xx * ye - xe * yx
                if fabs(jac) <= floor:
                    bad = i * nj + j
                    break
                w1 = (ux * ye - ue * yx) / jac
                w2 = (-ux * xe + ue * xx) / jac
                k = a2 / (1.0 + b * (w1 * w1 + w2 * w2))
                m11[i, j] = k * w1 * w1 + 1.0
                m12[i, j] = k * w1 * w2
                m22[i, j] = k * w2 * w2 + 1.0
            if bad >= 0:
                break
    return out11, out12, out22, bad


def half_fluxes(X, Y, M11, M12, M22, double dxi, double deta):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[:, ::1] m11 = np.ascontiguousarray(M11, dtype=np.float64)
    cdef double[:, ::1] m12 = np.ascontiguousarray(M12, dtype=np.float64)
    cdef double[:, ::1] m22 = np.ascontiguousarray(M22, dtype=np.float64)
    cdef Py_ssize_t ni = x.shape[0], nj = x.shape[1], i, j
    o1 = np.empty((ni - 1, nj))
    o2 = np.empty((ni, nj - 1))
    cdef double[:, ::1] s1 = o1, s2 = o2
    cdef double dx, dy, a11, a12, a22
    with nogil:
        for i in range(ni - 1):
            for j in range(nj):
                dx = (x[i + 1, j] - x[i, j]) / dxi
                dy = (y[i + 1, j] - y[i, j]) / dxi
                a11 = 0.5 * (m11[i + 1, j] + m11[i, j])
                a12 = 0.5 * (m12[i + 1, j] + m12[i, j])
                a22 = 0.5 * (m22[i + 1, j] + m22[i, j])
                s1[i, j] = sqrt(a11 * dx * dx + 2.0 * a12 * dx * dy + a22 * dy * dy)
        for i in range(ni):
            for j in range(nj - 1):
                dx = (x[i, j + 1] - x[i, j]) / deta
                dy = (y[i, j + 1] - y[i, j]) / deta
                a11 = 0.5 * (m11[i, j + 1] + m11[i, j])
                a12 = 0.5 * (m12[i, j + 1] + m12[i, j])
                a22 = 0.5 * (m22[i, j + 1] + m22[i, j])
                s2[i, j] = sqrt(a11 * dx * dx + 2.0 * a12 * dx * dy + a22 * dy * dy)
    return o1, o2


def lu_factor(A, double tiny):
    out = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] lu = out
    cdef Py_ssize_t n = lu.shape[0], i, j, k, p
    pivarr = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] piv = pivarr
    cdef double big, t, f
    cdef Py_ssize_t bad = -1
    with nogil:
        for k in range(n):
            p = k
            big = fabs(lu[k, k])
            for i in range(k + 1, n):
                if fabs(lu[i, k]) > big:
                    big = fabs(lu[i, k])
                    p = i
            if big < tiny:
                bad = k
                break
            if p != k:
                for j in range(n):
                    t = lu[k, j]
                    lu[k, j] = lu[p, j]
                    lu[p, j] = t
                i = piv[k]
                piv[k] = piv[p]
                piv[p] = i
            for i in range(k + 1, n):
                f = lu[i, k] / lu[k, k]
                lu[i, k] = f
                if f != 0.0:
                    for j in range(k + 1, n):
                        lu[i, j] -= f * lu[k, j]
    return out, pivarr, bad


def lu_solve(LU, piv, b):
    cdef double[:, ::1] lu = np.ascontiguousarray(LU, dtype=np.float64)
    out = np.asarray(b, dtype=np.float64)[np.asarray(piv)].copy()
    cdef double[::1] v = out
    cdef Py_ssize_t n = lu.shape[0], i, j
    cdef double s
    with nogil:
        for i in range(1, n):
            s = v[i]
            for j in range(i):
                s -= lu[i, j] * v[j]
            v[i] = s
        for i in range(n - 1, -1, -1):
            s = v[i]
            for j in range(i + 1, n):
                s -= lu[i, j] * v[j]
            v[i] = s / lu[i, i]
    return out

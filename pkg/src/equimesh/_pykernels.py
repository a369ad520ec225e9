"""Pure numpy implementations of the hot kernels.

Used whenever the compiled ``_ckernels`` extension is unavailable.  The
signatures mirror the Cython versions exactly.
"""
import numpy as np


def _diff(F, h, axis):
    # centered in the interior, 3-point one-sided at both array ends
    F = np.moveaxis(F, axis, 0)
    D = np.empty_like(F)
    D[1:-1] = (F[2:] - F[:-2]) / (2.0 * h)
    D[0] = (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * h)
    D[-1] = (3.0 * F[-1] - 4.0 * F[-2] + F[-3]) / (2.0 * h)
    return np.moveaxis(D, 0, axis)


def nodal_metric(X, Y, U, dxi, deta, a, b, floor):
    """Monitor matrix entries at every node of a logically rectangular patch.

    Returns ``(m11, m12, m22, bad)`` where ``bad`` is the flat index of the
    first node whose Jacobian magnitude is at or below ``floor`` (-1 if none).
    """
    x_xi = _diff(X, dxi, 0)
    x_eta = _diff(X, deta, 1)
    y_xi = _diff(Y, dxi, 0)
    y_eta = _diff(Y, deta, 1)
    u_xi = _diff(U, dxi, 0)
    u_eta = _diff(U, deta, 1)
    jac = x_xi * y_eta - x_eta * y_xi
    small = np.abs(jac) <= floor
    if small.any():
        bad = int(np.flatnonzero(small.ravel())[0])
        z = np.zeros_like(X)
        return z, z, z, bad
    w1 = (u_xi * y_eta - u_eta * y_xi) / jac
    w2 = (-u_xi * x_eta + u_eta * x_xi) / jac
    k = a * a / (1.0 + b * (w1 * w1 + w2 * w2))
    return k * w1 * w1 + 1.0, k * w1 * w2, k * w2 * w2 + 1.0, -1


def half_fluxes(X, Y, m11, m12, m22, dxi, deta):
    """Arc-length forms at half points.

    ``S1[i, j]`` lives at (i+1/2, j), ``S2[i, j]`` at (i, j+1/2).  The monitor
    at a half point is the average of the two nodal matrices.
    """
    dx = (X[1:] - X[:-1]) / dxi
    dy = (Y[1:] - Y[:-1]) / dxi
    a11 = 0.5 * (m11[1:] + m11[:-1])
    a12 = 0.5 * (m12[1:] + m12[:-1])
    a22 = 0.5 * (m22[1:] + m22[:-1])
    S1 = np.sqrt(a11 * dx * dx + 2.0 * a12 * dx * dy + a22 * dy * dy)

    dx = (X[:, 1:] - X[:, :-1]) / deta
    dy = (Y[:, 1:] - Y[:, :-1]) / deta
    a11 = 0.5 * (m11[:, 1:] + m11[:, :-1])
    a12 = 0.5 * (m12[:, 1:] + m12[:, :-1])
    a22 = 0.5 * (m22[:, 1:] + m22[:, :-1])
    S2 = np.sqrt(a11 * dx * dx + 2.0 * a12 * dx * dy + a22 * dy * dy)
    return S1, S2


def lu_factor(A, tiny):
    """In-place LU with partial pivoting; returns ``(LU, piv, bad_row)``.

    ``bad_row`` is the elimination step whose pivot fell below ``tiny``
    (-1 on success).
    """
    LU = np.array(A, dtype=float, order="C", copy=True)
    n = LU.shape[0]
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        if abs(LU[p, k]) < tiny:
            return LU, piv, k
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        LU[k + 1:, k] /= LU[k, k]
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, piv, -1


def lu_solve(LU, piv, b):
    n = LU.shape[0]
    v = np.asarray(b, dtype=float)[piv].copy()
    for i in range(1, n):
        v[i] -= LU[i, :i] @ v[:i]
    for i in range(n - 1, -1, -1):
        v[i] = (v[i] - LU[i, i + 1:] @ v[i + 1:]) / LU[i, i]
    return v

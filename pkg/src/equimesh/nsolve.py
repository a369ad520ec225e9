"""Newton iteration with a finite-difference Jacobian and dense LU solves."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .monitor import DegenerateJacobianError


class SingularMatrixError(ArithmeticError):
    pass


class NewtonError(RuntimeError):
    """Newton failed; carries the best state seen and the residual history."""

    def __init__(self, message, state=None, history=None):
        super().__init__(message)
        self.state = state
        self.history = history or []


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 50
    fd_eps: float = 1e-7
    damping: float = 0.5
    max_halvings: int = 8
    use_coloring: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("Newton tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class NewtonStats:
    iterations: int = 0
    residual_norm: float = np.inf
    damping_activations: int = 0
    history: list = field(default_factory=list)


def lu_solve(A, b):
    """Solve ``A v = b`` by LU factorization with partial pivoting."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    scale = np.abs(A).sum(axis=1).max() if A.size else 0.0
    LU, piv, bad = kernels.lu_factor(A, 1e-14 * scale if scale > 0 else 1e-300)
    if bad >= 0:
        raise SingularMatrixError(f"numerically singular matrix (pivot {bad})")
    return kernels.lu_solve(LU, piv, b)


def jacobian_fd(residual_fn, state, fd_eps=1e-7, coloring=None, r0=None):
    """Forward-difference Jacobian.

    ``coloring`` is ``(groups, owner)`` as produced by
    ``StripProblem.coloring``: each group of columns is perturbed at once and
    ``owner[g, r]`` names the column of group ``g`` that row ``r`` depends on.
    """
    v = np.asarray(state, dtype=float)
    if r0 is None:
        r0 = residual_fn(v)
    n = v.size
    J = np.zeros((r0.size, n))
    eps = fd_eps * np.maximum(1.0, np.abs(v))

    def _eval(vp, cols):
        try:
            return residual_fn(vp)
        except Exception as exc:
            raise RuntimeError(f"residual failed while perturbing column(s) {cols[:5]}: {exc}") from exc

    if coloring is None:
        for c in range(n):
            vp = v.copy()
            vp[c] += eps[c]
            # divide by the representable step
            J[:, c] = (_eval(vp, [c]) - r0) / (vp[c] - v[c])
        return J

    groups, owner = coloring
    rows = np.arange(r0.size)
    for g, cols in enumerate(groups):
        if len(cols) == 0:
            continue
        vp = v.copy()
        vp[cols] += eps[cols]
        dr = _eval(vp, list(cols)) - r0
        col = owner[g]
        hit = col >= 0
        step = vp - v
        J[rows[hit], col[hit]] = dr[hit] / step[col[hit]]
    return J


def newton_solve(residual_fn, initial, config: NewtonConfig | None = None, coloring=None):
    """Damped Newton iteration; returns ``(state, NewtonStats)``."""
    config = config or NewtonConfig()
    v = np.array(initial, dtype=float)
    r = residual_fn(v)
    nrm = float(np.max(np.abs(r))) if r.size else 0.0
    stats = NewtonStats(residual_norm=nrm, history=[nrm])
    best = v.copy()
    while nrm > config.tol:
        if stats.iterations >= config.max_iter:
            raise NewtonError(f"Newton did not converge in {config.max_iter} iterations "
                              f"(residual {nrm:.3e})", best, stats.history)
        J = jacobian_fd(residual_fn, v, config.fd_eps,
                        coloring if config.use_coloring else None, r0=r)
        dv = lu_solve(J, -r)
        lam = 1.0
        for h in range(config.max_halvings + 1):
            vt = v + lam * dv
            try:
                rt = residual_fn(vt)
                nt = float(np.max(np.abs(rt)))
            except DegenerateJacobianError:
                nt = np.inf
            if nt < nrm:
                break
            lam *= config.damping
        else:
            raise NewtonError(f"no decrease along the Newton direction (residual {nrm:.3e})",
                              best, stats.history)
        if h > 0:
            stats.damping_activations += 1
        v, r, nrm = vt, rt, nt
        best = v.copy()
        stats.iterations += 1
        stats.history.append(nrm)
    stats.residual_norm = nrm
    return v, stats

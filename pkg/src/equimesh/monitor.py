"""Monitor matrix M = k w w^T + I of the scaled arc-length, and helpers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

JACOBIAN_FLOOR = 1e-12


class DegenerateJacobianError(ArithmeticError):
    """The mesh map has (nearly) vanishing Jacobian at some node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class MonitorParams:
    a: float = 0.7
    b: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"relaxation parameter a must lie in [0, 1], got {self.a}")
        if not self.b >= 0.0:
            raise ValueError(f"regularization b must be >= 0, got {self.b}")


@dataclass(frozen=True)
class MonitorMatrix:
    m11: float
    m12: float
    m22: float

    @property
    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m12

    def as_array(self):
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])


@dataclass(frozen=True)
class TestProblem:
    name: str
    u: Callable[[np.ndarray, np.ndarray], np.ndarray]

    __test__ = False  # not a pytest class


def _layer_u(x, y):
    return (1.0 - np.exp(15.0 * (x - 1.0))) * np.sin(np.pi * y)


def _constant_u(x, y):
    return np.zeros(np.broadcast(x, y).shape) + 1.0


PROBLEMS: dict[str, TestProblem] = {
    "boundary-layer": TestProblem("boundary-layer", _layer_u),
    "constant": TestProblem("constant", _constant_u),
}


def register_problem(name, u):
    PROBLEMS[name] = TestProblem(name, u)
    return PROBLEMS[name]


def get_problem(problem) -> TestProblem:
    if isinstance(problem, TestProblem):
        return problem
    try:
        return PROBLEMS[problem]
    except KeyError:
        raise KeyError(f"unknown test problem {problem!r}; known: {sorted(PROBLEMS)}") from None


def eval_u(problem, x, y):
    return get_problem(problem).u(x, y)


def k_factor(w, params: MonitorParams):
    w = np.asarray(w, dtype=float)
    return params.a ** 2 / (1.0 + params.b * (w[0] ** 2 + w[1] ** 2))


def monitor_matrix(w, params: MonitorParams) -> MonitorMatrix:
    w1, w2 = (float(v) for v in w)
    k = float(k_factor((w1, w2), params))
    return MonitorMatrix(k * w1 * w1 + 1.0, k * w1 * w2, k * w2 * w2 + 1.0)


def physical_gradient(u_xi, u_eta, x_xi, x_eta, y_xi, y_eta, node=None):
    """Chain-rule gradient (u_x, u_y) from computational derivatives."""
    jac = x_xi * y_eta - x_eta * y_xi
    if abs(jac) <= JACOBIAN_FLOOR:
        raise DegenerateJacobianError(f"degenerate mesh Jacobian {jac:.3e} at node {node}", node)
    return np.array([(u_xi * y_eta - u_eta * y_xi) / jac,
                     (-u_xi * x_eta + u_eta * x_xi) / jac])


def s_form(d, M: MonitorMatrix) -> float:
    d1, d2 = (float(v) for v in d)
    q = M.m11 * d1 * d1 + 2.0 * M.m12 * d1 * d2 + M.m22 * d2 * d2
    assert q >= -1e-14 * (d1 * d1 + d2 * d2), "monitor matrix is not positive definite"
    return float(np.sqrt(max(q, 0.0)))

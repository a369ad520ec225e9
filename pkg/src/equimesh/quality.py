"""Equidistribution quality measure of a quadrilateral mesh."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import PhysicalMesh
from .monitor import JACOBIAN_FLOOR, DegenerateJacobianError, MonitorParams, get_problem


class TangledMeshError(ValueError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


@dataclass
class QualityReport:
    q: np.ndarray
    q_max: float
    sigma: float


def cell_areas(mesh: PhysicalMesh) -> np.ndarray:
    """Signed shoelace areas of the cells (positive for counter-clockwise cells)."""
    x, y = mesh.x, mesh.y
    # vertices in order (i,j), (i+1,j), (i+1,j+1), (i,j+1)
    xs = [x[:-1, :-1], x[1:, :-1], x[1:, 1:], x[:-1, 1:]]
    ys = [y[:-1, :-1], y[1:, :-1], y[1:, 1:], y[:-1, 1:]]
    area = np.zeros_like(xs[0])
    for k in range(4):
        area += xs[k] * ys[(k + 1) % 4] - xs[(k + 1) % 4] * ys[k]
    return 0.5 * area


def nodal_monitor(mesh: PhysicalMesh, params: MonitorParams, problem):
    g = mesh.grid
    U = np.asarray(get_problem(problem).u(mesh.x, mesh.y), dtype=float)
    m11, m12, m22, bad = kernels.nodal_metric(np.ascontiguousarray(mesh.x), np.ascontiguousarray(mesh.y),
                                              U, g.d_xi, g.d_eta, params.a, params.b, JACOBIAN_FLOOR)
    if bad >= 0:
        node = divmod(bad, g.n_eta)
        raise DegenerateJacobianError(f"degenerate mesh Jacobian at node {node}", node)
    return m11, m12, m22


def _cell_avg(A):
    return 0.25 * (A[:-1, :-1] + A[1:, :-1] + A[:-1, 1:] + A[1:, 1:])


def cell_density(mesh: PhysicalMesh, params: MonitorParams, problem, convention="nodal-rho"):
    """Cell value of rho = sqrt(det M).

    ``nodal-rho`` averages the four nodal densities (default); ``nodal-matrix``
    takes the density of the averaged nodal matrices.
    """
    m11, m12, m22 = nodal_monitor(mesh, params, problem)
    if convention == "nodal-rho":
        return _cell_avg(np.sqrt(m11 * m22 - m12 * m12))
    if convention == "nodal-matrix":
        a11, a12, a22 = _cell_avg(m11), _cell_avg(m12), _cell_avg(m22)
        return np.sqrt(a11 * a22 - a12 * a12)
    raise ValueError(f"unknown density convention {convention!r}")


def q_eq(mesh: PhysicalMesh, params: MonitorParams, problem, convention="nodal-rho") -> QualityReport:
    """Per-cell Q_eq = N * rho_K |K| / sum(rho |K|) over the N cells."""
    area = cell_areas(mesh)
    if np.any(area <= 0):
        cell = tuple(int(v) for v in np.argwhere(area <= 0)[0])
        raise TangledMeshError(f"non-positive area in cell {cell}", cell)
    rho = cell_density(mesh, params, problem, convention)
    content = rho * area
    sigma = float(content.sum())
    q = content.size * content / sigma
    return QualityReport(q, float(q.max()), sigma)


def write_quality_csv(rows, path) -> None:
    """``rows`` is an iterable of ``(iteration, method, q_max)``; iteration may be 'inf'."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "method", "q_max"])
        for it, method, qm in rows:
            w.writerow([it, method, f"{qm:.6f}"])

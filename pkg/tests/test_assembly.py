import numpy as np
import pytest

from equimesh.assembly import (AssemblyError, BoundaryMode, StripProblem, compute_robin_rhs,
                               edge_residual_1dep, edge_residual_orthogonality, interior_residual,
                               transmission_residual)
from equimesh.grid import (ComputationalGrid, InterfaceTrace, PhysicalMesh, TransmissionKind,
                           make_uniform_mesh, partition_strips)
from equimesh.monitor import MonitorParams
from equimesh.nsolve import newton_solve
from oracles import stencil_order

P = MonitorParams(0.7, 0.05)


def symmetric_mesh(n):
    g = ComputationalGrid(n, n)
    X, Y = np.meshgrid(g.xi, g.eta, indexing="ij")
    x = X + 0.03 * np.sin(np.pi * X) * np.sin(np.pi * Y)
    y = Y + 0.03 * np.sin(np.pi * X) * np.sin(2 * np.pi * Y)
    return PhysicalMesh(x, y)


def test_interior_zero_cases():
    m = make_uniform_mesh(ComputationalGrid(7, 6))
    assert np.allclose(interior_residual(m, P, "constant", 3, 2), 0, atol=1e-14)
    g = ComputationalGrid(7, 6)
    X, Y = np.meshgrid(g.xi, g.eta, indexing="ij")
    skew = PhysicalMesh(X, Y * (1 + 0.1 * X))
    r1, r2 = interior_residual(skew, MonitorParams(0.0, 0.05), "boundary-layer", 2, 3)
    assert abs(r1) < 1e-13 and abs(r2) < 1e-13


def test_interior_quadratic_x():
    g = ComputationalGrid(9, 5)
    d = g.d_xi
    # the linear shift keeps the one-sided x_xi at column 0 away from zero
    i = np.arange(9)
    X, Y = np.meshgrid((i * d) ** 2 + i * d, g.eta, indexing="ij")
    for i in range(1, 8):
        r1, _ = interior_residual(PhysicalMesh(X, Y), P, "constant", i, 2)
        assert r1 == pytest.approx(2 * d, rel=1e-12)


def test_interior_rejects_boundary_node():
    with pytest.raises(IndexError):
        interior_residual(make_uniform_mesh(ComputationalGrid(5, 5)), P, "constant", 0, 2)


def test_edge_1dep_uniform_cases():
    s = np.linspace(0, 1, 6)
    assert np.allclose(edge_residual_1dep(s, np.full(6, 3.0), P), 0)
    assert np.allclose(edge_residual_1dep(s, np.sin(5 * s), MonitorParams(0.0, 0.05)), 0)
    with pytest.raises(ArithmeticError):
        edge_residual_1dep(np.array([0, 0.5, 0.5, 1.0]), np.zeros(4), P)


def test_edge_1dep_step_monitor():
    def step(mid, slope):
        return np.where(mid < 0.5, 1.0, 2.0)

    def res(v):
        return edge_residual_1dep(np.array([0.0, v[0], 1.0]), np.zeros(3), P, monitor=step)

    v, _ = newton_solve(res, np.array([0.5]))
    assert abs(v[0] - 2 / 3) < 1e-8


def test_orthogonality_residuals():
    g = ComputationalGrid(6, 5)
    X, Y = np.meshgrid(g.xi ** 2, g.eta, indexing="ij")
    assert np.allclose(edge_residual_orthogonality(X, "bottom", g.d_eta), 0)
    assert np.allclose(edge_residual_orthogonality(X, "top", g.d_eta), 0)
    Y2 = np.meshgrid(g.xi, g.eta ** 3, indexing="ij")[1]
    assert np.allclose(edge_residual_orthogonality(Y2, "left", g.d_xi), 0)
    assert np.allclose(edge_residual_orthogonality(Y2, "right", g.d_xi), 0)
    # exact on quadratics: x = eta^2 has x_eta(0) = 0, x_eta(1) = 2
    Xq = np.meshgrid(g.xi, g.eta ** 2, indexing="ij")[1]
    assert np.allclose(edge_residual_orthogonality(Xq, "top", g.d_eta), 2.0)


def test_transmission_dirichlet():
    X = np.random.default_rng(0).random((4, 5))
    Y = np.random.default_rng(1).random((4, 5))
    tr = InterfaceTrace(3, X[-1], Y[-1])
    rx, ry = transmission_residual(TransmissionKind.dirichlet(), "right", X, Y, tr, 0.1)
    assert np.all(rx == 0) and np.all(ry == 0)
    with pytest.raises(AssemblyError):
        transmission_residual(TransmissionKind.dirichlet(), "right", X, Y, None, 0.1)


def test_transmission_linear_robin_exact_on_linear():
    h = 0.1
    xi = np.array([0.3, 0.4, 0.5, 0.6])          # last column is the ghost
    X = np.repeat(xi[:, None], 5, axis=1)
    Y = np.full((4, 5), 0.25)
    tr = InterfaceTrace(5, np.full(5, 2.0), np.full(5, 0.5))
    rx, ry = transmission_residual(TransmissionKind.linear_robin(2), "right", X, Y, tr, h)
    assert np.allclose(rx, 0, atol=1e-14) and np.allclose(ry, 0, atol=1e-14)
    # left interface uses the minus sign
    trl = InterfaceTrace(1, np.full(5, 1 - 2 * 0.4), np.full(5, -0.5))
    rx, ry = transmission_residual(TransmissionKind.linear_robin(2), "left", X, Y, trl, h)
    assert np.allclose(rx, 0, atol=1e-14) and np.allclose(ry, 0, atol=1e-14)


def test_transmission_nonlinear_reduces_to_linear():
    h = 0.1
    X = np.repeat((np.array([0.3, 0.4, 0.5, 0.6]) ** 2)[:, None], 5, axis=1)
    Y = np.full((4, 5), 0.25)
    eye = (np.ones((4, 5)), np.zeros((4, 5)), np.ones((4, 5)))
    tr = InterfaceTrace(5, np.full(5, 1.7), np.full(5, 0.5))
    lin = transmission_residual(TransmissionKind.linear_robin(2), "right", X, Y, tr, h)
    non = transmission_residual(TransmissionKind.nonlinear_robin(2), "right", X, Y, tr, h, M=eye)
    assert np.allclose(lin[0], non[0]) and np.allclose(lin[1], non[1])
    with pytest.raises(AssemblyError):
        transmission_residual(TransmissionKind.nonlinear_robin(2), "right", X, Y, tr, h)


def _neighbor(kind, problem="boundary-layer"):
    g = ComputationalGrid(12, 8)
    specs = partition_strips(g, 2, 2, kind)
    right = StripProblem(g, specs[1], P, problem)
    return g, specs, right, right.pack(make_uniform_mesh(g))


def test_robin_rhs_uniform_neighbor():
    g, specs, right, state = _neighbor(TransmissionKind.linear_robin(2))
    tr = compute_robin_rhs(TransmissionKind.linear_robin(2), "right", right, state, specs[0].i_hi)
    assert specs[0].i_hi == 6
    assert np.allclose(tr.g_x, 1 + 2 * 6 / 11)
    assert np.allclose(tr.g_y, 2 * g.eta)
    d = compute_robin_rhs(TransmissionKind.dirichlet(), "right", right, state, 6)
    assert np.allclose(d.g_x, 6 / 11)

    kind = TransmissionKind.nonlinear_robin(2)
    g, specs, right, state = _neighbor(kind, "constant")
    tr = compute_robin_rhs(kind, "right", right, state, 6)
    assert np.allclose(tr.g_x, 1 + 2 * 6 / 11)
    g, specs, right, state = _neighbor(kind, "constant")
    left = StripProblem(g, specs[0], P, "constant")
    tl = compute_robin_rhs(kind, "left", left, left.pack(make_uniform_mesh(g)), 5)
    assert np.allclose(tl.g_x, 1 - 2 * 5 / 11)


def test_robin_rhs_requires_interior_column():
    g, specs, right, state = _neighbor(TransmissionKind.linear_robin(2))
    with pytest.raises(ValueError):
        compute_robin_rhs(TransmissionKind.linear_robin(2), "right", right, state, specs[1].i_lo)


def test_assemble_uniform_constant_zero_and_length():
    g = ComputationalGrid(6, 5)
    for mode in BoundaryMode:
        sp_ = StripProblem.single(g, P, "constant", mode)
        v = sp_.pack(make_uniform_mesh(g))
        assert v.size == 2 * 6 * 5
        r = sp_.residual(v)
        assert r.size == v.size and np.max(np.abs(r)) < 1e-13


def test_exact_on_linear_data_with_zero_relaxation():
    g = ComputationalGrid(7, 6)
    for mode in BoundaryMode:
        sp_ = StripProblem.single(g, MonitorParams(0.0, 0.05), "boundary-layer", mode)
        assert np.max(np.abs(sp_.residual(sp_.pack(make_uniform_mesh(g))))) < 1e-13


def test_converged_reference_residual(reference12):
    sp_ = StripProblem.single(reference12.grid, P)
    assert np.max(np.abs(sp_.residual(sp_.pack(reference12)))) <= 1e-10


@pytest.mark.parametrize("mode", list(BoundaryMode))
def test_symmetry_under_eta_flip(mode):
    m = symmetric_mesh(9)
    sp_ = StripProblem.single(m.grid, P, "boundary-layer", mode)
    R = sp_.residual(sp_.pack(m)).reshape(9, 9, 2)
    if mode == BoundaryMode.ORTHOGONALITY:
        # one-sided x_eta rows change sign under the flip
        R[:, -1, 0] *= -1
    assert np.allclose(R[:, ::-1, 0], R[:, :, 0], atol=1e-13)
    assert np.allclose(R[:, ::-1, 1], -R[:, :, 1], atol=1e-13)


def test_interior_stencil_second_order():
    slope, errs = stencil_order()
    assert slope >= 1.9, (errs, slope)


def test_state_layout_with_robin_ghosts():
    g = ComputationalGrid(12, 6)
    specs = partition_strips(g, 2, 2, TransmissionKind.linear_robin(2))
    left = StripProblem(g, specs[0], P)
    assert left.ghosts == (0, 1) and left.shape == (specs[0].n_cols + 1, 6)
    v = left.pack(make_uniform_mesh(g))
    assert v.size == 2 * (specs[0].n_cols + 1) * 6
    back = left.unpack(v)
    assert back.shape == (specs[0].n_cols, 6)
    with pytest.raises(AssemblyError):
        left.pack(back)

"""Discrete residual of the local equidistribution system on one xi-strip.

Interior nodes carry the two line equations

    r1 = S1(i+1/2, j) - S1(i-1/2, j),    r2 = S2(i, j+1/2) - S2(i, j-1/2),

which eliminate the line constants by differencing.  Physical edges use the
Dirichlet conditions plus either the 1D equidistribution of the edge nodes or
the orthogonality conditions.

Artificial interfaces:

* Dirichlet (classical) pins the interface column to the neighbor's values.
  The neighbor's next column is passed along as ghost data so the nodal
  derivatives at the interface stay centered.
* Robin kinds keep the interior equations on the interface column and add a
  ghost column of unknowns beyond it, determined by the centered Robin
  condition.  The monitor at the ghost node is lagged neighbor data.

Unknowns are ordered column by column (ghosts included, at their natural
position), eta index fastest, x before y: ``v.reshape(n_cols, n_eta, 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kernels
from .grid import (ComputationalGrid, InterfaceTrace, Kind, PartitionError,
                   PhysicalMesh, SubdomainSpec, TransmissionKind)
from .monitor import JACOBIAN_FLOOR, DegenerateJacobianError, MonitorParams, get_problem


class BoundaryMode(str, Enum):
    ONE_DIM_EP = "1d-ep"
    ORTHOGONALITY = "orthogonality"


class AssemblyError(ValueError):
    pass


# --- edge conditions -------------------------------------------------------

def edge_residual_1dep(s, u, params: MonitorParams, monitor=None):
    """1D equidistribution residual at the interior nodes of a boundary edge.

    ``s`` holds the edge coordinate (x along bottom/top, y along left/right)
    and ``u`` the solution sampled at the edge nodes.  ``monitor(mid, slope)``
    may override the half-point monitor; the default is the regularized
    arc-length ``sqrt(1 + k s_h^2)``.
    """
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    ds = np.diff(s)
    if np.any(ds == 0.0):
        k = int(np.flatnonzero(ds == 0.0)[0])
        raise DegenerateJacobianError(f"coincident edge nodes {k} and {k + 1}", k)
    slope = np.diff(u) / ds
    if monitor is None:
        kh = params.a ** 2 / (1.0 + params.b * slope * slope)
        Mh = np.sqrt(1.0 + kh * slope * slope)
    else:
        Mh = np.asarray(monitor(0.5 * (s[1:] + s[:-1]), slope), dtype=float) * np.ones_like(ds)
    flux = Mh * ds
    return flux[1:] - flux[:-1]


def edge_residual_orthogonality(F, edge, h):
    """Orthogonality condition on an edge (x_eta = 0 at bottom/top, y_xi = 0 at left/right).

    The ghost node beyond the edge is eliminated with the quadratic
    extrapolation ``F_{-1} = 3F_0 - 3F_1 + F_2``, which turns the centered
    difference into the second-order one-sided one.  ``F`` is the coordinate
    array (x for bottom/top, y for left/right); the result covers every node
    of the edge.
    """
    F = np.asarray(F, dtype=float)
    if edge == "bottom":
        return (-3.0 * F[:, 0] + 4.0 * F[:, 1] - F[:, 2]) / (2.0 * h)
    if edge == "top":
        return (3.0 * F[:, -1] - 4.0 * F[:, -2] + F[:, -3]) / (2.0 * h)
    if edge == "left":
        return (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * h)
    if edge == "right":
        return (3.0 * F[-1] - 4.0 * F[-2] + F[-3]) / (2.0 * h)
    raise ValueError(f"unknown edge {edge!r}")


# --- transmission ----------------------------------------------------------

def _sign(side):
    if side == "right":
        return 1.0
    if side == "left":
        return -1.0
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def robin_operator(kind: TransmissionKind, side, X, Y, k, d_xi, M=None):
    """Centered Robin operators (B1..B4) at column ``k`` of the arrays.

    Returns the pair (B(x), B(y)); the x part uses the arc-length form for
    the nonlinear kind, the y part is always linear.
    """
    sign = _sign(side)
    p = kind.p
    by = (Y[k + 1] - Y[k - 1]) / (2.0 * d_xi) + sign * p * Y[k]
    if kind.kind == Kind.LINEAR_ROBIN:
        bx = (X[k + 1] - X[k - 1]) / (2.0 * d_xi) + sign * p * X[k]
    elif kind.kind == Kind.NONLINEAR_ROBIN:
        if M is None:
            raise AssemblyError("nonlinear Robin condition needs the nodal monitor")
        dx = (X[k + 1] - X[k - 1]) / (2.0 * d_xi)
        dy = (Y[k + 1] - Y[k - 1]) / (2.0 * d_xi)
        m11, m12, m22 = (np.asarray(m)[k] for m in M)
        bx = np.sqrt(m11 * dx * dx + 2.0 * m12 * dx * dy + m22 * dy * dy) + sign * p * X[k]
    else:
        raise AssemblyError(f"{kind.kind.value} is not a Robin kind")
    return bx, by


def transmission_residual(kind: TransmissionKind, side, X, Y, trace: InterfaceTrace | None,
                          d_xi, M=None):
    """Residual pair (r_x, r_y) of the transmission condition.

    The arrays end on the strip's ``side``.  For Dirichlet they end at the
    interface column; for Robin kinds they extend one ghost column past it
    (the interface is then the second-to-last column on the right, the second
    on the left) and ``M`` holds the matching nodal monitor entries.
    """
    if trace is None:
        raise AssemblyError(f"missing neighbor data for the {side} interface")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if len(trace) != X.shape[1]:
        raise AssemblyError(f"trace length {len(trace)} does not match n_eta={X.shape[1]}")
    _sign(side)
    if kind.kind == Kind.DIRICHLET:
        c = -1 if side == "right" else 0
        return X[c] - trace.g_x, Y[c] - trace.g_y
    k = X.shape[0] - 2 if side == "right" else 1
    bx, by = robin_operator(kind, side, X, Y, k, d_xi, M)
    return bx - trace.g_x, by - trace.g_y


# --- strip problem ---------------------------------------------------------

@dataclass
class StripFields:
    """Fields on the extended column range (ghost columns included).

    ``c0`` is the array index of the strip's first column.
    """
    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    m11: np.ndarray
    m12: np.ndarray
    m22: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    c0: int
    n_cols: int

    @property
    def strip(self):
        return slice(self.c0, self.c0 + self.n_cols)


@dataclass
class StripProblem:
    """Everything needed to evaluate the residual of one strip."""

    grid: ComputationalGrid
    spec: SubdomainSpec
    params: MonitorParams
    problem: object = "boundary-layer"
    mode: BoundaryMode = BoundaryMode.ONE_DIM_EP
    left: InterfaceTrace | None = None
    right: InterfaceTrace | None = None
    _coloring: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.mode = BoundaryMode(self.mode)
        self._u = get_problem(self.problem).u
        if self.spec.n_cols < 3:
            raise PartitionError(f"strip [{self.spec.i_lo}..{self.spec.i_hi}] has fewer than 3 columns")
        if self.spec.left_kind.kind == Kind.PHYSICAL and self.spec.i_lo != 0:
            raise PartitionError("only column 0 can be a physical left boundary")
        if self.spec.right_kind.kind == Kind.PHYSICAL and self.spec.i_hi != self.grid.n_xi - 1:
            raise PartitionError(f"only column {self.grid.n_xi - 1} can be a physical right boundary")

    @classmethod
    def single(cls, grid, params, problem="boundary-layer", mode=BoundaryMode.ONE_DIM_EP):
        return cls(grid, SubdomainSpec(0, grid.n_xi - 1), params, problem, mode)

    def with_traces(self, left=None, right=None):
        return replace(self, left=left, right=right)

    # ghost columns that are unknowns of this strip
    @property
    def ghosts(self):
        return int(self.spec.left_kind.is_robin), int(self.spec.right_kind.is_robin)

    @property
    def col_range(self):
        """Inclusive global column range of the unknowns (ghosts included)."""
        gl, gr = self.ghosts
        return self.spec.i_lo - gl, self.spec.i_hi + gr

    @property
    def shape(self):
        lo, hi = self.col_range
        return (hi - lo + 1, self.grid.n_eta)

    @property
    def n_unknowns(self):
        return 2 * self.shape[0] * self.shape[1]

    def pack(self, mesh: PhysicalMesh, left_ghost=None, right_ghost=None) -> np.ndarray:
        """Unknown vector from a global mesh, or from a strip mesh plus ghost columns."""
        lo, hi = self.col_range
        if mesh.shape[0] == self.grid.n_xi:
            x, y = mesh.x[lo:hi + 1], mesh.y[lo:hi + 1]
        else:
            xs, ys = [mesh.x], [mesh.y]
            for on, ghost, front in zip(self.ghosts, (left_ghost, right_ghost), (True, False)):
                if not on:
                    continue
                if ghost is None:
                    raise AssemblyError("strip mesh needs ghost columns for its Robin interfaces")
                gx, gy = (np.asarray(g, dtype=float)[None] for g in ghost)
                xs.insert(0 if front else len(xs), gx)
                ys.insert(0 if front else len(ys), gy)
            x, y = np.concatenate(xs), np.concatenate(ys)
        if x.shape != self.shape:
            raise AssemblyError(f"mesh shape {x.shape} does not match unknown layout {self.shape}")
        return np.stack([x, y], axis=-1).ravel()

    def unpack(self, v) -> PhysicalMesh:
        """Strip mesh (ghost columns dropped)."""
        v = np.asarray(v, dtype=float)
        if v.size != self.n_unknowns:
            raise AssemblyError(f"state length {v.size} != {self.n_unknowns}")
        V = v.reshape(self.shape + (2,))
        gl, _ = self.ghosts
        V = V[gl:gl + self.spec.n_cols]
        return PhysicalMesh(V[..., 0].copy(), V[..., 1].copy())

    def fields(self, v) -> StripFields:
        V = np.asarray(v, dtype=float).reshape(self.shape + (2,))
        gl, gr = self.ghosts
        xs, ys = [V[..., 0]], [V[..., 1]]
        c0 = gl
        data_ghost = [False, False]
        if not gl and self.left is not None and self.left.ghost_x is not None:
            xs.insert(0, self.left.ghost_x[None])
            ys.insert(0, self.left.ghost_y[None])
            c0 = 1
            data_ghost[0] = True
        if not gr and self.right is not None and self.right.ghost_x is not None:
            xs.append(self.right.ghost_x[None])
            ys.append(self.right.ghost_y[None])
            data_ghost[1] = True
        X = np.ascontiguousarray(np.concatenate(xs) if len(xs) > 1 else xs[0])
        Y = np.ascontiguousarray(np.concatenate(ys) if len(ys) > 1 else ys[0])
        U = np.asarray(self._u(X, Y), dtype=float)
        g = self.grid
        m11, m12, m22, bad = kernels.nodal_metric(X, Y, U, g.d_xi, g.d_eta,
                                                  self.params.a, self.params.b, JACOBIAN_FLOOR)
        if bad >= 0:
            ci, j = divmod(bad, g.n_eta)
            node = (self.spec.i_lo + ci - c0, j)
            raise DegenerateJacobianError(f"degenerate mesh Jacobian at node {node}", node)
        # lagged neighbor monitor at Robin ghost nodes
        for on, trace, c in ((gl, self.left, 0), (gr, self.right, -1)):
            if on and trace is not None and trace.ghost_m is not None:
                m11[c], m12[c], m22[c] = trace.ghost_m
        S1, S2 = kernels.half_fluxes(X, Y, m11, m12, m22, g.d_xi, g.d_eta)
        return StripFields(X, Y, U, m11, m12, m22, S1, S2, c0, self.spec.n_cols)

    def residual(self, v) -> np.ndarray:
        f = self.fields(v)
        X, Y, U, S1, S2 = f.X, f.Y, f.U, f.S1, f.S2
        g = self.grid
        R = np.zeros(X.shape + (2,))

        R[1:-1, 1:-1, 0] = S1[1:, 1:-1] - S1[:-1, 1:-1]
        R[1:-1, 1:-1, 1] = S2[1:-1, 1:] - S2[1:-1, :-1]

        # bottom / top rows: y pinned, x from the edge condition
        if self.mode == BoundaryMode.ONE_DIM_EP:
            R[1:-1, 0, 0] = edge_residual_1dep(X[:, 0], U[:, 0], self.params)
            R[1:-1, -1, 0] = edge_residual_1dep(X[:, -1], U[:, -1], self.params)
        else:
            R[:, 0, 0] = edge_residual_orthogonality(X, "bottom", g.d_eta)
            R[:, -1, 0] = edge_residual_orthogonality(X, "top", g.d_eta)
        R[:, 0, 1] = Y[:, 0]
        R[:, -1, 1] = Y[:, -1] - 1.0

        first, last = f.c0, f.c0 + f.n_cols - 1
        for side, kind, trace in (("left", self.spec.left_kind, self.left),
                                  ("right", self.spec.right_kind, self.right)):
            c = first if side == "left" else last
            if kind.kind == Kind.PHYSICAL:
                R[c, :, 0] = X[c] - (0.0 if side == "left" else 1.0)
                if self.mode == BoundaryMode.ONE_DIM_EP:
                    R[c, 1:-1, 1] = edge_residual_1dep(Y[c], U[c], self.params)
                else:
                    R[c, 1:-1, 1] = edge_residual_orthogonality(Y, side, g.d_xi)[1:-1]
            elif kind.kind == Kind.DIRICHLET:
                sl = slice(c, None) if side == "left" else slice(None, c + 1)
                rx, ry = transmission_residual(kind, side, X[sl], Y[sl], trace, g.d_xi)
                R[c, :, 0] = rx
                R[c, 1:-1, 1] = ry[1:-1]
            else:
                # interior equations stay on column c; the ghost column carries the condition
                gc = c - 1 if side == "left" else c + 1
                sl = slice(gc, None) if side == "left" else slice(None, gc + 1)
                M = (f.m11[sl], f.m12[sl], f.m22[sl])
                rx, ry = transmission_residual(kind, side, X[sl], Y[sl], trace, g.d_xi, M)
                R[gc, :, 0] = rx
                R[gc, :, 1] = ry

        lo = f.c0 - self.ghosts[0]
        return R[lo:lo + self.shape[0]].ravel()

    @property
    def stencil_reach(self):
        # every row reads unknowns at most two nodes away
        return 2

    def coloring(self):
        """``(groups, owner)`` for the grouped finite-difference Jacobian."""
        if self._coloring is None:
            self._coloring = build_coloring(self.shape[0], self.shape[1], self.stencil_reach)
        return self._coloring


def build_coloring(nc, ne, reach):
    """Group unknowns whose nodes are congruent modulo ``2*reach+1`` in both
    directions.  ``owner[g, r]`` is the column of group ``g`` influencing row
    ``r`` (-1 if none)."""
    period = 2 * reach + 1
    ci, cj = np.meshgrid(np.arange(nc), np.arange(ne), indexing="ij")
    ci, cj = ci.ravel(), cj.ravel()
    groups, owner = [], []
    for a in range(min(period, nc)):
        for b in range(min(period, ne)):
            oi = ci + ((a - ci + reach) % period) - reach
            oj = cj + ((b - cj + reach) % period) - reach
            ok = (oi >= 0) & (oi < nc) & (oj >= 0) & (oj < ne)
            onode = np.where(ok, oi * ne + oj, -1)
            nodes = np.flatnonzero((ci % period == a) & (cj % period == b))
            for comp in range(2):
                groups.append(2 * nodes + comp)
                col = np.where(onode >= 0, 2 * onode + comp, -1)
                owner.append(np.repeat(col, 2))
    return groups, np.array(owner)


# --- neighbor data ---------------------------------------------------------

def compute_robin_rhs(kind: TransmissionKind, side, neighbor: StripProblem, neighbor_state,
                      column: int) -> InterfaceTrace:
    """Interface data for a receiving strip, evaluated on the neighbor's iterate.

    ``side`` names the receiver's interface: ``'right'`` means the neighbor
    lies to the right and ``column`` is the receiver's last column.  Robin
    data uses centered differences, the column being interior to the neighbor.
    """
    sp = neighbor.spec
    _sign(side)
    if not sp.i_lo < column < sp.i_hi:
        raise PartitionError(
            f"interface column {column} is not interior to neighbor strip [{sp.i_lo}..{sp.i_hi}]")
    f = neighbor.fields(neighbor_state)
    k = column - sp.i_lo + f.c0
    gk = k + 1 if side == "right" else k - 1
    ghost = dict(ghost_x=f.X[gk].copy(), ghost_y=f.Y[gk].copy(),
                 ghost_m=(f.m11[gk].copy(), f.m12[gk].copy(), f.m22[gk].copy()))
    if kind.kind == Kind.DIRICHLET:
        return InterfaceTrace(column, f.X[k].copy(), f.Y[k].copy(), **ghost)
    if not kind.is_robin:
        raise AssemblyError(f"no interface data for kind {kind.kind.value}")
    bx, by = robin_operator(kind, side, f.X, f.Y, k, neighbor.grid.d_xi, (f.m11, f.m12, f.m22))
    return InterfaceTrace(column, bx, by, **ghost)


def interior_residual(mesh: PhysicalMesh, params, problem, i, j):
    """Pair (r1, r2) at global interior node (i, j) of a full mesh."""
    g = mesh.grid
    if not (0 < i < g.n_xi - 1 and 0 < j < g.n_eta - 1):
        raise IndexError(f"node ({i}, {j}) is not interior")
    sp = StripProblem.single(g, params, problem)
    R = sp.residual(sp.pack(mesh)).reshape(g.n_xi, g.n_eta, 2)
    return float(R[i, j, 0]), float(R[i, j, 1])


def assemble(state, problem: StripProblem):
    return problem.residual(state)

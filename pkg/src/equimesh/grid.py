"""Computational grid, physical mesh, strip partitions and interface traces."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class PartitionError(ValueError):
    """The requested strip decomposition cannot be built on this grid."""


@dataclass(frozen=True)
class ComputationalGrid:
    n_xi: int
    n_eta: int

    def __post_init__(self):
        if int(self.n_xi) < 3 or int(self.n_eta) < 3:
            raise ValueError(f"grid needs at least 3 nodes per direction, got {self.n_xi}x{self.n_eta}")

    @property
    def d_xi(self) -> float:
        return 1.0 / (self.n_xi - 1)

    @property
    def d_eta(self) -> float:
        return 1.0 / (self.n_eta - 1)

    @property
    def xi(self) -> np.ndarray:
        return np.arange(self.n_xi) * self.d_xi

    @property
    def eta(self) -> np.ndarray:
        return np.arange(self.n_eta) * self.d_eta


@dataclass
class PhysicalMesh:
    """Node coordinates ``x[i, j], y[i, j]`` over the (xi, eta) lattice."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 2:
            raise ValueError(f"x and y must be equal 2D arrays, got {self.x.shape} and {self.y.shape}")

    @property
    def shape(self):
        return self.x.shape

    @property
    def grid(self) -> ComputationalGrid:
        return ComputationalGrid(*self.x.shape)

    def copy(self) -> "PhysicalMesh":
        return PhysicalMesh(self.x.copy(), self.y.copy())

    def columns(self, lo: int, hi: int) -> "PhysicalMesh":
        """Restriction to the inclusive column range ``lo..hi``."""
        return PhysicalMesh(self.x[lo:hi + 1].copy(), self.y[lo:hi + 1].copy())

    def jacobian(self) -> np.ndarray:
        """Discrete Jacobian x_xi*y_eta - x_eta*y_xi at interior nodes (centered)."""
        g = self.grid
        x_xi = (self.x[2:, 1:-1] - self.x[:-2, 1:-1]) / (2 * g.d_xi)
        y_xi = (self.y[2:, 1:-1] - self.y[:-2, 1:-1]) / (2 * g.d_xi)
        x_eta = (self.x[1:-1, 2:] - self.x[1:-1, :-2]) / (2 * g.d_eta)
        y_eta = (self.y[1:-1, 2:] - self.y[1:-1, :-2]) / (2 * g.d_eta)
        return x_xi * y_eta - x_eta * y_xi

    def is_untangled(self) -> bool:
        return bool(np.all(self.jacobian() > 0))


class Kind(str, Enum):
    PHYSICAL = "physical"
    DIRICHLET = "dirichlet"
    LINEAR_ROBIN = "linear-robin"
    NONLINEAR_ROBIN = "nonlinear-robin"


@dataclass(frozen=True)
class TransmissionKind:
    kind: Kind
    p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.is_robin and not (np.isfinite(self.p) and self.p > 0):
            raise ValueError(f"Robin parameter p must be finite and > 0, got {self.p}")

    @property
    def is_robin(self) -> bool:
        return self.kind in (Kind.LINEAR_ROBIN, Kind.NONLINEAR_ROBIN)

    @classmethod
    def physical(cls):
        return cls(Kind.PHYSICAL)

    @classmethod
    def dirichlet(cls):
        return cls(Kind.DIRICHLET)

    @classmethod
    def linear_robin(cls, p):
        return cls(Kind.LINEAR_ROBIN, float(p))

    @classmethod
    def nonlinear_robin(cls, p):
        return cls(Kind.NONLINEAR_ROBIN, float(p))


PHYSICAL = TransmissionKind.physical()


@dataclass(frozen=True)
class SubdomainSpec:
    i_lo: int
    i_hi: int
    left_kind: TransmissionKind = PHYSICAL
    right_kind: TransmissionKind = PHYSICAL

    @property
    def n_cols(self) -> int:
        return self.i_hi - self.i_lo + 1

    @property
    def center(self) -> float:
        return 0.5 * (self.i_lo + self.i_hi)


@dataclass(frozen=True)
class InterfaceTrace:
    """Data handed across an artificial interface at global column ``i``.

    ``g_x, g_y`` are Dirichlet values or Robin right-hand sides.  ``ghost_x``,
    ``ghost_y`` hold the neighbor's column just outside the receiving strip and
    ``ghost_m`` its nodal monitor entries ``(m11, m12, m22)`` there.
    """

    i: int
    g_x: np.ndarray
    g_y: np.ndarray
    ghost_x: np.ndarray | None = field(default=None)
    ghost_y: np.ndarray | None = field(default=None)
    ghost_m: tuple | None = field(default=None)

    def __post_init__(self):
        for name in ("g_x", "g_y", "ghost_x", "ghost_y"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=float)
            if v.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"non-finite value in interface trace {name} at column {self.i}")
            object.__setattr__(self, name, v)
        if self.ghost_m is not None:
            object.__setattr__(self, "ghost_m", tuple(np.asarray(m, dtype=float) for m in self.ghost_m))
        if len(self.g_x) != len(self.g_y):
            raise ValueError("g_x and g_y lengths differ")

    def __len__(self):
        return len(self.g_x)


def make_uniform_mesh(grid: ComputationalGrid) -> PhysicalMesh:
    X, Y = np.meshgrid(grid.xi, grid.eta, indexing="ij")
    return PhysicalMesh(X, Y)


def partition_strips(grid: ComputationalGrid, n_sub: int, overlap_points: int,
                     kind: TransmissionKind | None = None) -> list[SubdomainSpec]:
    """Split the xi columns into ``n_sub`` overlapping strips.

    Consecutive strips share exactly ``overlap_points`` columns; widths differ
    by at most one, with the lower strips taking the remainder.
    """
    if kind is None:
        kind = TransmissionKind.dirichlet()
    if n_sub < 1:
        raise PartitionError(f"n_sub must be >= 1, got {n_sub}")
    if n_sub == 1:
        return [SubdomainSpec(0, grid.n_xi - 1)]
    if overlap_points < 2:
        raise PartitionError(f"overlap must be at least 2 shared columns, got {overlap_points}")

    total = grid.n_xi + (n_sub - 1) * overlap_points
    base, rem = divmod(total, n_sub)
    widths = [base + (1 if s < rem else 0) for s in range(n_sub)]
    if widths[-1] < 3:
        raise PartitionError(
            f"{n_sub} strips with overlap {overlap_points} leave fewer than 3 columns per strip "
            f"on a grid with n_xi={grid.n_xi}")
    if overlap_points >= widths[-1]:
        raise PartitionError(
            f"overlap {overlap_points} must be smaller than the strip width {widths[-1]}")

    specs = []
    lo = 0
    for s, w in enumerate(widths):
        hi = lo + w - 1
        specs.append(SubdomainSpec(
            lo, hi,
            left_kind=PHYSICAL if s == 0 else kind,
            right_kind=PHYSICAL if s == n_sub - 1 else kind,
        ))
        lo = hi - overlap_points + 1
    _check_partition(grid, specs, overlap_points)
    return specs


def _check_partition(grid, specs, overlap_points):
    if specs[0].i_lo != 0 or specs[-1].i_hi != grid.n_xi - 1:
        raise PartitionError("strips do not cover the grid")
    for s0, s1 in zip(specs[:-1], specs[1:]):
        if not (s0.i_lo < s1.i_lo < s0.i_hi < s1.i_hi):
            raise PartitionError(f"strips [{s0.i_lo}..{s0.i_hi}] and [{s1.i_lo}..{s1.i_hi}] do not overlap properly")
        if s0.i_hi - s1.i_lo + 1 != overlap_points:
            raise PartitionError("overlap count mismatch")


def extract_trace(mesh: PhysicalMesh, i: int) -> InterfaceTrace:
    n = mesh.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"column {i} outside 0..{n - 1}")
    return InterfaceTrace(i, mesh.x[i].copy(), mesh.y[i].copy())


def owners(specs: list[SubdomainSpec], n_xi: int) -> np.ndarray:
    """Index of the strip owning each global column (nearest center, ties low)."""
    own = np.empty(n_xi, dtype=int)
    for c in range(n_xi):
        best = None
        for s, sp in enumerate(specs):
            if sp.i_lo <= c <= sp.i_hi:
                d = abs(c - sp.center)
                if best is None or d < best[0]:
                    best = (d, s)
        own[c] = best[1]
    return own


def glue(meshes: list[PhysicalMesh], specs: list[SubdomainSpec]) -> PhysicalMesh:
    n_xi = specs[-1].i_hi + 1
    n_eta = meshes[0].shape[1]
    x = np.empty((n_xi, n_eta))
    y = np.empty((n_xi, n_eta))
    for c, s in enumerate(owners(specs, n_xi)):
        x[c] = meshes[s].x[c - specs[s].i_lo]
        y[c] = meshes[s].y[c - specs[s].i_lo]
    return PhysicalMesh(x, y)


def write_mesh_csv(mesh: PhysicalMesh, path) -> None:
    g = mesh.grid
    xi, eta = g.xi, g.eta
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "xi", "eta", "x", "y"])
        for j in range(g.n_eta):
            for i in range(g.n_xi):
                w.writerow([i, j, repr(float(xi[i])), repr(float(eta[j])),
                            repr(float(mesh.x[i, j])), repr(float(mesh.y[i, j]))])


def read_mesh_csv(path) -> PhysicalMesh:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ni = max(int(r["i"]) for r in rows) + 1
    nj = max(int(r["j"]) for r in rows) + 1
    x = np.full((ni, nj), np.nan)
    y = np.full((ni, nj), np.nan)
    for r in rows:
        i, j = int(r["i"]), int(r["j"])
        x[i, j] = float(r["x"])
        y[i, j] = float(r["y"])
    return PhysicalMesh(x, y)

"""Additive overlapping Schwarz iteration over xi-strips."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .assembly import BoundaryMode, StripProblem, compute_robin_rhs
from .grid import (ComputationalGrid, Kind, PartitionError, PhysicalMesh, TransmissionKind,
                   glue, make_uniform_mesh, partition_strips)
from .monitor import MonitorParams
from .nsolve import NewtonConfig, NewtonError, newton_solve
from .quality import TangledMeshError, q_eq

log = logging.getLogger(__name__)


class SchwarzError(RuntimeError):
    def __init__(self, message, subdomain=None, step=None):
        super().__init__(message)
        self.subdomain = subdomain
        self.step = step


@dataclass(frozen=True)
class SchwarzConfig:
    n: int = 12
    n_eta: int | None = None
    n_sub: int = 2
    overlap: int = 2
    kind: str = "dirichlet"
    p: float | None = None
    a: float = 0.7
    b: float = 0.05
    problem: str = "boundary-layer"
    mode: str = "1d-ep"
    max_outer: int = 50
    outer_tol: float = 1e-8
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    track_quality: bool = True
    parallel: bool = False

    @property
    def grid(self):
        return ComputationalGrid(self.n, self.n_eta or self.n)

    @property
    def params(self):
        return MonitorParams(self.a, self.b)

    @property
    def transmission(self) -> TransmissionKind:
        kind = Kind(self.kind)
        if kind in (Kind.LINEAR_ROBIN, Kind.NONLINEAR_ROBIN):
            if self.p is None:
                raise ValueError(f"{kind.value} transmission needs an explicit p")
            return TransmissionKind(kind, float(self.p))
        if kind != Kind.DIRICHLET:
            raise ValueError(f"interfaces cannot use kind {kind.value}")
        return TransmissionKind.dirichlet()

    def to_dict(self):
        d = asdict(self)
        d["newton"] = asdict(self.newton)
        return d


@dataclass
class ConvergenceHistory:
    err_x: list = field(default_factory=list)   # [n][subdomain]
    err_y: list = field(default_factory=list)
    q_eq: list = field(default_factory=list)
    newton_iters: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    q0: float | None = None

    def __len__(self):
        return len(self.err_x)

    def err(self, n=None):
        """Max error over subdomains and components at outer step ``n`` (1-based)."""
        ex = np.asarray(self.err_x)
        ey = np.asarray(self.err_y)
        tot = np.maximum(ex.max(axis=1), ey.max(axis=1))
        return tot if n is None else float(tot[n - 1])

    def component(self, name, s):
        arr = np.asarray(self.err_x if name == "x" else self.err_y)
        return arr[:, s]

    def to_json(self, config=None):
        its = []
        for n in range(len(self)):
            its.append({
                "n": n + 1,
                "err_x": [float(e) for e in self.err_x[n]],
                "err_y": [float(e) for e in self.err_y[n]],
                "q_eq": None if not self.q_eq else float(self.q_eq[n]),
                "newton_iters": [int(k) for k in self.newton_iters[n]],
            })
        return {"config": config, "iterations": its}

    def write_json(self, path, config=None):
        with open(path, "w") as fh:
            json.dump(self.to_json(config), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "subdomain", "err_x", "err_y"])
            for n in range(len(self)):
                for s in range(len(self.err_x[n])):
                    w.writerow([n + 1, s, repr(float(self.err_x[n][s])), repr(float(self.err_y[n][s]))])


def _solve_with_continuation(sp: StripProblem, initial, newton: NewtonConfig):
    try:
        return newton_solve(sp.residual, initial, newton, sp.coloring())
    except (NewtonError, ArithmeticError) as exc:
        log.info("cold Newton failed (%s); ramping a", exc)
    v = np.asarray(initial, dtype=float)
    a = sp.params.a
    total = 0
    for frac in (0.25, 0.5, 0.75, 1.0):
        ramp = replace(sp, params=MonitorParams(frac * a, sp.params.b), _coloring=sp._coloring)
        v, st = newton_solve(ramp.residual, v, newton, sp.coloring())
        total += st.iterations
    st.iterations = total
    return v, st


def solve_single_domain(grid: ComputationalGrid, params: MonitorParams, problem="boundary-layer",
                        mode=BoundaryMode.ONE_DIM_EP, newton: NewtonConfig | None = None,
                        initial: PhysicalMesh | None = None):
    """Reference mesh from the undecomposed system; returns ``(mesh, stats)``."""
    newton = newton or NewtonConfig()
    sp = StripProblem.single(grid, params, problem, mode)
    init = make_uniform_mesh(grid) if initial is None else initial
    v, st = _solve_with_continuation(sp, sp.pack(init), newton)
    return sp.unpack(v), st


class SchwarzSolver:
    """Holds the strip problems and iterates; one instance per configuration."""

    def __init__(self, config: SchwarzConfig, reference: PhysicalMesh | None = None):
        self.config = config
        self.grid = config.grid
        self.params = config.params
        self.mode = BoundaryMode(config.mode)
        kind = config.transmission if config.n_sub > 1 else TransmissionKind.dirichlet()
        self.specs = partition_strips(self.grid, config.n_sub, config.overlap, kind)
        self.reference = reference
        self.strips = [StripProblem(self.grid, s, self.params, config.problem, self.mode)
                       for s in self.specs]

    def initial_states(self, mesh: PhysicalMesh | None = None):
        mesh = make_uniform_mesh(self.grid) if mesh is None else mesh
        states = [sp.pack(mesh) for sp in self.strips]
        # ghost columns for the first exchange come from the same mesh
        self.strips = self.exchange(states)
        return states

    def exchange(self, states):
        """New strip problems carrying interface data from ``states`` (iterate n-1)."""
        out = []
        for s, sp in enumerate(self.strips):
            left = right = None
            if s > 0:
                left = compute_robin_rhs(sp.spec.left_kind, "left", self.strips[s - 1], states[s - 1], sp.spec.i_lo)
            if s < len(self.strips) - 1:
                right = compute_robin_rhs(sp.spec.right_kind, "right", self.strips[s + 1], states[s + 1], sp.spec.i_hi)
            out.append(sp.with_traces(left, right))
        return out

    def _solve_one(self, s, sp, state, step):
        try:
            return _solve_with_continuation(sp, state, self.config.newton)
        except (NewtonError, ArithmeticError) as exc:
            raise SchwarzError(f"subdomain {s} failed at outer step {step}: {exc}", s, step) from exc

    def step(self, states, n, executor=None):
        """One additive round: every strip solves from iterate n-1 data."""
        new_strips = self.exchange(states)
        if executor is None:
            results = [self._solve_one(s, sp, st, n) for s, (sp, st) in enumerate(zip(new_strips, states))]
        else:
            futs = [executor.submit(self._solve_one, s, sp, st, n)
                    for s, (sp, st) in enumerate(zip(new_strips, states))]
            results = [f.result() for f in futs]
        self.strips = new_strips
        return [r[0] for r in results], [r[1].iterations for r in results]

    def meshes(self, states):
        return [sp.unpack(v) for sp, v in zip(self.strips, states)]

    def glued(self, states):
        return glue(self.meshes(states), self.specs)

    def _quality(self, mesh, n):
        try:
            return q_eq(mesh, self.params, self.config.problem).q_max
        except (TangledMeshError, ArithmeticError) as exc:
            # intermediate glued meshes may fold; the iteration itself goes on
            log.warning("outer %d: glued mesh has no quality value (%s)", n, exc)
            return float("nan")

    def run(self, initial: PhysicalMesh | None = None, max_outer=None):
        cfg = self.config
        max_outer = cfg.max_outer if max_outer is None else max_outer
        states = self.initial_states(initial)
        hist = ConvergenceHistory()
        if cfg.track_quality:
            hist.q0 = q_eq(self.glued(states), self.params, cfg.problem).q_max
        executor = ThreadPoolExecutor(max_workers=len(self.strips)) if cfg.parallel else None
        try:
            for n in range(1, max_outer + 1):
                old = states
                states, iters = self.step(states, n, executor)
                meshes = self.meshes(states)
                ex, ey = [], []
                for sp, m in zip(self.strips, meshes):
                    if self.reference is not None:
                        ref = self.reference.columns(sp.spec.i_lo, sp.spec.i_hi)
                        ex.append(float(np.max(np.abs(m.x - ref.x))))
                        ey.append(float(np.max(np.abs(m.y - ref.y))))
                    else:
                        ex.append(np.nan)
                        ey.append(np.nan)
                hist.err_x.append(ex)
                hist.err_y.append(ey)
                hist.newton_iters.append(iters)
                inc = max(float(np.max(np.abs(a - b))) for a, b in zip(states, old))
                hist.increments.append(inc)
                if cfg.track_quality:
                    hist.q_eq.append(self._quality(glue(meshes, self.specs), n))
                done = (max(max(ex), max(ey)) <= cfg.outer_tol if self.reference is not None
                        else inc <= cfg.outer_tol)
                log.debug("outer %d: err=%s inc=%.3e", n, max(ex + ey), inc)
                if done:
                    break
        finally:
            if executor is not None:
                executor.shutdown()
        self.states = states
        return self.glued(states), hist


def schwarz_iterate(config: SchwarzConfig, reference: PhysicalMesh | None = None,
                    use_reference=True, initial=None):
    """Run the iteration; the single-domain reference is computed when needed."""
    if reference is None and use_reference:
        reference, _ = solve_single_domain(config.grid, config.params, config.problem,
                                           BoundaryMode(config.mode), config.newton)
    solver = SchwarzSolver(config, reference)
    return solver.run(initial)


def run_overlap_sweep(base: SchwarzConfig, overlaps, reference=None):
    """One run per overlap; failures are recorded as exceptions in the result."""
    if reference is None:
        reference, _ = solve_single_domain(base.grid, base.params, base.problem,
                                           BoundaryMode(base.mode), base.newton)
    out = {}
    for ov in overlaps:
        try:
            out[ov] = schwarz_iterate(replace(base, overlap=ov), reference)[1]
        except (PartitionError, SchwarzError, ValueError) as exc:
            out[ov] = exc
    return out


def run_p_sweep(base: SchwarzConfig, kinds, reference=None):
    """``kinds`` is a list of ``(kind, p)``; the reference is shared."""
    kinds = list(kinds)
    if not kinds:
        return {}
    if reference is None:
        reference, _ = solve_single_domain(base.grid, base.params, base.problem,
                                           BoundaryMode(base.mode), base.newton)
    out = {}
    for kind, p in kinds:
        try:
            out[(kind, p)] = schwarz_iterate(replace(base, kind=kind, p=p), reference)[1]
        except (PartitionError, SchwarzError, ValueError) as exc:
            out[(kind, p)] = exc
    return out

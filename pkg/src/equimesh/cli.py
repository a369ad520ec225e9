"""Command line driver: ``equimesh solve|table1|sweep``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .assembly import BoundaryMode
from .grid import ComputationalGrid, PartitionError, partition_strips, write_mesh_csv
from .monitor import MonitorParams, PROBLEMS
from .nsolve import NewtonConfig, NewtonError
from .quality import q_eq, write_quality_csv
from .schwarz import SchwarzConfig, SchwarzError, SchwarzSolver, solve_single_domain

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_PARTITION = 0, 2, 3, 4

METHODS = {"single": None, "classical": "dirichlet",
           "linear-robin": "linear-robin", "nonlinear-robin": "nonlinear-robin"}
TABLE_ROWS = [("classical", "Classical"), ("linear-robin", "Linear Robin"),
              ("nonlinear-robin", "Nonlinear Robin")]

log = logging.getLogger("equimesh")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    problem: str = "boundary-layer"
    n: int = 12
    n_eta: int | None = None
    a: float = 0.7
    b: float = 0.05
    mode: str = "1d-ep"
    method: str = "single"
    n_sub: int = 2
    overlap: int = 2
    p: float | None = None
    max_outer: int = 50
    outer_tol: float = 1e-8
    newton_tol: float = 1e-10
    out: str = "out"

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why} (got {getattr(self, name)!r})")

        if self.problem not in PROBLEMS:
            bad("problem", f"unknown problem, choose from {sorted(PROBLEMS)}")
        if self.method not in METHODS:
            bad("method", f"choose from {list(METHODS)}")
        try:
            BoundaryMode(self.mode)
        except ValueError:
            bad("mode", "choose from " + ", ".join(m.value for m in BoundaryMode))
        if self.n < 3:
            bad("n", "need at least 3 nodes")
        if self.n_eta is not None and self.n_eta < 3:
            bad("n_eta", "need at least 3 nodes")
        if not (np.isfinite(self.a) and self.a >= 0):
            bad("a", "must be finite and >= 0")
        if not (np.isfinite(self.b) and self.b >= 0):
            bad("b", "must be finite and >= 0")
        if self.max_outer < 1:
            bad("max_outer", "must be >= 1")
        if not self.outer_tol > 0:
            bad("outer_tol", "must be > 0")
        if not self.newton_tol > 0:
            bad("newton_tol", "must be > 0")
        if self.method in ("linear-robin", "nonlinear-robin"):
            if self.p is None:
                bad("p", f"{self.method} needs an explicit Robin parameter")
            if not (np.isfinite(self.p) and self.p > 0):
                bad("p", "must be finite and > 0")
        if self.method != "single":
            if self.n_sub < 1:
                bad("n_sub", "must be >= 1")
            # raises PartitionError
            partition_strips(self.grid, self.n_sub, self.overlap)
        return self

    @property
    def grid(self):
        return ComputationalGrid(self.n, self.n_eta or self.n)

    @property
    def params(self):
        return MonitorParams(self.a, self.b)

    def newton(self):
        return NewtonConfig(tol=self.newton_tol)

    def schwarz(self) -> SchwarzConfig:
        return SchwarzConfig(n=self.n, n_eta=self.n_eta, n_sub=self.n_sub, overlap=self.overlap,
                             kind=METHODS[self.method], p=self.p, a=self.a, b=self.b,
                             problem=self.problem, mode=self.mode, max_outer=self.max_outer,
                             outer_tol=self.outer_tol, newton=self.newton())

    def to_dict(self):
        # the output location is not part of the experiment
        d = asdict(self)
        d.pop("out")
        return d


_FIELD_TYPES = {"n": int, "n_eta": int, "n_sub": int, "overlap": int, "max_outer": int,
                "a": float, "b": float, "p": float, "outer_tol": float, "newton_tol": float}


def load_config(path, overrides: dict) -> RunConfig:
    """Defaults, then the JSON file, then explicit flags."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown config field")
    data.update({k: v for k, v in overrides.items() if v is not None})
    for k, v in list(data.items()):
        t = _FIELD_TYPES.get(k)
        if t is None or v is None:
            continue
        try:
            if t is int and float(v) != int(float(v)):
                raise ValueError
            data[k] = t(float(v)) if t is int else t(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{k}: expected {t.__name__} (got {v!r})") from None
    return replace(RunConfig(), **data)


# --- commands ----------------------------------------------------------------

def _history_quality_rows(hist, method, q_inf):
    rows = [(0, method, hist.q0)]
    rows += [(n + 1, method, q) for n, q in enumerate(hist.q_eq)]
    rows.append(("inf", method, q_inf))
    return rows


def cmd_solve(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    mode = BoundaryMode(cfg.mode)
    ref, st = solve_single_domain(cfg.grid, cfg.params, cfg.problem, mode, cfg.newton())
    q_ref = q_eq(ref, cfg.params, cfg.problem).q_max
    if cfg.method == "single":
        write_mesh_csv(ref, out / "mesh.csv")
        write_quality_csv([("inf", "single", q_ref)], out / "quality.csv")
        print(f"q_max {q_ref:.6f}  newton {st.iterations}  residual {st.residual_norm:.3e}")
        return EXIT_OK
    solver = SchwarzSolver(cfg.schwarz(), ref)
    mesh, hist = solver.run()
    write_mesh_csv(mesh, out / "mesh.csv")
    hist.write_json(out / "history.json", cfg.to_dict())
    hist.write_csv(out / "history.csv")
    write_quality_csv(_history_quality_rows(hist, cfg.method, q_ref), out / "quality.csv")
    err = hist.err(len(hist))
    print(f"q_max {hist.q_eq[-1]:.6f}  outer {len(hist)}  err {err:.3e}")
    if not err <= cfg.outer_tol:
        print(f"error: no convergence to {cfg.outer_tol:g} in {cfg.max_outer} outer iterations "
              f"(error {err:.3e})", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def table1(cfg: RunConfig, iterations=5):
    """Rows ``(iteration, method, q_max)`` for the three Schwarz methods."""
    ref, _ = solve_single_domain(cfg.grid, cfg.params, cfg.problem, BoundaryMode(cfg.mode), cfg.newton())
    q_ref = q_eq(ref, cfg.params, cfg.problem).q_max
    rows = []
    for method, _label in TABLE_ROWS:
        sc = replace(cfg, method=method).schwarz()
        # fixed number of sweeps, no early stop
        sc = replace(sc, max_outer=iterations, outer_tol=0.0)
        _, hist = SchwarzSolver(sc, ref).run()
        rows += _history_quality_rows(hist, method, q_ref)
    return rows


def cmd_table1(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = table1(cfg)
    write_quality_csv(rows, out / "table1.csv")
    cols = [str(it) for it, m, _ in rows if m == TABLE_ROWS[0][0]]
    print(f"{'':16s}" + "".join(f"{c:>8s}" for c in cols))
    for method, label in TABLE_ROWS:
        vals = [q for _, m, q in rows if m == method]
        print(f"{label:16s}" + "".join(f"{v:8.4f}" for v in vals))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, axis, values, kinds) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ref, _ = solve_single_domain(cfg.grid, cfg.params, cfg.problem, BoundaryMode(cfg.mode), cfg.newton())
    runs = []
    if axis == "overlap":
        method = "classical" if cfg.method == "single" else cfg.method
        for v in values:
            runs.append((f"{method}_overlap{int(v)}", replace(cfg, method=method, overlap=int(v))))
    else:
        for kind in kinds:
            for v in values:
                runs.append((f"{kind}_p{v:g}", replace(cfg, method=kind, p=float(v))))

    manifest, combined = [], []
    for name, rc in runs:
        entry = {"series": name, "dir": name}
        try:
            rc.validate()
            _, hist = SchwarzSolver(rc.schwarz(), ref).run()
        except (PartitionError, ConfigError, SchwarzError, ValueError) as exc:
            entry.update(status="failed", error=str(exc))
            manifest.append(entry)
            log.warning("run %s failed: %s", name, exc)
            continue
        d = out / name
        d.mkdir(exist_ok=True)
        hist.write_json(d / "history.json", rc.to_dict())
        hist.write_csv(d / "history.csv")
        entry.update(status="ok", iterations=len(hist), final_err=hist.err(len(hist)))
        manifest.append(entry)
        for n in range(len(hist)):
            for s in range(len(hist.err_x[n])):
                combined.append([name, n + 1, s, repr(float(hist.err_x[n][s])),
                                 repr(float(hist.err_y[n][s]))])
    with open(out / "combined.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "n", "subdomain", "err_x", "err_y"])
        w.writerows(combined)
    with open(out / "manifest.json", "w") as fh:
        json.dump({"axis": axis, "runs": manifest}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for e in manifest:
        tail = f"{e['iterations']} iterations, err {e['final_err']:.3e}" if e["status"] == "ok" else e["error"]
        print(f"{e['series']:28s} {e['status']:7s} {tail}")
    return EXIT_OK


# --- argument parsing --------------------------------------------------------

def _float_list(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {s!r}") from None


def build_parser():
    ap = argparse.ArgumentParser(prog="equimesh", description="Equidistributed mesh generation "
                                 "with overlapping Schwarz decomposition.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--problem")
    common.add_argument("--n", type=int, help="nodes per direction (n_xi)")
    common.add_argument("--n-eta", type=int)
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--mode", help="edge treatment: 1d-ep or orthogonality")
    common.add_argument("--method", help="single, classical, linear-robin or nonlinear-robin")
    common.add_argument("--n-sub", type=int)
    common.add_argument("--overlap", type=int, help="shared grid columns between strips")
    common.add_argument("--p", type=float, help="Robin parameter")
    common.add_argument("--max-outer", type=int)
    common.add_argument("--outer-tol", type=float)
    common.add_argument("--newton-tol", type=float)

    sub.add_parser("solve", parents=[common], help="single-domain or Schwarz solve")
    sub.add_parser("table1", parents=[common], help="mesh quality table for the three methods")
    sw = sub.add_parser("sweep", parents=[common], help="histories over overlap or p")
    sw.add_argument("--axis", choices=["overlap", "p"], required=True)
    sw.add_argument("--values", type=_float_list, required=True)
    sw.add_argument("--kinds", default="linear-robin,nonlinear-robin",
                    help="Robin kinds for a p sweep")
    return ap


_OVERRIDES = ["out", "problem", "n", "n_eta", "a", "b", "mode", "method", "n_sub", "overlap",
              "p", "max_outer", "outer_tol", "newton_tol"]


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, {k: getattr(args, k) for k in _OVERRIDES})
        if args.command == "table1":
            cfg = replace(cfg, method="classical", p=2.0 if cfg.p is None else cfg.p)
        if args.command == "sweep":
            kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
            for k in kinds:
                if k not in ("linear-robin", "nonlinear-robin"):
                    raise ConfigError(f"kinds: {k!r} is not a Robin kind")
            if args.axis == "p" and any(not (np.isfinite(v) and v > 0) for v in args.values):
                raise ConfigError(f"values: p must be finite and > 0 (got {args.values})")
            # shared fields are checked once; per-run problems land in the manifest
            replace(cfg, method="single").validate()
            return cmd_sweep(cfg, args.axis, args.values, kinds)
        cfg.validate()
        if args.command == "solve":
            return cmd_solve(cfg)
        return cmd_table1(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PartitionError as exc:
        print(f"partition error: {exc}", file=sys.stderr)
        return EXIT_PARTITION
    except (NewtonError, SchwarzError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

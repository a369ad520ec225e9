import json
from dataclasses import replace

import numpy as np
import pytest

from equimesh.grid import PartitionError
from equimesh.nsolve import NewtonConfig
from equimesh.schwarz import (SchwarzConfig, SchwarzError, SchwarzSolver, run_overlap_sweep, run_p_sweep,
                              schwarz_iterate)


def test_single_subdomain_matches_reference(reference12):
    mesh, hist = schwarz_iterate(SchwarzConfig(n_sub=1), reference12)
    assert len(hist) == 1
    assert np.max(np.abs(mesh.x - reference12.x)) <= 1e-10


@pytest.mark.parametrize("kind,p,overlap", [("dirichlet", None, 4), ("linear-robin", 2.0, 2),
                                            ("nonlinear-robin", 2.0, 2)])
def test_converges_to_reference(kind, p, overlap, reference12):
    mesh, hist = schwarz_iterate(SchwarzConfig(kind=kind, p=p, overlap=overlap), reference12)
    assert hist.err(len(hist)) <= 1e-8
    assert np.max(np.abs(mesh.x - reference12.x)) <= 1e-8
    assert len(hist.q_eq) == len(hist.newton_iters) == len(hist)


def test_classical_monotone_after_two(reference12):
    _, hist = schwarz_iterate(SchwarzConfig(max_outer=15, outer_tol=1e-14), reference12)
    e = hist.err()
    assert np.all(np.diff(e[1:]) <= 0)


def test_robin_beats_classical_at_five(reference12):
    errs = {}
    for kind, p in [("dirichlet", None), ("linear-robin", 2.0), ("nonlinear-robin", 2.0)]:
        _, h = schwarz_iterate(SchwarzConfig(kind=kind, p=p, max_outer=5, outer_tol=1e-14), reference12)
        errs[kind] = h.err(5)
    assert errs["linear-robin"] < errs["dirichlet"] and errs["nonlinear-robin"] < errs["dirichlet"]


def test_three_strips(reference12):
    for kind, p, ov in [("dirichlet", None, 4), ("linear-robin", 5.0, 2), ("nonlinear-robin", 2.0, 2)]:
        mesh, hist = schwarz_iterate(SchwarzConfig(n_sub=3, overlap=ov, kind=kind, p=p, max_outer=120),
                                     reference12)
        assert hist.err(len(hist)) <= 1e-8 and mesh.is_untangled()


def test_standalone_mode_stops_on_increment():
    mesh, hist = schwarz_iterate(SchwarzConfig(kind="linear-robin", p=2.0), use_reference=False)
    assert hist.increments[-1] <= 1e-8 and len(hist) < 50
    assert np.all(np.isnan(hist.err_x[0]))


@pytest.mark.parametrize("kind", ["linear-robin", "nonlinear-robin"])
def test_robin_needs_p(kind):
    with pytest.raises(ValueError):
        SchwarzConfig(kind=kind).transmission


def test_inner_failure_names_subdomain(reference12):
    cfg = SchwarzConfig(newton=NewtonConfig(max_iter=1))
    with pytest.raises(SchwarzError) as exc:
        schwarz_iterate(cfg, reference12)
    assert exc.value.subdomain in (0, 1) and exc.value.step == 1


def test_overlap_sweep(reference12):
    out = run_overlap_sweep(SchwarzConfig(max_outer=10, outer_tol=1e-14), [2, 4, 30], reference12)
    assert set(out) == {2, 4, 30}
    assert isinstance(out[30], PartitionError)
    assert out[4].err(10) < out[2].err(10)
    direct = schwarz_iterate(SchwarzConfig(max_outer=10, outer_tol=1e-14, overlap=4), reference12)[1]
    assert direct.err_x == out[4].err_x


def test_p_sweep(reference12):
    assert run_p_sweep(SchwarzConfig(), []) == {}
    out = run_p_sweep(SchwarzConfig(), [("linear-robin", 1.0), ("linear-robin", -1.0)], reference12)
    assert isinstance(out[("linear-robin", -1.0)], ValueError)
    assert len(out[("linear-robin", 1.0)]) > 1


def test_history_exports(tmp_path, reference12):
    cfg = SchwarzConfig(kind="linear-robin", p=2.0, max_outer=3, outer_tol=1e-14)
    _, hist = schwarz_iterate(cfg, reference12)
    hist.write_json(tmp_path / "h.json", cfg.to_dict())
    hist.write_csv(tmp_path / "h.csv")
    data = json.loads((tmp_path / "h.json").read_text())
    assert data["config"]["kind"] == "linear-robin"
    its = data["iterations"]
    assert [it["n"] for it in its] == [1, 2, 3]
    assert set(its[0]) == {"n", "err_x", "err_y", "q_eq", "newton_iters"}
    assert len(its[0]["err_x"]) == 2
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "n,subdomain,err_x,err_y" and len(lines) == 1 + 3 * 2


def test_fixed_point_is_stationary(reference12):
    for kind, p in [("dirichlet", None), ("linear-robin", 2.0), ("nonlinear-robin", 2.0)]:
        solver = SchwarzSolver(SchwarzConfig(kind=kind, p=p, max_outer=2, outer_tol=1e-300), reference12)
        _, hist = solver.run(initial=reference12)
        assert max(hist.err()) <= 10 * 1e-10


def test_folded_glued_mesh_has_nan_quality():
    from equimesh.grid import ComputationalGrid, make_uniform_mesh
    m = make_uniform_mesh(ComputationalGrid(12, 12))
    m.x[4], m.x[5] = m.x[5].copy(), m.x[4].copy()
    assert np.isnan(SchwarzSolver(SchwarzConfig())._quality(m, 1))


def test_components_contract_at_similar_rates(reference12):
    # classical, overlap 4: after the first sweep every component shrinks by a similar factor
    _, h = schwarz_iterate(SchwarzConfig(overlap=4), reference12)
    E = np.hstack([np.asarray(h.err_x), np.asarray(h.err_y)])
    one = E[1:] / E[:-1]
    two = E[2:] / E[:-2]
    assert np.sum(one.max(1) / one.min(1) >= 3) <= 1
    assert np.all((two.max(1) / two.min(1))[1:] < 1.5)

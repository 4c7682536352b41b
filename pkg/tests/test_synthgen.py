import statistics

import numpy as np
import pytest
from scipy import stats

from optseg import formats
from optseg.demand import make_route
from optseg.synthgen import (LENGTH_CLASSES, GenConfig, generate, generate_facilities,
                             generate_routes, grid_network)


@pytest.fixture(scope="module")
def grid():
    return grid_network(41, 41, spacing=0.1, jitter=0.2, seed=5)


def test_grid_shape():
    net = grid_network(3, 4, spacing=2.0)
    assert len(net.vertices) == 12
    assert len(net.edges) == 3 * 3 + 2 * 4
    assert {e.length for e in net.edges.values()} == {2.0}


def test_config_checks():
    with pytest.raises(ValueError):
        GenConfig(points_min=10, points_max=5)
    with pytest.raises(ValueError):
        GenConfig(step_length=0)
    with pytest.raises(ValueError):
        GenConfig(n_routes=-1)


def test_same_seed_same_files(grid, tmp_path):
    cfg = GenConfig(seed=9, n_routes=50, n_facilities=30)
    for run in ("a", "b"):
        routes, facs = generate(grid, cfg)
        formats.write_routes(routes, tmp_path / f"{run}.r")
        formats.write_facilities(facs, tmp_path / f"{run}.f")
    assert (tmp_path / "a.r").read_bytes() == (tmp_path / "b.r").read_bytes()
    assert (tmp_path / "a.f").read_bytes() == (tmp_path / "b.f").read_bytes()
    routes, _ = generate(grid, GenConfig(seed=10, n_routes=50, n_facilities=30))
    formats.write_routes(routes, tmp_path / "c.r")
    assert (tmp_path / "a.r").read_bytes() != (tmp_path / "c.r").read_bytes()


def test_point_budgets_and_usages(grid):
    info = {}
    cfg = GenConfig(seed=2, n_routes=1000, n_facilities=0)
    routes = generate_routes(grid, cfg, stats=info)
    assert len(info["planned"]) == 1000
    assert all(480 <= n <= 520 for n in info["planned"])
    assert all(e <= n for e, n in zip(info["emitted"], info["planned"]))
    # most walks run their full budget; the rest were boxed in by their own
    # earlier edges
    assert sum(e == n for e, n in zip(info["emitted"], info["planned"])) > 700
    for ro in routes:
        assert 1 <= ro.count <= 20 and len(ro.usages) == ro.count
        assert all(1 <= u <= 20 for u in ro.usages)


def test_median_length_scales_with_step(grid):
    medians = {}
    for name, step in LENGTH_CLASSES.items():
        routes = generate_routes(grid, GenConfig(seed=4, n_routes=400, step_length=step))
        medians[name] = statistics.median(ro.length for ro in routes)
    for name in ("medium", "long"):
        want = LENGTH_CLASSES[name] / LENGTH_CLASSES["short"]
        got = medians[name] / medians["short"]
        assert abs(got / want - 1) < 0.2


def test_routes_pass_ingest_validation(grid):
    for ro in generate_routes(grid, GenConfig(seed=3, n_routes=200)):
        again = make_route(grid, ro.rid, ro.r, ro.usages)
        assert again.length == pytest.approx(ro.length)
        assert len(set(p.eid for p in ro.trace.pieces)) == len(ro.trace.pieces)


def test_no_facilities(grid):
    assert generate_facilities(grid, GenConfig(n_facilities=0)) == []


def test_facility_edges_follow_length():
    """Edge choice is proportional to length: chi-square over 1e5 draws."""
    net = grid_network(6, 6, spacing=1.0, jitter=0.4, seed=1)
    facs = generate_facilities(net, GenConfig(seed=8, n_facilities=100_000))
    ids = sorted(net.edges)
    counts = {e: 0 for e in ids}
    for f in facs:
        counts[f.p.eid] += 1
    lengths = np.array([net.edges[e].length for e in ids])
    expected = lengths / lengths.sum() * len(facs)
    _, p = stats.chisquare([counts[e] for e in ids], expected)
    assert p > 0.001
    offsets = [f.p.d for f in facs[:5000]]
    assert stats.kstest(offsets, "uniform").pvalue > 0.001

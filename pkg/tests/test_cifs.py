import numpy as np
import pytest
from conftest import band_system, bump_system
from hypothesis import given, settings
from hypothesis import strategies as st

from svfractal.cifs import (
    THREADS_ENV,
    GraphCloud,
    GraphPoint,
    apply_G,
    apply_G_cloud,
    attractor_defect,
    cloud_hausdorff,
    d_metric,
    graph_cloud,
    graph_metric,
    nearest_distance,
    random_cloud,
    thread_count,
    verify_contraction,
)
from svfractal.errors import ConfigError, IndexBeyondTruncation, IndexZero
from svfractal.intervals import Interval
from svfractal.rb import FractalSystem, fixed_point


def gp(t, lo, hi):
    return GraphPoint(t, Interval(lo, hi))


@pytest.fixture(scope="module")
def small():
    sys = band_system(0.5, N=16, grid_size=1025)
    return sys, fixed_point(sys)


@pytest.fixture(scope="module")
def flat():
    sys = band_system(0.5, N=16, grid_size=1025)
    sys = FractalSystem(sys.phi, sys.base, 0.0, sys.partition)
    return sys, fixed_point(sys)


def brute_nearest(q: GraphCloud, r: GraphCloud) -> np.ndarray:
    d = np.abs(q.t[:, None] - r.t[None, :]) + np.maximum(
        np.abs(q.lo[:, None] - r.lo[None, :]), np.abs(q.hi[:, None] - r.hi[None, :])
    )
    return d.min(axis=1)


def test_graph_metric_examples():
    x, y = gp(0, 0, 1), gp(0.5, 0, 2)
    assert graph_metric(x, y) == 1.5
    assert graph_metric(x, x) == 0
    assert graph_metric(y, x) == 1.5


def test_d_metric_examples(small, flat):
    sys, ff = small
    x, y = gp(0.2, 1, 2), gp(0.7, 0.5, 3)
    assert d_metric(x, x, ff) == 0
    assert d_metric(x, y, ff) >= 0.5
    # with alpha = 0 the fractal function is Phi itself
    _, f0 = flat
    p2, p7 = (0.2**2 + 1, 0.2**2 + 2), (0.7**2 + 1, 0.7**2 + 2)
    a = (1 + p7[0], 2 + p7[1])
    b = (0.5 + p2[0], 3 + p2[1])
    want = 0.5 + max(abs(a[0] - b[0]), abs(a[1] - b[1]))
    assert d_metric(x, y, f0) == pytest.approx(want, abs=1e-6)


def test_apply_G_examples(flat):
    sys, ff = flat
    x = apply_G(sys, 3, gp(0.4, -5, 7))
    t = sys.partition.zeta(3, 0.4)
    assert x.t == t
    assert (x.s.lo, x.s.hi) == pytest.approx((t * t + 1, t * t + 2), abs=1e-6)
    with pytest.raises(IndexBeyondTruncation):
        apply_G(sys, 17, gp(0.4, 0, 1))
    with pytest.raises(IndexZero):
        apply_G(sys, 0, gp(0.4, 0, 1))


def test_interpolating_start_is_fixed_by_first_map():
    sys = bump_system(0.5, N=16, grid_size=257)
    v = sys.phi.value_at(0).parts[0]
    x = apply_G(sys, 1, gp(0.0, v.lo, v.hi))
    assert x.t == 0.0 and (x.s.lo, x.s.hi) == pytest.approx((v.lo, v.hi), abs=1e-15)


@pytest.mark.parametrize("j", [1, 2, 3, 7])
def test_graph_covariance_at_exact_preimages(small, j):
    sys, ff = small
    # dyadic rationals: zeta_j and its inverse are exact in binary floating point
    t = np.arange(0, 1024) / 1024
    img = apply_G_cloud(sys, j, GraphCloud.on_graph(ff, t))
    lo, hi = ff.hull_at(img.t)
    assert np.max(np.abs(img.lo - lo)) <= 1e-9 and np.max(np.abs(img.hi - hi)) <= 1e-9
    assert np.array_equal(img.lo, img.anchor_lo)


def test_contraction_bounds(small):
    sys, ff = small
    rep = verify_contraction(sys, ff, n=2000, seed=1)
    assert rep.holds
    assert rep.max_ratio <= 0.5 + 1e-9
    assert rep.pairs == 2000


def test_contraction_small_alpha_first_map():
    sys = band_system(0.1, N=16, grid_size=513)
    ff = fixed_point(sys)
    rep = verify_contraction(sys, ff, n=2000, seed=2, maps=[1, 2, 5])
    assert rep.bounds.tolist() == [0.5, 0.25, 0.1]
    assert rep.holds and rep.ratios[0] <= 0.5 + 1e-9


_FF = {}


def _cached_ff(sys):
    key = (sys.alpha, sys.partition.N, len(sys.grid))
    if key not in _FF:
        _FF[key] = fixed_point(sys)
    return _FF[key]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metric_axioms(seed):
    sys = band_system(0.5, N=16, grid_size=257)
    ff = _cached_ff(sys)
    rng = np.random.default_rng(seed)
    c = random_cloud(ff, 3, rng)
    x, y, z = c[0], c[1], c[2]
    for m in (graph_metric, lambda a, b: d_metric(a, b, ff)):
        assert m(x, x) == 0
        assert m(x, y) == pytest.approx(m(y, x), abs=1e-12)
        assert m(x, y) <= m(x, z) + m(z, y) + 1e-12
    assert d_metric(x, y, ff) >= abs(x.t - y.t)


def test_nearest_distance_matches_brute_force(rng):
    a = GraphCloud(rng.uniform(0, 1, 700), rng.normal(size=700), rng.normal(size=700) + 5)
    b = GraphCloud(rng.uniform(0, 1, 300), rng.normal(size=300), rng.normal(size=300) + 5)
    assert nearest_distance(a, b) == pytest.approx(brute_nearest(a, b), abs=1e-15)
    want = max(brute_nearest(a, b).max(), brute_nearest(b, a).max())
    assert cloud_hausdorff(a, b) == pytest.approx(want, abs=1e-15)


def test_nearest_distance_threads(monkeypatch, rng):
    a = GraphCloud(rng.uniform(0, 1, 200), np.zeros(200), np.ones(200))
    b = GraphCloud(rng.uniform(0, 1, 50), np.zeros(50), np.ones(50))
    monkeypatch.setenv(THREADS_ENV, "3")
    assert thread_count() == 3
    assert nearest_distance(a, b) == pytest.approx(brute_nearest(a, b))
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ConfigError):
        thread_count()


def test_attractor_defect_alpha_zero(flat):
    sys, ff = flat
    gap = 1 / 1023
    assert attractor_defect(sys, ff, 1024) <= 2 * gap


def test_attractor_defect_single_fixed_point():
    sys = bump_system(0.5, N=16, grid_size=257)
    ff = fixed_point(sys)
    cloud = GraphCloud.on_graph(ff, [0.0])
    assert attractor_defect(sys, ff, maps=[1], cloud=cloud) == 0


def test_cloud_csv_and_points(small):
    _, ff = small
    c = graph_cloud(ff, 5)
    rows = c.to_csv().splitlines()
    assert rows[0] == "t,lower,upper" and len(rows) == len(c) + 1
    assert np.all(np.isin(ff.system.partition.retained_nodes(), c.t))
    assert float(rows[1].split(",")[0]) == 0.0
    back = GraphCloud.from_points([c[i] for i in range(len(c))])
    assert np.array_equal(back.lo, c.lo) and back.anchored
    with pytest.raises(ValueError):
        GraphCloud([0.0], [1.0], [0.0])

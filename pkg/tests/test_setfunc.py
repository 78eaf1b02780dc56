import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svfractal.errors import DomainMismatch, EndpointHypothesisViolated, EnvelopeCrossing, NonFiniteResult, OutOfDomain
from svfractal.intervals import CompactSet
from svfractal.partition import Partition
from svfractal.setfunc import (
    SetFunction,
    base_function,
    endpoint_defect,
    leq,
    norm_inf,
    random_convex,
    sup_metric,
    system_grid,
)

P = Partition.dyadic(N=24)
I = CompactSet.interval


def env(lo, hi, size=257, p=P):
    return SetFunction.from_envelopes(lo, hi, p, size)


BAND = env("t^2+1", "t^2+2")
LINE = env("1", "1")


def test_grid_contains_nodes_and_endpoints():
    g = system_grid(P, 257)
    assert g[0] == 0.0 and g[-1] == 1.0
    assert np.all(np.isin(P.retained_nodes(), g))
    assert np.all(np.diff(g) > 0)


def test_envelope_examples():
    assert LINE.evaluate(0.3) == CompactSet.point(1.0)
    assert BAND.evaluate(0.0) == I(1, 2)
    assert BAND.evaluate(1.0) == I(2, 3)
    f = env("0", "t")
    for t in f.grid[::17]:
        assert f.evaluate(t) == I(0, t)


def test_envelope_errors():
    with pytest.raises(EnvelopeCrossing) as e:
        env("t", "0.5")
    assert e.value.t > 0.5
    with pytest.raises(NonFiniteResult):
        env("1/t", "2/t")


def test_evaluate_between_grid_points():
    f = env("t", "2*t+1")
    g = f.grid
    mid = 0.5 * (g[3] + g[4])
    assert f.evaluate(mid) == I(mid, 2 * mid + 1)
    assert f.evaluate(g[5]) == f.value_at(5)
    with pytest.raises(OutOfDomain):
        f.evaluate(1.5)


def test_multi_part_interpolation():
    grid = [0.0, 1.0]
    f = SetFunction.from_sets(grid, [CompactSet([(0, 1), (3, 4)]), CompactSet([(2, 3), (5, 6)])])
    assert f.evaluate(0.5) == CompactSet([(1, 2), (4, 5)])
    # mismatched part counts fall back to hulls
    h = SetFunction.from_sets(grid, [CompactSet([(0, 1), (3, 4)]), I(0, 2)])
    assert h.evaluate(0.5) == I(0, 3)


def test_sup_metric_examples():
    assert sup_metric(BAND, BAND) == 0
    c = 2.5
    zero = SetFunction.constant(0.0, BAND.grid)
    assert sup_metric(zero, SetFunction.constant(c, BAND.grid)) == c
    assert sup_metric(BAND, BAND.shift(1.0)) == pytest.approx(1.0, abs=1e-15)
    other = SetFunction.from_envelopes("t", "t", Partition.dyadic(t_inf=2.0), 65)
    with pytest.raises(DomainMismatch):
        sup_metric(BAND, other)


def test_sup_metric_on_different_grids():
    coarse, fine = env("t", "t+1", 65), env("t", "t+1", 513)
    assert sup_metric(coarse, fine) <= 1e-12
    quad_c, quad_f = env("t^2", "t^2", 65), env("t^2", "t^2", 513)
    # interpolation error of t^2 is at most step^2 / 4
    step = 1 / 64
    assert 0 < sup_metric(quad_c, quad_f) <= step**2 / 4 + 1e-15


def test_leq_examples():
    pts = np.linspace(0, 1, 50)
    assert leq(BAND, BAND, pts)
    assert leq(env("0", "t"), env("-1", "t+1"), pts)
    assert not leq(BAND, LINE, pts)


def test_norm_inf_examples():
    assert norm_inf(LINE) == 1
    assert norm_inf(BAND) == 3
    assert norm_inf(SetFunction.constant(0.0, BAND.grid)) == 0


def test_base_function_examples():
    f = env("sin(pi*t)", "sin(pi*t)+t*(1-t)")
    b = base_function(f, "1", P)
    # single-valued and equal at both ends: B(t1) = Phi(t1)
    assert b.value_at(0) == f.value_at(0)
    c = SetFunction.constant(0.7, BAND.grid)
    assert sup_metric(base_function(c, "1"), c) == 0
    with pytest.raises(EndpointHypothesisViolated):
        base_function(f, "2")


def test_base_function_formula_pointwise():
    f = env("sin(pi*t)", "sin(pi*t)+t*(1-t)")
    b = base_function(f, "1+t*(1-t)")
    first, last = f.value_at(0), f.value_at(-1)
    for g in (0, 40, 130, len(f.grid) - 1):
        t, h = f.grid[g], 1 + f.grid[g] * (1 - f.grid[g])
        v = f.value_at(g)
        want = h * v + t * (last - first) + (1 - t) * (first - v)
        assert b.value_at(g) == want


def test_band_example_base_violates_endpoint_condition():
    with pytest.raises(EndpointHypothesisViolated):
        base_function(BAND, "1")


def test_csv_format():
    f = env("0", "t", 3)
    lines = f.to_csv().splitlines()
    assert lines[0] == "t,lower,upper"
    assert len(lines) == 1 + len(f.grid)
    t, lo, hi = map(float, lines[-1].split(","))
    assert (t, lo, hi) == (1.0, 0.0, 1.0)
    g = SetFunction.from_sets([0.0, 1.0], [CompactSet([(0, 1), (2, 3)]), I(0, 1)])
    assert g.to_csv().splitlines()[0] == "t,part_index,lower,upper"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sup_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    f, g, h = (random_convex(BAND.grid, rng) for _ in range(3))
    fg = sup_metric(f, g)
    assert fg >= 0 and sup_metric(f, f) == 0
    assert fg == sup_metric(g, f)
    assert fg <= sup_metric(f, h) + sup_metric(h, g) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.integers(1, 12))
def test_refinement_within_modulus(coef, k):
    a, b, w = coef
    lo = f"{a}*sin({k}*pi*t)+{b}*t^2"
    hi = f"{lo}+{abs(w)}*(1+cos({k}*t))"
    coarse, fine = env(lo, hi, 129), env(lo, hi, 257)
    assert sup_metric(coarse, fine) <= coarse.modulus() + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 2), st.floats(-1, 1))
def test_base_endpoint_condition(c, w, k):
    # single-valued, equal endpoint values; arbitrary interior width
    f = env(f"{c}+{k}*sin(pi*t)", f"{c}+{k}*sin(pi*t)+{w}*t*(1-t)")
    b = base_function(f, "1+t*(1-t)")
    assert endpoint_defect(f, b) <= 1e-9

import itertools
import math

import numpy as np
import pytest
from conftest import band_system
from hypothesis import given, settings
from hypothesis import strategies as st

from svfractal.cifs import GraphCloud
from svfractal.errors import SizeMismatch, TooLarge
from svfractal.measure import (
    GENERATOR,
    ProbabilityVector,
    chaos_game,
    mk_distance,
    self_similarity_defect,
    support_check,
    two_seed_baseline,
)
from svfractal.rb import FractalSystem, fixed_point
from svfractal.setfunc import SetFunction

# two-seed baseline of the default band system (seeds 0 and 1, n=512 orbit
# points, burn-in 100), recorded once; C = baseline * sqrt(atoms)
BASELINE_512 = 0.14535780416450553
C_CALIBRATED = BASELINE_512 * math.sqrt(412)


def brute_ot(a: GraphCloud, b: GraphCloud) -> float:
    """Minimum over all permutations of the mean graph-metric matching cost."""
    n = len(a)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        cost = sum(
            abs(a.t[i] - b.t[j]) + max(abs(a.lo[i] - b.lo[j]), abs(a.hi[i] - b.hi[j])) for i, j in enumerate(perm)
        )
        best = min(best, cost / n)
    return best


def random_atoms(rng, n):
    lo = rng.normal(size=n)
    return GraphCloud(rng.uniform(0, 1, n), lo, lo + rng.uniform(0, 1, n))


@pytest.fixture(scope="module")
def p_band(band):
    sys, _ = band
    return ProbabilityVector.proportional(sys.partition)


def test_probability_vector_normalisation():
    p = ProbabilityVector.explicit([1, 2, 3, 4])
    assert math.fsum(p.weights.tolist()) == 1.0
    assert p.weights == pytest.approx([0.1, 0.2, 0.3, 0.4])
    q = ProbabilityVector.proportional(band_system(0.5, N=30, grid_size=65).partition)
    assert math.fsum(q.weights.tolist()) == 1.0 and np.all(q.weights > 0)
    with pytest.raises(ValueError):
        ProbabilityVector.explicit([0.5, 0.0, 0.5])
    with pytest.raises(ValueError):
        ProbabilityVector.explicit([-1, 2])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=60))
def test_renormalisation_exact(weights):
    p = ProbabilityVector.explicit(weights)
    assert math.fsum(p.weights.tolist()) == 1.0
    assert np.all(p.weights > 0)


def test_inverse_cdf_draw_frequencies():
    p = ProbabilityVector.explicit([0.5, 0.25, 0.25])
    idx = p.draw(np.random.default_rng(0), 200_000)
    freq = np.bincount(idx, minlength=4)[1:] / len(idx)
    assert freq == pytest.approx([0.5, 0.25, 0.25], abs=5e-3)
    assert ProbabilityVector.dirac(5, 3).draw(np.random.default_rng(0), 100).tolist() == [3] * 100


def test_chaos_game_deterministic(band, p_band):
    sys, ff = band
    a = chaos_game(sys, ff, p_band, 3000, 100, seed=7)
    b = chaos_game(sys, ff, p_band, 3000, 100, seed=7)
    c = chaos_game(sys, ff, p_band, 3000, 100, seed=8)
    assert np.array_equal(a.atoms.t, b.atoms.t) and np.array_equal(a.atoms.lo, b.atoms.lo)
    assert not np.array_equal(a.atoms.t, c.atoms.t)
    assert a.n == 2900
    assert a.metadata() == {"seed": 7, "n": 2900, "burn_in": 100, "p_spec": "proportional", "generator": GENERATOR}
    with pytest.raises(ValueError):
        chaos_game(sys, ff, p_band, 100, 100)


def test_atoms_satisfy_the_orbit_recurrence(band, p_band):
    sys, ff = band
    m = chaos_game(sys, ff, p_band, 400, 0, seed=3)
    x = m.atoms
    # replay each step with the point map
    from svfractal.cifs import apply_G_cloud

    nxt = apply_G_cloud(sys, m.indices, x.take(np.arange(len(x) - 1)))
    assert np.max(np.abs(nxt.t - x.t[1:])) <= 1e-15
    assert np.max(np.abs(nxt.lo - x.lo[1:])) <= 1e-12


def test_dirac_collapse(band):
    sys, ff = band
    m = chaos_game(sys, ff, ProbabilityVector.dirac(sys.partition.N, 1), 300, 100)
    # fixed point of S -> a S + Phi(0) - a B(0): [(1 - 0.5*2)/0.5, (2 - 0.5*1)/0.5]
    assert np.all(m.atoms.t == 0.0)
    assert np.max(np.abs(m.atoms.lo - 0.0)) <= 1e-12
    assert np.max(np.abs(m.atoms.hi - 3.0)) <= 1e-12
    d_small = self_similarity_defect(sys, ff, ProbabilityVector.dirac(sys.partition.N, 1), 200, 0)
    assert d_small <= 1e-12


def test_support_of_default_run(band, p_band):
    sys, ff = band
    m = chaos_game(sys, ff, p_band, 20000, 100, seed=0)
    assert support_check(m, ff, 1e-3) >= 0.999


def test_support_alpha_zero():
    sys = band_system(0.5, N=16, grid_size=1025)
    sys = FractalSystem(sys.phi, sys.base, 0.0, sys.partition)
    ff = fixed_point(sys)
    p = ProbabilityVector.proportional(sys.partition)
    m = chaos_game(sys, ff, p, 3000, 0, seed=1)
    assert support_check(m, ff, 2 / 1024) == 1.0
    lo, hi = sys.phi.hull_at(m.atoms.t)
    assert np.max(np.abs(m.atoms.lo - lo)) <= 1e-12


def test_mk_matches_permutation_oracle(rng):
    for n in (1, 3, 5, 7):
        a, b = random_atoms(rng, n), random_atoms(rng, n)
        assert mk_distance(a, b) == pytest.approx(brute_ot(a, b), abs=1e-12)


def test_mk_translation_and_identity(rng):
    a = random_atoms(rng, 300)
    assert mk_distance(a, a) == 0
    c = 0.37
    assert mk_distance(a, GraphCloud(a.t, a.lo + c, a.hi + c)) == pytest.approx(c, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_mk_metric_axioms(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = (random_atoms(rng, n) for _ in range(3))
    ab = mk_distance(a, b)
    assert ab >= 0
    assert ab == pytest.approx(mk_distance(b, a), abs=1e-9)
    assert ab <= mk_distance(a, c) + mk_distance(c, b) + 1e-9


def test_mk_errors(rng):
    with pytest.raises(SizeMismatch):
        mk_distance(random_atoms(rng, 3), random_atoms(rng, 4))
    with pytest.raises(TooLarge):
        mk_distance(random_atoms(rng, 1025), random_atoms(rng, 1025))
    with pytest.raises(ValueError):
        mk_distance(random_atoms(rng, 3), random_atoms(rng, 3), metric="D")


def test_d_metric_cost_uses_anchors(band, p_band):
    sys, ff = band
    m1 = chaos_game(sys, ff, p_band, 200, 100, seed=0)
    m2 = chaos_game(sys, ff, p_band, 200, 100, seed=1)
    # the D cost dominates the abscissa term |t - w| pair by pair
    flat = [GraphCloud(m.atoms.t, 0 * m.atoms.t, 0 * m.atoms.t) for m in (m1, m2)]
    assert mk_distance(m1, m2, "D", ff) >= mk_distance(*flat) - 1e-12
    assert mk_distance(m1, m1, "D", ff) == 0


def test_frozen_baseline(band, p_band):
    sys, ff = band
    assert two_seed_baseline(sys, ff, p_band, 512, (0, 1)) == pytest.approx(BASELINE_512, abs=1e-12)


def test_baseline_scaling_with_calibrated_constant(band, p_band):
    sys, ff = band
    n = 1024
    vals = [two_seed_baseline(sys, ff, p_band, n, (s, s + 1)) for s in range(10, 20, 2)]
    assert np.mean(vals) <= C_CALIBRATED / math.sqrt(n - 100)


def test_self_similarity_default(band, p_band):
    sys, ff = band
    d = self_similarity_defect(sys, ff, p_band, 512, 0)
    assert d <= 2 * two_seed_baseline(sys, ff, p_band, 512, (0, 1))


def test_self_similarity_constant_line():
    p_ = band_system(0.5, N=16, grid_size=257).partition
    phi = SetFunction.from_envelopes("1", "1", p_, 257)
    sys = FractalSystem(phi, phi, 0.0, p_)
    ff = fixed_point(sys)
    d = self_similarity_defect(sys, ff, ProbabilityVector.proportional(p_), 300, 0)
    assert d <= 0.05
    # the values are exactly {1}: only the t-coordinate contributes
    m = chaos_game(sys, ff, ProbabilityVector.proportional(p_), 300, 0, 0)
    assert np.all(m.atoms.lo == 1.0) and np.all(m.atoms.hi == 1.0)

"""Sample the invariant measure of the band system by chaos game.

Every atom should sit on the graph of Phi^alpha, the pushed-forward measure
should be close to the original, and a Dirac weight on the first map
collapses the orbit onto that map's fixed point.
"""

from svfractal import ProbabilityVector, chaos_game, fixed_point
from svfractal.measure import self_similarity_defect, support_check, two_seed_baseline
from svfractal.partition import Partition
from svfractal.rb import FractalSystem
from svfractal.setfunc import SetFunction

p = Partition.dyadic(N=24)
phi = SetFunction.from_envelopes("t^2+1", "t^2+2", p, 4097)
base = SetFunction.from_envelopes("t^2+1-t*(1-t)", "t^2+2+t*(1-t)", p, 4097)
sys = FractalSystem(phi, base, 0.5, p)
ff = fixed_point(sys, 1e-10)
prob = ProbabilityVector.proportional(p)

m = chaos_game(sys, ff, prob, 20_000, 100, seed=0)
print(f"{m.n} atoms, fraction on the graph (eps=1e-3): {support_check(m, ff, 1e-3):.4f}")

for n in (256, 512, 1024):
    ssd = self_similarity_defect(sys, ff, prob, n, 0)
    base_line = two_seed_baseline(sys, ff, prob, n, (0, 1))
    print(f"n={n:5d}  defect {ssd:.4f}  two-seed noise {base_line:.4f}")

d = chaos_game(sys, ff, ProbabilityVector.dirac(p.N, 1), 300, 100)
dev = max(abs(d.atoms.t).max(), abs(d.atoms.lo).max(), abs(d.atoms.hi - 3.0).max())
print(f"Dirac p_1=1: all atoms within {dev:.1e} of (0, [0, 3])")

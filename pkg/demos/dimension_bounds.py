"""Moran bounds for the graph dimension, with a box-counting cross-check."""

import math

from svfractal import GraphCloud, RatioSequence, SetFunction, box_count_estimate, s_star, s_upper
from svfractal.dimension import dimension_report
from svfractal.partition import Partition

res = s_star(RatioSequence.formula(lambda i: 2.0**-i))
print(f"b_i = 2^-i: s_k climbs to {res.s_star:.9f} after {len(res.s_k) + 1} terms")
print("first few s_k:", ", ".join(f"{s:.4f}" for s in res.s_k[:6]))
print(f"c_i = 0.9^i: s_upper = {s_upper(RatioSequence.formula(lambda i: 0.9**i)):.4f}"
      f" (closed form {math.log(2) / math.log(1 / 0.9):.4f})")

p = Partition.dyadic(N=24)
for alpha in (0.25, 0.5, 0.9):
    d = dimension_report(alpha, p).to_dict()
    print(f"alpha={alpha}: s_star={d['s_star']:.6f}  s_upper={d['s_upper']}")

for name, env in (("band", ("t^2+1", "t^2+2")), ("line", ("1", "1"))):
    f = SetFunction.from_envelopes(*env, p, 4097)
    print(f"box-counting estimate for the {name}: {box_count_estimate(GraphCloud.on_graph(f, f.grid)):.3f}")

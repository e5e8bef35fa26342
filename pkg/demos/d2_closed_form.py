"""
The d = 2 optimum by hand
=========================

With only degrees 1 and 2 the objective has a closed form in terms of the
dilogarithm, so the optimum can be found by one-dimensional root finding and
compared with the general-purpose optimizer.
"""
import numpy as np

from ltrae import d2_closed_form, objective_f, optimize_degree_distribution, solve_d2
from ltrae.core import DegreeDistribution
from ltrae.bounds import PI_OVER_4

# f and -df/dp1 along the edge p = (1 - p2, p2)
for p2 in (0.2, 0.5, 0.8, 0.95):
    c = d2_closed_form(p2)
    quad = objective_f(DegreeDistribution(np.array([1 - p2, p2])))
    print(f"p2={p2:4.2f}  f={c.f_value:.12f}  (quadrature {quad:.12f})  -df/dp1={c.neg_df_dp1:.6f}")

# the optimum balances the two: f = -df/dp1
p1, p2, f = solve_d2()
print(f"\nclosed form : p1={p1:.8f} p2={p2:.8f} f={f:.10f}")

res = optimize_degree_distribution(2)
print(f"optimizer   : p1={res.dist[1]:.8f} p2={res.dist[2]:.8f} f={res.objective:.10f}")
print(f"KKT residual {res.residual:.1e}, g increasing: {res.theorem2_ok}")
print(f"distance to pi/4: {100 * (f - PI_OVER_4) / PI_OVER_4:.2f}%")

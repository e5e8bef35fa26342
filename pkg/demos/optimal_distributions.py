"""
Optimal degree distributions as d grows
=======================================

For each maximum degree d the optimizer returns the distribution minimizing
the asymptotic random access expectation f(p), together with a KKT
certificate: -df/dp_i equals f on the support and stays below it elsewhere.
"""
import numpy as np

from ltrae import kkt_certificate, optimize_degree_distribution
from ltrae.bounds import PI_OVER_4

for d in (2, 10, 100, 1000):
    res = optimize_degree_distribution(d)
    probs = ", ".join(f"p{i}={res.dist[i]:.5f}" for i in res.support)
    print(f"d={d:5d}  f={res.objective:.8f}  residual={res.residual:.1e}")
    print(f"         {probs}")
    print(f"         min g'={res.min_g_prime:.4f} at t={res.argmin_g_prime:.4f}")

# the d = 100 certificate: degrees 14 and 15 are both tight, 16..99 are not
res = optimize_degree_distribution(100)
cert = kkt_certificate(res.dist)
mu = cert.mu  # df/dp_i + f, zero on the support, >= 0 off it
for i in (2, 3, 13, 14, 15, 16, 50, 99, 100):
    print(f"  i={i:3d}  p_i={res.dist[i]:.2e}  df/dp_i + f = {mu[i - 1]: .3e}")

print(f"\nlower bound pi/4 = {PI_OVER_4:.6f}")

"""
Finite-k decoding trajectories
==============================

Simulate an LT code with the d = 10 optimal degree distribution and a
peeling decoder.  The area under the mean undecoded-fraction curve is the
normalized random access expectation; it approaches the asymptotic value
f(p) as the number of information symbols k grows.
"""
import numpy as np

from ltrae import decoding_curve, estimate_rae, optimize_degree_distribution

res = optimize_degree_distribution(10)
p = res.dist
print(f"asymptotic value f(p) = {res.objective:.5f}")

curve = decoding_curve(p, r_max=3.0, n_points=31)
for k, trials in ((10, 2000), (100, 500), (1000, 200)):
    st = estimate_rae(p, k, trials, seed=1, r_grid=curve.r_grid)
    gap = np.max(np.abs(st.mean_undecoded - curve.undecoded_fraction))
    print(f"k={k:5d}  RAE={st.rae:.4f} +- {st.stderr:.4f}  "
          f"(stopping-time estimate {st.rae_stopping:.4f})  max|curve gap|={gap:.3f}")

# a few points of the asymptotic curve and the k = 1000 mean trajectory
st = estimate_rae(p, 1000, 200, seed=1, r_grid=curve.r_grid)
print("\n   r   asymptotic   k=1000")
for r, a, b in list(zip(curve.r_grid, curve.undecoded_fraction, st.mean_undecoded))[::3]:
    print(f"{r:4.1f}   {a:9.4f}   {b:7.4f}")

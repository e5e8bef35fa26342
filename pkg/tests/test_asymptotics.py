import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltrae.asymptotics import (check_g_monotone, curve_area, decoding_curve, decoding_fraction_s,
                               divergent_gradient_mask, divergent_hessian_mask, extension_derivative,
                               g, g_prime, gradient_f, hessian_f, hessian_min_eigenvalue,
                               objective_diverges, objective_f, theorem2_conditions)
from ltrae.core import DegreeDistribution, make_distribution, point_mass
from ltrae.errors import DivergenceError, DomainError
from ltrae.quadrature import integrate_log_kernel_adaptive

# distributions with p_1 bounded away from 0 so the adaptive oracle stays cheap
dists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12).map(
    lambda w: make_distribution([0.05 + w[0]] + w[1:]))


def test_boundary_values():
    assert objective_f(point_mass(1)) == pytest.approx(1.0, abs=1e-14)
    assert objective_f(point_mass(2)) == pytest.approx(math.pi**2 / 12, abs=1e-14)
    with pytest.raises(DivergenceError):
        objective_f(point_mass(3))
    assert objective_diverges(point_mass(3)) and not objective_diverges(point_mass(2))


def test_divergence_masks():
    p = point_mass(2, d=6)  # smallest support degree m = 2
    np.testing.assert_array_equal(divergent_gradient_mask(p), [True, False, False, False, False, False])
    H = divergent_hessian_mask(p)
    assert H[0, 0] and H[0, 1] and H[1, 0]  # i + j <= 3
    assert not H[1, 1] and not H[0, 2]
    grad = gradient_f(p)
    assert grad.divergent[0] and np.isinf(grad.values[0]) and grad.values[0] < 0
    assert np.all(np.isfinite(grad.values[1:]))
    assert not np.any(gradient_f(make_distribution([1, 1, 1])).divergent)


def test_small_gradient_and_hessian():
    p = point_mass(1, d=2)
    grad = gradient_f(p).values
    np.testing.assert_allclose(grad, [-1.0, -1.5], rtol=1e-13)
    # H_ij = 2 i j int t^{i+j-2} (-log(1-t)) dt / p'^3 with p' = 1
    H = hessian_f(p).values
    np.testing.assert_allclose(H, [[2.0, 3.0], [3.0, 8 * (1 + 0.5 + 1 / 3) / 3]], rtol=1e-13)


@given(dists)
@settings(max_examples=15, deadline=None)
def test_objective_and_gradient_match_adaptive_oracle(p):
    f_ref = integrate_log_kernel_adaptive(lambda t: 1.0 / float(p.p_prime(t)))
    assert objective_f(p) == pytest.approx(f_ref, rel=1e-11)
    i = p.d
    d_ref = -i * integrate_log_kernel_adaptive(lambda t: t ** (i - 1) / float(p.p_prime(t)) ** 2)
    assert gradient_f(p).values[-1] == pytest.approx(d_ref, rel=1e-10)


@given(dists)
@settings(max_examples=30, deadline=None)
def test_homogeneity_identity(p):
    # f is homogeneous of degree -1 in p, so sum_i p_i df/dp_i = -f
    grad = gradient_f(p).values
    assert -np.dot(p.probs, grad) == pytest.approx(objective_f(p), rel=1e-12)


def test_extension_derivative_matches_embedded_gradient():
    p = make_distribution([0.3, 0.6, 0.1])
    full = gradient_f(p.embed(9)).values
    for D in (1, 3, 5, 9):
        assert extension_derivative(p, D) == pytest.approx(-full[D - 1], rel=1e-13)


def test_hessian_positive_definite_and_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = DegreeDistribution(rng.dirichlet(np.ones(8)))
        H = hessian_f(p).values
        np.testing.assert_allclose(H, H.T, rtol=1e-14)
        assert hessian_min_eigenvalue(p) > 0


def test_g_limits_at_zero():
    p = make_distribution([0.4, 0.6])
    assert g(p, 0.0) == 0.0
    assert g_prime(p, 0.0) == pytest.approx(1 / 0.4)
    q = make_distribution([0.0, 0.5, 0.5])
    assert g(q, 0.0) == pytest.approx(1.0)  # 1/(2 p_2)
    eps = 1e-6
    assert g(q, eps) == pytest.approx(1.0 + g_prime(q, 0.0) * eps, rel=1e-9)


def test_s_for_degree_one():
    p = point_mass(1)
    for r in (0.1, 1.0, 2.0, 5.0):
        assert decoding_fraction_s(p, r) == pytest.approx(-math.expm1(-r), abs=1e-10)
    assert decoding_fraction_s(p, 0.0) == 0.0
    assert decoding_fraction_s(p, math.inf) == 1.0
    with pytest.raises(DomainError):
        decoding_fraction_s(p, -1.0)


def test_s_is_nondecreasing_in_r():
    p = make_distribution([0.2, 0.7, 0.0, 0.0, 0.0, 0.1])
    r = np.linspace(0, 6, 200)
    s = np.array([decoding_fraction_s(p, x) for x in r])
    assert np.all(np.diff(s) >= 0)
    assert np.all((0 <= s) & (s <= 1))


def test_monotone_g_curve_area_equals_objective(opt10):
    p = opt10.dist
    assert theorem2_conditions(p)
    c = decoding_curve(p)
    assert c.monotone
    assert c.area == pytest.approx(opt10.objective, abs=1e-12)
    # the sampled curve integrates to the same value
    assert np.trapezoid(c.undecoded_fraction, c.r_grid) == pytest.approx(c.area, abs=2e-4)


def test_non_monotone_g_has_plateau():
    # heavy weight on a large degree with a small p_1 makes g decrease somewhere
    p = make_distribution([0.02, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.98])
    rep = check_g_monotone(p)
    assert not rep.is_strictly_increasing
    assert not theorem2_conditions(p)
    c = decoding_curve(p, n_points=2001)
    assert np.all(np.diff(c.undecoded_fraction) <= 0)
    assert c.area > objective_f(p)
    assert np.trapezoid(c.undecoded_fraction, c.r_grid) == pytest.approx(c.area, rel=5e-3)
    assert curve_area(p) == pytest.approx(c.area, rel=1e-12)


def test_theorem2_needs_p1():
    assert not theorem2_conditions(point_mass(2))
    assert theorem2_conditions(point_mass(1))

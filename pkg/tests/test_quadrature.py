import math

import numpy as np
import pytest
from scipy import special

from ltrae.errors import CapabilityError, EvaluationError, ValidationError
from ltrae.quadrature import (MAX_LAGUERRE_ORDER, build_composite_rule, build_log_kernel_rule,
                              default_rule, harmonic_moment, integrate_log_kernel,
                              integrate_log_kernel_adaptive)


def test_composite_rule_shape():
    r = default_rule()
    assert np.all(np.diff(r.nodes) > 0)
    assert r.nodes[0] > 0 and r.nodes[-1] < 1
    assert np.all(r.weights > 0)
    # int_0^1 -log(1-t) dt = 1
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-15)
    low = r.nodes < 0.5
    np.testing.assert_allclose(r.log_nodes[low], np.log(r.nodes[low]), rtol=1e-12)
    assert np.all(np.isfinite(r.log_nodes)) and np.all(r.log_nodes < 0)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 50, 1000, 10_000, 100_000])
def test_harmonic_moments(m):
    exact = float(special.digamma(m + 2) + np.euler_gamma) / (m + 1)
    assert harmonic_moment(m) == pytest.approx(exact, rel=1e-13)
    r = default_rule()
    got = integrate_log_kernel(r, lambda t: t**m)
    assert got == pytest.approx(exact, rel=2e-13)


@pytest.mark.parametrize("m", [0, 3, 40])
def test_adaptive_oracle_on_moments(m):
    assert integrate_log_kernel_adaptive(lambda t: t**m) == pytest.approx(harmonic_moment(m), rel=1e-12)


def test_singular_integrands():
    r = default_rule()
    # int_0^1 -log(1-t)/t dt = pi^2/6 ; 1/t is singular at the left end
    assert integrate_log_kernel(r, lambda t: 1.0 / t) == pytest.approx(math.pi**2 / 6, rel=1e-14)


def test_near_pole_integrand():
    # 1/p'(t)^2 with p' close to vanishing at t = 0
    p1, p2 = 1e-3, 1 - 1e-3
    phi = lambda t: 1.0 / (p1 + 2 * p2 * t) ** 2
    ref = integrate_log_kernel_adaptive(phi)
    assert integrate_log_kernel(default_rule(), phi) == pytest.approx(ref, rel=1e-11)


def test_laguerre_rule():
    r = build_log_kernel_rule(96)
    assert r.kind == "gauss-laguerre"
    assert np.all(r.nodes < 1)
    for m in range(6):
        assert integrate_log_kernel(r, lambda t: t**m) == pytest.approx(harmonic_moment(m), rel=1e-12)
    with pytest.raises(CapabilityError):
        build_log_kernel_rule(MAX_LAGUERRE_ORDER + 1)
    with pytest.raises(ValidationError):
        build_log_kernel_rule(1)


def test_order_refinement_agrees():
    phi = lambda t: 1.0 / (0.1 + 1.8 * t) ** 2
    a = integrate_log_kernel(build_composite_rule(16), phi)
    b = integrate_log_kernel(build_composite_rule(48), phi)
    assert a == pytest.approx(b, rel=1e-13)


def test_nonfinite_integrand_names_node():
    r = default_rule()
    vals = np.ones(r.size)
    vals[5] = np.inf
    with pytest.raises(EvaluationError) as info:
        integrate_log_kernel(r, vals)
    assert info.value.node == r.nodes[5]

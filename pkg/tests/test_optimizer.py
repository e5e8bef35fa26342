import json

import numpy as np
import pytest

from ltrae.asymptotics import extension_derivative, objective_f
from ltrae.bounds import PI_OVER_4, solve_d2
from ltrae.core import DegreeDistribution, perturb, uniform_distribution
from ltrae.errors import ValidationError
from ltrae.optimizer import (SolverConfig, harmonic_extension_bound, kkt_certificate,
                             optimize_degree_distribution, result_dist_from_dict,
                             support_extension_test, sweep)


def test_d2_matches_closed_form(opt2):
    p1, p2, f = solve_d2()
    assert opt2.converged and opt2.certificate.passing
    assert opt2.dist[1] == pytest.approx(p1, abs=1e-9)
    assert opt2.dist[2] == pytest.approx(p2, abs=1e-9)
    assert opt2.objective == pytest.approx(f, abs=1e-12)


def test_d10_support(opt10):
    assert opt10.support == (1, 2, 10)
    assert opt10.theorem2_ok
    assert opt10.residual < 1e-10


def test_certificate_of_non_optimal_point():
    cert = kkt_certificate(uniform_distribution(5))
    assert not cert.passing
    assert cert.residual_support > 0.1
    assert cert.lambda_gap < 1e-12


@pytest.mark.parametrize("delta", [1e-4, 1e-2, 0.1])
def test_optimum_beats_perturbations(opt10, delta):
    assert objective_f(perturb(opt10.dist, delta)) > opt10.objective
    rng = np.random.default_rng(int(delta * 1e4))
    q = DegreeDistribution(rng.dirichlet(np.ones(10)))
    mix = DegreeDistribution((1 - delta) * opt10.dist.probs + delta * q.probs)
    assert objective_f(mix) > opt10.objective


def test_quadrature_order_independence():
    a = optimize_degree_distribution(2, SolverConfig(quad_order=48))
    b = optimize_degree_distribution(2, SolverConfig(quad_order=96))
    assert abs(a.objective - b.objective) < 1e-9


def test_start_point_does_not_matter():
    a = optimize_degree_distribution(12, SolverConfig(initial="uniform"))
    b = optimize_degree_distribution(12, SolverConfig(initial="degree2"))
    assert a.support == b.support
    np.testing.assert_allclose(a.dist.probs, b.dist.probs, atol=1e-8)


def test_sweep_is_nonincreasing_and_above_pi_over_4():
    res = sweep([2, 3, 5, 8, 13])
    f = [r.objective for r in res]
    assert all(b <= a for a, b in zip(f, f[1:]))
    assert all(x >= PI_OVER_4 for x in f)
    assert all(r.converged for r in res)


def test_result_json_roundtrip(opt10):
    data = json.loads(opt10.to_json())
    assert set(data) >= {"d", "support", "p", "objective", "residual_support",
                         "residual_off_support", "theorem2_ok", "converged", "config"}
    q = result_dist_from_dict(data)
    np.testing.assert_array_equal(q.probs, opt10.dist.probs)


def test_extension(opt2):
    for D in (4, 8, 16, 64):
        # H_D / p'(1)^2 bounds the extension derivative from below
        assert extension_derivative(opt2.dist, D) >= harmonic_extension_bound(opt2.dist, D)
    assert support_extension_test(opt2, 8)
    with pytest.raises(ValidationError):
        support_extension_test(opt2, 0)


def test_invalid_d():
    with pytest.raises(ValidationError):
        optimize_degree_distribution(1)


def test_certificate_examples():
    cert = kkt_certificate(DegreeDistribution(np.array([1.0, 0.0])))
    # -df/dp_2 = 3/2 exceeds f = 1
    assert cert.residual_off_support == pytest.approx(0.5, abs=1e-13)
    assert not cert.passing
    # p_1 = 0: the divergent first component is an infinite violation
    cert = kkt_certificate(DegreeDistribution(np.array([0.0, 1.0])))
    assert cert.divergent == (1,)
    assert np.isinf(cert.residual_off_support) and not cert.passing

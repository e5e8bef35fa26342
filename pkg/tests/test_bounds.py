import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from ltrae.asymptotics import objective_f
from ltrae.bounds import (PI_OVER_4, check_lower_bound, d2_closed_form, dilogarithm,
                          lower_bound_gap, solve_d2)
from ltrae.core import DegreeDistribution
from ltrae.errors import DomainError


@pytest.mark.parametrize("x", np.linspace(-1, 1, 41))
def test_dilogarithm_against_spence(x):
    # scipy's spence(z) = Li2(1 - z)
    assert dilogarithm(x) == pytest.approx(float(special.spence(1 - x)), rel=1e-14, abs=1e-16)


def test_dilogarithm_special_values():
    assert dilogarithm(1.0) == pytest.approx(math.pi**2 / 6)
    assert dilogarithm(-1.0) == pytest.approx(-math.pi**2 / 12, rel=1e-15)
    assert dilogarithm(0.5) == pytest.approx(math.pi**2 / 12 - math.log(2) ** 2 / 2, rel=1e-15)
    assert dilogarithm(0.0) == 0.0
    with pytest.raises(DomainError):
        dilogarithm(1.5)


@pytest.mark.parametrize("p2", [0.05, 0.3, 0.5, 0.84, 0.99])
def test_d2_closed_form_matches_quadrature(p2):
    p = DegreeDistribution(np.array([1 - p2, p2]))
    assert d2_closed_form(p2).f_value == pytest.approx(objective_f(p), rel=1e-13)


def test_d2_endpoint():
    c = d2_closed_form(1.0)
    assert c.divergent and math.isinf(c.neg_df_dp1)
    assert c.f_value == pytest.approx(math.pi**2 / 12)
    with pytest.raises(DomainError):
        d2_closed_form(0.0)


def test_solve_d2():
    p1, p2, f = solve_d2()
    assert p1 + p2 == pytest.approx(1.0, abs=1e-15)
    c = d2_closed_form(p2)
    assert c.f_value == pytest.approx(c.neg_df_dp1, abs=1e-11)
    # frozen reference from an independent 50-digit mpmath solve
    assert p2 == pytest.approx(0.84452629963891195, abs=1e-11)
    assert f == pytest.approx(0.79393344459717058, abs=1e-12)


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_pi_over_4_lower_bound(d, seed):
    p = DegreeDistribution(np.random.default_rng(seed).dirichlet(np.full(d, 0.5)))
    if p[1] == 0 and p[2] == 0:
        return
    assert check_lower_bound(p)
    assert lower_bound_gap(p) > -1e-9
    assert PI_OVER_4 == pytest.approx(0.7853981634)

import json
import math
from itertools import permutations

import numpy as np
import pytest

from ltrae.core import DegreeDistribution, make_distribution, point_mass
from ltrae.errors import ConfigurationError, ValidationError
from ltrae.simulator import (RNG_ALGORITHM, CodedSymbol, LTEncoder, PeelingState,
                             average_decoding_curve, estimate_rae, peel_incremental,
                             sample_coded_symbol, simulate_trajectory, trial_rng)
from peeling_oracle import peel_by_rescan, random_instance


def test_encoder_degrees_follow_distribution():
    p = make_distribution([0.2, 0.5, 0.0, 0.3])
    enc = LTEncoder(p, 20, trial_rng(1, 0))
    n = 40_000
    degs = np.array([len(enc.sample()) for _ in range(n)])
    freq = np.bincount(degs, minlength=5)[1:] / n
    assert freq[2] == 0.0
    np.testing.assert_allclose(freq, p.probs, atol=4 * math.sqrt(0.25 / n))


def test_encoder_subsets_are_uniform_and_distinct():
    enc = LTEncoder(point_mass(3), 6, trial_rng(2, 0))
    counts = np.zeros(6)
    for _ in range(30_000):
        s = enc.sample()
        assert len(set(s)) == 3 and all(0 <= i < 6 for i in s)
        counts[list(s)] += 1
    np.testing.assert_allclose(counts / counts.sum(), 1 / 6, atol=0.005)


def test_encoder_rejects_degree_above_k():
    with pytest.raises(ConfigurationError):
        LTEncoder(point_mass(5), 4, trial_rng(0, 0))
    with pytest.raises(ConfigurationError):
        estimate_rae(point_mass(5), 4, 3, seed=0)


def test_sample_coded_symbol():
    s = sample_coded_symbol(point_mass(2), 10, np.random.default_rng(0))
    assert isinstance(s, CodedSymbol) and s.degree == 2


def test_peeling_matches_rescan_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        k = int(rng.integers(1, 13))
        inst = random_instance(rng, k, int(rng.integers(1, 2 * k + 3)), max_degree=min(k, 4))
        st = PeelingState(k)
        for j, sup in enumerate(inst):
            peel_incremental(st, CodedSymbol(sup))
            ref = peel_by_rescan(inst[: j + 1], k)
            assert {i for i in range(k) if st.decoded[i]} == ref
            assert st.decoded_count == len(ref)
            assert not st.ripple


def test_peeling_is_order_independent():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, 5, 5, max_degree=3)
    ref = peel_by_rescan(inst, 5)
    for perm in permutations(inst):
        st = PeelingState(5)
        for sup in perm:
            st.add(sup)
        assert {i for i in range(5) if st.decoded[i]} == ref


def test_xor_payloads_recover_data():
    rng = np.random.default_rng(8)
    k = 12
    data = rng.integers(0, 2**32, size=k).tolist()
    st = PeelingState(k, track_values=True)
    enc = LTEncoder(make_distribution([0.3, 0.5, 0.2]), k, trial_rng(8, 0))
    while not st.complete:
        sup = enc.sample()
        v = 0
        for i in sup:
            v ^= data[i]
        st.add(sup, v)
    assert st.values == data
    with pytest.raises(ValidationError):
        st.add((0,))


def test_trajectory_is_nonincreasing():
    p = make_distribution([0.2, 0.7, 0.1])
    r = np.linspace(0, 3, 61)
    for arrival in ("sequential", "poissonized"):
        y = simulate_trajectory(p, 200, r, trial_rng(4, 0), arrival)
        assert y[0] == 1.0
        assert np.all(np.diff(y) <= 0)
    with pytest.raises(ValidationError):
        simulate_trajectory(p, 200, r, trial_rng(4, 0), "batch")


def test_reproducible_and_worker_independent():
    p = make_distribution([0.2, 0.7, 0.1])
    a = estimate_rae(p, 50, 20, seed=3)
    b = estimate_rae(p, 50, 20, seed=3, workers=2)
    assert a.rae == b.rae and a.rae_stopping == b.rae_stopping
    c = estimate_rae(p, 50, 20, seed=4)
    assert c.rae != a.rae


def test_degree_one_code_has_unit_rae():
    # every draw decodes a uniform symbol, so E[draws until a given symbol] = k
    s = estimate_rae(point_mass(1), 50, 400, seed=9)
    assert abs(s.rae - 1.0) < 4 * s.stderr
    assert abs(s.rae_stopping - 1.0) < 4 * s.stderr_stopping
    assert s.stall_prob == 0.0


def test_stall_probability_reported():
    # only degree-2 symbols: peeling never starts
    s = estimate_rae(point_mass(2), 10, 5, seed=0, max_draw_factor=3)
    assert s.stall_prob == 1.0
    assert s.rae == pytest.approx(3.0 + 0.1)


def test_stats_json_keys():
    s = estimate_rae(point_mass(1), 10, 3, seed=1)
    data = json.loads(s.to_json())
    assert {"k", "trials", "seed", "rng", "arrival", "rae", "stderr", "stall_prob"} <= set(data)
    assert data["rng"] == RNG_ALGORITHM and data["arrival"] == "sequential"


def test_poissonized_curve_near_asymptotic(opt10):
    r = np.linspace(0, 3, 31)
    s = average_decoding_curve(opt10.dist, 1000, 40, r, seed=2)
    assert s.arrival == "poissonized"
    assert np.all(np.diff(s.mean_undecoded) <= 0)
    assert s.rae == pytest.approx(opt10.objective, abs=0.02)

"""Internal consistency of the brute-force enumeration layer.

These tests only use hand-derivable toy values and cross-checks between
the enumeration routines themselves; agreement with the dynamic programs
lives in test_quenched.py.
"""

import math

import numpy as np
import pytest

from pinlab.model import geometric_test_law, zero_disorder
from pinlab.oracle import (
    build_path_set,
    enumerate_avoidance,
    enumerate_contact_pmf,
    enumerate_contact_probabilities,
    enumerate_excursion_cdf,
    enumerate_expectation,
    enumerate_joint_cumulant,
    enumerate_moment,
    enumerate_partition,
    pure_model_free_energy,
)
from support import random_instance

GEOM = geometric_test_law(64)
ZERO2 = np.zeros(2)


def test_toy_two_site_partition():
    # Z_2 = p(1)^2 + p(2) = 1/4 + 1/4 at h = 0
    assert enumerate_partition(GEOM, 0.0, ZERO2, 2) == pytest.approx(
        math.log(0.5), abs=1e-14)


def test_path_set_shape_and_weights():
    ps = build_path_set(GEOM, 0.0, ZERO2, 2)
    assert ps.n == 2
    assert ps.log_weights.size == 2
    np.testing.assert_allclose(np.sort(ps.log_weights),
                               [math.log(0.25)] * 2, rtol=1e-14)
    w = ps.normalized_weights()
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(w, [0.5, 0.5], rtol=1e-14)


def test_toy_contact_statistics():
    np.testing.assert_allclose(
        enumerate_contact_probabilities(GEOM, 0.0, ZERO2, 2),
        [1.0, 0.5, 1.0], rtol=1e-14)
    pmf = enumerate_contact_pmf(GEOM, 0.0, ZERO2, 2)
    np.testing.assert_allclose(pmf, [0.0, 0.5, 0.5], rtol=1e-14)


def test_toy_excursion_cdf():
    cdf = enumerate_excursion_cdf(GEOM, 0.0, ZERO2, 2)
    assert cdf[1] == pytest.approx(0.5, abs=1e-14)
    assert cdf[2] == pytest.approx(1.0, abs=1e-14)


def test_single_site_chain_is_deterministic():
    ps = build_path_set(GEOM, 0.7, np.array([0.3]), 1)
    assert ps.log_weights.size == 1
    assert ps.counts[0] == 1 and ps.max_gaps[0] == 1
    assert enumerate_partition(GEOM, 0.7, np.array([0.3]), 1) == pytest.approx(
        math.log(0.5) + 1.0)


def test_oracle_bounds():
    with pytest.raises(ValueError):
        build_path_set(GEOM, 0.0, np.zeros(20), 17)
    with pytest.raises(ValueError):
        build_path_set(GEOM, 0.0, ZERO2, 0)
    with pytest.raises(ValueError):
        build_path_set(GEOM, 0.0, np.zeros(1), 2)  # omega shorter than n


def test_expectation_routes_agree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        law, h, omega, n = random_instance(rng, n_lo=2, n_hi=9)
        probs = enumerate_contact_probabilities(law, h, omega, n)
        for a in (1, n - 1):
            via_func = enumerate_expectation(law, h, omega, n,
                                             lambda x, a=a: x[a])
            via_moment = enumerate_moment(law, h, omega, n, [a])
            assert via_func == pytest.approx(probs[a], abs=1e-13)
            assert via_moment == pytest.approx(probs[a], abs=1e-13)


def test_pmf_and_cdf_are_distributions():
    rng = np.random.default_rng(4)
    for _ in range(20):
        law, h, omega, n = random_instance(rng, n_lo=1, n_hi=10)
        pmf = enumerate_contact_pmf(law, h, omega, n)
        assert pmf[0] == 0.0
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
        cdf = enumerate_excursion_cdf(law, h, omega, n)
        assert np.all(np.diff(cdf) >= -1e-15)
        assert cdf[n] == pytest.approx(1.0, abs=1e-12)
        # mean contact number two ways
        mean_l = float(np.arange(n + 1) @ pmf)
        probs = enumerate_contact_probabilities(law, h, omega, n)
        assert mean_l == pytest.approx(probs[1:].sum(), abs=1e-12)


def test_joint_cumulant_low_orders():
    rng = np.random.default_rng(5)
    for _ in range(10):
        law, h, omega, n = random_instance(rng, n_lo=3, n_hi=8)
        a, b = 1, n - 1
        pa = enumerate_moment(law, h, omega, n, [a])
        pb = enumerate_moment(law, h, omega, n, [b])
        pab = enumerate_moment(law, h, omega, n, [a, b])
        assert enumerate_joint_cumulant(law, h, omega, n, [a]) == \
            pytest.approx(pa, abs=1e-13)
        assert enumerate_joint_cumulant(law, h, omega, n, [a, b]) == \
            pytest.approx(pab - pa * pb, abs=1e-12)


def test_avoidance_window():
    assert enumerate_avoidance(GEOM, 0.0, ZERO2, 1) == 1.0
    # j=2, h=0: single interior site with P[X_1] = 1/2 per replica
    assert enumerate_avoidance(GEOM, 0.0, ZERO2, 2) == pytest.approx(
        0.75, abs=1e-14)
    with pytest.raises(ValueError):
        enumerate_avoidance(GEOM, 0.0, np.zeros(13), 13)
    with pytest.raises(ValueError):
        enumerate_avoidance(GEOM, 0.0, ZERO2, 0)


def test_avoidance_matches_pair_expectation():
    # zeta-transform route vs direct O(4^j) pair sum
    rng = np.random.default_rng(6)
    for _ in range(10):
        law, h, omega, j = random_instance(rng, n_lo=2, n_hi=7)
        ps = build_path_set(law, h, omega, j)
        w = ps.normalized_weights()
        masks = np.arange(w.size)
        direct = 0.0
        for m1 in masks:
            disjoint = (masks & m1) == 0
            direct += w[m1] * float(w[disjoint].sum())
        assert enumerate_avoidance(law, h, omega, j) == pytest.approx(
            direct, abs=1e-12)


def test_pure_free_energy_geometric_closed_form():
    # e^h z/(2-z) = 1 gives f(h) = log((e^h + 1)/2)
    for h in (0.5, 1.0, math.log(3.0), 2.0):
        want = math.log((math.exp(h) + 1.0) / 2.0)
        assert pure_model_free_energy(GEOM, h) == pytest.approx(
            want, abs=1e-9)
    assert pure_model_free_energy(GEOM, math.log(3.0)) == pytest.approx(
        math.log(2.0), abs=1e-9)


def test_pure_free_energy_delocalized_is_zero():
    # far below h_c = 0 no root exists below 1
    assert pure_model_free_energy(GEOM, -3.0) == 0.0

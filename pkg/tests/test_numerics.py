import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pinlab.numerics import (
    DEFAULT_JET_ORDER,
    LOG_ZERO,
    ScaledJet,
    constant_jet,
    exp_linear_jet,
    jet_mul,
    jet_mul_acc,
    log_mean_exp,
    log_of_jet,
    log_sum_exp,
    zero_jet,
)

finite_logs = st.floats(min_value=-600.0, max_value=600.0,
                        allow_nan=False, allow_infinity=False)


# -- log-domain scalars -------------------------------------------------------

def test_log_sum_exp_empty_is_zero_state():
    assert log_sum_exp([]) == LOG_ZERO


def test_log_sum_exp_all_zero_states():
    assert log_sum_exp([LOG_ZERO, LOG_ZERO, LOG_ZERO]) == LOG_ZERO


def test_log_sum_exp_rejects_nan():
    with pytest.raises(ValueError):
        log_sum_exp([0.0, math.nan])


def test_log_sum_exp_survives_extreme_scales():
    # naive exp would overflow at 1e4 and underflow at -1e4
    assert log_sum_exp([1e4, 1e4]) == pytest.approx(1e4 + math.log(2.0))
    assert log_sum_exp([-1e4, -1e4]) == pytest.approx(-1e4 + math.log(2.0))
    assert log_sum_exp([0.0, -800.0]) == pytest.approx(0.0)


@given(st.lists(finite_logs, min_size=1, max_size=12))
def test_log_sum_exp_matches_reference(vals):
    want = float(np.logaddexp.reduce(np.asarray(vals)))
    assert log_sum_exp(vals) == pytest.approx(want, rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(min_value=-50.0, max_value=50.0), min_size=1,
                max_size=10),
       st.floats(min_value=-500.0, max_value=500.0))
def test_log_sum_exp_shift_equivariance(vals, shift):
    shifted = [v + shift for v in vals]
    assert log_sum_exp(shifted) == pytest.approx(log_sum_exp(vals) + shift,
                                                 rel=1e-12, abs=1e-9)


def test_log_mean_exp():
    assert log_mean_exp([0.0, 0.0]) == pytest.approx(0.0)
    vals = [0.0, math.log(3.0)]
    assert log_mean_exp(vals) == pytest.approx(math.log(2.0))
    with pytest.raises(ValueError):
        log_mean_exp([])


# -- jets ---------------------------------------------------------------------

def _dense(jet):
    """Linear-scale Taylor coefficients (safe only at moderate scale)."""
    return math.exp(jet.scale) * jet.coeffs


def test_jet_validation():
    with pytest.raises(ValueError):
        ScaledJet(math.nan, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        ScaledJet(0.0, np.array([2.0, 0.0]))  # coeffs[0] must be 1
    with pytest.raises(ValueError):
        ScaledJet(0.0, np.array([1.0, math.nan]))


def test_zero_and_constant_jets():
    z = zero_jet(4)
    assert z.scale == LOG_ZERO and z.order == 4
    c = constant_jet(2.5, order=4)
    assert c.scale == 2.5
    assert c.derivative(0) == pytest.approx(math.exp(2.5))
    assert all(c.derivative(k) == 0.0 for k in range(1, 5))
    assert constant_jet(LOG_ZERO, order=3).scale == LOG_ZERO


def test_exp_linear_jet_derivatives():
    # d^k/dx^k exp(c + s x) at 0 is s^k exp(c)
    j = exp_linear_jet(0.7, slope=-1.3, order=6)
    for k in range(7):
        assert j.derivative(k) == pytest.approx((-1.3) ** k * math.exp(0.7),
                                                rel=1e-12)


def test_jet_mul_is_exponent_addition():
    a = exp_linear_jet(0.2, slope=0.5, order=8)
    b = exp_linear_jet(-1.0, slope=1.7, order=8)
    prod = jet_mul(a, b)
    want = exp_linear_jet(-0.8, slope=2.2, order=8)
    assert prod.scale == pytest.approx(want.scale)
    np.testing.assert_allclose(prod.coeffs, want.coeffs, rtol=1e-12, atol=1e-15)


def test_jet_mul_matches_convolution():
    rng = np.random.default_rng(5)
    for _ in range(20):
        ca = np.concatenate(([1.0], rng.normal(0.0, 0.8, 5)))
        cb = np.concatenate(([1.0], rng.normal(0.0, 0.8, 5)))
        a = ScaledJet(float(rng.normal()), ca)
        b = ScaledJet(float(rng.normal()), cb)
        got = _dense(jet_mul(a, b))
        want = np.convolve(_dense(a), _dense(b))[:6]
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_jet_mul_zero_annihilates():
    a = exp_linear_jet(0.0, order=3)
    assert jet_mul(a, zero_jet(3)).scale == LOG_ZERO
    assert jet_mul(zero_jet(3), a).scale == LOG_ZERO


def test_jet_mul_order_mismatch():
    with pytest.raises(ValueError):
        jet_mul(zero_jet(3), zero_jet(4))


def test_jet_mul_acc_linear_combination():
    a = exp_linear_jet(0.3, slope=1.0, order=5)
    b = exp_linear_jet(-0.2, slope=2.0, order=5)
    acc = jet_mul_acc(a, b, math.log(0.5))  # a + 0.5 b
    want = _dense(a) + 0.5 * _dense(b)
    np.testing.assert_allclose(_dense(acc), want, rtol=1e-12)
    # zero states are identities on both sides
    assert jet_mul_acc(zero_jet(5), a, LOG_ZERO).scale == LOG_ZERO
    same = jet_mul_acc(a, zero_jet(5), 0.0)
    np.testing.assert_allclose(_dense(same), _dense(a), rtol=1e-15)


def test_jet_mul_acc_jet_weight():
    a = exp_linear_jet(0.1, slope=0.4, order=6)
    w = exp_linear_jet(-0.5, slope=1.0, order=6)
    acc = jet_mul_acc(zero_jet(6), a, w)
    want = exp_linear_jet(-0.4, slope=1.4, order=6)
    np.testing.assert_allclose(_dense(acc), _dense(want), rtol=1e-12)


def test_jet_mul_acc_extreme_scale():
    # accumulation at log-magnitude 2000 must not overflow
    big = exp_linear_jet(2000.0, slope=1.0, order=4)
    acc = jet_mul_acc(big, big, 0.0)
    assert acc.scale == pytest.approx(2000.0 + math.log(2.0))
    np.testing.assert_allclose(acc.coeffs, big.coeffs, rtol=1e-12)


def test_log_of_jet_inverts_exp():
    g = log_of_jet(exp_linear_jet(1.2, slope=-0.7, order=6))
    want = np.zeros(7)
    want[0], want[1] = 1.2, -0.7
    np.testing.assert_allclose(g, want, rtol=1e-12, atol=1e-12)


def test_log_of_jet_random_series():
    # coefficients of log(f) recovered by composing back with exp
    rng = np.random.default_rng(11)
    for _ in range(10):
        coeffs = np.concatenate(([1.0], rng.normal(0.0, 0.5, 6)))
        jet = ScaledJet(float(rng.normal()), coeffs)
        g = log_of_jet(jet)
        # exp of the series g[1:] term by term via the same recursion inverse
        f = np.zeros(7)
        f[0] = 1.0
        for k in range(1, 7):
            f[k] = sum(i * g[i] * f[k - i] for i in range(1, k + 1)) / k
        np.testing.assert_allclose(f, coeffs, rtol=1e-10, atol=1e-10)
        assert g[0] == jet.scale


def test_log_of_zero_jet_raises():
    with pytest.raises(ValueError):
        log_of_jet(zero_jet())


def test_default_order_is_shared():
    assert zero_jet().order == DEFAULT_JET_ORDER
    assert constant_jet(0.0).order == DEFAULT_JET_ORDER

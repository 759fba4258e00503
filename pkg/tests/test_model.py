import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinlab.model import (
    DISORDER_FAMILIES,
    EllSpec,
    build_law,
    classify_hc,
    gaussian_disorder,
    geometric_test_law,
    law_from_log_table,
    law_from_table,
    rademacher_disorder,
    sample_disorder,
    sample_disorder_block,
    shifted_exponential_disorder,
    uniform_disorder,
    zero_disorder,
)
from pinlab.numerics import LOG_ZERO


# -- inter-arrival laws -------------------------------------------------------

def test_law_table_layout():
    law = build_law(1.5, None, 32)
    assert law.log_p.size == 33
    assert law.log_p[0] == LOG_ZERO
    assert np.all(np.isfinite(law.log_p[1:]))


def test_unnormalized_law_is_exact_power():
    law = build_law(2.0, EllSpec("constant", 0.7), 16, normalize=False)
    for t in (1, 2, 5, 16):
        assert law.p(t) == pytest.approx(0.7 / t ** 3.0, rel=1e-14)
    assert law.tail_mass > 0.0  # analytic tail estimate is still recorded


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1.0, max_value=3.0),
       st.integers(min_value=4, max_value=64))
def test_power_ratio_survives_normalization(alpha, n_max):
    law = build_law(alpha, None, n_max)
    t = np.arange(1, n_max // 2 + 1)
    ratio = law.log_p[2 * t] - law.log_p[t]
    np.testing.assert_allclose(ratio, -(alpha + 1.0) * math.log(2.0),
                               rtol=1e-10, atol=1e-10)


def test_normalized_mass_accounting():
    law = build_law(1.0, None, 128)
    assert law.normalized
    assert law.tabulated_mass + law.tail_mass == pytest.approx(1.0, abs=1e-12)
    assert law.tabulated_mass < 1.0


def test_log_power_ell_shape():
    law = build_law(1.0, EllSpec("log_power", 2.0, 0.5), 32, normalize=False)
    t = 7
    want = 2.0 * (1.0 + math.log(t)) ** 0.5 / t ** 2.0
    assert law.p(t) == pytest.approx(want, rel=1e-12)


def test_law_validation():
    with pytest.raises(ValueError):
        build_law(0.99, None, 16)
    with pytest.raises(ValueError):
        build_law(1.0, None, 1)
    with pytest.raises(ValueError):
        EllSpec("cauchy", 1.0)
    with pytest.raises(ValueError):
        EllSpec("constant", 0.0)
    with pytest.raises(ValueError):
        EllSpec("log_power", 1.0, -1.0)


def test_table_law_roundtrip_and_validation():
    law = law_from_table([0.5, 0.25, 0.125])
    assert law.alpha is None
    assert [law.p(t) for t in (1, 2, 3)] == pytest.approx([0.5, 0.25, 0.125])
    with pytest.raises(ValueError):
        law_from_table([0.5])
    with pytest.raises(ValueError):
        law_from_table([0.5, 0.0])
    with pytest.raises(ValueError):
        law_from_table([0.8, 0.5], normalized=True)


def test_log_table_reaches_depths_linear_tables_cannot():
    t = np.arange(1, 2001, dtype=float)
    law = law_from_log_table(-t * math.log(2.0), normalized=True)
    assert law.log_p[2000] == pytest.approx(-2000 * math.log(2.0))
    with pytest.raises(ValueError):
        law_from_log_table([0.0, -math.inf])


def test_geometric_test_law():
    law = geometric_test_law(64)
    assert law.normalized
    for t in (1, 2, 10):
        assert law.p(t) == pytest.approx(2.0 ** -t, rel=1e-14)
    # p(t+s) = xi * p(t) * p(s) holds with equality at xi = 1
    assert law.xi == pytest.approx(1.0, abs=2e-3)


def test_classify_hc():
    assert classify_hc(1.0, 1.0) == "finite"
    assert classify_hc(1.0, 0.4) == "minus_infinity"
    assert classify_hc(1.0, 0.5) == "undecided"
    with pytest.raises(ValueError):
        classify_hc(0.5, 1.0)
    with pytest.raises(ValueError):
        classify_hc(1.0, 0.0)


# -- disorder families --------------------------------------------------------

ALL_FAMILIES = (
    zero_disorder(),
    gaussian_disorder(0.8),
    uniform_disorder(1.2),
    rademacher_disorder(0.6),
    shifted_exponential_disorder(1.5),
)


@pytest.mark.parametrize("law", ALL_FAMILIES, ids=lambda d: d.family)
def test_family_moments_match_draws(law):
    rng = np.random.default_rng(42)
    x = law.draw(rng, 50_000)
    assert abs(x.mean()) < 0.02 * max(1.0, law.param)
    assert x.var() == pytest.approx(law.variance, rel=0.05, abs=1e-12)


def test_is_pure_only_for_zero():
    assert zero_disorder().is_pure
    assert not any(d.is_pure for d in ALL_FAMILIES[1:])


@pytest.mark.parametrize("law", ALL_FAMILIES, ids=lambda d: d.family)
def test_exp_abs_moment_closed_forms(law):
    eta = 0.5
    want = law.exp_abs_moment(eta)
    rng = np.random.default_rng(7)
    got = np.exp(eta * np.abs(law.draw(rng, 200_000))).mean()
    assert got == pytest.approx(want, rel=0.05)


def test_exp_abs_moment_boundary():
    law = shifted_exponential_disorder(2.0)  # varrho = 0.5
    assert law.exp_abs_moment(0.5) == math.inf
    assert math.isfinite(law.exp_abs_moment(0.49))
    assert zero_disorder().exp_abs_moment(3.0) == 1.0


def test_constructor_validation():
    for ctor in (gaussian_disorder, uniform_disorder, rademacher_disorder,
                 shifted_exponential_disorder):
        with pytest.raises(ValueError):
            ctor(0.0)


def test_family_registry():
    assert set(DISORDER_FAMILIES) == {"zero", "gaussian", "uniform_centered",
                                      "rademacher", "shifted_exponential"}
    for name, ctor in DISORDER_FAMILIES.items():
        assert ctor(1.0).family == name


# -- counter-mode disorder streams --------------------------------------------

def test_block_matches_single_draws():
    law = gaussian_disorder(1.0)
    block = sample_disorder_block(law, 17, 99, 0, 8)
    assert block.shape == (8, 17)
    for i in range(8):
        single = sample_disorder(law, 17, 99, i)
        np.testing.assert_array_equal(block[i], single.omega)
        assert single.sample_index == i


def test_block_boundaries_are_invisible():
    law = uniform_disorder(0.5)
    whole = sample_disorder_block(law, 9, 123, 0, 10)
    parts = np.vstack([sample_disorder_block(law, 9, 123, 0, 3),
                       sample_disorder_block(law, 9, 123, 3, 4),
                       sample_disorder_block(law, 9, 123, 7, 3)])
    np.testing.assert_array_equal(whole, parts)


def test_streams_are_keyed_not_sequential():
    law = gaussian_disorder(1.0)
    a = sample_disorder(law, 50, 1, 0).omega
    b = sample_disorder(law, 50, 1, 1).omega
    c = sample_disorder(law, 50, 2, 0).omega
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    np.testing.assert_array_equal(a, sample_disorder(law, 50, 1, 0).omega)


def test_seed_range_validation():
    law = gaussian_disorder(1.0)
    with pytest.raises(ValueError):
        sample_disorder(law, 4, 2 ** 64, 0)
    with pytest.raises(ValueError):
        sample_disorder(law, 4, 0, -1)

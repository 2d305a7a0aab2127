import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadbessel.stats import (
    BetaLaw,
    GammaLaw,
    beta_cdf,
    beta_gamma_transform,
    gamma_cdf,
    gamma_characteristic,
    gamma_sample,
    ks_test,
    ks_two_sample,
    regularized_lower_gamma,
)


def test_gamma_cdf_closed_forms():
    # shape 1: exponential
    assert gamma_cdf(1.0, GammaLaw(1, 1)) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    # integer shape 2: 1 - (1 + cx) e^{-cx}
    assert gamma_cdf(2.0, GammaLaw(2, 1)) == pytest.approx(1 - 3 * math.exp(-2), abs=1e-12)
    assert gamma_cdf(0.0, GammaLaw(3, 3)) == 0.0
    assert gamma_cdf(1e9, GammaLaw(3, 3)) == pytest.approx(1.0, abs=1e-12)


def test_gamma_cdf_rejects_negative():
    with pytest.raises(ValueError):
        gamma_cdf(-0.5, GammaLaw(1, 1))


def test_gamma_cdf_against_high_precision_oracle():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = float(rng.uniform(0.05, 30.0))
        x = float(rng.uniform(0.0, 60.0))
        want = float(mpmath.gammainc(a, 0, x, regularized=True))
        got = regularized_lower_gamma(a, x)
        assert got == pytest.approx(want, abs=1e-10)


def test_gamma_cdf_matches_density_derivative():
    # five-point central differences of the CDF against the closed-form density
    law = GammaLaw(3.0, 3.0)
    h = 1e-3
    for x in np.linspace(0.2, 4.0, 25):
        stencil = (
            gamma_cdf(x - 2 * h, law)
            - 8 * gamma_cdf(x - h, law)
            + 8 * gamma_cdf(x + h, law)
            - gamma_cdf(x + 2 * h, law)
        ) / (12 * h)
        assert stencil == pytest.approx(law.pdf(x), abs=1e-6)


def test_beta_cdf_against_oracle():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = float(rng.uniform(0.2, 10.0))
        b = float(rng.uniform(0.2, 10.0))
        x = float(rng.uniform(0.0, 1.0))
        want = float(mpmath.betainc(a, b, 0, x, regularized=True))
        assert beta_cdf(x, BetaLaw(a, b)) == pytest.approx(want, abs=1e-10)


def test_gamma_characteristic_values():
    assert gamma_characteristic(0.0, GammaLaw(2, 5)) == pytest.approx(1.0)
    val = gamma_characteristic(1.0, GammaLaw(1, 1))
    assert val == pytest.approx(0.5 + 0.5j, abs=1e-14)


@given(st.floats(-50, 50), st.floats(0.1, 10), st.floats(0.1, 10))
def test_gamma_characteristic_bound_and_symmetry(lam, a, c):
    law = GammaLaw(a, c)
    val = gamma_characteristic(lam, law)
    assert abs(val) <= 1.0 + 1e-12
    conj = gamma_characteristic(-lam, law)
    assert val == pytest.approx(conj.conjugate(), rel=1e-12, abs=1e-12)


def test_ks_statistic_on_centered_grid():
    n = 100
    samples = (np.arange(1, n + 1) - 0.5) / n
    res = ks_test(samples, lambda x: x)
    assert res.statistic == pytest.approx(0.5 / n, abs=1e-15)


def test_ks_degenerate_sample():
    samples = np.zeros(16)
    res = ks_test(samples, lambda x: gamma_cdf(x, GammaLaw(1, 1)))
    assert res.statistic == pytest.approx(1.0)


def test_ks_rejects_unsorted_and_small():
    with pytest.raises(ValueError):
        ks_test(np.array([3.0, 1.0] * 8), lambda x: x)
    with pytest.raises(ValueError):
        ks_test(np.arange(5.0), lambda x: x)


def test_ks_pvalues_uniform_under_null():
    # chi-square goodness of fit of the p-values on 1000 null replications
    rng = np.random.default_rng(123)
    law = GammaLaw(2.0, 1.5)
    pvals = np.empty(1000)
    for i in range(1000):
        s = np.sort(gamma_sample(law, rng, size=1000))
        pvals[i] = ks_test(s, lambda x: gamma_cdf(x, law)).pvalue
    counts, _ = np.histogram(pvals, bins=10, range=(0, 1))
    chi2 = np.sum((counts - 100.0) ** 2 / 100.0)
    # chi-square(9) quantile at 0.999 is 27.88
    assert chi2 < 27.88
    assert np.mean(pvals > 0.001) >= 0.999 - 0.004


def test_beta_gamma_transform_values():
    assert beta_gamma_transform(1.0, 1.0, 3.0, 1.0) == pytest.approx((0.75, 4.0))
    w, _ = beta_gamma_transform(2.0, 0.0, 3.0, 1.0)
    assert w == 1.0
    with pytest.raises(ValueError):
        beta_gamma_transform(0.0, 0.0, 3.0, 1.0)


@given(
    st.floats(1e-6, 1e6),
    st.floats(1e-6, 1e6),
    st.floats(1e-3, 1e3),
    st.floats(1e-3, 1e3),
)
def test_beta_gamma_transform_inverts(x, y, c, d):
    w, z = beta_gamma_transform(x, y, c, d)
    assert 0.0 <= w <= 1.0
    # exact in real arithmetic; float roundoff scales with z/(c or d)
    assert w * z / c == pytest.approx(x, rel=1e-9, abs=1e-12 * z / c)
    assert (1 - w) * z / d == pytest.approx(y, rel=1e-9, abs=1e-12 * z / d)


def test_gamma_sample_moments_and_exponential_ks():
    rng = np.random.default_rng(2024)
    law = GammaLaw(3.0, 3.0)
    s = gamma_sample(law, rng, size=1_000_000)
    se = math.sqrt(law.variance / s.size)
    assert abs(s.mean() - law.mean) < 4 * se
    expo = np.sort(gamma_sample(GammaLaw(1.0, 1.0), rng, size=1_000_000))
    res = ks_test(expo, lambda x: 1.0 - np.exp(-x))
    assert res.statistic <= 0.002


def test_gamma_sample_rate_scaling():
    law_a = GammaLaw(2.5, 4.0)
    law_b = GammaLaw(2.5, 1.0)
    s_a = gamma_sample(law_a, np.random.default_rng(5), size=50_000)
    s_b = gamma_sample(law_b, np.random.default_rng(5), size=50_000) / 4.0
    assert np.allclose(s_a, s_b)


def test_two_sample_ks_helper():
    rng = np.random.default_rng(9)
    a = rng.normal(size=2000)
    b = rng.normal(size=2000)
    assert ks_two_sample(a, b) < 0.06
    assert ks_two_sample(a, a) == 0.0


@settings(max_examples=50)
@given(st.floats(0.05, 20), st.floats(0.0, 40))
def test_incomplete_gamma_monotone_in_x(a, x):
    assert regularized_lower_gamma(a, x) <= regularized_lower_gamma(a, x + 0.5) + 1e-12

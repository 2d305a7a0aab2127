import math

import numpy as np
import pytest

from quadbessel.params import O2BPParams
from quadbessel.regime import (
    CornerStatus,
    EdgeStatus,
    ExistenceClass,
    check_C1,
    check_C2a,
    check_C2b,
    check_C3_at,
    check_degenerate_collision,
    check_skew_bound,
    classify,
    corner_verdict,
    edge_verdicts,
    existence_class,
    quadratic_nonneg,
    search_C3,
    stationary_law,
    supermartingale_coefficient,
)


def P(alpha, beta, gamma, delta, rho=0.0, theta=0.0, eta=0.0):
    return O2BPParams(alpha, beta, gamma, delta, rho, theta, eta)


def test_params_validation_messages():
    with pytest.raises(ValueError, match="alpha must be > 0"):
        P(-1, 0, 0, 1)
    with pytest.raises(ValueError, match="delta must be > 0"):
        P(1, 0, 0, 0)
    with pytest.raises(ValueError, match="rho"):
        P(1, 0, 0, 1, rho=1.5)
    with pytest.raises(ValueError, match="theta"):
        P(1, 0, 0, 1, theta=-0.1)


def test_quadratic_nonneg_examples():
    assert quadratic_nonneg(1, -2, 1) is True  # boundary b = -2 sqrt(ac)
    assert quadratic_nonneg(1, -3, 1) is False
    assert quadratic_nonneg(0, 1, 0) is True
    assert quadratic_nonneg(-0.1, 1, 1) is False


def test_quadratic_nonneg_against_grid_minimum():
    # brute-force minimum over the unit quarter circle on a 200x200 grid
    rng = np.random.default_rng(314)
    phi = np.linspace(0.0, math.pi / 2, 200)
    xs, ys = np.cos(phi), np.sin(phi)
    for _ in range(1000):
        a, b, c = rng.uniform(-2, 2, size=3)
        grid_min = np.min(a * xs**2 + b * xs * ys + c * ys**2)
        if quadratic_nonneg(a, b, c):
            assert grid_min >= -1e-9
        else:
            assert grid_min < 1e-9


def test_condition_c1_examples():
    assert check_C1(P(0.3, 0.5, 0.5, 0.3)) is True
    assert check_C1(P(0.3, -0.1, 0.5, 0.3)) is False
    assert check_C1(P(0.1, 0.0, 0.0, 0.1, rho=0.5)) is False  # rho > alpha + delta


def test_condition_c3_at_examples():
    assert check_C3_at(P(1, -1, 1, 1), 1, 1) is True
    assert check_C3_at(P(0.5, -0.5, 0.5, 0.5), 1, 1) is True  # boundary case
    assert check_C3_at(P(0.1, -1, -1, 0.1), 1, 1) is False
    with pytest.raises(ValueError):
        check_C3_at(P(1, 0, 0, 1), 0.0, 1.0)


def test_c3_homogeneity_under_scaling():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        p = P(
            rng.uniform(0.05, 3),
            rng.uniform(-3, 3),
            rng.uniform(-3, 3),
            rng.uniform(0.05, 3),
            rng.uniform(-1, 1),
        )
        lam, mu = rng.uniform(0.01, 10, size=2)
        s = rng.uniform(0.01, 100)
        assert check_C3_at(p, lam, mu) == check_C3_at(p, s * lam, s * mu)


def test_search_c3_closed_form_and_grid():
    found = search_C3(P(1, -1, 1, 1))
    assert found == (1.0, 1.0)  # (delta, -beta)
    assert search_C3(P(0.3, 0.5, 0.5, 0.3)) is not None
    assert search_C3(P(0.1, -5, -5, 0.1, rho=0.9)) is None


def test_search_c3_result_always_verifies():
    rng = np.random.default_rng(1234)
    for _ in range(400):
        p = P(
            rng.uniform(0.05, 3),
            rng.uniform(-3, 3),
            rng.uniform(-3, 3),
            rng.uniform(0.05, 3),
            rng.uniform(-1, 1),
        )
        pair = search_C3(p)
        if pair is not None:
            assert check_C3_at(p, *pair)


def test_combined_coefficient_special_cases_find_witnesses():
    # rho = 0, alpha = delta, |beta| = |gamma|: C3 holds when
    # beta^2 <= alpha - 1/4 (antisymmetric) or -beta <= alpha - 1/4 (both negative)
    for alpha in (0.26, 0.5, 1.0, 2.0):
        bmax = math.sqrt(alpha - 0.25)
        for frac in (0.0, 0.5, 0.999):  # strictly inside: float-safe margins
            b = frac * bmax
            assert search_C3(P(alpha, -b, b, alpha)) is not None
            assert search_C3(P(alpha, b, -b, alpha)) is not None
        bneg = min((alpha - 0.25) * 0.999, alpha * 0.99)
        assert search_C3(P(alpha, -bneg, -bneg, alpha)) is not None
    # exactly representable boundary instances
    assert check_C3_at(P(0.5, -0.5, 0.5, 0.5), 1, 1) is True  # beta^2 = alpha - 1/4
    assert check_C3_at(P(0.5, -0.25, -0.25, 0.5), 1, 1) is True  # -beta = alpha - 1/4


def test_corner_verdict_examples():
    v = corner_verdict(P(0.6, 0.2, -3, 0.6))
    assert v.status is CornerStatus.AVOIDED_GUARANTEED and v.witness == "C2a"
    v = corner_verdict(P(0.25, 0, 0, 0.25, rho=1.0))
    assert v.status is CornerStatus.HITS_ALMOST_SURELY
    assert v.witness == "degenerate-collision"
    v = corner_verdict(P(0.25, -1, -1, 0.25))
    assert v.status is CornerStatus.UNKNOWN and v.witness is None


def test_corner_verdict_witness_order_is_fixed():
    # C1 wins over C2a when both hold
    v = corner_verdict(P(1, 0.5, 0.5, 1))
    assert v.witness == "C1"
    # C2b fires before the skew bound and C3
    v = corner_verdict(P(1, -1, 1, 1))
    assert v.witness == "C2b"


def test_corner_verdict_random_sweep_consistency():
    tags = {
        "C1": check_C1,
        "C2a": check_C2a,
        "C2b": check_C2b,
        "skew-bound": check_skew_bound,
    }
    rng = np.random.default_rng(7)
    for _ in range(1500):
        p = P(
            rng.uniform(0.05, 2),
            rng.uniform(-2, 2),
            rng.uniform(-2, 2),
            rng.uniform(0.05, 2),
            rng.choice([rng.uniform(-1, 1), 1.0, -1.0]),
        )
        v = corner_verdict(p)
        if v.status is CornerStatus.HITS_ALMOST_SURELY:
            assert check_degenerate_collision(p)
        else:
            assert not (
                v.status is CornerStatus.UNKNOWN and check_degenerate_collision(p)
            )
        if v.status is CornerStatus.AVOIDED_GUARANTEED:
            if v.witness == "C3":
                assert check_C3_at(p, *v.c3_pair)
            else:
                assert tags[v.witness](p)


def test_existence_examples():
    v = existence_class(P(1, 0.5, 0.5, 1))
    assert v.classification is ExistenceClass.UNIQUE_IN_FULL_QUADRANT
    assert v.basis == "nonneg-cross-3"
    v = existence_class(P(0.25, -0.5, -0.5, 0.25, rho=0.5))
    assert v.classification is ExistenceClass.NO_SOLUTION
    v = existence_class(P(0.3, -0.4, -0.3, 0.4, rho=-1.0))
    assert v.classification is ExistenceClass.DEGENERATE_LINE_SYSTEM
    # decoupled system always has a unique quadrant solution
    v = existence_class(P(0.2, 0, 0, 0.2, rho=0.9))
    assert v.classification is ExistenceClass.UNIQUE_IN_FULL_QUADRANT
    # cooperative case with corner avoidance but alpha delta < beta gamma:
    # unique off the corner, corner-start uniqueness open
    v = existence_class(P(1, 2, 2, 1))
    assert v.classification is ExistenceClass.UNIQUE_IN_PUNCTURED_QUADRANT
    assert v.corner_uniqueness_open is True
    # mixed signs with the C2a witness
    v = existence_class(P(1, 1, -1, 1))
    assert v.classification is ExistenceClass.UNIQUE_IN_PUNCTURED_QUADRANT
    assert v.witness == "C2a"


def test_existence_unknown_when_nothing_applies():
    v = existence_class(P(0.1, -1, 1, 0.1, rho=0.9))
    assert v.classification is ExistenceClass.UNKNOWN


def test_edge_verdict_examples():
    assert edge_verdicts(P(1, -0.2, -0.2, 1)) == (EdgeStatus.AVOIDED, EdgeStatus.AVOIDED)
    x_edge, y_edge = edge_verdicts(P(0.25, -1, 0, 1))
    assert x_edge is EdgeStatus.HIT_AS and y_edge is EdgeStatus.AVOIDED
    x_edge, _ = edge_verdicts(P(0.25, 1, 0, 1))
    assert x_edge is EdgeStatus.UNKNOWN
    # corner avoidance rescues a negative cross coefficient when alpha >= 1/2
    x_edge, _ = edge_verdicts(P(1, -0.1, 3, 1))
    assert x_edge is EdgeStatus.AVOIDED


def test_stationary_law_examples():
    law = stationary_law(P(1, -1, 1, 1, theta=1, eta=2))
    assert (law.a, law.b, law.c, law.d) == (3.0, 3.0, 3.0, 1.0)
    law = stationary_law(P(1, 0, 0, 1, theta=1, eta=1))
    assert (law.a, law.b, law.c, law.d) == (3.0, 3.0, 2.0, 2.0)
    assert stationary_law(P(1, 1, 1, 1, rho=0.5, theta=1, eta=1)) is None
    assert stationary_law(P(1, -1, 1, 1)) is None  # undrifted
    # positivity of exponents required
    assert stationary_law(P(1, 2, 0, 1, rho=1, theta=1, eta=2)) is None


def test_stationary_law_random_consistency():
    # under the skew-symmetry equality the law exists iff the positivity
    # conditions hold, and the undrifted classifier never says NoSolution
    rng = np.random.default_rng(55)
    produced = 0
    for _ in range(500):
        alpha, delta = rng.uniform(0.1, 2, size=2)
        beta, gamma = rng.uniform(-1.5, 1.5, size=2)
        rho = 0.5 * (beta / delta + gamma / alpha)
        if not -1 <= rho <= 1:
            continue
        theta, eta = rng.uniform(0.1, 2, size=2)
        p = P(alpha, beta, gamma, delta, rho, theta, eta)
        law = stationary_law(p)
        if law is None:
            continue
        produced += 1
        assert law.a > 1 and law.b > 1 and law.c > 0 and law.d > 0
        v = existence_class(p.without_drift())
        assert v.classification is not ExistenceClass.NO_SOLUTION
    assert produced > 50


def test_skew_symmetry_holds_on_exactly_one_rho():
    # the equality 2*rho = beta/delta + gamma/alpha is linear in rho
    rhos = np.linspace(-1, 1, 21)
    laws = [stationary_law(P(1, 0.5, 0.5, 1, rho=float(r), theta=1, eta=1)) for r in rhos]
    hits = [r for r, law in zip(rhos, laws) if law is not None]
    assert hits == [0.5]


def test_supermartingale_coefficient_examples():
    assert supermartingale_coefficient(P(1, 0, 0, 1)) == 0.0
    assert supermartingale_coefficient(P(1, 0, 0, 1, rho=-0.5)) == -0.5
    assert supermartingale_coefficient(P(1, 1, 1, 1, rho=1.0)) == -1.0


def test_supermartingale_coefficient_sign_on_feasible_draws():
    rng = np.random.default_rng(2718)
    checked = 0
    while checked < 1000:
        alpha = rng.uniform(0.51, 3)
        delta = rng.uniform(0.51, 3)
        beta = rng.uniform(-2, 2)
        gamma = rng.uniform(-2, 2)
        bound = beta / (2 * delta - 1) + gamma / (2 * alpha - 1)
        hi = min(1.0, bound)
        if hi <= -1.0:
            continue
        rho = rng.uniform(-1.0 + 1e-9, hi)
        k = supermartingale_coefficient(P(alpha, beta, gamma, delta, rho))
        assert k <= 0.0
        checked += 1
    # equality case gives exactly zero
    p = P(1.0, 0.5, -0.25, 1.0, rho=0.25)
    assert supermartingale_coefficient(p) == pytest.approx(0.0, abs=1e-15)


def test_classify_report_shape():
    rep = classify(P(1, -1, 1, 1, theta=1, eta=2))
    d = rep.as_dict()
    assert d["corner"]["status"] == "AvoidedGuaranteed"
    assert d["existence"]["classification"] == "UniqueInPuncturedQuadrant"
    assert d["stationary_law"] == {"a": 3.0, "b": 3.0, "c": 3.0, "d": 1.0}
    assert d["stationary_absence_reason"] is None
    rep = classify(P(1, -1, 1, 1))
    assert rep.stationary is None
    assert "drift" in rep.stationary_absence_reason

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmiboost.boosting import Ensemble, adaboost
from mmiboost.dataset import Dataset
from mmiboost.errors import DataError
from mmiboost.margins import (KL_CAP, MarginProfile, bound_report, cmd, compare_profiles,
                              emargin_bound, freund_schapire_bound, kl_bernoulli, kl_inverse,
                              margin_stats, margins, margins_from_matrix, schapire_bound,
                              theta_hat, u_term)
from mmiboost.weak_learner import DecisionTree, ThresholdGrid
from oracles import emargin_oracle, kl_inverse_mp, kl_mp, theta_hat_oracle

LN_H = math.log(4000.0)  # stumps, p = 20, m = 100

probs = st.floats(0.0, 1.0)
open_probs = st.floats(1e-9, 1 - 1e-9)


# -- KL ---------------------------------------------------------------------


@pytest.mark.parametrize("q,p", [(0.1, 0.5), (0.0, 0.3), (1.0, 0.3), (0.25, 0.9),
                                 (0.5, 1e-6), (0.999, 0.5)])
def test_kl_matches_high_precision(q, p):
    assert kl_bernoulli(q, p) == pytest.approx(float(kl_mp(q, p)), rel=1e-13, abs=1e-15)


def test_kl_known_values():
    assert kl_bernoulli(0.1, 0.5) == pytest.approx(0.368064, abs=1e-6)
    assert kl_bernoulli(0.0, 0.5) == pytest.approx(math.log(2))


@given(probs.filter(lambda q: 0 < q < 1) | st.sampled_from([0.0, 1.0]))
def test_kl_of_equal_arguments_is_exactly_zero(q):
    q = min(max(q, 1e-300), 1 - 1e-16) if 0 < q < 1 else q
    if q in (0.0, 1.0):
        return  # p must be interior
    assert kl_bernoulli(q, q) == 0.0


@given(probs, open_probs)
def test_kl_nonnegative(q, p):
    assert kl_bernoulli(q, p) >= 0.0


def test_kl_domain():
    with pytest.raises(DataError):
        kl_bernoulli(0.5, 0.0)
    with pytest.raises(DataError):
        kl_bernoulli(0.5, 1.0)
    with pytest.raises(DataError):
        kl_bernoulli(1.5, 0.5)


@pytest.mark.parametrize("q,u", [(0.1, 0.368064), (0.0, 0.5), (0.3, 0.01), (0.7, 0.2),
                                 (0.05, 1.5)])
def test_kl_inverse_matches_high_precision(q, u):
    assert kl_inverse(q, u) == pytest.approx(float(kl_inverse_mp(q, u)), abs=1e-14)


@given(st.floats(0, 0.999), st.floats(1e-6, 0.999))
def test_kl_inverse_round_trip_on_attainable_values(q, t):
    p_true = q + t * (1 - q)
    assume(p_true < 1 - 1e-6)
    u = kl_bernoulli(q, p_true)
    p = kl_inverse(q, u)
    assert abs(kl_bernoulli(q, p) - u) <= 1e-10
    assert p >= q


@given(st.floats(0, 0.99), st.floats(0, 5), st.floats(0, 5))
def test_kl_inverse_monotone_in_u(q, u1, u2):
    lo, hi = sorted((u1, u2))
    assert kl_inverse(q, lo) <= kl_inverse(q, hi)


def test_kl_inverse_edges():
    assert kl_inverse(0.3, 0.0) == 0.3
    assert kl_inverse(0.3, 1e6) == KL_CAP
    assert kl_inverse(1.0, 0.2) == KL_CAP
    np.testing.assert_array_equal(kl_inverse(np.array([0.1, 0.2]), 0.0), [0.1, 0.2])
    with pytest.raises(DataError):
        kl_inverse(0.2, -1.0)


def test_kl_inverse_is_float_optimal():
    """Where the round trip misses 1e-10, no double does better.

    The bisection lands on a neighbour of the exact root, so the residual
    is bounded by the slope (1-q)/(1-p) - q/p times one unit in the last
    place of p.
    """
    r = np.random.default_rng(3)
    q = r.uniform(0, 0.99, 2000)
    u = r.uniform(0, 5, 2000)
    p = kl_inverse(q, u)
    free = p < KL_CAP
    resid = np.abs(kl_bernoulli(q[free], p[free]) - u[free])
    slope = (1 - q[free]) / (1 - p[free]) - q[free] / p[free]
    ulp = np.spacing(p[free])
    assert np.all(resid <= 2 * slope * ulp + 1e-12)
    big = resid > 1e-10
    assert np.all(1 - p[free][big] < 1e-5)  # only next to the p -> 1 wall


# -- margins and CMD ------------------------------------------------------


def _ensemble():
    g = ThresholdGrid(10)
    trees = [DecisionTree(1, (0,), (4,), (-1, 1), g), DecisionTree(1, (1,), (4,), (-1, 1), g),
             DecisionTree(1, (0,), (7,), (-1, 1), g)]
    return Ensemble(trees, [0.5, 0.3, 0.2])


def test_margins_by_hand():
    e = _ensemble()
    X = np.array([[0.9, 0.9], [0.9, 0.1], [0.1, 0.9], [0.6, 0.6]])
    ds = Dataset(X, [1, 1, -1, -1], raw=False)
    # h = (+,+,+), (+,-,+), (-,+,-), (+,+,-)
    np.testing.assert_allclose(margins(e, ds).margins, [1.0, 0.4, 0.4, -0.6])
    with pytest.raises(DataError):
        margins(e, Dataset(X[:, :1], [1, 1, -1, -1], raw=False))


def test_cmd_and_stats():
    prof = MarginProfile([0.2, -0.1, 0.2, 0.5])
    assert cmd(prof) == [(-0.1, 0.25), (0.2, 0.75), (0.5, 1.0)]
    st_ = margin_stats(prof)
    assert (st_.min, st_.max, st_.median) == (-0.1, 0.5, 0.2)
    assert st_.mean == pytest.approx(0.2)
    np.testing.assert_array_equal(prof.fraction_at_most([-1, 0.2, 1]), [0, 0.75, 1])
    with pytest.raises(DataError):
        MarginProfile([1.5])


@given(st.integers(0, 1000))
def test_margins_lie_in_unit_interval(seed):
    r = np.random.default_rng(seed)
    H = np.where(r.random((30, 8)) < 0.5, -1, 1)
    y = np.where(r.random(30) < 0.5, -1, 1)
    w = r.dirichlet(np.ones(8))
    m = margins_from_matrix(H, y, w).margins
    assert np.all(np.abs(m) <= 1.0)
    np.testing.assert_allclose(m, y * (H @ w), atol=1e-15)


def test_compare_profiles():
    a = MarginProfile([0.1, 0.2, 0.3])
    d = compare_profiles(a, MarginProfile([0.1, 0.25, 0.5]))
    assert d.dominates and d.min_improvement == 0.0
    assert d.avg_improvement == pytest.approx(0.25 / 3)
    assert not compare_profiles(a, MarginProfile([0.2, 0.1, 0.3])).dominates
    with pytest.raises(DataError):
        compare_profiles(a, MarginProfile([0.1]))


# -- theta hat and the EMargin bound --------------------------------------


@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(-1, 1)),
       st.floats(0, 1))
def test_theta_hat_matches_definition(m, q):
    prof = MarginProfile(m)
    assert theta_hat(prof, q, LN_H) == theta_hat_oracle(m, q, LN_H)


def test_theta_hat_none_below_resolution():
    prof = MarginProfile([0.01, 0.02])
    assert theta_hat(prof, 0.0, LN_H) is None
    assert theta_hat(prof, 1.0, LN_H) == 1.0


@pytest.mark.parametrize("seed", range(8))
def test_emargin_matches_oracle(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(5, 40))
    m = np.round(np.clip(r.normal(0.3, 0.2, n), -1, 1), 3)
    got = emargin_bound(MarginProfile(m), LN_H, n, 0.05)
    q, th, val = emargin_oracle(m, LN_H, 0.05)
    assert got.q_star == q
    assert got.theta_star == th
    assert got.bound_value == pytest.approx(val, abs=1e-12)


def test_emargin_table_and_argmin():
    prof = MarginProfile(np.linspace(0.2, 0.9, 50))
    res = emargin_bound(prof, LN_H, 50)
    qs = [row[0] for row in res.per_q_table]
    vals = [row[3] for row in res.per_q_table]
    assert qs == sorted(qs)
    k = int(np.argmin(vals))
    assert res.q_star == qs[k] and res.theta_star == res.per_q_table[k][1]
    assert res.bound_value == pytest.approx(LN_H / 50 + vals[k])
    assert "emargin=" in res.as_block()


def test_tiny_margins_fall_back_to_theta_one():
    # q = 1 always admits theta = 1, so the "all q skipped" error cannot fire
    # once ln|H| > ln 8; only q = 1 survives here and the bound is trivial
    res = emargin_bound(MarginProfile([0.001, 0.002]), LN_H, 2)
    assert (res.q_star, res.theta_star) == (1.0, 1.0)
    assert len(res.per_q_table) == 1
    assert res.bound_value == pytest.approx(LN_H / 2 + KL_CAP)


def test_emargin_errors():
    with pytest.raises(DataError):
        emargin_bound(MarginProfile([0.5]), math.log(8.0), 1)
    with pytest.raises(DataError):
        emargin_bound(MarginProfile([0.5]), LN_H, 1, delta=1.5)


def test_u_term_formula():
    n, th = 100, 0.4
    expect = (8 * LN_H / th ** 2 * math.log(2 * n * n / LN_H) + LN_H + math.log(20)) / n
    assert u_term(th, LN_H, n, 0.05) == pytest.approx(expect)


# -- VC-type bounds -------------------------------------------------------


def test_schapire_bound_formula():
    prof = MarginProfile([0.1, 0.3, 0.5, 0.7])
    rows = schapire_bound(prof, LN_H, 4, 0.05, [0.3, 0.6])
    for theta, emp, cap, tot in rows:
        assert emp == np.mean(prof.margins <= theta)
        assert cap == pytest.approx(math.sqrt((math.log(4) * LN_H / theta ** 2
                                               + math.log(20)) / 4))
        assert tot == emp + cap
    with pytest.raises(DataError):
        schapire_bound(prof, LN_H, 4, 0.05, [0.0])


def test_freund_schapire_bound():
    assert freund_schapire_bound(0.1, 10, 5.0, 200) == pytest.approx(0.1 + 0.5)
    with pytest.raises(DataError):
        freund_schapire_bound(0.1, 0, 5.0, 200)


def test_bound_report_on_boosted_ensemble(noisy_data):
    e, _ = adaboost(noisy_data, 20, 1, ThresholdGrid())
    prof = margins(e, noisy_data)
    ln_h = math.log(2 * 100 * noisy_data.p)
    rep = bound_report(prof, ln_h, 0.05, e.T)
    assert rep.freund_schapire == pytest.approx(0.05 + math.sqrt(20 * ln_h / math.log(2) / 80))
    assert len(rep.schapire_curve) == 100
    assert rep.emargin is None or 0 <= rep.emargin.q_star <= 1

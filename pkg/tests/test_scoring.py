"""Score statistics against mpmath integration and exact tail sums."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from certrand._special import gammainc_q, hypergeom_pmf
from certrand.scoring import (
    ScoreReport,
    default_p_max,
    gamma_mixture_tail,
    mixture_truncated_mean,
    pt_cdf,
    pt_truncated_mean,
    score_report,
    spoof_pass_prob,
    truncated_score,
    xeb_score,
    xeb_variance,
)

mpmath.mp.dps = 40


def test_default_p_max():
    assert default_p_max(12) == 2.0 / 4096.0
    assert default_p_max(64) == 2.0 / 2.0**64


def test_xeb_score_hand_case():
    # two samples at p = 2^-n give score 1; uniform samples give 0
    n = 4
    assert xeb_score([2 / 16, 2 / 16], n) == pytest.approx(1.0)
    assert xeb_score([1 / 16] * 5, n) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        xeb_score([], n)


def test_truncated_score_caps():
    n = 4
    # 10/16 caps at 2/16 -> contribution 2 each -> score 1
    assert truncated_score([10 / 16, 10 / 16], n) == pytest.approx(1.0)
    assert truncated_score([10 / 16], n, p_max=20 / 16) == pytest.approx(9.0)


def test_xeb_variance_formula():
    assert xeb_variance(0.0, 100) == pytest.approx(0.01)
    assert xeb_variance(1.0, 400) == pytest.approx(2.0 / 400.0)
    with pytest.raises(ValueError):
        xeb_variance(0.5, 0)


def test_pt_cdf_matches_closed_form():
    x = np.array([-1.0, 0.0, 0.5, 2.0, 10.0])
    got = pt_cdf(x, 0.6)
    want = np.where(x < 0, 0.0, 1.0 - (1.0 + 0.6 * x) * np.exp(-x))
    assert np.allclose(got, want, atol=1e-15)
    assert pt_cdf(0.0, 0.3) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        pt_cdf(1.0, 1.5)


@pytest.mark.parametrize("shape", [1, 2])
@pytest.mark.parametrize("x_min,x_max", [(0.0, 2.0), (0.3, 1.9), (0.0, 50.0), (1.0, 1.0)])
def test_pt_truncated_mean_vs_quadrature(shape, x_min, x_max):
    # E[min(x_min + G, x_max)], G ~ Gamma(shape, 1)
    c = x_max - x_min
    pdf = (lambda t: mpmath.exp(-t)) if shape == 1 else (lambda t: t * mpmath.exp(-t))
    body = mpmath.quad(lambda t: (x_min + t) * pdf(t), [0, c])
    tail = x_max * (
        mpmath.exp(-c) if shape == 1 else (1 + c) * mpmath.exp(-c)
    )
    want = float(body + tail)
    assert pt_truncated_mean(shape, x_min, x_max) == pytest.approx(want, rel=1e-12)


def test_pt_truncated_mean_rejects_inverted_window():
    with pytest.raises(ValueError):
        pt_truncated_mean(1, 2.0, 1.0)
    with pytest.raises(ValueError):
        pt_truncated_mean(3, 0.0, 1.0)


def test_mixture_truncated_mean_anchors():
    # capped at 2: honest ideal mean 2 - 4e^{-2}, uniform mean 1 - e^{-2}
    assert mixture_truncated_mean(1.0, 0.0, 2.0) == pytest.approx(
        2.0 - 4.0 * math.exp(-2.0), rel=1e-14
    )
    assert mixture_truncated_mean(0.0, 0.0, 2.0) == pytest.approx(
        1.0 - math.exp(-2.0), rel=1e-14
    )
    # the desk operating point used by the amplification preset
    desk = mixture_truncated_mean(0.9, 0.0, 2.0)
    want = 0.1 * (1.0 - math.exp(-2.0)) + 0.9 * (2.0 - 4.0 * math.exp(-2.0))
    assert desk == pytest.approx(want, rel=1e-14)


def _tail_reference(n2, l, l_val, threshold, upper=True):
    total = mpmath.mpf(0)
    for i in range(max(0, n2 + l_val - l), min(n2, l_val) + 1):
        pmf = (
            mpmath.binomial(n2, i)
            * mpmath.binomial(l - n2, l_val - i)
            / mpmath.binomial(l, l_val)
        )
        q = mpmath.gammainc(l_val + i, threshold, mpmath.inf, regularized=True)
        total += pmf * (q if upper else 1 - q)
    return float(total)


@pytest.mark.parametrize("upper", [True, False])
@pytest.mark.parametrize(
    "n2,l,l_val,threshold",
    [(12, 40, 10, 14.0), (0, 40, 10, 13.0), (40, 40, 10, 25.0), (100, 400, 120, 150.0)],
)
def test_gamma_mixture_tail_vs_mpmath(n2, l, l_val, threshold, upper):
    want = _tail_reference(n2, l, l_val, threshold, upper)
    got = gamma_mixture_tail(n2, l, l_val, threshold, upper=upper)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-15)


def test_gamma_mixture_tail_edges():
    assert gamma_mixture_tail(5, 40, 10, 0.0) == 1.0
    assert gamma_mixture_tail(5, 40, 10, 0.0, upper=False) == 0.0
    with pytest.raises(ValueError):
        gamma_mixture_tail(50, 40, 10, 5.0)
    with pytest.raises(ValueError):
        gamma_mixture_tail(5, 40, 0, 5.0)


def test_gamma_mixture_tail_monotone_in_n2():
    vals = [gamma_mixture_tail(n2, 400, 120, 160.0) for n2 in (0, 50, 150, 300)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_spoof_pass_prob_frozen_anchor():
    # no quantum samples, no classical validation: Q(100, 130) via mpmath
    got = spoof_pass_prob(0, 0.3, 2000, 100)
    assert got == pytest.approx(0.0027504083673065157, rel=1e-10)


def test_spoof_pass_prob_monotone_in_q():
    vals = [spoof_pass_prob(q, 0.3, 2000, 100) for q in (0, 400, 1200, 2000)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert spoof_pass_prob(2000, 0.3, 2000, 100) > 0.999


def test_spoof_pass_prob_validation_budget_helps():
    lo = spoof_pass_prob(0, 0.3, 2000, 100, f_adv=0.0)
    hi = spoof_pass_prob(0, 0.3, 2000, 100, f_adv=0.05)
    assert hi > lo


def test_spoof_pass_prob_rejects_bad_inputs():
    with pytest.raises(ValueError):
        spoof_pass_prob(-1, 0.3, 100, 10)
    with pytest.raises(ValueError):
        spoof_pass_prob(5, 0.3, 100, 10, phi=1.5)
    with pytest.raises(ValueError):
        spoof_pass_prob(5, 0.3, 100, 10, f_adv=-0.1)


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=5.0))
@settings(max_examples=60, deadline=None)
def test_mixture_mean_monotone_in_phi(phi, x_max):
    # the shape-2 branch dominates the shape-1 branch
    lo = mixture_truncated_mean(0.0, 0.0, x_max)
    mid = mixture_truncated_mean(phi, 0.0, x_max)
    hi = mixture_truncated_mean(1.0, 0.0, x_max)
    assert lo - 1e-12 <= mid <= hi + 1e-12


def test_score_report_round_trip(rng):
    probs = rng.exponential(size=500) / 2.0**10
    rep = score_report(probs, 10)
    assert rep.l_val == 500
    assert rep.p_max == default_p_max(10)
    assert rep.stderr > 0.0
    assert rep.score == pytest.approx(truncated_score(probs, 10), rel=1e-12)
    back = ScoreReport.from_json(rep.to_json())
    assert back == rep

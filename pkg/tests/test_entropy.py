"""Entropy certificates: rate function geometry, accumulation, spoof bounds."""

import math

import mpmath
import pytest

from certrand.entropy import (
    AdHocParams,
    OracleParams,
    adhoc_min_entropy,
    adhoc_pass_prob,
    dominated_pass_prob,
    eat_min_entropy,
    eps_double_prime,
    eps_prime,
    h_of_s,
    honest_score,
    rate_function,
    restricted_min_entropy,
    single_round_entropy,
    var_f,
)
from certrand.analysis import classical_fidelity_budget

mpmath.mp.dps = 40

PHI_CLASSICAL = classical_fidelity_budget()
EPS_SMOOTH_FULL = (1e-3 - 5e-8) / 6.0


def test_honest_score_anchors():
    # truncated mixture means at cap N p_max = 2
    assert honest_score(1.0, 20) == pytest.approx(2.0 - 4.0 * math.exp(-2.0), rel=1e-14)
    assert honest_score(0.0, 20) == pytest.approx(1.0 - math.exp(-2.0), rel=1e-14)
    assert honest_score(0.586, 64) == pytest.approx(1.212745288833422, rel=1e-12)
    # monotone in fidelity
    grid = [honest_score(phi, 16) for phi in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert all(a < b for a, b in zip(grid, grid[1:]))


def test_eps_prime_formula():
    t, m, n, k, ell = 3, 5, 40, 16, 64
    theta = mpmath.pi / (2 * k)
    per = (
        4 / mpmath.mpf(2) ** (n / 2)
        + mpmath.sqrt(2 * (1 - mpmath.cos(theta) ** k))
        + 2 / mpmath.sqrt(ell + 1)
    )
    assert eps_prime(t, m, n, k, ell) == pytest.approx(float(m * t * per), rel=1e-12)
    with pytest.raises(ValueError):
        eps_prime(0, 1, 10, 1, 1)
    with pytest.raises(ValueError):
        eps_prime(1, 1, 10, 0, 1)


def test_eps_double_prime_adds_collision_terms():
    n, k, ell = 32, 8, 8
    nn = 2.0**n
    kl = k + ell
    extra = 2.0 * kl * (kl - 1.0) / nn + 2.0 * k / (nn * (1.0 - k / nn))
    assert eps_double_prime(n, k, ell) == pytest.approx(
        eps_prime(1, 1, n, k, ell) + extra, rel=1e-12
    )


def test_single_round_entropy_improved_branch():
    delta, n, k, ell = 0.5, 64, 16, 16
    nn = 2.0**n
    ln_n2 = n * math.log(2.0)
    bracket = (
        delta
        - 2.0 * eps_double_prime(n, k, ell) * (ln_n2 + 3.5)
        - 1.001 * 16.0 * ln_n2 * ln_n2 / nn
    )
    want = bracket * n - math.log2(n) - 5.0
    assert single_round_entropy(delta, n, k, ell) == pytest.approx(want, rel=1e-12)
    # fidelity scaling: phi * H((delta - f) / phi)
    phi = 0.7
    got = single_round_entropy(delta, n, k, ell, phi_adv=phi, f_classical=0.1)
    eff = (delta - 0.1) / phi
    bracket = (
        eff
        - 2.0 * eps_double_prime(n, k, ell) * (ln_n2 + 3.5)
        - 1.001 * 16.0 * ln_n2 * ln_n2 / nn
    )
    assert got == pytest.approx(phi * (bracket * n - math.log2(n) - 5.0), rel=1e-12)


def test_single_round_entropy_query_branch():
    got = single_round_entropy(0.6, 64, 4, 64, t_queries=2, m=3)
    n, k, ell = 64, 4, 64
    nn = 2.0**n
    ln_n2 = n * math.log(2.0)
    bracket = (
        0.6
        - 2.0 * eps_prime(2, 3, n, k, ell) * (ln_n2 + 3.5)
        - 1.001 * 16.0 * (k + ell) ** 2 * ln_n2 * ln_n2 / nn
    )
    per = bracket * n - math.log2(n) - math.log2(k + ell) - 3.0
    assert got == pytest.approx(3 * per - 2.0, rel=1e-12)
    with pytest.raises(ValueError):
        single_round_entropy(0.6, 64, 4, 64, t_queries=2, improved=True)
    with pytest.raises(ValueError):
        single_round_entropy(0.6, 64, 4, 64, phi_adv=0.0)


# ---------------------------------------------------------------------------
# Affine rate function


def _full_rate(**kw):
    base = dict(phi_adv=0.65, phi_classical=PHI_CLASSICAL)
    base.update(kw)
    return rate_function(64, 1 << 24, 1 << 24, **base)


def test_rate_function_is_affine():
    rate = _full_rate()
    for s in (0.0, 0.5, 1.2127, 2.0):
        assert rate(s) == pytest.approx(rate.offset + rate.slope * s, rel=1e-14)
    assert rate.h_zero == rate.offset
    assert rate.h_top == pytest.approx(rate(rate.score_cap), rel=1e-14)
    assert rate.score_cap == pytest.approx(2.0**64 * rate.p_max, rel=1e-14)
    assert rate.kappa == pytest.approx((2.0 * 2.0**24) ** 2 / 2.0**64, rel=1e-14)
    assert rate.edge_mass == pytest.approx(math.exp(-rate.x_max) - rate.d, rel=1e-12)
    assert rate.edge_mass >= 0.0
    assert h_of_s(1.0, 64, 1 << 24, 1 << 24, phi_adv=0.65, phi_classical=PHI_CLASSICAL) == rate(1.0)


def test_rate_function_internal_geometry():
    rate = _full_rate()
    nn = 2.0**64
    shrink = 1.0 - nn ** (-1.0 / 3.0)
    # p_min solves the Gamma(2,1) CDF equation at the dominated distance
    y = rate.p_min * nn
    assert 1.0 - (1.0 + y) * math.exp(-y) == pytest.approx(rate.d, rel=1e-10)
    assert rate.x_min == pytest.approx(y * shrink, rel=1e-12)
    assert rate.x_max == pytest.approx(nn * shrink * rate.p_max, rel=1e-12)
    assert rate.d == max(rate.d_quantum, 0.0)
    assert rate.d_quantum == pytest.approx(
        nn ** (-1.0 / 3.0) + rate.kappa + rate.eps_dd, rel=1e-12
    )


def test_rate_function_slope_offset_recomputed():
    rate = _full_rate()
    n = 64
    nn = 2.0**n
    shrink = 1.0 - nn ** (-1.0 / 3.0)
    cgap = rate.x_max - rate.x_min
    eg = math.exp(-cgap)
    denom = 1.0 - eg * (1.0 + cgap)
    assert rate.slope == pytest.approx(
        n * (1.0 - rate.kappa) * shrink / denom, rel=1e-12
    )
    t0 = (-1.0 - rate.d * rate.x_max - rate.x_min + eg) / denom
    want = n * ((t0 - PHI_CLASSICAL) * (1.0 - rate.kappa) - 0.65 * rate.big_c) - 2.0
    assert rate.offset == pytest.approx(want, rel=1e-12)


def test_rate_function_validation():
    with pytest.raises(ValueError):
        rate_function(1, 1, 1)
    with pytest.raises(ValueError):
        rate_function(16, 1 << 10, 1, phi_adv=1.0)  # k > 2^(n/2)
    with pytest.raises(ValueError):
        rate_function(16, 1 << 8, 1 << 8)  # kappa = (512)^2 / 2^16 >= 1
    with pytest.raises(ValueError):
        rate_function(64, 1 << 20, 1 << 20, phi_adv=1.5)
    with pytest.raises(ValueError):
        rate_function(64, 1 << 20, 1 << 20, d_classical=1.0)
    with pytest.raises(ValueError):
        rate_function(64, 1 << 20, 1 << 20, p_max=2.0**-64)  # cap at uniform weight
    with pytest.raises(ValueError, match="probability mass"):
        rate_function(64, 1, 1)  # sample-access distance saturates at k = ell = 1


def test_var_f_against_quadrature():
    rate = _full_rate()
    gamma = 0.59
    slope = mpmath.mpf(rate.slope)
    offset = mpmath.mpf(rate.offset)
    a = mpmath.mpf(rate.score_cap)
    c = mpmath.mpf(rate.x_max)
    d = mpmath.mpf(rate.d)
    tail = mpmath.mpf(rate.edge_mass)
    h_top = offset + slope * a
    second = (
        d * (slope * a) ** 2
        + mpmath.quad(lambda x: mpmath.e**-x * (slope * (a - x)) ** 2, [0, c])
        + tail * (slope * (a - c)) ** 2
    )
    mean_h = (
        d * offset
        + mpmath.quad(lambda x: mpmath.e**-x * (offset + slope * x), [0, c])
        + tail * (offset + slope * c)
    )
    want = second / gamma - (h_top - mean_h) ** 2
    assert var_f(rate, gamma) == pytest.approx(float(want), rel=1e-10)
    with pytest.raises(ValueError):
        var_f(rate, 0.0)


# ---------------------------------------------------------------------------
# Accumulated oracle certificate


def _full_params(**kw):
    base = dict(
        n=64,
        rounds=23_651,
        s_star=honest_score(0.586, 64),
        gamma=0.59,
        eps_smooth=EPS_SMOOTH_FULL,
        eps_accept=1e-3,
        phi_adv=0.65,
        phi_classical=PHI_CLASSICAL,
    )
    base.update(kw)
    return OracleParams(**base)


def test_eat_full_scale_golden():
    report = eat_min_entropy(_full_params())
    assert report.beta == pytest.approx(0.10147865296139369, rel=1e-9)
    assert report.entropy == pytest.approx(153604.583756155, rel=1e-9)
    assert report.k == 1 << 24 and report.ell == 1 << 24
    assert report.formal
    assert set(report.checks) == {
        "qubit_count",
        "window_width",
        "round_count",
        "edge_mass",
    }
    assert report.entropy >= report.entropy_fixed
    assert report.alpha > 1.0
    assert report.model == "oracle-eat"


def test_eat_constants_recomputed():
    report = eat_min_entropy(_full_params())
    logterm = 1.0 - 2.0 * math.log2(EPS_SMOOTH_FULL) - 2.0 * math.log2(1e-3)
    assert report.logterm == pytest.approx(logterm, rel=1e-14)
    w = 2.0 * 64 + report.rate.h_top - report.rate.h_zero
    assert report.w_width == pytest.approx(w, rel=1e-12)
    v = math.sqrt(report.var_bound + 2.0) + math.log2(2.0 * 2.0**64 + 1.0)
    assert report.v_factor == pytest.approx(v, rel=1e-12)
    assert report.c_root == pytest.approx(
        v * math.sqrt(2.0 * math.log(2.0) * logterm), rel=1e-12
    )
    fixed = (
        23_651 * report.h_rate - math.sqrt(23_651) * report.c_root - report.c_const
    )
    assert report.entropy_fixed == pytest.approx(fixed, rel=1e-10)


def test_eat_monotone_responses():
    base = eat_min_entropy(_full_params())
    assert eat_min_entropy(_full_params(s_star=1.25)).beta > base.beta
    assert (
        eat_min_entropy(_full_params(phi_classical=2 * PHI_CLASSICAL)).beta < base.beta
    )
    assert eat_min_entropy(_full_params(phi_adv=0.80)).beta < base.beta
    assert eat_min_entropy(_full_params(gamma=0.80)).beta > base.beta


def test_eat_fixed_k_and_validation():
    pinned = eat_min_entropy(_full_params(k=1 << 24, ell=1 << 24))
    free = eat_min_entropy(_full_params())
    assert pinned.entropy == pytest.approx(free.entropy, rel=1e-12)
    with pytest.raises(ValueError, match="both"):
        eat_min_entropy(_full_params(k=1 << 24))
    with pytest.raises(ValueError):
        eat_min_entropy(_full_params(rounds=0))
    with pytest.raises(ValueError):
        eat_min_entropy(_full_params(eps_smooth=0.0))
    with pytest.raises(ValueError, match="admissible"):
        eat_min_entropy(_full_params(n=8))


# ---------------------------------------------------------------------------
# Non-adaptive spoofing bound


def test_dominated_pass_prob_validation():
    with pytest.raises(ValueError):
        dominated_pass_prob(1.2, 0.1, 0.01, 12, 100, 200, 1e-4, 1e-4)
    with pytest.raises(ValueError):
        dominated_pass_prob(1.2, 0.1, 1.0, 12, 200, 100, 1e-4, 1e-4)
    with pytest.raises(ValueError):
        dominated_pass_prob(1.2, 0.1, 0.01, 12, 200, 100, 0.0, 1e-4)


def test_dominated_pass_prob_shape():
    kw = dict(d=0.01, n=12, rounds=2000, l_val=200, eps1=1e-4, eps2=1e-4)
    base = dominated_pass_prob(1.30, 0.2, **kw)
    assert 0.0 < base < 1.0
    # richer shape-2 budget passes more often; higher bar passes less
    assert dominated_pass_prob(1.30, 0.4, **kw) > base
    assert dominated_pass_prob(1.38, 0.2, **kw) < base
    # an unreachable bar leaves only the Chernoff budgets
    floor = dominated_pass_prob(50.0, 0.2, **kw)
    assert floor == pytest.approx(2e-4, rel=1e-6)
    # saturated point mass forces n_mm = l_val and a vacuous bound
    assert dominated_pass_prob(1.30, 0.2, 0.9, 12, 2000, 200, 0.5, 1e-4) == 1.0


def test_adhoc_full_defaults_saturate():
    params = AdHocParams(
        n=64, rounds=23_651, l_val=11_933, s_star=honest_score(0.586, 64)
    )
    with pytest.raises(ValueError, match="probability mass"):
        adhoc_min_entropy(params)


def _adhoc_weak_adversary(**kw):
    # a fidelity-0.3 adversary leaves room below the threshold; at full
    # adversary fidelity the zero-entropy pass bound already saturates
    base = dict(
        n=64,
        rounds=23_651,
        l_val=11_933,
        s_star=1.40,
        k=1 << 24,
        ell=1 << 24,
        phi_adv=0.3,
        eps_smooth=1e-6,
        eps_count1=1e-4,
        eps_count2=1e-4,
    )
    base.update(kw)
    return AdHocParams(**base)


def test_adhoc_certificate_positive():
    report = adhoc_min_entropy(_adhoc_weak_adversary())
    assert report.entropy > 0.0
    assert 0.0 < report.beta <= 1.0
    assert report.formal
    # the reported entropy is the edge of the refuted region
    assert adhoc_pass_prob(_adhoc_weak_adversary(), report.entropy * 0.5) < 1.0
    assert report.pass_bound >= adhoc_pass_prob(
        _adhoc_weak_adversary(), report.entropy * 0.5
    )


def test_adhoc_monotone_in_threshold():
    lo = adhoc_min_entropy(_adhoc_weak_adversary(s_star=1.35)).entropy
    mid = adhoc_min_entropy(_adhoc_weak_adversary(s_star=1.40)).entropy
    hi = adhoc_min_entropy(_adhoc_weak_adversary(s_star=1.45)).entropy
    assert lo < mid < hi


def test_adhoc_uncertifiable_point_raises():
    params = _adhoc_weak_adversary(phi_adv=0.4, s_star=1.30)
    with pytest.raises(ValueError, match="refutes no entropy"):
        adhoc_min_entropy(params)


# ---------------------------------------------------------------------------
# Restricted adversary


def test_restricted_full_scale_golden():
    report = restricted_min_entropy(
        0.586,
        23_651,
        11_933,
        64,
        f_adv=PHI_CLASSICAL,
        eps_accept=1e-3,
        eps_smooth=EPS_SMOOTH_FULL,
    )
    assert report.q_min == 12_912
    assert report.entropy == pytest.approx(813443.4491810781, rel=1e-10)
    assert report.beta == pytest.approx(0.5374002745530567, rel=1e-10)
    assert not report.spoof_impossible
    assert report.pass_prob >= 1e-3
    assert report.model == "restricted"


def test_restricted_q_min_is_minimal():
    from certrand.scoring import spoof_pass_prob

    report = restricted_min_entropy(
        0.586,
        23_651,
        11_933,
        64,
        f_adv=PHI_CLASSICAL,
        eps_accept=1e-3,
        eps_smooth=EPS_SMOOTH_FULL,
    )
    q = report.q_min
    assert spoof_pass_prob(q, 0.586, 23_651, 11_933, f_adv=PHI_CLASSICAL) >= 1e-3
    assert spoof_pass_prob(q - 1, 0.586, 23_651, 11_933, f_adv=PHI_CLASSICAL) < 1e-3


def test_restricted_classical_helper_weakens_certificate():
    kw = dict(eps_accept=1e-3, eps_smooth=1e-4)
    clean = restricted_min_entropy(0.5, 2000, 1000, 20, f_adv=0.0, **kw)
    helped = restricted_min_entropy(0.5, 2000, 1000, 20, f_adv=0.1, **kw)
    assert helped.entropy < clean.entropy
    assert helped.q_min < clean.q_min


def test_restricted_spoof_impossible_branch():
    report = restricted_min_entropy(1.5, 500, 250, 12, eps_accept=1e-3, eps_smooth=1e-4)
    assert report.spoof_impossible
    assert report.q_min is None
    assert report.entropy == pytest.approx(
        500 * 11 + math.log2(1e-4), rel=1e-12
    )


def test_restricted_validation():
    with pytest.raises(ValueError):
        restricted_min_entropy(0.5, 100, 50, 12, eps_accept=0.0)
    with pytest.raises(ValueError):
        restricted_min_entropy(0.5, 100, 50, 12, eps_smooth=1.0)

"""Certified min-entropy bounds for delayed-basis circuit sampling.

Three adversary models are covered:

* restricted: the adversary spoofs with a limited stock of quantum samples
  plus classically simulated rounds; the certificate inverts the exact
  pass-probability tail (restricted_min_entropy).
* oracle: the adversary queries an ideal sampler once per round; entropy
  accumulates across rounds through an affine min-tradeoff function
  (eat_min_entropy).
* ad-hoc: a non-adaptive multi-round spoofing bound stitched from Chernoff
  counts and the exact validation-draw tail (adhoc_min_entropy).

Scores are raw truncated averages s = (N / L_val) sum_i min(p_i, p_max) with
N = 2^n, without the usual -1 subtraction, so the honest baseline sits near
1 + phi instead of phi. honest_score maps a device fidelity onto this scale.
Entropies are in bits throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .adversary import FORMAL_MIN_QUBITS
from .scoring import (
    default_p_max,
    gamma_mixture_tail,
    mixture_truncated_mean,
    spoof_pass_prob,
)

LN2 = math.log(2.0)

# the closed-form accumulation step picks alpha - 1 <= 1/(2 ln 2); the
# optimizer searches the same interval so both routes share validity
_ALPHA_GAP_CAP = 1.0 / (2.0 * LN2)


def _log_cos(theta: float) -> float:
    """log(cos(theta)) without cancellation for small theta."""
    if theta < 1e-2:
        t2 = theta * theta
        # ln cos t = -(t^2/2 + t^4/12 + t^6/45 + 17 t^8/2520 + ...)
        return -t2 * (0.5 + t2 * (1.0 / 12.0 + t2 * (1.0 / 45.0 + t2 * 17.0 / 2520.0)))
    return math.log(math.cos(theta))


def eps_prime(t_queries: int, m: int, n: int, k: int, ell: int) -> float:
    """Distance between m rounds of T-query access and plain sample access.

    The simulator splits each query phase into k slices and averages ell
    trial samples, leaving a residual per-round distance of
    T * (4/2^(n/2) + sqrt(2(1 - cos(pi/2k)^k)) + 2/sqrt(ell+1)); m rounds
    add linearly.
    """
    if t_queries < 1 or m < 1 or k < 1 or ell < 1:
        raise ValueError("query, round and slice counts must be >= 1")
    theta = math.pi / (2.0 * k)
    gap = -math.expm1(k * _log_cos(theta))
    per_round = (
        4.0 / 2.0 ** (n / 2.0)
        + math.sqrt(2.0 * max(gap, 0.0))
        + 2.0 / math.sqrt(ell + 1.0)
    )
    return m * t_queries * per_round


def eps_double_prime(n: int, k: int, ell: int) -> float:
    """Single-query single-round distance with collision bookkeeping.

    Extends eps_prime(1, 1, ...) by the birthday terms of drawing k + ell
    samples from the N = 2^n outcome space: 2(k+ell)(k+ell-1)/N plus the
    repeat-draw correction 2k/(N(1 - k/N)).
    """
    nn = 2.0 ** n
    kl = k + ell
    return (
        eps_prime(1, 1, n, k, ell)
        + 2.0 * kl * (kl - 1.0) / nn
        + 2.0 * k / (nn * (1.0 - k / nn))
    )


def single_round_entropy(
    delta: float,
    n: int,
    k: int = 1,
    ell: int = 1,
    *,
    t_queries: int = 1,
    m: int = 1,
    phi_adv: float = 1.0,
    f_classical: float = 0.0,
    improved: bool | None = None,
) -> float:
    """Entropy of one m-sample round given score advantage delta.

    delta is the raw truncated score minus one. f_classical deducts the
    advantage a classical helper can contribute. A fidelity-phi_adv device
    must overshoot by 1/phi_adv to present the same advantage, and only the
    ideal fraction of its output carries entropy, so the bound is
    phi_adv * H_ideal((delta - f_classical) / phi_adv).

    The improved branch (default when t_queries == m == 1) trades the
    log2(k + ell) penalty for the collision terms of eps_double_prime.
    """
    if improved is None:
        improved = t_queries == 1 and m == 1
    if not 0.0 < phi_adv <= 1.0:
        raise ValueError("fidelity must lie in (0, 1]")
    nn = 2.0 ** n
    ln_n2 = n * LN2  # ln N
    eff = (delta - f_classical) / phi_adv
    if improved:
        if t_queries != 1 or m != 1:
            raise ValueError("improved bound needs t_queries == m == 1")
        bracket = (
            eff
            - 2.0 * eps_double_prime(n, k, ell) * (n * LN2 + 3.5)
            - 1.001 * 16.0 * ln_n2 * ln_n2 / nn
        )
        return phi_adv * (bracket * n - math.log2(n) - 5.0)
    bracket = (
        eff
        - 2.0 * eps_prime(t_queries, m, n, k, ell) * (n * LN2 + 3.5)
        - 1.001 * 16.0 * (k + ell) ** 2 * ln_n2 * ln_n2 / nn
    )
    per_round = bracket * n - math.log2(n) - math.log2(k + ell) - 3.0
    return phi_adv * (m * per_round - 2.0)


def honest_score(phi: float, n: int, p_max: float | None = None) -> float:
    """Expected raw truncated score of an honest fidelity-phi device."""
    if p_max is None:
        p_max = default_p_max(n)
    return mixture_truncated_mean(phi, 0.0, 2.0 ** n * p_max)


def _gamma2_cdf_root(d: float) -> float:
    """Solve 1 - (1 + y) e^{-y} = d, the Gamma(2,1) CDF inverse."""
    if not 0.0 <= d < 1.0:
        raise ValueError("mass must lie in [0, 1)")
    if d == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while 1.0 - (1.0 + hi) * math.exp(-hi) < d:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if 1.0 - (1.0 + mid) * math.exp(-mid) < d:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RateFunction:
    """Per-round certified entropy rate, affine in the raw truncated score.

    The dominated score distribution parks mass d at zero, mass
    e^{-x_max} - d at x_max and is Exp(1) in between; slope and offset give
    h(s) = offset + slope * s for scores on [0, score_cap].
    """

    n: int
    k: int
    ell: int
    p_max: float
    phi_adv: float
    phi_classical: float
    eps_dd: float
    d_quantum: float
    d: float
    p_min: float
    x_min: float
    x_max: float
    big_c: float
    t_at_zero: float
    slope: float
    offset: float

    def __call__(self, score: float) -> float:
        return self.offset + self.slope * score

    @property
    def kappa(self) -> float:
        """Collision weight (k + ell)^2 / 2^n of the query reduction."""
        return (self.k + self.ell) ** 2 / 2.0 ** self.n

    def t_of_s(self, score: float) -> float:
        """Certified ideal-sample fraction at a given raw truncated score."""
        return self.t_at_zero + score * self.slope / (self.n * (1.0 - self.kappa))

    @property
    def score_cap(self) -> float:
        """Largest attainable raw score (every sample saturating p_max)."""
        return 2.0 ** self.n * self.p_max

    @property
    def h_top(self) -> float:
        return self(self.score_cap)

    @property
    def h_zero(self) -> float:
        return self.offset

    @property
    def edge_mass(self) -> float:
        """Weight the dominated density parks at x_max."""
        return math.exp(-self.x_max) - self.d


def rate_function(
    n: int,
    k: int,
    ell: int,
    *,
    p_max: float | None = None,
    phi_adv: float = 1.0,
    phi_classical: float = 0.0,
    d_classical: float = 0.0,
) -> RateFunction:
    """Build the affine single-round rate for the oracle adversary model.

    k and ell are the accuracy knobs of the sample-to-query reduction;
    eat_min_entropy optimizes over both when they are left unset there.
    d_classical is the point-mass budget of a classical helper (zero unless
    the adversary is granted lookup-table rounds).
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    nn = 2.0 ** n
    root_n = 2.0 ** (n / 2.0)
    if not 1 <= k <= root_n or not 1 <= ell <= root_n:
        raise ValueError("k and ell must lie in [1, 2^(n/2)]")
    if not 0.0 < phi_adv <= 1.0:
        raise ValueError("fidelity must lie in (0, 1]")
    if phi_classical < 0.0 or not 0.0 <= d_classical < 1.0:
        raise ValueError("invalid classical budget")
    if p_max is None:
        p_max = default_p_max(n)
    if p_max * nn <= 1.0:
        raise ValueError("truncation must sit above the uniform weight 1/2^n")
    kappa = (k + ell) ** 2 / nn
    if kappa >= 1.0:
        raise ValueError("(k + ell)^2 must stay below 2^n")
    shrink = 1.0 - nn ** (-1.0 / 3.0)
    eps_dd = eps_double_prime(n, k, ell)
    d_quantum = nn ** (-1.0 / 3.0) + kappa + eps_dd
    d = max(d_quantum, d_classical)
    if d >= 1.0:
        raise ValueError("sampling distance consumes all probability mass")
    y = _gamma2_cdf_root(d)  # y = N * p_min
    p_min = y / nn
    x_min = y * shrink
    x_max = nn * shrink * p_max
    if x_max <= x_min:
        raise ValueError("truncation cap sits below the dominated floor")
    cgap = x_max - x_min
    eg = math.exp(-cgap)
    denom = 1.0 - eg * (1.0 + cgap)
    ln_n2 = n * LN2
    big_c = (
        (math.log2(n) + 3.0) / n
        + 4.0 * eps_dd * (n * LN2 + 3.5)
        + 1.001 * 16.0 * ln_n2 * ln_n2 / nn
        + 0.001
    )
    slope = n * (1.0 - kappa) * shrink / denom
    t_at_zero = (-1.0 - d * x_max - x_min + eg) / denom
    offset = n * ((t_at_zero - phi_classical) * (1.0 - kappa) - phi_adv * big_c) - 2.0
    return RateFunction(
        n=n,
        k=k,
        ell=ell,
        p_max=p_max,
        phi_adv=phi_adv,
        phi_classical=phi_classical,
        eps_dd=eps_dd,
        d_quantum=d_quantum,
        d=d,
        p_min=p_min,
        x_min=x_min,
        x_max=x_max,
        big_c=big_c,
        t_at_zero=t_at_zero,
        slope=slope,
        offset=offset,
    )


def h_of_s(
    score: float,
    n: int,
    k: int,
    ell: int,
    *,
    p_max: float | None = None,
    phi_adv: float = 1.0,
    phi_classical: float = 0.0,
    d_classical: float = 0.0,
) -> float:
    """Single-round certified rate at a given raw truncated score."""
    rate = rate_function(
        n,
        k,
        ell,
        p_max=p_max,
        phi_adv=phi_adv,
        phi_classical=phi_classical,
        d_classical=d_classical,
    )
    return rate(score)


def var_f(rate: RateFunction, gamma: float) -> float:
    """Variance proxy of the min-tradeoff function at test probability gamma.

    Evaluates (1/gamma) * int q'(x) (h_top - h(x))^2 dx - (h_top - E_q' h)^2
    against the low-pushed dominated density q'. The closed forms use the
    exponential moments int_0^c x^j e^{-x} dx.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("test probability must lie in (0, 1]")
    tail = rate.edge_mass
    if tail < 0.0:
        raise ValueError("dominated density needs e^{-x_max} >= d")
    c = rate.x_max
    a = rate.score_cap
    slope = rate.slope
    ec = math.exp(-c)
    i0 = -math.expm1(-c)
    i1 = 1.0 - ec * (1.0 + c)
    i2 = 2.0 - ec * (c * c + 2.0 * c + 2.0)
    h_top = rate.h_top
    h_zero = rate.h_zero
    h_edge = rate(c)
    second = (
        rate.d * (h_top - h_zero) ** 2
        + slope * slope * (a * a * i0 - 2.0 * a * i1 + i2)
        + tail * (h_top - h_edge) ** 2
    )
    mean_h = rate.d * h_zero + slope * i1 + h_zero * i0 + tail * h_edge
    return second / gamma - (h_top - mean_h) ** 2


def _ln_pow2_plus_e2(w: float) -> float:
    """ln(2^w + e^2) without overflow."""
    t = w * LN2
    if t > 2.0:
        return t + math.log1p(math.exp(2.0 - t))
    return math.log(math.exp(t) + math.exp(2.0))


def _k_alpha(u: float, w: float) -> float:
    """Moment-growth constant of the accumulation step at alpha = 1 + u."""
    if u * w > 1000.0:
        return math.inf
    lnterm = _ln_pow2_plus_e2(w)
    return 2.0 ** (u * w) * lnterm ** 3 / (6.0 * (1.0 - u) ** 3 * LN2)


def _alpha_entropy(
    u: float, rounds: int, h_rate: float, v_factor: float, logterm: float, w: float
) -> float:
    """Accumulated entropy at Renyi gap u = alpha - 1."""
    return (
        rounds * h_rate
        - rounds * u * LN2 * v_factor * v_factor / 2.0
        - logterm / u
        - rounds * u * u * _k_alpha(u, w)
    )


def _best_alpha(
    rounds: int, h_rate: float, v_factor: float, logterm: float, w: float
) -> tuple[float, float]:
    """Maximize the accumulated entropy over the Renyi gap; returns (u, H)."""
    u_fixed = math.sqrt(2.0 * logterm) / (v_factor * math.sqrt(rounds * LN2))
    cands = [u_fixed] if 0.0 < u_fixed <= _ALPHA_GAP_CAP else []
    steps = 64
    cands += [
        _ALPHA_GAP_CAP * (1e-9) ** (i / (steps - 1.0)) for i in range(steps)
    ]
    cands = sorted(set(cands))
    vals = [_alpha_entropy(u, rounds, h_rate, v_factor, logterm, w) for u in cands]
    best = max(range(len(cands)), key=vals.__getitem__)
    lo = cands[best - 1] if best > 0 else cands[best] * 0.5
    hi = cands[best + 1] if best + 1 < len(cands) else cands[best]
    for _ in range(90):
        u1 = lo + (hi - lo) / 3.0
        u2 = hi - (hi - lo) / 3.0
        if _alpha_entropy(u1, rounds, h_rate, v_factor, logterm, w) < _alpha_entropy(
            u2, rounds, h_rate, v_factor, logterm, w
        ):
            lo = u1
        else:
            hi = u2
    u_star = 0.5 * (lo + hi)
    val = _alpha_entropy(u_star, rounds, h_rate, v_factor, logterm, w)
    if vals[best] > val:
        u_star, val = cands[best], vals[best]
    return u_star, val


@dataclass(frozen=True)
class OracleParams:
    """Inputs of the accumulated oracle-model certificate."""

    n: int
    rounds: int
    s_star: float
    gamma: float = 1.0
    eps_smooth: float = 1e-6
    eps_accept: float = 1e-6
    phi_adv: float = 1.0
    phi_classical: float = 0.0
    p_max: float | None = None
    d_classical: float = 0.0
    k: int | None = None
    ell: int | None = None


@dataclass(frozen=True)
class EntropyReport:
    """Certified smooth min-entropy and the constants behind it."""

    entropy: float
    entropy_fixed: float
    h_rate: float
    beta: float
    beta_raw: float
    alpha: float
    var_bound: float
    v_factor: float
    c_root: float
    c_const: float
    k_factor: float
    w_width: float
    logterm: float
    k: int
    ell: int
    rate: RateFunction
    checks: dict[str, bool]
    model: str = "oracle-eat"

    @property
    def formal(self) -> bool:
        return all(self.checks.values())


def _evaluate_oracle(
    params: OracleParams, k: int, ell: int, logterm: float
) -> EntropyReport:
    rate = rate_function(
        params.n,
        k,
        ell,
        p_max=params.p_max,
        phi_adv=params.phi_adv,
        phi_classical=params.phi_classical,
        d_classical=params.d_classical,
    )
    var = var_f(rate, params.gamma)
    h_rate = rate(params.s_star)
    w = 2.0 * params.n + rate.h_top - rate.h_zero
    v_factor = math.sqrt(var + 2.0) + math.log2(2.0 * 2.0 ** params.n + 1.0)
    rounds = params.rounds
    c_root = v_factor * math.sqrt(2.0 * LN2 * logterm)
    grow = w * math.sqrt(2.0 * logterm) / (v_factor * math.sqrt(rounds * LN2))
    k_factor = 4.0 * (w + 1.0) ** 3 * (2.0 ** grow if grow < 1000.0 else math.inf)
    c_const = 2.0 * logterm * k_factor / (v_factor * v_factor * LN2)
    entropy_fixed = rounds * h_rate - math.sqrt(rounds) * c_root - c_const
    u_star, entropy = _best_alpha(rounds, h_rate, v_factor, logterm, w)
    beta_raw = entropy / (rounds * params.n)
    checks = {
        "qubit_count": FORMAL_MIN_QUBITS <= params.n <= 10 ** 6,
        "window_width": w >= 3.0,
        "round_count": rounds >= 8.0 * LN2 * logterm / (v_factor * v_factor),
        "edge_mass": rate.edge_mass >= 0.0,
    }
    return EntropyReport(
        entropy=entropy,
        entropy_fixed=entropy_fixed,
        h_rate=h_rate,
        beta=min(max(beta_raw, 0.0), 1.0),
        beta_raw=beta_raw,
        alpha=1.0 + u_star,
        var_bound=var,
        v_factor=v_factor,
        c_root=c_root,
        c_const=c_const,
        k_factor=k_factor,
        w_width=w,
        logterm=logterm,
        k=k,
        ell=ell,
        rate=rate,
        checks=checks,
    )


def eat_min_entropy(params: OracleParams) -> EntropyReport:
    """Accumulated min-entropy bound for the single-query oracle adversary.

    Reports both the alpha-optimized bound (entropy) and the closed-form
    fixed-alpha variant (entropy_fixed); the former is never worse. When k
    and ell are unset, both are optimized over powers of two.
    """
    if params.rounds < 1:
        raise ValueError("need at least one round")
    if not 0.0 < params.eps_smooth < 1.0 or not 0.0 < params.eps_accept <= 1.0:
        raise ValueError("error budgets must lie in (0, 1)")
    logterm = (
        1.0 - 2.0 * math.log2(params.eps_smooth) - 2.0 * math.log2(params.eps_accept)
    )
    if (params.k is None) != (params.ell is None):
        raise ValueError("set both k and ell or neither")
    if params.k is not None:
        return _evaluate_oracle(params, params.k, params.ell, logterm)
    nn = 2.0 ** params.n
    best: EntropyReport | None = None
    for ka in range(0, params.n // 2 + 1):
        for la in range(0, params.n // 2 + 1):
            k, ell = 1 << ka, 1 << la
            if (k + ell) ** 2 >= nn:
                continue
            try:
                report = _evaluate_oracle(params, k, ell, logterm)
            except ValueError:
                continue
            if best is None or report.entropy > best.entropy:
                best = report
    if best is None:
        raise ValueError("no admissible (k, ell); system too small for this bound")
    return best


@dataclass(frozen=True)
class AdHocParams:
    """Inputs of the non-adaptive multi-round spoofing bound.

    eps_count1 and eps_count2 budget the two Chernoff count bounds; the
    split between them is free, so both are exposed and default equal.
    """

    n: int
    rounds: int
    l_val: int
    s_star: float
    k: int = 1
    ell: int = 1
    m: int = 1
    t_queries: int = 1
    phi_adv: float = 1.0
    phi_classical: float = 0.0
    eps_smooth: float = 1e-6
    eps_count1: float = 1e-6
    eps_count2: float = 1e-6
    p_max: float | None = None
    d_classical: float = 0.0


@dataclass(frozen=True)
class AdHocReport:
    """Certified entropy under the non-adaptive spoofing model."""

    entropy: float
    beta: float
    pass_bound: float
    phi_round: float
    d: float
    p_min: float
    formal: bool
    model: str = "adhoc"


def dominated_pass_prob(
    s_star: float,
    phi_round: float,
    d: float,
    n: int,
    rounds: int,
    l_val: int,
    eps1: float,
    eps2: float,
    p_max: float | None = None,
    p_min: float | None = None,
) -> float:
    """Pass-probability bound for a dominated per-round score distribution.

    Each round independently scores p_max with probability d and otherwise
    p_min plus a Gamma(1,1)/Gamma(2,1) excess, shape 2 with probability at
    most phi_round. eps1 and eps2 are the Chernoff budgets of the two count
    bounds; the validation-draw tail supplies the rest. Counts are rounded
    up, which keeps both Chernoff bounds valid.
    """
    if not 0 < l_val <= rounds:
        raise ValueError("inconsistent round counts")
    if not 0.0 <= d < 1.0:
        raise ValueError("point mass must lie in [0, 1)")
    if not 0.0 < eps1 < 1.0 or not 0.0 < eps2 < 1.0:
        raise ValueError("count budgets must lie in (0, 1)")
    nn = 2.0 ** n
    shrink = 1.0 - nn ** (-1.0 / 3.0)
    if p_max is None:
        p_max = default_p_max(n)
    if p_min is None:
        p_min = _gamma2_cdf_root(d) / (nn * shrink)
    if d > 0.0:
        n_mm_real = (1.0 + math.sqrt(3.0 / (l_val * d) * math.log(1.0 / eps1))) * (
            l_val * d
        )
        n_mm = min(l_val, math.ceil(n_mm_real))
    else:
        n_mm = 0
    draws = l_val - n_mm
    if draws <= 0:
        return 1.0
    phi_total = rounds * phi_round
    if phi_total > 0.0:
        n2_real = (1.0 + math.sqrt(3.0 / phi_total * math.log(1.0 / eps2))) * phi_total
        n2_max = min(rounds - n_mm, math.ceil(n2_real))
    else:
        n2_max = 0
    chi = (
        draws
        * (s_star - nn / l_val * (n_mm * p_max + draws * p_min))
        * shrink
    )
    if chi <= 0.0:
        eps3 = 1.0
    else:
        below = gamma_mixture_tail(n2_max, rounds - n_mm, draws, chi, upper=False)
        eps3 = 1.0 - below
    return min(1.0, eps1 + eps2 + eps3)


def _adhoc_geometry(params: AdHocParams) -> tuple[float, float, float, float]:
    """Returns (d, p_min, big_c, kappa) for the non-adaptive bound."""
    n, k, ell, m = params.n, params.k, params.ell, params.m
    nn = 2.0 ** n
    root_n = 2.0 ** (n / 2.0)
    if not 1 <= k <= root_n or not 1 <= ell <= root_n:
        raise ValueError("k and ell must lie in [1, 2^(n/2)]")
    kappa = (k + ell) ** 2 / nn
    if kappa >= 1.0:
        raise ValueError("(k + ell)^2 must stay below 2^n")
    ln_n2 = n * LN2
    if params.t_queries == 1 and m == 1:
        eps = eps_double_prime(n, k, ell)
        big_c = (
            (math.log2(n) + 3.0) / n
            + 4.0 * eps * (n * LN2 + 3.5)
            + 1.001 * 16.0 * ln_n2 * ln_n2 / nn
            + 0.001
        )
    else:
        eps = eps_prime(params.t_queries, 1, n, k, ell)
        big_c = (
            (math.log2(n) + math.log2(k + ell) + 3.0) / n
            + 4.0 * m * eps * (n * LN2 + 3.5)
            + 1.001 * 16.0 * (k + ell) ** 2 * ln_n2 * ln_n2 / nn
            + 0.001
        )
    d_quantum = nn ** (-1.0 / 3.0) + kappa + eps
    d = m * max(d_quantum, params.d_classical)
    if d >= 1.0:
        raise ValueError("sampling distance consumes all probability mass")
    shrink = 1.0 - nn ** (-1.0 / 3.0)
    x_min = _gamma2_cdf_root(d)
    p_min = x_min / (nn * shrink)
    return d, p_min, big_c, kappa


def _adhoc_phi_round(
    params: AdHocParams, entropy: float, big_c: float, kappa: float
) -> float:
    """Shape-2 weight per round affordable at the claimed entropy."""
    mn = params.m * params.n
    lg_da = mn + 1.0 if mn > 500 else math.log2(1.0 + 2.0 * 2.0 ** mn)
    c_acc = 3.0 * lg_da * math.sqrt(1.0 - 2.0 * math.log2(params.eps_smooth))
    return params.phi_classical / params.m + 1.0 / (1.0 - kappa) * (
        2.0 / mn
        + params.phi_adv * big_c
        + (entropy + c_acc * math.sqrt(params.rounds)) / (params.rounds * mn)
    )


def adhoc_pass_prob(params: AdHocParams, entropy: float) -> float:
    """Bound on Pr[accept] if the output entropy is at most the given value.

    The per-round shape-2 weight the adversary can afford grows with the
    claimed entropy (an accumulation-style conversion with a sqrt(rounds)
    penalty); the dominated tail then prices the validation draw.
    """
    d, p_min, big_c, kappa = _adhoc_geometry(params)
    phi_round = _adhoc_phi_round(params, entropy, big_c, kappa)
    return dominated_pass_prob(
        params.s_star,
        min(phi_round, 1.0),
        d,
        params.n,
        params.rounds,
        params.l_val,
        params.eps_count1,
        params.eps_count2,
        p_max=params.p_max,
        p_min=p_min,
    )


def adhoc_min_entropy(params: AdHocParams) -> AdHocReport:
    """Largest entropy claim the abort condition still refutes.

    The pass bound eps1 + eps2 + eps3(h) grows with the claimed entropy h;
    below the returned value the dichotomy is informative (either the output
    carries more smooth min-entropy than h, or the server passes validation
    with probability at most the bound, which is < 1), and at the returned
    value the bound reaches 1. Bisection to 64 halvings of [0, rounds*m*n].
    """
    d, p_min, big_c, kappa = _adhoc_geometry(params)
    cap = float(params.rounds * params.m * params.n)
    formal = (
        FORMAL_MIN_QUBITS <= params.n <= 10 ** 6
        and params.m <= 10 ** 6
        and params.k <= 2.0 ** (params.n / 2.0)
    )

    def bound(h: float) -> float:
        phi_round = _adhoc_phi_round(params, h, big_c, kappa)
        return dominated_pass_prob(
            params.s_star,
            min(phi_round, 1.0),
            d,
            params.n,
            params.rounds,
            params.l_val,
            params.eps_count1,
            params.eps_count2,
            p_max=params.p_max,
            p_min=p_min,
        )

    if bound(0.0) >= 1.0:
        raise ValueError("abort condition refutes no entropy claim at all")
    if bound(cap) < 1.0:
        # even the full register is refuted; the claim saturates trivially
        hi = cap
    else:
        lo, hi = 0.0, cap
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            if bound(mid) < 1.0:
                lo = mid
            else:
                hi = mid
    return AdHocReport(
        entropy=hi,
        beta=min(max(hi / cap, 0.0), 1.0),
        pass_bound=bound(hi),
        phi_round=_adhoc_phi_round(params, hi, big_c, kappa),
        d=d,
        p_min=p_min,
        formal=formal,
    )


@dataclass(frozen=True)
class RestrictedReport:
    """Certificate against the bounded-sample restricted adversary."""

    q_min: int | None
    entropy: float
    beta: float
    beta_raw: float
    pass_prob: float
    spoof_impossible: bool
    model: str = "restricted"


def restricted_min_entropy(
    chi: float,
    rounds: int,
    l_val: int,
    n: int,
    *,
    f_adv: float = 0.0,
    phi: float = 1.0,
    eps_accept: float = 1e-6,
    eps_smooth: float = 1e-6,
) -> RestrictedReport:
    """Entropy certificate from the least spoof-capable sample stock.

    Finds the smallest quantum sample count q whose pass probability reaches
    eps_accept; each such sample is worth at most n - 1 bits, so acceptance
    certifies q_min (n - 1) + log2(eps_smooth) bits except with probability
    eps_accept. f_adv is the fraction of rounds the adversary can simulate
    classically during the validation window.
    """
    if not 0.0 < eps_accept < 1.0 or not 0.0 < eps_smooth < 1.0:
        raise ValueError("error budgets must lie in (0, 1)")

    def passes(q: int) -> float:
        return spoof_pass_prob(q, chi, rounds, l_val, f_adv=f_adv, phi=phi)

    if phi > 0.0:
        q_cap = math.ceil(rounds * max(1.0 - f_adv, 0.0) / phi) + 1
    else:
        q_cap = 0
    if passes(q_cap) < eps_accept:
        # not even a full stock of ideal samples passes; the test itself
        # rejects everything, so the certificate is the trivial ceiling
        raw = rounds * (n - 1) + math.log2(eps_smooth)
        entropy = max(raw, 0.0)
        return RestrictedReport(
            q_min=None,
            entropy=entropy,
            beta=min(entropy / (rounds * n), 1.0),
            beta_raw=raw / (rounds * n),
            pass_prob=passes(q_cap),
            spoof_impossible=True,
        )
    lo, hi = 0, q_cap
    if passes(0) >= eps_accept:
        hi = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if passes(mid) >= eps_accept:
            hi = mid
        else:
            lo = mid + 1
    q_min = hi
    raw = q_min * (n - 1) + math.log2(eps_smooth)
    entropy = max(raw, 0.0)
    return RestrictedReport(
        q_min=q_min,
        entropy=entropy,
        beta=min(entropy / (rounds * n), 1.0),
        beta_raw=raw / (rounds * n),
        pass_prob=passes(q_min),
        spoof_impossible=False,
    )

"""Cross-entropy scores and their null/adversarial distributions.

For an n-qubit ideal output distribution P and validation samples x_1..x_L,
the linear cross-entropy score is XEB = (2^n / L) sum_i P(x_i) - 1. The
truncated variant caps each probability at p_max (default 2/2^n) before
averaging, which bounds the influence any single sample can buy.

Scaled probabilities x = 2^n * P(z) of a Haar-random deep circuit follow
Exp(1) for a fixed bitstring and Gamma(2,1) for a Born-sampled one; a
fidelity-phi sampler draws from the mixture with CDF 1 - (1 + phi x) e^{-x}.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._special import (
    gammainc_q,
    hypergeom_logpmf,
    hypergeom_pmf_ratio,
    log_gamma_tail_term,
)


def default_p_max(n: int) -> float:
    """Truncation threshold 2/2^n used throughout."""
    return 2.0 / (1 << n)


def xeb_score(probs, n: int) -> float:
    """Linear cross-entropy score (2^n / L) sum p - 1."""
    probs = np.asarray(probs, dtype=float)
    if probs.size == 0:
        raise ValueError("no samples")
    return float((1 << n) * probs.mean() - 1.0)


def truncated_score(probs, n: int, p_max: float | None = None) -> float:
    """XEB with each probability capped at p_max before averaging."""
    if p_max is None:
        p_max = default_p_max(n)
    probs = np.asarray(probs, dtype=float)
    if probs.size == 0:
        raise ValueError("no samples")
    return float((1 << n) * np.minimum(probs, p_max).mean() - 1.0)


@dataclass(frozen=True)
class ScoreReport:
    """One scored validation batch, serializable for transcripts and logs."""

    n: int
    l_val: int
    p_max: float
    score: float
    stderr: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "ScoreReport":
        return cls(**json.loads(text))


def score_report(probs, n: int, p_max: float | None = None) -> ScoreReport:
    """Truncated score plus its empirical standard error."""
    if p_max is None:
        p_max = default_p_max(n)
    probs = np.asarray(probs, dtype=float)
    if probs.size == 0:
        raise ValueError("no samples")
    capped = (1 << n) * np.minimum(probs, p_max)
    stderr = float(capped.std(ddof=1) / math.sqrt(capped.size)) if capped.size > 1 else 0.0
    return ScoreReport(
        n=n,
        l_val=int(probs.size),
        p_max=p_max,
        score=float(capped.mean() - 1.0),
        stderr=stderr,
    )


def xeb_variance(phi: float, l_val: int) -> float:
    """Variance of the untruncated score estimator at fidelity phi."""
    if l_val <= 0:
        raise ValueError("need a positive sample count")
    return (1.0 + 2.0 * phi - phi * phi) / l_val


def pt_cdf(x, phi: float):
    """CDF of the scaled-probability mixture at fidelity phi.

    With probability 1-phi the sample is Exp(1), otherwise Gamma(2,1);
    closed form 1 - (1 + phi x) e^{-x}.
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    out = 1.0 - (1.0 + phi * x) * np.exp(-x)
    return np.where(x < 0.0, 0.0, out)


def pt_truncated_mean(shape: int, x_min: float, x_max: float) -> float:
    """Mean of min(x_min + G, x_max) for G ~ Gamma(shape, 1), shape 1 or 2.

    These are the per-sample expectations of the capped scaled probability
    under the offset exponential (shape 1) and size-biased (shape 2) branches.
    """
    if x_max < x_min:
        raise ValueError("x_max below x_min")
    c = x_max - x_min
    if shape == 1:
        return 1.0 + x_min - math.exp(-c)
    if shape == 2:
        return 2.0 + x_min - math.exp(-c) * (2.0 + c)
    raise ValueError("shape must be 1 or 2")


def mixture_truncated_mean(phi: float, x_min: float, x_max: float) -> float:
    """Mean of the capped mixture: phi weights the shape-2 branch."""
    return (1.0 - phi) * pt_truncated_mean(1, x_min, x_max) + phi * pt_truncated_mean(
        2, x_min, x_max
    )


def gamma_mixture_tail(
    n2: int, l: int, l_val: int, threshold: float, lo: int | None = None,
    hi: int | None = None, upper: bool = True,
) -> float:
    """Pr[sum of scaled probabilities over the validation draw >= threshold].

    A pool of l samples contains n2 shape-2 (Gamma(2,1)) entries and l - n2
    shape-1 (Exp(1)) entries; l_val are drawn without replacement. Conditioned
    on i shape-2 entries among the draws the total is Gamma(l_val + i, 1), so
    the tail is sum_i HypPMF(i) * Q(l_val + i, threshold). With upper=False
    the lower tail sum_i HypPMF(i) * P(l_val + i, threshold) is returned
    instead (Pr[total <= threshold]).
    """
    if not 0 <= n2 <= l or not 0 < l_val <= l:
        raise ValueError("inconsistent pool sizes")
    if threshold < 0.0:
        raise ValueError("threshold must be nonnegative")
    if threshold == 0.0:
        return 1.0 if upper else 0.0
    i_min = max(0, n2 + l_val - l)
    i_max = min(n2, l_val)
    if lo is None or hi is None:
        # restrict to a window around the hypergeometric mode; the omitted
        # mass is below 1e-200 at 40 sigma
        frac = l_val / l
        mean = n2 * frac
        sigma = math.sqrt(max(n2 * frac * (1.0 - frac) * (l - n2) / max(l - 1, 1), 0.0))
        pad = 40.0 * sigma + 10.0
        lo = max(i_min, int(mean - pad)) if lo is None else lo
        hi = min(i_max, int(mean + pad) + 1) if hi is None else hi
    lo = max(lo, i_min)
    hi = min(hi, i_max)
    if lo > hi:
        return 0.0
    logpmf = hypergeom_logpmf(lo, l, n2, l_val)
    tail = gammainc_q(l_val + lo, threshold)
    if not upper:
        tail = 1.0 - tail
    total = math.exp(logpmf) * tail if logpmf > -math.inf else 0.0
    for i in range(lo, hi):
        logpmf += math.log(hypergeom_pmf_ratio(i, l, n2, l_val))
        # Q(a + 1, x) = Q(a, x) + x^a e^{-x} / a!, so the upper tail gains
        # the term while the lower tail sheds it
        step = math.exp(log_gamma_tail_term(l_val + i, threshold))
        tail = tail + step if upper else tail - step
        tail = min(max(tail, 0.0), 1.0)  # guard accumulated rounding
        total += math.exp(logpmf) * tail
    return min(total, 1.0)


def spoof_pass_prob(
    q: int,
    chi: float,
    l: int,
    l_val: int,
    f_adv: float = 0.0,
    phi: float = 1.0,
) -> float:
    """Probability that a restricted adversary passes the score test.

    The adversary holds q quantum samples of fidelity phi plus f_adv * l
    classically validated samples; the rest of the pool is uninformed. The
    test draws l_val of the l submissions and accepts when their XEB reaches
    chi, i.e. when the scaled-probability total reaches l_val * (1 + chi).
    """
    if q < 0:
        raise ValueError("negative sample count")
    if not 0.0 <= phi <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    if f_adv < 0.0:
        raise ValueError("negative validation budget")
    n2 = round(q * phi + f_adv * l)
    n2 = min(max(n2, 0), l)
    threshold = l_val * (1.0 + chi)
    return gamma_mixture_tail(n2, l, l_val, threshold)

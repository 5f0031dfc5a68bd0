"""Special functions needed by the scoring and adversary bounds.

Implemented here rather than imported so the statistical tails used in the
certificates have no dependency on an external library's algorithm choices.
Accuracy targets: regularized incomplete gamma and hypergeometric PMF to
1e-10 relative, trigamma and harmonic numbers to 1e-12.
"""

from __future__ import annotations

import math

_EULER_GAMMA = 0.5772156649015328606065120900824024
_ITMAX = 10**7
_EPS = 1e-16
_FPMIN = 1e-300


def _gser(a: float, x: float) -> float:
    # Series for the lower function, reliable for x < a + 1.
    ap = a
    total = 1.0 / a
    delta = total
    for _ in range(_ITMAX):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _EPS:
            break
    else:
        raise RuntimeError("gamma series did not converge")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gcf(a: float, x: float) -> float:
    # Lentz continued fraction for the upper function, x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise RuntimeError("gamma continued fraction did not converge")
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) = Pr[Gamma(a, 1) <= x]."""
    if a <= 0.0:
        raise ValueError("shape must be positive")
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gser(a, x)
    return 1.0 - _gcf(a, x)


def gammainc_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Pr[Gamma(a, 1) > x]."""
    if a <= 0.0:
        raise ValueError("shape must be positive")
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gser(a, x)
    return _gcf(a, x)


def log_gamma_tail_term(a: float, x: float) -> float:
    """log of x^a e^{-x} / Gamma(a+1), the step Q(a+1,x) - Q(a,x).

    Integer-shape upper tails satisfy Q(a+1, x) = Q(a, x) + e^{this}; walking
    that recurrence is much cheaper than re-evaluating the continued fraction
    when tails are needed on a contiguous range of shapes.
    """
    return a * math.log(x) - x - math.lgamma(a + 1.0)


def hypergeom_logpmf(k: int, npop: int, ngood: int, ndraw: int) -> float:
    """log PMF of the hypergeometric distribution.

    Population npop with ngood marked items, ndraw draws without replacement,
    probability of exactly k marked among the draws. Returns -inf outside the
    support.
    """
    if not 0 <= ngood <= npop or not 0 <= ndraw <= npop:
        raise ValueError("need 0 <= ngood, ndraw <= npop")
    if k < max(0, ndraw - (npop - ngood)) or k > min(ngood, ndraw):
        return -math.inf
    return (
        _log_binom(ngood, k)
        + _log_binom(npop - ngood, ndraw - k)
        - _log_binom(npop, ndraw)
    )


def hypergeom_pmf(k: int, npop: int, ngood: int, ndraw: int) -> float:
    """PMF of the hypergeometric distribution (see hypergeom_logpmf)."""
    lp = hypergeom_logpmf(k, npop, ngood, ndraw)
    return math.exp(lp) if lp > -math.inf else 0.0


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


def hypergeom_pmf_ratio(k: int, npop: int, ngood: int, ndraw: int) -> float:
    """PMF(k+1)/PMF(k), used to walk the PMF across its support."""
    num = (ngood - k) * (ndraw - k)
    den = (k + 1) * (npop - ngood - ndraw + k + 1)
    return num / den


# Bernoulli numbers B_2..B_16 over (2k)! denominators appear in the asymptotic
# trigamma series psi'(x) ~ 1/x + 1/(2x^2) + sum B_2k / x^{2k+1}.
_TRIGAMMA_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


def trigamma(x: float) -> float:
    """psi'(x), the derivative of the digamma function, for x > 0."""
    if x <= 0.0:
        raise ValueError("trigamma defined here for x > 0 only")
    acc = 0.0
    # push the argument above 10 where the asymptotic series is 1e-16 accurate
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv + 0.5 * inv2
    term = inv * inv2
    for c in _TRIGAMMA_COEF:
        series += c * term
        term *= inv2
    return acc + series


def harmonic_number(n: int) -> float:
    """H_n = sum_{j=1}^n 1/j, accurate to 1e-12 for any n >= 0."""
    if n < 0:
        raise ValueError("harmonic number needs n >= 0")
    if n == 0:
        return 0.0
    if n <= 64:
        return math.fsum(1.0 / j for j in range(1, n + 1))
    # Euler-Maclaurin; remainder below 1/(240 n^8) ~ 1e-17 at n = 65
    inv = 1.0 / n
    inv2 = inv * inv
    return (
        math.log(n)
        + _EULER_GAMMA
        + 0.5 * inv
        - inv2 / 12.0
        + inv2 * inv2 / 120.0
        - inv2 * inv2 * inv2 / 252.0
    )

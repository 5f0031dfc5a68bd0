"""Adversarial sampling strategies against the cross-entropy test.

An adversary holding a partial description of the output state (a
subnormalized component psi_S with squared norm phi) can bias the score of
its submissions. Two concrete strategies are modeled at circuit level and as
closed-form mixtures of the scaled probability x = 2^n * P(z):

* frugal rejection: sample from |A_S|^2 by rejection from uniform; the
  submitted outcome has x = phi X + (1-phi) Y + 2 sqrt(phi(1-phi) X Y) R
  with X ~ Gamma(2,1) (the known part, size biased), Y ~ Exp(1) (the
  orthogonal part), and R the cosine of a uniform relative phase.

* top sampling: evaluate the known amplitude on 2^k uniform candidates and
  submit the largest; X becomes the maximum of 2^k Exp(1) draws.

The dominating outcome model used by the non-adaptive certificates places a
point mass d at the truncation cap and offsets the honest mixture by x_min,
where x_min solves 1 - (1 + phi_mix x) e^{-x} = d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._special import harmonic_number, trigamma
from .qsim import StateVector

FORMAL_MIN_QUBITS = 50  # dominance arguments are proved from this size up


def honest_sample(state: StateVector, rng, phi: float, count: int) -> np.ndarray:
    """Fidelity-phi sampler: Born sample with probability phi, else uniform."""
    if not 0.0 <= phi <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    p = state.probabilities()
    p = p / p.sum()
    born = rng.choice(len(p), size=count, p=p)
    uniform = rng.integers(0, len(p), size=count)
    use_born = rng.random(count) < phi
    return np.where(use_born, born, uniform)


def phase_cosine(rng, count: int) -> np.ndarray:
    """R = cos(theta) for uniform theta; density 1/(pi sqrt(1-t^2))."""
    return np.cos(math.pi * rng.random(count))


def honest_mc_p(rng, phi: float, count: int) -> np.ndarray:
    """Scaled probabilities of honest fidelity-phi samples (mixture draw)."""
    shape2 = rng.random(count) < phi
    out = rng.exponential(size=count)
    out[shape2] += rng.exponential(size=int(shape2.sum()))
    return out


def frugal_mc_p(rng, phi: float, count: int) -> np.ndarray:
    """Scaled probabilities of frugal-rejection submissions (mixture draw)."""
    if not 0.0 <= phi <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    x = rng.gamma(2.0, size=count)
    y = rng.exponential(size=count)
    r = phase_cosine(rng, count)
    return phi * x + (1.0 - phi) * y + 2.0 * math.sqrt(phi * (1.0 - phi)) * r * np.sqrt(x * y)


def top_mc_p(rng, phi: float, k: int, count: int) -> np.ndarray:
    """Scaled probabilities of top-of-2^k submissions (mixture draw)."""
    if not 0.0 <= phi <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    if k < 0:
        raise ValueError("k must be nonnegative")
    m = 1 << k
    u = rng.random(count)
    x = -np.log1p(-np.power(u, 1.0 / m))  # max of m iid Exp(1) by inverse CDF
    y = rng.exponential(size=count)
    r = phase_cosine(rng, count)
    return phi * x + (1.0 - phi) * y + 2.0 * math.sqrt(phi * (1.0 - phi)) * r * np.sqrt(x * y)


def top_moments(phi: float, k: int, n: int) -> tuple[float, float]:
    """Mean and variance of the submitted probability under top sampling.

    Returned on the probability scale (divide x moments by N = 2^n).
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    m = 1 << k
    npop = float(1 << n)
    h = harmonic_number(m)
    mean = (phi * h + (1.0 - phi)) / npop
    var = (
        (math.pi**2 / 6.0) * phi * phi
        - phi * phi * trigamma(m + 1.0)
        + (1.0 - phi) ** 2
        + 2.0 * phi * (1.0 - phi) * h
    ) / (npop * npop)
    return mean, var


def frugal_sample(
    full: StateVector, partial: StateVector, rng, count: int, batch: int = 4096
) -> tuple[np.ndarray, np.ndarray]:
    """Rejection-sample outcomes from the known component, score them fully.

    Uniform candidates are accepted with probability |A_S|^2 / max |A_S|^2.
    Returns (outcomes, scaled true probabilities 2^n |A|^2).
    """
    if full.n != partial.n:
        raise ValueError("state sizes differ")
    w = partial.probabilities()
    envelope = float(w.max())
    if envelope == 0.0:
        raise ValueError("known component is empty")
    npop = 1 << full.n
    chosen: list[int] = []
    while len(chosen) < count:
        cand = rng.integers(0, npop, size=batch)
        keep = rng.random(batch) * envelope < w[cand]
        chosen.extend(int(z) for z in cand[keep])
    outcomes = np.array(chosen[:count])
    x = npop * full.probabilities()[outcomes]
    return outcomes, x


def top_sample(
    full: StateVector, partial: StateVector, rng, k: int, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Submit the best of 2^k uniform candidates by known amplitude.

    Candidates are drawn distinct within a trial. Returns (outcomes, scaled
    true probabilities).
    """
    if full.n != partial.n:
        raise ValueError("state sizes differ")
    m = 1 << k
    npop = 1 << full.n
    if m > npop:
        raise ValueError("more candidates than outcomes")
    w = partial.probabilities()
    outcomes = np.empty(count, dtype=np.int64)
    for t in range(count):
        cand = _distinct_uniform(rng, npop, m)
        outcomes[t] = cand[int(np.argmax(w[cand]))]
    x = npop * full.probabilities()[outcomes]
    return outcomes, x


def _distinct_uniform(rng, npop: int, m: int) -> np.ndarray:
    if 4 * m >= npop:
        return rng.permutation(npop)[:m]
    seen: set[int] = set()
    while len(seen) < m:
        for z in rng.integers(0, npop, size=2 * (m - len(seen))):
            if len(seen) == m:
                break
            seen.add(int(z))
    return np.fromiter(seen, dtype=np.int64, count=m)


@dataclass(frozen=True)
class DominantModel:
    """Score-dominating outcome distribution for the non-adaptive bounds.

    Point mass d at the cap x_max; weight (1-d)(1-phi_mix) shifted
    exponential; weight (1-d) phi_mix shifted Gamma(2,1). On (x_min, x_max)
    the CDF is (1-d)(1 - e^{-(x - x_min)} (1 + phi_mix (x - x_min))).
    """

    phi_mix: float
    d: float
    x_min: float
    x_max: float
    formal: bool

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = x - self.x_min
        body = (1.0 - self.d) * (1.0 - np.exp(-t) * (1.0 + self.phi_mix * t))
        out = np.where(x < self.x_min, 0.0, body)
        return np.where(x >= self.x_max, 1.0, out)

    def sample(self, rng, count: int) -> np.ndarray:
        u = rng.random(count)
        at_cap = u < self.d
        shape2 = rng.random(count) < self.phi_mix
        draws = rng.exponential(size=count)
        draws[shape2] += rng.exponential(size=int(shape2.sum()))
        out = self.x_min + draws
        out[at_cap] = self.x_max
        return out


def dominant_xmin(phi_mix: float, d: float) -> float:
    """Solve 1 - (1 + phi_mix x) e^{-x} = d for the model offset x_min."""
    if not 0.0 <= phi_mix <= 1.0:
        raise ValueError("mixture weight must lie in [0, 1]")
    if not 0.0 <= d < 1.0:
        raise ValueError("deficit must lie in [0, 1)")
    if d == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while 1.0 - (1.0 + phi_mix * hi) * math.exp(-hi) < d:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("offset solve diverged")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 1.0 - (1.0 + phi_mix * mid) * math.exp(-mid) < d:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dominant_model(
    phi_mix: float, d: float, x_max: float, n: int | None = None
) -> DominantModel:
    """Build the dominating model; `formal` marks the proved regime."""
    x_min = dominant_xmin(phi_mix, d)
    if x_max <= x_min:
        raise ValueError("cap below the model offset")
    formal = n is not None and n >= FORMAL_MIN_QUBITS
    return DominantModel(phi_mix, d, x_min, x_max, formal)

"""Randomness extraction: seeded circulant and two-source GF(2) extractors.

Two constructions feed the amplification pipeline. The seeded extractor
convolves the source with a seed on a cyclic group of prime order d with 2 a
primitive root mod d; it turns one block of min-entropy k into
m = k - 2*log2(1/eps) almost-uniform bits per seed reuse. The two-source
extractor multiplies in GF(2^(n1/2)) under an irreducible trinomial and
truncates; its parameter feasibility is governed by an (l, p) optimization
whose error floor is eps_ts = 2^(3m/4) * sqrt(3*gamma/2).

Only the parameter arithmetic carries security weight. The bit-level
constructions are documented reconstructions consistent with the field
requirements (prime circulant order, irreducible polynomial of degree n1/2)
and are validated by exact linearity identities plus statistical batteries,
not by a proof.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .gf2 import BitBlock, cyclic_convolve, gf2ext_mul, has_primitive_root_2, is_prime

__all__ = [
    "CirculantSpec",
    "RazSpec",
    "SoundnessBudget",
    "RateAssembly",
    "WEAK_TAG",
    "QUANTUM_TAG",
    "EXTRACTED_TAG",
    "TRINOMIAL_CATALOG",
    "LARGE_TRINOMIAL_DEGREES",
    "DEFAULT_ASSEMBLIES",
    "trinomial_middle",
    "circulant_params",
    "circulant_extract",
    "raz_feasible",
    "required_alpha",
    "two_source_extract",
    "compose_two_source_error",
    "soundness_split",
    "seeded_output_len",
    "seed_branch_error",
]

# Provenance tags carried by bit blocks through the pipeline (3-byte limit).
WEAK_TAG = "wk"
QUANTUM_TAG = "qm"
EXTRACTED_TAG = "ext"

_LOG2_3_HALVES = math.log2(1.5)

# Middle exponents t with x^d + x^t + 1 irreducible over GF(2), each frozen
# from a run of the Rabin test in gf2 and re-verifiable with it. Degrees
# divisible by 8 never appear (such trinomials always factor), and 3001 has
# no irreducible trinomial at all, so the desk-scale field degree is 3217.
TRINOMIAL_CATALOG: dict[int, int] = {
    7: 1,
    9: 1,
    15: 1,
    17: 3,
    22: 1,
    28: 1,
    31: 3,
    33: 10,
    63: 1,
    65: 18,
    89: 38,
    97: 6,
    127: 1,
    521: 32,
    607: 105,
    1279: 216,
    2281: 715,
    3217: 67,
}

# Degrees far beyond the catalog whose irreducible trinomials are tabulated
# in the literature. Parameter checks only; nothing multiplies at this size.
LARGE_TRINOMIAL_DEGREES = (756_839, 43_112_609, 74_207_281)


def trinomial_middle(degree: int) -> int | None:
    """Catalog lookup: a middle exponent making x^degree + x^t + 1 irreducible."""
    return TRINOMIAL_CATALOG.get(degree)


# ---------------------------------------------------------------------------
# Seeded circulant extractor


@dataclass(frozen=True)
class CirculantSpec:
    """Parameters of one seeded extraction: n_in source bits to m output bits."""

    n_in: int
    d_seed: int
    m: int
    eps_seeded: float

    def __post_init__(self) -> None:
        if self.d_seed != self.n_in + 1:
            raise ValueError("seed length must be n_in + 1")
        if not is_prime(self.d_seed) or not has_primitive_root_2(self.d_seed):
            raise ValueError("seed length must be prime with primitive root 2")
        if not 0 < self.m <= self.n_in:
            raise ValueError("output length out of range")
        if not 0.0 < self.eps_seeded < 1.0:
            raise ValueError("eps_seeded must be in (0,1)")

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def circulant_params(n_in: int, k: float, eps_seeded: float) -> CirculantSpec:
    """Size a circulant extraction of a source with min-entropy k.

    The seed length d = n_in + 1 must be prime with 2 a primitive root; the
    output keeps m = floor(k - 2*log2(1/eps_seeded)) bits.
    """
    d_seed = n_in + 1
    if not is_prime(d_seed) or not has_primitive_root_2(d_seed):
        raise ValueError(f"{d_seed} is not prime with primitive root 2")
    if not 0.0 < eps_seeded < 1.0:
        raise ValueError("eps_seeded must be in (0,1)")
    if k > n_in:
        raise ValueError("entropy exceeds the source length")
    m = math.floor(k + 2.0 * math.log2(eps_seeded))
    if m <= 0:
        raise ValueError("entropy too small for the requested error")
    return CirculantSpec(n_in=n_in, d_seed=d_seed, m=m, eps_seeded=eps_seeded)


def seeded_output_len(alpha: float, input_len: int, eps_seeded: float) -> int:
    """Output length floor(input_len*alpha + 2*log2(eps_seeded)) of one block."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0,1]")
    if not 0.0 < eps_seeded <= 1.0:
        raise ValueError("eps_seeded must be in (0,1]")
    m = math.floor(input_len * alpha + 2.0 * math.log2(eps_seeded))
    if m <= 0:
        raise ValueError("entropy too small for the requested error")
    return m


def circulant_extract(source: BitBlock, seed: BitBlock, m: int) -> BitBlock:
    """First m bits of the cyclic convolution of seed with zero-padded source.

    Linear in the source for a fixed seed: both operands live on the cyclic
    group of order d_seed = len(seed), the source zero-extended by one bit.
    """
    d = len(seed)
    if len(source) != d - 1:
        raise ValueError("source must be one bit shorter than the seed")
    if not 0 < m <= d:
        raise ValueError("output length out of range")
    conv = cyclic_convolve(seed.value, source.value, d)
    return BitBlock(conv & ((1 << m) - 1), m, EXTRACTED_TAG)


# ---------------------------------------------------------------------------
# Two-source extractor: parameter feasibility

# Entropy margin: available entropy must exceed the internal requirement by
# 1 + margin*log2(1/gamma). The formula sheet uses margin 2; the published
# operating points are only reachable with margin 1 and odd p allowed, so the
# sweep helper exposes both conventions.
_CONVENTIONS = {"strict": (2.0, True), "published": (1.0, False)}

_P_HARD_CAP = 10_000_000


@dataclass(frozen=True)
class RazSpec:
    """Feasible two-source extraction parameters.

    k1 and k2 are the internal entropy requirements after margins; the caller's
    sources must carry k + 1 + margin*log2(1/gamma_raz) bits each. gamma_raz
    and eps_ts underflow float at large scale, so their base-2 logarithms are
    carried alongside and are the authoritative values.
    """

    n1: int
    k1: float
    n2: int
    k2: float
    m: int
    l: int
    p: int
    gamma_raz: float
    eps_ts: float
    log2_gamma: float
    log2_eps_ts: float
    convention: str = "strict"

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _log2_add(a: float, b: float) -> float:
    hi, lo = (a, b) if a >= b else (b, a)
    if hi == -math.inf:
        return hi
    diff = lo - hi
    if diff < -1060.0:
        return hi
    return hi + math.log2(1.0 + 2.0**diff)


def _log2_gamma_target(m: int, eps_target: float) -> float:
    # eps_ts = 2^(3m/4) * sqrt(3*gamma/2) <= eps_target, solved for gamma
    return 2.0 * math.log2(eps_target) - _LOG2_3_HALVES - 1.5 * m


def _seed_len(m: int, p: int) -> int:
    return max(1, math.ceil(math.log2(m * p)))


def _bound_log2(
    log2_gamma: float,
    avail1: float,
    avail2: float,
    n1: int,
    l: int,
    p: int,
    margin: float,
) -> float:
    """log2 of the extractor error floor at the given gamma's entropy margins."""
    cost = 1.0 - margin * log2_gamma  # 1 + margin*log2(1/gamma)
    k1 = avail1 - cost
    k2 = avail2 - cost
    lead = (n1 - k1) / p
    t1 = lead + (l - n1 / 2 + 1) / p
    t2 = lead + math.log2(p) - k2 / 2.0
    return _log2_add(t1, t2)


def _scan_p(
    avail1: float,
    avail2: float,
    n1: int,
    n2: int,
    m: int,
    log2_gamma: float,
    margin: float,
    even_only: bool,
) -> tuple[float, int, int] | None:
    """Best (bound, l, p) at fixed gamma, scanning p until t1 alone fails."""
    l_cap = n2 + math.log2(n1 / 2)
    cost = 1.0 - margin * log2_gamma
    delta = (avail1 - cost) - n1 / 2
    best: tuple[float, int, int] | None = None
    p = 2
    step = 2 if even_only else 1
    while p <= _P_HARD_CAP:
        l = _seed_len(m, p)
        if l > l_cap:
            break
        # the first error term's exponent -(delta-l-1)/p only grows with p,
        # so once it exceeds gamma (or the running best) no larger p can win
        t1 = -(delta - l - 1) / p
        if t1 > log2_gamma or (best is not None and t1 >= best[0]):
            break
        b = _bound_log2(log2_gamma, avail1, avail2, n1, l, p, margin)
        if best is None or b < best[0]:
            best = (b, l, p)
        p += step
    return best


def _self_consistent_gamma(
    avail1: float,
    avail2: float,
    n1: int,
    l: int,
    p: int,
    margin: float,
    hi: float,
) -> float:
    """Smallest log2(gamma) with gamma >= bound(gamma) for fixed (l, p).

    bound grows as gamma shrinks (margins eat the sources), so
    g - bound(g) is increasing and the root is the feasibility edge.
    """

    def slack(g: float) -> float:
        return g - _bound_log2(g, avail1, avail2, n1, l, p, margin)

    if slack(hi) < 0.0:
        raise ValueError("infeasible at the bracket top")
    lo = hi - 1.0
    while slack(lo) >= 0.0:
        lo = hi - 2.0 * (hi - lo)
        if hi - lo > 1e15:  # margins grow linearly in log2(1/gamma)
            raise RuntimeError("no lower bracket for the feasibility edge")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slack(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def raz_feasible(
    n1: int,
    k1: float,
    n2: int,
    k2: float,
    m: int,
    eps_target: float,
    *,
    convention: str = "strict",
) -> RazSpec | None:
    """Search (l, p) for a two-source extraction meeting eps_target.

    k1 and k2 are the entropies the sources actually carry; the returned spec
    holds the internal requirements after margins. Minimizes eps_ts over the
    scanned range (ties to the smaller p, which leaves the larger first-term
    headroom); None when no (l, p) reaches the target.
    """
    margin, even_only = _CONVENTIONS[convention]
    if n1 % 2:
        raise ValueError("n1 must be even")
    if n2 > n1 // 2:
        raise ValueError("n2 must be at most n1/2")
    if not 0 < m <= n1 // 2:
        raise ValueError("m must be in [1, n1/2]")
    if not 0.0 < eps_target < 1.0:
        raise ValueError("eps_target must be in (0,1)")
    if k1 > n1 or k2 > n2:
        raise ValueError("entropy exceeds a register length")

    g_t = _log2_gamma_target(m, eps_target)
    hit = _scan_p(k1, k2, n1, n2, m, g_t, margin, even_only)
    if hit is None or hit[0] > g_t:
        return None
    _, l, p = hit
    g_star = _self_consistent_gamma(k1, k2, n1, l, p, margin, g_t)
    cost = 1.0 - margin * g_star
    log2_eps = 0.75 * m + 0.5 * (_LOG2_3_HALVES + g_star)
    return RazSpec(
        n1=n1,
        k1=k1 - cost,
        n2=n2,
        k2=k2 - cost,
        m=m,
        l=l,
        p=p,
        gamma_raz=2.0**g_star if g_star > -1060.0 else 0.0,
        eps_ts=2.0**log2_eps if log2_eps > -1060.0 else 0.0,
        log2_gamma=g_star,
        log2_eps_ts=log2_eps,
        convention=convention,
    )


# ---------------------------------------------------------------------------
# Published operating points: weak-source rate required at a device rate


@dataclass(frozen=True)
class RateAssembly:
    """Register layout when trading the weak-source rate against the device's.

    quantum_first puts the device output in the first (multiplied) register
    and the weak source in the second; the reverse layout suits high weak
    rates, where the first register must exceed half entropy.
    """

    n1: int
    n2: int
    quantum_first: bool


# Large-scale layouts whose half/full degrees carry tabulated trinomials:
# weak register of 2 * 43,112,609 bits against a padded device register, and
# the reversed layout over the 756,839-bit field.
DEFAULT_ASSEMBLIES = (
    RateAssembly(n1=2 * 43_112_609, n2=1_513_678, quantum_first=False),
    RateAssembly(n1=1_513_678, n2=756_839, quantum_first=True),
)


def _assembly_feasible(
    alpha: float,
    k_quantum: float,
    asm: RateAssembly,
    m: int,
    g_t: float,
    margin: float,
    even_only: bool,
) -> bool:
    if asm.quantum_first:
        k1, k2 = k_quantum, alpha * asm.n2
    else:
        k1, k2 = alpha * asm.n1, k_quantum
    if k1 > asm.n1 or k2 > asm.n2:
        return False
    hit = _scan_p(k1, k2, asm.n1, asm.n2, m, g_t, margin, even_only)
    return hit is not None and hit[0] <= g_t


def required_alpha(
    beta: float,
    *,
    quantum_bits: int = 23_651 * 64,
    m: int = 4093,
    eps_target: float = 1e-8,
    eps_cond: float = 1e-8,
    convention: str = "published",
    assemblies: tuple[RateAssembly, ...] = DEFAULT_ASSEMBLIES,
) -> float:
    """Smallest weak-source entropy rate feasible at device rate beta.

    The device side contributes beta*quantum_bits - log2(1/eps_cond) bits of
    entropy; each assembly is tried and the best (smallest) weak rate wins.
    Nonincreasing in beta. Returns inf when even a fully-random weak source
    fails. The published operating points need convention="published"
    (margin 1 + log2(1/gamma), any integer p >= 2); "strict" matches the
    RazSpec invariants (margin 1 + 2*log2(1/gamma), even p).
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must be in (0,1]")
    margin, even_only = _CONVENTIONS[convention]
    k_q = beta * quantum_bits - math.log2(1.0 / eps_cond)
    if k_q <= 0.0:
        return math.inf
    g_t = _log2_gamma_target(m, eps_target)

    best = math.inf
    for asm in assemblies:
        if not _assembly_feasible(1.0, k_q, asm, m, g_t, margin, even_only):
            continue
        lo, hi = 0.0, 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if _assembly_feasible(mid, k_q, asm, m, g_t, margin, even_only):
                hi = mid
            else:
                lo = mid
        best = min(best, hi)
    return best


# ---------------------------------------------------------------------------
# Two-source extractor: bit-level construction


def two_source_extract(x1: BitBlock, x2: BitBlock, spec: RazSpec) -> BitBlock:
    """m output bits from (x1, x2): low bits of a*pad(x2) + b over GF(2^(n1/2)).

    x1 splits into halves (a, b); a multiplies the zero-padded x2 in the field
    under the catalog trinomial of degree n1/2, b is XORed in. Linear in x1
    for fixed x2, and symmetric enough to test strongness in either input.
    """
    if len(x1) != spec.n1 or len(x2) != spec.n2:
        raise ValueError("input lengths disagree with the spec")
    degree = spec.n1 // 2
    middle = trinomial_middle(degree)
    if middle is None:
        raise ValueError(f"no catalog trinomial of degree {degree}")
    a = x1.value & ((1 << degree) - 1)
    b = x1.value >> degree
    prod = gf2ext_mul(a, x2.value, degree, middle)
    out = (prod ^ b) & ((1 << spec.m) - 1)
    return BitBlock(out, spec.m, EXTRACTED_TAG)


# ---------------------------------------------------------------------------
# Error composition and the soundness budget


def compose_two_source_error(eps_smooth: float, eps_ts: float, eps_2: float) -> float:
    """Total distance of the two-source output: 6*eps_smooth + 2*eps_ts + 2*eps_2."""
    for e in (eps_smooth, eps_ts, eps_2):
        if not 0.0 <= e < 1.0:
            raise ValueError("error terms must be in [0,1)")
    return 6.0 * eps_smooth + 2.0 * eps_ts + 2.0 * eps_2


def seed_branch_error(eps_source: float, eps_ext: float) -> float:
    """Budget when extractor output seeds a pseudorandom stretch: the plain sum."""
    return eps_source + eps_ext


@dataclass(frozen=True)
class SoundnessBudget:
    """How the protocol-level soundness error splits across the pipeline.

    eps_sou bounds the joint probability of accepting with output far from
    uniform; the entropy side consumes 6*eps_smooth, the two-source extraction
    2*eps_ts + 2*eps_2, and M reuses of the circulant seed M*eps_seeded.
    The optional fields carry the pseudorandom-branch lines when that route
    (seed_branch_error) is costed instead.
    """

    eps_sou: float
    eps_accept: float
    eps_smooth: float
    eps_2: float
    eps_ts: float
    eps_seeded: float
    big_m: int
    eps_b: float | None = None
    eps_source: float | None = None
    eps_ext: float | None = None
    eps_prf: float | None = None

    def __post_init__(self) -> None:
        if self.eps_accept != self.eps_sou:
            raise ValueError("acceptance error is the soundness error")
        if self.eps_smooth <= 0.0:
            raise ValueError("smoothing budget must be positive")

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def soundness_split(
    eps_sou: float,
    eps_2: float,
    eps_ts: float,
    eps_seeded: float,
    big_m: int,
) -> SoundnessBudget:
    """Split eps_sou into the smoothing budget after extraction costs.

    eps_smooth = (eps_sou - 2*eps_2 - 2*eps_ts - M*eps_seeded) / 6, which must
    come out positive.
    """
    if big_m < 0:
        raise ValueError("block count must be nonnegative")
    eps_smooth = (eps_sou - 2.0 * eps_2 - 2.0 * eps_ts - big_m * eps_seeded) / 6.0
    if eps_smooth <= 0.0:
        raise ValueError("soundness target too small for the extraction costs")
    return SoundnessBudget(
        eps_sou=eps_sou,
        eps_accept=eps_sou,
        eps_smooth=eps_smooth,
        eps_2=eps_2,
        eps_ts=eps_ts,
        eps_seeded=eps_seeded,
        big_m=big_m,
    )

"""Validation-cost analysis, geographic limits, and slice-level verification.

Three strands share one module because they answer the same budget question
from different sides. The cost strand turns compute resources into the
fraction of tested rounds an adversary can validate classically inside the
measurement latency, and optimizes the verifier's own validation count
against it. The geography strand converts that latency into a light-cone
constraint on where the samples could have come from. The slice strand plays
the low-budget verification game: amplitudes arrive split across memory
slices, the verifier checks a random subset with probabilities tuned to an
exponential ansatz, and a cheater's escape probability depends only on the
total score damage, not on how it is spread.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .entropy import RestrictedReport, restricted_min_entropy
from .qsim import BasisMask, CircuitSpec, SliceSpec, sliced_state

__all__ = [
    "SPEED_OF_LIGHT",
    "REFERENCE_CLUSTER_GPUS",
    "ResourceProfile",
    "FULL_SCALE_PROFILE",
    "classical_fidelity_budget",
    "validation_gpu_hours",
    "verification_advantage",
    "BudgetOutcome",
    "optimize_budget",
    "geography",
    "SliceTable",
    "SliceVerifyPlan",
    "slice_prepare",
    "slice_plan",
    "slice_game",
    "SliceScaling",
    "slice_scaling",
    "synthetic_slice_table",
    "slice_table_from_circuit",
    "save_slice_table",
    "load_slice_table",
]

SPEED_OF_LIGHT = 299_792_458.0

# reference exascale cluster: 10,624 nodes with 6 accelerators each
REFERENCE_CLUSTER_GPUS = 10_624 * 6


def classical_fidelity_budget(
    x: float = 5.0,
    t_m: float = 0.03,
    t_pvc: float = 9.8e5,
    *,
    slowdown: float = 3.0,
    gpus: int = REFERENCE_CLUSTER_GPUS,
) -> float:
    """Fraction of rounds a cluster x times the reference spoofs within t_m.

    One circuit costs t_pvc GPU-seconds at full memory bandwidth; sustained
    spoofing runs `slowdown` times slower. The budget is the expected number
    of full validations the whole cluster completes per measurement window,
    read as a fidelity fraction.
    """
    if x <= 0 or t_m <= 0 or t_pvc <= 0 or slowdown <= 0 or gpus <= 0:
        raise ValueError("all cost parameters must be positive")
    return x * gpus * (t_m / slowdown) / t_pvc


def validation_gpu_hours(l_val: int, t_pvc: float = 9.8e5) -> float:
    """GPU-hours the verifier spends validating l_val rounds."""
    if l_val < 0 or t_pvc <= 0:
        raise ValueError("need l_val >= 0 and positive per-circuit cost")
    return l_val * t_pvc / 3600.0


@dataclass(frozen=True)
class ResourceProfile:
    """Relative compute of verifier and adversary plus timing and distance."""

    c_val: float = 1.0
    c_adv: float = 1.0
    t_val: float = 9.8e5
    t_m: float = 0.03
    n_parallel: int = 1
    x: float = 5.0
    t_pvc: float = 9.8e5
    distance: float = 3_000_000.0

    def __post_init__(self) -> None:
        values = (
            self.c_val,
            self.c_adv,
            self.t_val,
            self.t_m,
            self.n_parallel,
            self.x,
            self.t_pvc,
            self.distance,
        )
        if any(v <= 0 for v in values):
            raise ValueError("profile fields must be positive")


FULL_SCALE_PROFILE = ResourceProfile()


def verification_advantage(profile: ResourceProfile):
    """Advantage ratio xi and the adversary's validated fraction per l_val.

    xi counts how many rounds the verifier can afford to validate for each
    round the adversary can validate inside the measurement window; choosing
    l_val validation rounds then concedes the adversary f_adv = l_val / xi.
    """
    xi = (
        profile.c_val
        * profile.t_val
        * profile.n_parallel
        / (profile.c_adv * profile.t_m)
    )

    def f_adv(l_val: float) -> float:
        return l_val / xi

    return xi, f_adv


@dataclass(frozen=True)
class BudgetOutcome:
    l_val: int
    f_adv: float
    xi: float
    gpu_hours: float
    report: RestrictedReport


def optimize_budget(
    profile: ResourceProfile,
    phi: float,
    *,
    xeb: float = 0.586,
    n: int = 64,
    l_rounds: int = 23_651,
    eps_accept: float = 1e-3,
    eps_smooth: float = 1.666583e-4,
    target_entropy: float | None = None,
    l_val_grid=None,
) -> BudgetOutcome:
    """Scan validation counts and keep the best restricted-model certificate.

    Each candidate l_val concedes f_adv(l_val) classically validated rounds;
    the winner maximizes certified entropy. With target_entropy set, a scan
    that never reaches the target raises instead of returning a best effort.
    """
    xi, f_of = verification_advantage(profile)
    if l_val_grid is None:
        grid, v = [], 64
        while v < l_rounds:
            grid.append(v)
            v *= 2
        grid.append(l_rounds)
        l_val_grid = grid
    best: BudgetOutcome | None = None
    for l_val in l_val_grid:
        if not 0 < l_val <= l_rounds:
            raise ValueError("l_val grid entries must lie in 1..l_rounds")
        f_adv = f_of(l_val)
        if f_adv >= 1.0:
            continue
        report = restricted_min_entropy(
            xeb,
            l_rounds,
            l_val,
            n,
            f_adv=f_adv,
            phi=phi,
            eps_accept=eps_accept,
            eps_smooth=eps_smooth,
        )
        if best is None or report.entropy > best.report.entropy:
            best = BudgetOutcome(
                l_val=l_val,
                f_adv=f_adv,
                xi=xi,
                gpu_hours=validation_gpu_hours(l_val, profile.t_pvc),
                report=report,
            )
    if best is None or best.report.entropy <= 0.0:
        raise ValueError("no positive certificate at any l_val on the grid")
    if target_entropy is not None and best.report.entropy < target_entropy:
        raise ValueError(
            f"entropy target {target_entropy:.4g} unreachable; "
            f"best {best.report.entropy:.4g} at l_val={best.l_val}"
        )
    return best


def geography(t_m: float, d: float) -> tuple[float, float]:
    """Light-cone consequences of the measurement latency.

    Returns the fidelity factor left to an adversary sitting d meters away
    (round trip eats 2d/c of the window) and the radius within which the
    sampling device is certified to sit.
    """
    if t_m <= 0.0:
        raise ValueError("latency must be positive")
    if d < 0.0:
        raise ValueError("distance cannot be negative")
    factor = max(0.0, 1.0 - 2.0 * d / (SPEED_OF_LIGHT * t_m))
    uncertainty = SPEED_OF_LIGHT * t_m / 2.0
    return factor, uncertainty


# ---------------------------------------------------------------------------
# Slice verification


@dataclass(frozen=True, eq=False)
class SliceTable:
    """Capped per-sample per-slice amplitudes with derived score quantities.

    amplitudes[i, j] is sample i's contribution from memory slice j; rows sum
    to the full output amplitude. delta[i, j] is the score a verifier loses
    if slice (i, j) is corrupted to the worst case.
    """

    amplitudes: np.ndarray
    a_max: float
    n: int
    l_val: int
    n_slices: int
    a_sum: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)


def slice_prepare(
    raw: np.ndarray,
    a_max: float | None,
    n: int,
    l_val: int,
) -> SliceTable:
    """Cap amplitudes at magnitude a_max and derive p_i and delta tables.

    a_max = None takes the 99.9th percentile of |raw| (reproducible stand-in
    for an empirical max). Over-cap entries keep their phase. The comparison
    carries a hair of multiplicative slack so capping is exactly idempotent
    despite rounding.
    """
    raw = np.asarray(raw, dtype=np.complex128)
    if raw.ndim != 2 or raw.size == 0:
        raise ValueError("amplitude table must be a nonempty 2d array")
    if raw.shape[0] != l_val:
        raise ValueError("row count must equal l_val")
    mags = np.abs(raw)
    if a_max is None:
        a_max = float(np.percentile(mags, 99.9))
    if a_max <= 0.0:
        raise ValueError("a_max must be positive")
    over = mags > a_max * (1.0 + 1e-12)
    amplitudes = np.where(over, raw * (a_max / np.where(over, mags, 1.0)), raw)
    a_sum = amplitudes.sum(axis=1)
    p = np.abs(a_sum) ** 2
    scale = 2.0**n / l_val
    delta = scale * 2.0 * np.sqrt(p)[:, None] * (amplitudes.real + a_max)
    return SliceTable(
        amplitudes=amplitudes,
        a_max=a_max,
        n=n,
        l_val=l_val,
        n_slices=raw.shape[1],
        a_sum=a_sum,
        p=p,
        delta=delta,
    )


@dataclass(frozen=True, eq=False)
class SliceVerifyPlan:
    f: float
    c_slice: float
    probabilities: np.ndarray = field(repr=False)

    @property
    def budget(self) -> float:
        return float(self.probabilities.sum())


def slice_plan(table: SliceTable, f: float) -> SliceVerifyPlan:
    """Tune the ansatz constant so expected verifications hit the budget.

    Verification probability p = 1 - e^(-c delta) per slice; c solves
    sum p = f * l_val * n_slices by bisection on the monotone total.
    """
    if not 0.0 < f <= 1.0:
        raise ValueError("budget fraction must lie in (0, 1]")
    budget = f * table.l_val * table.n_slices
    delta = table.delta
    reachable = float(np.count_nonzero(delta > 0.0))
    if budget >= reachable:
        raise ValueError(
            f"budget {budget:.1f} saturates the {reachable:.0f} "
            "verifiable slices"
        )

    def total(c: float) -> float:
        return float((1.0 - np.exp(-c * delta)).sum())

    lo, hi = 0.0, 1.0
    while total(hi) < budget:
        hi *= 2.0
        if hi > 1e18:
            raise ValueError("budget unreachable: delta table too sparse")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) < budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    c = 0.5 * (lo + hi)
    return SliceVerifyPlan(
        f=f, c_slice=c, probabilities=1.0 - np.exp(-c * delta)
    )


def slice_game(
    table: SliceTable,
    plan: SliceVerifyPlan,
    cheat,
    rng,
    trials: int,
) -> tuple[float, float]:
    """Monte-Carlo escape frequency against the ansatz prediction.

    cheat = (slice indices, injected delta values): the adversary corrupts
    those slices, claiming amplitudes whose per-slice score damage is the
    injected delta. Each corrupted slice is verified independently with the
    ansatz probability of its claimed delta; escape means none was checked.
    The prediction e^(-c sum delta) is exact for the exponential ansatz, so
    only the total damage matters, never its split.
    """
    indices, injected = cheat
    injected = np.asarray(injected, dtype=float)
    if len(indices) != injected.size:
        raise ValueError("one injected delta per cheated slice")
    for i, j in indices:
        if not (0 <= i < table.l_val and 0 <= j < table.n_slices):
            raise ValueError("cheated slice outside the table")
    if np.any(injected < 0.0):
        raise ValueError("injected deltas are nonnegative")
    if trials < 1:
        raise ValueError("need at least one trial")
    predicted = float(np.exp(-plan.c_slice * injected.sum()))
    if injected.size == 0:
        return 1.0, 1.0
    p_detect = 1.0 - np.exp(-plan.c_slice * injected)
    draws = rng.random((trials, injected.size)) < p_detect
    escaped = ~draws.any(axis=1)
    return float(escaped.mean()), predicted


@dataclass(frozen=True)
class SliceScaling:
    """Escape probabilities coarse to fine, with the naive power-law guess."""

    n_slices: tuple[int, ...]
    c_values: tuple[float, ...]
    escapes: tuple[float, ...]
    sqrt_f_predictions: tuple[float, ...]


def slice_scaling(
    table: SliceTable,
    group_factor: int,
    f: float,
    delta_xeb: float,
) -> SliceScaling:
    """Escape probability for fixed total damage across slice granularities.

    Starting from the table's slicing, groups of group_factor adjacent slices
    are merged (amplitudes summed) while the count divides evenly; each
    granularity gets a fresh cap, ansatz constant at budget f, and escape
    probability e^(-c delta_xeb). Reported coarse to fine together with the
    prediction coarsest^(sqrt(group_factor)^k), which is known to be
    optimistic; the reliable property is that finer slicing never hurts.
    """
    if group_factor < 1:
        raise ValueError("group factor must be at least 1")
    if delta_xeb < 0.0:
        raise ValueError("score damage is nonnegative")
    tables = [table]
    if group_factor > 1:
        current = table.amplitudes
        while current.shape[1] % group_factor == 0 and current.shape[1] > group_factor:
            current = current.reshape(
                current.shape[0], current.shape[1] // group_factor, group_factor
            ).sum(axis=2)
            tables.append(slice_prepare(current, None, table.n, table.l_val))
        if len(tables) == 1:
            raise ValueError("slice count does not divide by the group factor")
    counts, cs, escapes = [], [], []
    for t in reversed(tables):  # coarse to fine
        plan = slice_plan(t, f)
        counts.append(t.n_slices)
        cs.append(plan.c_slice)
        escapes.append(math.exp(-plan.c_slice * delta_xeb))
    base = escapes[0]
    root = math.sqrt(group_factor) if group_factor > 1 else 1.0
    predictions = [base ** (root**k) for k in range(len(escapes))]
    return SliceScaling(
        n_slices=tuple(counts),
        c_values=tuple(cs),
        escapes=tuple(escapes),
        sqrt_f_predictions=tuple(predictions),
    )


def synthetic_slice_table(rng, l_val: int, n_slices: int, n: int) -> np.ndarray:
    """Raw Gaussian slice amplitudes: complex N(0, 1/(2^n n_slices)) entries.

    Rows then sum to complex Gaussians of variance 2^-n, so sample scores
    follow the ideal exponential law; used for scaling studies where real
    circuit tables would be too slow.
    """
    if l_val < 1 or n_slices < 1:
        raise ValueError("table shape must be positive")
    sd = math.sqrt(0.5 / (2.0**n * n_slices))
    shape = (l_val, n_slices)
    return sd * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def slice_table_from_circuit(
    circuit: CircuitSpec,
    basis: BasisMask | None,
    bitstrings,
    slice_qubits: tuple[int, ...],
    after_layer: int,
) -> np.ndarray:
    """Raw amplitude table from actual sliced evolution.

    Slice j projects the sliced qubits onto the bits of j right after the
    given layer; entry (i, j) is that slice's amplitude for bitstring i.
    Rows sum to the full output amplitudes by orthogonality of the slices.
    """
    k = len(slice_qubits)
    out = np.empty((len(bitstrings), 1 << k), dtype=np.complex128)
    for j in range(1 << k):
        values = tuple((j >> (k - 1 - b)) & 1 for b in range(k))
        state, _ = sliced_state(
            circuit, basis, SliceSpec(after_layer, tuple(slice_qubits), values)
        )
        for i, x in enumerate(bitstrings):
            out[i, j] = state.amplitude(int(x))
    return out


_SLICE_MAGIC = b"CRS1"


def save_slice_table(table: SliceTable, path) -> None:
    """Binary layout: magic, n, l_val, n_slices, a_max, complex64 row-major."""
    header = _SLICE_MAGIC + struct.pack(
        "<IQId", table.n, table.l_val, table.n_slices, table.a_max
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(table.amplitudes, dtype=np.complex64).tobytes())


def load_slice_table(path) -> SliceTable:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _SLICE_MAGIC:
        raise ValueError("not a slice-table file")
    n, l_val, n_slices, a_max = struct.unpack_from("<IQId", blob, 4)
    offset = 4 + struct.calcsize("<IQId")
    raw = np.frombuffer(blob, dtype=np.complex64, offset=offset)
    if raw.size != l_val * n_slices:
        raise ValueError("amplitude payload truncated")
    table = raw.astype(np.complex128).reshape(l_val, n_slices)
    return slice_prepare(table, a_max, n, l_val)

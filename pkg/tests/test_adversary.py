"""Spoofing strategy models: closed forms, Monte Carlo, circuit samplers."""

import math

import mpmath
import numpy as np
import pytest

from certrand.adversary import (
    FORMAL_MIN_QUBITS,
    dominant_model,
    dominant_xmin,
    frugal_mc_p,
    frugal_sample,
    honest_mc_p,
    honest_sample,
    phase_cosine,
    top_mc_p,
    top_moments,
    top_sample,
)
from certrand.qsim import BasisMask, SliceSpec, StateVector, evolve, gen_circuit, sliced_state
from conftest import make_rng

mpmath.mp.dps = 30


def _mean_within(x, want, sigmas=3.0):
    se = x.std(ddof=1) / math.sqrt(len(x))
    assert abs(x.mean() - want) < sigmas * se, (x.mean(), want, se)


def test_honest_mc_mean():
    rng = make_rng(1)
    for phi in (0.0, 0.4, 1.0):
        _mean_within(honest_mc_p(rng, phi, 200_000), 1.0 + phi)


def test_frugal_mc_mean():
    rng = make_rng(2)
    for phi in (0.0, 0.5, 1.0):
        _mean_within(frugal_mc_p(rng, phi, 200_000), 1.0 + phi)


def test_top_mc_mean_matches_moments():
    rng = make_rng(3)
    n = 12
    for k in (0, 2, 4):
        for phi in (0.3, 1.0):
            mean, _ = top_moments(phi, k, n)
            _mean_within(top_mc_p(rng, phi, k, 200_000), mean * 2.0**n)


def test_top_moments_closed_form_vs_mpmath():
    # E = (phi H_m + 1 - phi)/N; Var = (pi^2/6 phi^2 - phi^2 psi1(m+1)
    #       + (1-phi)^2 + 2 phi (1-phi) H_m)/N^2
    n = 10
    npop = 2.0**n
    for k in (1, 3, 6):
        m = 1 << k
        for phi in (0.0, 0.7, 1.0):
            h = float(mpmath.harmonic(m))
            want_mean = (phi * h + 1 - phi) / npop
            want_var = (
                float(mpmath.pi**2 / 6 - mpmath.polygamma(1, m + 1)) * phi * phi
                + (1 - phi) ** 2
                + 2 * phi * (1 - phi) * h
            ) / npop**2
            mean, var = top_moments(phi, k, n)
            assert mean == pytest.approx(want_mean, rel=1e-12)
            assert var == pytest.approx(want_var, rel=1e-12)


def test_top_k_zero_reduces_to_honest_shape():
    # one candidate: the "best of 1" is an honest mixture draw
    mean, _ = top_moments(1.0, 0, 8)
    assert mean * 2.0**8 == pytest.approx(1.0)


def test_phase_cosine_moments():
    rng = make_rng(4)
    r = phase_cosine(rng, 300_000)
    assert abs(r.mean()) < 3.0 / math.sqrt(len(r))
    _mean_within(r * r, 0.5)
    assert np.all(np.abs(r) <= 1.0)


def test_mc_validation_errors():
    rng = make_rng(0)
    with pytest.raises(ValueError):
        frugal_mc_p(rng, 1.2, 10)
    with pytest.raises(ValueError):
        top_mc_p(rng, 0.5, -1, 10)


def test_dominant_xmin_solves_cdf():
    for phi, d in [(0.0, 0.1), (0.5, 0.01), (1.0, 0.3)]:
        x = dominant_xmin(phi, d)
        assert 1.0 - (1.0 + phi * x) * math.exp(-x) == pytest.approx(d, abs=1e-12)
    assert dominant_xmin(0.5, 0.0) == 0.0


def test_dominant_model_cdf_and_sampling():
    model = dominant_model(0.6, 0.05, 2.0, n=64)
    assert model.formal
    assert not dominant_model(0.6, 0.05, 2.0, n=12).formal
    assert dominant_model(0.6, 0.05, 2.0).formal is False
    rng = make_rng(5)
    x = model.sample(rng, 100_000)
    assert np.all(x >= model.x_min - 1e-12)
    # empirical CDF against the analytic one at a few quantiles
    for q in (0.5, 1.0, 1.5, 1.9):
        emp = float((x <= q).mean())
        assert abs(emp - float(model.cdf(q))) < 0.01
    # point mass at the cap
    assert float((x == 2.0).mean()) == pytest.approx(0.05, abs=0.01)


def test_dominant_model_rejects_cap_below_offset():
    with pytest.raises(ValueError):
        dominant_model(0.5, 0.9, 0.5)


def test_formal_min_qubits_constant():
    assert FORMAL_MIN_QUBITS == 50


# ---------------------------------------------------------------------------
# Circuit-level samplers


def _circuit_and_partial(seed: int, n: int = 10):
    """Full output state and a slice-sum partial with its exact fidelity."""
    circuit = gen_circuit(n, depth=6, pairs_per_layer=n // 2, seed=seed, final_pairs=n // 2)
    basis = BasisMask.from_int(n, (seed * 2654435761) % (1 << n))
    full = evolve(circuit, basis)
    vec = np.zeros_like(full.vec)
    for value in (0, 1):  # keep 2 of 4 slices, fidelity near 1/2
        spec = SliceSpec(after_layer=3, qubits=(0, 1), values=(0, value))
        part, _ = sliced_state(circuit, basis, spec)
        vec = vec + part.vec
    partial = StateVector(n, vec)
    return full, partial, partial.norm2()


def test_honest_sample_scores():
    rng = make_rng(6)
    circuit = gen_circuit(10, depth=6, pairs_per_layer=5, seed=31, final_pairs=5)
    state = evolve(circuit, BasisMask.from_int(10, 0x155))
    for phi in (0.0, 1.0):
        z = honest_sample(state, rng, phi, 4000)
        x = (1 << 10) * state.probabilities()[z]
        _mean_within(x, 1.0 + phi, sigmas=3.5)


def test_honest_sample_deterministic():
    circuit = gen_circuit(8, depth=5, pairs_per_layer=4, seed=7)
    state = evolve(circuit, BasisMask.all_z(8))
    a = honest_sample(state, make_rng(9), 0.7, 100)
    b = honest_sample(state, make_rng(9), 0.7, 100)
    assert np.array_equal(a, b)


def test_frugal_sample_mean_tracks_fidelity():
    rng = make_rng(10)
    xs = []
    phis = []
    for seed in range(4):
        full, partial, phi = _circuit_and_partial(seed)
        _, x = frugal_sample(full, partial, rng, 1500)
        xs.append(x)
        phis.append(phi)
    x = np.concatenate(xs)
    want = 1.0 + float(np.mean(phis))
    _mean_within(x, want, sigmas=3.5)


def test_frugal_sample_validates_inputs():
    full, partial, _ = _circuit_and_partial(0)
    rng = make_rng(0)
    with pytest.raises(ValueError):
        frugal_sample(full, StateVector(4, np.zeros(16, dtype=np.complex128)), rng, 5)
    with pytest.raises(ValueError):
        frugal_sample(full, StateVector(full.n, np.zeros_like(full.vec)), rng, 5)


def _exact_top_mean(state: StateVector, k: int) -> float:
    # E[N max p] over 2^k distinct uniform candidates, by order statistics:
    # P(max <= p_(j)) = C(j, m) / C(N, m) on the ascending sort.
    p = np.sort(state.probabilities())
    npop = len(p)
    m = 1 << k
    total = math.comb(npop, m)
    acc = 0.0
    prev = 0
    for j in range(m, npop + 1):
        cur = math.comb(j, m)
        acc += p[j - 1] * ((cur - prev) / total)
        prev = cur
    return npop * acc


def test_top_sample_matches_exact_order_statistics():
    rng = make_rng(11)
    full, _, _ = _circuit_and_partial(3)
    _, x = top_sample(full, full, rng, 4, 1200)
    _mean_within(x, _exact_top_mean(full, 4), sigmas=3.5)
    with pytest.raises(ValueError):
        top_sample(full, full, rng, full.n + 1, 5)


def test_top_sample_tracks_asymptotic_across_circuits():
    # the Exp(1) closed form holds on ensemble average, not per circuit
    rng = make_rng(13)
    exact = []
    for seed in range(12):
        full, _, _ = _circuit_and_partial(seed)
        exact.append(_exact_top_mean(full, 4))
    mean, _ = top_moments(1.0, 4, 10)
    assert np.mean(exact) == pytest.approx(mean * 2.0**10, rel=0.05)


def test_top_sample_outcomes_are_high_weight():
    rng = make_rng(12)
    full, _, _ = _circuit_and_partial(5)
    outcomes, x = top_sample(full, full, rng, 6, 300)
    assert np.all(x == (1 << full.n) * full.probabilities()[outcomes])
    assert x.mean() > 2.0  # strictly heavier than Born sampling

"""Statevector simulator against a brute-force kron reference."""

import json
import math

import numpy as np
import pytest

from certrand.qsim import (
    MAX_QUBITS,
    BasisMask,
    CircuitSpec,
    Layer,
    SliceSpec,
    StateVector,
    amplitude,
    bitstring_to_hex,
    born_sample,
    circuit_from_json,
    circuit_to_json,
    evolve,
    gen_circuit,
    hex_to_bitstring,
    single_qubit_gate,
    sliced_state,
)
from conftest import make_rng

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
_RZZ = np.diag(np.exp(1j * (math.pi / 4.0) * np.array([-1.0, 1.0, 1.0, -1.0])))


def _embed_1q(mat: np.ndarray, q: int, n: int) -> np.ndarray:
    ops = [np.eye(2, dtype=np.complex128)] * n
    ops[q] = mat
    full = ops[0]
    for op in ops[1:]:
        full = np.kron(full, op)
    return full


def _embed_2q_diag(q1: int, q2: int, n: int) -> np.ndarray:
    # diagonal ZZ phase: phase depends only on the two bits
    dim = 1 << n
    diag = np.empty(dim, dtype=np.complex128)
    for z in range(dim):
        b1 = (z >> (n - 1 - q1)) & 1
        b2 = (z >> (n - 1 - q2)) & 1
        diag[z] = _RZZ[2 * b1 + b2, 2 * b1 + b2]
    return np.diag(diag)


def _reference_evolve(circuit: CircuitSpec, basis: BasisMask | None) -> np.ndarray:
    n = circuit.n
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    for layer in circuit.layers:
        for a, b in layer.pairs:
            psi = _embed_2q_diag(a, b, n) @ psi
        for q, t in layer.gates:
            psi = _embed_1q(single_qubit_gate(t), q, n) @ psi
    if basis is not None:
        for q in basis.x_qubits():
            psi = _embed_1q(_H, q, n) @ psi
    return psi


@pytest.mark.parametrize("seed", [0, 1, 7])
@pytest.mark.parametrize("n", [2, 4, 6])
def test_evolve_matches_kron_reference(n, seed):
    circuit = gen_circuit(n, depth=4, pairs_per_layer=n // 2, seed=seed, final_pairs=n // 2)
    basis = BasisMask.from_int(n, seed % (1 << n))
    got = evolve(circuit, basis).vec
    want = _reference_evolve(circuit, basis)
    assert np.max(np.abs(got - want)) < 1e-12


def test_evolve_no_basis_matches_reference():
    circuit = gen_circuit(5, depth=3, pairs_per_layer=2, seed=11)
    got = evolve(circuit).vec
    want = _reference_evolve(circuit, None)
    assert np.max(np.abs(got - want)) < 1e-12


def test_gate_family_unitary_and_keyed():
    for t in range(8):
        g = single_qubit_gate(t)
        assert np.allclose(g @ g.conj().T, np.eye(2), atol=1e-14)
    with pytest.raises(ValueError):
        single_qubit_gate(8)


def test_repeated_qubit_layer_falls_back_to_sequential():
    # duplicate 1q gates on one qubit in a single layer: order matters, and
    # the evolution must apply them sequentially like the reference does
    layer = Layer(pairs=(), gates=((0, 2), (0, 5), (1, 7)))
    circuit = CircuitSpec(2, (layer,))
    got = evolve(circuit).vec
    want = _reference_evolve(circuit, None)
    assert np.max(np.abs(got - want)) < 1e-13


def test_norm_preserved(rng):
    circuit = gen_circuit(12, depth=8, pairs_per_layer=4, seed=3, final_pairs=6)
    state = evolve(circuit, BasisMask.from_int(12, 0b101))
    assert state.norm2() == pytest.approx(1.0, abs=1e-10)
    assert state.probabilities().sum() == pytest.approx(1.0, abs=1e-10)


def test_amplitude_agrees_with_evolve():
    circuit = gen_circuit(8, depth=5, pairs_per_layer=3, seed=5)
    basis = BasisMask.from_int(8, 0x2B)
    state = evolve(circuit, basis)
    for z in (0, 1, 100, 255):
        assert amplitude(circuit, basis, z) == pytest.approx(state.amplitude(z), abs=1e-12)
    with pytest.raises(ValueError):
        amplitude(circuit, basis, 1 << 8)


def test_gen_circuit_structure():
    circuit = gen_circuit(10, depth=6, pairs_per_layer=4, seed=9, final_pairs=5)
    assert len(circuit.layers) == 8  # dressing + depth + final
    assert circuit.layers[0].pairs == ()
    assert len(circuit.layers[-1].pairs) == 5
    # final layer dresses only the touched qubits
    touched = {q for pair in circuit.layers[-1].pairs for q in pair}
    assert {q for q, _ in circuit.layers[-1].gates} == touched
    with pytest.raises(ValueError):
        gen_circuit(10, depth=2, pairs_per_layer=6, seed=0)


def test_gen_circuit_deterministic():
    a = gen_circuit(9, depth=4, pairs_per_layer=3, seed=42)
    b = gen_circuit(9, depth=4, pairs_per_layer=3, seed=42)
    assert a == b
    assert a != gen_circuit(9, depth=4, pairs_per_layer=3, seed=43)


def test_with_gate_keys_and_count():
    circuit = gen_circuit(6, depth=3, pairs_per_layer=2, seed=1, final_pairs=2)
    count = circuit.one_qubit_gate_count
    keys = [i % 8 for i in range(count)]
    rekeyed = circuit.with_gate_keys(keys)
    flat = [t for layer in rekeyed.layers for _, t in layer.gates]
    assert flat == keys
    with pytest.raises(ValueError):
        circuit.with_gate_keys(keys[:-1])


def test_basis_mask_round_trip():
    mask = BasisMask.from_int(6, 0b101100)
    assert mask.to_int() == 0b101100
    assert BasisMask.all_z(6).to_int() == 0
    assert mask.x_qubits() == (0, 2, 3)  # qubit 0 = MSB
    with pytest.raises(ValueError):
        BasisMask(3, (0, 1))


def test_qubit_zero_is_msb():
    # H on qubit 0 of |00> gives (|00> + |10>)/sqrt2: indices 0 and 2
    circuit = CircuitSpec(2, (Layer((), ()),))
    state = evolve(circuit, BasisMask(2, (1, 0)))
    assert abs(state.vec[0]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert abs(state.vec[2]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert abs(state.vec[1]) < 1e-12


def test_sliced_state_partition():
    circuit = gen_circuit(8, depth=5, pairs_per_layer=3, seed=2, final_pairs=4)
    basis = BasisMask.from_int(8, 0x55)
    full = evolve(circuit, basis)
    qubits = (1, 4)
    states = []
    weights = []
    for value in range(4):
        spec = SliceSpec(after_layer=2, qubits=qubits, values=((value >> 1) & 1, value & 1))
        s, w = sliced_state(circuit, basis, spec)
        assert w == pytest.approx(s.norm2(), rel=1e-12)
        states.append(s.vec)
        weights.append(w)
    # slices are orthogonal, weights sum to one, vectors sum to the state
    assert sum(weights) == pytest.approx(1.0, abs=1e-10)
    total = np.sum(states, axis=0)
    assert np.max(np.abs(total - full.vec)) < 1e-10
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(np.vdot(states[i], states[j])) < 1e-10


def test_sliced_weight_is_fidelity():
    circuit = gen_circuit(6, depth=4, pairs_per_layer=2, seed=8)
    spec = SliceSpec(after_layer=1, qubits=(0,), values=(0,))
    part, w = sliced_state(circuit, None, spec)
    full = evolve(circuit)
    overlap = abs(np.vdot(part.vec / math.sqrt(w), full.vec)) ** 2
    assert overlap == pytest.approx(w, rel=1e-10)


def test_born_sample_needs_normalized_state():
    vec = np.zeros(4, dtype=np.complex128)
    vec[0] = 0.5
    with pytest.raises(ValueError):
        born_sample(StateVector(2, vec), make_rng(0), 3)


def test_born_sample_distribution():
    rng = make_rng(77)
    circuit = gen_circuit(10, depth=8, pairs_per_layer=5, seed=21, final_pairs=5)
    state = evolve(circuit, BasisMask.from_int(10, 0x3FF))
    draws = born_sample(state, rng, 4000)
    x = (1 << 10) * state.probabilities()[draws]
    # Born-sampled scaled probabilities have mean 2 under Porter-Thomas
    assert abs(x.mean() - 2.0) < 3 * x.std() / math.sqrt(len(x))


def test_circuit_json_round_trip():
    circuit = gen_circuit(7, depth=4, pairs_per_layer=3, seed=13, final_pairs=2)
    text = circuit_to_json(circuit)
    doc = json.loads(text)
    assert doc["n"] == 7
    assert circuit_from_json(text) == circuit


def test_hex_is_msb_first():
    assert bitstring_to_hex(0b1010, 4) == "a"
    assert bitstring_to_hex(1, 12) == "001"
    assert hex_to_bitstring("a", 4) == 0b1010
    with pytest.raises(ValueError):
        bitstring_to_hex(16, 4)
    with pytest.raises(ValueError):
        hex_to_bitstring("fff", 4)


def test_qubit_cap_enforced():
    with pytest.raises(ValueError):
        CircuitSpec(MAX_QUBITS + 1, ())

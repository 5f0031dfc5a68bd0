"""Statevector simulation of the random-circuit ensemble.

Circuits interleave layers of two-qubit ZZ rotations (angle pi/2) with
single-qubit gates drawn from the eight-element family

    G_t = Z^p X^(1/2) Z^(-p),  p = (t - 4)/4,  t in 0..7,

realized (up to a dropped global phase) as the matrix
(1/sqrt2) [[1, -i e^{-i phi}], [-i e^{i phi}, 1]] with phi = p*pi. Each
single-qubit gate therefore consumes exactly 3 key bits. Measurement bases
are delayed: a basis mask marks which qubits get a Hadamard before the final
computational-basis readout.

Bit conventions: qubit 0 is the most significant bit of an n-bit outcome,
and hex serializations are MSB-first. Statevectors are dense; n is capped at
24 qubits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 24
KEY_BITS_PER_GATE = 3

_SQ2 = 1.0 / math.sqrt(2.0)
_HADAMARD = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128)

# diag(e^{-i pi/4}, e^{i pi/4}, e^{i pi/4}, e^{-i pi/4}) on |00>,|01>,|10>,|11>
_RZZ_PHASE = np.exp(1j * (math.pi / 4.0) * np.array([-1.0, 1.0, 1.0, -1.0]))


def single_qubit_gate(t: int) -> np.ndarray:
    """Matrix of G_t for key value t in 0..7."""
    if not 0 <= t <= 7:
        raise ValueError("gate key must be a 3-bit value")
    phi = (t - 4) / 4.0 * math.pi
    return _SQ2 * np.array(
        [
            [1.0, -1j * np.exp(-1j * phi)],
            [-1j * np.exp(1j * phi), 1.0],
        ],
        dtype=np.complex128,
    )


_GATE_TABLE = tuple(single_qubit_gate(t) for t in range(8))
for _g in _GATE_TABLE:
    _g.setflags(write=False)

# Extended key set for layer application: 0..7 gate keys, 8 identity, 9 H.
_IDENT_KEY = 8
_H_KEY = 9
_KEY_MATS = _GATE_TABLE + (np.eye(2, dtype=np.complex128), _HADAMARD)


def _build_triples() -> np.ndarray:
    base = np.stack(_KEY_MATS)
    # kron(A,B,C)[ace,bdf] = A[a,b] B[c,d] C[e,f]
    t = np.einsum("iab,jcd,kef->ijkacebdf", base, base, base)
    return np.ascontiguousarray(t.reshape(10, 10, 10, 8, 8))


_TRIPLES = _build_triples()


@dataclass(frozen=True)
class Layer:
    """One circuit layer: the ZZ pairs act first, then the listed 1q gates."""

    pairs: tuple[tuple[int, int], ...]
    gates: tuple[tuple[int, int], ...]  # (qubit, key) with key in 0..7


@dataclass(frozen=True)
class CircuitSpec:
    n: int
    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count must lie in 1..{MAX_QUBITS}")
        for layer in self.layers:
            seen: set[int] = set()
            for a, b in layer.pairs:
                if a == b or not (0 <= a < self.n and 0 <= b < self.n):
                    raise ValueError("bad pair")
                if a in seen or b in seen:
                    raise ValueError("pairs within a layer must be disjoint")
                seen.update((a, b))
            for q, t in layer.gates:
                if not 0 <= q < self.n:
                    raise ValueError("gate qubit out of range")
                if not 0 <= t <= 7:
                    raise ValueError("gate key out of range")

    @property
    def one_qubit_gate_count(self) -> int:
        return sum(len(layer.gates) for layer in self.layers)

    @property
    def two_qubit_gate_count(self) -> int:
        return sum(len(layer.pairs) for layer in self.layers)

    @property
    def key_bit_count(self) -> int:
        return KEY_BITS_PER_GATE * self.one_qubit_gate_count

    def gate_keys(self) -> list[int]:
        """All 1q gate keys in application order."""
        return [t for layer in self.layers for _, t in layer.gates]

    def with_gate_keys(self, keys: list[int]) -> "CircuitSpec":
        """Same layout with the 1q keys replaced, in application order."""
        if len(keys) != self.one_qubit_gate_count:
            raise ValueError("key count mismatch")
        it = iter(keys)
        layers = tuple(
            Layer(layer.pairs, tuple((q, next(it)) for q, _ in layer.gates))
            for layer in self.layers
        )
        return CircuitSpec(self.n, layers)


@dataclass(frozen=True)
class BasisMask:
    """Per-qubit measurement basis: 0 reads Z, 1 inserts H first (X basis)."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) != self.n or any(b not in (0, 1) for b in self.bits):
            raise ValueError("mask needs one 0/1 entry per qubit")

    @classmethod
    def all_z(cls, n: int) -> "BasisMask":
        return cls(n, (0,) * n)

    @classmethod
    def from_int(cls, n: int, value: int) -> "BasisMask":
        """MSB-first: bit for qubit 0 is the most significant."""
        if value < 0 or value.bit_length() > n:
            raise ValueError("mask value does not fit")
        return cls(n, tuple((value >> (n - 1 - j)) & 1 for j in range(n)))

    def to_int(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    def x_qubits(self) -> tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.bits) if b)


@dataclass
class StateVector:
    n: int
    vec: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.vec.shape != (1 << self.n,):
            raise ValueError("vector length must be 2^n")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.vec) ** 2

    def norm2(self) -> float:
        return float(np.vdot(self.vec, self.vec).real)

    def amplitude(self, bitstring: int) -> complex:
        return complex(self.vec[bitstring])


@dataclass(frozen=True)
class SliceSpec:
    """Project `qubits` onto `values` right after layer index `after_layer`."""

    after_layer: int
    qubits: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.qubits) != len(self.values):
            raise ValueError("each sliced qubit needs a value")
        if any(v not in (0, 1) for v in self.values):
            raise ValueError("slice values are bits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("sliced qubits must be distinct")


def gen_circuit(
    n: int,
    depth: int,
    pairs_per_layer: int,
    seed: int,
    final_pairs: int = 0,
) -> CircuitSpec:
    """Random circuit: a dressing 1q layer, `depth` full layers of
    `pairs_per_layer` ZZ pairs plus 1q gates on every qubit, and optionally a
    final partial layer of `final_pairs` pairs with 1q gates only on the
    qubits those pairs touch.
    """
    if 2 * pairs_per_layer > n or 2 * final_pairs > n:
        raise ValueError("more pairs than qubits allow")
    rng = np.random.Generator(np.random.Philox(seed))
    layers = [Layer((), tuple((q, int(rng.integers(8))) for q in range(n)))]
    for _ in range(depth):
        pairs = _random_pairs(rng, n, pairs_per_layer)
        gates = tuple((q, int(rng.integers(8))) for q in range(n))
        layers.append(Layer(pairs, gates))
    if final_pairs:
        pairs = _random_pairs(rng, n, final_pairs)
        touched = sorted(q for pair in pairs for q in pair)
        gates = tuple((q, int(rng.integers(8))) for q in touched)
        layers.append(Layer(pairs, gates))
    return CircuitSpec(n, tuple(layers))


def _random_pairs(rng, n: int, count: int) -> tuple[tuple[int, int], ...]:
    perm = rng.permutation(n)
    return tuple(
        (int(perm[2 * i]), int(perm[2 * i + 1])) for i in range(count)
    )


def _apply_1q(psi: np.ndarray, n: int, u: np.ndarray, qubit: int) -> np.ndarray:
    psi = psi.reshape((1 << qubit, 2, 1 << (n - qubit - 1)))
    lo, hi = psi[:, 0, :], psi[:, 1, :]
    out = np.empty_like(psi)
    out[:, 0, :] = u[0, 0] * lo + u[0, 1] * hi
    out[:, 1, :] = u[1, 0] * lo + u[1, 1] * hi
    return out.reshape(-1)


def _apply_keyed_layer(psi: np.ndarray, n: int, keys: list[int]) -> np.ndarray:
    """Apply one extended-key 1q gate per qubit, three qubits per matmul."""
    q = 0
    while q < n:
        if n - q >= 3:
            k0, k1, k2 = keys[q], keys[q + 1], keys[q + 2]
            if not k0 == k1 == k2 == _IDENT_KEY:
                t = _TRIPLES[k0, k1, k2]
                if q == n - 3:
                    psi = (psi.reshape(-1, 8) @ t.T).reshape(-1)
                else:
                    v = psi.reshape((1 << q, 8, 1 << (n - q - 3)))
                    psi = np.matmul(t, v).reshape(-1)
            q += 3
        else:
            if keys[q] != _IDENT_KEY:
                psi = _apply_1q(psi, n, _KEY_MATS[keys[q]], q)
            q += 1
    return psi


def _apply_rzz(psi: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    # diagonal gate: phase by the parity of bits a and b; in place (the
    # evolution loop owns its buffer throughout)
    if a > b:
        a, b = b, a
    shape = (1 << a, 2, 1 << (b - a - 1), 2, 1 << (n - b - 1))
    view = psi.reshape(shape)
    view *= _RZZ_PHASE.reshape(1, 2, 1, 2, 1)
    return psi


def _evolve_vec(
    circuit: CircuitSpec,
    basis: BasisMask | None,
    slice_spec: SliceSpec | None = None,
) -> np.ndarray:
    n = circuit.n
    if slice_spec is not None:
        if not 0 <= slice_spec.after_layer < len(circuit.layers):
            raise ValueError("slice layer index beyond the circuit")
        if any(q >= n for q in slice_spec.qubits):
            raise ValueError("sliced qubit out of range")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    for idx, layer in enumerate(circuit.layers):
        for a, b in layer.pairs:
            psi = _apply_rzz(psi, n, a, b)
        qubits = [q for q, _ in layer.gates]
        if len(set(qubits)) == len(qubits):
            keys = [_IDENT_KEY] * n
            for q, t in layer.gates:
                keys[q] = t
            psi = _apply_keyed_layer(psi, n, keys)
        else:
            # repeated qubit in one layer: order matters, apply one by one
            for q, t in layer.gates:
                psi = _apply_1q(psi, n, _GATE_TABLE[t], q)
        if slice_spec is not None and idx == slice_spec.after_layer:
            psi = _project(psi, n, slice_spec)
    if basis is not None:
        if basis.n != n:
            raise ValueError("basis mask size mismatch")
        keys = [_H_KEY if b else _IDENT_KEY for b in basis.bits]
        psi = _apply_keyed_layer(psi, n, keys)
    return psi


def _project(psi: np.ndarray, n: int, spec: SliceSpec) -> np.ndarray:
    keep = np.ones(1 << n, dtype=bool)
    idx = np.arange(1 << n)
    for q, v in zip(spec.qubits, spec.values):
        keep &= ((idx >> (n - 1 - q)) & 1) == v
    out = np.where(keep, psi, 0.0)
    return out


def evolve(circuit: CircuitSpec, basis: BasisMask | None = None) -> StateVector:
    """Full statevector after the circuit and the basis Hadamards."""
    return StateVector(circuit.n, _evolve_vec(circuit, basis))


def amplitude(
    circuit: CircuitSpec, basis: BasisMask | None, bitstring: int
) -> complex:
    """Output amplitude of one computational-basis outcome."""
    if bitstring < 0 or bitstring >= (1 << circuit.n):
        raise ValueError("bitstring outside range")
    return complex(_evolve_vec(circuit, basis)[bitstring])


def sliced_state(
    circuit: CircuitSpec, basis: BasisMask | None, slice_spec: SliceSpec
) -> tuple[StateVector, float]:
    """Unnormalized slice of the output state and its weight.

    The state is evolved to just after `slice_spec.after_layer`, projected on
    the sliced qubits, then evolved through the remaining layers. Distinct
    slice values give mutually orthogonal contributions that sum to the full
    state; the returned weight is the squared norm, which equals the fidelity
    between the normalized slice and the full output state.
    """
    vec = _evolve_vec(circuit, basis, slice_spec)
    state = StateVector(circuit.n, vec)
    return state, state.norm2()


def born_sample(state: StateVector, rng, count: int) -> np.ndarray:
    """Sample `count` outcomes (ints, qubit 0 = MSB) from |psi|^2."""
    p = state.probabilities()
    total = p.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError("state is not normalized")
    return rng.choice(len(p), size=count, p=p / total)


def bitstring_to_hex(bitstring: int, n: int) -> str:
    """MSB-first hex of an n-bit outcome, zero padded to ceil(n/4) digits."""
    if bitstring < 0 or bitstring.bit_length() > n:
        raise ValueError("bitstring outside range")
    width = (n + 3) // 4
    return format(bitstring, f"0{width}x")


def hex_to_bitstring(text: str, n: int) -> int:
    value = int(text, 16)
    if value.bit_length() > n:
        raise ValueError("hex value longer than the register")
    return value


def circuit_to_json(circuit: CircuitSpec) -> str:
    doc = {
        "n": circuit.n,
        "layers": [
            {"pairs": [list(p) for p in layer.pairs],
             "gates": [list(g) for g in layer.gates]}
            for layer in circuit.layers
        ],
    }
    return json.dumps(doc, separators=(",", ":"))


def circuit_from_json(text: str) -> CircuitSpec:
    doc = json.loads(text)
    layers = tuple(
        Layer(
            tuple((int(a), int(b)) for a, b in layer["pairs"]),
            tuple((int(q), int(t)) for q, t in layer["gates"]),
        )
        for layer in doc["layers"]
    )
    return CircuitSpec(int(doc["n"]), layers)

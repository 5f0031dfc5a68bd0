"""Round-by-round protocol runs: score-gated expansion and amplification.

A verifier streams one random circuit per round, reveals the measurement
bases only after the circuit is committed, and scores returned bitstrings by
their ideal probabilities, truncated at p_max. Rounds that miss the timeout
budget count as zero-probability outcomes on the all-zeros string, so
post-selection by stalling is impossible by construction. The run accepts
when the accumulated score

    s = sum over tested rounds of 2^n * min(p, p_max) / (gamma * L)

reaches the threshold s_star (raw truncated-mean convention, no -1 shift).

Expansion mode draws bases and test rounds from the verifier's own
randomness. Amplification mode drives the same state machine from weak-source
bits: circuit gate keys straight from the source (3 bits per gate), bases and
validation flags from a block B, then a two-source extraction of the returned
bits against a fresh weak block seeds M circulant extractions.

Networking is simulated in process by default (latency injection); a loopback
socket mode with length-prefixed JSON framing exercises the same state
machine over a real connection.
"""

from __future__ import annotations

import json
import math
import socket
import threading
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .extract import (
    EXTRACTED_TAG,
    QUANTUM_TAG,
    WEAK_TAG,
    CirculantSpec,
    RazSpec,
    SoundnessBudget,
    TRINOMIAL_CATALOG,
    circulant_extract,
    circulant_params,
    raz_feasible,
    two_source_extract,
)
from .adversary import honest_sample
from .gf2 import BitBlock
from .qsim import (
    BasisMask,
    CircuitSpec,
    circuit_from_json,
    circuit_to_json,
    evolve,
    gen_circuit,
)

__all__ = [
    "LatencyModel",
    "ServerModel",
    "WeakSourceSpec",
    "ProtocolConfig",
    "AmplificationPlan",
    "RoundRecord",
    "Transcript",
    "AmplificationResult",
    "FULL_SCALE_LATENCY",
    "VALIDATION_BITS",
    "latency_model",
    "weak_bits",
    "build_validation_block",
    "run_expansion",
    "run_amplification",
    "verify_transcript",
    "save_transcript",
    "load_transcript",
    "parse_config",
    "config_from_mapping",
    "serve_loopback",
    "socket_responder",
]

VALIDATION_BITS = 16  # dyadic quantization of the test rate in block B

# Basis-to-bitstring latency calibrated so the 40 ms budget is missed with
# the observed full-scale frequency 53/23,651.
FULL_SCALE_LATENCY_JITTER = 0.0035181


@dataclass(frozen=True)
class LatencyModel:
    """Gaussian per-layer streaming latencies plus the measurement latency."""

    layer_mean: float = 0.0015
    layer_jitter: float = 0.0
    measure_mean: float = 0.03
    measure_jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.layer_mean <= 0.0 or self.measure_mean <= 0.0:
            raise ValueError("latency means must be positive")
        if self.layer_jitter < 0.0 or self.measure_jitter < 0.0:
            raise ValueError("jitter must be nonnegative")

    def draw(self, rng, n_layers: int) -> tuple[tuple[float, ...], float]:
        layers = self.layer_mean + self.layer_jitter * rng.standard_normal(n_layers)
        t_m = self.measure_mean + self.measure_jitter * rng.standard_normal()
        return tuple(max(0.0, float(t)) for t in layers), max(0.0, float(t_m))


FULL_SCALE_LATENCY = LatencyModel(
    measure_mean=0.03, measure_jitter=FULL_SCALE_LATENCY_JITTER
)


@dataclass(frozen=True)
class ServerModel:
    """Sampling behavior of the remote device: honest mixture or degenerate."""

    kind: str = "honest"
    phi: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("honest", "uniform", "timeout"):
            raise ValueError("server kind must be honest, uniform, or timeout")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("fidelity must lie in [0,1]")


@dataclass(frozen=True)
class WeakSourceSpec:
    """Bit generator with a declared min-entropy rate.

    iid kind emits ones with probability p1; block kind cycles a per-position
    bias pattern of the given period. The declared rate is analytic:
    independent positions contribute -log2 max(p, 1-p) each.
    """

    kind: str = "uniform"
    p1: float | None = None
    period: int | None = None
    pattern: tuple[float, ...] | None = None
    discard_gap: int = 0

    def __post_init__(self) -> None:
        if self.kind == "uniform":
            if self.p1 is not None or self.pattern is not None:
                raise ValueError("uniform source takes no bias parameters")
        elif self.kind == "iid":
            if self.p1 is None or not 0.0 < self.p1 < 1.0:
                raise ValueError("iid source needs p1 in (0,1)")
        elif self.kind == "block":
            if not self.pattern or self.period != len(self.pattern):
                raise ValueError("block source needs period == len(pattern)")
            if any(not 0.0 < p < 1.0 for p in self.pattern):
                raise ValueError("pattern biases must lie in (0,1)")
        else:
            raise ValueError("kind must be uniform, iid, or block")
        if self.discard_gap < 0:
            raise ValueError("discard gap must be nonnegative")

    @property
    def alpha(self) -> float:
        """Declared min-entropy per bit."""
        if self.kind == "uniform":
            return 1.0
        if self.kind == "iid":
            return -math.log2(max(self.p1, 1.0 - self.p1))
        total = -sum(math.log2(max(p, 1.0 - p)) for p in self.pattern)
        return total / self.period


def weak_bits(spec: WeakSourceSpec, count: int, rng) -> BitBlock:
    """Next `count` bits of the weak stream, then discard the configured gap."""
    if count < 1:
        raise ValueError("count must be positive")
    draw = count + spec.discard_gap
    if spec.kind == "uniform":
        bits = rng.integers(0, 2, size=draw)
    elif spec.kind == "iid":
        bits = (rng.random(draw) < spec.p1).astype(np.int64)
    else:
        biases = np.resize(np.asarray(spec.pattern), draw)
        bits = (rng.random(draw) < biases).astype(np.int64)
    value = 0
    for i in range(count):
        value |= int(bits[i]) << i
    return BitBlock(value, count, WEAK_TAG)


@dataclass(frozen=True)
class AmplificationPlan:
    """Sizing knobs of the amplification pipeline, scaled to desk by default.

    The two-source registers derive from the catalog: the returned bits pad
    into the smallest register 2*degree >= L*n, the weak side fills degree
    bits, and the extraction emits n_in+1 bits, exactly one circulant seed.
    big_m output blocks of n_in weak bits each follow.
    """

    big_m: int = 10
    n_in: int = 28
    declared_beta: float = 0.65
    b_mode: str = "direct"
    convention: str = "strict"

    def __post_init__(self) -> None:
        if self.big_m < 1 or self.n_in < 2:
            raise ValueError("need at least one block of at least two bits")
        if not 0.0 < self.declared_beta <= 1.0:
            raise ValueError("declared_beta must be in (0,1]")
        if self.b_mode not in ("direct", "two-source"):
            raise ValueError("b_mode must be direct or two-source")


@dataclass(frozen=True)
class ProtocolConfig:
    n: int = 12
    l_rounds: int = 500
    gamma: float = 0.5
    s_star: float = 0.8
    p_max: float | None = None
    t_batch: float = 0.04
    batch_size: int = 1
    depth: int = 8
    pairs_per_layer: int = 4
    final_pairs: int = 6
    layout_seed: int = 2024
    mode: str = "expansion"
    latency: LatencyModel = field(default_factory=LatencyModel)
    server: ServerModel = field(default_factory=ServerModel)
    amp: AmplificationPlan | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0,1]")
        if self.t_batch <= 0.0:
            raise ValueError("timeout budget must be positive")
        if self.l_rounds < 1 or self.batch_size < 1:
            raise ValueError("rounds and batch size must be positive")
        if self.mode not in ("expansion", "amplification"):
            raise ValueError("mode must be expansion or amplification")
        if self.mode == "amplification" and self.amp is None:
            raise ValueError("amplification mode needs a plan")

    @property
    def cap(self) -> float:
        return 2.0 / 2.0**self.n if self.p_max is None else self.p_max

    @property
    def layer_count(self) -> int:
        return self.depth + (2 if self.final_pairs else 1)


def latency_model(config: ProtocolConfig, rng) -> tuple[tuple[float, ...], float]:
    """Per-layer streaming latencies and the basis-to-bitstring latency T_M."""
    return config.latency.draw(rng, config.layer_count)


@dataclass(frozen=True)
class RoundRecord:
    """One protocol round; timeout implies bitstring 0^n and contribution 0."""

    index: int
    circuit_seed: int
    gate_keys: int | None
    basis: int
    bitstring: int
    timeout: bool
    latency: float
    tested: bool
    probability: float | None
    contribution: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRecord":
        return cls(**d)


@dataclass(frozen=True)
class Transcript:
    records: tuple[RoundRecord, ...]
    score: float
    accept: bool
    rounds: int
    tested_count: int
    timeout_count: int

    def summary(self) -> dict:
        return {
            "score": self.score,
            "accept": self.accept,
            "rounds": self.rounds,
            "tested_count": self.tested_count,
            "timeout_count": self.timeout_count,
        }


def _rebuild_circuit(config: ProtocolConfig, record: RoundRecord) -> CircuitSpec:
    circuit = gen_circuit(
        config.n,
        config.depth,
        config.pairs_per_layer,
        record.circuit_seed,
        config.final_pairs,
    )
    if record.gate_keys is not None:
        count = circuit.one_qubit_gate_count
        keys = [(record.gate_keys >> (3 * i)) & 7 for i in range(count)]
        circuit = circuit.with_gate_keys(keys)
    return circuit


def _contribution(config: ProtocolConfig, p: float) -> float:
    scale = 2.0**config.n / (config.gamma * config.l_rounds)
    return scale * min(p, config.cap)


def verify_transcript(config: ProtocolConfig, transcript: Transcript) -> bool:
    """Recompute every tested contribution and the score, bit-exactly."""
    total = 0.0
    tested = timeouts = 0
    for rec in transcript.records:
        timeouts += rec.timeout
        if rec.timeout and (rec.bitstring != 0 or rec.contribution != 0.0):
            return False
        if not rec.tested:
            if rec.contribution != 0.0:
                return False
            continue
        tested += 1
        if rec.timeout:
            if rec.probability != 0.0:
                return False
            continue
        circuit = _rebuild_circuit(config, rec)
        basis = BasisMask.from_int(config.n, rec.basis)
        state = evolve(circuit, basis)
        p = float(abs(state.amplitude(rec.bitstring)) ** 2)
        if p != rec.probability or _contribution(config, p) != rec.contribution:
            return False
        total += rec.contribution
    return (
        total == transcript.score
        and tested == transcript.tested_count
        and timeouts == transcript.timeout_count
        and transcript.accept == (transcript.score >= config.s_star)
    )


# ---------------------------------------------------------------------------
# The round loop


def _respond(server: ServerModel, state, rng, n: int | None = None) -> int | None:
    if server.kind == "timeout":
        return None
    if server.kind == "uniform":
        return int(rng.integers(0, 1 << (state.n if state is not None else n)))
    return int(honest_sample(state, rng, server.phi, 1)[0])


def _bit_reader(block: BitBlock):
    pos = 0

    def take(width: int) -> int:
        nonlocal pos
        if pos + width > len(block):
            raise ValueError("randomness block exhausted")
        out = (block.value >> pos) & ((1 << width) - 1)
        pos += width
        return out

    return take


def _run_rounds(
    config: ProtocolConfig,
    server: ServerModel,
    rng,
    *,
    b_take=None,
    keys_take=None,
    responder=None,
) -> Transcript:
    n = config.n
    thresh = round(config.gamma * (1 << VALIDATION_BITS))
    records: list[RoundRecord] = []
    score = 0.0
    tested_count = timeout_count = 0
    batch_latency: tuple[tuple[float, ...], float] | None = None

    for i in range(config.l_rounds):
        if i % config.batch_size == 0:
            batch_latency = latency_model(config, rng)
        t_m = batch_latency[1]

        if keys_take is None:
            seed = int(rng.integers(0, 2**63))
            circuit = gen_circuit(
                n, config.depth, config.pairs_per_layer, seed, config.final_pairs
            )
            packed_keys = None
        else:
            seed = config.layout_seed + i
            circuit = gen_circuit(
                n, config.depth, config.pairs_per_layer, seed, config.final_pairs
            )
            count = circuit.one_qubit_gate_count
            packed_keys = keys_take(3 * count)
            keys = [(packed_keys >> (3 * j)) & 7 for j in range(count)]
            circuit = circuit.with_gate_keys(keys)

        if b_take is None:
            basis_int = int(rng.integers(0, 1 << n))
            tested = bool(rng.random() < config.gamma)
        else:
            basis_int = b_take(n)
            tested = b_take(VALIDATION_BITS) < thresh
        basis = BasisMask.from_int(n, basis_int)

        # Evolve lazily: a late round's reply is discarded unread, and an
        # untested round never needs its probability.
        state = None

        def full_state():
            nonlocal state
            if state is None:
                state = evolve(circuit, basis)
            return state

        if t_m > config.t_batch:
            reply = None
        elif responder is None:
            if server.kind == "honest":
                reply = _respond(server, full_state(), rng)
            else:
                reply = _respond(server, None, rng, n)
        else:
            reply = responder(circuit, basis)
        timeout = reply is None

        if timeout:
            bitstring, p = 0, (0.0 if tested else None)
            contribution = 0.0
        else:
            bitstring = int(reply)
            if tested:
                p = float(abs(full_state().amplitude(bitstring)) ** 2)
                contribution = _contribution(config, p)
            else:
                p, contribution = None, 0.0

        score += contribution
        tested_count += tested
        timeout_count += timeout
        records.append(
            RoundRecord(
                index=i,
                circuit_seed=seed,
                gate_keys=packed_keys,
                basis=basis_int,
                bitstring=bitstring,
                timeout=timeout,
                latency=t_m,
                tested=tested,
                probability=p,
                contribution=contribution,
            )
        )

    return Transcript(
        records=tuple(records),
        score=score,
        accept=score >= config.s_star,
        rounds=config.l_rounds,
        tested_count=tested_count,
        timeout_count=timeout_count,
    )


def run_expansion(
    config: ProtocolConfig,
    server: ServerModel | None = None,
    rng=None,
    *,
    seed: int | None = None,
    responder=None,
) -> Transcript:
    """Run the expansion protocol: verifier randomness drives bases and tests."""
    if rng is None:
        rng = np.random.Generator(np.random.Philox(0 if seed is None else seed))
    return _run_rounds(
        config, server or config.server, rng, responder=responder
    )


# ---------------------------------------------------------------------------
# Amplification pipeline


@dataclass(frozen=True)
class AmplificationResult:
    accept: bool
    transcript: Transcript
    blocks: tuple[BitBlock, ...]
    raz: RazSpec
    circulant: CirculantSpec
    b_mode: str

    def summary(self) -> dict:
        out = self.transcript.summary()
        out.update(
            {
                "blocks": len(self.blocks),
                "block_bits": self.circulant.m if self.blocks else 0,
                "b_mode": self.b_mode,
                "two_source": {
                    "n1": self.raz.n1,
                    "n2": self.raz.n2,
                    "m": self.raz.m,
                    "l": self.raz.l,
                    "p": self.raz.p,
                },
            }
        )
        return out


def _register_degree(bits: int) -> int:
    """Smallest catalog degree whose doubled register holds `bits` bits."""
    for degree in sorted(TRINOMIAL_CATALOG):
        if 2 * degree >= bits:
            return degree
    raise ValueError(f"no catalog register holds {bits} bits")


def build_validation_block(
    config: ProtocolConfig,
    plan: AmplificationPlan,
    weak: WeakSourceSpec,
    budget: SoundnessBudget,
    rng,
) -> BitBlock:
    """Block B: per-round basis bits plus quantized validation flags.

    Direct mode reads the weak source as-is (exact when the source is
    uniform). Two-source mode extracts B from two fresh weak blocks; margin
    costs grow with the block length, so this mode only executes for short
    runs on the catalog registers.
    """
    b_bits = config.l_rounds * (config.n + VALIDATION_BITS)
    if plan.b_mode == "direct":
        return weak_bits(weak, b_bits, rng)
    alpha = weak.alpha
    spec_b = None
    for deg_b in sorted(TRINOMIAL_CATALOG):
        if deg_b < b_bits:
            continue
        spec_b = raz_feasible(
            2 * deg_b,
            alpha * 2 * deg_b,
            deg_b,
            alpha * deg_b,
            b_bits,
            budget.eps_ts,
            convention=plan.convention,
        )
        if spec_b is not None:
            break
    if spec_b is None:
        raise ValueError("block B extraction infeasible at this size")
    w1 = weak_bits(weak, spec_b.n1, rng)
    w2 = weak_bits(weak, spec_b.n2, rng)
    return two_source_extract(w1, w2, spec_b)


def _pack_outputs(records: tuple[RoundRecord, ...], n: int) -> BitBlock:
    """Round-major bit packing of returned strings, qubit 0 first."""
    value = 0
    pos = 0
    for rec in records:
        for j in range(n):
            value |= ((rec.bitstring >> (n - 1 - j)) & 1) << (pos + j)
        pos += n
    return BitBlock(value, pos, QUANTUM_TAG)


def run_amplification(
    config: ProtocolConfig,
    server: ServerModel | None = None,
    weak: WeakSourceSpec | None = None,
    budget: SoundnessBudget | None = None,
    rng=None,
    *,
    seed: int | None = None,
) -> AmplificationResult:
    """Weak-source-driven run, then the full extraction chain on acceptance.

    Gate keys are drawn straight from the weak source (3 bits per gate);
    block B supplies bases and validation flags, either directly (uniform
    weak source) or through a dedicated two-source extraction; the returned
    bits and a fresh weak block feed the two-source extractor whose output
    seeds big_m circulant extractions. Infeasible extractor parameters are
    rejected before any round runs.
    """
    if config.amp is None:
        raise ValueError("config has no amplification plan")
    plan = config.amp
    weak = weak or WeakSourceSpec()
    if budget is None:
        raise ValueError("amplification needs a soundness budget")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(0 if seed is None else seed))

    alpha = weak.alpha
    quantum_bits = config.l_rounds * config.n
    degree = _register_degree(quantum_bits)
    n1, n2 = 2 * degree, degree
    spec = raz_feasible(
        n1,
        plan.declared_beta * quantum_bits,
        n2,
        alpha * n2,
        plan.n_in + 1,
        budget.eps_ts,
        convention=plan.convention,
    )
    if spec is None:
        raise ValueError("two-source extraction infeasible at the declared rates")
    circ = circulant_params(plan.n_in, alpha * plan.n_in, budget.eps_seeded)

    b_block = build_validation_block(config, plan, weak, budget, rng)

    keys_bits = config.l_rounds * _key_bits_per_round(config)
    keys_block = weak_bits(weak, keys_bits, rng)

    transcript = _run_rounds(
        config,
        server or config.server,
        rng,
        b_take=_bit_reader(b_block),
        keys_take=_bit_reader(keys_block),
    )
    if not transcript.accept:
        return AmplificationResult(
            accept=False,
            transcript=transcript,
            blocks=(),
            raz=spec,
            circulant=circ,
            b_mode=plan.b_mode,
        )

    z_block = _pack_outputs(transcript.records, config.n).pad(n1)
    x_block = weak_bits(weak, n2, rng)
    seed_block = two_source_extract(z_block, x_block, spec)

    blocks = []
    for _ in range(plan.big_m):
        y = weak_bits(weak, plan.n_in, rng)
        blocks.append(circulant_extract(y, seed_block, circ.m))
    return AmplificationResult(
        accept=True,
        transcript=transcript,
        blocks=tuple(blocks),
        raz=spec,
        circulant=circ,
        b_mode=plan.b_mode,
    )


def _key_bits_per_round(config: ProtocolConfig) -> int:
    probe = gen_circuit(
        config.n, config.depth, config.pairs_per_layer, 0, config.final_pairs
    )
    return 3 * probe.one_qubit_gate_count


# ---------------------------------------------------------------------------
# Persistence and config parsing


def save_transcript(transcript: Transcript, records_path, summary_path) -> None:
    """JSON-lines of round records plus a separate summary JSON."""
    with open(records_path, "w", encoding="utf-8") as fh:
        for rec in transcript.records:
            fh.write(json.dumps(rec.to_dict()) + "\n")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(transcript.summary(), fh, indent=2)
        fh.write("\n")


def load_transcript(records_path, summary_path) -> Transcript:
    records = []
    with open(records_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(RoundRecord.from_dict(json.loads(line)))
    with open(summary_path, encoding="utf-8") as fh:
        s = json.load(fh)
    return Transcript(
        records=tuple(records),
        score=s["score"],
        accept=s["accept"],
        rounds=s["rounds"],
        tested_count=s["tested_count"],
        timeout_count=s["timeout_count"],
    )


_CONFIG_FIELDS = {
    "n": int,
    "l_rounds": int,
    "gamma": float,
    "s_star": float,
    "p_max": float,
    "t_batch": float,
    "batch_size": int,
    "depth": int,
    "pairs_per_layer": int,
    "final_pairs": int,
    "layout_seed": int,
    "mode": str,
}


def parse_config(text: str) -> dict:
    """Flat key = value lines; # comments; numbers, booleans, bare strings."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip().strip('"')
        if val.lower() in ("true", "false"):
            out[key] = val.lower() == "true"
            continue
        try:
            out[key] = int(val)
        except ValueError:
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


def config_from_mapping(mapping: dict, base: ProtocolConfig | None = None) -> ProtocolConfig:
    """Apply flat config keys over a base config; unknown keys rejected."""
    config = base or ProtocolConfig()
    updates = {}
    for key, value in mapping.items():
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"unknown config key: {key}")
        updates[key] = _CONFIG_FIELDS[key](value)
    return replace(config, **updates)


# ---------------------------------------------------------------------------
# Loopback socket transport


def _read_frame(conn) -> bytes | None:
    header = b""
    while len(header) < 4:
        chunk = conn.recv(4 - len(header))
        if not chunk:
            return None
        header += chunk
    length = int.from_bytes(header, "little")
    body = b""
    while len(body) < length:
        chunk = conn.recv(length - len(body))
        if not chunk:
            return None
        body += chunk
    return body


def _write_frame(conn, payload: bytes) -> None:
    conn.sendall(len(payload).to_bytes(4, "little") + payload)


def serve_loopback(server: ServerModel, *, seed: int = 0):
    """Serve rounds on a loopback socket; returns (port, stop callable).

    One frame per round: request {"circuit": ..., "basis": int}, response
    {"bitstring": int}. Runs in a daemon thread until stopped.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind(("127.0.0.1", 0))
    sock.listen(1)
    port = sock.getsockname()[1]
    stop = threading.Event()

    def loop() -> None:
        sock.settimeout(0.2)
        while not stop.is_set():
            try:
                conn, _ = sock.accept()
            except socket.timeout:
                continue
            with conn:
                while not stop.is_set():
                    frame = _read_frame(conn)
                    if frame is None:
                        break
                    req = json.loads(frame.decode("utf-8"))
                    circuit = circuit_from_json(req["circuit"])
                    basis = BasisMask.from_int(circuit.n, req["basis"])
                    state = evolve(circuit, basis)
                    reply = _respond(server, state, rng)
                    _write_frame(
                        conn, json.dumps({"bitstring": reply}).encode("utf-8")
                    )
        sock.close()

    thread = threading.Thread(target=loop, daemon=True)
    thread.start()

    def shutdown() -> None:
        stop.set()
        thread.join(timeout=2.0)

    return port, shutdown


def socket_responder(port: int):
    """Responder closure speaking the loopback framing; use as a context manager."""

    class _Responder:
        def __enter__(self):
            self.conn = socket.create_connection(("127.0.0.1", port))
            return self

        def __exit__(self, *exc):
            self.conn.close()
            return False

        def __call__(self, circuit: CircuitSpec, basis: BasisMask) -> int | None:
            payload = json.dumps(
                {"circuit": circuit_to_json(circuit), "basis": basis.to_int()}
            ).encode("utf-8")
            _write_frame(self.conn, payload)
            frame = _read_frame(self.conn)
            if frame is None:
                return None
            return json.loads(frame.decode("utf-8"))["bitstring"]

    return _Responder()

"""Command-line front door: simulation, certification, cost, extraction.

Every verb reads an optional key=value config file, applies flag overrides,
runs one module pipeline, writes JSON/CSV/JSON-lines artifacts, and prints a
one-line summary. Exit codes: 0 success, 1 protocol abort or infeasible
parameters, 2 usage errors. Artifacts carry no timestamps, so identical
inputs and seed reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys

import numpy as np

from .adversary import honest_mc_p, frugal_mc_p, top_mc_p, top_moments
from .analysis import (
    FULL_SCALE_PROFILE,
    ResourceProfile,
    classical_fidelity_budget,
    geography,
    optimize_budget,
    slice_game,
    slice_plan,
    slice_prepare,
    synthetic_slice_table,
    save_slice_table,
    load_slice_table,
    validation_gpu_hours,
    verification_advantage,
)
from .entropy import (
    AdHocParams,
    OracleParams,
    adhoc_min_entropy,
    eat_min_entropy,
    honest_score,
    restricted_min_entropy,
)
from .extract import (
    circulant_params,
    raz_feasible,
    required_alpha,
    soundness_split,
    two_source_extract,
)
from .gf2 import BitBlock, random_block
from .protocol import (
    AmplificationPlan,
    FULL_SCALE_LATENCY,
    LatencyModel,
    ProtocolConfig,
    ServerModel,
    WeakSourceSpec,
    config_from_mapping,
    parse_config,
    run_amplification,
    run_expansion,
    save_transcript,
)

__all__ = ["PRESETS", "run_command", "main"]

_EPS_TOTAL = 1e-3
_EPS_RESIDUAL = 5e-8  # two-source, conditioning and seeded shares

# Operating points. The full-scale point is the published instantiation; the
# desk points fit in memory and drive the simulation verbs.
PRESETS: dict[str, dict] = {
    "full-n64": {
        "n": 64,
        "l_rounds": 23_651,
        "l_val": 11_933,
        "gamma": 0.59,
        "xeb": 0.586,
        "phi_adv": 0.65,
        "phi_classical": classical_fidelity_budget(),
        "eps_accept": 1e-3,
        "eps_smooth": (_EPS_TOTAL - _EPS_RESIDUAL) / 6.0,
        "f_adv": classical_fidelity_budget(),
        "distance": 3_000_000.0,
        "t_m": 0.03,
        "t_pvc": 9.8e5,
        "x_machines": 5.0,
        "s_star": honest_score(0.586, 64),
        "server_phi": 0.586,
        "depth": 8,
        "pairs_per_layer": 32,
        "final_pairs": 20,
    },
    "desk-n12": {
        "n": 12,
        "l_rounds": 500,
        "l_val": 250,
        "gamma": 0.5,
        "xeb": 0.3,
        "phi_adv": 0.95,
        "phi_classical": 0.0,
        "eps_accept": 1e-3,
        "eps_smooth": 1e-4,
        "f_adv": 0.0,
        "distance": 10.0,
        "t_m": 0.03,
        "t_pvc": 1.0,
        "x_machines": 1.0,
        "s_star": 1.1,
        "server_phi": 0.9,
        "depth": 8,
        "pairs_per_layer": 4,
        "final_pairs": 6,
    },
}
for _n, _l in ((14, 400), (16, 300)):
    _d = dict(PRESETS["desk-n12"])
    _d.update({"n": _n, "l_rounds": _l, "l_val": _l // 2, "pairs_per_layer": _n // 3})
    PRESETS[f"desk-n{_n}"] = _d
_PRESET_ALIASES = {"paper-n64": "full-n64"}


def _preset(name: str) -> dict:
    key = _PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    return dict(PRESETS[key])


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _rng(seed: int):
    return np.random.Generator(np.random.Philox(seed))


def _parse_server(text: str) -> ServerModel:
    kind, _, phi = text.partition(":")
    return ServerModel(kind, float(phi) if phi else 1.0)


def _parse_weak(text: str) -> WeakSourceSpec:
    kind, _, rest = text.partition(":")
    if kind == "uniform":
        return WeakSourceSpec()
    if kind == "iid":
        return WeakSourceSpec(kind="iid", p1=float(rest))
    if kind == "block":
        biases = tuple(float(x) for x in rest.split(","))
        return WeakSourceSpec(kind="block", period=len(biases), pattern=biases)
    raise ValueError(f"unknown weak source {text!r}")


def _config_from_args(args, mode: str) -> ProtocolConfig:
    base = ProtocolConfig()
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            base = config_from_mapping(parse_config(fh.read()))
    preset = _preset(args.preset) if getattr(args, "preset", None) else None
    updates: dict = {}
    if preset is not None:
        updates = {
            "n": preset["n"],
            "l_rounds": preset["l_rounds"],
            "gamma": preset["gamma"],
            "s_star": preset["s_star"],
            "depth": preset["depth"],
            "pairs_per_layer": preset["pairs_per_layer"],
            "final_pairs": preset["final_pairs"],
        }
    for flag, fieldname in (
        ("n", "n"),
        ("rounds", "l_rounds"),
        ("gamma", "gamma"),
        ("s_star", "s_star"),
        ("t_batch", "t_batch"),
        ("batch", "batch_size"),
        ("depth", "depth"),
        ("pairs", "pairs_per_layer"),
        ("final_pairs", "final_pairs"),
        ("layout_seed", "layout_seed"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[fieldname] = value
    if (
        "n" in updates
        and preset is None
        and args.config is None
        and getattr(args, "pairs", None) is None
        and getattr(args, "final_pairs", None) is None
    ):
        # keep the layer geometry inside the register when only n moves
        updates.setdefault("pairs_per_layer", updates["n"] // 3)
        updates.setdefault("final_pairs", updates["n"] // 2)
    updates["mode"] = mode
    if mode == "amplification":
        updates["amp"] = AmplificationPlan(
            big_m=args.blocks, n_in=args.n_in, b_mode=args.b_mode
        )
    if args.latency == "full-scale":
        updates["latency"] = FULL_SCALE_LATENCY
    server = _parse_server(args.server) if getattr(args, "server", None) else None
    if server is not None:
        updates["server"] = server
    elif preset is not None:
        updates["server"] = ServerModel("honest", preset["server_phi"])
    return dataclasses.replace(base, **updates)


# ---------------------------------------------------------------------------
# Verbs


def _cmd_simulate(args) -> int:
    config = _config_from_args(args, "expansion")
    transcript = run_expansion(config, rng=_rng(args.seed))
    out = args.out or "transcript"
    save_transcript(transcript, f"{out}.records.jsonl", f"{out}.summary.json")
    s = transcript.summary()
    print(
        f"{'accept' if s['accept'] else 'abort'} score={s['score']:.6f} "
        f"tested={s['tested_count']} timeouts={s['timeout_count']} "
        f"rounds={s['rounds']} -> {out}.records.jsonl"
    )
    return 0 if transcript.accept else 1


def _cmd_amplify(args) -> int:
    config = _config_from_args(args, "amplification")
    budget = soundness_split(
        args.eps_sou, args.eps_2, args.eps_ts, args.eps_seeded, args.blocks
    )
    result = run_amplification(
        config,
        weak=_parse_weak(args.weak),
        budget=budget,
        rng=_rng(args.seed),
    )
    payload = result.summary()
    payload["output_blocks_hex"] = [
        format(b.value, f"0{(b.nbits + 3) // 4}x") for b in result.blocks
    ]
    payload["soundness"] = budget
    out = args.out or "amplify.json"
    _write_json(payload, out)
    state = "accept" if result.accept else "abort"
    print(
        f"{state} score={result.transcript.score:.6f} blocks={len(result.blocks)}"
        f"x{result.circulant.m if result.blocks else 0} bits -> {out}"
    )
    return 0 if result.accept else 1


def _cmd_entropy(args) -> int:
    p = _preset(args.preset)
    for key in ("gamma", "phi_adv", "s_star", "xeb", "rounds", "l_val"):
        value = getattr(args, key, None)
        if value is not None:
            p[key if key != "rounds" else "l_rounds"] = value
    model = {"oracle-improved": "oracle-eat"}.get(args.model, args.model)
    if model == "restricted":
        report = restricted_min_entropy(
            p["xeb"],
            p["l_rounds"],
            p["l_val"],
            p["n"],
            f_adv=p["f_adv"],
            phi=1.0,
            eps_accept=p["eps_accept"],
            eps_smooth=p["eps_smooth"],
        )
    elif model == "oracle-eat":
        report = eat_min_entropy(
            OracleParams(
                n=p["n"],
                rounds=p["l_rounds"],
                s_star=p["s_star"],
                gamma=p["gamma"],
                eps_smooth=p["eps_smooth"],
                eps_accept=p["eps_accept"],
                phi_adv=p["phi_adv"],
                phi_classical=p["phi_classical"],
            )
        )
    elif model == "adhoc":
        report = adhoc_min_entropy(
            AdHocParams(
                n=p["n"],
                rounds=p["l_rounds"],
                l_val=p["l_val"],
                s_star=p["s_star"],
                phi_adv=p["phi_adv"],
                phi_classical=p["phi_classical"],
                eps_smooth=p["eps_smooth"],
            )
        )
    else:
        raise ValueError(f"unknown model {args.model!r}")
    out = args.out or f"entropy-{model}.json"
    _write_json(report, out)
    print(f"{model}: beta={report.beta:.6f} entropy={report.entropy:.1f} -> {out}")
    return 0


def _cmd_cost(args) -> int:
    p = _preset(args.preset)
    profile = ResourceProfile(
        t_m=p["t_m"],
        t_pvc=p["t_pvc"],
        x=p["x_machines"],
        distance=p["distance"],
    )
    xi, f_adv = verification_advantage(profile)
    factor, uncertainty = geography(p["t_m"], p["distance"])
    payload = {
        "preset": args.preset,
        "phi_classical": classical_fidelity_budget(
            p["x_machines"], p["t_m"], p["t_pvc"]
        ),
        "xi": xi,
        "f_adv_at_l_val": f_adv(p["l_val"]),
        "gpu_hours_at_l_val": validation_gpu_hours(p["l_val"], p["t_pvc"]),
        "geography_factor": factor,
        "position_uncertainty_m": uncertainty,
    }
    if args.optimize:
        outcome = optimize_budget(
            profile,
            args.phi if args.phi is not None else 1.0,
            xeb=p["xeb"],
            n=p["n"],
            l_rounds=p["l_rounds"],
            eps_accept=p["eps_accept"],
            eps_smooth=p["eps_smooth"],
        )
        payload["optimize"] = outcome
    out = args.out or "cost.json"
    _write_json(payload, out)
    print(
        f"xi={xi:.4g} f_adv={payload['f_adv_at_l_val']:.4g} "
        f"geo_factor={factor:.4f} -> {out}"
    )
    return 0


def _cmd_sweep(args) -> int:
    p = _preset(args.preset)
    rows = []
    for model in ("restricted", "oracle-eat", "adhoc"):
        flags = "ok"
        beta = entropy_bits = float("nan")
        try:
            if model == "restricted":
                r = restricted_min_entropy(
                    p["xeb"],
                    p["l_rounds"],
                    p["l_val"],
                    p["n"],
                    f_adv=p["f_adv"],
                    eps_accept=p["eps_accept"],
                    eps_smooth=p["eps_smooth"],
                )
                beta, entropy_bits = r.beta, r.entropy
            elif model == "oracle-eat":
                r = eat_min_entropy(
                    OracleParams(
                        n=p["n"],
                        rounds=p["l_rounds"],
                        s_star=p["s_star"],
                        gamma=p["gamma"],
                        eps_smooth=p["eps_smooth"],
                        eps_accept=p["eps_accept"],
                        phi_adv=p["phi_adv"],
                        phi_classical=p["phi_classical"],
                    )
                )
                beta, entropy_bits = r.beta, r.entropy
                if not r.formal:
                    flags = "informal:" + ",".join(
                        k for k, v in r.checks.items() if not v
                    )
            else:
                r = adhoc_min_entropy(
                    AdHocParams(
                        n=p["n"],
                        rounds=p["l_rounds"],
                        l_val=p["l_val"],
                        s_star=p["s_star"],
                        phi_adv=p["phi_adv"],
                        phi_classical=p["phi_classical"],
                        eps_smooth=p["eps_smooth"],
                    )
                )
                beta, entropy_bits = r.beta, r.entropy
        except ValueError as exc:
            flags = f"infeasible: {exc}"
        rows.append(
            {
                "model": model,
                "n": p["n"],
                "s_star": p["s_star"],
                "gamma": p["gamma"],
                "phi_classical": p["phi_classical"],
                "phi_adv": p["phi_adv"],
                "beta": beta,
                "entropy": entropy_bits,
                "flags": flags,
            }
        )
    out = args.out or "sweep.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    print(f"{len(rows)} models -> {out}")
    return 0


def _cmd_extract(args) -> int:
    payload: dict = {}
    if args.alpha_for_beta is not None:
        alpha = required_alpha(args.alpha_for_beta, convention=args.convention)
        payload["required_alpha"] = {
            "beta": args.alpha_for_beta,
            "alpha": alpha,
            "convention": args.convention,
        }
    if args.circulant is not None:
        n_in, k, eps = args.circulant
        spec = circulant_params(int(n_in), k, eps)
        payload["circulant"] = spec
    if args.two_source_demo:
        rng = _rng(args.seed)
        spec = raz_feasible(
            6434, 3900.0, 3217, 3217.0, 29, 5e-3, convention="strict"
        )
        if spec is None:
            raise ValueError("demo registers infeasible")
        x1 = random_block(rng, spec.n1, "qm")
        x2 = random_block(rng, spec.n2, "wk")
        block = two_source_extract(x1, x2, spec)
        payload["two_source_demo"] = {
            "spec": spec,
            "output_hex": format(block.value, f"0{(block.nbits + 3) // 4}x"),
        }
    if not payload:
        raise ValueError(
            "nothing to do: pass --alpha-for-beta, --circulant or --two-source-demo"
        )
    out = args.out or "extract.json"
    _write_json(payload, out)
    print(f"{', '.join(payload)} -> {out}")
    return 0


def _cmd_slice_verify(args) -> int:
    rng = _rng(args.seed)
    if args.table:
        table = load_slice_table(args.table)
    else:
        raw = synthetic_slice_table(rng, args.l_val, args.slices, args.n)
        table = slice_prepare(raw, None, args.n, args.l_val)
    if args.save_table:
        save_slice_table(table, args.save_table)
    plan = slice_plan(table, args.f)
    delta = args.delta if args.delta is not None else math.log(2.0) / plan.c_slice
    empirical, predicted = slice_game(
        table, plan, ([(0, 0)], [delta]), rng, args.trials
    )
    payload = {
        "n_slices": table.n_slices,
        "l_val": table.l_val,
        "a_max": table.a_max,
        "f": args.f,
        "c_slice": plan.c_slice,
        "expected_verifications": plan.budget,
        "injected_delta": delta,
        "escape_empirical": empirical,
        "escape_predicted": predicted,
        "trials": args.trials,
    }
    out = args.out or "slice-verify.json"
    _write_json(payload, out)
    print(
        f"c={plan.c_slice:.4g} escape {empirical:.4f} vs {predicted:.4f} -> {out}"
    )
    return 0


def _cmd_adversary_dist(args) -> int:
    rng = _rng(args.seed)
    if args.model == "honest":
        x = honest_mc_p(rng, args.phi, args.count)
        predicted_mean = 1.0 + args.phi
    elif args.model == "frugal":
        x = frugal_mc_p(rng, args.phi, args.count)
        predicted_mean = 1.0 + args.phi
    elif args.model == "top":
        x = top_mc_p(rng, args.phi, args.k, args.count)
        mean, var = top_moments(args.phi, args.k, args.n)
        predicted_mean = mean * 2.0**args.n
    else:
        raise ValueError(f"unknown adversary model {args.model!r}")
    payload = {
        "model": args.model,
        "phi": args.phi,
        "count": args.count,
        "sample_mean": float(np.mean(x)),
        "sample_var": float(np.var(x)),
        "predicted_mean": predicted_mean,
    }
    if args.model == "top":
        payload["k"] = args.k
        payload["predicted_var"] = var * 4.0**args.n
    out = args.out or "adversary-dist.json"
    _write_json(payload, out)
    print(
        f"{args.model}: mean={payload['sample_mean']:.4f} "
        f"predicted={predicted_mean:.4f} -> {out}"
    )
    return 0


# ---------------------------------------------------------------------------
# Parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certrand",
        description="Certified-randomness toolkit: simulate, certify, extract.",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1, help="accepted for "
                        "interface stability; computations are single-threaded")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, preset_default=None):
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--preset", default=preset_default)

    p = sub.add_parser("simulate", help="run the expansion protocol")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--rounds", "--L", dest="rounds", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--s-star", dest="s_star", type=float)
    p.add_argument("--t-batch", dest="t_batch", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--final-pairs", dest="final_pairs", type=int)
    p.add_argument("--layout-seed", dest="layout_seed", type=int)
    p.add_argument("--server", default="honest:1.0")
    p.add_argument("--latency", choices=("fixed", "full-scale"), default="fixed")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("amplify", help="run the weak-source amplification pipeline")
    common(p, "desk-n12")
    p.add_argument("--n", type=int)
    p.add_argument("--rounds", "--L", dest="rounds", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--s-star", dest="s_star", type=float)
    p.add_argument("--t-batch", dest="t_batch", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--final-pairs", dest="final_pairs", type=int)
    p.add_argument("--layout-seed", dest="layout_seed", type=int)
    p.add_argument("--server", default=None)
    p.add_argument("--latency", choices=("fixed", "full-scale"), default="fixed")
    p.add_argument("--weak", default="uniform")
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--n-in", dest="n_in", type=int, default=28)
    p.add_argument("--b-mode", dest="b_mode",
                   choices=("direct", "two-source"), default="direct")
    p.add_argument("--eps-sou", dest="eps_sou", type=float, default=0.1)
    p.add_argument("--eps-2", dest="eps_2", type=float, default=5e-3)
    p.add_argument("--eps-ts", dest="eps_ts", type=float, default=5e-3)
    p.add_argument("--eps-seeded", dest="eps_seeded", type=float, default=2.0**-10)
    p.set_defaults(func=_cmd_amplify)

    p = sub.add_parser("entropy", help="evaluate one certification model")
    common(p, "full-n64")
    p.add_argument("--model", default="oracle-eat",
                   choices=("restricted", "oracle-eat", "oracle-improved", "adhoc"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--phi-adv", dest="phi_adv", type=float)
    p.add_argument("--s-star", dest="s_star", type=float)
    p.add_argument("--xeb", type=float)
    p.add_argument("--rounds", type=int)
    p.add_argument("--l-val", dest="l_val", type=int)
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("sweep", help="all certification models at a preset, CSV")
    common(p, "full-n64")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("cost", help="verification-advantage and geography report")
    common(p, "full-n64")
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--phi", type=float, default=None)
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("extract", help="extractor parameter queries and demos")
    common(p)
    p.add_argument("--alpha-for-beta", dest="alpha_for_beta", type=float)
    p.add_argument("--convention", choices=("published", "strict"),
                   default="published")
    p.add_argument("--circulant", nargs=3, type=float, metavar=("N_IN", "K", "EPS"))
    p.add_argument("--two-source-demo", dest="two_source_demo", action="store_true")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("slice-verify", help="low-budget slice verification game")
    common(p)
    p.add_argument("--l-val", dest="l_val", type=int, default=300)
    p.add_argument("--slices", type=int, default=64)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--f", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--table", default=None)
    p.add_argument("--save-table", dest="save_table", default=None)
    p.set_defaults(func=_cmd_slice_verify)

    p = sub.add_parser("adversary-dist", help="score-distribution Monte Carlo")
    common(p)
    p.add_argument("--model", choices=("honest", "frugal", "top"), default="honest")
    p.add_argument("--phi", type=float, default=0.8)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--count", type=int, default=100_000)
    p.set_defaults(func=_cmd_adversary_dist)

    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""Command-line interface.

Subcommands: validate, solve, analyze, normalize, converge, generate,
sweep. Exit codes: 0 ok, 1 internal error, 2 input error, 3 assumption
violated under --strict. MDP_GEOM_THREADS caps sweep parallelism;
MDP_GEOM_BACKEND selects the kernel backend.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__, classic, geometry, kernels
from .chains import (
    classify_chain,
    primitivity_certificate,
    stationary_distribution,
    unichain_by_invertibility,
)
from .convergence import verify_contraction
from .errors import (
    AssumptionViolatedError,
    EnumerationTooLargeError,
    InvalidPolicyError,
    MdpError,
    ModelFormatError,
    NotPrimitiveError,
    NotUnichainError,
)
from .generate import GeneratorSpec, SplitMix64, generate_model, uniform_vector, PRNG_NAME
from .model import MdpModel, Policy, policy_kernel, validate_model
from .modelfile import emit_model, parse_model
from .reporting import _json_safe, policy_hash, report_dict, trace_csv

V0_SEED_XOR = 0xA5A5A5A5A5A5A5A5


@dataclasses.dataclass
class EvaluationResult:
    """Solve output: the optimal policy with values under its criterion."""

    criterion: str
    policy: list
    unique: bool
    values: list | None = None
    gain: float | None = None
    bias: list | None = None
    anchor_state: int | None = None
    new_values: list | None = None
    C: float | None = None
    v_sigma: float | None = None


def _read_model(path: str) -> MdpModel:
    return parse_model(Path(path).read_text())


def _parse_policy_arg(text: str, model: MdpModel) -> Policy:
    try:
        choice = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise InvalidPolicyError(f"bad --policy value {text!r}") from exc
    pi = Policy(np.array(choice, dtype=np.int64))
    from .model import check_policy

    check_policy(model, pi)
    return pi


def _print_json(doc: dict) -> None:
    print(json.dumps(_json_safe(doc), indent=2))


def _provenance(**extra) -> dict:
    base = {
        "package": "mdpgeom",
        "version": __version__,
        "prng": PRNG_NAME,
        "backend": kernels.active_backend(),
    }
    base.update(extra)
    return base


def _cmd_validate(args) -> int:
    try:
        model = parse_model(Path(args.file).read_text())
    except ModelFormatError as exc:
        violations = getattr(exc, "violations", None) or [str(exc)]
        for v in violations:
            print(v, file=sys.stderr)
        return 2
    # parse_model already validates; report success explicitly
    violations = validate_model(model)
    if violations:  # pragma: no cover - parse_model would have raised
        for v in violations:
            print(v, file=sys.stderr)
        return 2
    print(f"valid: {model.n} states, {model.m} SAPs, gamma={model.gamma!r}")
    return 0


def _solve_result(model: MdpModel, criterion: str, anchor: int) -> EvaluationResult:
    if criterion == "auto":
        criterion = "average" if model.is_average_reward else "discounted"
    if criterion == "discounted" and model.is_average_reward:
        raise MdpError("--criterion discounted needs gamma < 1")
    if criterion == "average" and not model.is_average_reward:
        raise MdpError("--criterion average needs gamma = 1")
    result = classic.optimal_policy(model)
    pv, consts = geometry.evaluate_policy(model, result.policy)
    out = EvaluationResult(
        criterion=criterion,
        policy=list(result.policy.as_tuple()),
        unique=result.unique,
        new_values=[float(x) for x in pv.values],
        C=consts.C,
        v_sigma=consts.v_sigma,
    )
    if criterion == "discounted":
        out.values = [float(x) for x in result.values]
    else:
        out.gain = result.gain
        out.bias = [float(x) for x in geometry.bias(pv, consts, anchor).values]
        out.anchor_state = anchor
    return out


def _cmd_solve(args) -> int:
    model = _read_model(args.file)
    result = _solve_result(model, args.criterion, args.anchor)
    _print_json(dataclasses.asdict(result))
    return 0


def _cmd_analyze(args) -> int:
    model = _read_model(args.file)
    pi = _parse_policy_arg(args.policy, model)
    p = policy_kernel(model, pi)
    cls = classify_chain(p)
    doc = {
        "policy": list(pi.as_tuple()),
        "policy_hash": policy_hash(pi.as_tuple()),
        "classification": {
            "closed_class_count": cls.closed_class_count,
            "transient_states": sorted(cls.transient_states),
            "is_unichain": cls.is_unichain,
        },
        "unichain_by_invertibility": unichain_by_invertibility(p),
    }
    try:
        doc["stationary_distribution"] = [float(x) for x in stationary_distribution(p)]
    except NotUnichainError:
        doc["stationary_distribution"] = None
    try:
        cert = primitivity_certificate(p)
        doc["primitivity"] = {"exponent": cert.exponent, "omega": cert.omega}
    except NotPrimitiveError:
        doc["primitivity"] = None
    _print_json(doc)
    return 0


def _cmd_normalize(args) -> int:
    model = _read_model(args.file)
    if args.policy is not None:
        pi = _parse_policy_arg(args.policy, model)
    else:
        pi = classic.optimal_policy(model).policy
    normalized = geometry.normalize_rewards(model, pi)
    Path(args.output).write_text(emit_model(normalized))
    print(f"wrote {args.output} (normalized against policy {list(pi.as_tuple())})")
    return 0


def _cmd_converge(args) -> int:
    model = _read_model(args.file)
    if args.v0 == "basis":
        v0 = np.zeros(model.n)
        v0[0] = 1.0
    else:
        v0 = uniform_vector(SplitMix64(args.seed ^ V0_SEED_XOR), model.n)
    report = verify_contraction(model, v0=v0, trace_steps=args.steps)
    provenance = _provenance(
        command="converge",
        input=args.file,
        v0_mode=args.v0,
        seed=args.seed,
        steps=args.steps,
    )
    doc = report_dict(report, provenance)
    if args.output:
        outdir = Path(args.output)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "report.json").write_text(json.dumps(doc, indent=2) + "\n")
        (outdir / "trace.csv").write_text(trace_csv(report))
        print(f"wrote {outdir / 'report.json'} and {outdir / 'trace.csv'}")
    else:
        _print_json(doc)
    if args.strict and (report.diagnostics is None or not report.diagnostics.all_pass):
        failed = [
            name
            for name in ("unique", "unichain", "aperiodic")
            if report.diagnostics is None or not getattr(report.diagnostics, name)
        ]
        print(f"assumption diagnostics failed: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


def _cmd_generate(args) -> int:
    spec = GeneratorSpec(
        n=args.n,
        saps_per_state=args.saps,
        gamma=args.gamma,
        reward_range=(args.reward_lo, args.reward_hi),
        sparsity=args.sparsity,
        seed=args.seed,
    )
    result = generate_model(spec)
    text = emit_model(result.model)
    if args.output:
        Path(args.output).write_text(text)
        note = f", {len(result.repaired_rows)} repaired rows" if result.repaired_rows else ""
        print(f"wrote {args.output} ({result.model.n} states{note})")
    else:
        sys.stdout.write(text)
    return 0


def _thread_cap() -> int:
    raw = os.environ.get("MDP_GEOM_THREADS", "").strip()
    if raw:
        cap = int(raw)
        if cap < 1:
            raise ValueError("MDP_GEOM_THREADS must be a positive integer")
        return cap
    return min(8, os.cpu_count() or 1)


def _sweep_trial(spec: GeneratorSpec, base_seed: int, trial: int) -> dict:
    seed = base_seed + trial
    trial_spec = dataclasses.replace(spec, seed=seed)
    model = generate_model(trial_spec).model
    v0 = uniform_vector(SplitMix64(seed ^ V0_SEED_XOR), model.n)
    report = verify_contraction(model, v0=v0)
    diag = report.diagnostics
    consts = report.constants
    excluded = diag is None or not diag.all_pass
    return {
        "trial": trial,
        "seed": seed,
        "n": model.n,
        "gamma": model.gamma,
        "unique": diag.unique if diag else None,
        "unichain": diag.unichain if diag else None,
        "aperiodic": diag.aperiodic if diag else None,
        "exponent": report.exponent,
        "delta": consts.delta if consts else None,
        "omega": consts.omega if consts else None,
        "phi": consts.phi if consts else None,
        "tau": consts.tau if consts else None,
        "degenerate": consts.degenerate if consts else None,
        "converged_early": report.converged_early,
        "span0": report.span_trace[0],
        "span_final": report.span_trace[-1],
        "bound_satisfied": report.bound_satisfied,
        "sanity_bound_satisfied": report.sanity_bound_satisfied,
        "excluded": excluded,
    }


_SWEEP_COLUMNS = [
    "trial",
    "seed",
    "n",
    "gamma",
    "unique",
    "unichain",
    "aperiodic",
    "exponent",
    "delta",
    "omega",
    "phi",
    "tau",
    "degenerate",
    "converged_early",
    "span0",
    "span_final",
    "bound_satisfied",
    "sanity_bound_satisfied",
    "excluded",
]


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cmd_sweep(args) -> int:
    spec = GeneratorSpec.from_dict(json.loads(Path(args.spec).read_text()))
    trials = args.trials
    workers = min(_thread_cap(), max(1, trials))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _sweep_trial(spec, args.seed, t), range(trials)))
    else:
        rows = [_sweep_trial(spec, args.seed, t) for t in range(trials)]

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = [",".join(_SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in _SWEEP_COLUMNS))
    (outdir / "sweep.csv").write_text("\n".join(lines) + "\n")

    excluded = sum(1 for r in rows if r["excluded"])
    counted = [r for r in rows if not r["excluded"]]
    failures = sum(1 for r in counted if r["bound_satisfied"] is False)
    summary = {
        "sweep_version": 1,
        "trials": trials,
        "excluded": excluded,
        "exclusion_rate": excluded / trials if trials else 0.0,
        "bound_failures": failures,
        "rows": rows,
        "provenance": _provenance(
            command="sweep", seed=args.seed, spec=spec.to_dict(), trials=trials
        ),
    }
    (outdir / "sweep.json").write_text(json.dumps(_json_safe(summary), indent=2) + "\n")
    print(
        f"wrote {outdir / 'sweep.csv'} and {outdir / 'sweep.json'} "
        f"({trials} trials, {excluded} excluded, {failures} bound failures)"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdpgeom",
        description="Geometric policy evaluation and advantage-based value iteration for MDPs",
    )
    parser.add_argument("--version", action="version", version=f"mdpgeom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file against the data invariants")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="compute the optimal policy and its values")
    p.add_argument("file")
    p.add_argument("--criterion", choices=("auto", "discounted", "average"), default="auto")
    p.add_argument("--anchor", type=int, default=0, help="bias anchor state (gamma = 1)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("analyze", help="classify the chain induced by a policy")
    p.add_argument("file")
    p.add_argument("--policy", required=True, help="comma-separated SAP indices, one per state")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("normalize", help="rewrite rewards as advantages against a policy")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--policy", help="defaults to the computed optimal policy")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("converge", help="run the span-contraction verification pipeline")
    p.add_argument("file")
    p.add_argument("--v0", choices=("basis", "random"), default="basis")
    p.add_argument("--steps", type=int, default=None, help="extend the recorded trace")
    p.add_argument("--seed", type=int, default=0, help="seed for --v0 random")
    p.add_argument("--strict", action="store_true", help="exit 3 when diagnostics fail")
    p.add_argument("-o", "--output", help="directory for report.json and trace.csv")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("generate", help="generate a random model deterministically")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--saps", type=int, required=True, help="SAPs per state")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--reward-lo", type=float, default=0.0)
    p.add_argument("--reward-hi", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("sweep", help="run converge over many generated instances")
    p.add_argument("--spec", required=True, help="GeneratorSpec JSON file")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AssumptionViolatedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ModelFormatError, InvalidPolicyError, EnumerationTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MdpError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())

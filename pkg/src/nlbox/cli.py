"""Command-line front end.

Exit codes: 0 success (or verified), 1 verification found errors, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import boolfn, experiments, protocol
from .boolfn import TruthTable
from .correlations import (
    CorrelationModel,
    LocalDeterministic,
    NoisyPR,
    PerfectPR,
    Quantum,
    chsh_score_exact,
)
from .errors import NlboxError
from .seeding import check_seed, derive_rng

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

BIT_ORDER_HELP = (
    "Bit strings for --x/--y are written most-significant variable first: "
    "'--x 110' means x3=1, x2=1, x1=0."
)


class UsageError(Exception):
    pass


def parse_model(text: str) -> CorrelationModel:
    """``local:a0a1b0b1``, ``quantum:canonical``, ``quantum:a0,a1,b0,b1``, ``pr``, ``noisy-pr:p``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "pr" and not arg:
            return PerfectPR()
        if kind == "local":
            return LocalDeterministic.from_bits(arg)
        if kind == "quantum":
            if arg in ("", "canonical"):
                return Quantum.canonical()
            angles = [float(a) for a in arg.split(",")]
            if len(angles) != 4:
                raise UsageError(f"quantum model needs 4 angles, got {len(angles)}")
            return Quantum(*angles)
        if kind == "noisy-pr":
            return NoisyPR(arg)
    except (NlboxError, ValueError) as exc:
        raise UsageError(f"bad model descriptor {text!r}: {exc}") from exc
    raise UsageError(f"unknown model descriptor {text!r}")


def parse_function(text: str, seed: int) -> tuple[TruthTable, int]:
    """Resolve a function descriptor to ``(table, n)``.

    ``name:n`` for builtins, ``random:n[:seed]``, ``file:path``.
    """
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "file":
            tt = boolfn.function_from_json(Path(arg).read_text())
            if tt.num_vars % 2:
                raise UsageError(f"{arg}: a two-party function needs an even num_vars")
            return tt, tt.num_vars // 2
        parts = arg.split(":")
        n = int(parts[0])
        if kind == "random":
            fn_seed = int(parts[1]) if len(parts) > 1 else seed
            return boolfn.builtin_function("random", n, seed=fn_seed), n
        if len(parts) != 1:
            raise UsageError(f"unexpected extra fields in {text!r}")
        return boolfn.builtin_function(kind, n), n
    except OSError as exc:
        raise UsageError(f"cannot read function file: {exc}") from exc
    except (NlboxError, ValueError, IndexError) as exc:
        raise UsageError(f"bad function descriptor {text!r}: {exc}") from exc


def parse_bits(text: str, n: int, name: str) -> list[int]:
    """MSB-first string to a list indexed by variable (``[x1, x2, ...]``)."""
    if len(text) != n or set(text) - {"0", "1"}:
        raise UsageError(f"--{name} must be {n} bits of 0/1, got {text!r}")
    return [int(c) for c in reversed(text)]


def _exact_text(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(value)


def _emit(args, payload: str) -> None:
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_chsh(args) -> int:
    model = parse_model(args.model)
    exact = chsh_score_exact(model)
    report = {
        "model": model.descriptor,
        "exact_score": float(exact),
        "exact_score_text": _exact_text(exact),
    }
    print(f"exact score {float(exact)!r} ({_exact_text(exact)})")
    if not args.exact:
        est = experiments.chsh_monte_carlo(model, args.trials, args.seed, args.workers)
        print(f"score {est.score!r} +/- {est.std_error:.6f} ({est.trials_per_setting} trials/setting)")
        report.update(
            score=est.score,
            std_error=est.std_error,
            trials_per_setting=est.trials_per_setting,
            wins=list(est.wins),
            seed=est.seed,
        )
    if args.out:
        if args.format == "csv":
            keys = [k for k in report if k != "wins"]
            body = ",".join(keys) + "\n" + ",".join(str(report[k]) for k in keys) + "\n"
        else:
            body = _json(report)
        Path(args.out).write_text(body)
    return EXIT_OK


def cmd_local_bound(args) -> int:
    _emit(args, _json(experiments.local_bound_report()))
    return EXIT_OK


def cmd_protocol(args) -> int:
    model = parse_model(args.model)
    tt, n = parse_function(args.function, args.seed)
    x = parse_bits(args.x, n, "x")
    y = parse_bits(args.y, n, "y")
    expected = tt.value(boolfn.bits_to_index(x), boolfn.bits_to_index(y), n)
    rng = derive_rng(args.seed)
    if args.baseline:
        result = protocol.run_baseline_protocol(tt, x, y)
    elif args.function.lower().startswith("ip:"):
        pool = protocol.BoxPool(model, n)
        result = protocol.run_ip_protocol(n, x, y, pool, rng, both_learn=args.both_learn)
    else:
        decomp = boolfn.decompose_bipartite(tt, n)
        pool = protocol.BoxPool(model, len(decomp.terms))
        result = protocol.run_general_protocol(decomp, x, y, pool, rng, prune=args.prune,
                                               both_learn=args.both_learn)
    print(f"output {result.output}")
    print(f"bits {result.bits_communicated}")
    print(f"boxes {result.boxes_consumed}")
    print(f"expected {expected}")
    if not args.baseline and not isinstance(model, PerfectPR):
        print("note: boxes are not perfect PR boxes, so the output is correct only with some probability")
    if args.out:
        Path(args.out).write_text(_json({
            "function": args.function,
            "model": "none" if args.baseline else model.descriptor,
            "n": n,
            "x": args.x,
            "y": args.y,
            "output": result.output,
            "expected": expected,
            "bits": result.bits_communicated,
            "boxes": result.boxes_consumed,
            "transcript": [
                {"direction": m.direction.value, "payload": list(m.payload)}
                for m in result.transcript.messages
            ],
            "seed": args.seed,
        }))
    return EXIT_OK


def cmd_verify(args) -> int:
    model = parse_model(args.model)
    kind, _, arg = args.function.partition(":")
    if kind.lower() == "all":
        try:
            n = int(arg)
            report = protocol.verify_all_functions(n, model, args.seed)
        except (NlboxError, ValueError) as exc:
            raise UsageError(f"bad function descriptor {args.function!r}: {exc}") from exc
        doc = report.to_dict(args.function, model.descriptor)
        doc["functions"] = report.functions
    else:
        tt, n = parse_function(args.function, args.seed)
        report = protocol.verify_exhaustive(tt, n, model, args.trials, args.seed, args.workers,
                                            prune=args.prune)
        doc = report.to_dict(args.function, model.descriptor)
    print(f"{report.runs} runs over {report.pairs} input pairs: {report.errors} errors, "
          f"bits per run {report.bits_per_run}, boxes per run {report.boxes_per_run}")
    if args.out:
        Path(args.out).write_text(_json(doc))
    return EXIT_OK if report.errors == 0 else EXIT_FAILED


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def cmd_sweep(args) -> int:
    try:
        rows = experiments.noisy_sweep(_float_list(args.p), _int_list(args.n_list), args.trials,
                                       args.seed, args.workers)
    except NlboxError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        body = _json([
            {k: getattr(r, k) for k in experiments.SWEEP_COLUMNS} for r in rows
        ])
    else:
        body = experiments.sweep_to_csv(rows)
    _emit(args, body)
    return EXIT_OK


def cmd_gen_function(args) -> int:
    tt, _ = parse_function(args.function, args.seed)
    _emit(args, boolfn.function_to_json(tt, anf=args.anf))
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get("NLBOX_SEED")
    if raw is None:
        return 0
    try:
        return check_seed(int(raw))
    except (NlboxError, ValueError):
        raise UsageError(f"NLBOX_SEED must be an unsigned 64-bit integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlbox",
        description="Nonlocal box simulator: CHSH scores and one-bit distributed protocols.",
        epilog=BIT_ORDER_HELP,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="64-bit seed (default: $NLBOX_SEED, else 0)")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes for sampling sweeps")
    common.add_argument("--out", help="write the report here instead of stdout")

    model_help = "local:a0a1b0b1 | quantum:canonical | quantum:a0,a1,b0,b1 | pr | noisy-pr:p"
    func_help = "ip:n | eq:n | neq:n | and:n | or:n | maj:n | random:n[:seed] | file:path"

    p = sub.add_parser("chsh", parents=[common], help="CHSH score of a model")
    p.add_argument("--model", required=True, help=model_help)
    p.add_argument("--trials", type=int, default=100_000, help="trials per setting")
    p.add_argument("--exact", action="store_true", help="closed-form score only")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("local-bound", parents=[common], help="score every deterministic local strategy")
    p.set_defaults(func=cmd_local_bound)

    p = sub.add_parser("protocol", parents=[common], help="run one protocol instance",
                       epilog=BIT_ORDER_HELP)
    p.add_argument("--function", required=True, help=func_help)
    p.add_argument("--x", required=True, help="Alice's input, MSB first")
    p.add_argument("--y", required=True, help="Bob's input, MSB first")
    p.add_argument("--model", default="pr", help=model_help)
    p.add_argument("--baseline", action="store_true", help="Bob sends all n bits instead")
    p.add_argument("--both-learn", action="store_true", help="Alice sends the result back (2 bits)")
    p.add_argument("--prune", action="store_true", help="skip boxes for identically zero terms")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("verify", parents=[common], help="exhaustive protocol check over all inputs")
    p.add_argument("--function", required=True, help=func_help + " | all:n (every function, n <= 2)")
    p.add_argument("--model", default="pr", help=model_help)
    p.add_argument("--trials", type=int, default=1, help="trials per input pair")
    p.add_argument("--prune", action="store_true", help="skip boxes for identically zero terms")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="noisy PR box degradation of the IP protocol")
    p.add_argument("--p", default="0.75,0.85,0.9,0.95,1.0", help="comma separated success probabilities")
    p.add_argument("--n-list", default="1,2,4,8", help="comma separated box counts")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-function", parents=[common], help="write a function file")
    p.add_argument("--function", required=True, help=func_help)
    p.add_argument("--anf", action="store_true", help="write anf_monomials instead of a hex table")
    p.set_defaults(func=cmd_gen_function)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        else:
            args.seed = check_seed(args.seed)
        if getattr(args, "trials", 1) < 1:
            raise UsageError("--trials must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"nlbox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NlboxError as exc:
        print(f"nlbox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

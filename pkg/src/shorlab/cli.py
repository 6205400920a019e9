"""Command-line front end.

Exit codes: 0 on success (including an immediate gcd factor), 1 on invalid
input or exceeded caps, 2 when ``factor`` exhausts its run budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .audit import CLAIMS, run_claim, success_sweep, sweep_to_csv
from .noise import ReadoutModel
from .numtheory import FailureReason, SharedFactor, register_size_for
from .qstate import DENSE_MAX_QUBITS, MAX_SAMPLING_M, Problem, Stage, dense_state
from .strategies import (
    Strategy,
    run_accumulate,
    run_nmr_ensemble,
    run_output_first,
    run_skip_qft,
    run_standard,
)

EXIT_OK, EXIT_INVALID, EXIT_EXHAUSTED = 0, 1, 2

# Failures that depend only on the base, so retrying the same A cannot help.
BASE_FAILURES = {FailureReason.ODD_PERIOD.value, FailureReason.TRIVIAL_ROOT.value}


class UsageError(Exception):
    pass


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("SHORLAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"SHORLAB_SEED must be an integer, got {env!r}") from None
    return 0


def meta(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    return {"tool": "shorlab", "version": __version__, "seed": args.seed, "config": config}


def check_N(N: int | None) -> int:
    if N is None:
        raise UsageError("--n-value is required")
    if N < 3:
        raise UsageError("N must be >= 3")
    if N % 2 == 0:
        raise UsageError("N must be odd")
    return N


def build_problem(args, A: int) -> Problem:
    default_n = register_size_for(args.n_value)
    n = default_n if args.qubits is None else args.qubits
    if n < default_n and not args.allow_small_register:
        raise UsageError(
            f"{n} input qubits is below the N**2 sizing rule ({default_n}); pass --allow-small-register"
        )
    try:
        return Problem.create(args.n_value, A, n=n, m=args.output_qubits)
    except SharedFactor:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def readout_of(args) -> ReadoutModel | None:
    if args.fidelity is None:
        return None
    try:
        return ReadoutModel(args.fidelity)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def write_out(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def summarize_run(d: dict) -> str:
    """One-line summary of a serialized RunRecord."""
    samples = ", ".join(f"{s['register']}={s['value']}" for s in d["samples"])
    cands = ",".join(str(c["r"]) for c in d["period_candidates"]) or "-"
    head = f"[{d['strategy']} seed={d['seed']}] N={d['N']} A={d['A']} n={d['n']} {samples} candidates={cands}"
    if d["factors"]:
        return f"{head} r={d['period']} factors={d['factors'][0]}x{d['factors'][1]}"
    return f"{head} failed: {d['failure']}"


def summarize_ensemble(d: dict) -> str:
    means = " ".join(f"{m:.3f}" for m in reversed(d["bit_means"]))
    flag = "verified" if d["verified"] else "unverified"
    return (f"[nmr_ensemble seed={d['seed']}] N={d['N']} A={d['A']} n={d['n']} shots={d['shots']} "
            f"bit means (msb..lsb) {means} K={d['variable_bits']} r~{d['r_estimate']} ({flag})")


def summarize_claim(d: dict) -> str:
    return f"{d['claim_id']:<14} {d['verdict']:<26} {d['locus']}"


def _run_once(strategy, problem, seed, args, readout, history):
    if strategy is Strategy.STANDARD:
        return run_standard(problem, seed, readout=readout)
    if strategy is Strategy.OUTPUT_FIRST:
        return run_output_first(problem, seed, readout=readout)
    if strategy is Strategy.SKIP_QFT:
        return run_skip_qft(problem, seed, history=history, readout=readout)
    if strategy is Strategy.ACCUMULATE:
        return run_accumulate(problem, args.k, seed, source=args.source, readout=readout)
    raise UsageError(f"strategy {strategy.value} does not produce run records")


def cmd_factor(args) -> int:
    N = check_N(args.n_value)
    strategy = Strategy(args.strategy)
    readout = readout_of(args)
    rng = np.random.default_rng(args.seed)
    auto = args.base is None
    A = args.base if not auto else int(rng.integers(2, N - 1))
    records = []
    result = None
    history: dict[int, list[int]] = {}
    for i in range(args.max_runs):
        try:
            problem = build_problem(args, A)
        except SharedFactor as exc:
            result = {"factors": sorted([exc.factor, N // exc.factor]), "A": A, "method": "gcd"}
            print(f"gcd({A}, {N}) = {exc.factor}: immediate factor {exc.factor} x {N // exc.factor}")
            break
        rec = _run_once(strategy, problem, args.seed + i, args, readout, history.get(A, []))
        if strategy is Strategy.SKIP_QFT:
            history.setdefault(A, []).append(rec.samples[-1][1])
        records.append(rec)
        print(summarize_run(rec.to_dict()))
        if rec.succeeded:
            f = rec.factors[0]
            if N % f or f in (1, N):
                raise AssertionError(f"run reported an invalid factor {f} of {N}")
            result = {"factors": sorted([f, N // f]), "A": A, "method": strategy.value, "runs": i + 1}
            break
        if auto and rec.failure in BASE_FAILURES:
            A = int(rng.integers(2, N - 1))

    doc = {"meta": meta(args), "records": [r.to_dict() for r in records], "result": result}
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if result is None:
        print(f"no factors of {N} after {args.max_runs} runs")
        return EXIT_EXHAUSTED
    print(f"factors of {N}: {result['factors'][0]} x {result['factors'][1]}")
    return EXIT_OK


def cmd_run(args) -> int:
    N = check_N(args.n_value)
    if args.base is None:
        raise UsageError("--base is required for run")
    problem = build_problem(args, args.base)
    strategy = Strategy(args.strategy)
    readout = readout_of(args)
    lines = [json.dumps({"meta": meta(args)})]
    history: list[int] = []
    for i in range(args.runs):
        seed = args.seed + i
        if strategy is Strategy.NMR_ENSEMBLE:
            rep = run_nmr_ensemble(problem, args.shots, seed, readout=readout)
            d = rep.to_dict()
            print(summarize_ensemble(d))
        else:
            rec = _run_once(strategy, problem, seed, args, readout, list(history))
            if strategy is Strategy.SKIP_QFT:
                history.append(rec.samples[-1][1])
            d = rec.to_dict()
            print(summarize_run(d))
        lines.append(json.dumps(d))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_state_dump(args) -> int:
    check_N(args.n_value)
    if args.base is None:
        raise UsageError("--base is required for state-dump")
    problem = build_problem(args, args.base)
    if problem.n > DENSE_MAX_QUBITS:
        raise UsageError(f"dense dumps are capped at {DENSE_MAX_QUBITS} input qubits (got {problem.n})")
    state = dense_state(problem, Stage(args.stage))
    doc = {"meta": meta(args), **state.to_json_obj()}
    write_out(args, json.dumps(doc, indent=None if args.output is None else 1) + "\n")
    if args.output:
        print(f"wrote {len(state.entries)} entries ({args.stage}) to {args.output}")
    return EXIT_OK


def cmd_distribution(args) -> int:
    check_N(args.n_value)
    if args.base is None:
        raise UsageError("--base is required for distribution")
    problem = build_problem(args, args.base)
    if problem.M > MAX_SAMPLING_M:
        raise UsageError(f"distribution output capped at M = 2**{MAX_SAMPLING_M.bit_length() - 1}")
    dist = problem.distribution
    header = "".join(f"# {k}: {json.dumps(v)}\n" for k, v in meta(args).items())
    write_out(args, header + dist.to_csv(support_only=not args.full))
    support = dist.support()
    summary = (f"N={problem.N} A={problem.A} n={problem.n} r={problem.order} "
               f"support={len(support)} mass_sum={dist.total()!r}")
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def cmd_audit(args) -> int:
    claims = list(CLAIMS) if args.all or not args.claim else args.claim
    for c in claims:
        if c not in CLAIMS:
            raise UsageError(f"unknown claim {c!r}; choose from {', '.join(CLAIMS)}")
    reports = [run_claim(c, args.seed, args.max_n, args.trials).to_dict() for c in claims]
    for d in reports:
        print(summarize_claim(d))
    bundle = {"meta": meta(args), "reports": reports}
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(bundle, fh, indent=1)
            fh.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        Ns = [int(x) for x in args.n_list.split(",") if x.strip()]
    except ValueError:
        raise UsageError("--n-list must be comma-separated integers") from None
    for N in Ns:
        check_N(N)
    rows = success_sweep(Ns, args.strategy, args.trials, args.seed, readout=readout_of(args))
    for row in rows:
        if row.skipped:
            print(f"N={row.N} A={row.A}: skipped (M above 2**20)")
        else:
            lo, hi = row.ci
            print(f"N={row.N} A={row.A} r={row.r} rate={row.rate:.4f} [{lo:.4f}, {hi:.4f}] "
                  f"runs~{row.mean_runs_to_success:.2f}")
    if args.format == "json":
        text = json.dumps({"meta": meta(args), "rows": [r.to_dict() for r in rows]}, indent=1) + "\n"
    else:
        text = "".join(f"# {k}: {json.dumps(v)}\n" for k, v in meta(args).items()) + sweep_to_csv(rows)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shorlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"shorlab {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $SHORLAB_SEED, then 0)")
    common.add_argument("--output", "-o", default=None, help="output file")
    common.add_argument("--format", choices=["json", "csv", "text"], default=None)

    instance = argparse.ArgumentParser(add_help=False)
    instance.add_argument("--n-value", "-N", type=int, help="number to factor")
    instance.add_argument("--base", "-A", type=int, default=None, help="base A (factor: random if omitted)")
    instance.add_argument("--qubits", "-n", type=int, default=None, help="input register size")
    instance.add_argument("--output-qubits", "-m", type=int, default=None, help="output register size")
    instance.add_argument("--allow-small-register", action="store_true",
                          help="permit fewer input qubits than the N**2 sizing rule")
    instance.add_argument("--fidelity", "-F", type=float, default=None, help="per-qubit readout fidelity")

    sub = parser.add_subparsers(dest="command", required=True)
    strategies = [Strategy.STANDARD.value, Strategy.OUTPUT_FIRST.value, Strategy.SKIP_QFT.value,
                  Strategy.ACCUMULATE.value]

    p = sub.add_parser("factor", parents=[common, instance], help="run until factors are found")
    p.add_argument("--strategy", choices=strategies, default="standard")
    p.add_argument("--max-runs", type=int, default=20)
    p.add_argument("--k", type=int, default=4, help="runs per accumulation")
    p.add_argument("--source", choices=["standard", "skip_qft"], default="skip_qft")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("run", parents=[common, instance], help="execute one strategy repeatedly")
    p.add_argument("--strategy", choices=strategies + [Strategy.NMR_ENSEMBLE.value], default="standard")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--source", choices=["standard", "skip_qft"], default="skip_qft")
    p.add_argument("--shots", type=int, default=10_000)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("state-dump", parents=[common, instance], help="dense amplitude table as JSON")
    p.add_argument("--stage", choices=[s.value for s in Stage], default=Stage.POST_QFT.value)
    p.set_defaults(func=cmd_state_dump)

    p = sub.add_parser("distribution", parents=[common, instance], help="post-QFT outcome masses as CSV")
    p.add_argument("--full", action="store_true", help="emit every outcome, not just the support")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("audit", parents=[common], help="check worked examples and claims")
    p.add_argument("--all", action="store_true")
    p.add_argument("--claim", action="append", choices=list(CLAIMS))
    p.add_argument("--max-n", type=int, default=100, help="search bound for pow2form")
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sweep", parents=[common], help="success rate per (N, A)")
    p.add_argument("--n-list", required=True, help="comma-separated N values")
    p.add_argument("--strategy", choices=strategies[:3], default="standard")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--fidelity", "-F", type=float, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.seed = resolve_seed(args.seed)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SharedFactor as exc:
        print(f"error: {exc}; choose a base coprime to N", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

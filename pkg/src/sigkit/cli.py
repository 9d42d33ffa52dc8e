"""``sigkit`` command-line interface.

Exit codes: 0 on success, 2 for bad input, 3 when a computed result breaks
one of its invariants.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import InvariantViolation, SigkitError
from .io import (
    format_float,
    format_rationals,
    load_lifetime_model,
    load_permutation_model,
    load_state_model,
    load_system,
    rational_json,
    text_matrix,
)
from .lifetimes import empirical_joint_signature, empirical_signature
from .quality import q0_multi, q_bivariate_from_model, q_from_model
from .reliability import (
    OrderStatisticSurfaces,
    check_condition_12,
    check_state_exchangeability,
    decompose_joint_reliability,
    joint_reliability_direct,
)
from .signature import (
    boland_signature,
    joint_from_tail,
    joint_signature,
    joint_structure_tail,
    joint_tail,
    multi_tail,
    probability_signature,
    tail_from_signature,
)

EXIT_INPUT = 2
EXIT_INVARIANT = 3

HOLDS_TOL = 1e-10
FAILS_TOL = 1e-6


class InputError(Exception):
    pass


def _threads(args) -> int:
    env = os.environ.get("SIGKIT_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InputError(f"SIGKIT_THREADS must be an integer, got {env!r}")
    else:
        value = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if value < 1:
        raise InputError("thread count must be at least 1")
    return value


def _load(fn, path):
    try:
        return fn(path)
    except SigkitError as exc:
        raise InputError(str(exc)) from exc


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _parse_subset(token: str) -> list[int]:
    token = token.strip().strip("{}")
    if not token:
        return []
    try:
        return [int(t) for t in token.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse subset {token!r}; use comma-separated components like 1,2")


def _parse_grid(args) -> tuple[list[float], list[float]]:
    if args.t1 or args.t2:
        if not (args.t1 and args.t2):
            raise InputError("--t1 and --t2 must be given together")
        t1s, t2s = _floats(args.t1), _floats(args.t2)
    else:
        parts = args.grid.split(":")
        if len(parts) != 3:
            raise InputError("--grid takes start:stop:count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise InputError(f"cannot parse --grid {args.grid!r}")
        if count < 1:
            raise InputError("grid count must be at least 1")
        t1s = t2s = np.linspace(start, stop, count).tolist()
    for t in (*t1s, *t2s):
        if not np.isfinite(t) or t < 0:
            raise InputError(f"grid times must be finite and nonnegative, got {t}")
    return t1s, t2s


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse time list {text!r}")


# --------------------------------------------------------------------------
# commands


def cmd_signature(args):
    phi = _load(load_system, args.system)
    if args.model:
        model = _load(load_permutation_model, args.model)
        if model.n != phi.n:
            raise InputError(f"model has n={model.n}, system has n={phi.n}")
        sig = probability_signature(phi, q_from_model(model))
        source = "model"
    else:
        sig = boland_signature(phi)
        source = "q0"
    tail = tail_from_signature(sig)
    payload = {
        "n": phi.n,
        "quality": source,
        "signature": rational_json(sig.entries),
        "tail": rational_json(tail.entries),
    }
    text = (
        f"signature: {' '.join(format_rationals(sig.entries, n=phi.n))}\n"
        f"tail: {' '.join(format_rationals(tail.entries, n=phi.n))}"
    )
    _emit(args, payload, text)


def cmd_joint(args):
    phi1 = _load(load_system, args.system1)
    phi2 = _load(load_system, args.system2)
    if phi1.n != phi2.n:
        raise InputError(f"systems have n={phi1.n} and n={phi2.n}")
    if args.model:
        model = _load(load_permutation_model, args.model)
        if model.n != phi1.n:
            raise InputError(f"model has n={model.n}, systems have n={phi1.n}")
        tail = joint_tail(phi1, phi2, q_bivariate_from_model(model), threads=_threads(args))
        source = "model"
    else:
        tail = joint_structure_tail(phi1, phi2)
        source = "q0"
    sig = joint_from_tail(tail)
    payload = {
        "n": phi1.n,
        "quality": source,
        "tail": rational_json(tail.entries),
        "signature": rational_json(sig.entries),
    }
    text = f"tail (k, l = 0..{tail.n}):\n{text_matrix(tail.entries, tail.n)}\n\nsignature (k, l = 1..{sig.n}):\n{text_matrix(sig.entries, sig.n)}"
    _emit(args, payload, text)


def cmd_multi(args):
    phis = [_load(load_system, p) for p in args.systems]
    if len({phi.n for phi in phis}) != 1:
        raise InputError(f"systems have different component counts: {[phi.n for phi in phis]}")
    model = _load(load_permutation_model, args.model) if args.model else None
    if model is not None and model.n != phis[0].n:
        raise InputError(f"model has n={model.n}, systems have n={phis[0].n}")
    tail = multi_tail(phis, model)
    payload = {"n": phis[0].n, "m": len(phis), "quality": "model" if model else "q0", "tail": rational_json(tail)}
    lines = []
    for idx in np.ndindex(tail.shape):
        if tail[idx]:
            lines.append(f"{idx}: {tail[idx]}")
    _emit(args, payload, "nonzero tail entries:\n" + "\n".join(lines))


def cmd_q0(args):
    sets = [_parse_subset(s) for s in args.sets]
    try:
        value = q0_multi(args.n, sets)
    except SigkitError as exc:
        raise InputError(str(exc)) from exc
    payload = {"n": args.n, "sets": sets, "q0": rational_json(value)}
    _emit(args, payload, str(value))


def cmd_simulate(args):
    if args.samples < 1:
        raise InputError(f"sample count must be at least 1, got {args.samples}")
    if len(args.systems) not in (1, 2):
        raise InputError("simulate takes one or two system files")
    phis = [_load(load_system, p) for p in args.systems]
    model = _load(load_lifetime_model, args.lifetimes)
    for phi in phis:
        if phi.n != model.n:
            raise InputError(f"system has n={phi.n}, lifetime model has n={model.n}")
    threads = _threads(args)
    start = time.perf_counter()
    if len(phis) == 1:
        est, report = empirical_signature(model, phis[0], args.samples, args.seed, args.partitions, threads)
    else:
        est, report = empirical_joint_signature(model, phis[0], phis[1], args.samples, args.seed, args.partitions, threads)
    elapsed = time.perf_counter() - start
    payload = {
        "n": model.n,
        "samples": report.n_samples,
        "seed": report.seed,
        "partitions": report.partitions,
        "estimate": est.tolist(),
        "std_error": report.std_error.tolist(),
    }
    rows = est if est.ndim == 2 else est[None, :]
    ses = report.std_error if est.ndim == 2 else report.std_error[None, :]
    text = (
        f"estimate (N={report.n_samples}, seed={report.seed}, partitions={report.partitions}):\n"
        f"{text_matrix(rows.tolist())}\n\nstandard error:\n{text_matrix(ses.tolist())}"
    )
    print(f"simulated in {elapsed:.2f}s", file=sys.stderr)
    _emit(args, payload, text)


def cmd_decompose_check(args):
    phi1 = _load(load_system, args.system1)
    phi2 = _load(load_system, args.system2)
    states = _load(load_state_model, args.states)
    if not phi1.n == phi2.n == states.n:
        raise InputError(f"component counts disagree: systems {phi1.n}, {phi2.n}; states {states.n}")
    t1s, t2s = _parse_grid(args)
    s = joint_signature(phi1, phi2)
    factory = OrderStatisticSurfaces(states)
    rows = []
    for t1 in t1s:
        for t2 in t2s:
            direct = joint_reliability_direct(phi1, phi2, states, t1, t2)
            decomposed = decompose_joint_reliability(s, factory, t1, t2)
            rows.append({"t1": t1, "t2": t2, "direct": direct, "decomposed": decomposed, "residual": abs(direct - decomposed)})
    worst = max(r["residual"] for r in rows)
    if worst <= HOLDS_TOL:
        verdict = "decomposition holds"
    elif worst > FAILS_TOL:
        verdict = "decomposition fails"
    else:
        verdict = "inconclusive"
    payload = {"states": repr(states), "max_residual": worst, "verdict": verdict, "results": rows}
    header = f"{'t1':>10} {'t2':>10} {'direct':>24} {'decomposed':>24} {'residual':>12}"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r['t1']:>10.4g} {r['t2']:>10.4g} {format_float(r['direct']):>24} "
            f"{format_float(r['decomposed']):>24} {r['residual']:>12.3e}"
        )
    lines.append(f"max residual {worst:.3e}: {verdict}")
    _emit(args, payload, "\n".join(lines))


def cmd_check_cond12(args):
    states = _load(load_state_model, args.states)
    for t in (args.t1, args.t2):
        if not np.isfinite(t) or t < 0:
            raise InputError(f"times must be finite and nonnegative, got {t}")
    res = check_condition_12(states, args.t1, args.t2)
    payload = {"states": repr(states), "t1": args.t1, "t2": args.t2, "holds": res.holds, "witness": res.witness}
    lines = [f"condition holds: {res.holds}"]
    if res.witness:
        lines.append(f"witness: {res.witness}")
    if args.t1 != args.t2:
        early, late = sorted((args.t1, args.t2))
        exch = check_state_exchangeability(states, early, late)
        payload["state_exchangeability"] = {"t": early, "holds": exch.holds, "witness": exch.witness}
        lines.append(f"states exchangeable at t={early}: {exch.holds}")
    _emit(args, payload, "\n".join(lines))


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sigkit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--threads", type=int, default=None, help="worker threads (env SIGKIT_THREADS wins)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("signature", parents=[common], help="signature and tail signature of one system")
    p.add_argument("system")
    p.add_argument("--model", help="permutation model file (default: equally likely orderings)")
    p.set_defaults(func=cmd_signature)

    p = sub.add_parser("joint", parents=[common], help="joint tail signature and joint signature")
    p.add_argument("system1")
    p.add_argument("system2")
    p.add_argument("--model")
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("multi", parents=[common], help="m-variate tail signature")
    p.add_argument("systems", nargs="+")
    p.add_argument("--model")
    p.set_defaults(func=cmd_multi)

    p = sub.add_parser("q0", parents=[common], help="relative quality under equally likely orderings")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("sets", nargs="+", help="subsets as comma-separated components, e.g. 1,2 (empty string for the empty set)")
    p.set_defaults(func=cmd_q0)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo (joint) signature")
    p.add_argument("systems", nargs="+")
    p.add_argument("--lifetimes", required=True, help="lifetime model file")
    p.add_argument("-N", "--samples", "--n", dest="samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partitions", type=int, default=8)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose-check", parents=[common], help="direct vs signature-decomposed joint reliability")
    p.add_argument("system1")
    p.add_argument("system2")
    p.add_argument("--states", required=True, help="component state model file")
    p.add_argument("--grid", default="0:2:5", help="start:stop:count, used for both times")
    p.add_argument("--t1", help="comma-separated first times (with --t2, overrides --grid)")
    p.add_argument("--t2", help="comma-separated second times")
    p.set_defaults(func=cmd_decompose_check)

    p = sub.add_parser("check-cond12", parents=[common], help="permutation invariance of the state pair law")
    p.add_argument("states")
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)
    p.set_defaults(func=cmd_check_cond12)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "partitions", 1) < 1:
            raise InputError("--partitions must be at least 1")
        args.func(args)
    except InputError as exc:
        print(f"sigkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"sigkit {args.command}: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SigkitError as exc:
        print(f"sigkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())

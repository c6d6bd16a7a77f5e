"""Command-line interface: generation, verification, and experiment pipelines.

Exit codes: 0 success, 1 verification failure (report still written),
2 usage or input error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .serialize import (
    basis_from_json,
    basis_to_json,
    channel_from_json,
    dump,
    load,
    matrix_to_json,
    observable_set_from_json,
    observable_set_to_json,
    report_to_csv,
    report_to_json,
)
from .subspaces import SubspaceKind, SubspaceRangeError, build_subspace, verify_subspace
from .tns import gen_both_tr0_tns, gen_full_tns, gen_tr0_tns
from .tomography import (
    ExpectationVector,
    ExperimentConfig,
    discriminate_pair,
    measure_exact,
    measure_sampled,
    reconstruct_unitary,
    run_experiment,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2


def _apply_threads(args) -> None:
    threads = args.threads or os.environ.get("UNITOM_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(threads))


def _cmd_gen_tns(args) -> int:
    if args.kind == "full":
        v, report = gen_full_tns(args.rows, cols=args.cols, seed=args.seed)
    elif args.kind == "tr0":
        v, report = gen_tr0_tns(args.d, args.k, args.m, seed=args.seed, cols=args.cols)
    else:
        v, report = gen_both_tr0_tns(args.d, seed=args.seed, cols=args.cols)
    artifact = {
        "version": __version__,
        "kind": args.kind,
        "seed": args.seed,
        "matrix": matrix_to_json(v.astype(complex)),
        "certification": {
            "exhaustive": report.exhaustive,
            "submatrices_checked": report.submatrices_checked,
            "min_singular_ratio": report.min_singular_value_seen,
            "passed": report.passed,
        },
    }
    dump(artifact, args.out)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def _cmd_gen_subspace(args) -> int:
    kind = SubspaceKind(args.kind, args.d, args.q)
    basis = build_subspace(kind, args.seed)
    dump(basis_to_json(basis), args.out)
    return EXIT_OK


def _cmd_verify_subspace(args) -> int:
    basis = basis_from_json(load(args.infile))
    report = verify_subspace(basis, trials=args.trials, seed=args.seed)
    artifact = {
        "version": __version__,
        "kind": basis.kind.tag,
        "d": basis.kind.d,
        "q": basis.kind.q,
        "trials": report.trials,
        "min_rank_seen": report.min_rank_seen,
        "min_pos_eigs_seen": report.min_pos_eigs_seen,
        "min_neg_eigs_seen": report.min_neg_eigs_seen,
        "independence_sigma_min": report.independence_sigma_min,
        "constraint_max_dev": report.constraint_max_dev,
        "passed": report.passed,
        "failures": [list(f) for f in report.failures],
    }
    if args.out:
        dump(artifact, args.out)
    else:
        print("pass" if report.passed else f"FAIL: {artifact['failures']}")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def _cmd_gen_observables(args) -> int:
    from .observables import build_observable_set

    obs_set = build_observable_set(args.d, args.q, args.question, args.seed)
    dump(observable_set_to_json(obs_set), args.out)
    return EXIT_OK


def _cmd_measure(args) -> int:
    obs_set = observable_set_from_json(load(args.infile))
    ch = channel_from_json(load(args.channel))
    if args.shots:
        vec = measure_sampled(obs_set, ch, args.shots, args.seed)
    else:
        vec = measure_exact(obs_set, ch)
    dump(
        {
            "version": __version__,
            "mode": vec.mode,
            "shots": vec.shots,
            "values": [float(x) for x in vec.values],
        },
        args.out,
    )
    return EXIT_OK


def _cmd_discriminate(args) -> int:
    obs_set = observable_set_from_json(load(args.infile))
    ch_a = channel_from_json(load(args.channel_a))
    ch_b = channel_from_json(load(args.channel_b))
    distinct = discriminate_pair(obs_set, ch_a, ch_b, args.tol)
    artifact = {"version": __version__, "distinct": distinct, "tol": args.tol}
    if args.out:
        dump(artifact, args.out)
    print("distinct" if distinct else "indistinguishable")
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    obs_set = observable_set_from_json(load(args.infile))
    target_obj = load(args.target)
    target = ExpectationVector(
        values=np.array(target_obj["values"]),
        mode=target_obj.get("mode", "exact"),
        shots=target_obj.get("shots"),
    )
    result = reconstruct_unitary(
        obs_set, target, seed=args.seed, restarts=args.restarts, tol=args.tol
    )
    dump(
        {
            "version": __version__,
            "recovered_unitary": matrix_to_json(result.recovered.kraus_ops[0]),
            "residual": result.residual,
            "restarts_used": result.restarts_used,
            "converged": result.converged,
        },
        args.out,
    )
    return EXIT_OK if result.converged else EXIT_VERIFY_FAIL


def _cmd_experiment(args) -> int:
    config = ExperimentConfig(
        mode=args.mode,
        d=args.d,
        q=args.q,
        question=args.question,
        trials=args.trials,
        seed=args.seed,
        shots=args.shots,
        tol=args.tol,
        pair_type=args.pair_type,
        restarts=args.restarts,
    )
    report = run_experiment(config)
    dump(report_to_json(report), args.out)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report_to_csv(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unitom",
        description="Process tomography for unitary channels via interactive observables.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tns", help="generate a certified constrained matrix")
    p.add_argument("--kind", choices=["full", "tr0", "both_tr0"], required=True)
    p.add_argument("--rows", type=int, default=4)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_tns)

    p = sub.add_parser("gen-subspace", help="build a discriminating subspace basis")
    p.add_argument("--kind", choices=["V2q", "V2_unital", "Vqp", "Vqp_unital"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_subspace)

    p = sub.add_parser("verify-subspace", help="verify a serialized basis")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify_subspace)

    p = sub.add_parser("gen-observables", help="build an interactive observable set")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument(
        "--question",
        choices=["among_rank_q", "among_all", "among_unital"],
        required=True,
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_observables)

    p = sub.add_parser("measure", help="measure a channel against an observable set")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("discriminate", help="compare two channels' statistics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--channel-a", required=True)
    p.add_argument("--channel-b", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_discriminate)

    p = sub.add_parser("reconstruct", help="recover a unitary from expectations")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("experiment", help="run aggregated trials")
    p.add_argument("--mode", choices=["discriminate", "reconstruct"], default="discriminate")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--question", default="among_rank_q")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--pair-type", dest="pair_type", default="unitary_unitary",
                   choices=["unitary_unitary", "unitary_cptp"])
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_threads(args)
    try:
        return args.func(args)
    except (OSError, KeyError, ValueError, SubspaceRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

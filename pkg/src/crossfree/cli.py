"""Command-line driver; every command prints one JSON report on stdout.

Exit codes: 0 success, 1 a freeness or identity check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from typing import Any, Sequence

from . import __version__
from .errors import DomainError
from .freeprob import (
    MAX_CUMULANT_ORDER,
    THREADS_ENV,
    as_monomials,
    check_freeness_families,
    cumulant,
    cumulant_factorized,
    default_threads,
    partitioned_moment,
)
from .crossedalg import cond_expect
from .nclattice import MAX_ENUM_N, MAX_MOBIUS_N, catalan, enumerate_nc, mobius, one_partition, zero_partition
from .scenario import bundled_fixtures, load_scenario
from .verify import verify_paper

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _emit(report: Any, out) -> None:
    out.write(json.dumps(report, indent=2, ensure_ascii=False))
    out.write("\n")


def cmd_nc(args) -> tuple[dict, int]:
    parts = enumerate_nc(args.n)
    return {
        "command": "nc",
        "n": args.n,
        "count": len(parts),
        "catalan": catalan(args.n),
        "partitions": [p.to_json() for p in parts],
    }, EXIT_OK


def cmd_mobius(args) -> tuple[dict, int]:
    n = args.n
    if n > MAX_MOBIUS_N:
        raise DomainError(f"Möbius tables are limited to n <= {MAX_MOBIUS_N}")
    bottom, top = zero_partition(n), one_partition(n)
    parts = enumerate_nc(n)
    return {
        "command": "mobius",
        "n": n,
        "count": len(parts),
        "zero_to_one": mobius(bottom, top),
        "closed_form": (-1) ** (n - 1) * catalan(n - 1),
        "table": [
            {"partition": str(p), "from_zero": mobius(bottom, p), "to_one": mobius(p, top)}
            for p in parts
        ],
    }, EXIT_OK


def _scenario(args):
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc.seed = args.seed
    return sc


def cmd_moments(args) -> tuple[dict, int]:
    sc = _scenario(args)
    xs = sc.elements
    if not xs:
        raise DomainError("scenario lists no elements")
    if len(xs) > MAX_CUMULANT_ORDER:
        raise DomainError(f"at most {MAX_CUMULANT_ORDER} elements are supported")
    prod = xs[0]
    for x in xs[1:]:
        prod = prod * x
    parts = [sc.partition] if sc.partition is not None else list(enumerate_nc(len(xs)))
    if sc.partition is not None and sc.partition.n != len(xs):
        raise DomainError("scenario partition does not match the number of elements")
    return {
        "command": "moments",
        "scenario": sc.name,
        "algebra": sc.algebra.header(),
        "elements": [x.to_json() for x in xs],
        "moment": cond_expect(prod).to_json(),
        "partitioned_moments": [
            {"partition": str(p), "value": partitioned_moment(xs, p).to_json()} for p in parts
        ],
    }, EXIT_OK


def cmd_cumulants(args) -> tuple[dict, int]:
    sc = _scenario(args)
    xs = sc.elements
    if not xs:
        raise DomainError("scenario lists no elements")
    max_order = args.max_order or min(3, MAX_CUMULANT_ORDER)
    if not 1 <= max_order <= MAX_CUMULANT_ORDER:
        raise DomainError(f"--max-order must lie in 1..{MAX_CUMULANT_ORDER}")
    table = {}
    factored_agree = True
    monomial = all(x.is_monomial() for x in xs)
    for n in range(1, max_order + 1):
        for idx in itertools.product(range(len(xs)), repeat=n):
            args_ = [xs[i] for i in idx]
            k = cumulant(args_, threads=args.threads)
            table["k(" + ",".join(f"x{i + 1}" for i in idx) + ")"] = k.to_json()
            if monomial:
                factored_agree &= k.close(cumulant_factorized(sc.algebra, as_monomials(args_)), sc.tolerance)
    report = {
        "command": "cumulants",
        "scenario": sc.name,
        "algebra": sc.algebra.header(),
        "elements": [x.to_json() for x in xs],
        "max_order": max_order,
        "cumulants": table,
    }
    if monomial:
        report["factorized_agrees"] = factored_agree
    return report, EXIT_OK if factored_agree else EXIT_FAIL


def cmd_check_freeness(args) -> tuple[dict, int]:
    sc = _scenario(args)
    max_order = args.max_order or sc.freeness["max_order"]
    trials = args.trials or sc.freeness["trials"]
    splits = [args.families] if args.families else sc.splits
    if not splits:
        raise DomainError("no families given and the scenario lists no splits")
    reports = [
        check_freeness_families(sc.algebra, split, max_order, trials, sc.seed + i,
                                tol=sc.tolerance, threads=args.threads).to_json()
        for i, split in enumerate(splits)
    ]
    verdict = all(r["verdict"] for r in reports)
    return {
        "command": "check-freeness",
        "scenario": sc.name,
        "seed": sc.seed,
        "reports": reports,
        "verdict": verdict,
    }, EXIT_OK if verdict else EXIT_FAIL


def cmd_verify_paper(args) -> tuple[dict, int]:
    sc = _scenario(args)
    report = verify_paper(sc, threads=args.threads)
    return report, EXIT_OK if report["verdict"] else EXIT_FAIL


SELFTEST_CHECKS = {
    "word_tuples": 40, "monomial_tuples": 40, "partition_tuples": 2, "cumulant_tuples": 10,
    "roundtrip_inputs": 12, "oracle_tuples": 20, "algebra_samples": 10,
}


def cmd_selftest(args) -> tuple[dict, int]:
    results = {}
    for name in bundled_fixtures():
        sc = load_scenario(name)
        if args.seed is not None:
            sc.seed = args.seed
        sc.checks = dict(SELFTEST_CHECKS)
        sc.freeness = {"max_order": 3, "trials": 12, "spot_order": 4, "spot_trials": 4}
        rep = verify_paper(sc, threads=args.threads)
        results[name] = {
            "verdict": rep["verdict"],
            "failed_sections": [k for k, s in rep["sections"].items() if not s["passed"]],
        }
    verdict = all(r["verdict"] for r in results.values())
    return {"command": "selftest", "version": __version__, "fixtures": results,
            "verdict": verdict}, EXIT_OK if verdict else EXIT_FAIL


def _families(text: str) -> list[list[int]]:
    """``"0|1,2"`` -> ``[[0], [1, 2]]``."""
    try:
        return [[int(t) for t in part.split(",") if t.strip()] for part in text.split("|")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad families {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossfree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"crossfree {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def threads(p):
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads for cumulant sums (default ${THREADS_ENV} or 1)")

    def scenario(p):
        p.add_argument("--scenario", required=True,
                       help="scenario JSON path or bundled fixture name: " + ", ".join(bundled_fixtures()))
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        threads(p)

    p = sub.add_parser("nc", help="enumerate NC(n)")
    p.add_argument("--n", type=int, required=True, help=f"1..{MAX_ENUM_N}")
    p.set_defaults(func=cmd_nc)

    p = sub.add_parser("mobius", help="Möbius values on NC(n)")
    p.add_argument("--n", type=int, required=True, help=f"1..{MAX_MOBIUS_N}")
    p.set_defaults(func=cmd_mobius)

    p = sub.add_parser("moments", help="partition-dependent moments of the scenario elements")
    scenario(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("cumulants", help="cumulant table of the scenario elements")
    scenario(p)
    p.add_argument("--max-order", type=int, default=None)
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("check-freeness", help="sample mixed cumulants between factor families")
    scenario(p)
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--families", type=_families, default=None,
                   help="factor families separated by '|', e.g. '0|1,2'")
    p.set_defaults(func=cmd_check_freeness)

    p = sub.add_parser("verify-paper", help="replay every identity on the scenario")
    scenario(p)
    p.set_defaults(func=cmd_verify_paper)

    p = sub.add_parser("selftest", help="quick verify-paper pass over all bundled fixtures")
    p.add_argument("--seed", type=int, default=None)
    threads(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", None) is None and hasattr(args, "threads"):
            args.threads = default_threads()
        report, code = args.func(args)
    except DomainError as exc:
        _emit({"error": {"type": "input", "message": str(exc)}}, out)
        return EXIT_INPUT
    except (OSError, json.JSONDecodeError) as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, out)
        return EXIT_INPUT
    _emit(report, out)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: evaluate brackets, run suites, export tables.

Exit codes: 0 success, 1 suite or computation failure, 2 disagreement
between evaluation methods, 64 usage error, 65 invalid grading or
structure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from .core import (
    CacheError,
    DR1Bracket,
    Genus0Bracket,
    GradingError,
    ReductionStalledError,
    StructureError,
    UnderdeterminedError,
    ascending_multisets,
    format_rational,
)
from .dr1 import b_value, closed_form, enumerate_brackets, solve_relational
from .genus0 import loop_sum, solve_bracket
from .store import CACHE_ENV_VAR, CacheStore, default_cache_path
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DISAGREEMENT = 2
EXIT_USAGE = 64
EXIT_DATA = 65

__all__ = ["run", "main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )


def _build_parser() -> _Parser:
    parser = _Parser(prog="rspin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_g0 = sub.add_parser("g0", help="evaluate a genus-0 bracket")
    p_g0.add_argument("--r", type=int, required=True)
    p_g0.add_argument("--a", type=_int_list, required=True, metavar="a1,..,an")
    p_g0.add_argument("--format", choices=("text", "json"), default="text")
    p_g0.add_argument(
        "--cache",
        nargs="?",
        const="",
        default=None,
        metavar="PATH",
        help="persist memoized values; bare flag uses the default path "
        f"(override with ${CACHE_ENV_VAR})",
    )
    p_g0.set_defaults(func=_cmd_g0)

    p_loop = sub.add_parser("loopsum", help="evaluate the window-sum formula")
    p_loop.add_argument("--r", type=int, required=True)
    p_loop.add_argument("--m", type=int, required=True)
    p_loop.add_argument("--x", type=_int_list, required=True, metavar="x1,..,xn")
    p_loop.add_argument("--extended", action="store_true")
    p_loop.add_argument("--format", choices=("text", "json"), default="text")
    p_loop.set_defaults(func=_cmd_loopsum)

    p_dr1 = sub.add_parser("dr1", help="evaluate a genus-1 bracket")
    p_dr1.add_argument("--r", type=int, required=True)
    p_dr1.add_argument("--k", type=_int_list, required=True, metavar="k1,..,kn")
    p_dr1.add_argument("--a", type=_int_list, required=True, metavar="a1,..,an")
    p_dr1.add_argument(
        "--method", choices=("closed", "relations", "both"), default="both"
    )
    p_dr1.add_argument("--format", choices=("text", "json"), default="text")
    p_dr1.add_argument(
        "--cache",
        nargs="?",
        const="",
        default=None,
        metavar="PATH",
        help="persist the relational solver's memo table",
    )
    p_dr1.set_defaults(func=_cmd_dr1)

    p_b = sub.add_parser("b", help="evaluate the genus-1 one-point coefficient B")
    p_b.add_argument("--r", type=int, required=True)
    p_b.add_argument("--a", type=_int_list, required=True, metavar="a1,..,an")
    p_b.add_argument("--format", choices=("text", "json"), default="text")
    p_b.set_defaults(func=_cmd_b)

    p_verify = sub.add_parser("verify", help="run a property suite")
    p_verify.add_argument("--suite", choices=("all",) + SUITES, default="all")
    p_verify.add_argument("--r-max", type=int, default=6)
    p_verify.add_argument("--n-max", type=int, default=5)
    p_verify.add_argument("--k-sum-max", type=int, default=8)
    p_verify.add_argument("--extended", action="store_true")
    p_verify.add_argument("--format", choices=("text", "json"), default="text")
    p_verify.set_defaults(func=_cmd_verify)

    p_table = sub.add_parser("table", help="enumerate all brackets in a window")
    p_table.add_argument("--kind", choices=("g0", "dr1"), required=True)
    p_table.add_argument("--r", type=int, required=True)
    p_table.add_argument("--n-max", type=int, default=5)
    p_table.add_argument("--k-sum-max", type=int, default=8)
    p_table.add_argument("--format", choices=("csv", "json"), default="csv")
    p_table.set_defaults(func=_cmd_table)

    return parser


def _open_store(flag: Optional[str]) -> tuple[Optional[CacheStore], Optional[str]]:
    """Resolve the --cache flag: None means stay in memory."""
    if flag is None:
        return None, None
    path = flag or os.environ.get(CACHE_ENV_VAR) or default_cache_path()
    if os.path.exists(path):
        return CacheStore.load(path), path
    return CacheStore(), path


def _close_store(store: Optional[CacheStore], path: Optional[str]) -> None:
    if store is not None and path is not None and store.dirty:
        store.save(path)


def _cmd_g0(args) -> int:
    bracket = Genus0Bracket(args.r, args.a)
    store, path = _open_store(args.cache)
    result = solve_bracket(args.r, tuple(args.a), store)
    _close_store(store, path)
    if args.format == "json":
        payload = {
            "key": bracket.key,
            "results": [
                {
                    "method": "wdvv",
                    "value": format_rational(result.value),
                    "status": result.status,
                }
            ],
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(str(result.value))
    return EXIT_OK


def _cmd_loopsum(args) -> int:
    value = loop_sum(args.r, args.m, tuple(args.x), extended=args.extended)
    if args.format == "json":
        payload = {
            "r": args.r,
            "m": args.m,
            "x": list(args.x),
            "extended": bool(args.extended),
            "value": format_rational(value),
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(str(value))
    return EXIT_OK


def _cmd_dr1(args) -> int:
    if len(args.k) != len(args.a):
        raise StructureError("k and a rows differ in length")
    bracket = DR1Bracket(args.r, zip(args.k, args.a))
    methods = ["closed", "relations"] if args.method == "both" else [args.method]
    results = []
    for method in methods:
        if method == "closed":
            results.append(("closed", closed_form(bracket)))
        else:
            store, path = _open_store(args.cache)
            if store is None:
                store = CacheStore()
            results.append(("relations", solve_relational(bracket, store)))
            _close_store(store, path)
    agree = len({(res.value, res.status) for _, res in results}) == 1
    if args.format == "json":
        payload = {
            "key": bracket.key,
            "results": [
                {
                    "method": method,
                    "value": format_rational(res.value),
                    "status": res.status,
                }
                for method, res in results
            ],
            "agree": agree,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for _, res in results:
            print(str(res.value))
    if not agree:
        print("method disagreement on " + bracket.key, file=sys.stderr)
        return EXIT_DISAGREEMENT
    return EXIT_OK


def _cmd_b(args) -> int:
    value = b_value(args.r, tuple(args.a))
    if args.format == "json":
        payload = {
            "r": args.r,
            "a": list(args.a),
            "value": format_rational(value),
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(str(value))
    return EXIT_OK


def _cmd_verify(args) -> int:
    reports = run_suite(
        args.suite,
        r_max=args.r_max,
        n_max=args.n_max,
        k_sum_max=args.k_sum_max,
        extended=args.extended,
    )
    if args.format == "json":
        print(json.dumps([rep.to_payload() for rep in reports], indent=2, sort_keys=True))
    else:
        for rep in reports:
            print(rep.summary_line())
            for key, expected, got in rep.failures:
                print(f"  FAIL {key}: expected {expected}, got {got}")
    if any(not rep.passed for rep in reports):
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_table(args) -> int:
    rows = []
    if args.kind == "g0":
        for n in range(3, args.n_max + 1):
            total = (n - 2) * args.r - 2
            if total < 0:
                continue
            for a in ascending_multisets(0, args.r - 1, n, total):
                br = Genus0Bracket(args.r, a)
                res = solve_bracket(args.r, a)
                rows.append(
                    {
                        "key": br.key,
                        "r": args.r,
                        "a": ",".join(str(v) for v in br.a),
                        "value": format_rational(res.value),
                        "status": res.status,
                    }
                )
        rows.sort(key=lambda row: row["key"])
        columns = ["r", "a", "value"]
    else:
        for br in enumerate_brackets(args.r, args.n_max, args.k_sum_max):
            res = closed_form(br)
            rows.append(
                {
                    "key": br.key,
                    "r": args.r,
                    "k": ",".join(str(v) for v in br.k_row),
                    "a": ",".join(str(v) for v in br.a_row),
                    "value": format_rational(res.value),
                    "status": res.status,
                }
            )
        rows.sort(key=lambda row: row["key"])
        columns = ["r", "k", "a", "value"]
    if args.format == "json":
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (GradingError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UnderdeterminedError, ReductionStalledError, CacheError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

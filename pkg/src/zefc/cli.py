"""Command-line front end: JSON reports for every computation, plus `reproduce`."""

import argparse
import json
import sys
import time

from . import __version__
from .acceptance import run_all
from .capacity import CapacityQuery, capacity, construct_for_case
from .codec import ChannelCaps, SwitchPair, check_admissible, code_to_json, rate_account
from .coloring import (
    EXACT_QK_LIMIT,
    chi_m,
    chi_m_table,
    mixed_min_pair_sumset,
    q_k,
    verify_aitch_superadditivity,
    verify_sumset_lower_bound,
)
from .errors import ZefcError
from .nfc import build_network, nontightness_report

MAX_QK_TABLE_K = 10


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports problems as machine-readable errors."""

    def error(self, message):
        raise ZefcError("bad_arguments", message)


def _rounded(obj):
    """Round every float to 12 decimal places for stable output."""
    if isinstance(obj, float):
        return round(obj, 12)
    if isinstance(obj, dict):
        return {key: _rounded(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(value) for value in obj]
    return obj


def _caps_of(args):
    return ChannelCaps.of(args.c1, args.c2)


def _switches_of(args):
    return SwitchPair.from_string(args.case)


def _cmd_capacity(args):
    query = CapacityQuery(_switches_of(args), _caps_of(args), args.target)
    result = capacity(query, witness_k=args.k)
    payload = {
        "version": __version__,
        "query": {
            "command": "capacity",
            "case": args.case,
            "c1": args.c1,
            "c2": args.c2,
            "target": args.target,
        },
        "value": result.value,
        "formula": result.formula,
    }
    if args.k is not None:
        payload["query"]["k"] = args.k
        payload["achieved"] = result.achievable_witness
        payload["converse_bound"] = result.converse_bound
    return payload, 0


def _cmd_construct(args):
    caps = _caps_of(args)
    code = construct_for_case(_switches_of(args), args.k, caps)
    acct = rate_account(code, caps)
    admissible = None
    if args.k <= 8:
        admissible = check_admissible(code, threads=args.threads).ok
    return {
        "version": __version__,
        "query": {
            "command": "construct",
            "case": args.case,
            "c1": args.c1,
            "c2": args.c2,
            "k": args.k,
        },
        "name": code.name,
        "rate": str(acct.rate),
        "uses": {"n1": acct.n1, "n2": acct.n2, "n": acct.n},
        "admissible": admissible,
        "code": code_to_json(code),
    }, 0


def _cmd_verify(args):
    if args.check == "aitch":
        report = verify_aitch_superadditivity(args.l_max, tau=args.tau)
        return {
            "version": __version__,
            "query": {
                "command": "verify",
                "check": "aitch",
                "l_max": args.l_max,
                "tau": report.tau,
            },
            "checked": report.checked,
            "violations": len(report.violations),
            "violation_examples": list(report.violations[:10]),
            "counterexample_above_tau": report.tau_maximality,
        }, 0
    report = verify_sumset_lower_bound(
        args.k_max, samples=args.samples, seed=args.seed, threads=args.threads
    )
    entries = []
    for entry in report.entries:
        row = {
            "k": entry["k"],
            "mode": entry["mode"],
            "subsets_checked": entry["subsets_checked"],
            "violations": len(entry["violations"]),
        }
        if "equality_counts" in entry:
            row["equality_counts"] = {str(l): c for l, c in entry["equality_counts"].items()}
        entries.append(row)
    return {
        "version": __version__,
        "query": {
            "command": "verify",
            "check": "sumset-bound",
            "k_max": args.k_max,
            "samples": args.samples,
            "seed": args.seed,
        },
        "entries": entries,
    }, 0


def _cmd_qk(args):
    if not args.bracket and args.k > EXACT_QK_LIMIT:
        raise ZefcError(
            "exact_mode_limit",
            f"exact mode limited to k<={EXACT_QK_LIMIT}; use --bracket",
            k=args.k,
        )
    if args.l is not None:
        ls = [args.l]
    elif args.k <= MAX_QK_TABLE_K:
        ls = list(range(1, (1 << args.k) + 1))
    else:
        raise ZefcError(
            "bad_arguments", f"--l is required for k>{MAX_QK_TABLE_K} (the table has 2^k rows)"
        )
    rows = []
    for l in ls:
        result = q_k(args.k, l, bracket=args.bracket, threads=args.threads)
        row = {
            "l": l,
            "value": result.value,
            "lower": result.lower,
            "upper": result.upper,
            "exact": result.exact,
        }
        if result.exact:
            row["witness"] = list(result.witness)
        rows.append(row)
    return {
        "version": __version__,
        "query": {
            "command": "qk",
            "k": args.k,
            "l": args.l,
            "bracket": args.bracket,
        },
        "rows": rows,
    }, 0


def _cmd_chim(args):
    if args.m is not None:
        results = [chi_m(args.k, args.m)]
        rows = [
            {"m": r.m, "value": r.value, "witness": [list(block) for block in r.witness]}
            for r in results
        ]
    else:
        table = chi_m_table(args.k)
        rows = [
            {
                "m": m,
                "value": table.values[m],
                "witness": [list(block) for block in table.witnesses[m]],
            }
            for m in sorted(table.values)
        ]
    return {
        "version": __version__,
        "query": {"command": "chim", "k": args.k, "m": args.m},
        "rows": rows,
    }, 0


def _cmd_gamma_pair(args):
    result = mixed_min_pair_sumset(args.k, threads=args.threads)
    return {
        "version": __version__,
        "query": {"command": "gamma-pair", "k": args.k},
        "value": result.value,
        "witness": list(result.witness),
    }, 0


def _cmd_nfc(args):
    caps = _caps_of(args)
    report = nontightness_report(caps)
    net = build_network(caps)
    return {
        "version": __version__,
        "query": {"command": "nfc", "c1": args.c1, "c2": args.c2},
        "edges": len(net.edges),
        "capacity": report.capacity,
        "bound_enum": report.bound_enum,
        "bound_formula": report.bound_formula,
        "witness_cut": list(report.witness_cut),
        "witness_classes": report.witness_ncf,
        "gap": report.gap,
    }, 0


def _cmd_reproduce(args):
    results = run_all(threads=args.threads)
    rows = []
    for result in results:
        row = {
            "name": result.name,
            "passed": result.passed,
            "failures": list(result.failures),
            "details": result.details,
        }
        if args.timings:
            row["elapsed_s"] = round(result.elapsed_s, 3)
        rows.append(row)
    ok = all(result.passed for result in results)
    payload = {
        "version": __version__,
        "query": {"command": "reproduce"},
        "results": rows,
        "passed": ok,
    }
    return payload, 0 if ok else 1


def _print_table(payload, stream):
    """Plain-text rendering: scalars as key = value, row lists as columns."""

    def emit(prefix, value):
        if isinstance(value, dict):
            for key, sub in value.items():
                emit(f"{prefix}.{key}" if prefix else str(key), sub)
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            columns = list(value[0])
            print(f"{prefix}: " + "\t".join(columns), file=stream)
            for row in value:
                print("  " + "\t".join(str(row.get(c, "")) for c in columns), file=stream)
        else:
            print(f"{prefix} = {value}", file=stream)

    emit("", payload)


def build_parser():
    parser = _Parser(prog="zefc", description="Zero-error sum compression toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub, threads=True):
        sub.add_argument("--format", choices=("json", "table"), default="json")
        sub.add_argument("--emit", metavar="PATH", help="also write the JSON report here")
        sub.add_argument("--timings", action="store_true", help="include elapsed_ms in output")
        if threads:
            sub.add_argument("--threads", type=int, default=None)

    sub = commands.add_parser("capacity", help="closed-form compression capacity")
    sub.add_argument("--case", required=True, choices=("00", "01", "10", "11"))
    sub.add_argument("--c1", required=True)
    sub.add_argument("--c2", required=True)
    sub.add_argument("--k", type=int, default=None, help="also build a k-shot witness")
    sub.add_argument("--target", default="arithmetic_sum", choices=("arithmetic_sum", "identity"))
    common(sub, threads=False)
    sub.set_defaults(handler=_cmd_capacity, threads=None)

    sub = commands.add_parser("construct", help="explicit k-shot code for a case")
    sub.add_argument("--case", required=True, choices=("00", "01", "10", "11"))
    sub.add_argument("--c1", required=True)
    sub.add_argument("--c2", required=True)
    sub.add_argument("--k", type=int, required=True)
    common(sub)
    sub.set_defaults(handler=_cmd_construct)

    sub = commands.add_parser("verify", help="property checks with reports")
    checks = sub.add_subparsers(dest="check", required=True)
    aitch = checks.add_parser("aitch", help="superadditivity of the l^tau bound shape")
    aitch.add_argument("--l-max", type=int, default=1024, dest="l_max")
    aitch.add_argument("--tau", type=float, default=None)
    common(aitch, threads=False)
    aitch.set_defaults(handler=_cmd_verify, threads=None)
    sumset = checks.add_parser("sumset-bound", help="sumset size lower bound")
    sumset.add_argument("--k-max", type=int, default=4, dest="k_max")
    sumset.add_argument("--samples", type=int, default=200)
    sumset.add_argument("--seed", type=int, default=0)
    common(sumset)
    sumset.set_defaults(handler=_cmd_verify)

    sub = commands.add_parser("qk", help="minimum sumset size over subsets of size l")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--l", type=int, default=None)
    sub.add_argument("--bracket", action="store_true", help="bounds instead of exact values")
    common(sub)
    sub.set_defaults(handler=_cmd_qk)

    sub = commands.add_parser("chim", help="partition chromatic table")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--m", type=int, default=None)
    common(sub, threads=False)
    sub.set_defaults(handler=_cmd_chim, threads=None)

    sub = commands.add_parser("gamma-pair", help="minimum mixed-pair sumset size")
    sub.add_argument("--k", type=int, required=True)
    common(sub)
    sub.set_defaults(handler=_cmd_gamma_pair)

    sub = commands.add_parser("nfc", help="cut-set bound vs capacity on the relay network")
    sub.add_argument("--c1", required=True)
    sub.add_argument("--c2", required=True)
    common(sub)
    sub.set_defaults(handler=_cmd_nfc)

    sub = commands.add_parser("reproduce", help="run the full acceptance suite")
    common(sub)
    sub.set_defaults(handler=_cmd_reproduce)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        started = time.perf_counter()
        payload, exit_code = args.handler(args)
        if getattr(args, "timings", False):
            payload["elapsed_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
        payload = _rounded(payload)
        text = json.dumps(payload, indent=2)
        if getattr(args, "emit", None):
            with open(args.emit, "w") as fh:
                fh.write(text + "\n")
        if getattr(args, "format", "json") == "table":
            _print_table(payload, sys.stdout)
        else:
            print(text)
        if args.command == "reproduce":
            summary = sum(1 for row in payload["results"] if row["passed"])
            print(f"# {summary}/{len(payload['results'])} criteria passed", file=sys.stderr)
        return exit_code
    except ZefcError as err:
        print(json.dumps({"error": _rounded(err.payload())}, indent=2, default=str))
        return 2


if __name__ == "__main__":
    sys.exit(main())

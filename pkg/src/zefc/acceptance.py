"""Self-contained acceptance checks: each criterion returns a pass/fail record."""

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bitspace import VectorSet, binary_to_base3_table
from .capacity import LOG2_3, CapacityQuery, capacity
from .codec import (
    ChannelCaps,
    SwitchPair,
    build_packing_code_11,
    build_split_code_01,
    check_admissible,
    rate_account,
)
from .coloring import (
    ConflictGraphSpec,
    chi,
    chi_m_table,
    mixed_min_pair_sumset,
    q_k,
    q_k_table,
    verify_aitch_superadditivity,
    verify_sumset_lower_bound,
)
from .nfc import (
    build_network,
    check_network_admissible,
    inverse_transform,
    n_cf,
    nontightness_report,
    transform_code,
)

CAP_PAIRS = [("2", "1"), ("1", "1"), ("3", "2"), ("3/2", "1"), ("7/3", "5/4"), ("5", "2")]
BOUND_PAIRS = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (6, 1)]


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance criterion."""

    name: str
    passed: bool
    elapsed_s: float
    budget_s: Optional[float]
    details: dict
    failures: tuple


def _finish(name, budget, started, failures, details):
    elapsed = time.perf_counter() - started
    passed = not failures and (budget is None or elapsed < budget)
    if budget is not None and elapsed >= budget:
        failures = tuple(failures) + (f"runtime {elapsed:.2f}s exceeded budget {budget}s",)
    return CriterionResult(
        name=name,
        passed=passed,
        elapsed_s=elapsed,
        budget_s=budget,
        details=details,
        failures=tuple(failures),
    )


def run_criterion_1(threads=None):
    """Closed-form capacity values and tags for every case, under 1 ms per query."""
    started = time.perf_counter()
    failures, checked = [], 0
    worst_ms = 0.0
    log32 = math.log(2, 3)
    for c1s, c2s in CAP_PAIRS:
        caps = ChannelCaps.of(c1s, c2s)
        c1f, c2f = float(caps.c1), float(caps.c2)
        expected = {
            "00": (c2f, "C2"),
            "10": (c2f, "C2"),
            "11": ((c1f + c2f) / LOG2_3, "(C1+C2)/log2(3)"),
            "01": ((c1f - c2f) * log32 + c2f, "(C1-C2)*log3(2)+C2"),
        }
        if (caps.c1, caps.c2) == (Fraction(2), Fraction(1)):
            expected["01"] = (math.log(6, 3), "log3(6)")
        for case, (value, tag) in expected.items():
            query = CapacityQuery(SwitchPair.from_string(case), caps)
            capacity(query)
            best = min(
                _timed(lambda: capacity(query)) for _ in range(3)
            )
            worst_ms = max(worst_ms, best * 1000.0)
            result = capacity(query)
            checked += 1
            if abs(result.value - value) > 1e-12:
                failures.append(f"case {case} caps ({c1s},{c2s}): {result.value} != {value}")
            if result.formula != tag:
                failures.append(f"case {case} caps ({c1s},{c2s}): tag {result.formula!r} != {tag!r}")
    if worst_ms >= 1.0:
        failures.append(f"slowest query {worst_ms:.3f} ms >= 1 ms")
    details = {"queries": checked, "max_query_ms": round(worst_ms, 4)}
    return _finish("capacity_closed_forms", None, started, failures, details)


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def run_criterion_2(threads=None):
    """Split-code sandwich at caps (2,1): admissibility, k=100 rate, 2% gap."""
    started = time.perf_counter()
    failures = []
    caps = ChannelCaps.of("2", "1")
    target = math.log(6, 3)
    rates = {}
    for k in [1, 2, 4, 8, 16, 32, 64, 128]:
        code = build_split_code_01(k, caps)
        acct = rate_account(code, caps)
        rates[k] = str(acct.rate)
        if k <= 8:
            outcome = check_admissible(code, threads=threads)
            if not outcome.ok:
                failures.append(f"k={k}: inadmissible at {outcome.counterexample}")
    acct = rate_account(build_split_code_01(100, caps), caps)
    if acct.rate != Fraction(100, 62):
        failures.append(f"k=100 rate {acct.rate} != 100/62")
    if abs(float(acct.rate) - target) / target > 0.02:
        failures.append(f"k=100 rate {float(acct.rate)} not within 2% of {target}")
    details = {"rates": rates, "rate_100": str(acct.rate), "target": round(target, 12)}
    return _finish("split_sandwich", 10.0, started, failures, details)


def run_criterion_3(threads=None):
    """Exact Q_k versus the ceiling bound, and chi_m versus the Q_k reduction."""
    started = time.perf_counter()
    failures = []
    tau = LOG2_3 - 1
    for k in range(1, 5):
        table = q_k_table(k, threads=threads)
        for l in range(1, (1 << k) + 1):
            bound = math.ceil((1 << k) * l**tau - 1e-9)
            if table[l].value < bound:
                failures.append(f"Q_{k}({l}) = {table[l].value} < {bound}")
            if k <= 2 and l in (1, 2, 1 << k) and table[l].value != bound:
                failures.append(f"Q_{k}({l}) = {table[l].value} != bound {bound} (equality case)")
    for k in range(1, 4):
        chim = chi_m_table(k)
        for m, value in chim.values.items():
            floor = q_k(k, math.ceil((1 << k) / m)).value
            if value < floor:
                failures.append(f"chi_{m} at k={k}: {value} < Q_k bound {floor}")
    details = {"qk_k_max": 4, "chim_k_max": 3}
    return _finish("coloring_converse", 60.0, started, failures, details)


def run_criterion_4(threads=None):
    """Superadditivity of l^tau at tau = log2(3)-1, and failure just above it."""
    started = time.perf_counter()
    failures = []
    report = verify_aitch_superadditivity(1024)
    if report.violations:
        failures.append(f"{len(report.violations)} violations at tau = log2(3)-1")
    if report.tau_maximality is None:
        failures.append("no counterexample found at tau + 0.01")
    details = {
        "checked": report.checked,
        "violations": len(report.violations),
        "counterexample": report.tau_maximality,
    }
    return _finish("aitch_superadditivity", 5.0, started, failures, details)


def run_criterion_5(threads=None):
    """Sumset lower bound, exhaustive over every nonempty subset up to k = 4."""
    started = time.perf_counter()
    failures = []
    report = verify_sumset_lower_bound(4, threads=threads)
    for entry in report.entries:
        if entry["mode"] != "exhaustive":
            failures.append(f"k={entry['k']} fell back to sampling")
        if entry["violations"]:
            failures.append(f"k={entry['k']}: {len(entry['violations'])} violations")
    top = report.entries[-1]
    if top["subsets_checked"] != 65535:
        failures.append(f"k=4 checked {top['subsets_checked']} subsets, expected 65535")
    details = {"subsets_at_k4": top["subsets_checked"], "violations": 0 if not failures else None}
    return _finish("sumset_lower_bound", 30.0, started, failures, details)


def run_criterion_6(threads=None):
    """Cut-set bound non-tightness at (2,1) and closed-form agreement to c1+c2 = 7."""
    started = time.perf_counter()
    failures = []
    caps21 = ChannelCaps.of("2", "1")
    report = nontightness_report(caps21)
    if abs(report.capacity - math.log(6, 3)) > 1e-9:
        failures.append(f"capacity {report.capacity} != log3(6)")
    if abs(report.bound_enum - math.log(8, 3)) > 1e-9:
        failures.append(f"bound {report.bound_enum} != log3(8)")
    if report.witness_cut != ("e1", "e2", "e3"):
        failures.append(f"witness {report.witness_cut} != (e1, e2, e3)")
    if abs(report.gap - 0.261860) > 1e-5 or report.gap <= 0:
        failures.append(f"gap {report.gap} not ~ 0.261860")
    net = build_network(caps21)
    trio = (
        n_cf(net, ("e1", "e2")),
        n_cf(net, ("e1", "e2", "e3")),
        n_cf(net, ("d1", "d2", "d3", "d4", "e3")),
    )
    if trio != (2, 3, 4):
        failures.append(f"cut-class counts {trio} != (2, 3, 4)")
    gaps = {}
    for c1, c2 in BOUND_PAIRS:
        rep = nontightness_report(ChannelCaps.of(str(c1), str(c2)))
        gaps[f"{c1},{c2}"] = round(rep.gap, 6)
        if abs(rep.bound_enum - rep.bound_formula) > 1e-9:
            failures.append(f"({c1},{c2}): enumeration {rep.bound_enum} != formula")
    if gaps["1,1"] != 0.0:
        failures.append(f"(1,1) gap {gaps['1,1']} != 0")
    if abs(gaps["3,2"] - 0.36907) > 1e-5:
        failures.append(f"(3,2) gap {gaps['3,2']} not ~ 0.369070")
    details = {"cut_class_counts": trio, "gap_21": round(report.gap, 6), "gaps": gaps}
    return _finish("cutset_nontightness", 60.0, started, failures, details)


def run_criterion_7(threads=None):
    """Minimum mixed-pair sumset equals 3 * 2^(k-1) for k = 1..8."""
    started = time.perf_counter()
    failures = []
    values = {}
    for k in range(1, 9):
        result = mixed_min_pair_sumset(k, threads=threads)
        values[k] = result.value
        if result.value != 3 * (1 << (k - 1)):
            failures.append(f"k={k}: {result.value} != {3 * (1 << (k - 1))}")
    details = {"values": values}
    return _finish("mixed_pair_minimum", 120.0, started, failures, details)


def _exact_chromatic(vertices, adjacent):
    """Exact chromatic number by backtracking over increasing color counts."""
    vertices = list(vertices)
    if not vertices:
        return 0

    def colorable(ncolors):
        assign = {}

        def place(i):
            if i == len(vertices):
                return True
            v = vertices[i]
            used = {assign[u] for u in assign if adjacent(u, v)}
            for color in range(ncolors):
                if color not in used:
                    assign[v] = color
                    if place(i + 1):
                        return True
                    del assign[v]
            return False

        return place(0)

    n = 1
    while not colorable(n):
        n += 1
    return n


def run_criterion_8(threads=None):
    """Property suite: coloring agreement, transform round-trip, packing budget."""
    started = time.perf_counter()
    failures = []
    for k in (1, 2):
        words = list(range(1 << k))
        table = binary_to_base3_table(k)
        picks = [tuple(words[:i]) for i in range(1, len(words) + 1)]
        if k == 2:
            picks += [(0, 3), (1, 2), (0, 2, 3)]
        for m_words, l_words in itertools.product(picks, repeat=2):
            spec = ConflictGraphSpec(
                m=VectorSet.of(k, 2, m_words), l=VectorSet.of(k, 2, l_words)
            )
            verts = [(x, y) for x in m_words for y in l_words]
            direct = _exact_chromatic(
                verts, lambda u, v: table[u[0]] + table[u[1]] != table[v[0]] + table[v[1]]
            )
            if chi(spec) != direct:
                failures.append(f"k={k} M={m_words} L={l_words}: {chi(spec)} != {direct}")
    for caps in (ChannelCaps.of("2", "1"), ChannelCaps.of("3", "2")):
        for k in range(1, 7):
            code = build_split_code_01(k, caps)
            acct = rate_account(code, caps)
            ncode = transform_code(code, caps)
            back = inverse_transform(ncode)
            if ncode.n != acct.n:
                failures.append(f"transform n {ncode.n} != {acct.n} at k={k}")
            if not check_network_admissible(ncode):
                failures.append(f"network code inadmissible at k={k}")
            if (back.im1, back.im2) != (code.im1, code.im2):
                failures.append(f"round-trip image change at k={k}")
            if not check_admissible(back).ok:
                failures.append(f"round-trip code inadmissible at k={k}")
    for c1s, c2s in [("1", "1"), ("2", "1"), ("3", "2"), ("3/2", "1")]:
        caps = ChannelCaps.of(c1s, c2s)
        total = caps.c1 + caps.c2
        for k in range(1, 65):
            acct = rate_account(build_packing_code_11(k, caps), caps)
            need = total * acct.n
            if 2 ** need.numerator < 3 ** (k * need.denominator):
                failures.append(f"packing budget fails at caps ({c1s},{c2s}) k={k}")
    details = {"coloring_pairs_k2": "prefixes plus split picks", "packing_k_max": 64}
    return _finish("property_suite", None, started, failures, details)


CRITERIA = (
    run_criterion_1,
    run_criterion_2,
    run_criterion_3,
    run_criterion_4,
    run_criterion_5,
    run_criterion_6,
    run_criterion_7,
    run_criterion_8,
)


def run_all(threads=None):
    """Every acceptance criterion, in order."""
    return tuple(fn(threads=threads) for fn in CRITERIA)

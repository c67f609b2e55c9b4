"""Closed-form compression capacities and the achievability/converse sandwich."""

import math
from dataclasses import dataclass
from typing import Optional

from .codec import (
    SwitchPair,
    build_identity_code,
    build_packing_code_11,
    build_split_code_01,
    lift_code,
    rate_account,
)
from .errors import ZefcError
from ._parallel import chunked_map

LOG2_3 = math.log2(3)
TARGETS = ("arithmetic_sum", "identity")
MAX_SANDWICH_K = 200


@dataclass(frozen=True)
class CapacityQuery:
    """A model instance: switch pair, channel caps, and the target function."""

    switches: SwitchPair
    caps: object
    target: str = "arithmetic_sum"

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ZefcError("bad_target", f"target must be one of {TARGETS}", target=self.target)
        if self.target == "identity" and self.switches.as_string() != "00":
            raise ZefcError(
                "unsupported_query",
                "the identity target is only supported for case 00",
                case=self.switches.as_string(),
            )
        if self.caps.c1 is None and not (
            self.switches.as_string() == "00" and self.target == "identity"
        ):
            raise ZefcError(
                "unsupported_query",
                "an unbounded wide channel is only supported for case 00 with the identity target",
            )


@dataclass(frozen=True)
class CapacityResult:
    """Closed-form capacity with an optional finite-k witness and converse."""

    value: float
    formula: str
    achievable_witness: Optional[float] = None
    converse_bound: Optional[float] = None


@dataclass(frozen=True)
class SandwichReport:
    """Per-k achieved rates against the capacity ceiling."""

    case: str
    caps: tuple
    capacity: float
    rows: tuple


def construct_for_case(switches, k, caps):
    """The matching explicit construction for each switch case."""
    case = switches.as_string()
    if case == "00":
        return build_identity_code(k)
    if case == "10":
        return lift_code(build_identity_code(k), switches)
    if case == "01":
        return build_split_code_01(k, caps)
    return build_packing_code_11(k, caps)


def _closed_form(q):
    case = q.switches.as_string()
    c2 = float(q.caps.c2)
    if q.target == "identity" or case in ("00", "10"):
        return c2, "C2"
    c1 = float(q.caps.c1)
    if case == "11":
        return (c1 + c2) / LOG2_3, "(C1+C2)/log2(3)"
    if q.caps.c1 == 2 and q.caps.c2 == 1:
        return math.log2(6) / LOG2_3, "log3(6)"
    return (c1 - c2) / LOG2_3 + c2, "(C1-C2)*log3(2)+C2"


def _converse_uses(q, k):
    """Lower bound on channel uses n at block length k for the matching converse."""
    case = q.switches.as_string()
    if q.target == "identity" or case in ("00", "10"):
        return k / float(q.caps.c2)
    if case == "11":
        return k * LOG2_3 / float(q.caps.c1 + q.caps.c2)
    return f_k_min(k, q.caps)[1]


def capacity(q, witness_k=None):
    """Closed-form capacity, optionally sandwiched by a finite-k construction."""
    value, formula = _closed_form(q)
    if witness_k is None:
        return CapacityResult(value=value, formula=formula)
    code = construct_for_case(q.switches, witness_k, q.caps)
    achieved = float(rate_account(code, q.caps).rate)
    uses = _converse_uses(q, witness_k)
    converse = witness_k / math.ceil(uses - 1e-9)
    assert achieved <= value + 1e-12
    assert achieved <= converse + 1e-12
    assert abs(value - witness_k / uses) <= 1e-9
    return CapacityResult(
        value=value, formula=formula, achievable_witness=achieved, converse_bound=converse
    )


def f_k_evaluate(k, caps, t):
    """Two-branch converse envelope: channel uses needed if encoder 2 sends t bits."""
    caps.require_bounded()
    c1, c2 = float(caps.c1), float(caps.c2)
    return max((k * LOG2_3 - (LOG2_3 - 1) * t) / c1, t / c2)


def f_k_min(k, caps):
    """Minimizing point and value of the converse envelope over real t."""
    caps.require_bounded()
    c1, c2 = float(caps.c1), float(caps.c2)
    t_star = k * c2 * LOG2_3 / ((c1 - c2) + c2 * LOG2_3)
    return t_star, k * LOG2_3 / ((c1 - c2) + c2 * LOG2_3)


def sandwich_report(q, k_list, threads=None):
    """Build the case's code at each k and compare its rate to the capacity ceiling."""
    if q.target != "arithmetic_sum":
        raise ZefcError("unsupported_query", "sandwich reporting covers the arithmetic sum only")
    ks = list(k_list)
    for k in ks:
        if not 1 <= k <= MAX_SANDWICH_K:
            raise ZefcError("bad_k", f"sandwich k values must lie in [1, {MAX_SANDWICH_K}]", k=k)
    value, _ = _closed_form(q)

    def row(k):
        code = construct_for_case(q.switches, k, q.caps)
        acct = rate_account(code, q.caps)
        achieved = float(acct.rate)
        assert achieved <= value + 1e-12
        return {
            "k": k,
            "n1": acct.n1,
            "n2": acct.n2,
            "n": acct.n,
            "rate": f"{acct.rate.numerator}/{acct.rate.denominator}",
            "achieved": achieved,
            "gap": value - achieved,
        }

    rows = chunked_map(lambda span: [row(k) for k in ks[span[0] : span[1]]],
                       [(i, i + 1) for i in range(len(ks))], threads)
    return SandwichReport(
        case=q.switches.as_string(),
        caps=q.caps.as_strings(),
        capacity=value,
        rows=tuple(r for chunk in rows for r in chunk),
    )

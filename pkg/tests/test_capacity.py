"""Closed-form capacities, converse envelope, and sandwich reports."""

import math
from fractions import Fraction

import pytest

from zefc.capacity import (
    CapacityQuery,
    capacity,
    construct_for_case,
    f_k_evaluate,
    f_k_min,
    sandwich_report,
)
from zefc.codec import ChannelCaps, SwitchPair, rate_account
from zefc.errors import ZefcError

LOG2_3 = math.log2(3)
CAPS21 = ChannelCaps.of(2, 1)


def query(case, c1, c2, target="arithmetic_sum"):
    return CapacityQuery(SwitchPair.from_string(case), ChannelCaps.of(c1, c2), target)


def test_closed_forms_four_cases():
    assert capacity(query("00", 2, 1)).value == 1.0
    assert capacity(query("00", 2, 1)).formula == "C2"
    assert capacity(query("10", 2, 1)).value == 1.0
    eleven = capacity(query("11", 2, 1))
    assert abs(eleven.value - 3 / LOG2_3) < 1e-12
    assert eleven.formula == "(C1+C2)/log2(3)"
    one = capacity(query("01", 2, 1))
    assert one.value == math.log2(6) / LOG2_3
    assert one.formula == "log3(6)"
    general = capacity(query("01", 3, 2))
    assert abs(general.value - (1 / LOG2_3 + 2)) < 1e-12
    assert general.formula == "(C1-C2)*log3(2)+C2"


def test_closed_forms_rational_caps():
    got = capacity(query("11", "7/2", "3/2"))
    assert abs(got.value - 5 / LOG2_3) < 1e-12
    got = capacity(query("01", "5/2", "1/2"))
    assert abs(got.value - (2 / LOG2_3 + 0.5)) < 1e-12
    assert capacity(query("00", "3/4", "1/4")).value == 0.25


def test_capacity_consistency_at_equal_caps():
    for c in (1, 2, Fraction(7, 2)):
        same = float(c)
        assert abs(capacity(query("01", c, c)).value - same) < 1e-12
        assert abs(capacity(query("00", c, c)).value - same) < 1e-12


def test_identity_target_and_unbounded():
    q = CapacityQuery(SwitchPair(0, 0), ChannelCaps.of("inf", 3), "identity")
    got = capacity(q)
    assert got.value == 3.0 and got.formula == "C2"
    bounded = CapacityQuery(SwitchPair(0, 0), CAPS21, "identity")
    assert capacity(bounded).value == 1.0
    with pytest.raises(ZefcError) as err:
        CapacityQuery(SwitchPair(0, 1), CAPS21, "identity")
    assert err.value.code == "unsupported_query"
    with pytest.raises(ZefcError) as err:
        CapacityQuery(SwitchPair(0, 1), ChannelCaps.of("inf", 1), "arithmetic_sum")
    assert err.value.code == "unsupported_query"
    with pytest.raises(ZefcError):
        CapacityQuery(SwitchPair(0, 0), CAPS21, "parity")


def test_capacity_with_witness():
    got = capacity(query("01", 2, 1), witness_k=100)
    assert got.achievable_witness == pytest.approx(100 / 62, abs=1e-15)
    assert got.converse_bound == pytest.approx(100 / 62, abs=1e-15)
    assert got.achievable_witness <= got.value
    for case in ("00", "10", "11"):
        got = capacity(query(case, 2, 1), witness_k=12)
        assert got.achievable_witness <= got.value + 1e-12
        assert got.achievable_witness <= got.converse_bound + 1e-12


def test_witness_with_unbounded_identity():
    q = CapacityQuery(SwitchPair(0, 0), ChannelCaps.of("inf", 1), "identity")
    got = capacity(q, witness_k=5)
    assert got.achievable_witness == 1.0


def test_f_k_min_values():
    t_star, value = f_k_min(1, CAPS21)
    assert abs(value - math.log(3, 6)) < 1e-12
    assert abs(t_star - LOG2_3 / (LOG2_3 + 1)) < 1e-12
    _, value10 = f_k_min(10, CAPS21)
    assert abs(value10 - 10 * value) < 1e-12
    t_star6, value6 = f_k_min(6, ChannelCaps.of(3, 2))
    assert abs(value6 - 2.2805626002956054) < 1e-12
    assert abs(t_star6 - 4.561125200591211) < 1e-12


def test_f_k_min_times_capacity_identity():
    cap = capacity(query("01", 2, 1)).value
    for k in (1, 3, 17, 100):
        _, value = f_k_min(k, CAPS21)
        assert abs(value * cap - k) < 1e-9


def test_f_k_evaluate_grid():
    for caps in (CAPS21, ChannelCaps.of(3, 2)):
        k = 5
        t_star, value = f_k_min(k, caps)
        assert 0 <= t_star <= k
        assert abs(f_k_evaluate(k, caps, t_star) - value) < 1e-12
        c1, c2 = float(caps.c1), float(caps.c2)
        grid_min = None
        for i in range(1000):
            t = k * i / 999
            got = f_k_evaluate(k, caps, t)
            want = max((k * LOG2_3 - (LOG2_3 - 1) * t) / c1, t / c2)
            assert got == want
            assert got >= value - 1e-12
            grid_min = got if grid_min is None else min(grid_min, got)
        assert grid_min <= value + 0.05


def test_sandwich_split_case():
    q = query("01", 2, 1)
    ks = [1 << j for j in range(8)] + [100]
    report = sandwich_report(q, ks)
    assert report.case == "01" and report.caps == ("2", "1")
    by_k = {row["k"]: row for row in report.rows}
    assert by_k[100]["rate"] == "50/31"
    assert Fraction(100, 62) == Fraction(50, 31)
    assert by_k[100]["gap"] < 0.02 * report.capacity
    for row in report.rows:
        assert row["achieved"] <= report.capacity + 1e-12
    doubles = [by_k[1 << j]["gap"] for j in range(8)]
    assert all(b <= a + 1e-9 for a, b in zip(doubles, doubles[1:]))


def test_sandwich_gap_doubling_all_cases():
    for case in ("01", "11"):
        q = query(case, 2, 1)
        report = sandwich_report(q, list(range(1, 101)) + [2 * k for k in range(51, 101)])
        by_k = {row["k"]: row for row in report.rows}
        for k in range(1, 101):
            assert by_k[2 * k]["gap"] <= by_k[k]["gap"] + 1e-9


def test_sandwich_identity_case_flat():
    report = sandwich_report(query("00", 2, 1), [7])
    assert report.rows[0]["achieved"] == 1.0
    assert report.rows[0]["gap"] == 0.0


def test_sandwich_validation():
    with pytest.raises(ZefcError) as err:
        sandwich_report(query("01", 2, 1), [0])
    assert err.value.code == "bad_k"
    with pytest.raises(ZefcError):
        sandwich_report(query("01", 2, 1), [201])
    with pytest.raises(ZefcError) as err:
        sandwich_report(CapacityQuery(SwitchPair(0, 0), CAPS21, "identity"), [4])
    assert err.value.code == "unsupported_query"


def test_construct_for_case_switch_mapping():
    for case, name in (("00", "identity"), ("10", "identity-as-10"), ("01", "split01"), ("11", "packing11")):
        code = construct_for_case(SwitchPair.from_string(case), 4, CAPS21)
        assert code.name == name
        assert code.switches.as_string() == case
        rate_account(code, CAPS21)

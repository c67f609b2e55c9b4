"""Code constructions, admissibility checking, rate accounting, serialization."""

from fractions import Fraction

import pytest

from zefc.bitspace import VectorSet
from zefc.codec import (
    ChannelCaps,
    KShotCode,
    SwitchPair,
    build_identity_code,
    build_packing_code_11,
    build_split_code_01,
    check_admissible,
    code_from_json,
    code_from_partition,
    code_to_json,
    exact_pow2_floor,
    least_uses,
    lift_code,
    rate_account,
    split_index,
)
from zefc.errors import ZefcError

import oracles

CAPS21 = ChannelCaps.of(2, 1)
CAPS11 = ChannelCaps.of(1, 1)
CAPS32 = ChannelCaps.of(3, 2)

# Frozen rate tables computed from the image-size formulas by hand before coding:
# split caps (2,1): k -> (k1, im1, im2, n1, n2, n, rate)
SPLIT21 = {
    1: (1, 2, 2, 1, 1, 1, Fraction(1)),
    2: (1, 4, 4, 1, 2, 2, Fraction(1)),
    3: (2, 12, 4, 2, 2, 2, Fraction(3, 2)),
    4: (2, 24, 8, 3, 3, 3, Fraction(4, 3)),
    5: (2, 48, 16, 3, 4, 4, Fraction(5, 4)),
    6: (3, 144, 16, 4, 4, 4, Fraction(3, 2)),
    7: (3, 288, 32, 5, 5, 5, Fraction(7, 5)),
    8: (4, 864, 32, 5, 5, 5, Fraction(8, 5)),
    16: (7, 746496, 1024, 10, 10, 10, Fraction(8, 5)),
}

SPLIT21_K1 = [1, 1, 2, 2, 2, 3, 3, 4, 4, 4, 5, 5]
SPLIT32_K1 = [1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3]


def test_switch_pair():
    sp = SwitchPair.from_string("01")
    assert (sp.s1, sp.s2) == (0, 1) and sp.as_string() == "01"
    assert SwitchPair(1, 1).dominates(sp) and not sp.dominates(SwitchPair(1, 1))
    for bad in ("2", "001", "ab", ""):
        with pytest.raises(ZefcError) as err:
            SwitchPair.from_string(bad)
        assert err.value.code == "bad_switches"


def test_channel_caps_parse_and_normalize():
    caps = ChannelCaps.of("1/2", "3/2")
    assert caps.c1 == Fraction(3, 2) and caps.c2 == Fraction(1, 2) and caps.swapped
    assert ChannelCaps.of("2", "1").as_strings() == ("2", "1")
    assert ChannelCaps.of("inf", 3).c1 is None
    assert ChannelCaps.of(2, "inf").swapped
    with pytest.raises(ZefcError):
        ChannelCaps.of("inf", "inf")
    with pytest.raises(ZefcError):
        ChannelCaps.of(0, 1)
    with pytest.raises(ZefcError):
        ChannelCaps.of("1/65", 1)
    with pytest.raises(ZefcError):
        ChannelCaps.of("x", 1)


def test_least_uses_exact_boundaries():
    assert least_uses(1, Fraction(2)) == 0
    assert least_uses(16, Fraction(2)) == 2
    assert least_uses(17, Fraction(2)) == 3
    assert least_uses(12, Fraction(2)) == 2
    assert least_uses(8, Fraction(3, 2)) == 2
    assert least_uses(9, Fraction(3, 2)) == 3
    assert least_uses(5, None) == 0
    with pytest.raises(ZefcError) as err:
        least_uses(0, Fraction(1))
    assert err.value.code == "empty_image"


def test_exact_pow2_floor():
    assert exact_pow2_floor(3, Fraction(2)) == 64
    assert exact_pow2_floor(3, Fraction(1, 2)) == 2
    assert exact_pow2_floor(5, Fraction(1, 2)) == 5
    assert exact_pow2_floor(11, Fraction(1)) == 2048


def test_identity_code_rates():
    code = build_identity_code(4)
    assert (code.im1, code.im2) == (16, 16)
    acct = rate_account(code, CAPS21)
    assert (acct.n1, acct.n2, acct.n) == (2, 4, 4)
    assert acct.rate == 1
    assert check_admissible(code).ok


def test_identity_large_k_accounting():
    code = build_identity_code(200)
    acct = rate_account(code, CAPS21)
    assert (acct.n1, acct.n2, acct.n) == (100, 200, 200)


def test_identity_unbounded_wide_channel():
    code = build_identity_code(5)
    acct = rate_account(code, ChannelCaps.of("inf", 1))
    assert (acct.n1, acct.n2, acct.n) == (0, 5, 5)


def test_lift_identity_all_cases():
    code = build_identity_code(3)
    for s in ("10", "01", "11"):
        lifted = lift_code(code, SwitchPair.from_string(s))
        assert lifted.switches.as_string() == s
        assert check_admissible(lifted).ok
    with pytest.raises(ZefcError) as err:
        lift_code(build_split_code_01(3, CAPS21), SwitchPair.from_string("10"))
    assert err.value.code == "bad_lift"


def test_split_index_tables():
    assert [split_index(k, CAPS21) for k in range(1, 13)] == SPLIT21_K1
    assert [split_index(k, CAPS32) for k in range(1, 13)] == SPLIT32_K1
    assert split_index(100, CAPS21) == 39
    assert split_index(7, CAPS11) == 1


def test_split_code_frozen_table():
    for k, (k1, im1, im2, n1, n2, n, rate) in SPLIT21.items():
        code = build_split_code_01(k, CAPS21)
        assert split_index(k, CAPS21) == k1
        assert (code.im1, code.im2) == (im1, im2)
        acct = rate_account(code, CAPS21)
        assert (acct.n1, acct.n2, acct.n, acct.rate) == (n1, n2, n, rate)


def test_split_code_large_k():
    code = build_split_code_01(100, CAPS21)
    assert code.im1 == 3 ** 38 * 2 ** 62 and code.im2 == 2 ** 62
    acct = rate_account(code, CAPS21)
    assert acct.n == 62 and acct.rate == Fraction(100, 62)
    assert rate_account(build_split_code_01(128, CAPS21), CAPS21).n == 79
    assert rate_account(build_split_code_01(200, CAPS21), CAPS21).n == 123


def test_split_code_admissible():
    for k in range(1, 9):
        for caps in (CAPS21, CAPS11, CAPS32):
            assert check_admissible(build_split_code_01(k, caps)).ok


def test_split_equal_caps_reduces_to_identity_shape():
    code = build_split_code_01(4, CAPS11)
    assert (code.im1, code.im2) == (16, 16)


def test_packing_code_frozen_values():
    code = build_packing_code_11(20, CAPS21)
    acct = rate_account(code, CAPS21)
    assert acct.n == 11 and acct.rate == Fraction(20, 11)
    assert code.im2 == 2048 and code.im1 == 1702532
    assert rate_account(build_packing_code_11(3, CAPS21), CAPS21).n == 2
    assert rate_account(build_packing_code_11(1, CAPS11), CAPS11).n == 1


def test_packing_code_admissible_and_budget():
    for k in range(1, 9):
        for caps in (CAPS21, CAPS11, CAPS32, ChannelCaps.of("3/2", "1/2")):
            code = build_packing_code_11(k, caps)
            assert check_admissible(code).ok
            acct = rate_account(code, caps)
            assert code.im1 * code.im2 >= 3 ** k
            assert acct.n1 <= acct.n and acct.n2 <= acct.n


def test_packing_fractional_caps_budget_sweep():
    for caps in (ChannelCaps.of("3/2", "1/2"), ChannelCaps.of("7/3", "1/3")):
        for k in range(1, 45):
            code = build_packing_code_11(k, caps)
            acct = rate_account(code, caps)
            p = caps.c1 + caps.c2
            assert 2 ** (acct.n * p.numerator) >= 3 ** (k * p.denominator) or acct.n == max(
                least_uses(code.im1, caps.c1), least_uses(code.im2, caps.c2)
            )


def test_admissibility_counterexample_and_refusal():
    bad = KShotCode(
        k=2,
        switches=SwitchPair(1, 1),
        phi1=lambda x, y: 0,
        phi2=lambda x, y: 0,
        psi=lambda a, b: 0,
        im1=1,
        im2=1,
        name="constant",
    )
    res = check_admissible(bad)
    assert not res.ok
    assert res.counterexample == {"x": "00", "y": "10", "expected": "10", "decoded": "00"}
    with pytest.raises(ZefcError) as err:
        check_admissible(build_identity_code(11))
    assert err.value.code == "k_too_large"


def test_admissibility_matches_oracle_on_all_builders():
    for k in (1, 2, 3):
        for code in (
            build_identity_code(k),
            build_split_code_01(k, CAPS21),
            build_packing_code_11(k, CAPS21),
        ):
            words = oracles.all_words(2, k)
            for xa in words:
                for ya in words:
                    x = sum(b << i for i, b in enumerate(xa))
                    y = sum(b << i for i, b in enumerate(ya))
                    want = sum(t * 3 ** i for i, t in enumerate(oracles.tuple_add(xa, ya)))
                    assert code.psi(code.phi1(x, y), code.phi2(x, y)) == want


def test_partition_code_single_block():
    code = code_from_partition([VectorSet.full_binary(1)])
    assert (code.im1, code.im2) == (3, 1)
    assert check_admissible(code).ok


def test_partition_code_singletons():
    blocks = [VectorSet.of(1, 2, [0]), VectorSet.of(1, 2, [1])]
    code = code_from_partition(blocks)
    assert (code.im1, code.im2) == (2, 2)
    assert check_admissible(code).ok


def test_partition_code_matches_chi_m_oracle():
    for k in (1, 2):
        size = 1 << k
        best = oracles.chim_bruteforce(k)
        for m, want in best.items():
            codes = []
            for partition in oracles.set_partitions(list(range(size))):
                if len(partition) != m:
                    continue
                blocks = [VectorSet.of(k, 2, block) for block in partition]
                code = code_from_partition(blocks)
                assert check_admissible(code).ok
                codes.append(code.im1)
            assert min(codes) == want


def test_partition_code_errors():
    with pytest.raises(ZefcError) as err:
        code_from_partition([VectorSet.of(1, 2, [0])])
    assert err.value.code == "not_a_partition"
    with pytest.raises(ZefcError):
        code_from_partition([VectorSet.of(1, 2, [0, 1]), VectorSet.of(1, 2, [1])])
    bad_coloring = [{(x, y): 0 for x in range(2) for y in range(2)}]
    with pytest.raises(ZefcError) as err:
        code_from_partition([VectorSet.full_binary(1)], bad_coloring)
    assert err.value.code == "invalid_coloring"
    partial = [{(0, 0): 0}]
    with pytest.raises(ZefcError) as err:
        code_from_partition([VectorSet.of(1, 2, [0, 1])], partial)
    assert err.value.code == "invalid_coloring"


def test_code_json_round_trip():
    for k in (1, 2, 3):
        for build in (
            lambda k=k: build_identity_code(k),
            lambda k=k: build_split_code_01(k, CAPS21),
            lambda k=k: build_packing_code_11(k, CAPS21),
        ):
            code = build()
            doc = code_to_json(code)
            assert doc["images"] == [code.im1, code.im2]
            back = code_from_json(doc)
            assert check_admissible(back).ok
            assert (back.im1, back.im2) == (code.im1, code.im2)
            assert code_to_json(back) == doc


def test_code_json_canonical_labels():
    doc = code_to_json(build_split_code_01(2, CAPS21))
    assert doc["switches"] == "01"
    assert doc["phi1"]["00,00"] == 0
    labels1 = sorted(set(doc["phi1"].values()))
    assert labels1 == list(range(len(labels1)))
    with pytest.raises(ZefcError):
        code_to_json(build_identity_code(11))
    with pytest.raises(ZefcError) as err:
        code_from_json({"k": 1})
    assert err.value.code == "bad_code_json"


def test_split_rate_capped_and_doubling_improves():
    cap_value = 1.6309297535714575
    rates = {}
    for k in range(1, 201):
        rates[k] = rate_account(build_split_code_01(k, CAPS21), CAPS21).rate
        assert float(rates[k]) <= cap_value + 1e-12
    for k in range(1, 101):
        gap_k = cap_value - float(rates[k])
        gap_2k = cap_value - float(rates[2 * k])
        assert gap_2k <= gap_k + 1e-9
    doubling = [float(rates[1 << j]) for j in range(8)]
    assert all(a <= b + 1e-12 for a, b in zip(doubling, doubling[1:]))

import json
import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from siegelmate.cf_arith import (BigAngle, ContinuedFraction, cf_expand, check_relation, convergent,
                                 dyadic_preimages, omega_double_sum, omega_of_theta, parse_rotation,
                                 staircase_rho, sturmian_point)
from siegelmate.errors import PrecisionError

GOLDEN = ContinuedFraction.golden()
bounded_cf = st.lists(st.integers(1, 6), min_size=45, max_size=60).map(lambda e: ContinuedFraction(tuple(e)))


def euclid_cf(p: int, q: int) -> list[int]:
    """Independent oracle: integer Euclidean algorithm on p/q < 1."""
    out = []
    while p:
        a, r = divmod(q, p)
        out.append(a)
        q, p = p, r
    return out


# -- continued fractions -----------------------------------------------------

def test_cf_expand_golden_and_sqrt2():
    assert cf_expand((math.sqrt(5) - 1) / 2, 10).entries == (1,) * 10
    assert cf_expand(math.sqrt(2) - 1, 6).entries == (2,) * 6


def test_cf_expand_matches_euclid_oracle():
    got = cf_expand(Fraction(613648, 1000000), 4)
    assert list(got.entries) == euclid_cf(613648, 1000000)[:4]
    assert got.entries == (1, 1, 1, 1)
    assert got.origin == "truncated"
    # float input agrees on the leading entries
    assert cf_expand(0.613648, 4).entries == got.entries


def test_cf_expand_short_rational_and_domain():
    assert cf_expand(Fraction(3, 8), 10).entries == tuple(euclid_cf(3, 8))
    for bad in (0, 1, 1.5, -0.2):
        with pytest.raises(ValueError):
            cf_expand(bad, 3)


def test_convergents_examples():
    fib = [convergent(GOLDEN, n) for n in range(1, 6)]
    assert fib == [Fraction(1), Fraction(1, 2), Fraction(2, 3), Fraction(3, 5), Fraction(5, 8)]
    two = ContinuedFraction((2,) * 6)
    assert [convergent(two, n) for n in range(1, 5)] == [Fraction(1, 2), Fraction(2, 5), Fraction(5, 12),
                                                         Fraction(12, 29)]
    assert convergent(two, 0) == 0
    with pytest.raises(IndexError):
        convergent(two, 7)


def test_entries_validated():
    with pytest.raises(ValueError):
        ContinuedFraction((1, 0, 2))
    with pytest.raises(ValueError):
        ContinuedFraction(())


@given(bounded_cf)
def test_convergent_determinant_identity(cf):
    conv = cf.convergents()
    for n in range(2, len(conv)):
        p, q = conv[n]
        pp, qq = conv[n - 1]
        assert p * qq - pp * q == (-1) ** (n - 1)
        assert q > qq


@given(bounded_cf)
def test_complement(cf):
    c = cf.complement()
    assert c.value == 1 - cf.value
    assert c.complement().entries == cf.entries


def test_golden_truncation_error():
    assert GOLDEN.error_bound < Fraction(1, 10**16)
    import mpmath
    mpmath.mp.dps = 40
    exact = (mpmath.sqrt(5) - 1) / 2
    v = GOLDEN.value
    assert abs(mpmath.mpf(v.numerator) / v.denominator - exact) < mpmath.mpf(10) ** -16


def test_parse_rotation():
    assert parse_rotation("cf:1x40").entries == (1,) * 40
    assert parse_rotation("cf:1,2,2x3").entries == (1, 2, 2, 2, 2)
    with pytest.warns(UserWarning):
        r = parse_rotation("0.618033988749895")
    assert r.entries[:10] == (1,) * 10
    with pytest.raises(ValueError):
        parse_rotation("cf:1,,2")
    assert ContinuedFraction((1, 2, 2, 2)).spec_string() == "cf:1,2x3"


# -- omega ------------------------------------------------------------------------

def test_omega_golden_digits_and_cf():
    w = omega_of_theta(GOLDEN, 256)
    assert w.digits(3) == [1, 0, 1]
    assert cf_expand(w.value, 6).entries == (1, 2, 2, 4, 8, 32)


def test_omega_error_bound_and_reference_value():
    w = omega_of_theta(GOLDEN, 256, terms=60)
    assert w.err_ulps == 62 << (256 - 60)
    # literal double sum over fractions p/q < theta, q <= 60
    exact = omega_double_sum(GOLDEN, 60)
    assert abs(w.value - exact) == 0
    full = omega_of_theta(GOLDEN, 256)
    assert abs(float(full) - 0.7098034428612913) < 1e-15


@settings(max_examples=40, deadline=None)
@given(bounded_cf, st.integers(1, 20))
def test_omega_reduction_matches_double_sum(cf, Q):
    w = omega_of_theta(cf, 64, terms=Q)
    assert w.value == omega_double_sum(cf, Q) % 1


@settings(max_examples=100, deadline=None)
@given(bounded_cf)
def test_omega_symmetry(cf):
    s = omega_of_theta(cf, 256) + omega_of_theta(cf.complement(), 256)
    assert s.distance_to_integer_ulps() <= s.err_ulps


def test_omega_precision_error_names_q():
    # a rational input makes q*theta an integer at q = 5
    with pytest.raises(PrecisionError) as ei:
        omega_of_theta(Fraction(2, 5), 64)
    assert ei.value.q == 5
    # a short continued fraction cannot certify deep floors
    with pytest.raises(PrecisionError) as ei:
        omega_of_theta(ContinuedFraction((1,) * 8), 256)
    assert ei.value.q is not None


# -- Sturmian points and the staircase -----------------------------------------

def test_sturmian_prefix_and_half_omega():
    p = sturmian_point(GOLDEN, 0, 256)
    assert p.digits(5) == [0, 1, 0, 1, 1]
    w = omega_of_theta(GOLDEN, 256)
    d = p - w.halved()
    assert d.distance_to_integer_ulps() <= d.err_ulps


def test_sturmian_phi_to_one_limit():
    P = 256
    phi = Fraction((1 << P) - 1, 1 << P)
    p = sturmian_point(GOLDEN, phi, P)
    w = omega_of_theta(GOLDEN, P)
    target = BigAngle(w.mantissa + (1 << P), P + 1, w.err_ulps)
    assert abs(float(p) - float(target)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(bounded_cf)
def test_sturmian_equals_half_omega(cf):
    d = sturmian_point(cf, 0, 256) - omega_of_theta(cf, 256).halved()
    assert d.distance_to_integer_ulps() <= d.err_ulps


def test_sturmian_in_semicircle():
    w = float(omega_of_theta(GOLDEN, 128))
    for phi in (Fraction(1, 7), Fraction(1, 3), Fraction(5, 9)):
        x = float(sturmian_point(GOLDEN, phi, 128))
        assert w / 2 - 1e-12 <= x <= (w + 1) / 2 + 1e-12


def test_staircase_examples():
    assert staircase_rho(BigAngle((1 << 64) - 1, 64), 64) == 1.0
    third = BigAngle.from_fraction(Fraction(1, 3), 128)
    assert staircase_rho(third, 100) == 0.5
    assert abs(staircase_rho(omega_of_theta(GOLDEN, 1100), 1000) - 0.618) < 0.01


@settings(max_examples=30, deadline=None)
@given(bounded_cf, bounded_cf)
def test_staircase_monotone(c1, c2):
    w1, w2 = omega_of_theta(c1, 300), omega_of_theta(c2, 300)
    if w1.value > w2.value:
        w1, w2 = w2, w1
    n = 256
    assert staircase_rho(w1, n) <= staircase_rho(w2, n) + 2 / n


# -- relation checker ----------------------------------------------------------------

def test_relation_complementary_pair_hits_zero():
    rep = check_relation(GOLDEN, GOLDEN.complement(), 0, 256)
    assert rep.argmin == (0, 0)
    assert rep.min_distance <= rep.error
    assert rep.verdict == "inconclusive"


def test_relation_golden_certified():
    rep = check_relation(GOLDEN, GOLDEN, 10, 256)
    assert rep.verdict == "certified_positive"
    assert len(rep.rows) == 121
    assert rep.min_distance > rep.error


def test_relation_self_at_N0():
    rep = check_relation(GOLDEN, GOLDEN, 0, 256)
    w = float(omega_of_theta(GOLDEN, 256))
    assert abs(rep.min_distance - min(2 * w % 1, 1 - 2 * w % 1)) < 1e-15
    assert rep.min_distance > 0


def test_relation_csv_and_headroom():
    rep = check_relation(GOLDEN, ContinuedFraction((2,) * 40), 2, 64)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,m,distance"
    assert len(lines) == 10
    with pytest.raises(ValueError):
        check_relation(GOLDEN, GOLDEN, 40, 64)


# -- angles ----------------------------------------------------------------------

def test_dyadic_examples():
    assert [a.value for a in dyadic_preimages(BigAngle.zero(8), 1)] == [0, Fraction(1, 2)]
    got = [a.value for a in dyadic_preimages(BigAngle.from_fraction(Fraction(1, 3), 64), 2)]
    t = BigAngle.from_fraction(Fraction(1, 3), 64).value
    assert got == [(t + j) / 4 for j in range(4)]
    assert all(abs(g - Fraction(k, 12)) < Fraction(1, 2**60) for g, k in zip(got, (1, 4, 7, 10)))


@given(st.integers(0, 2**40 - 1), st.integers(0, 6))
def test_dyadic_properties(m, k):
    t = BigAngle(m, 40)
    pre = dyadic_preimages(t, k)
    assert len(pre) == 2**k
    assert len({p.value for p in pre}) == 2**k
    assert [p.value for p in pre] == sorted(p.value for p in pre)
    for p in pre:
        assert p.doubled(k).with_bits(40).value == t.value


@given(st.fractions(min_value=0, max_value=1), st.fractions(min_value=0, max_value=1), st.integers(0, 20))
def test_bigangle_error_never_understated(x, y, k):
    a, b = BigAngle.from_fraction(x, 48), BigAngle.from_fraction(y, 48)
    exact = (x + y) * 2**k
    got = (a + b).doubled(k)
    diff = abs((got.value - exact) % 1)
    diff = min(diff, 1 - diff)
    assert diff <= Fraction(got.err_ulps, 2**got.bits)


def test_bigangle_json_roundtrip():
    w = omega_of_theta(GOLDEN, 256)
    data = json.loads(json.dumps(w.to_json()))
    assert set(data) == {"mantissa_hex", "bits", "err"}
    back = BigAngle.from_json(data)
    assert back.mantissa == w.mantissa and back.bits == w.bits and back.err_ulps >= w.err_ulps


def test_digits_beyond_reliability_raise():
    w = omega_of_theta(GOLDEN, 64)
    with pytest.raises(PrecisionError):
        w.digits(64)

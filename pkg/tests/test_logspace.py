import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeblocks.logspace import Log2Value, ceil_log2, int_ln, int_log2


@given(st.integers(1, 10**60))
@settings(max_examples=200, deadline=None)
def test_int_log2_matches_fraction_oracle(n):
    got = int_log2(n)
    # exact rational bracketing: 2^floor <= n < 2^(floor+1)
    fl = n.bit_length() - 1
    assert fl <= got <= fl + 1
    assert got == pytest.approx(math.log2(n), rel=1e-12) if n < 2**50 else True


def test_int_log2_huge():
    n = 1 << 10**6
    assert int_log2(n) == pytest.approx(10**6, rel=1e-12)
    assert int_ln(n) == pytest.approx(10**6 * math.log(2), rel=1e-12)


@pytest.mark.parametrize("n,e", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (1024, 10), (1025, 11)])
def test_ceil_log2(n, e):
    assert ceil_log2(n) == e


def test_log2value_rational_oracle_tiny():
    # exact rational oracle on a tiny instance with moderate exponents
    terms = [(Fraction(1, 2), 20), (Fraction(1, 8), 35), (Fraction(3, 4), 64)]
    exact = sum(lam * Fraction(2) ** E for lam, E in terms)
    acc = None
    for lam, E in terms:
        v = Log2Value.from_fraction(lam) * Log2Value.from_log2(E)
        acc = v if acc is None else acc + v
    got = 2.0 ** acc.fp * 2.0 ** acc.ip
    assert got == pytest.approx(float(exact), rel=1e-12)


def test_log2value_comparison_huge_exponents():
    a = Log2Value.from_log2(10**50) * Log2Value.from_fraction(Fraction(1, 3))
    b = Log2Value.from_log2(10**50 - 100)
    assert b < a
    assert not (a < b)
    assert (a + b).ip == a.ip  # adding something 2^-100 smaller changes nothing


def test_log2value_sum_against_floats():
    vals = [0.375, 1.5, 2.0, 11.25]
    acc = Log2Value.from_float(vals[0])
    for v in vals[1:]:
        acc = acc + Log2Value.from_float(v)
    assert acc.to_float() == pytest.approx(sum(vals), rel=1e-12)


def test_log2value_mul_div():
    a = Log2Value.from_int(48)
    b = Log2Value.from_int(6)
    assert (a / b).to_float() == pytest.approx(8.0, rel=1e-12)
    assert (a * b).to_float() == pytest.approx(288.0, rel=1e-12)


def test_log2value_rejects_nonpositive():
    with pytest.raises(ValueError):
        Log2Value.from_float(0.0)
    with pytest.raises(ValueError):
        Log2Value.from_fraction(Fraction(-1, 2))

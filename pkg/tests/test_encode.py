from fractions import Fraction
from math import gcd

from hypothesis import given, settings
from hypothesis import strategies as st

from ascoli.encode import (
    CantorPoint,
    ProductPoint,
    bin_expand,
    cantor_pair,
    cantor_unpair,
    embed_F,
    embed_Fprime,
    pair_cantor,
    prefix_distance_bound,
    prod_metric,
    rat_enum,
    rat_index,
)
from ascoli.exactnum import real_from_rational
from ascoli.funcspace import PiecewiseLinear, constant, identity

from conftest import unit_rationals


def enumeration_oracle(max_den):
    """Sort all reduced fractions by (denominator, numerator)."""
    out = [Fraction(0), Fraction(1)]
    pairs = sorted((q, p) for q in range(2, max_den + 1) for p in range(1, q) if gcd(p, q) == 1)
    return out + [Fraction(p, q) for q, p in pairs]


def test_enumeration_frozen_prefix():
    assert [rat_enum(i) for i in range(7)] == [0, 1, Fraction(1, 2), Fraction(1, 3),
                                              Fraction(2, 3), Fraction(1, 4), Fraction(3, 4)]
    assert rat_index(Fraction(1, 2)) == 2 and rat_index(Fraction(3, 4)) == 6 and rat_index(0) == 0


def test_enumeration_matches_oracle():
    oracle = enumeration_oracle(60)
    assert [rat_enum(i) for i in range(len(oracle))] == oracle


def test_enumeration_bijective():
    assert all(rat_index(rat_enum(i)) == i for i in range(10 ** 4))
    for q in range(1, 51):
        for p in range(0, q + 1):
            r = Fraction(p, q)
            assert rat_enum(rat_index(r)) == r


def test_pairing():
    assert [cantor_pair(0, k) for k in range(5)] == [0, 2, 5, 9, 14]
    assert all(cantor_pair(*cantor_unpair(p)) == p for p in range(5000))
    assert sorted(cantor_unpair(p) for p in range(3)) == [(0, 0), (0, 1), (1, 0)]


def test_bin_expand_examples():
    assert bin_expand(real_from_rational(0)).prefix(8) == "00000000"
    assert bin_expand(real_from_rational(Fraction(1, 2))).prefix(8) == "10000000"
    assert bin_expand(real_from_rational(Fraction(1, 3))).prefix(8) == "01010101"
    assert bin_expand(real_from_rational(1)).prefix(8) == "11111111"


def test_bin_expand_from_approximations():
    third = real_from_rational(Fraction(1, 3))
    blind = type(third)(third.approx)
    assert bin_expand(blind).prefix(12) == "010101010101"


def test_pair_cantor_examples():
    zeros = CantorPoint(lambda i: 0)
    ones = CantorPoint(lambda i: 1)
    assert pair_cantor(lambda i: zeros).prefix(20) == "0" * 20
    p = pair_cantor(lambda i: ones if i == 0 else zeros)
    assert [i for i in range(20) if p.bit(i)] == [0, 2, 5, 9, 14]


def test_pair_cantor_locality():
    touched = set()

    def element(i):
        return CantorPoint(lambda k: touched.add((i, k)) or 0)

    pair_cantor(element).prefix(3)
    assert touched == {(0, 0), (1, 0), (0, 1)}


def test_embeddings():
    half = PiecewiseLinear([(0, 0), (1, Fraction(1, 2))])
    assert embed_F(half).exact(2) == Fraction(1, 4)
    assert embed_F(identity()).exact(6) == Fraction(3, 4)
    assert embed_Fprime(constant(0)).prefix(30) == "0" * 30
    assert embed_Fprime(constant(1)).prefix(30) == "1" * 30
    assert embed_Fprime(identity()).bit(cantor_pair(2, 0)) == 1


def test_prod_metric_examples():
    ones = ProductPoint.from_rationals([], fill=1)
    zeros = ProductPoint.from_rationals([])
    for k in range(8):
        assert abs(prod_metric(ones, zeros, k).value - 2) <= Fraction(1, 2 ** k)
        assert prod_metric(zeros, zeros, k) == 0
    a = ProductPoint.from_rationals([0, 0, 0, Fraction(1, 2)])
    assert abs(prod_metric(a, zeros, 6).value - Fraction(1, 16)) <= Fraction(1, 64)


def test_prefix_distance_bound():
    assert [prefix_distance_bound(n) for n in (0, 1, 3)] == [2, Fraction(3, 2), 1]


def _point(values):
    return ProductPoint.from_rationals(values)


@settings(max_examples=60, deadline=None)
@given(st.lists(unit_rationals(), min_size=12, max_size=12),
       st.lists(unit_rationals(), min_size=12, max_size=12), st.integers(0, 8))
def test_coordinate_bound(xs, ys, k):
    x, y = _point(xs), _point(ys)
    d = prod_metric(x, y, k).value + Fraction(1, 2 ** k)
    assert all(abs(a - b) <= 2 ** i * d for i, (a, b) in enumerate(zip(xs, ys)))


@settings(max_examples=60, deadline=None)
@given(unit_rationals(4096), st.integers(0, 20))
def test_bits_reconstruct_value(q, n):
    bits = bin_expand(real_from_rational(q)).prefix(n)
    value = sum(Fraction(int(b), 2 ** (i + 1)) for i, b in enumerate(bits))
    assert 0 <= q - value <= Fraction(1, 2 ** n)

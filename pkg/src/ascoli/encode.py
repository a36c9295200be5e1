"""Rational enumeration, the embeddings into [0,1]^N and 2^N, and pairing.

The enumeration of the rationals in [0,1] is fixed: ``0, 1``, then reduced
fractions ordered by denominator and, within a denominator, by numerator.
"""
from bisect import bisect_right
from fractions import Fraction
from math import gcd, isqrt

from .errors import BudgetExceeded
from .exactnum import ONE, Dyadic, Real01, max_precision, pow2, round_dyadic

# cumulative[d] = index of the first fraction with denominator d (d >= 2)
_cumulative = [None, None, 2]
_by_denominator = {}


def _numerators(d):
    try:
        return _by_denominator[d]
    except KeyError:
        nums = _by_denominator[d] = [p for p in range(1, d) if gcd(p, d) == 1]
        return nums


def _extend_to(d):
    while len(_cumulative) <= d:
        prev = len(_cumulative) - 1
        _cumulative.append(_cumulative[prev] + len(_numerators(prev)))


def rat_enum(i):
    """The ``i``-th rational of [0,1]."""
    if i < 0:
        raise ValueError("index must be natural")
    if i < 2:
        return Fraction(i)
    d = 2
    while True:
        _extend_to(d + 1)
        if i < _cumulative[d + 1]:
            return Fraction(_numerators(d)[i - _cumulative[d]], d)
        d += 1


def rat_index(q):
    """Inverse of :func:`rat_enum`."""
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValueError(f"{q} outside [0,1]")
    if q == 0:
        return 0
    if q == 1:
        return 1
    d = q.denominator
    _extend_to(d)
    nums = _numerators(d)
    return _cumulative[d] + bisect_right(nums, q.numerator) - 1


def cantor_pair(i, k):
    return (i + k) * (i + k + 1) // 2 + k


def cantor_unpair(p):
    w = (isqrt(8 * p + 1) - 1) // 2
    k = p - w * (w + 1) // 2
    return w - k, k


class ProductPoint:
    """A point of [0,1]^N queried coordinate-wise to finite precision."""

    def __init__(self, coord, exact=None):
        self._coord = coord
        self._exact = exact
        self._cache = {}

    def coord(self, i, k):
        key = (i, k)
        try:
            return self._cache[key]
        except KeyError:
            d = self._cache[key] = self._coord(i, k)
            return d

    def exact(self, i):
        return None if self._exact is None else self._exact(i)

    def coordinate(self, i):
        return Real01(lambda k: self.coord(i, k), exact=self.exact(i))

    def snapshot(self, count, k):
        return [str(self.coord(i, k)) for i in range(count)]

    @classmethod
    def from_rationals(cls, values, fill=Fraction(0)):
        """Finitely many exact coordinates, the rest equal to ``fill``."""
        values = [Fraction(v) for v in values]

        def exact(i):
            return values[i] if i < len(values) else Fraction(fill)

        return cls(lambda i, k: round_dyadic(exact(i), k), exact=exact)


class CantorPoint:
    """An infinite bit sequence given by a bit oracle."""

    def __init__(self, bit):
        self._bit = bit
        self._bits = {}

    def bit(self, i):
        try:
            return self._bits[i]
        except KeyError:
            b = self._bits[i] = int(self._bit(i))
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
            return b

    def prefix(self, n):
        return "".join(str(self.bit(i)) for i in range(n))

    def __str__(self):
        return self.prefix(16) + "..."


def embed_F(f):
    """``f -> (f(q(i)))_i``."""
    return ProductPoint(lambda i, k: f.eval_rat(rat_enum(i), k),
                        exact=lambda i: f.exact(rat_enum(i)))


def prod_metric(x, y, k):
    """Dyadic within ``2**-k`` of ``sum_i 2**-i |x_i - y_i|``.

    Terms past ``k+2`` are dropped (their sum is at most ``2**-(k+2)``); the
    kept terms use coordinates at precision ``k+4``.
    """
    n = k + 2
    p = k + 4
    total = Dyadic(0)
    for i in range(n + 1):
        total = total + abs(x.coord(i, p) - y.coord(i, p)) * Dyadic(1, i)
    return total


def _exact_bit(q, i):
    if q == ONE:
        return 1
    return ((q.numerator << (i + 1)) // q.denominator) & 1


def bin_expand(x, budget=None):
    """Binary digits of ``x``: bit ``i`` has weight ``2**-(i+1)``.

    Dyadic rationals use the terminating expansion, except ``1`` which is
    ``111...``. Reals without an exact value are resolved from
    approximations; a digit sitting on a dyadic boundary cannot be resolved
    and raises :class:`BudgetExceeded` once ``budget`` bits are used.
    """
    if x.exact is not None:
        q = x.exact
        return CantorPoint(lambda i: _exact_bit(q, i))
    limit = max_precision() if budget is None else budget

    def bit(i):
        cells = 1 << (i + 1)
        p = i + 3
        while p <= limit:
            a = x.approx(p).value
            eps = pow2(-p)
            lo, hi = max(a - eps, Fraction(0)), min(a + eps, ONE)
            c = (lo.numerator * cells) // lo.denominator
            top = Fraction(c + 1, cells)
            if c == cells - 1 or hi < top:
                return c & 1 if c < cells else 1
            p *= 2
        raise BudgetExceeded(f"binary digit {i} undecided within {limit} bits")

    return CantorPoint(bit)


def pair_cantor(seq):
    """Interleave a sequence of Cantor points along the Cantor pairing."""
    def bit(p):
        i, k = cantor_unpair(p)
        return seq(i).bit(k)

    return CantorPoint(bit)


def embed_Fprime(f):
    point = embed_F(f)
    expansions = {}

    def element(i):
        try:
            return expansions[i]
        except KeyError:
            e = expansions[i] = bin_expand(point.coordinate(i))
            return e

    return pair_cantor(element)


def prefix_bits_per_coordinate(length):
    """For a Cantor prefix of ``length`` bits: coordinate -> digits covered."""
    counts = {}
    for p in range(length):
        i, _ = cantor_unpair(p)
        counts[i] = counts.get(i, 0) + 1
    return counts


def prefix_distance_bound(length):
    """Product distance bound implied by agreement on a Cantor prefix.

    Agreeing on the first ``b`` binary digits of a coordinate bounds that
    coordinate's difference by ``2**-b``; coordinates with no covered digit
    contribute their full weight.
    """
    counts = prefix_bits_per_coordinate(length)
    first_uncovered = 0
    while first_uncovered in counts:
        first_uncovered += 1
    total = Fraction(0)
    for i, b in counts.items():
        total += pow2(-i - b)
    # covered coordinates are exactly 0..first_uncovered-1
    total += pow2(1 - first_uncovered)
    return total


"""Exact rationals, dyadic rationals and Cauchy-represented reals in [0,1].

Rationals are plain :class:`fractions.Fraction`. A real in [0,1] is a map
``k -> Dyadic`` whose value at ``k`` is within ``2**-k`` of the real.
No floating point is used anywhere in the package.
"""
import os
from fractions import Fraction
from functools import total_ordering

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_MAX_PRECISION = 4096


def max_precision():
    """Bit budget for approximation loops (``ASCOLI_MAX_PRECISION``)."""
    raw = os.environ.get("ASCOLI_MAX_PRECISION")
    if not raw:
        return DEFAULT_MAX_PRECISION
    value = int(raw)
    if value <= 0:
        raise ValueError("ASCOLI_MAX_PRECISION must be positive")
    return value


def as_rational(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Dyadic):
        return value.value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"not an exact rational: {value!r}")


def parse_rational(text):
    """Parse ``"p/q"`` (or a bare integer ``"p"``)."""
    text = text.strip()
    if "*" in text:
        return parse_dyadic(text).value
    if "." in text or "e" in text.lower():
        raise ValueError(f"decimal notation not accepted: {text!r}")
    return Fraction(text)


def format_rational(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def ceil_log2(q):
    """Smallest integer ``t`` with ``2**t >= q`` for rational ``q > 0``."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    t = q.numerator.bit_length() - q.denominator.bit_length()
    while _pow2(t) < q:
        t += 1
    while _pow2(t - 1) >= q:
        t -= 1
    return t


def _pow2(t):
    return Fraction(1 << t) if t >= 0 else Fraction(1, 1 << -t)


def pow2(t):
    """``2**t`` as an exact rational, ``t`` any integer."""
    return _pow2(t)


@total_ordering
class Dyadic:
    """The rational ``mantissa / 2**exponent`` in canonical form.

    Canonical means the mantissa is odd or the exponent is zero, so equal
    values have equal fields.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa, exponent=0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if exponent < 0:
            raise ValueError("dyadic exponent must be natural")
        if mantissa == 0:
            exponent = 0
        else:
            while exponent > 0 and mantissa % 2 == 0:
                mantissa //= 2
                exponent -= 1
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def from_rational(cls, q):
        """Exact conversion; raises if the denominator is not a power of 2."""
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} is not dyadic")
        return cls(q.numerator, d.bit_length() - 1)

    @property
    def value(self):
        return Fraction(self.mantissa, 1 << self.exponent)

    def _coerce(self, other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        e = max(self.exponent, other.exponent)
        return Dyadic((self.mantissa << (e - self.exponent))
                      + (other.mantissa << (e - other.exponent)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.exponent)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.value == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, Dyadic):
            return self.value < other.value
        if isinstance(other, (int, Fraction)):
            return self.value < other
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return f"{self.mantissa}*2^-{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"


def parse_dyadic(text):
    mant, _, exp = text.strip().partition("*2^-")
    if not exp:
        raise ValueError(f"not a dyadic string: {text!r}")
    return Dyadic(int(mant), int(exp))


def round_dyadic(q, k):
    """Nearest dyadic of exponent ``k`` to ``q``; ties go toward zero."""
    q = Fraction(q)
    num = q.numerator << k
    den = q.denominator
    if q >= 0:
        # ceil(q*2^k - 1/2)
        m = -((den - 2 * num) // (2 * den))
    else:
        # floor(q*2^k + 1/2)
        m = (2 * num + den) // (2 * den)
    return Dyadic(m, k)


def floor_dyadic(q, k):
    q = Fraction(q)
    return Dyadic((q.numerator << k) // q.denominator, k)


def ceil_dyadic(q, k):
    q = Fraction(q)
    return Dyadic(-((-(q.numerator << k)) // q.denominator), k)


class Real01:
    """A real number in [0,1] given by dyadic approximations.

    ``approx(k)`` returns a dyadic within ``2**-k`` of the number. When the
    number is known exactly as a rational, ``exact`` holds it; downstream
    code uses it to avoid approximation loops.
    """

    __slots__ = ("_approx", "_cache", "exact")

    def __init__(self, approx, exact=None):
        self._approx = approx
        self._cache = {}
        self.exact = exact

    def approx(self, k):
        if k < 0:
            raise ValueError("precision index must be natural")
        try:
            return self._cache[k]
        except KeyError:
            pass
        d = self._approx(k)
        if not isinstance(d, Dyadic):
            raise TypeError("approximation must be a Dyadic")
        # clamp keeps the [0,1] invariant without hurting the error bound
        if d < 0:
            d = Dyadic(0)
        elif d > 1:
            d = Dyadic(1)
        self._cache[k] = d
        return d

    def bounds(self, k):
        """Closed rational interval of width ``2**(1-k)`` containing the number."""
        if self.exact is not None:
            return self.exact, self.exact
        a = self.approx(k).value
        eps = Fraction(1, 1 << k)
        return max(ZERO, a - eps), min(ONE, a + eps)

    def __repr__(self):
        if self.exact is not None:
            return f"Real01({format_rational(self.exact)})"
        return "Real01(<approximated>)"


def real_from_rational(q):
    q = as_rational(q)
    if not 0 <= q <= 1:
        raise ValueError(f"{q} is outside [0,1]")
    return Real01(lambda k: round_dyadic(q, k), exact=q)


def real_approx(x, k):
    return x.approx(k)


def real_dist(x, y, k):
    """Dyadic within ``2**-k`` of ``|x - y|``."""
    return abs(x.approx(k + 2) - y.approx(k + 2))

"""Continuous functions on [0,1] with moduli of continuity.

A *uniform modulus* ``phi_prime`` promises, for every member of a family,
``|x - y| < 2**-phi_prime(l)  =>  |f(x) - f(y)| < 2**-l``. A *pointwise
modulus* lets the radius depend on ``x``; it is rational valued and the
integer radius exponent is its ceiling.
"""
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import ModulusViolation
from .exactnum import (
    ONE,
    ZERO,
    Dyadic,
    as_rational,
    ceil_dyadic,
    ceil_log2,
    floor_dyadic,
    format_rational,
    max_precision,
    parse_rational,
    pow2,
    round_dyadic,
)

UNIFORM = "uniform"
POINTWISE = "pointwise"


def dyadic_grid(j):
    """``{i / 2**(j+1) : 0 <= i <= 2**(j+1)}``."""
    n = 1 << (j + 1)
    return [Fraction(i, n) for i in range(n + 1)]


def _ceil(q):
    return -((-q.numerator) // q.denominator)


# -- moduli -----------------------------------------------------------------


class UniformModulus:
    """``l -> phi_prime(l)``, made nondecreasing by running maxima."""

    def __init__(self, fn, spec=None):
        self._fn = fn
        self._values = []
        self.spec = spec

    @classmethod
    def affine(cls, slope=1, offset=0):
        slope, offset = int(slope), int(offset)
        if slope < 0:
            raise ValueError("modulus slope must be nonnegative")
        return cls(lambda l: max(0, slope * l + offset),
                   spec={"kind": "affine", "slope": slope, "offset": offset})

    @classmethod
    def lipschitz(cls, bound):
        """Modulus valid for every function with Lipschitz constant ``<= bound``."""
        bound = as_rational(bound)
        if bound <= 0:
            return cls.affine(0, 0)
        return cls.affine(1, ceil_log2(bound))

    def __call__(self, l):
        if l < 0:
            raise ValueError("precision index must be natural")
        while len(self._values) <= l:
            raw = int(self._fn(len(self._values)))
            if raw < 0:
                raise ValueError("modulus values must be natural")
            prev = self._values[-1] if self._values else 0
            self._values.append(max(prev, raw))
        return self._values[l]

    def to_json(self):
        if self.spec is None:
            raise ValueError("modulus has no serialisable form")
        return dict(self.spec)


class PointwiseModulus:
    """Rational valued ``phi(x, l)`` with a certificate of continuity in ``x``.

    ``continuity`` is a uniform modulus for ``x -> phi(x, l)`` (the same for
    every ``l``). ``lipschitz``, when given, is a rational bound
    ``|phi(x,l) - phi(y,l)| <= lipschitz * |x - y|`` and gives much tighter
    maximisation in :func:`uniformize_modulus`. ``ceiling``, when given, maps
    ``l`` to a known upper bound of ``phi(., l)``; maximisation stops as soon
    as a sampled value reaches it.
    """

    def __init__(self, phi, continuity, lipschitz=None, spec=None, ceiling=None):
        self._phi = phi
        self.continuity = continuity
        self.lipschitz = None if lipschitz is None else as_rational(lipschitz)
        self.spec = spec
        self.ceiling = ceiling

    @classmethod
    def from_uniform(cls, modulus):
        spec = None
        if modulus.spec is not None:
            spec = {"kind": "constant_in_x", "uniform": modulus.to_json()}
        return cls(lambda x, l: Fraction(modulus(l)), UniformModulus.affine(0, 0),
                   lipschitz=0, spec=spec, ceiling=lambda l: Fraction(modulus(l)))

    @classmethod
    def affine_in_x(cls, slope=1, offset=0, x_coeff=0):
        """``phi(x, l) = slope*l + offset + x_coeff*x``."""
        c = as_rational(x_coeff)
        slope, offset = int(slope), int(offset)

        def phi(x, l):
            return max(ZERO, slope * l + offset + c * x)

        return cls(phi, UniformModulus.lipschitz(abs(c)), lipschitz=abs(c),
                   ceiling=lambda l: max(ZERO, slope * l + offset + max(c, ZERO)),
                   spec={"kind": "affine_in_x", "slope": slope, "offset": offset,
                         "x_coeff": format_rational(c)})

    def __call__(self, x, l):
        value = as_rational(self._phi(as_rational(x), l))
        if value < 0:
            raise ModulusViolation(f"modulus negative at x={x}, l={l}")
        return value

    def index(self, x, l):
        """Integer radius exponent used at ``(x, l)``."""
        return _ceil(self(x, l))

    def to_json(self):
        if self.spec is None:
            raise ValueError("modulus has no serialisable form")
        return dict(self.spec)


def _psi(d, cap):
    """Piecewise linear upper bound for ``-log2(d)``, capped at ``cap``.

    Interpolates ``(2**-j, j)`` for ``j = 0..cap``; chords of a convex
    function lie above it.
    """
    if d >= 1:
        return ZERO
    if d <= pow2(-cap):
        return Fraction(cap)
    j = -ceil_log2(d)
    return j + (pow2(-j) - d) * (1 << (j + 1))


class GapDistanceModulus(PointwiseModulus):
    """Pointwise modulus for piecewise linear families steep only on gaps.

    Every member is assumed constant outside the listed gaps ``(b, a)`` and
    to have slope at most ``1/(a - b)`` on each gap. Then
    ``phi(x, l) = l + offset + h(x)`` with ``h(x)`` the largest
    ``min(lam_g, psi(dist(x, g)))`` over gaps ``g``, where
    ``lam_g = ceil(log2(1/(a-b)))``, is a sound modulus: no gap closer to
    ``x`` than the radius is steeper than ``2**h(x)``.
    """

    def __init__(self, gaps, offset=1):
        gaps = sorted((as_rational(b), as_rational(a)) for b, a in gaps)
        for (b, a), nxt in zip(gaps, gaps[1:] + [None]):
            if not b < a:
                raise ValueError("gap must have positive width")
            if nxt is not None and nxt[0] < a:
                raise ValueError("gaps overlap")
        self.gaps = gaps
        self.offset = int(offset)
        self._lefts = [b for b, _ in gaps]
        self._lams = [max(0, ceil_log2(1 / (a - b))) for b, a in gaps]
        self.cap = max(self._lams, default=0)
        spec = {"kind": "gap_distance", "offset": self.offset,
                "gaps": [[format_rational(b), format_rational(a)] for b, a in gaps]}
        super().__init__(self._eval, UniformModulus.affine(1, self.cap),
                         lipschitz=1 << self.cap, spec=spec,
                         ceiling=lambda l: Fraction(l + self.offset + self.cap))

    def local_exponent(self, x):
        x = as_rational(x)
        best = ZERO
        start = bisect_right(self._lefts, x)
        # gaps to the right of x: distance grows with the index
        for i in range(start, len(self.gaps)):
            b, _ = self.gaps[i]
            bound = _psi(b - x, self.cap)
            if bound <= best:
                break
            best = max(best, min(Fraction(self._lams[i]), bound))
        for i in range(start - 1, -1, -1):
            _, a = self.gaps[i]
            bound = _psi(max(ZERO, x - a), self.cap)
            if bound <= best:
                break
            best = max(best, min(Fraction(self._lams[i]), bound))
        return best

    def _eval(self, x, l):
        return l + self.offset + self.local_exponent(x)


def modulus_from_json(data):
    kind = data.get("kind")
    if kind == "affine":
        return UniformModulus.affine(data.get("slope", 1), data.get("offset", 0))
    if kind == "constant_in_x":
        return PointwiseModulus.from_uniform(modulus_from_json(data["uniform"]))
    if kind == "affine_in_x":
        return PointwiseModulus.affine_in_x(data.get("slope", 1), data.get("offset", 0),
                                            parse_rational(str(data.get("x_coeff", "0"))))
    if kind == "gap_distance":
        return GapDistanceModulus([(parse_rational(b), parse_rational(a))
                                   for b, a in data["gaps"]], data.get("offset", 1))
    raise ValueError(f"unknown modulus kind {kind!r}")


# -- functions --------------------------------------------------------------


class ContFunc:
    """Continuous ``[0,1] -> [0,1]`` presented by rational evaluation.

    Subclasses implement ``eval_rat(x, k)`` returning a dyadic within
    ``2**-k`` of ``f(x)`` for rational ``x``; ``exact(x)`` returns the exact
    rational value when it is available and ``None`` otherwise.
    """

    modulus = None

    def eval_rat(self, x, k):
        raise NotImplementedError

    def exact(self, x):
        return None

    def exact_on(self, xs):
        """Exact values on a sorted list of rationals (``None`` entries if unknown)."""
        return [self.exact(x) for x in xs]

    def dyadic_numerators(self, j):
        """Values on ``dyadic_grid(j)`` as ``(numerators, denominator)``, or ``None``."""
        values = self.exact_on(dyadic_grid(j))
        if any(v is None for v in values):
            return None
        return common_denominator(values)

    def bounds(self, x, k):
        """Closed interval containing ``f(x)``, of width at most ``2**(1-k)``."""
        v = self.exact(x)
        if v is not None:
            return v, v
        d = self.eval_rat(x, k).value
        eps = pow2(-k)
        return max(ZERO, d - eps), min(ONE, d + eps)


class PiecewiseLinear(ContFunc):
    """Linear interpolation through sorted breakpoints ``(x, y)``."""

    def __init__(self, breakpoints, modulus=None):
        pts = [(as_rational(x), as_rational(y)) for x, y in breakpoints]
        if len(pts) < 2:
            raise ValueError("need at least two breakpoints")
        if pts[0][0] != 0 or pts[-1][0] != 1:
            raise ValueError("breakpoints must cover 0 and 1")
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if not x0 < x1:
                raise ValueError("breakpoint x-values must be strictly increasing")
        for _, y in pts:
            if not 0 <= y <= 1:
                raise ValueError("breakpoint values must lie in [0,1]")
        self.breakpoints = tuple(pts)
        self._xs = [x for x, _ in pts]
        self.slopes = tuple((y1 - y0) / (x1 - x0)
                            for (x0, y0), (x1, y1) in zip(pts, pts[1:]))
        if modulus is None:
            modulus = UniformModulus.lipschitz(self.lipschitz_bound)
        self.modulus = modulus

    @property
    def lipschitz_bound(self):
        return max(abs(s) for s in self.slopes)

    def exact(self, x):
        x = as_rational(x)
        if not 0 <= x <= 1:
            raise ValueError(f"{x} outside [0,1]")
        i = min(bisect_right(self._xs, x) - 1, len(self.slopes) - 1)
        x0, y0 = self.breakpoints[i]
        return y0 + self.slopes[i] * (x - x0)

    __call__ = exact

    def exact_on(self, xs):
        out = []
        i = 0
        last = len(self.slopes) - 1
        xs_ = self._xs
        for x in xs:
            while i < last and xs_[i + 1] <= x:
                i += 1
            x0, y0 = self.breakpoints[i]
            out.append(y0 + self.slopes[i] * (x - x0))
        return out

    def dyadic_numerators(self, j):
        # on [x0, x1] the value at i/N is c + s*i/N with c = y0 - s*x0
        n = 1 << (j + 1)
        pieces = []
        den = 1
        for (x0, y0), s in zip(self.breakpoints, self.slopes):
            c = y0 - s * x0
            d = c.denominator * s.denominator * n
            pieces.append((c.numerator * s.denominator * n, s.numerator * c.denominator, d))
            den = den * d // gcd(den, d)
        out = []
        seg = 0
        last = len(pieces) - 1
        xs = self._xs
        for i in range(n + 1):
            while seg < last and i * xs[seg + 1].denominator >= xs[seg + 1].numerator * n:
                seg += 1
            base, step, d = pieces[seg]
            out.append((base + step * i) * (den // d))
        return out, den

    def eval_rat(self, x, k):
        return round_dyadic(self.exact(x), k)

    def to_json(self):
        return {"kind": "piecewise_linear",
                "breakpoints": [[format_rational(x), format_rational(y)]
                                for x, y in self.breakpoints]}

    def __eq__(self, other):
        return (isinstance(other, PiecewiseLinear)
                and self.breakpoints == other.breakpoints)

    def __hash__(self):
        return hash(self.breakpoints)

    def __repr__(self):
        inner = ", ".join(f"({x}, {y})" for x, y in self.breakpoints)
        return f"PiecewiseLinear([{inner}])"


class ApproxFunc(ContFunc):
    """A ContFunc given only by a dyadic evaluation routine."""

    def __init__(self, eval_rat, modulus):
        self._eval = eval_rat
        self.modulus = modulus

    def eval_rat(self, x, k):
        return self._eval(as_rational(x), k)


def common_denominator(values):
    """``(numerators, denominator)`` with ``values[i] == numerators[i] / denominator``."""
    den = 1
    for v in values:
        den = den * v.denominator // gcd(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in values], den


def constant(c):
    c = as_rational(c)
    return PiecewiseLinear([(0, c), (1, c)])


def identity():
    return PiecewiseLinear([(0, 0), (1, 1)])


def pl_sup_distance(f, g):
    """Exact ``sup |f - g|`` for piecewise linear ``f`` and ``g``.

    The difference is linear between merged breakpoints, so the supremum
    is attained at one of them.
    """
    xs = sorted({x for x, _ in f.breakpoints} | {x for x, _ in g.breakpoints})
    return max(abs(f.exact(x) - g.exact(x)) for x in xs)


# -- families ---------------------------------------------------------------


class FuncSeq:
    """Indexed family ``n -> f_n`` sharing one modulus.

    ``length`` is ``None`` for an unbounded family.
    """

    def __init__(self, at, modulus, flavor=None, length=None):
        if flavor is None:
            flavor = POINTWISE if isinstance(modulus, PointwiseModulus) else UNIFORM
        if flavor not in (UNIFORM, POINTWISE):
            raise ValueError(f"unknown flavor {flavor!r}")
        if flavor == UNIFORM and not isinstance(modulus, UniformModulus):
            raise ValueError("uniform family needs a UniformModulus")
        self._at = at
        self._cache = {}
        self.shared_modulus = modulus
        self.flavor = flavor
        self.length = length
        self.spec = None

    @classmethod
    def from_members(cls, members, modulus, flavor=None):
        members = list(members)
        seq = cls(members.__getitem__, modulus, flavor, length=len(members))
        return seq

    def at(self, n):
        if n < 0 or (self.length is not None and n >= self.length):
            raise IndexError(f"member {n} outside family")
        try:
            return self._cache[n]
        except KeyError:
            f = self._cache[n] = self._at(n)
            return f

    def members(self, count=None):
        if count is None:
            if self.length is None:
                raise ValueError("unbounded family needs an explicit count")
            count = self.length
        return [self.at(n) for n in range(count)]

    def as_pointwise(self):
        """The same family presented with a (degenerate) pointwise modulus."""
        if self.flavor == POINTWISE:
            return self
        seq = FuncSeq(self._at, PointwiseModulus.from_uniform(self.shared_modulus),
                      POINTWISE, self.length)
        seq._cache = self._cache
        return seq

    def radius_index(self, x, l):
        if self.flavor == UNIFORM:
            return self.shared_modulus(l)
        return self.shared_modulus.index(x, l)

    def to_json(self, count=None):
        if self.spec is not None and count is None:
            return dict(self.spec)
        members = self.members(count)
        if not all(isinstance(f, PiecewiseLinear) for f in members):
            raise ValueError("only piecewise linear members serialise")
        return {"flavor": self.flavor,
                "modulus": self.shared_modulus.to_json(),
                "members": [f.to_json() for f in members]}


def lipschitz_decay(count=None):
    """``f_n(x) = x / (n+1)`` with modulus ``l -> l``."""
    seq = FuncSeq(lambda n: PiecewiseLinear([(0, 0), (1, Fraction(1, n + 1))]),
                  UniformModulus.affine(1, 0), UNIFORM, count)
    seq.spec = {"kind": "builtin", "name": "lipschitz_decay",
                "params": {} if count is None else {"count": count}}
    return seq


def alternating_constants(values=(0, 1), count=None):
    vals = [as_rational(v) for v in values]
    seq = FuncSeq(lambda n: constant(vals[n % len(vals)]),
                  UniformModulus.affine(0, 0), UNIFORM, count)
    params = {"values": [format_rational(v) for v in vals]}
    if count is not None:
        params["count"] = count
    seq.spec = {"kind": "builtin", "name": "alternating_constants", "params": params}
    return seq


BUILTINS = {
    "lipschitz_decay": lambda params: lipschitz_decay(params.get("count")),
    "alternating_constants": lambda params: alternating_constants(
        [parse_rational(str(v)) for v in params.get("values", ["0/1", "1/1"])],
        params.get("count")),
}


def family_from_json(data):
    if data.get("kind") == "builtin":
        name = data.get("name")
        if name not in BUILTINS:
            raise ValueError(f"unknown builtin family {name!r}")
        return BUILTINS[name](data.get("params", {}))
    modulus = modulus_from_json(data["modulus"])
    members = []
    for entry in data["members"]:
        if entry.get("kind") != "piecewise_linear":
            raise ValueError(f"unknown member kind {entry.get('kind')!r}")
        members.append(PiecewiseLinear([(parse_rational(x), parse_rational(y))
                                        for x, y in entry["breakpoints"]]))
    return FuncSeq.from_members(members, modulus, data.get("flavor"))


# -- operations -------------------------------------------------------------


def eval_at(f, x, k):
    """Dyadic within ``2**-k`` of ``f(x)`` for a represented real ``x``."""
    p = f.modulus(k + 1) + 1
    return f.eval_rat(x.approx(p).value, k + 1)


def sup_dist_grid(f, g, phi_prime, k):
    """Bracket ``sup |f - g|`` by a grid maximum plus equicontinuity slack.

    Returns dyadics ``(lower, upper)`` with ``upper - lower <= 2**-k``.
    """
    j = phi_prime(k + 2)
    slack = pow2(-(k + 1))
    exact = True
    best = ZERO
    for y in dyadic_grid(j):
        a, b = f.exact(y), g.exact(y)
        if a is None or b is None:
            exact = False
            break
        best = max(best, abs(a - b))
    if exact:
        return floor_dyadic(best, k + 3), ceil_dyadic(best + slack, k + 3)
    p = k + 4
    err = Dyadic(1, k + 3)
    best = Dyadic(0)
    for y in dyadic_grid(j):
        best = max(best, abs(f.eval_rat(y, p) - g.eval_rat(y, p)))
    lower = best - err if best > err else Dyadic(0)
    return lower, best + err + Dyadic(1, k + 1)


def _cell_bound(phi, a, b, fa, fb):
    """Upper bound for ``phi`` on ``[a, b]`` from endpoint values, or None."""
    h = b - a
    gap = abs(fa - fb)
    if phi.lipschitz is not None:
        if gap > phi.lipschitz * h:
            raise ModulusViolation(
                f"Lipschitz certificate violated on [{a}, {b}]")
        return (fa + fb + phi.lipschitz * h) / 2
    # strict modulus: need h < 2**-c(m); take the largest such m
    m = None
    for cand in range(0, 64):
        if pow2(-phi.continuity(cand)) > h:
            m = cand
        else:
            break
    if m is None:
        return None
    if gap >= pow2(-m):
        raise ModulusViolation(f"continuity certificate violated on [{a}, {b}]")
    return min(fa, fb) + pow2(-m)


def uniformize_modulus(phi, l, max_depth=None):
    """``ceil(max_x phi(x, l))`` by certified branch and bound on [0,1].

    Cells are bisected until every cell's certified upper bound is at most
    the ceiling of the best value seen. Past ``max_depth`` bisections the
    ceiling of the remaining upper bounds is used instead, which is still
    an upper bound for ``phi``.
    """
    if max_depth is None:
        max_depth = min(max_precision(), 64)
    value = {ZERO: phi(ZERO, l), ONE: phi(ONE, l)}
    lower = max(value.values())
    target = _ceil(lower)
    top = None if phi.ceiling is None else _ceil(phi.ceiling(l))
    leftover = None
    stack = [(ZERO, ONE, 0)]
    while stack:
        if top is not None and target >= top:
            return max(0, target)
        a, b, depth = stack.pop()
        bound = _cell_bound(phi, a, b, value[a], value[b])
        if bound is not None and top is not None:
            bound = min(bound, top)
        if bound is not None and bound <= target:
            continue
        if depth >= max_depth:
            cap = _ceil(bound) if bound is not None else None
            if cap is None:
                raise ModulusViolation("continuity certificate too weak to bound phi")
            leftover = cap if leftover is None else max(leftover, cap)
            continue
        mid = (a + b) / 2
        value[mid] = phi(mid, l)
        if value[mid] > lower:
            lower = value[mid]
            target = _ceil(lower)
        stack.append((mid, b, depth + 1))
        stack.append((a, mid, depth + 1))
    result = target if leftover is None else max(target, leftover)
    return max(0, result)


def uniform_modulus_of(phi):
    """Lazy uniform modulus ``l -> uniformize_modulus(phi, l)``."""
    return UniformModulus(lambda l: uniformize_modulus(phi, l))


@dataclass
class ModulusReport:
    checked: int = 0
    vacuous: int = 0
    violations: list = field(default_factory=list)
    undetermined: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {
            "checked": self.checked,
            "vacuous": self.vacuous,
            "violations": [
                {"x": format_rational(x), "y": format_rational(y), "l": l, "n": n,
                 "diff": format_rational(d)}
                for x, y, l, n, d in self.violations],
            "undetermined": len(self.undetermined),
        }


def _diff_bounds(f, x, y, budget):
    fx, fy = f.exact(x), f.exact(y)
    if fx is not None and fy is not None:
        d = abs(fx - fy)
        return d, d
    lo = hi = None
    p = 8
    while p <= budget:
        ax, bx = f.bounds(x, p)
        ay, by = f.bounds(y, p)
        lo = max(ZERO, max(ax - by, ay - bx))
        hi = max(bx - ay, by - ax)
        if hi - lo <= pow2(-p + 2):
            break
        p *= 2
    return lo, hi


def check_modulus(seq, sample_pairs, indices=None):
    """Spot-check the family modulus on ``(x, y, l)`` triples.

    A triple is vacuous when ``|x - y|`` is not below the radius. For every
    other triple and every sampled member index, ``|f_n(x) - f_n(y)|`` must
    be below ``2**-l``.
    """
    if indices is None:
        count = 8 if seq.length is None else min(seq.length, 8)
        indices = range(count)
    indices = list(indices)
    budget = max_precision()
    report = ModulusReport()
    for x, y, l in sample_pairs:
        x, y = as_rational(x), as_rational(y)
        if not abs(x - y) < pow2(-seq.radius_index(x, l)):
            report.vacuous += 1
            continue
        bound = pow2(-l)
        for n in indices:
            report.checked += 1
            lo, hi = _diff_bounds(seq.at(n), x, y, budget)
            if lo >= bound:
                report.violations.append((x, y, l, n, lo))
            elif hi >= bound:
                report.undetermined.append((x, y, l, n))
    return report


def merged_breakpoints(functions):
    xs = set()
    for f in functions:
        xs.update(x for x, _ in f.breakpoints)
    return sorted(xs)


"""An equicontinuous family built from a 0/1-tree on the Cantor scaffold.

For a tree ``T`` let ``tilde(T)`` be its frontier: strings outside ``T``
all of whose proper prefixes are in ``T``. Each string ``s`` addresses the
middle-third interval ``[a_s, b_s]`` of width ``3**-len(s)``. Member ``f_n``
is 1 on frontier intervals longer than ``n``, 0 on the others, and linear
on the gaps between them. The family converges to 0 at every point but
keeps a value 1 somewhere for each ``n`` below the longest frontier string.
"""
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import UnresolvedLocation
from .exactnum import ONE, ZERO, as_rational, format_rational
from .funcspace import (
    POINTWISE,
    FuncSeq,
    GapDistanceModulus,
    PiecewiseLinear,
    check_modulus,
)


@dataclass(frozen=True)
class TildeNode:
    s: str
    a: Fraction
    b: Fraction


@dataclass(frozen=True)
class InInterval:
    s: str


@dataclass(frozen=True)
class InGap:
    v: str
    w: str


@dataclass(frozen=True)
class Unresolved:
    depth: int


def interval_of(s):
    a = ZERO
    scale = Fraction(1)
    for bit in s:
        scale /= 3
        if bit == "1":
            a += 2 * scale
    return a, a + scale


def tilde_nodes(tree, depth):
    """Frontier strings of length ``<= depth``, left to right."""
    out = []
    stack = [""]
    while stack:
        s = stack.pop()
        if s not in tree:
            a, b = interval_of(s)
            out.append(TildeNode(s, a, b))
        elif len(s) < depth:
            stack.extend((s + "1", s + "0"))
    return out


def surviving_nodes(tree, depth):
    """Members of length exactly ``depth``: branches not yet cut off."""
    return [s for s in tree.members_up_to(depth) if len(s) == depth]


def _descend(tree, s, direction, depth):
    """Follow the constant ``direction`` bit from ``s`` until leaving the tree."""
    while s in tree:
        if len(s) >= depth:
            return None
        s += direction
    return s


def locate(x, tree, depth):
    """Find the frontier interval or certified gap holding ``x``."""
    x = as_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f"{x} outside [0,1]")
    s = ""
    a, width = ZERO, ONE
    while True:
        if s not in tree:
            return InInterval(s)
        if len(s) >= depth:
            return Unresolved(depth)
        third = width / 3
        if x <= a + third:
            s += "0"
            width = third
        elif x >= a + 2 * third:
            s += "1"
            a += 2 * third
            width = third
        else:
            v = _descend(tree, s + "0", "1", depth)
            w = _descend(tree, s + "1", "0", depth)
            if v is None or w is None:
                return Unresolved(depth)
            return InGap(v, w)


def _level_value(s, n):
    return ONE if len(s) > n else ZERO


def f_n_eval(tree, n, x, depth):
    x = as_rational(x)
    loc = locate(x, tree, depth)
    if isinstance(loc, InInterval):
        return _level_value(loc.s, n)
    if isinstance(loc, Unresolved):
        raise UnresolvedLocation(f"{x} not resolved within depth {depth}", depth)
    _, bv = interval_of(loc.v)
    aw, _ = interval_of(loc.w)
    fv, fw = _level_value(loc.v, n), _level_value(loc.w, n)
    return fv + (x - bv) / (aw - bv) * (fw - fv)


def default_depth(tree):
    """Depth at which a closed tree's frontier is complete."""
    return tree.depth_budget + 1


class CounterexampleFamily(FuncSeq):
    """The family ``f_n`` of a finite tree, as piecewise linear members."""

    def __init__(self, tree, depth=None):
        if depth is None:
            depth = default_depth(tree)
        alive = surviving_nodes(tree, depth)
        if alive:
            raise ValueError(f"{len(alive)} branches survive to depth {depth}; "
                             "the frontier does not cover the Cantor set")
        self.tree = tree
        self.depth = depth
        self.nodes = tilde_nodes(tree, depth)
        self.gaps = [(u.b, v.a) for u, v in zip(self.nodes, self.nodes[1:])]
        self.max_length = max(len(u.s) for u in self.nodes)
        self._starts = [u.a for u in self.nodes]
        super().__init__(self._member, GapDistanceModulus(self.gaps), POINTWISE)

    def _member(self, n):
        pts = []
        for u in self.nodes:
            v = _level_value(u.s, n)
            pts.append((u.a, v))
            pts.append((u.b, v))
        return PiecewiseLinear(pts)

    def node_at(self, x):
        """The frontier node whose interval holds ``x``, or ``None`` in a gap."""
        i = bisect_right(self._starts, x) - 1
        if i >= 0 and self.nodes[i].a <= x <= self.nodes[i].b:
            return self.nodes[i]
        return None

    def vanishing_index(self, x):
        """Least ``n`` with ``f_m(x) = 0`` for every ``m >= n``."""
        u = self.node_at(x)
        if u is not None:
            return len(u.s)
        i = bisect_right(self._starts, x)
        return max(len(self.nodes[i - 1].s), len(self.nodes[i].s))

    def members_json(self):
        return self.to_json(count=self.max_length + 1)


def build_family(tree, depth=None):
    return CounterexampleFamily(tree, depth)


@dataclass
class NonuniformityReport:
    disjoint: bool
    range_ok: bool
    max_length: int
    vanishing: list = field(default_factory=list)
    vanishing_ok: bool = True
    witnesses: dict = field(default_factory=dict)
    witnesses_ok: bool = True
    slopes_ok: bool = True
    modulus: object = None
    problems: list = field(default_factory=list)

    @property
    def ok(self):
        return (self.disjoint and self.range_ok and self.vanishing_ok
                and self.witnesses_ok and self.slopes_ok
                and (self.modulus is None or self.modulus.ok))

    def to_json(self):
        return {
            "ok": self.ok,
            "disjoint": self.disjoint,
            "range_ok": self.range_ok,
            "max_tilde_length": self.max_length,
            "vanishing": [{"x": format_rational(x), "index": i} for x, i in self.vanishing],
            "vanishing_ok": self.vanishing_ok,
            "witnesses": {str(n): format_rational(x) for n, x in sorted(self.witnesses.items())},
            "witnesses_ok": self.witnesses_ok,
            "slopes_ok": self.slopes_ok,
            "modulus": None if self.modulus is None else self.modulus.to_json(),
            "problems": self.problems,
        }


def _modulus_samples(family, samples, levels=(0, 1, 2)):
    phi = family.shared_modulus
    pairs = []
    for x in samples:
        for l in levels:
            r = Fraction(1, 2 ** (phi.index(x, l) + 1))
            for y in (x - r, x + r):
                if 0 <= y <= 1:
                    pairs.append((x, y, l))
    return pairs


def verify_nonuniform(tree, depth=None, samples=()):
    """Exact checks that the family converges pointwise but not uniformly."""
    family = build_family(tree, depth)
    nodes = family.nodes
    disjoint = all(u.a < u.b for u in nodes) and all(
        u.b < v.a for u, v in zip(nodes, nodes[1:]))
    top = family.max_length
    members = [family.at(n) for n in range(top + 1)]
    range_ok = all(0 <= y <= 1 for f in members for _, y in f.breakpoints)
    report = NonuniformityReport(disjoint, range_ok, top)

    for x in samples:
        x = as_rational(x)
        idx = family.vanishing_index(x)
        report.vanishing.append((x, idx))
        values = [f.exact(x) for f in members]
        if any(v != 0 for v in values[idx:]) or (idx > 0 and values[idx - 1] == 0):
            report.vanishing_ok = False
            report.problems.append(f"vanishing index {idx} wrong at {x}")
        direct = [f_n_eval(tree, n, x, family.depth) for n in range(top + 1)]
        if direct != values:
            report.vanishing_ok = False
            report.problems.append(f"direct evaluation disagrees at {x}")

    longest = max(nodes, key=lambda u: len(u.s))
    for n in range(top):
        x = (longest.a + longest.b) / 2
        report.witnesses[n] = x
        if members[n].exact(x) != 1:
            report.witnesses_ok = False
            report.problems.append(f"witness for n={n} fails")

    # sup f_n = 1 exactly when some frontier string is longer than n
    for n in range(top + 2):
        f = members[n] if n <= top else family.at(n)
        sup = max(y for _, y in f.breakpoints)
        if (sup == 1) != any(len(u.s) > n for u in nodes):
            report.witnesses_ok = False
            report.problems.append(f"sup of f_{n} is {sup}")

    gap_ends = dict(family.gaps)
    for f in members:
        for ((x0, _), (x1, _)), slope in zip(zip(f.breakpoints, f.breakpoints[1:]), f.slopes):
            a = gap_ends.get(x0)
            if a is None:
                if slope != 0:
                    report.slopes_ok = False
                    report.problems.append(f"nonconstant piece on [{x0}, {x1}]")
            elif x1 != a or abs(slope) > 1 / (a - x0):
                report.slopes_ok = False
                report.problems.append(f"slope {slope} too steep on ({x0}, {a})")

    if samples:
        pairs = _modulus_samples(family, [as_rational(x) for x in samples[:20]])
        report.modulus = check_modulus(family, pairs, indices=range(top + 1))
    return report


def plot_rows(family, grid_level=None, count=None):
    """Rows ``(x, f_0(x), ..., f_N(x))`` on the grid ``i / 3**grid_level``."""
    if grid_level is None:
        grid_level = family.depth
    if count is None:
        count = family.max_length + 1
    n = 3 ** grid_level
    members = [family.at(m) for m in range(count)]
    for i in range(n + 1):
        x = Fraction(i, n)
        yield [x] + [f.exact(x) for f in members]

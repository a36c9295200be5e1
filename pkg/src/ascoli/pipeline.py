"""Extraction of uniformly convergent subsequences and their rate certificates.

The route is: encode each member as a Cantor point, extract a subsequence by
Bolzano-Weierstrass on Cantor space, then certify a uniform rate on a finite
dyadic grid. A grid of spacing ``2**-(j+1)`` with ``j = phi_prime(k+2)`` and
pointwise gaps below ``2**-(k+2)`` gives a sup gap below
``3 * 2**-(k+2) < 2**-k`` by equicontinuity.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .bw import Subsequence, bw_cantor, product_rate_levels
from .encode import embed_Fprime, rat_index
from .errors import CertificateFailure, HorizonInsufficient
from .exactnum import ZERO, format_rational, pow2
from .funcspace import (
    POINTWISE,
    UNIFORM,
    FuncSeq,
    PiecewiseLinear,
    UniformModulus,
    constant,
    dyadic_grid,
    pl_sup_distance,
    uniformize_modulus,
)

# product-metric rates beyond this are reported, not expanded into prefix lengths
PREFIX_RATE_LIMIT = 24


def grid_Y(j):
    """``{i / 2**(j+1) : 0 <= i <= 2**(j+1)}``."""
    return dyadic_grid(j)


def pointwise_to_uniform_rate(phi_prime, k):
    """Product-space rate that forces uniform ``2**-k`` closeness."""
    return k + max(rat_index(y) for y in grid_Y(phi_prime(k)))


@dataclass
class RateCertificate:
    k: int
    m: int
    grid_j: int
    margins: list
    verdict: str = "certified"
    sup_bound: Fraction = None
    tail_size: int = 0

    def to_json(self):
        return {"k": self.k, "m": self.m, "grid_j": self.grid_j,
                "margins": [format_rational(q) for q in self.margins],
                "verdict": self.verdict}


def _grid_table(seq, indices, j):
    """Values of the members on ``grid_Y(j)`` as integer rows over a shared denominator."""
    parts = []
    scale = 1
    for n in indices:
        part = seq.at(n).dyadic_numerators(j)
        if part is None:
            raise CertificateFailure(f"member {n} has no exact grid values")
        parts.append(part)
        scale = scale * part[1] // gcd(scale, part[1])
    return [[v * (scale // den) for v in nums] for nums, den in parts], scale


def _coarsen(rows, fine_j, j):
    """Restrict rows on ``grid_Y(fine_j)`` to the sub-grid ``grid_Y(j)``."""
    stride = 1 << (fine_j - j)
    return [row[::stride] for row in rows]


def verify_uniform_rate(seq, phi_prime, g, k, m, min_tail=2, rows=None, scale=1):
    """Check the grid condition for positions ``> m`` of ``g`` and certify ``2**-k``.

    ``rows``, if given, holds the grid values of every selected member as
    integers over the common denominator ``scale``.
    """
    j = phi_prime(k + 2)
    grid = grid_Y(j)
    indices = list(g)[m + 1:]
    if len(indices) < min_tail:
        raise CertificateFailure(
            f"only {len(indices)} selected terms beyond position {m}; need {min_tail}", k=k)
    if rows is None:
        rows, scale = _grid_table(seq, indices, j)
    else:
        rows = rows[m + 1:]
    margins = []
    for y, col in zip(grid, zip(*rows)):
        top, bottom = max(col), min(col)
        # top - bottom >= scale * 2**-(k+2)
        if (top - bottom) << (k + 2) >= scale:
            a, b = sorted((indices[col.index(top)], indices[col.index(bottom)]))
            gap = Fraction(top - bottom, scale)
            raise CertificateFailure(
                f"grid gap {format_rational(gap)} >= 2^-{k + 2} at y={format_rational(y)}"
                f" between members {a} and {b}",
                witness=(y, a, b), k=k)
        margins.append(Fraction(top - bottom, scale))
    eps = pow2(-(k + 2))
    sup_bound = max(margins) + 2 * eps
    assert sup_bound < 3 * eps < pow2(-k)
    return RateCertificate(k, m, j, margins, "certified", sup_bound, len(indices))


def _smallest_position(rows, shift, scale, min_tail):
    """Least ``m`` with every gap of ``rows[m+1:]`` below ``scale * 2**-shift``."""
    width = len(rows[0]) if rows else 0
    hi = list(rows[-1]) if rows else []
    lo = list(hi)
    best = None
    # suffix gaps only grow as the suffix is extended to the left
    for p in range(len(rows) - 1, 0, -1):
        row = rows[p]
        for c in range(width):
            v = row[c]
            if v > hi[c]:
                hi[c] = v
            elif v < lo[c]:
                lo[c] = v
        if len(rows) - p < min_tail:
            continue
        if any((h - l) << shift >= scale for h, l in zip(hi, lo)):
            break
        best = p - 1
    return best


def _descend(codes, horizon, depth):
    sub = bw_cantor(codes, horizon, depth)
    exhausted = sub.diagnostics.get("exhausted_at_level")
    if exhausted is not None:
        # keep the deepest level at which the greedy selection still completes
        sub = bw_cantor(codes, horizon, max(0, exhausted - 1))
        sub.diagnostics["requested_depth"] = depth
    return sub


def _prefix_support(sub, phi_prime, k_max):
    """What the Cantor prefix alone would certify, level by level."""
    reached = max(sub.rate)
    out = {}
    for k in range(k_max + 1):
        r = pointwise_to_uniform_rate(phi_prime, k)
        entry = {"product_rate": r}
        if r <= PREFIX_RATE_LIMIT:
            need = product_rate_levels(r)[r]
            entry["prefix_needed"] = need
            entry["prefix_implies"] = need <= reached
        else:
            entry["prefix_implies"] = False
        out[str(k)] = entry
    return out


def _certify(seq, phi_prime, sub, k_max, min_tail):
    indices = list(sub)
    fine_j = phi_prime(k_max + 2)
    table, scale = _grid_table(seq, indices, fine_j)
    certs = []
    m = 0
    for k in range(k_max + 1):
        rows = _coarsen(table, fine_j, phi_prime(k + 2))
        found = _smallest_position(rows, k + 2, scale, min_tail)
        if found is None:
            raise CertificateFailure(
                f"no position of the extracted subsequence is certifiable at k={k}"
                f" with {len(indices)} selected terms", k=k)
        m = max(m, found)
        certs.append(verify_uniform_rate(seq, phi_prime, sub, k, m, min_tail, rows, scale))
    return certs


def _codes(seq):
    cache = {}

    def code(n):
        try:
            return cache[n]
        except KeyError:
            c = cache[n] = embed_Fprime(seq.at(n))
            return c

    return code


def _check_horizon(seq, horizon):
    if seq.length is not None and seq.length < horizon:
        raise HorizonInsufficient(f"family has {seq.length} members, horizon {horizon}")


def aa_extract_uniform(seq, k_max, horizon, depth=256, min_tail=2):
    """Subsequence with certificates ``k = 0..k_max`` for a uniformly equicontinuous family."""
    if seq.flavor != UNIFORM:
        raise ValueError("aa_extract_uniform needs a uniform modulus")
    _check_horizon(seq, horizon)
    phi_prime = seq.shared_modulus
    sub = _descend(_codes(seq), horizon, depth)
    certs = _certify(seq, phi_prime, sub, k_max, min_tail)
    sub.diagnostics["prefix_support"] = _prefix_support(sub, phi_prime, k_max)
    sub.diagnostics["pointwise_to_uniform_rate"] = {
        str(k): pointwise_to_uniform_rate(phi_prime, k) for k in range(k_max + 1)}
    rate = {c.k: c.m + 1 for c in certs}
    return Subsequence(sub.indices, rate, sub.diagnostics), certs


def aa_extract_general(seq, k_max, horizon, depth=256, min_tail=2):
    """As :func:`aa_extract_uniform`, with the uniform modulus derived lazily.

    The subsequence is extracted before the modulus is touched; only the
    certification step evaluates ``uniformize_modulus``.
    """
    if seq.flavor != POINTWISE:
        seq = seq.as_pointwise()
    _check_horizon(seq, horizon)
    sub = _descend(_codes(seq), horizon, depth)
    phi = seq.shared_modulus
    used = {}

    def lazy(l):
        used[l] = uniformize_modulus(phi, l)
        return used[l]

    phi_prime = UniformModulus(lazy)
    sub.diagnostics["paired_instances"] = {
        "pointwise_on_rationals": {"kind": "bw_cantor", "horizon": horizon,
                                   "depth": sub.diagnostics["depth"]},
        "modulus": {"kind": "uniformize_modulus", "evaluated_after_extraction": True},
    }
    certs = _certify(seq, phi_prime, sub, k_max, min_tail)
    sub.diagnostics["uniformized"] = {str(l): v for l, v in sorted(used.items())}
    rate = {c.k: c.m + 1 for c in certs}
    return Subsequence(sub.indices, rate, sub.diagnostics), certs


def constant_family_reduction(xs, length=None):
    """Member ``n`` is the constant function ``xs(n)``; modulus ``l -> 0``."""
    def member(n):
        x = xs(n)
        if x.exact is None:
            raise ValueError("constant members need exact values")
        return constant(x.exact)

    return FuncSeq(member, UniformModulus.affine(0, 0), UNIFORM, length)


def tail_sup_gap(seq, sub, m):
    """Exact ``sup |f_a - f_b|`` over selected positions ``> m``.

    Each difference is piecewise linear with breakpoints among the union of
    all breakpoints, so the supremum is the largest spread at one of them.
    """
    members = [seq.at(n) for n in list(sub)[m + 1:]]
    if not all(isinstance(f, PiecewiseLinear) for f in members):
        raise ValueError("exact sup needs piecewise linear members")
    if len(members) < 2:
        return ZERO
    if len(members) == 2:
        return pl_sup_distance(*members)
    xs = sorted({x for f in members for x, _ in f.breakpoints})
    best = ZERO
    for x in xs:
        vals = [f.exact(x) for f in members]
        best = max(best, max(vals) - min(vals))
    return best

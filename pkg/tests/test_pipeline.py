from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ascoli.bw import BinTree, Subsequence, bw_unit
from ascoli.counterexample import build_family
from ascoli.errors import CertificateFailure
from ascoli.exactnum import real_from_rational
from ascoli.funcspace import (
    FuncSeq,
    PiecewiseLinear,
    PointwiseModulus,
    UniformModulus,
    alternating_constants,
    constant,
    identity,
    lipschitz_decay,
)
from ascoli.pipeline import (
    aa_extract_general,
    aa_extract_uniform,
    constant_family_reduction,
    grid_Y,
    pointwise_to_uniform_rate,
    tail_sup_gap,
    verify_uniform_rate,
)

lip = UniformModulus.affine(1, 0)


def test_grid_examples():
    assert grid_Y(0) == [0, Fraction(1, 2), 1]
    assert grid_Y(1) == [Fraction(i, 4) for i in range(5)]


def test_rate_table():
    assert pointwise_to_uniform_rate(UniformModulus.affine(0, 0), 0) == 2
    assert [pointwise_to_uniform_rate(lip, k) for k in range(2)] == [2, 7]
    rates = [pointwise_to_uniform_rate(lip, k) for k in range(9)]
    assert rates == sorted(rates) and all(r > k for k, r in enumerate(rates))


def test_verify_constant_family():
    seq = FuncSeq.from_members([constant(Fraction(1, 3))] * 8, UniformModulus.affine(0, 0))
    cert = verify_uniform_rate(seq, seq.shared_modulus, Subsequence(range(8), {}), 3, 0)
    assert cert.m == 0 and set(cert.margins) == {0}
    assert cert.to_json()["margins"][0] == "0/1"


def test_verify_decay_picks_least_position():
    seq = lipschitz_decay(200)
    g = Subsequence(range(200), {})
    # at y = 1 the tail gap is 1/(m+2) - 1/200, which must drop below 1/32
    m = next(m for m in range(200) if Fraction(1, m + 2) - Fraction(1, 200) < Fraction(1, 32))
    cert = verify_uniform_rate(seq, lip, g, 3, m)
    assert cert.grid_j == 5 and max(cert.margins) < Fraction(1, 32)
    with pytest.raises(CertificateFailure):
        verify_uniform_rate(seq, lip, g, 3, m - 1)


def test_verify_alternating_gives_witness():
    seq = FuncSeq.from_members([identity(), constant(0)] * 4, lip)
    with pytest.raises(CertificateFailure) as info:
        verify_uniform_rate(seq, lip, Subsequence(range(8), {}), 0, 0)
    y, n, n2 = info.value.witness
    assert abs(seq.at(n)(y) - seq.at(n2)(y)) >= Fraction(1, 4)


def test_extract_examples():
    same = FuncSeq(lambda n: identity(), lip, length=64)
    sub, certs = aa_extract_uniform(same, 3, 64)
    assert sub.indices == tuple(range(64)) and all(set(c.margins) == {0} for c in certs)
    seq = lipschitz_decay()
    sub, certs = aa_extract_uniform(seq, 6, 1024)
    for c in certs:
        assert tail_sup_gap(seq, sub, c.m) < Fraction(1, 2 ** c.k)
        # exact tail sup for x/(n+1) is attained at x = 1
        first, last = sub.indices[c.m + 1], sub.indices[-1]
        assert tail_sup_gap(seq, sub, c.m) == Fraction(1, first + 1) - Fraction(1, last + 1)
    sub, _ = aa_extract_uniform(alternating_constants(), 3, 64)
    assert sub.indices == tuple(range(0, 64, 2))


def test_general_matches_uniform_on_degenerate_modulus():
    seq = lipschitz_decay()
    a, ca = aa_extract_uniform(seq, 3, 256)
    b, cb = aa_extract_general(seq.as_pointwise(), 3, 256)
    assert a.indices == b.indices and [c.m for c in ca] == [c.m for c in cb]
    assert b.diagnostics["paired_instances"]["modulus"]["evaluated_after_extraction"]


def test_general_uses_uniformized_modulus():
    members = [PiecewiseLinear([(0, 0), (1, Fraction(1, n + 1))]) for n in range(64)]
    seq = FuncSeq.from_members(members, PointwiseModulus.affine_in_x(1, 0, 1))
    sub, certs = aa_extract_general(seq, 2, 64)
    assert sub.diagnostics["uniformized"] == {str(l): l + 1 for l in range(5)}
    assert [c.grid_j for c in certs] == [3, 4, 5]


def test_counterexample_fails_certification():
    tree = BinTree.from_members(["", "0"])
    fam = build_family(tree)
    seq = FuncSeq.from_members(fam.members(fam.max_length + 1), fam.shared_modulus)
    with pytest.raises(CertificateFailure):
        aa_extract_general(seq, 1, 3)


def test_constant_reduction():
    xs = [real_from_rational(n % 2) for n in range(64)]
    fam = constant_family_reduction(lambda n: xs[n], 64)
    assert fam.at(3) == constant(1)
    g, certs = aa_extract_uniform(fam, 3, 64)
    assert g.indices == bw_unit(xs, 64, 3).indices
    tail = [xs[n].exact for n in list(g)[certs[3].m + 1:]]
    assert max(tail) - min(tail) <= Fraction(1, 8)


def pl_family(seed_points, n):
    """Members interpolate towards a limit shape at rate 1/(n+1)."""
    limit, start = seed_points
    pts = [(x, y0 + (y1 - y0) / (n + 1)) for (x, y0), (_, y1) in zip(limit, start)]
    return PiecewiseLinear(pts)


shapes = st.lists(st.integers(0, 8), min_size=3, max_size=3)


@settings(max_examples=10, deadline=None)
@given(shapes, shapes, st.integers(0, 3))
def test_certificates_are_sound(a, b, k):
    xs = [Fraction(0), Fraction(1, 2), Fraction(1)]
    limit = [(x, Fraction(v, 8)) for x, v in zip(xs, a)]
    start = [(x, Fraction(v, 8)) for x, v in zip(xs, b)]
    members = [pl_family((limit, start), n) for n in range(128)]
    seq = FuncSeq.from_members(members, UniformModulus.lipschitz(4))
    try:
        sub, certs = aa_extract_uniform(seq, k, 128)
    except CertificateFailure:
        return
    for c in certs:
        assert tail_sup_gap(seq, sub, c.m) < Fraction(1, 2 ** c.k)

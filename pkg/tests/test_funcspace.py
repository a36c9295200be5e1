import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ascoli.errors import ModulusViolation
from ascoli.exactnum import real_from_rational
from ascoli.funcspace import (
    FuncSeq,
    GapDistanceModulus,
    PiecewiseLinear,
    PointwiseModulus,
    UniformModulus,
    check_modulus,
    constant,
    dyadic_grid,
    eval_at,
    family_from_json,
    identity,
    lipschitz_decay,
    pl_sup_distance,
    sup_dist_grid,
    uniformize_modulus,
)

from conftest import pl_functions, unit_rationals


def test_eval_at_examples():
    assert eval_at(identity(), real_from_rational(Fraction(1, 2)), 6) == Fraction(1, 2)
    c = constant(Fraction(2, 7))
    assert abs(eval_at(c, real_from_rational(Fraction(1, 9)), 10).value - Fraction(2, 7)) <= Fraction(1, 1024)
    f = PiecewiseLinear([(0, 0), (Fraction(1, 3), 1), (1, 1)])
    v = eval_at(f, real_from_rational(Fraction(1, 6)), 8).value
    assert abs(v - Fraction(1, 2)) <= Fraction(1, 256)


def test_sup_dist_grid_examples():
    lip = UniformModulus.affine(1, 0)
    f = PiecewiseLinear([(0, 0), (Fraction(1, 2), 1), (1, 0)])
    lo, hi = sup_dist_grid(f, f, lip, 5)
    assert lo == 0 and hi.value <= Fraction(1, 32)
    lo, hi = sup_dist_grid(identity(), constant(0), lip, 4)
    assert lo.value <= 1 <= hi.value
    lo, hi = sup_dist_grid(constant(Fraction(1, 2)), constant(0), UniformModulus.affine(0, 0), 3)
    assert lo.value <= Fraction(1, 2) <= hi.value


def test_uniformize_examples():
    flat = PointwiseModulus.from_uniform(UniformModulus.affine(1, 0))
    assert [uniformize_modulus(flat, l) for l in range(5)] == [0, 1, 2, 3, 4]
    tilt = PointwiseModulus.affine_in_x(1, 0, 1)
    assert [uniformize_modulus(tilt, l) for l in range(5)] == [1, 2, 3, 4, 5]
    # l + x(1-x) has maximum l + 1/4; Lipschitz constant 1
    bump = PointwiseModulus(lambda x, l: l + x * (1 - x), UniformModulus.lipschitz(1), lipschitz=1)
    assert [uniformize_modulus(bump, l) for l in range(4)] == [1, 2, 3, 4]


def test_lying_lipschitz_certificate_detected():
    liar = PointwiseModulus(lambda x, l: 8 * x, UniformModulus.affine(1, 0), lipschitz=1)
    with pytest.raises(ModulusViolation):
        uniformize_modulus(liar, 0)


def test_check_modulus_examples():
    consts = FuncSeq.from_members([constant(0), constant(1)], UniformModulus.affine(0, 0))
    assert check_modulus(consts, [(Fraction(0), Fraction(1), 3)]).ok
    lip = lipschitz_decay(8)
    pairs = [(Fraction(i, 7), Fraction(i, 7) + Fraction(1, 2 ** (l + 1)), l)
             for i in range(4) for l in range(4)]
    assert check_modulus(lip, pairs).ok
    wrong = FuncSeq.from_members([identity()], UniformModulus.affine(0, 0))
    report = check_modulus(wrong, [(Fraction(0), Fraction(1, 2), 2)])
    assert not report.ok
    assert report.violations[0][:3] == (Fraction(0), Fraction(1, 2), 2)


def test_modulus_running_max():
    m = UniformModulus(lambda l: [3, 1, 4, 1, 5][l])
    assert [m(l) for l in range(5)] == [3, 3, 4, 4, 5]


def test_dyadic_grid_counts():
    assert dyadic_grid(0) == [0, Fraction(1, 2), 1]
    assert all(len(dyadic_grid(j)) == 2 ** (j + 1) + 1 for j in range(11))


def test_pl_validation():
    with pytest.raises(ValueError):
        PiecewiseLinear([(0, 0), (Fraction(1, 2), 1)])
    with pytest.raises(ValueError):
        PiecewiseLinear([(0, 0), (Fraction(1, 2), 2), (1, 0)])
    with pytest.raises(ValueError):
        PiecewiseLinear([(0, 0), (Fraction(1, 2), 1), (Fraction(1, 2), 0), (1, 0)])


def test_family_json_round_trip():
    f = PiecewiseLinear([(0, Fraction(1, 3)), (Fraction(1, 2), 1), (1, 0)])
    seq = FuncSeq.from_members([f, identity()], UniformModulus.lipschitz(2))
    data = json.loads(json.dumps(seq.to_json()))
    back = family_from_json(data)
    assert back.members() == [f, identity()]
    assert back.shared_modulus(5) == seq.shared_modulus(5)


def test_gap_modulus_json():
    phi = GapDistanceModulus([(Fraction(1, 9), Fraction(2, 9)), (Fraction(1, 3), Fraction(2, 3))])
    assert phi.cap == 4
    assert phi(Fraction(1, 2), 0) == 1 + 2
    assert phi(Fraction(3, 20), 0) == 1 + 4


@settings(max_examples=60, deadline=None)
@given(pl_functions(), pl_functions(), st.integers(0, 6))
def test_sup_bracket_contains_exact_sup(f, g, k):
    modulus = UniformModulus.lipschitz(max(f.lipschitz_bound, g.lipschitz_bound))
    lo, hi = sup_dist_grid(f, g, modulus, k)
    exact = pl_sup_distance(f, g)
    assert lo.value <= exact <= hi.value
    assert hi.value - lo.value <= Fraction(1, 2 ** k)


@settings(max_examples=60, deadline=None)
@given(pl_functions(), unit_rationals(), st.integers(0, 12), st.integers(0, 12))
def test_eval_at_coherence(f, q, k, k2):
    x = real_from_rational(q)
    gap = abs(eval_at(f, x, k).value - eval_at(f, x, k2).value)
    assert gap <= Fraction(1, 2 ** k) + Fraction(1, 2 ** k2)
    assert abs(eval_at(f, x, k).value - f(q)) <= Fraction(1, 2 ** k)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=4, unique=True), st.integers(0, 3),
       st.lists(unit_rationals(256), min_size=64, max_size=64))
def test_uniformize_dominates(cuts, l, xs):
    cuts = sorted(cuts)
    gaps = [(Fraction(2 * c, 64), Fraction(2 * c + 1, 64)) for c in cuts]
    phi = GapDistanceModulus(gaps)
    top = uniformize_modulus(phi, l)
    assert all(phi(x, l) <= top for x in xs)


@settings(max_examples=40, deadline=None)
@given(pl_functions(), st.lists(st.tuples(unit_rationals(), unit_rationals()), max_size=10),
       st.integers(0, 5))
def test_lipschitz_modulus_is_sound(f, pairs, l):
    seq = FuncSeq.from_members([f], UniformModulus.lipschitz(f.lipschitz_bound))
    assert check_modulus(seq, [(x, y, l) for x, y in pairs]).ok


@settings(max_examples=60, deadline=None)
@given(pl_functions(max_den=24), st.integers(0, 7))
def test_dyadic_numerators_are_exact(f, j):
    nums, den = f.dyadic_numerators(j)
    assert [Fraction(v, den) for v in nums] == [f(y) for y in dyadic_grid(j)]

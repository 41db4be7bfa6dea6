from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mahlerkit.automaton import to_mahler_system
from mahlerkit.demos import demo_automaton
from mahlerkit.exactalg import NumberField, Poly, RatFunc
from mahlerkit.relations import (
    Dependent,
    FailureWitness,
    Independent,
    SectionCertificate,
    certify,
    decide_independence,
    echelonize,
    find_relations,
    incremental_kernel,
    polys_to_vector,
    reduce_by_relation,
    s_columns,
    vector_to_polys,
    zero_bound,
    zero_bound_pre_ceiling,
)
from mahlerkit.series import AtLeast, AugmentedStream, ListStream, from_recursion, inner_valuation
from mahlerkit.system import MahlerSystem, augment_constant

from .oracles import striped_matrix, sym_left_kernel

Q = NumberField.rationals()
Z = RatFunc.z(Q)


def P(*cs, field=Q):
    return Poly(field, list(cs))


def proportional(u, v) -> bool:
    """u and v are k(z)-proportional polynomial vectors."""
    return all(not (a * d - b * c) for (a, b) in zip(u, v) for (c, d) in zip(u, v))


@pytest.fixture(scope="module")
def thue3_q():
    return to_mahler_system(demo_automaton("thue3", Q))


# -- zero bound -----------------------------------------------------------------

def test_zero_bound_examples():
    assert zero_bound(2, 2, 3, 0, 1) == 9565938
    assert zero_bound_pre_ceiling(2, 2, 3, 0, 1) == Fraction(3**14 * 8 - 3, 4)
    assert zero_bound(1, 0, 2, 0, 0) == 32
    with pytest.raises(ValueError):
        zero_bound(0, 1, 2, 0, 0)


def test_pre_ceiling_needs_integer_exponent():
    with pytest.raises(ValueError):
        zero_bound_pre_ceiling(1, 0, 3, 0, 0)  # exponent 1/2 + 4
    # ceiling of an irrational number: q^(9/2) * 3 / 2 with q = 3
    exact = sympy.ceiling((sympy.Integer(3) ** sympy.Rational(9, 2) * 3) / 2)
    assert zero_bound(1, 0, 3, 0, 0) == int(exact)


@settings(max_examples=60)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(2, 4), st.integers(0, 3), st.integers(0, 3))
def test_zero_bound_matches_sympy_and_is_monotone(n, d, q, nu, h):
    e = n * (sympy.Rational(q * h + d + 1, q - 1) + q + 1)
    raw = (sympy.Integer(q) ** e * (h + q) + nu - sympy.Rational(h + d, q - 1)) / (q - 1)
    c = zero_bound(n, d, q, nu, h)
    assert c == int(sympy.ceiling(raw))
    assert zero_bound(n + 1, d, q, nu, h) >= c
    assert zero_bound(n, d + 1, q, nu, h) >= c
    assert zero_bound(n, d, q, nu, h + 1) >= c


# -- striped matrix and kernels ---------------------------------------------------

def test_thue3_columns(thue3):
    _, f = thue3
    cols = [[int(x.to_fraction()) for x in c] for c in s_columns(f, 1, 4)]
    assert cols == [[0, 1, 0, 0], [0, 1, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]]


def test_vector_poly_round_trip(K):
    w = (P(1, 2, field=K), P(0, 0, 3, field=K))
    v = polys_to_vector(w, 3)
    assert vector_to_polys(v, 2, K) == w
    with pytest.raises(ValueError):
        polys_to_vector(w, 1)


seqs = st.lists(st.lists(st.integers(-1, 1), min_size=2, max_size=2), min_size=12, max_size=12)


@settings(max_examples=60)
@given(seqs, st.integers(0, 2), st.integers(1, 12))
def test_kernel_matches_sympy(coeffs, h, m):
    f = ListStream([[Fraction(x) for x in v] for v in coeffs], Q)
    res = incremental_kernel(f, h, max_columns=m, window=10**9)
    rows = striped_matrix(coeffs, h, m)
    expected = sym_left_kernel(rows)
    assert res.dimension == len(expected)
    exp_basis = [[Fraction(int(sympy.numer(x)), int(sympy.denom(x))) for x in v] for v in expected]
    from mahlerkit.exactalg import SubspaceBasis

    assert res.basis == SubspaceBasis(Q, 2 * (h + 1), exp_basis)


@settings(max_examples=30)
@given(seqs, st.integers(0, 2))
def test_kernel_shrinks_with_columns(coeffs, h):
    f = ListStream([[Fraction(x) for x in v] for v in coeffs], Q)
    dims = [incremental_kernel(f, h, max_columns=m, window=10**9).dimension for m in range(1, 12)]
    assert dims == sorted(dims, reverse=True)


# -- certificates -----------------------------------------------------------------

def test_certify_examples(thue3, four, K):
    s, f = thue3
    one, zero = Poly.const(K, 1), Poly.const(K, 0)
    wit = certify([one, zero], s, f)
    assert isinstance(wit, FailureWitness) and wit.index == 2 and wit.is_input
    s4, f4 = four
    z = Poly.z(K)
    cert = certify([z, -one, -one, z], s4, f4)
    assert isinstance(cert, SectionCertificate) and cert.check(s4, f4)
    assert isinstance(certify([zero] * 4, s4, f4), SectionCertificate)
    with pytest.raises(ValueError):
        certify([one], s4, f4)


def test_certificate_check_rejects_tampering(four, K):
    s, f = four
    z, one = Poly.z(K), Poly.const(K, 1)
    cert = certify([z, -one, -one, z], s, f)
    bad = SectionCertificate((one, -one, -one, z), cert.H, cert.order, cert.members, cert.table)
    assert not bad.check(s, f)


def test_sections_failure_beyond_input():
    # <w, f> vanishes to the screened order but a section does not
    s = MahlerSystem(2, [[1 + Z]], Q)
    f = ListStream([[1]] + [[0]] * 200 + [[1]] + [[0]] * 10, Q)
    wit = certify([Poly.const(Q, 1)], s, f, screen=100)
    assert isinstance(wit, FailureWitness)


# -- decisions --------------------------------------------------------------------

def test_thue3_independent(thue3):
    s, f = thue3
    dec = decide_independence(s, f)
    assert isinstance(dec, Independent) and dec.columns_used <= 64


def test_four_state_relation(four, K):
    s, f = four
    dec = decide_independence(s, f)
    assert isinstance(dec, Dependent)
    z, one = Poly.z(K), Poly.const(K, 1)
    assert proportional(dec.w, (z, -one, -one, z))
    assert inner_valuation(dec.w, f, 10**4) == AtLeast(10**4)


def test_augmented_thue3_relations(thue3):
    s, f = thue3
    rb = find_relations(augment_constant(s), AugmentedStream(f))
    K = s.field
    assert rb.method == "height" and rb.status == "certified" and rb.rank == 1
    assert proportional(rb.generators[0], (P(1, -1, field=K), P(1, -1, field=K), P(-1, field=K)))


def test_zero_stream_single_function():
    s = MahlerSystem(2, [[RatFunc.const(Q, 1)]], Q)
    rb = find_relations(s, ListStream([[0]] * 10, Q))
    assert rb.rank == 1 and rb.generators == [(Poly.const(Q, 1),)]


def test_reduce_by_relation_duplicate_function(thue3_q):
    s, f = thue3_q
    one, zero = RatFunc.const(Q, 1), RatFunc.const(Q, 0)
    a = s.A[0]
    dup = MahlerSystem(3, [[a[0], a[1], zero], [s.A[1][0], s.A[1][1], zero], [a[0], a[1] - one, one]], Q)
    sub, keep = reduce_by_relation(dup, [Poly.const(Q, 1), Poly.const(Q, 0), Poly.const(Q, -1)])
    assert keep == (0, 1)
    assert sub.A == s.A


def test_reduce_then_lift_on_augmented(thue3_q):
    s, f = thue3_q
    sa = augment_constant(s)
    rb = find_relations(sa, AugmentedStream(f), method="reduction")
    assert rb.rank == 1 and rb.status == "certified"
    assert proportional(rb.generators[0], (P(1, -1), P(1, -1), P(-1)))


def test_echelonize():
    g1 = (P(1), P(0, 1), P(0))
    g2 = (P(2), P(0, 3), P(1, 1))
    out = echelonize([g1, g2])
    assert len(out) == 2
    # pivot of the first generator (index 1, degree 1) is cancelled from the second
    assert out[1][1].degree < 1
    assert echelonize([g1, tuple(2 * x for x in g1)]) == [g1]


# -- planted relations ---------------------------------------------------------------

def _plant(s, f, p, r):
    """Third function p f_1 + r f_2 appended to a 2x2 system with A(0) = I."""
    A = s.A
    pp, rr = RatFunc(Poly(Q, p)), RatFunc(Poly(Q, r))
    zero = RatFunc.const(Q, 0)
    row = [pp * A[0][0] + rr * A[1][0] - pp.compose_power(s.q),
           pp * A[0][1] + rr * A[1][1] - rr.compose_power(s.q), RatFunc.const(Q, 1)]
    sp = MahlerSystem(s.q, [[A[0][0], A[0][1], zero], [A[1][0], A[1][1], zero], row], Q)
    f0 = f.coefficient(0)
    seed = [tuple(f0) + (Q(p[0]) * f0[0] + Q(r[0]) * f0[1],)]
    return sp, from_recursion(sp, seed)


planted = st.tuples(st.lists(st.integers(-4, 4), min_size=1, max_size=3),
                    st.lists(st.integers(-4, 4), min_size=1, max_size=3))


@settings(max_examples=100)
@given(pr=planted)
def test_planted_relations_certify(pr, thue3_q):
    s, f = thue3_q
    p, r = pr
    sp, g = _plant(s, f, p, r)
    rb = find_relations(sp, g, method="reduction")
    assert rb.rank == 1 and rb.status == "certified"
    assert proportional(rb.generators[0], (Poly(Q, p), Poly(Q, r), Poly.const(Q, -1)))
    assert rb.certificates[0].check(sp, g)


@pytest.mark.parametrize("p,r", [([-2, 1], [3, 3]), ([3, -3], [-1, -3])])
def test_planted_relations_height_search(p, r, thue3_q):
    s, f = thue3_q
    sp, g = _plant(s, f, p, r)
    rb = find_relations(sp, g, method="height")
    assert rb.rank == 1 and rb.status == "certified"
    assert proportional(rb.generators[0], (Poly(Q, p), Poly(Q, r), Poly.const(Q, -1)))


@settings(max_examples=15)
@given(pr=planted)
def test_certified_relations_vanish_far(pr, thue3_q):
    s, f = thue3_q
    sp, g = _plant(s, f, *pr)
    rb = find_relations(sp, g, method="reduction")
    for w, ok in zip(rb.generators, rb.certified):
        if ok:
            assert inner_valuation(w, g, 10**4) == AtLeast(10**4)

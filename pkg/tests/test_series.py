from __future__ import annotations

import threading
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mahlerkit.exactalg import NumberField, Poly, RatFunc
from mahlerkit.series import (
    AtLeast,
    AugmentedStream,
    InconsistentSeed,
    ListStream,
    RecursionStream,
    SubStream,
    Valuation,
    from_recursion,
    inner_valuation,
    normalized_stream,
    seed_of,
    unnormalized_stream,
)
from mahlerkit.system import MahlerSystem

from .oracles import binary_partitions, four_state_coeffs, thue3_coeff

Q = NumberField.rationals()
Z = RatFunc.z(Q)


def ints(stream, length, j=0):
    return [int(x.to_fraction()) for x in stream.component(j, length)]


def test_thue3_seed_and_prefix(thue3):
    s, f = thue3
    assert seed_of(s, f) == [f.coefficient(0)]
    assert ints(f, 6) == [0, 0, 1, 0, 0, 1]


def test_binary_partitions():
    s = MahlerSystem(2, [[1 / (1 - Z)]], Q)
    f = from_recursion(s, [(1,)])
    assert ints(f, 300) == binary_partitions(300)
    assert ints(normalized_stream(s, f), 50) == [1] + [0] * 49


@pytest.mark.parametrize("name", ["thue3", "four"])
def test_automaton_and_recursion_agree(name, request):
    s, f = request.getfixturevalue(name)
    r = RecursionStream(s, seed_of(s, f))
    assert r.prefix(2000) == f.prefix(2000)


def test_automaton_streams_match_digit_oracles(thue3, four):
    assert ints(thue3[1], 2000) == [thue3_coeff(n) for n in range(2000)]
    pre = four[1].prefix(729)
    assert [tuple(int(x.to_fraction()) for x in v) for v in pre] == [four_state_coeffs(n) for n in range(729)]


def test_state_blocks_cover_prefix(four):
    _, f = four
    got = np.concatenate([blk for _, blk in f.state_blocks(1000, block=97)])
    assert len(got) == 1000
    assert [int(x) for x in got[:300]] == [f.state(i) for i in range(300)]


def test_inconsistent_seed():
    # nu = 1: the z^0 coefficient of the right side must vanish, and f~_0 = 1 forces 0 = 1
    s = MahlerSystem(2, [[1 / Z]], Q)
    with pytest.raises(InconsistentSeed):
        RecursionStream(s, [(1,), (0,)][: s.nu // (s.q - 1) + 1])
    with pytest.raises(ValueError):
        RecursionStream(MahlerSystem(2, [[1 + Z]], Q), [(1,), (2,)])


def test_seed_with_pole_at_zero():
    # f(z) = f(z^2)/z has no nonzero power series solution
    s = MahlerSystem(2, [[1 / Z]], Q)
    assert RecursionStream(s, [(0,), (0,)][: s.nu + 1]).prefix(20) == [(Q.zero,)] * 20


def test_inner_valuation_examples(thue3, four):
    s, f = thue3
    one, z = Poly.const(s.field, 1), Poly.z(s.field)
    zero = Poly.const(s.field, 0)
    assert inner_valuation([one, zero], f, 100) == Valuation(2)
    assert inner_valuation([one, one], f, 100) == Valuation(0)  # f_1 + f_2 = 1/(1-z)
    assert inner_valuation([zero, zero], f, 100) == AtLeast(100)
    s4, f4 = four
    w = [z, -one, -one, z]
    assert inner_valuation(w, f4, 10**4) == AtLeast(10**4)


def test_sub_and_augmented_streams(four):
    _, f = four
    sub = SubStream(AugmentedStream(f), [3, 4])
    assert sub.prefix(3) == [(f.coefficient(0)[3], f.field.one)] + [(f.coefficient(i)[3], f.field.zero) for i in (1, 2)]


@settings(max_examples=30)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=4), st.integers(2, 3))
def test_normalization_round_trip(beta_tail, q):
    beta = Poly(Q, [1] + beta_tail)
    s = MahlerSystem(q, [[RatFunc(Poly(Q, [1, 1])) / RatFunc(beta)]], Q)
    f = from_recursion(s, [(1,)])
    back = unnormalized_stream(s, normalized_stream(s, f))
    assert back.prefix(80) == f.prefix(80)
    # the functional equation holds coefficientwise: beta(z) f(z) = (1+z) f(z^q)
    cf = [x[0] for x in f.prefix(80)]
    lhs = [sum((beta.coeff(k) * cf[i - k] for k in range(min(i, beta.degree) + 1)), Q.zero) for i in range(80)]
    sub = [cf[i // q] if i % q == 0 else Q.zero for i in range(81)]
    rhs = [sub[i] + (sub[i - 1] if i else Q.zero) for i in range(80)]
    assert lhs == rhs


@settings(max_examples=20)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.integers(1, 60))
def test_finiteness_is_invariant_under_normalization(beta_tail, length):
    # w f = 0 iff w f~ = 0 since f~ = u f with u a unit
    beta = Poly(Q, [1] + beta_tail)
    s = MahlerSystem(2, [[RatFunc(Poly(Q, [1, 1])) / RatFunc(beta), RatFunc.const(Q, 0)],
                         [RatFunc.const(Q, 0), RatFunc(Poly(Q, [1, 1])) / RatFunc(beta)]], Q)
    f = from_recursion(s, [(1, 1)])
    ft = normalized_stream(s, f)
    w = [Poly.const(Q, 1), Poly.const(Q, -1)]
    assert isinstance(inner_valuation(w, f, length), AtLeast)
    assert isinstance(inner_valuation(w, ft, length), AtLeast)
    w2 = [Poly.const(Q, 1), Poly.const(Q, 0)]
    assert inner_valuation(w2, f, length) == inner_valuation(w2, ft, length) == Valuation(0)


def test_concurrent_reads_are_consistent(thue3):
    s, _ = thue3
    r = RecursionStream(s, [(0, 1)])
    results = []

    def worker():
        results.append(r.prefix(3000))

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(x == results[0] for x in results)


def test_list_stream_bounds():
    st_ = ListStream([(Fraction(1),), (Fraction(2),)], Q)
    assert st_.coefficient(1) == (Q(2),)
    with pytest.raises(IndexError):
        st_.coefficient(-1)

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from mahlerkit.exactalg import NumberField, SubspaceBasis
from mahlerkit.series import AugmentedStream
from mahlerkit.system import augment_constant
from mahlerkit.values import (
    Algebraic,
    Transcendental,
    numeric_check,
    saturate_at,
    value_relation_basis,
    verdict,
    weighted_verdict,
)

from .oracles import four_state_coeffs, thue3_coeff
from .test_system import _perturbed

Q = NumberField.rationals()


def mp_value(coeff, x, terms=400):
    return mpmath.fsum(coeff(n) * x**n for n in range(terms))


@pytest.fixture(scope="module")
def thue3_phi(thue3, phi):
    s, f = thue3
    return verdict(s, f, phi)


def test_thue3_at_phi(thue3_phi, phi, K):
    half = K(Fraction(1, 2))
    assert thue3_phi.verdicts == [Algebraic(-phi * half), Algebraic(-phi * half)]
    assert thue3_phi.point_class.kind.l == 0
    assert thue3_phi.complete
    # independent oracle: f_1(phi) from the digit sequence
    mpmath.mp.dps = 50
    x = (1 - mpmath.sqrt(5)) / 2
    assert abs(mp_value(thue3_coeff, x) + x / 2) < mpmath.mpf(10) ** -40


def test_thue3_kernel_at_phi(thue3, phi, K):
    s, f = thue3
    r = value_relation_basis(s, f, phi)
    assert r.kernel == SubspaceBasis(K, 2, [[1, -1]])
    assert r.relations.rank == 0


def test_thue3_at_half(thue3, K):
    s, f = thue3
    rep = verdict(s, f, K(Fraction(1, 2)))
    assert rep.verdicts == [Transcendental(), Transcendental()]
    # only f_1 + f_2 = 1/(1-z) survives, which gives f_1(1/2) + f_2(1/2) = 2
    assert rep.value_relations == SubspaceBasis(K, 3, [[1, 1, -2]])


def test_four_state_at_phi(four, phi, K):
    s, f = four
    rep = verdict(s, f, phi)
    assert rep.verdicts == [Transcendental()] * 4
    vals = value_relation_basis(s, f, phi).value_relations
    assert vals == SubspaceBasis(K, 4, [[1, 1, -1, -1], [phi, -1, -1, phi]])
    mpmath.mp.dps = 50
    x = (1 - mpmath.sqrt(5)) / 2
    v = [mp_value(lambda n, j=j: four_state_coeffs(n)[j], x) for j in range(4)]
    assert abs(v[0] + v[1] - v[2] - v[3]) < mpmath.mpf(10) ** -40
    assert abs(x * v[0] - v[1] - v[2] + x * v[3]) < mpmath.mpf(10) ** -40


def test_weighted_verdicts(four, phi, K):
    s, f = four
    assert weighted_verdict(s, f, phi, (1, 1, 1, 1)).verdict == Algebraic(-phi)
    wv = weighted_verdict(s, f, phi, (1, 1, -1, -1))
    assert wv.verdict == Algebraic(K.zero) and wv.kernel_part is not None
    assert weighted_verdict(s, f, phi, (1, 0, 0, 0)).verdict == Transcendental()
    # independent check of the sum: f_1 + ... + f_4 = 1/(1-z) and 1/(1-phi) = -phi
    assert (1 - phi).inverse() == -phi


@pytest.mark.parametrize("l", [1, 2, 3])
def test_value_relations_do_not_depend_on_l(thue3, phi, l):
    s, f = thue3
    sa, fa = augment_constant(s), AugmentedStream(f)
    base = value_relation_basis(sa, fa, phi)
    assert value_relation_basis(sa, fa, phi, l=l).value_relations == base.value_relations


def test_l_below_minimum_rejected(thue3, K):
    s, f = thue3
    with pytest.raises(ValueError):
        value_relation_basis(s, f, K(Fraction(1, 2)), l=0)


def test_pole_pullback_matches_direct():
    sb, fa, alpha = _perturbed()
    direct = value_relation_basis(augment_constant(_thue3_q()), fa, alpha)
    pulled = value_relation_basis(sb, fa, alpha)
    assert pulled.trace["bbc"] and pulled.trace["inner_size"] == 6
    assert pulled.value_relations == direct.value_relations == SubspaceBasis(Q, 3, [[1, 1, -2]])


def _thue3_q():
    from mahlerkit.automaton import to_mahler_system
    from mahlerkit.demos import demo_automaton

    return to_mahler_system(demo_automaton("thue3", Q))[0]


def test_saturation_divides_common_zero(K):
    from mahlerkit.exactalg import Poly

    a = K(Fraction(1, 3))
    lin = Poly(K, [-a, 1])
    g = (lin * Poly(K, [1, 1]), lin * Poly(K, [2]))
    out = saturate_at([g], a)
    assert out == [(Poly(K, [1, 1]), Poly(K, [2]))]


def test_numeric_check_thue3(thue3_phi, thue3, phi, K):
    _, f = thue3
    wrong = -phi * K(Fraction(1, 2)) + K(Fraction(1, 100))
    rows = numeric_check(thue3_phi, f, 2000, 256, extra=[("perturbed", [K.one], wrong, False)])
    assert all(r.ok for r in rows)
    assert not rows[-1].contains_zero
    assert all(r.residual.abs_upper(256) < Fraction(1, 10**60) for r in rows[:-1])


def test_numeric_check_four_state(four, phi):
    s, f = four
    rep = verdict(s, f, phi)
    rows = numeric_check(rep, f, 2000, 256)
    assert rows and all(r.ok for r in rows)

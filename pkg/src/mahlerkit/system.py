"""Mahler systems f(z) = A(z) f(z^q) and their behaviour at algebraic points."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactalg import (
    BASE_PRECISION,
    MAX_PRECISION,
    FieldElem,
    NumberField,
    Poly,
    RatFunc,
    det_ratfunc,
    embed_ball,
    identity_matrix,
    mat_mul,
    poly_lcm,
    poly_roots_modulus_lower_bound,
)


class DegenerateSystem(ValueError):
    """The matrix of the system is singular over k(z)."""


class AskMorePrecision(ArithmeticError):
    """A modulus comparison could not be settled within the precision cap."""


class PoleOnOrbit(ValueError):
    def __init__(self, l: int):
        super().__init__(f"alpha^(q^{l}) is a pole of the matrix")
        self.l = l


def _as_ratfunc(x, field: NumberField) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly):
        return RatFunc(x)
    return RatFunc.const(field, field(x))


class MahlerSystem:
    """An invertible n x n matrix A over k(z) and a base q >= 2.

    On construction the lcm of the denominators is split as
    ``b = gamma * z^nu * beta`` with ``beta(0) = 1`` and ``A_hat = b*A/gamma``
    is kept as a polynomial matrix; ``d`` is the largest entry degree of b*A.
    """

    def __init__(self, q: int, matrix: Sequence[Sequence], field: NumberField | None = None):
        if q < 2:
            raise ValueError("base q must be at least 2")
        n = len(matrix)
        if n == 0 or any(len(row) != n for row in matrix):
            raise ValueError("matrix must be square and nonempty")
        if field is None:
            field = next(x.field for row in matrix for x in row if hasattr(x, "field"))
        self.q = q
        self.n = n
        self.field = field
        self.A: tuple[tuple[RatFunc, ...], ...] = tuple(tuple(_as_ratfunc(x, field) for x in row) for row in matrix)
        self.det = det_ratfunc(self.A)
        if self.det.is_zero():
            raise DegenerateSystem("det A(z) = 0")
        b = Poly.const(field, 1)
        for row in self.A:
            for x in row:
                b = poly_lcm(b, x.den)
        self.b = b
        self.nu = b.valuation()
        self.gamma: FieldElem = b.c[self.nu]
        ginv = self.gamma.inverse()
        self.beta = Poly(field, b.c[self.nu:]) * ginv
        full = [[x.num * b.exact_div(x.den) for x in row] for row in self.A]
        self.d = max((max(p.degree, 0) for row in full for p in row), default=0)
        self.A_hat: tuple[tuple[Poly, ...], ...] = tuple(tuple(p * ginv for p in row) for row in full)

    def __repr__(self) -> str:
        return f"MahlerSystem(q={self.q}, n={self.n}, d={self.d}, nu={self.nu})"

    def __eq__(self, other) -> bool:
        return isinstance(other, MahlerSystem) and self.q == other.q and self.A == other.A

    def __hash__(self) -> int:
        return hash((self.q, self.A))

    def matrix_at(self, x: FieldElem) -> list[list[FieldElem]]:
        return [[e(x) for e in row] for row in self.A]

    def pretty(self) -> list[list[str]]:
        return [[str(e) for e in row] for row in self.A]


def rho(s: MahlerSystem) -> Fraction:
    """A radius in (0, 1] below the modulus of every nonzero pole of A or A^-1."""
    best: Fraction | float = math.inf
    for p in (s.b, s.det.num, s.det.den):
        bound = poly_roots_modulus_lower_bound(p)
        if bound < best:
            best = bound
    return Fraction(1) if best >= 1 else Fraction(best)


def iterate(s: MahlerSystem, l: int) -> list[list[RatFunc]]:
    """A_l(z) = A(z) A(z^q) ... A(z^(q^(l-1)))."""
    acc = identity_matrix(s.field, s.n)
    for j in range(l):
        acc = mat_mul(acc, [[x.compose_power(s.q ** j) for x in row] for row in s.A])
    return acc


def iterate_at(s: MahlerSystem, l: int, alpha: FieldElem) -> list[list[FieldElem]]:
    """A_l(alpha) as a product of evaluated factors; raises PoleOnOrbit."""
    acc = identity_matrix(s.field, s.n, FieldElem)
    point = alpha
    for j in range(l):
        if not s.b(point):
            raise PoleOnOrbit(j)
        acc = mat_mul(acc, s.matrix_at(point))
        point = point ** s.q
    return acc


@dataclass(frozen=True)
class Regular:
    def __str__(self) -> str:
        return "Regular"


@dataclass(frozen=True)
class SingularDetZero:
    l: int

    def __str__(self) -> str:
        return f"SingularDetZero({self.l})"


@dataclass(frozen=True)
class SingularPole:
    l: int

    def __str__(self) -> str:
        return f"SingularPole({self.l})"


@dataclass(frozen=True)
class PointClass:
    alpha: FieldElem
    kind: Regular | SingularDetZero | SingularPole
    l_star: int
    precision: int

    @property
    def regular(self) -> bool:
        return isinstance(self.kind, Regular)


def _below(alpha: FieldElem, power: int, bound: Fraction, prec: int) -> bool | None:
    """Is |alpha|^power < bound?  None when the boxes do not decide it."""
    if alpha.is_rational():
        return abs(alpha.to_fraction()) ** power < bound
    lo, hi = embed_ball(alpha, prec).abs_bounds(prec)
    hi_p = hi ** power
    if hi_p < bound:
        return True
    if lo ** power >= bound:
        return False
    return None


def l_star(s: MahlerSystem, alpha: FieldElem, precision: int = BASE_PRECISION) -> tuple[int, int]:
    """Smallest l with |alpha^(q^l)| < rho certified; returns (l, precision used)."""
    r = rho(s)
    prec = precision
    while True:
        if not alpha:
            raise ValueError("alpha must be nonzero")
        if not alpha.is_rational():
            lo, hi = embed_ball(alpha, prec).abs_bounds(prec)
            if lo >= 1:
                raise ValueError("alpha must satisfy 0 < |alpha| < 1")
        elif abs(alpha.to_fraction()) >= 1:
            raise ValueError("alpha must satisfy 0 < |alpha| < 1")
        undecided = False
        l = 0
        while True:
            verdict = _below(alpha, s.q ** l, r, prec)
            if verdict is True:
                return l, prec
            if verdict is None:
                undecided = True
                break
            l += 1
            if l > 64:
                undecided = True
                break
        if undecided:
            prec *= 2
            if prec > MAX_PRECISION:
                raise AskMorePrecision(f"|alpha| could not be compared with rho = {r} at {MAX_PRECISION} bits")


def classify_point(s: MahlerSystem, alpha: FieldElem, precision: int = BASE_PRECISION) -> PointClass:
    """Regular, or the first l < l_star where alpha^(q^l) is a pole or a zero of det."""
    alpha = s.field(alpha)
    ls, prec = l_star(s, alpha, precision)
    point = alpha
    for l in range(ls):
        if not s.b(point):
            return PointClass(alpha, SingularPole(l), ls, prec)
        if not s.det.num(point):
            return PointClass(alpha, SingularDetZero(l), ls, prec)
        point = point ** s.q
    return PointClass(alpha, Regular(), ls, prec)


def augment_constant(s: MahlerSystem) -> MahlerSystem:
    """Append the constant function 1: diag(A, 1)."""
    zero = RatFunc.const(s.field, 0)
    rows = [list(row) + [zero] for row in s.A]
    rows.append([zero] * s.n + [RatFunc.const(s.field, 1)])
    return MahlerSystem(s.q, rows, s.field)


def restrict(s: MahlerSystem, keep: Sequence[int]) -> list[list[RatFunc]]:
    return [[s.A[i][j] for j in keep] for i in keep]


def dedouble(s: MahlerSystem) -> MahlerSystem:
    """[[A - I, A(z^q)], [I, 0]], solved by (f(z), f(z^q))."""
    n, f = s.n, s.field
    one, zero = RatFunc.const(f, 1), RatFunc.const(f, 0)
    rows = []
    for i in range(n):
        left = [s.A[i][j] - (one if i == j else zero) for j in range(n)]
        right = [s.A[i][j].compose_power(s.q) for j in range(n)]
        rows.append(left + right)
    for i in range(n):
        rows.append([one if i == j else zero for j in range(n)] + [zero] * n)
    return MahlerSystem(s.q, rows, f)


def doubled_components(n: int, j: int) -> list[tuple[int, int]]:
    """Component map after j doublings: entry (i, e) stands for f_i(z^(q^e))."""
    comps = [(i, 0) for i in range(n)]
    for _ in range(j):
        comps = comps + [(i, e + 1) for i, e in comps]
    return comps


def dedouble_until_regular(s: MahlerSystem, alpha: FieldElem, limit: int = 32) -> tuple[MahlerSystem, int]:
    """Double until alpha is regular; alpha must not hit a pole of A on its orbit."""
    alpha = s.field(alpha)
    pc = classify_point(s, alpha)
    point = alpha
    for l in range(pc.l_star):
        if not s.b(point):
            raise PoleOnOrbit(l)
        point = point ** s.q
    cur, j = s, 0
    while not pc.regular:
        if j >= limit:
            raise RuntimeError("doubling did not reach a regular point")
        cur = dedouble(cur)
        j += 1
        pc = classify_point(cur, alpha)
    return cur, j


@dataclass(frozen=True)
class BbcTransform:
    """System without poles on the orbit, linked to the original by g_i(alpha) = lambdas[i] f_i(alpha).

    ``mult`` is the multiplicity of alpha as a root of the accumulated
    denominator and ``n0`` the number of absorbed denominator factors.
    Function block a (components a*n .. a*n+n-1) holds the derivative of
    order ``mult - a`` of the normalized solution, divided by a formal unit.
    """

    system: MahlerSystem
    lambdas: tuple[FieldElem, ...]
    mult: int
    n0: int
    source: MahlerSystem

    @property
    def designated(self) -> tuple[int, ...]:
        return tuple(range(self.source.n))


def _matrix_derivative(m):
    return [[x.derivative() for x in row] for row in m]


def transform_bbc(s: MahlerSystem, alpha: FieldElem) -> BbcTransform:
    alpha = s.field(alpha)
    pc = classify_point(s, alpha)
    n0 = 0
    point = alpha
    for l in range(pc.l_star):
        if not s.beta(point):
            n0 = l + 1
        point = point ** s.q
    f = s.field
    if n0 == 0:
        return BbcTransform(s, tuple(f.one for _ in range(s.n)), 0, 0, s)
    P = Poly.const(f, 1)
    for j in range(n0):
        P = P * s.beta.compose_power(s.q ** j)
    lin = Poly(f, [-alpha, 1])
    mult = 0
    T = P
    while True:
        qt, rt = divmod(T, lin)
        if rt:
            break
        T, mult = qt, mult + 1
    lam = T(alpha) * math.factorial(mult)
    n, q = s.n, s.q

    # M = z^-nu A_hat and its derivatives up to order mult
    znu = RatFunc(Poly.const(f, 1), Poly.z(f, s.nu))
    M = [[RatFunc(x) * znu for x in row] for row in s.A_hat]
    derivs = [M]
    for _ in range(mult):
        derivs.append(_matrix_derivative(derivs[-1]))
    # chain-rule polynomials: d^b/dz^b [h(z^q)] = sum_j c[b][j](z) h^(j)(z^q)
    qz = Poly(f, [0] * (q - 1) + [q])
    c = [[Poly.const(f, 1)]]
    for b in range(mult):
        nxt = []
        for j in range(b + 2):
            term = Poly.const(f, 0)
            if j <= b:
                term = term + c[b][j].derivative()
            if j >= 1:
                term = term + c[b][j - 1] * qz
            nxt.append(term)
        c.append(nxt)
    size = n * (mult + 1)
    zero = RatFunc.const(f, 0)
    big = [[zero] * size for _ in range(size)]
    denom = RatFunc(s.beta.compose_power(q ** n0)).inverse()
    for t in range(mult + 1):
        for j in range(t + 1):
            block = [[zero] * n for _ in range(n)]
            for b in range(j, t + 1):
                coeff = RatFunc(c[b][j] * math.comb(t, t - b))
                if not coeff:
                    continue
                D = derivs[t - b]
                for i in range(n):
                    for k in range(n):
                        if D[i][k]:
                            block[i][k] = block[i][k] + D[i][k] * coeff
            # derivative order t sits in block mult - t
            bi, bj = mult - t, mult - j
            for i in range(n):
                for k in range(n):
                    if block[i][k]:
                        big[bi * n + i][bj * n + k] = block[i][k] * denom
    return BbcTransform(MahlerSystem(q, big, f), tuple(lam for _ in range(n)), mult, n0, s)


def _monomials(n: int, deg: int) -> list[tuple[int, ...]]:
    out = [e for e in itertools.product(range(deg + 1), repeat=n) if sum(e) == deg]
    out.sort(reverse=True)
    return out


def monomial_power(s: MahlerSystem, deg: int) -> tuple[MahlerSystem, list[tuple[int, ...]]]:
    """System satisfied by the degree-``deg`` monomials in f, in degree-lex order."""
    if deg < 1:
        raise ValueError("degree must be at least 1")
    monos = _monomials(s.n, deg)
    pos = {m: i for i, m in enumerate(monos)}
    f = s.field
    zero = RatFunc.const(f, 0)
    rows = []
    for mono in monos:
        poly: dict[tuple[int, ...], RatFunc] = {(0,) * s.n: RatFunc.const(f, 1)}
        for i, e in enumerate(mono):
            for _ in range(e):
                nxt: dict[tuple[int, ...], RatFunc] = {}
                for key, coeff in poly.items():
                    for j in range(s.n):
                        a = s.A[i][j]
                        if not a:
                            continue
                        k2 = list(key)
                        k2[j] += 1
                        k2 = tuple(k2)
                        nxt[k2] = nxt[k2] + coeff * a if k2 in nxt else coeff * a
                poly = nxt
        row = [zero] * len(monos)
        for key, coeff in poly.items():
            row[pos[key]] = coeff
        rows.append(row)
    return MahlerSystem(s.q, rows, f), monos

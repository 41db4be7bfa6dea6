"""Exact arithmetic over a number field k = Q[t]/(m(t)).

Scalars are :class:`FieldElem`, univariate polynomials in ``z`` are
:class:`Poly`, rational functions are :class:`RatFunc`.  Linear algebra
helpers work on plain lists of rows.  A small certified interval layer
(:class:`Interval`, :class:`ComplexInterval`) embeds field elements into C
and bounds root moduli; nothing numeric is decided by floating point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath

Rational = Union[int, Fraction]


class ReducibleMinpoly(ArithmeticError):
    """An inversion exposed a nontrivial factor of the minimal polynomial."""

    def __init__(self, factor: Sequence[Fraction]):
        self.factor = tuple(factor)
        super().__init__(f"minimal polynomial is reducible: found factor {_qpoly_str(self.factor)}")


class PoleError(ZeroDivisionError):
    """Evaluation of a rational function at one of its poles."""


class PrecisionExhausted(ArithmeticError):
    """Interval refinement did not reach a decision within the precision cap."""


MAX_PRECISION = 4096
BASE_PRECISION = 128


# ---------------------------------------------------------------------------
# dense polynomials over Q (coefficient lists, low degree first)

def _qtrim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _qdivmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = list(a)
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], _qtrim(a)
    quo = [Fraction(0)] * (len(a) - db)
    inv = 1 / Fraction(b[-1])
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv
        quo[i - db] = c
        if c:
            for j in range(db + 1):
                a[i - db + j] -= c * b[j]
    return _qtrim(quo), _qtrim(a[:db])


def _qmul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _qsub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _qtrim([Fraction(x) for x in out])


def _qgcdex(a: Sequence[Fraction], b: Sequence[Fraction]):
    """Return (g, s) with g monic gcd and s*a = g mod b."""
    r0, r1 = _qtrim(list(a)), _qtrim(list(b))
    s0, s1 = [Fraction(1)], []
    while r1:
        q, r = _qdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _qsub(s0, _qmul(q, s1))
    if not r0:
        return [], []
    lead = r0[-1]
    return [x / lead for x in r0], [x / lead for x in s0]


def _qpoly_str(p: Sequence[Fraction], var: str = "t", ascending: bool = False) -> str:
    terms = []
    order = range(len(p)) if ascending else range(len(p) - 1, -1, -1)
    for k in order:
        c = p[k]
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        elif c == -1:
            terms.append("-" + mono)
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


# ---------------------------------------------------------------------------
# number fields

class NumberField:
    """The field Q[t]/(minpoly) with one designated complex embedding.

    ``minpoly`` lists rational coefficients from the constant term up.  It is
    made monic and checked to be squarefree; irreducibility is not checked.
    ``root_near`` selects the embedding: the root of ``minpoly`` nearest to it,
    which must be certifiably unique.
    """

    def __init__(self, minpoly: Sequence[Rational], root_near: complex | float | str | None = None,
                 gen_name: str = "t"):
        coeffs = _qtrim([Fraction(c) for c in minpoly])
        if len(coeffs) < 2:
            raise ValueError("minimal polynomial must have degree >= 1")
        lead = coeffs[-1]
        self.minpoly: tuple[Fraction, ...] = tuple(c / lead for c in coeffs)
        self.degree = len(self.minpoly) - 1
        self.gen_name = gen_name
        deriv = [k * self.minpoly[k] for k in range(1, len(self.minpoly))]
        g, _ = _qgcdex(self.minpoly, deriv)
        if len(g) > 1:
            raise ValueError(f"minimal polynomial {_qpoly_str(self.minpoly)} is not squarefree")
        if root_near is None:
            root_near = 0
        self.root_near = complex(mpmath.mpmathify(root_near)) if isinstance(root_near, str) else complex(root_near)
        self._key = (self.minpoly, self.root_near.real, self.root_near.imag)
        # x^k mod minpoly for k = D .. 2D-2, used by multiplication
        d = self.degree
        table = []
        cur = [-c for c in self.minpoly[:d]]
        for _ in range(max(d - 1, 0)):
            table.append(tuple(cur))
            top = cur[-1]
            cur = [Fraction(0)] + cur[:-1]
            if top:
                cur = [cur[i] - top * self.minpoly[i] for i in range(d)]
        self._red = table
        self._boxes: dict[int, ComplexInterval] = {}
        self._zero = FieldElem(self, (Fraction(0),) * d)
        self._one = FieldElem(self, (Fraction(1),) + (Fraction(0),) * (d - 1))
        if d == 1:
            root = -self.minpoly[0]
            self._exact_root = root
        else:
            self._exact_root = None
            self._select_root()

    @classmethod
    def rationals(cls) -> "NumberField":
        return cls([0, 1])

    def __repr__(self) -> str:
        return f"NumberField({_qpoly_str(self.minpoly)}, root_near={self.root_near})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NumberField) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    @property
    def zero(self) -> "FieldElem":
        return self._zero

    @property
    def one(self) -> "FieldElem":
        return self._one

    @property
    def gen(self) -> "FieldElem":
        if self.degree == 1:
            return self(self._exact_root)
        return FieldElem(self, (Fraction(0), Fraction(1)) + (Fraction(0),) * (self.degree - 2))

    def __call__(self, value) -> "FieldElem":
        if isinstance(value, FieldElem):
            if value.field is self or value.field == self:
                return value
            if value.is_rational():
                return self(value.c[0])
            raise ValueError("element belongs to a different number field")
        if isinstance(value, (int, Fraction)):
            return FieldElem(self, (Fraction(value),) + (Fraction(0),) * (self.degree - 1))
        if isinstance(value, (list, tuple)):
            cs = _qtrim([Fraction(x) for x in value])
            if len(cs) > self.degree:
                _, cs = _qdivmod(cs, self.minpoly)
            return FieldElem(self, tuple(cs) + (Fraction(0),) * (self.degree - len(cs)))
        raise TypeError(f"cannot coerce {value!r} into {self}")

    # -- embedding ---------------------------------------------------------

    def _select_root(self) -> None:
        prec = 64
        while prec <= MAX_PRECISION:
            coeffs = [ComplexInterval.exact(c) for c in self.minpoly]
            boxes = _isolate_roots(lambda p: coeffs, prec)
            if boxes is not None:
                hint = ComplexInterval.from_complex(self.root_near)
                dists = [(b - hint).abs_bounds(prec) for b in boxes]
                best = min(range(len(boxes)), key=lambda i: dists[i][1])
                if all(dists[best][1] < dists[j][0] for j in range(len(boxes)) if j != best):
                    self._boxes[64] = boxes[best]
                    return
            prec *= 2
        raise ValueError(f"root hint {self.root_near} does not single out a root of {_qpoly_str(self.minpoly)}")

    def root_box(self, precision: int) -> "ComplexInterval":
        """Certified box around the designated root, nested in ``precision``."""
        if self._exact_root is not None:
            return ComplexInterval.exact(self._exact_root)
        level = 64
        while level < precision:
            level *= 2
        if level in self._boxes:
            return self._boxes[level]
        prev = self.root_box(level // 2)
        box = _refine_root(self.minpoly, prev, level)
        if box is None:
            raise PrecisionExhausted("lost the designated root while refining")
        self._boxes[level] = box
        return box


class FieldElem:
    """Element of a :class:`NumberField`, stored as rational coordinates in 1, t, t^2, ..."""

    __slots__ = ("field", "c")

    def __init__(self, field: NumberField, c: tuple[Fraction, ...]):
        self.field = field
        self.c = c

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("mixed number fields")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElem(self.field, (Fraction(other),) + (Fraction(0),) * (self.field.degree - 1))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElem(self.field, tuple(a - b for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return FieldElem(self.field, tuple(-a for a in self.c))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElem(self.field, tuple(a * other for a in self.c))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self.field.degree
        if d == 1:
            return FieldElem(self.field, (self.c[0] * o.c[0],))
        prod = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(o.c):
                    if y:
                        prod[i + j] += x * y
        out = prod[:d]
        for k in range(d, 2 * d - 1):
            top = prod[k]
            if top:
                row = self.field._red[k - d]
                for i in range(d):
                    out[i] += top * row[i]
        return FieldElem(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        if not self:
            raise ZeroDivisionError("inverse of zero field element")
        if self.field.degree == 1:
            return FieldElem(self.field, (1 / self.c[0],))
        g, s = _qgcdex(list(self.c), list(self.field.minpoly))
        if len(g) > 1:
            raise ReducibleMinpoly(g)
        return self.field(s)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int) -> "FieldElem":
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.field.one, self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __bool__(self) -> bool:
        return any(self.c)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElem):
            return self.c == other.c and (self.field is other.field or self.field == other.field)
        if isinstance(other, (int, Fraction)):
            return self.c[0] == other and not any(self.c[1:])
        return NotImplemented

    def __hash__(self) -> int:
        if not any(self.c[1:]):
            return hash(self.c[0])
        return hash(self.c)

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c[0]

    def __repr__(self) -> str:
        return f"FieldElem({self})"

    def __str__(self) -> str:
        return _qpoly_str(self.c, self.field.gen_name, ascending=True) if self.field.degree > 1 else str(self.c[0])


def embed_ball(x: FieldElem, precision: int = BASE_PRECISION) -> "ComplexInterval":
    """Certified complex interval containing the image of ``x`` under the designated embedding."""
    if x.is_rational():
        return ComplexInterval.exact(x.c[0])
    box = x.field.root_box(precision)
    acc = ComplexInterval.exact(0)
    for c in reversed(x.c):
        acc = (acc * box).round(precision) + ComplexInterval.exact(c)
    return acc.round(precision)


# ---------------------------------------------------------------------------
# polynomials and rational functions in z

class Poly:
    """Univariate polynomial in ``z`` with :class:`FieldElem` coefficients (low degree first)."""

    __slots__ = ("field", "c")

    def __init__(self, field: NumberField, coeffs: Iterable = ()):
        cs = [field(x) for x in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.field = field
        self.c: tuple[FieldElem, ...] = tuple(cs)

    @classmethod
    def _raw(cls, field: NumberField, cs: list[FieldElem]) -> "Poly":
        while cs and not cs[-1]:
            cs.pop()
        p = object.__new__(cls)
        p.field = field
        p.c = tuple(cs)
        return p

    @classmethod
    def z(cls, field: NumberField, power: int = 1) -> "Poly":
        return cls._raw(field, [field.zero] * power + [field.one])

    @classmethod
    def const(cls, field: NumberField, value) -> "Poly":
        return cls._raw(field, [field(value)])

    @property
    def degree(self):
        """Degree; the zero polynomial has degree ``-inf``."""
        return len(self.c) - 1 if self.c else -math.inf

    def is_zero(self) -> bool:
        return not self.c

    def __bool__(self) -> bool:
        return bool(self.c)

    @property
    def lc(self) -> FieldElem:
        return self.c[-1] if self.c else self.field.zero

    def coeff(self, k: int) -> FieldElem:
        return self.c[k] if 0 <= k < len(self.c) else self.field.zero

    def valuation(self):
        for k, x in enumerate(self.c):
            if x:
                return k
        return math.inf

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction, FieldElem)):
            return Poly._raw(self.field, [self.field(other)])
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] = out[i] + x
        return Poly._raw(self.field, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.field, [-x for x in self.c])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElem)):
            s = self.field(other)
            return Poly._raw(self.field, [x * s for x in self.c]) if s else Poly._raw(self.field, [])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.c or not o.c:
            return Poly._raw(self.field, [])
        out = [self.field.zero] * (len(self.c) + len(o.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(o.c):
                    if y:
                        out[i + j] = out[i + j] + x * y
        return Poly._raw(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        result, base = Poly.const(self.field, 1), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __divmod__(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if not other.c:
            raise ZeroDivisionError("polynomial division by zero")
        a = list(self.c)
        db = len(other.c) - 1
        if len(a) - 1 < db:
            return Poly._raw(self.field, []), self
        inv = other.c[-1].inverse()
        quo = [self.field.zero] * (len(a) - db)
        for i in range(len(a) - 1, db - 1, -1):
            if not a[i]:
                continue
            c = a[i] * inv
            quo[i - db] = c
            for j in range(db + 1):
                if other.c[j]:
                    a[i - db + j] = a[i - db + j] - c * other.c[j]
        return Poly._raw(self.field, quo), Poly._raw(self.field, a[:db])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def monic(self) -> "Poly":
        if not self.c or self.c[-1] == 1:
            return self
        inv = self.c[-1].inverse()
        return Poly._raw(self.field, [x * inv for x in self.c])

    def derivative(self) -> "Poly":
        return Poly._raw(self.field, [x * k for k, x in enumerate(self.c)][1:])

    def __call__(self, x):
        x = self.field(x)
        acc = self.field.zero
        for c in reversed(self.c):
            acc = acc * x + c
        return acc

    evaluate = __call__

    def compose_power(self, q: int) -> "Poly":
        """Return p(z^q)."""
        if q == 1 or len(self.c) <= 1:
            return self
        out = [self.field.zero] * ((len(self.c) - 1) * q + 1)
        for k, x in enumerate(self.c):
            out[k * q] = x
        return Poly._raw(self.field, out)

    def shift(self, k: int) -> "Poly":
        """Multiply by z^k."""
        if not self.c:
            return self
        return Poly._raw(self.field, [self.field.zero] * k + list(self.c))

    def truncate(self, n: int) -> "Poly":
        return Poly._raw(self.field, list(self.c[:n]))

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.c == other.c
        if isinstance(other, (int, Fraction, FieldElem)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Poly", self.c))

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        return render_poly(self)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both are zero)."""
    while b:
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return Poly._raw(a.field, [])
    return (a * b.exact_div(poly_gcd(a, b))).monic() if b.degree > 0 else a.monic()


class RatFunc:
    """Reduced rational function num/den with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, _reduced: bool = False):
        if den is None:
            den = Poly.const(num.field, 1)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            if not num:
                den = Poly.const(num.field, 1)
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num, den = num.exact_div(g), den.exact_div(g)
                lc = den.lc
                if lc != 1:
                    inv = lc.inverse()
                    num, den = num * inv, den * inv
        self.num = num
        self.den = den

    @classmethod
    def const(cls, field: NumberField, value) -> "RatFunc":
        return cls(Poly.const(field, value), Poly.const(field, 1), _reduced=True)

    @classmethod
    def z(cls, field: NumberField, power: int = 1) -> "RatFunc":
        return cls(Poly.z(field, power), Poly.const(field, 1), _reduced=True)

    @property
    def field(self) -> NumberField:
        return self.num.field

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc(other, Poly.const(other.field, 1), _reduced=True)
        if isinstance(other, (int, Fraction, FieldElem)):
            return RatFunc.const(self.field, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den.degree == 0 and o.den.degree == 0:
            return RatFunc(self.num + o.num, self.den, _reduced=True)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.num or not o.num:
            return RatFunc.const(self.field, 0)
        if self.den.degree == 0 and o.den.degree == 0:
            return RatFunc(self.num * o.num, self.den, _reduced=True)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int) -> "RatFunc":
        if e < 0:
            return self.inverse() ** (-e)
        return RatFunc(self.num ** e, self.den ** e, _reduced=True)

    def __call__(self, x) -> FieldElem:
        x = self.field(x)
        d = self.den(x)
        if not d:
            raise PoleError(f"{self} has a pole at {x}")
        return self.num(x) / d

    evaluate = __call__

    def compose_power(self, q: int) -> "RatFunc":
        return RatFunc(self.num.compose_power(q), self.den.compose_power(q), _reduced=True)

    def derivative(self) -> "RatFunc":
        return RatFunc(self.num.derivative() * self.den - self.num * self.den.derivative(), self.den * self.den)

    def __eq__(self, other) -> bool:
        o = self._coerce(other) if not isinstance(other, RatFunc) else other
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self) -> int:
        return hash(("RatFunc", self.num.c, self.den.c))

    def __repr__(self) -> str:
        return f"RatFunc({self})"

    def __str__(self) -> str:
        if self.den.degree == 0:
            return render_poly(self.num)
        return f"({render_poly(self.num)})/({render_poly(self.den)})"


def render_poly(p: Poly, var: str = "z") -> str:
    """Compact rendering that the expression parser reads back exactly."""
    if not p.c:
        return "0"
    out = ""
    for k, c in enumerate(p.c):
        if not c:
            continue
        text = str(c)
        single = sum(1 for x in c.c if x) == 1
        neg = single and text.startswith("-")
        mag = text[1:] if neg else text
        if not single:
            mag = f"({text})"
        if k == 0:
            term = mag
        else:
            mono = var if k == 1 else f"{var}^{k}"
            term = mono if mag == "1" else f"{mag}*{mono}"
        if out:
            out += ("-" if neg else "+") + term
        else:
            out = ("-" if neg else "") + term
    return out


# ---------------------------------------------------------------------------
# matrices (lists of rows)

def identity_matrix(field: NumberField, n: int, kind=RatFunc) -> list[list]:
    one = kind.const(field, 1) if kind is not FieldElem else field.one
    zero = kind.const(field, 0) if kind is not FieldElem else field.zero
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                x, y = a[i][k], b[k][j]
                if not x or not y:
                    continue
                t = x * y
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else a[i][0] * 0 if m else None)
        out.append(row)
    return out


def mat_map(a: Sequence[Sequence], fn) -> list[list]:
    return [[fn(x) for x in row] for row in a]


def det_field(m: Sequence[Sequence[FieldElem]]) -> FieldElem:
    """Determinant over k by Gaussian elimination."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        raise ValueError("empty matrix")
    field = a[0][0].field
    det = field.one
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return field.zero
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        pv = a[col][col]
        det = det * pv
        inv = pv.inverse()
        for r in range(col + 1, n):
            f = a[r][col]
            if f:
                f = f * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def det_ratfunc(m: Sequence[Sequence[RatFunc]]) -> RatFunc:
    """Determinant of a rational-function matrix (row denominators cleared, then Bareiss)."""
    n = len(m)
    field = m[0][0].field
    scale = RatFunc.const(field, 1)
    rows: list[list[Poly]] = []
    for row in m:
        den = Poly.const(field, 1)
        for x in row:
            den = poly_lcm(den, x.den)
        rows.append([x.num * den.exact_div(x.den) for x in row])
        scale = scale * RatFunc(Poly.const(field, 1), den)
    sign = 1
    prev = Poly.const(field, 1)
    a = rows
    for k in range(n - 1):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            return RatFunc.const(field, 0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
            a[i][k] = Poly.const(field, 0)
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return RatFunc(d * sign) * scale


def inverse_ratfunc(m: Sequence[Sequence[RatFunc]]) -> list[list[RatFunc]]:
    """Gauss-Jordan inverse over k(z)."""
    n = len(m)
    field = m[0][0].field
    a = [list(row) + [RatFunc.const(field, 1 if i == j else 0) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y if y else x for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def rank_field(m: Sequence[Sequence[FieldElem]]) -> int:
    return len(_rref([list(r) for r in m])[0]) if m else 0


# ---------------------------------------------------------------------------
# subspaces of k^N

def _rref(rows: list[list[FieldElem]]) -> tuple[list[list[FieldElem]], list[int]]:
    """Reduced row echelon form: leftmost pivots, pivots 1, rows sorted by pivot."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][col].inverse()
        if rows[r][col] != 1:
            rows[r] = [x * inv if x else x for x in rows[r]]
        pr = rows[r]
        nz = [j for j in range(col, ncols) if pr[j]]
        for i in range(len(rows)):
            if i != r:
                f = rows[i][col]
                if f:
                    ri = rows[i]
                    for j in nz:
                        ri[j] = ri[j] - f * pr[j]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


class SubspaceBasis:
    """Canonical (reduced echelon) basis of a subspace of k^ambient."""

    __slots__ = ("field", "ambient", "rows", "pivots")

    def __init__(self, field: NumberField, ambient: int, vectors: Iterable[Sequence] = ()):
        vecs = []
        for v in vectors:
            v = [field(x) for x in v]
            if len(v) != ambient:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {ambient}")
            vecs.append(v)
        rows, piv = _rref(vecs)
        self.field = field
        self.ambient = ambient
        self.rows: tuple[tuple[FieldElem, ...], ...] = tuple(tuple(r) for r in rows)
        self.pivots = tuple(piv)

    @property
    def dimension(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubspaceBasis) and self.ambient == other.ambient and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.ambient, self.rows))

    def __repr__(self) -> str:
        body = ", ".join("(" + ", ".join(str(x) for x in r) + ")" for r in self.rows)
        return f"span{{{body}}}"

    def contains(self, v: Sequence) -> bool:
        v = [self.field(x) for x in v]
        for row, p in zip(self.rows, self.pivots):
            f = v[p]
            if f:
                v = [a - f * b for a, b in zip(v, row)]
        return not any(v)

    def intersect_coordinates(self, coords: Sequence[int]) -> "SubspaceBasis":
        """Subspace of vectors in self supported on ``coords``."""
        others = [j for j in range(self.ambient) if j not in set(coords)]
        if not self.rows:
            return self
        if not others:
            return self
        m = [[row[j] for j in others] for row in self.rows]
        ker = left_kernel(m, self.field, len(self.rows))
        vecs = []
        for lam in ker.rows:
            vec = [self.field.zero] * self.ambient
            for c, row in zip(lam, self.rows):
                if c:
                    vec = [a + c * b for a, b in zip(vec, row)]
            vecs.append(vec)
        return SubspaceBasis(self.field, self.ambient, vecs)


def left_kernel(m: Sequence[Sequence], field: NumberField | None = None, nrows: int | None = None) -> SubspaceBasis:
    """Basis of {lam : lam * M = 0}; an r x 0 matrix gives the full space."""
    r = len(m) if nrows is None else nrows
    if field is None:
        field = next(x for row in m for x in row).field
    c = len(m[0]) if r and m else 0
    if c == 0:
        return SubspaceBasis(field, r, [[field.one if i == j else field.zero for j in range(r)] for i in range(r)])
    # rows of M^T in RREF; the kernel is read off the free columns
    mt = [[field(m[i][j]) for i in range(r)] for j in range(c)]
    rows, pivots = _rref(mt)
    free = [j for j in range(r) if j not in set(pivots)]
    vecs = []
    for fcol in free:
        v = [field.zero] * r
        v[fcol] = field.one
        for row, p in zip(rows, pivots):
            v[p] = -row[fcol]
        vecs.append(v)
    return SubspaceBasis(field, r, vecs)


def subspace_sum(u: SubspaceBasis, v: SubspaceBasis) -> SubspaceBasis:
    if u.ambient != v.ambient:
        raise ValueError(f"dimension mismatch: {u.ambient} vs {v.ambient}")
    return SubspaceBasis(u.field, u.ambient, list(u.rows) + list(v.rows))


# ---------------------------------------------------------------------------
# certified interval arithmetic

def _floor_log2(x: Fraction) -> int:
    n, d = abs(x.numerator), x.denominator
    e = n.bit_length() - d.bit_length()
    if (n << max(-e, 0)) < (d << max(e, 0)):
        e -= 1
    return e


def _round(x: Fraction, prec: int | None, up: bool) -> Fraction:
    if prec is None or x == 0:
        return x
    shift = prec - _floor_log2(x)
    if shift >= 0:
        num = x.numerator << shift
        m = -((-num) // x.denominator) if up else num // x.denominator
        return Fraction(m, 1 << shift)
    den = x.denominator << (-shift)
    m = -((-x.numerator) // den) if up else x.numerator // den
    return Fraction(m << (-shift))


def _minprec(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class Interval:
    """Closed real interval with rational endpoints, rounded outward to ``prec`` bits."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo: Rational, hi: Rational | None = None, prec: int | None = None):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError("empty interval")
        self.lo = _round(lo, prec, False)
        self.hi = _round(hi, prec, True)
        self.prec = prec

    def __add__(self, o: "Interval") -> "Interval":
        return Interval(self.lo + o.lo, self.hi + o.hi, _minprec(self.prec, o.prec))

    def __sub__(self, o: "Interval") -> "Interval":
        return Interval(self.lo - o.hi, self.hi - o.lo, _minprec(self.prec, o.prec))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.prec)

    def __mul__(self, o: "Interval") -> "Interval":
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps), _minprec(self.prec, o.prec))

    def inverse(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo, self.prec)

    def square(self) -> "Interval":
        a, b = self.lo * self.lo, self.hi * self.hi
        if self.lo <= 0 <= self.hi:
            return Interval(0, max(a, b), self.prec)
        return Interval(min(a, b), max(a, b), self.prec)

    def contains(self, x: Rational) -> bool:
        return self.lo <= x <= self.hi

    def mag(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> Fraction:
        if self.lo <= 0 <= self.hi:
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __repr__(self) -> str:
        return f"[{float(self.lo):.17g}, {float(self.hi):.17g}]"


def _sqrt_bounds(x: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Rational lower and upper bounds for sqrt(x), x >= 0."""
    if x == 0:
        return Fraction(0), Fraction(0)
    scale = 2 * (prec + max(0, -_floor_log2(x)) + 2)
    n = x.numerator << scale
    lo_int = math.isqrt(n // x.denominator)
    hi_int = math.isqrt(-((-n) // x.denominator))
    if hi_int * hi_int < -((-n) // x.denominator):
        hi_int += 1
    return Fraction(lo_int, 1 << (scale // 2)), Fraction(hi_int, 1 << (scale // 2))


class ComplexInterval:
    """Axis-aligned rectangle re + i*im of :class:`Interval` values."""

    __slots__ = ("re", "im")

    def __init__(self, re: Interval, im: Interval):
        self.re = re
        self.im = im

    @classmethod
    def exact(cls, x: Rational) -> "ComplexInterval":
        return cls(Interval(x), Interval(0))

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexInterval":
        return cls(Interval(Fraction(z.real)), Interval(Fraction(z.imag)))

    @classmethod
    def around(cls, re: Fraction, im: Fraction, radius: Fraction) -> "ComplexInterval":
        return cls(Interval(re - radius, re + radius), Interval(im - radius, im + radius))

    @property
    def prec(self) -> int | None:
        return _minprec(self.re.prec, self.im.prec)

    def round(self, prec: int | None) -> "ComplexInterval":
        return ComplexInterval(Interval(self.re.lo, self.re.hi, prec), Interval(self.im.lo, self.im.hi, prec))

    def __add__(self, o: "ComplexInterval") -> "ComplexInterval":
        return ComplexInterval(self.re + o.re, self.im + o.im)

    def __sub__(self, o: "ComplexInterval") -> "ComplexInterval":
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __neg__(self) -> "ComplexInterval":
        return ComplexInterval(-self.re, -self.im)

    def __mul__(self, o: "ComplexInterval") -> "ComplexInterval":
        if self.im.lo == 0 == self.im.hi and o.im.lo == 0 == o.im.hi:
            return ComplexInterval(self.re * o.re, Interval(0))
        return ComplexInterval(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def inverse(self) -> "ComplexInterval":
        if self.im.lo == 0 == self.im.hi:
            return ComplexInterval(self.re.inverse(), Interval(0))
        n2 = (self.re.square() + self.im.square()).inverse()
        return ComplexInterval(self.re * n2, -(self.im * n2))

    def __truediv__(self, o: "ComplexInterval") -> "ComplexInterval":
        return self * o.inverse()

    def __pow__(self, e: int) -> "ComplexInterval":
        result, base = ComplexInterval.exact(1), self
        p = self.prec
        while e:
            if e & 1:
                result = (result * base).round(p)
            e >>= 1
            if e:
                base = (base * base).round(p)
        return result

    def contains(self, z: complex | Rational) -> bool:
        if isinstance(z, complex):
            return self.re.contains(Fraction(z.real)) and self.im.contains(Fraction(z.imag))
        return self.re.contains(Fraction(z)) and self.im.contains(0)

    def contains_zero(self) -> bool:
        return self.re.contains(0) and self.im.contains(0)

    def subset_interior(self, o: "ComplexInterval") -> bool:
        return o.re.lo < self.re.lo and self.re.hi < o.re.hi and o.im.lo < self.im.lo and self.im.hi < o.im.hi

    def subset(self, o: "ComplexInterval") -> bool:
        return o.re.lo <= self.re.lo and self.re.hi <= o.re.hi and o.im.lo <= self.im.lo and self.im.hi <= o.im.hi

    def disjoint(self, o: "ComplexInterval") -> bool:
        return (self.re.hi < o.re.lo or o.re.hi < self.re.lo or self.im.hi < o.im.lo or o.im.hi < self.im.lo)

    def intersect(self, o: "ComplexInterval") -> "ComplexInterval":
        return ComplexInterval(
            Interval(max(self.re.lo, o.re.lo), min(self.re.hi, o.re.hi)),
            Interval(max(self.im.lo, o.im.lo), min(self.im.hi, o.im.hi)),
        )

    def abs_bounds(self, prec: int = BASE_PRECISION) -> tuple[Fraction, Fraction]:
        """Certified (lower, upper) bounds on |z| over the rectangle."""
        lo2 = self.re.mig() ** 2 + self.im.mig() ** 2
        hi2 = self.re.mag() ** 2 + self.im.mag() ** 2
        return _sqrt_bounds(lo2, prec)[0], _sqrt_bounds(hi2, prec)[1]

    def abs_upper(self, prec: int = BASE_PRECISION) -> Fraction:
        return self.abs_bounds(prec)[1]

    def abs_lower(self, prec: int = BASE_PRECISION) -> Fraction:
        return self.abs_bounds(prec)[0]

    def mid(self) -> mpmath.mpc:
        return mpmath.mpc(_fraction_mpf(self.re.mid), _fraction_mpf(self.im.mid))

    def radius(self) -> Fraction:
        return max(self.re.width, self.im.width) / 2

    def __repr__(self) -> str:
        return f"{self.re} + i*{self.im}"


def _horner(coeffs: Sequence[ComplexInterval], x: ComplexInterval, prec: int) -> ComplexInterval:
    acc = ComplexInterval.exact(0)
    for c in reversed(coeffs):
        acc = (acc * x + c).round(prec)
    return acc


def _krawczyk(coeffs: Sequence[ComplexInterval], box: ComplexInterval, prec: int) -> bool:
    """True if ``box`` provably contains exactly one root of every polynomial in the family."""
    dcoeffs = [c * ComplexInterval.exact(k) for k, c in enumerate(coeffs)][1:]
    m = ComplexInterval(Interval(box.re.mid), Interval(box.im.mid))
    dm = _horner(dcoeffs, m, prec).mid()
    if dm == 0:
        return False
    y = 1 / dm
    yi = ComplexInterval(Interval(_mpf_fraction(y.real)), Interval(_mpf_fraction(mpmath.im(y))))
    pm = _horner(coeffs, m, prec)
    dx = _horner(dcoeffs, box, prec)
    contraction = (ComplexInterval.exact(1) - yi * dx).round(prec)
    if contraction.abs_upper(prec) >= 1:
        return False
    k = (m - yi * pm + contraction * (box - m)).round(prec)
    return k.subset_interior(box)


def _fraction_mpf(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def _mpf_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if not man:
        return Fraction(0)
    val = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
    return -val if sign else val


def _isolate_roots(coeffs_at, prec: int) -> list[ComplexInterval] | None:
    """Certified pairwise disjoint boxes, one per root, for a squarefree polynomial.

    ``coeffs_at(prec)`` yields coefficient enclosures (low degree first).
    Returns None if certification fails at this precision.
    """
    coeffs = coeffs_at(prec)
    deg = len(coeffs) - 1
    if deg < 1:
        return []
    with mpmath.workprec(prec + 64):
        mids = [c.mid() for c in reversed(coeffs)]
        try:
            roots = mpmath.polyroots(mids, maxsteps=200 + 20 * deg, extraprec=prec + 2 * deg * 8)
        except (mpmath.libmp.NoConvergence, ZeroDivisionError):
            return None
        if deg == 1:
            roots = [roots] if not isinstance(roots, list) else roots
        roots = list(roots)
        sep = mpmath.mpf(1)
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                sep = min(sep, abs(roots[i] - roots[j]))
        if sep == 0:
            return None
        boxes = []
        for r in roots:
            rad = min(sep / 8, mpmath.mpf(2) ** (-(prec // 2)) * max(1, abs(r)))
            box = ComplexInterval.around(_mpf_fraction(r.real), _mpf_fraction(mpmath.im(r)), _mpf_fraction(rad))
            if not _krawczyk(coeffs, box, prec):
                return None
            boxes.append(box)
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if not boxes[i].disjoint(boxes[j]):
                return None
    return boxes


def _refine_root(minpoly: Sequence[Fraction], prev: ComplexInterval, prec: int) -> ComplexInterval | None:
    coeffs = [ComplexInterval.exact(c) for c in minpoly]
    with mpmath.workprec(prec + 64):
        cs = [_fraction_mpf(c) for c in reversed(minpoly)]
        f = lambda x: mpmath.polyval(cs, x)
        try:
            r = mpmath.findroot(f, prev.mid())
        except (ValueError, ZeroDivisionError):
            r = prev.mid()
        r = mpmath.mpc(r)
        for k in range(8):
            rad = mpmath.mpf(2) ** (-(prec - 8 * k)) * max(1, abs(r))
            box = ComplexInterval.around(_mpf_fraction(r.real), _mpf_fraction(r.imag), _mpf_fraction(rad))
            if _krawczyk(coeffs, box, prec + 32):
                nb = box.intersect(prev) if not prev.disjoint(box) else None
                if nb is not None:
                    return nb
    return None


def _poly_enclosures(p: Poly, prec: int) -> list[ComplexInterval]:
    return [embed_ball(c, prec) for c in p.c]


def poly_roots_modulus_lower_bound(p: Poly) -> Fraction | float:
    """Positive rational strictly below |r| for every nonzero root r of ``p``.

    Returns ``math.inf`` when ``p`` has no nonzero root.
    """
    if not p:
        raise ValueError("zero polynomial has every point as a root")
    v = p.valuation()
    core = Poly._raw(p.field, list(p.c[v:]))
    if core.degree < 1:
        return math.inf
    sqf = core.exact_div(poly_gcd(core, core.derivative())).monic()
    prec = 64
    while prec <= MAX_PRECISION:
        boxes = _isolate_roots(lambda pr: _poly_enclosures(sqf, pr), prec)
        if boxes is not None:
            lows = [b.abs_lower(prec) for b in boxes]
            if all(x > 0 for x in lows):
                bound = min(lows)
                return bound - _round(bound, 16, False) / (1 << 20) if bound > 0 else bound
        prec *= 2
    # crude but certified fallback: |r| >= |a0| / (|a0| + max |a_i|)
    encl = _poly_enclosures(core, BASE_PRECISION)
    a0 = encl[0].abs_lower()
    big = max(e.abs_upper() for e in encl[1:])
    return a0 / (a0 + big) / 2

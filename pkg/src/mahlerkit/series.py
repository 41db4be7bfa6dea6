"""Lazily extended coefficient streams of vectors of power series.

A stream yields coefficient vectors f_0, f_1, ... in k^n and caches them.
Extension doubles the cached prefix and is guarded by a lock, so streams can
be shared between threads.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exactalg import FieldElem, NumberField, Poly
from .system import MahlerSystem


class InconsistentSeed(ValueError):
    def __init__(self, index: int, lhs, rhs):
        super().__init__(f"seed violates the recursion at index {index}: {lhs} != {rhs}")
        self.index = index
        self.lhs = lhs
        self.rhs = rhs


class CoefficientStream:
    """Base class; subclasses implement ``_compute(start, stop)``."""

    def __init__(self, n: int, field: NumberField):
        self.n = n
        self.field = field
        self._cache: list[tuple[FieldElem, ...]] = []
        self._lock = threading.Lock()

    def _compute(self, start: int, stop: int) -> list[tuple[FieldElem, ...]]:
        raise NotImplementedError

    def _ensure(self, length: int) -> None:
        if length <= len(self._cache):
            return
        with self._lock:
            have = len(self._cache)
            if length <= have:
                return
            target = max(length, 2 * have, 16)
            self._cache.extend(self._compute(have, target))

    def coefficient(self, i: int) -> tuple[FieldElem, ...]:
        if i < 0:
            raise IndexError("negative index")
        self._ensure(i + 1)
        return self._cache[i]

    __getitem__ = coefficient

    def prefix(self, length: int) -> list[tuple[FieldElem, ...]]:
        self._ensure(length)
        return self._cache[:length]

    def component(self, j: int, length: int) -> list[FieldElem]:
        return [v[j] for v in self.prefix(length)]


class ListStream(CoefficientStream):
    """A stream given by an explicit finite prefix, zero afterwards."""

    def __init__(self, coeffs: Sequence[Sequence], field: NumberField, n: int | None = None):
        super().__init__(n if n is not None else len(coeffs[0]), field)
        self._data = [tuple(field(x) for x in v) for v in coeffs]

    def _compute(self, start, stop):
        zero = (self.field.zero,) * self.n
        return [self._data[i] if i < len(self._data) else zero for i in range(start, stop)]


class AutomatonStream(CoefficientStream):
    """Coefficients m_k(state(i)) where state(i) = delta(state(i // q), i % q)."""

    def __init__(self, q: int, delta: Sequence[Sequence[int]], init: int,
                 maps: Sequence[Sequence[FieldElem]], field: NumberField):
        super().__init__(len(maps), field)
        self.q = q
        self.delta = tuple(tuple(r) for r in delta)
        self.init = init
        self.maps = tuple(tuple(m) for m in maps)
        self._states: list[int] = []
        # the coefficient vector produced by each state
        self.table = [tuple(m[s] for m in self.maps) for s in range(len(self.delta))]

    def state(self, i: int) -> int:
        self._ensure(i + 1)
        return self._states[i]

    def _compute(self, start, stop):
        st = self._states
        for i in range(len(st), stop):
            st.append(self.init if i == 0 else self.delta[st[i // self.q]][i % self.q])
        return [self.table[st[i]] for i in range(start, stop)]

    def state_blocks(self, total: int, block: int = 1 << 20):
        """Yield (start, states) numpy blocks covering indices 0 .. total-1.

        The states of indices below q*m come from those below m by one
        vectorized transition per digit.
        """
        table = np.array(self.delta, dtype=np.int32)
        digits = np.arange(self.q, dtype=np.int32)
        st = np.array([self.init], dtype=np.int32)
        yield 0, st[:total]
        have = 1
        while have < total:
            st = st[: -(-total // self.q)]
            st = table[np.repeat(st, self.q), np.tile(digits, len(st))]
            stop = min(len(st), total)
            for off in range(have, stop, block):
                yield off, st[off:min(stop, off + block)]
            have = stop


class RecursionStream(CoefficientStream):
    """Normalized solution f~ of f~(z) = z^-nu A_hat(z) f~(z^q) from a seed.

    The seed lists f~_0 .. f~_T with T = nu // (q - 1); later terms follow from
    f~_t = sum_s A_hat_(t + nu - q s) f~_s.
    """

    def __init__(self, system: MahlerSystem, seed: Sequence[Sequence]):
        super().__init__(system.n, system.field)
        self.system = system
        q, nu = system.q, system.nu
        self.T = nu // (q - 1)
        if len(seed) != self.T + 1:
            raise ValueError(f"seed must list {self.T + 1} coefficient vectors")
        n = system.n
        deg = max(len(p.c) for row in system.A_hat for p in row)
        # coefficient matrices of A_hat, as sparse rows
        self._coef: list[list[list[tuple[int, FieldElem]]]] = []
        for k in range(deg):
            self._coef.append([[(j, system.A_hat[i][j].coeff(k)) for j in range(n) if system.A_hat[i][j].coeff(k)]
                               for i in range(n)])
        self._cache = [tuple(self.field(x) for x in v) for v in seed]
        if any(len(v) != n for v in self._cache):
            raise ValueError(f"seed vectors must have length {n}")
        for j in range(nu + self.T + 1):
            lhs = self._cache[j - nu] if j >= nu else (self.field.zero,) * n
            rhs = self._rhs(j)
            if lhs != rhs:
                raise InconsistentSeed(j - nu if j >= nu else j, lhs, rhs)

    def _rhs(self, j: int) -> tuple[FieldElem, ...]:
        """Coefficient of z^j in A_hat(z) f~(z^q)."""
        q, n = self.system.q, self.n
        acc = [self.field.zero] * n
        # only j - q s < len(coef) contributes
        s = max(0, -(-(j - len(self._coef) + 1) // q))
        while q * s <= j:
            k = j - q * s
            if k < len(self._coef):
                fs = self._cache[s]
                for i, row in enumerate(self._coef[k]):
                    for jj, c in row:
                        x = fs[jj]
                        if x:
                            acc[i] = acc[i] + c * x
            s += 1
        return tuple(acc)

    def _compute(self, start, stop):
        out = []
        for t in range(start, stop):
            v = self._rhs(t + self.system.nu)
            self._cache.append(v)
            out.append(v)
        del self._cache[start:]
        return out


def unit_coefficients(system: MahlerSystem, length: int) -> list[FieldElem]:
    """Prefix of u = prod_(i >= 0) beta(z^(q^i)), the unit with f~ = u f."""
    u = Poly.const(system.field, 1)
    p = 1
    while p < length:
        u = (u * system.beta.compose_power(p)).truncate(length)
        p *= system.q
    return [u.coeff(k) for k in range(length)]


def _series_mul(a: Sequence[FieldElem], b: Sequence[FieldElem], length: int, zero: FieldElem) -> list[FieldElem]:
    out = [zero] * length
    for i, x in enumerate(a[:length]):
        if not x:
            continue
        for j in range(min(len(b), length - i)):
            y = b[j]
            if y:
                out[i + j] = out[i + j] + x * y
    return out


def _series_inverse(a: Sequence[FieldElem], length: int) -> list[FieldElem]:
    inv0 = a[0].inverse()
    out = [inv0]
    for k in range(1, length):
        acc = a[0] * 0
        for j in range(1, min(k, len(a) - 1) + 1):
            if a[j]:
                acc = acc + a[j] * out[k - j]
        out.append(-acc * inv0)
    return out


class DerivedStream(CoefficientStream):
    """Stream whose prefix of any length is produced by ``batch(length)``."""

    def __init__(self, n: int, field: NumberField, batch: Callable[[int], list[tuple[FieldElem, ...]]]):
        super().__init__(n, field)
        self._batch = batch

    def _compute(self, start, stop):
        return self._batch(stop)[start:stop]


def normalized_stream(system: MahlerSystem, f: CoefficientStream) -> CoefficientStream:
    """f~ = u f; the identity when beta = 1."""
    if system.beta.degree == 0:
        return f

    def batch(length):
        u = unit_coefficients(system, length)
        cols = [_series_mul(u, f.component(j, length), length, system.field.zero) for j in range(f.n)]
        return [tuple(c[i] for c in cols) for i in range(length)]

    return DerivedStream(f.n, f.field, batch)


def unnormalized_stream(system: MahlerSystem, ft: CoefficientStream) -> CoefficientStream:
    """f = f~ / u."""
    if system.beta.degree == 0:
        return ft

    def batch(length):
        inv = _series_inverse(unit_coefficients(system, length), length)
        cols = [_series_mul(inv, ft.component(j, length), length, system.field.zero) for j in range(ft.n)]
        return [tuple(c[i] for c in cols) for i in range(length)]

    return DerivedStream(ft.n, ft.field, batch)


def from_recursion(system: MahlerSystem, seed: Sequence[Sequence]) -> CoefficientStream:
    """Solution f of the system whose normalized series starts with ``seed``."""
    return unnormalized_stream(system, RecursionStream(system, seed))


def seed_of(system: MahlerSystem, f: CoefficientStream) -> list[tuple[FieldElem, ...]]:
    """Seed of f~ = u f, suitable for :func:`from_recursion`."""
    T = system.nu // (system.q - 1)
    return normalized_stream(system, f).prefix(T + 1)


class AugmentedStream(CoefficientStream):
    """Appends the constant function 1 as a last component."""

    def __init__(self, base: CoefficientStream):
        super().__init__(base.n + 1, base.field)
        self.base = base

    def _compute(self, start, stop):
        zero, one = self.field.zero, self.field.one
        return [tuple(self.base.coefficient(i)) + (one if i == 0 else zero,) for i in range(start, stop)]


class SubStream(CoefficientStream):
    """Selected components of another stream."""

    def __init__(self, base: CoefficientStream, keep: Sequence[int]):
        super().__init__(len(keep), base.field)
        self.base = base
        self.keep = tuple(keep)

    def _compute(self, start, stop):
        return [tuple(self.base.coefficient(i)[j] for j in self.keep) for i in range(start, stop)]


class DoubledStream(CoefficientStream):
    """Components f_i(z^(q^e)) for a list of (i, e) pairs."""

    def __init__(self, base: CoefficientStream, q: int, comps: Sequence[tuple[int, int]]):
        super().__init__(len(comps), base.field)
        self.base = base
        self.q = q
        self.comps = tuple(comps)

    def _compute(self, start, stop):
        zero = self.field.zero
        out = []
        for t in range(start, stop):
            row = []
            for i, e in self.comps:
                step = self.q ** e
                row.append(self.base.coefficient(t // step)[i] if t % step == 0 else zero)
            out.append(tuple(row))
        return out


def bbc_stream(transform, ft: CoefficientStream) -> CoefficientStream:
    """Solution g of a pole-removing transform, from the normalized stream f~ of its source."""
    src = transform.source
    mult = transform.mult
    if transform.n0 == 0:
        return ft
    q, n0 = src.q, transform.n0

    def batch(length):
        total = length + mult
        h = [ft.component(j, total) for j in range(src.n)]
        # v = u(z^(q^n0)), its inverse series
        step = q ** n0
        ucoef = unit_coefficients(src, length // step + 1)
        v = [src.field.zero] * length
        for k, c in enumerate(ucoef):
            if k * step < length:
                v[k * step] = c
        vinv = _series_inverse(v, length)
        blocks = []
        for order in range(mult, -1, -1):
            for j in range(src.n):
                der = [h[j][i + order] * (math.factorial(i + order) // math.factorial(i)) for i in range(length)]
                blocks.append(_series_mul(vinv, der, length, src.field.zero))
        return [tuple(b[i] for b in blocks) for i in range(length)]

    return DerivedStream(src.n * (mult + 1), src.field, batch)


@dataclass(frozen=True)
class Valuation:
    index: int


@dataclass(frozen=True)
class AtLeast:
    bound: int


def inner_valuation(w: Sequence[Poly], f: CoefficientStream, length: int) -> Valuation | AtLeast:
    """Valuation of <w, f> = sum w_i f_i, or AtLeast(length) if the first ``length`` coefficients vanish."""
    terms = [(i, k, c) for i, p in enumerate(w) for k, c in enumerate(p.c) if c]
    if not terms:
        return AtLeast(length)
    pre = f.prefix(length)
    for v in range(length):
        acc = None
        for i, k, c in terms:
            if k <= v:
                x = pre[v - k][i]
                if x:
                    acc = c * x if acc is None else acc + c * x
        if acc:
            return Valuation(v)
    return AtLeast(length)

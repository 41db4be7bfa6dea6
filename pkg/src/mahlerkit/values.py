"""Linear relations among the values f_1(alpha), ..., f_n(alpha) at an algebraic point.

The value relations are ker A_l(alpha) + ev_alpha(functional relations) for
any l with |alpha^(q^l)| < rho, provided no alpha^(q^j), j < l, is a pole of
A.  Points whose orbit meets a pole go through :func:`transform_bbc` first.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .exactalg import (
    ComplexInterval,
    FieldElem,
    Interval,
    Poly,
    SubspaceBasis,
    embed_ball,
    left_kernel,
    subspace_sum,
)
from .relations import RelationBasis, find_relations
from .series import (
    AugmentedStream,
    AutomatonStream,
    CoefficientStream,
    DoubledStream,
    bbc_stream,
    normalized_stream,
)
from .system import (
    MahlerSystem,
    PointClass,
    augment_constant,
    classify_point,
    dedouble_until_regular,
    doubled_components,
    iterate_at,
    transform_bbc,
)


@dataclass(frozen=True)
class Algebraic:
    value: FieldElem

    def __str__(self) -> str:
        return f"Algebraic({self.value})"


@dataclass(frozen=True)
class Transcendental:
    def __str__(self) -> str:
        return "Transcendental"


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def __str__(self) -> str:
        return f"Inconclusive({self.reason})"


Verdict = Algebraic | Transcendental | Inconclusive


@dataclass
class PointReport:
    alpha: FieldElem
    point_class: PointClass
    l: int
    kernel: SubspaceBasis
    functional_eval: SubspaceBasis
    value_relations: SubspaceBasis
    relations: RelationBasis
    system: MahlerSystem
    trace: dict = dc_field(default_factory=dict)
    verdicts: list = dc_field(default_factory=list)

    @property
    def complete(self) -> bool:
        """True when every functional relation is certified and the basis is complete."""
        return self.relations.status == "certified"


def saturate_at(gens: Sequence[Sequence[Poly]], alpha: FieldElem) -> list[tuple[Poly, ...]]:
    """Replace generators until their values at alpha are linearly independent.

    A dependency c among the values gives sum c_i g_i vanishing at alpha, which is
    divided by (z - alpha) and swapped for the highest-degree g_i involved.  The
    k(z)-span is unchanged and the spanned k[z]-module only grows inside it.
    """
    gens = [tuple(g) for g in gens]
    if not gens:
        return gens
    fld = alpha.field
    lin = Poly(fld, [-alpha, 1])
    while True:
        vals = [[p(alpha) for p in g] for g in gens]
        ker = left_kernel(vals, fld, len(gens))
        if ker.dimension == 0:
            return gens
        c = ker.rows[0]
        combo = [Poly.const(fld, 0)] * len(gens[0])
        for ci, g in zip(c, gens):
            if ci:
                combo = [a + b * ci for a, b in zip(combo, g)]
        combo = [p.exact_div(lin) if p else p for p in combo]
        degree = lambda g: max((p.degree for p in g if p), default=-1)
        i = max((i for i, ci in enumerate(c) if ci), key=lambda i: degree(gens[i]))
        gens[i] = tuple(combo)


def _evaluate(gens: Sequence[Sequence[Poly]], alpha: FieldElem, n: int) -> SubspaceBasis:
    return SubspaceBasis(alpha.field, n, [[p(alpha) for p in g] for g in gens])


def _orbit_hits_pole(s: MahlerSystem, alpha: FieldElem, l: int) -> bool:
    point = alpha
    for _ in range(l):
        if not s.b(point):
            return True
        point = point ** s.q
    return False


def value_relation_basis(s: MahlerSystem, f: CoefficientStream, alpha, l: int | None = None,
                         relations: RelationBasis | None = None, regularize: bool = False,
                         max_columns: int | None = None) -> PointReport:
    """Basis of the k-linear relations among f_i(alpha)."""
    alpha = s.field(alpha)
    pc = classify_point(s, alpha)
    lmin = max(1, pc.l_star)
    if l is None:
        l = lmin
    elif l < lmin:
        raise ValueError(f"l = {l} is below the minimal admissible {lmin}")
    opts = {} if max_columns is None else {"max_columns": max_columns}

    if _orbit_hits_pole(s, alpha, l):
        t = transform_bbc(s, alpha)
        inner_sys = t.system
        inner_f = bbc_stream(t, normalized_stream(s, f))
        trace = {"bbc": True, "multiplicity": t.mult, "absorbed": t.n0, "doublings": 0}
        if regularize:
            inner_sys, j = dedouble_until_regular(inner_sys, alpha)
            inner_f = DoubledStream(inner_f, s.q, doubled_components(t.system.n, j))
            trace["doublings"] = j
        inner = _direct(inner_sys, inner_f, alpha, find_relations(inner_sys, inner_f, method="reduction", **opts))
        n = s.n
        restricted = inner.value_relations.intersect_coordinates(range(n))
        pulled = [[row[i] * t.lambdas[i] for i in range(n)] for row in restricted.rows]
        values = SubspaceBasis(s.field, n, pulled)
        return PointReport(alpha, pc, l, inner.kernel, inner.functional_eval, values, inner.relations,
                           s, trace | {"inner_size": inner_sys.n})

    rel = relations if relations is not None else find_relations(s, f, **opts)
    report = _direct(s, f, alpha, rel, l, pc)
    report.trace = {"bbc": False, "doublings": 0}
    return report


def _direct(s: MahlerSystem, f: CoefficientStream, alpha: FieldElem, rel: RelationBasis,
            l: int | None = None, pc: PointClass | None = None) -> PointReport:
    if pc is None:
        pc = classify_point(s, alpha)
    if l is None:
        l = max(1, pc.l_star)
    kernel = left_kernel(iterate_at(s, l, alpha), s.field, s.n)
    certified = [g for g, ok in zip(rel.generators, rel.certified) if ok]
    ev = _evaluate(saturate_at(certified, alpha), alpha, s.n)
    return PointReport(alpha, pc, l, kernel, ev, subspace_sum(kernel, ev), rel, s)


def verdict(s: MahlerSystem, f: CoefficientStream, alpha, **kw) -> PointReport:
    """Per-function verdicts, computed on the system augmented by the constant 1."""
    n = s.n
    report = value_relation_basis(augment_constant(s), AugmentedStream(f), alpha, **kw)
    out: list[Verdict] = []
    for i in range(n):
        sub = report.value_relations.intersect_coordinates([i, n])
        row = next((r for r in sub.rows if r[i]), None)
        if row is not None:
            out.append(Algebraic(-row[n] / row[i]))
        elif report.complete:
            out.append(Transcendental())
        else:
            out.append(Inconclusive("functional relations are not certified complete"))
    report.verdicts = out
    return report


@dataclass(frozen=True)
class WeightedVerdict:
    verdict: Verdict
    kernel_part: tuple[FieldElem, ...] | None = None
    functional_part: tuple[FieldElem, ...] | None = None


def _solve_in(target: Sequence[FieldElem], groups: Sequence[SubspaceBasis]):
    """Write target as a sum of one vector from each group, or return None."""
    fld = groups[0].field
    rows = [list(r) for g in groups for r in g.rows]
    ker = left_kernel(rows + [list(target)], fld, len(rows) + 1)
    sol = next((c for c in ker.rows if c[-1]), None)
    if sol is None:
        return None
    scale = -sol[-1].inverse()
    parts, k = [], 0
    for g in groups:
        vec = [fld.zero] * g.ambient
        for r in g.rows:
            c = sol[k] * scale
            if c:
                vec = [a + c * b for a, b in zip(vec, r)]
            k += 1
        parts.append(tuple(vec))
    return parts


def weighted_verdict(s: MahlerSystem, f: CoefficientStream, alpha, weights: Sequence, **kw) -> WeightedVerdict:
    """Decide whether sum w_i f_i(alpha) lies in k, with a decomposition of the witness."""
    n, fld = s.n, s.field
    w = [fld(x) for x in weights]
    if len(w) != n:
        raise ValueError(f"need {n} weights")
    report = value_relation_basis(augment_constant(s), AugmentedStream(f), alpha, **kw)
    V = report.value_relations
    U = [w + [fld.zero], [fld.zero] * n + [fld.one]]
    ker = left_kernel([list(r) for r in V.rows] + U, fld, len(V.rows) + 2)
    value = None
    for c in ker.rows:
        a, b = c[-2], c[-1]
        if a:
            value = -b / a
            break
    if value is None:
        if report.complete:
            return WeightedVerdict(Transcendental())
        return WeightedVerdict(Inconclusive("functional relations are not certified complete"))
    target = tuple(w) + (-value,)
    for groups in ((report.kernel,), (report.functional_eval,), (report.kernel, report.functional_eval)):
        if any(g.dimension == 0 for g in groups):
            continue
        parts = _solve_in(target, groups)
        if parts is None:
            continue
        if len(groups) == 2:
            return WeightedVerdict(Algebraic(value), parts[0], parts[1])
        zero = (fld.zero,) * (n + 1)
        if groups[0] is report.kernel:
            return WeightedVerdict(Algebraic(value), parts[0], zero)
        return WeightedVerdict(Algebraic(value), zero, parts[0])
    # relations came through a transformed system; no split is available
    return WeightedVerdict(Algebraic(value))


# ---------------------------------------------------------------------------
# numeric cross-check

@dataclass(frozen=True)
class NumericRow:
    label: str
    residual: ComplexInterval
    contains_zero: bool
    expected_zero: bool = True

    @property
    def ok(self) -> bool:
        return self.contains_zero == self.expected_zero


def coefficient_bound(f: CoefficientStream, length: int, precision: int) -> tuple[Fraction, bool]:
    """Bound on |coefficients| and whether it is proven (automaton streams) or read off a prefix."""
    if isinstance(f, AutomatonStream):
        vals = {x for row in f.table for x in row}
        return max((embed_ball(x, precision).abs_upper(precision) for x in vals), default=Fraction(0)), True
    if isinstance(f, AugmentedStream):
        b, proven = coefficient_bound(f.base, length, precision)
        return max(b, Fraction(1)), proven
    vals = {x for row in f.prefix(length) for x in row}
    return max((embed_ball(x, precision).abs_upper(precision) for x in vals), default=Fraction(0)), False


def evaluate_at(f: CoefficientStream, alpha: FieldElem, terms: int, precision: int) -> tuple[list[ComplexInterval], bool]:
    """Balls around f_j(alpha) from partial sums plus the geometric tail bound."""
    a = embed_ball(alpha, precision)
    r = a.abs_upper(precision)
    if r >= 1:
        raise ValueError("|alpha| must be below 1")
    bound, proven = coefficient_bound(f, terms, precision)
    cache: dict[FieldElem, ComplexInterval] = {}
    sums = [ComplexInterval.exact(0) for _ in range(f.n)]
    power = ComplexInterval.exact(1)
    for row in f.prefix(terms):
        for j, x in enumerate(row):
            if x:
                e = cache.get(x)
                if e is None:
                    e = cache[x] = embed_ball(x, precision)
                sums[j] = (sums[j] + e * power).round(precision)
        power = (power * a).round(precision)
    tail = bound * r ** terms / (1 - r)
    pad = ComplexInterval(Interval(-tail, tail), Interval(-tail, tail))
    return [(x + pad).round(precision) for x in sums], proven


def numeric_check(report: PointReport, f: CoefficientStream, terms: int = 2000, precision: int = 256,
                  extra: Sequence[tuple[str, Sequence[FieldElem], FieldElem, bool]] = ()) -> list[NumericRow]:
    """Residual balls for every value relation and algebraic verdict in ``report``.

    ``f`` is the stream the report was computed for; for verdict reports this
    is the original stream and the constant 1 is appended here.  ``extra``
    rows (label, weights, value, expect_zero) check sum w_j f_j(alpha) - value.
    """
    m = report.value_relations.ambient
    stream = f if f.n == m else AugmentedStream(f)
    balls, _ = evaluate_at(stream, report.alpha, terms, precision)
    rows = []

    def combo(weights, value):
        acc = ComplexInterval.exact(0)
        for w, b in zip(weights, balls):
            if w:
                acc = acc + embed_ball(w, precision) * b
        if value:
            acc = acc - embed_ball(value, precision)
        return acc.round(precision)

    for k, v in enumerate(report.value_relations.rows):
        res = combo(v, None)
        rows.append(NumericRow(f"relation {k + 1}", res, res.contains_zero()))
    for i, verd in enumerate(report.verdicts):
        if isinstance(verd, Algebraic):
            w = [report.alpha.field.zero] * m
            w[i] = report.alpha.field.one
            res = combo(w, verd.value)
            rows.append(NumericRow(f"f{i + 1} = {verd.value}", res, res.contains_zero()))
    for label, weights, value, expect in extra:
        w = list(weights) + [report.alpha.field.zero] * (m - len(weights))
        res = combo(w, value)
        rows.append(NumericRow(label, res, res.contains_zero(), expect))
    return rows

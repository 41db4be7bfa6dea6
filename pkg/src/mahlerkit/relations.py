"""Linear relations over k(z) among the components of a Mahler solution.

Relations of height h are found as the left kernel of the striped matrix
whose column i stacks f_i, f_(i-1), ..., f_(i-h).  The kernel is tracked by
an order basis, so the cost per column is proportional to the rows still
below degree h rather than to the full dimension n(h+1).

Kernel vectors are promoted to proven relations by a section-closure
certificate: a finite set V of polynomial vectors containing w, closed under
the q sections of v -> v A_hat, all of whose inner products with f vanish to
order N = nu // (q - 1) + 1.  If some member had finite valuation m, its
sections would give m >= q m - nu, so m <= nu / (q - 1) < N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .exactalg import FieldElem, NumberField, Poly, RatFunc, SubspaceBasis, _rref
from .series import AtLeast, AutomatonStream, CoefficientStream, SubStream, Valuation, inner_valuation
from .system import DegenerateSystem, MahlerSystem

DEFAULT_MAX_COLUMNS = 10**6
SCREEN_DEPTH = 64
# largest n(h+1) for which the basis-theorem height is searched directly
AUTO_LIMIT = 1024


# ---------------------------------------------------------------------------
# the zero bound

def _bound_parts(n: int, d: int, q: int, nu: int, h: int) -> tuple[Fraction, Fraction, int]:
    if q < 2 or n < 1 or d < 0 or nu < 0 or h < 0:
        raise ValueError("need q >= 2, n >= 1 and d, nu, h >= 0")
    exponent = n * (Fraction(q * h + d + 1, q - 1) + q + 1)
    shift = nu - Fraction(h + d, q - 1)
    return exponent, shift, q - 1


def _iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) for x >= 0."""
    if x < 2:
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        nxt = ((k - 1) * r + x // r ** (k - 1)) // k
        if nxt >= r:
            break
        r = nxt
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def zero_bound(n: int, d: int, q: int, nu: int, h: int) -> int:
    """ceil((q^e (h+q) + nu - (h+d)/(q-1)) / (q-1)) with e = n((qh+d+1)/(q-1) + q + 1), exactly."""
    e, shift, den = _bound_parts(n, d, q, nu, h)
    a, b = e.numerator, e.denominator
    target = (h + q) ** b * q ** a  # X^b where X = (h+q) q^(a/b)

    def enough(c: int) -> bool:
        y = c * den - shift
        return y >= 0 and y.numerator ** b >= target * y.denominator ** b

    c = math.floor((_iroot(target, b) + shift) / den)
    while not enough(c):
        c += 1
    while enough(c - 1):
        c -= 1
    return c


def zero_bound_pre_ceiling(n: int, d: int, q: int, nu: int, h: int) -> Fraction:
    """The bound before the ceiling; only defined when the exponent is an integer."""
    e, shift, den = _bound_parts(n, d, q, nu, h)
    if e.denominator != 1:
        raise ValueError(f"exponent {e} is not an integer; the bound is irrational before the ceiling")
    return (q ** int(e) * (h + q) + shift) / den


# ---------------------------------------------------------------------------
# striped columns

def s_column(f: CoefficientStream, h: int, i: int) -> list[FieldElem]:
    """Column i: f_i, f_(i-1), ..., f_(i-h) stacked, zero for negative indices."""
    zero = f.field.zero
    out: list[FieldElem] = []
    for j in range(h + 1):
        out.extend(f.coefficient(i - j) if i - j >= 0 else (zero,) * f.n)
    return out


def s_columns(f: CoefficientStream, h: int, count: int) -> list[list[FieldElem]]:
    return [s_column(f, h, i) for i in range(count)]


def vector_to_polys(lam: Sequence[FieldElem], n: int, field: NumberField) -> tuple[Poly, ...]:
    """Inverse of the stacking map: block j holds the z^j coefficients."""
    h1 = len(lam) // n
    return tuple(Poly(field, [lam[j * n + c] for j in range(h1)]) for c in range(n))


def polys_to_vector(w: Sequence[Poly], h: int) -> list[FieldElem]:
    field = w[0].field
    out = [field.zero] * (len(w) * (h + 1))
    for c, p in enumerate(w):
        if p.degree > h:
            raise ValueError(f"degree {p.degree} exceeds height {h}")
        for j, x in enumerate(p.c):
            out[j * len(w) + c] = x
    return out


# ---------------------------------------------------------------------------
# order basis

class ApproximantBasis:
    """Order basis of the left kernel of the striped matrix, one column at a time.

    Row i is a polynomial vector b_i of degree deg[i].  After processing
    columns 0 .. M-1 the height-h kernel is spanned by z^e b_i for e <= h - deg[i].
    Rows with degree above h can never contribute again and are dropped.
    """

    def __init__(self, f: CoefficientStream, h: int):
        self.f = f
        self.h = h
        self.n = n = f.n
        fld = f.field
        self.rows: list[list[list[FieldElem]]] = [[[fld.one] if j == i else [] for j in range(n)] for i in range(n)]
        self.deg = [0] * n
        self.active = list(range(n))
        self.order = 0

    @property
    def dimension(self) -> int:
        return sum(self.h - self.deg[i] + 1 for i in self.active)

    def _residual(self, i: int, pre) -> FieldElem | None:
        sigma = self.order
        acc = None
        for j, coeffs in enumerate(self.rows[i]):
            for k, c in enumerate(coeffs):
                if c and k <= sigma:
                    x = pre[sigma - k][j]
                    if x:
                        acc = c * x if acc is None else acc + c * x
        return acc if acc else None

    def step(self) -> bool:
        """Process the next column; True when the kernel shrank."""
        pre = self.f.prefix(self.order + 1)
        res = {}
        for i in self.active:
            c = self._residual(i, pre)
            if c is not None:
                res[i] = c
        self.order += 1
        if not res:
            return False
        piv = min(res, key=lambda i: (self.deg[i], i))
        inv = res[piv].inverse()
        prow = self.rows[piv]
        for i, c in res.items():
            if i == piv:
                continue
            factor = c * inv
            row = self.rows[i]
            for j in range(self.n):
                a, b = row[j], prow[j]
                if not b:
                    continue
                if len(a) < len(b):
                    a = a + [self.f.field.zero] * (len(b) - len(a))
                for k, y in enumerate(b):
                    if y:
                        a[k] = a[k] - factor * y
                while a and not a[-1]:
                    a.pop()
                row[j] = a
        self.rows[piv] = [[self.f.field.zero] + p if p else [] for p in prow]
        self.deg[piv] += 1
        if self.deg[piv] > self.h:
            self.active.remove(piv)
        return True

    def generators(self) -> list[tuple[Poly, ...]]:
        fld = self.f.field
        return [tuple(Poly(fld, p) for p in self.rows[i]) for i in sorted(self.active, key=lambda i: (self.deg[i], i))]

    def degrees(self) -> list[int]:
        return [self.deg[i] for i in sorted(self.active, key=lambda i: (self.deg[i], i))]

    def basis(self) -> SubspaceBasis:
        """The kernel as a subspace of (k^n)^(h+1)."""
        vecs = []
        for w, dg in zip(self.generators(), self.degrees()):
            for e in range(self.h - dg + 1):
                vecs.append(polys_to_vector([p.shift(e) for p in w], self.h))
        return SubspaceBasis(self.f.field, self.n * (self.h + 1), vecs)


@dataclass
class KernelResult:
    engine: ApproximantBasis | None
    columns_used: int
    stabilized: bool
    _basis: SubspaceBasis | None = None

    @property
    def basis(self) -> SubspaceBasis:
        if self._basis is None:
            self._basis = self.engine.basis()
        return self._basis

    @property
    def dimension(self) -> int:
        return self._basis.dimension if self.engine is None else self.engine.dimension

    @property
    def generators(self) -> list[tuple[Poly, ...]]:
        return self.engine.generators() if self.engine is not None else []


def _run(engine: ApproximantBasis, max_columns: int, window: int) -> tuple[bool, int]:
    """Advance until the kernel is {0}, stays unchanged for ``window`` columns, or the cap."""
    quiet = 0
    while engine.order < max_columns:
        if engine.dimension == 0:
            return True, quiet
        if quiet >= window:
            return True, quiet
        quiet = 0 if engine.step() else quiet + 1
    return engine.dimension == 0 or quiet >= window, quiet


def incremental_kernel(f: CoefficientStream, h: int, max_columns: int = DEFAULT_MAX_COLUMNS,
                       window: int | None = None) -> KernelResult:
    engine = ApproximantBasis(f, h)
    window = window if window is not None else f.n * (h + 1)
    stabilized, _ = _run(engine, max_columns, window)
    return KernelResult(engine, engine.order, stabilized)


def full_bound_kernel(f: AutomatonStream, h: int, total: int) -> KernelResult:
    """Left kernel over columns 0 .. total-1, streaming automaton states in numpy blocks.

    Columns are checked exactly while the kernel is nonzero; once it is {0}
    the remaining states are still generated so that the scan covers
    ``total`` columns.
    """
    n, fld = f.n, f.field
    size = n * (h + 1)
    kernel = [[fld.one if i == j else fld.zero for j in range(size)] for i in range(size)]
    window: list[int] = []  # states of the last h+1 indices, newest first
    zero_vec = (fld.zero,) * n
    processed = 0
    for start, block in f.state_blocks(total):
        if not kernel:
            processed = start + len(block)
            continue
        for off, st in enumerate(block.tolist()):
            window.insert(0, st)
            del window[h + 1:]
            col: list[FieldElem] = []
            for j in range(h + 1):
                col.extend(f.table[window[j]] if j < len(window) else zero_vec)
            vals = [sum((a * b for a, b in zip(lam, col) if a and b), fld.zero) for lam in kernel]
            piv = next((k for k, v in enumerate(vals) if v), None)
            if piv is not None:
                inv = vals[piv].inverse()
                prow = kernel[piv]
                kernel = [[a - (vals[k] * inv) * b for a, b in zip(row, prow)] if vals[k] else row
                          for k, row in enumerate(kernel) if k != piv]
            if not kernel:
                break
        processed = start + len(block)
    return KernelResult(None, processed, True, SubspaceBasis(fld, size, kernel))


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class FailureWitness:
    """A closure member v with <v, f> having a nonzero coefficient at ``index``."""

    v: tuple[Poly, ...]
    index: int
    is_input: bool

    def __str__(self) -> str:
        who = "the vector itself" if self.is_input else "a section of the vector"
        return f"coefficient {self.index} of <v, f> is nonzero for {who}"


@dataclass(frozen=True)
class SectionCertificate:
    """Proof that <w, f> = 0: a section-closed set of vectors vanishing to order ``order``."""

    w: tuple[Poly, ...]
    H: int
    order: int
    members: tuple[tuple[Poly, ...], ...]
    table: tuple[tuple[tuple[FieldElem, ...], ...], ...]

    def check(self, s: MahlerSystem, f: CoefficientStream) -> bool:
        """Recheck closure, membership of w, and the vanishing orders."""
        if self.order != s.nu // (s.q - 1) + 1:
            return False
        if not any(any(p.c) for p in self.w):
            return True
        n, fld = s.n, s.field
        flat = [polys_to_vector(m, self.H) for m in self.members]
        if not _in_span(polys_to_vector(self.w, self.H), flat, fld):
            return False
        for m, rows in zip(self.members, self.table):
            secs = _sections(m, s)
            for u, coords in zip(secs, rows):
                combo = [fld.zero] * (n * (self.H + 1))
                for c, v in zip(coords, flat):
                    if c:
                        combo = [a + c * b for a, b in zip(combo, v)]
                if any(p.degree > self.H for p in u) or polys_to_vector(u, self.H) != combo:
                    return False
            if not isinstance(inner_valuation(m, f, self.order), AtLeast):
                return False
        return True


def _in_span(v, vecs, fld) -> bool:
    rows, piv = _rref([list(x) for x in vecs])
    v = list(v)
    for row, p in zip(rows, piv):
        c = v[p]
        if c:
            v = [a - c * b for a, b in zip(v, row)]
    return not any(v)


def _sections(v: Sequence[Poly], s: MahlerSystem) -> list[tuple[Poly, ...]]:
    """u_0 .. u_(q-1) with v(z) A_hat(z) = sum_r z^r u_r(z^q)."""
    n, q, fld = s.n, s.q, s.field
    prod = []
    for c in range(n):
        acc = Poly.const(fld, 0)
        for i in range(n):
            if v[i] and s.A_hat[i][c]:
                acc = acc + v[i] * s.A_hat[i][c]
        prod.append(acc)
    return [tuple(Poly(fld, p.c[r::q]) for p in prod) for r in range(q)]


def certify(w: Sequence[Poly], s: MahlerSystem, f: CoefficientStream, H: int | None = None,
            screen: int = SCREEN_DEPTH) -> SectionCertificate | FailureWitness:
    """Prove <w, f> = 0 or exhibit a nonzero coefficient."""
    fld = s.field
    w = tuple(p if isinstance(p, Poly) else Poly(fld, [p]) for p in w)
    if len(w) != s.n:
        raise ValueError(f"vector has {len(w)} entries for a system of size {s.n}")
    order = s.nu // (s.q - 1) + 1
    wdeg = max((p.degree for p in w if p), default=0)
    min_h = -(-s.d // (s.q - 1))
    if H is None:
        H = max(wdeg, min_h)
    if H < min_h or wdeg > H:
        raise ValueError(f"height {H} must be at least {min_h} and the degree of the vector")
    if not any(p for p in w):
        return SectionCertificate(w, H, order, (), ())
    first = inner_valuation(w, f, max(screen, order))
    if isinstance(first, Valuation):
        return FailureWitness(w, first.index, True)

    members: list[tuple[Poly, ...]] = []
    # echelon rows with their expression in terms of members
    ech: list[tuple[int, list[FieldElem], dict[int, FieldElem]]] = []

    def reduce(vec):
        combo: dict[int, FieldElem] = {}
        vec = list(vec)
        for p, row, rc in ech:
            c = vec[p]
            if c:
                vec = [a - c * b for a, b in zip(vec, row)]
                for k, x in rc.items():
                    combo[k] = combo.get(k, fld.zero) + c * x
        return vec, combo

    def add(vecpolys) -> dict[int, FieldElem]:
        vec = polys_to_vector(vecpolys, H)
        rem, combo = reduce(vec)
        if not any(rem):
            return combo
        idx = len(members)
        members.append(tuple(vecpolys))
        p = next(j for j, x in enumerate(rem) if x)
        inv = rem[p].inverse()
        # rem = member - sum combo; scaled so rem[p] = 1
        rc = {k: -x * inv for k, x in combo.items() if x}
        rc[idx] = inv
        ech.append((p, [x * inv for x in rem], rc))
        return {idx: fld.one}

    add(w)
    table: list[tuple[tuple[FieldElem, ...], ...]] = []
    raw: list[list[dict[int, FieldElem]]] = []
    k = 0
    while k < len(members):
        secs = _sections(members[k], s)
        row = []
        for u in secs:
            if any(p.degree > H for p in u):
                raise ValueError("section escaped the degree bound")
            row.append(add(u))
        raw.append(row)
        k += 1
    r = len(members)
    for row in raw:
        table.append(tuple(tuple(c.get(j, fld.zero) for j in range(r)) for c in row))
    for m in members:
        val = inner_valuation(m, f, order)
        if isinstance(val, Valuation):
            return FailureWitness(m, val.index, m == w)
    return SectionCertificate(w, H, order, tuple(members), tuple(table))


# ---------------------------------------------------------------------------
# relation bases

def normalize_relation(w: Sequence[Poly]) -> tuple[Poly, ...]:
    """Scale so the first nonzero coefficient, by entry then degree, is 1."""
    for p in w:
        if p:
            inv = p.c[p.valuation()].inverse()
            return tuple(x * inv for x in w)
    return tuple(w)


def echelonize(gens: Sequence[tuple[Poly, ...]]) -> list[tuple[Poly, ...]]:
    """Degree echelon: cancel the top pivot entries of later generators, then normalize."""
    gens = [tuple(g) for g in gens if any(p for p in g)]
    out: list[tuple[Poly, ...]] = []
    for g in gens:
        g = list(g)
        changed = True
        while changed and any(p for p in g):
            changed = False
            for e in out:
                p = max(i for i, x in enumerate(e) if x)
                if g[p] and g[p].degree >= e[p].degree:
                    quo = g[p] // e[p]
                    g = [a - quo * b for a, b in zip(g, e)]
                    changed = True
        if any(p for p in g):
            out.append(tuple(g))
    return [normalize_relation(g) for g in out]


@dataclass
class RelationBasis:
    generators: list[tuple[Poly, ...]]
    certified: list[bool]
    certificates: list[SectionCertificate | None]
    columns_used: int
    method: str
    height: int | None = None
    notes: list[str] = dc_field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def status(self) -> str:
        return "certified" if all(self.certified) and not self.notes else "candidate"

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "generators": [[str(p) for p in g] for g in self.generators],
            "status": self.status,
            "columns_used": self.columns_used,
            "method": self.method,
        }


@dataclass(frozen=True)
class Independent:
    columns_used: int


@dataclass(frozen=True)
class Dependent:
    w: tuple[Poly, ...]
    certificate: SectionCertificate
    columns_used: int


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    columns_used: int


def decide_independence(s: MahlerSystem, f: CoefficientStream, max_columns: int = DEFAULT_MAX_COLUMNS,
                        window: int | None = None) -> Independent | Dependent | Inconclusive:
    h = s.d // (s.q - 1)
    engine = ApproximantBasis(f, h)
    window = window if window is not None else s.n * (h + 1)
    while True:
        stabilized, _ = _run(engine, max_columns, window)
        if engine.dimension == 0:
            return Independent(engine.order)
        if stabilized:
            for w in engine.generators():
                cert = certify(w, s, f, H=max(h, -(-s.d // (s.q - 1))))
                if isinstance(cert, SectionCertificate):
                    return Dependent(normalize_relation(w), cert, engine.order)
        if engine.order >= max_columns:
            return Inconclusive(f"kernel of dimension {engine.dimension} after {engine.order} columns", engine.order)
        # kernel changes later; step past the quiet window
        engine.step()


def reduce_by_relation(s: MahlerSystem, w: Sequence[Poly]) -> tuple[MahlerSystem, tuple[int, ...]]:
    """System for the functions other than the pivot (highest index with w_i != 0)."""
    if len(w) != s.n:
        raise ValueError("relation length does not match the system")
    nz = [i for i, p in enumerate(w) if p]
    if not nz:
        raise ValueError("zero relation")
    p = nz[-1]
    keep = tuple(i for i in range(s.n) if i != p)
    if not keep:
        raise ValueError("cannot reduce a system of size 1")
    wq = [RatFunc(x.compose_power(s.q)) for x in w]
    inv_last = wq[p].inverse()
    rows = []
    for i in keep:
        rows.append([s.A[i][j] - s.A[i][p] * wq[j] * inv_last for j in keep])
    return MahlerSystem(s.q, rows, s.field), keep


def _lift(g: Sequence[Poly], keep: Sequence[int], n: int, fld: NumberField) -> tuple[Poly, ...]:
    out = [Poly.const(fld, 0)] * n
    for x, i in zip(g, keep):
        out[i] = x
    return tuple(out)


def _by_reduction(s: MahlerSystem, f: CoefficientStream, max_columns: int, window: int | None):
    dec = decide_independence(s, f, max_columns, window)
    if isinstance(dec, Independent):
        return [], [], dec.columns_used, []
    if isinstance(dec, Inconclusive):
        return [], [], dec.columns_used, [dec.reason]
    if s.n == 1:
        return [dec.w], [dec.certificate], dec.columns_used, []
    try:
        sub, keep = reduce_by_relation(s, dec.w)
    except DegenerateSystem:
        return [dec.w], [dec.certificate], dec.columns_used, ["reduced system is singular"]
    gens, certs, cols, notes = _by_reduction(sub, SubStream(f, keep), max_columns, window)
    lifted = [_lift(g, keep, s.n, s.field) for g in gens]
    return [dec.w] + lifted, [dec.certificate] + certs, dec.columns_used + cols, notes


def find_relations(s: MahlerSystem, f: CoefficientStream, max_columns: int = DEFAULT_MAX_COLUMNS,
                   window: int | None = None, method: str = "auto") -> RelationBasis:
    """A k(z)-basis of the relation module.

    ``method="height"`` searches height 4^n d directly; ``"reduction"`` decides
    independence at the lower height and recurses on the system reduced by each
    certified relation.  ``"auto"`` picks the first when n(h+1) is small.
    """
    h = 4 ** s.n * s.d
    if method == "auto":
        method = "height" if s.n * (h + 1) <= AUTO_LIMIT else "reduction"
    if method == "reduction":
        gens, certs, cols, notes = _by_reduction(s, f, max_columns, window)
        if notes:
            return RelationBasis(gens, [True] * len(gens), list(certs), cols, method, None, notes)
        gens = [normalize_relation(g) for g in gens]
        # triangular in the pivot index already; redo certificates for the normalized forms
        certs = [certify(g, s, f) for g in gens]
        return RelationBasis(gens, [isinstance(c, SectionCertificate) for c in certs],
                             [c if isinstance(c, SectionCertificate) else None for c in certs], cols, method, None)
    if method != "height":
        raise ValueError(f"unknown method {method!r}")
    engine = ApproximantBasis(f, h)
    window = window if window is not None else s.n * (h + 1)
    while True:
        stabilized, _ = _run(engine, max_columns, window)
        if engine.dimension == 0:
            return RelationBasis([], [], [], engine.order, method, h)
        gens = engine.generators()
        if stabilized:
            certs = [certify(w, s, f, H=max(h, -(-s.d // (s.q - 1)))) for w in gens]
            if all(isinstance(c, SectionCertificate) for c in certs):
                out = echelonize(gens)
                final = [certify(g, s, f) for g in out]
                return RelationBasis(out, [isinstance(c, SectionCertificate) for c in final],
                                     [c if isinstance(c, SectionCertificate) else None for c in final],
                                     engine.order, method, h)
        if engine.order >= max_columns:
            return RelationBasis([normalize_relation(g) for g in gens], [False] * len(gens), [None] * len(gens),
                                 engine.order, method, h)
        engine.step()

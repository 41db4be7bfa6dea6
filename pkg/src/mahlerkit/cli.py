"""Command-line front end and the expression grammar for inputs."""

from __future__ import annotations

import argparse
import json
import re
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .exactalg import FieldElem, NumberField, Poly, RatFunc

if TYPE_CHECKING:
    from .automaton import Dfao
    from .series import CoefficientStream
    from .system import MahlerSystem


class ParseError(ValueError):
    def __init__(self, message: str, src: str = "", pos: int | None = None):
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}" + (f" in {src!r}" if src else ""))
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|([tz])|(\*\*|[-+*/^()]))")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            j = pos
            while j < len(src) and src[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {src[j]!r}", src, j)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", m.group(1), start))
        elif m.group(2):
            out.append(("sym", m.group(2), start))
        else:
            out.append(("op", "^" if m.group(3) == "**" else m.group(3), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, field: NumberField):
        self.src = src
        self.field = field
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            raise ParseError(f"expected {value!r}", self.src, pos)

    def expr(self) -> RatFunc:
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> RatFunc:
        acc = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.factor()
            if op == "*":
                acc = acc * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", self.src, pos)
                acc = acc / rhs
        return acc

    def factor(self) -> RatFunc:
        kind, text, pos = self.peek()
        if kind == "op" and text in ("-", "+"):
            self.take()
            val = self.factor()
            return -val if text == "-" else val
        base = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, text, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer", self.src, pos)
            base = base ** int(text)
        return base

    def base(self) -> RatFunc:
        kind, text, pos = self.take()
        f = self.field
        if kind == "num":
            return RatFunc.const(f, Fraction(int(text)))
        if kind == "sym" and text == "z":
            return RatFunc.z(f)
        if kind == "sym" and text == "t":
            if f.degree == 1:
                raise ParseError("the field generator t needs a minimal polynomial of degree >= 2", self.src, pos)
            return RatFunc.const(f, f.gen)
        if kind == "op" and text == "(":
            val = self.expr()
            self.expect(")")
            return val
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", self.src, pos)


def parse_expression(src: str, field: NumberField | None = None) -> FieldElem | Poly | RatFunc:
    """Parse an expression in ``t`` (field generator) and ``z``.

    The result is the simplest type holding it: a field element when constant,
    a polynomial when the denominator is constant, else a rational function.
    """
    field = field or NumberField.rationals()
    p = _Parser(src, field)
    if p.peek()[0] == "end":
        raise ParseError("empty expression", src, 0)
    val = p.expr()
    kind, text, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {text!r}", src, pos)
    if val.den.degree == 0:
        num = val.num
        if num.degree <= 0:
            return num.coeff(0)
        return num
    return val


def parse_field_elem(src: str, field: NumberField) -> FieldElem:
    val = parse_expression(src, field)
    if not isinstance(val, FieldElem):
        raise ParseError(f"expected a constant, got {src!r}")
    return val


def parse_ratfunc(src: str, field: NumberField) -> RatFunc:
    val = parse_expression(src, field)
    if isinstance(val, RatFunc):
        return val
    if isinstance(val, Poly):
        return RatFunc(val)
    return RatFunc.const(field, val)


def parse_minpoly(src: str) -> list[Fraction]:
    """Rational coefficients, low degree first, of a polynomial in z (or t)."""
    q = NumberField.rationals()
    val = parse_expression(src.replace("t", "z"), q)
    if isinstance(val, FieldElem):
        raise ParseError("minimal polynomial must have positive degree", src)
    if isinstance(val, RatFunc):
        raise ParseError("minimal polynomial must be a polynomial", src)
    return [c.to_fraction() for c in val.c]


# ---------------------------------------------------------------------------
# sessions

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_INCONCLUSIVE = 0, 2, 3, 4


@dataclass
class Session:
    """One input source over one ambient field."""

    field: NumberField
    system: "MahlerSystem"
    stream: "CoefficientStream"
    label: str
    automaton: "Dfao | None" = None


def _field_from(entry: dict | None, minpoly: str | None, root_near: str | None) -> NumberField | None:
    if minpoly is None and entry:
        minpoly = entry.get("minpoly")
        root_near = root_near if root_near is not None else entry.get("root_near")
    if minpoly is None:
        return None
    hint = complex(root_near.replace(" ", "")) if isinstance(root_near, str) else (root_near or 0)
    return NumberField(parse_minpoly(minpoly), hint)


def read_document(path: str) -> dict:
    """Load an input file: TOML for ``.toml`` paths, JSON otherwise."""
    try:
        if path.endswith(".toml"):
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ParseError(f"invalid input file {path}: {exc}") from exc


def load_session(source: str, minpoly: str | None = None, root_near: str | None = None) -> Session:
    from .automaton import Dfao, to_mahler_system
    from .demos import DEMOS, golden_field
    from .series import from_recursion
    from .system import MahlerSystem

    if source.startswith("demo:"):
        name = source[5:]
        if name not in DEMOS:
            raise ParseError(f"unknown demo {name!r}; choose from {', '.join(sorted(DEMOS))}")
        data = DEMOS[name]
        field = _field_from(None, minpoly, root_near) or golden_field()
    else:
        data = read_document(source)
        field = _field_from(data.get("field"), minpoly, root_near) or NumberField.rationals()
    try:
        if "delta" in data:
            a = Dfao.from_dict(data, field)
            system, stream = to_mahler_system(a)
            return Session(field, system, stream, source, a)
        if "matrix" in data:
            matrix = [[parse_ratfunc(str(x), field) for x in row] for row in data["matrix"]]
            system = MahlerSystem(int(data["q"]), matrix, field)
            if "seed" not in data:
                raise ValueError("a system file needs a \"seed\" for its solution")
            seed = [[parse_field_elem(str(x), field) for x in v] for v in data["seed"]]
            return Session(field, system, from_recursion(system, seed), source)
    except KeyError as exc:
        raise ParseError(f"missing key {exc}") from exc
    raise ParseError("input must describe an automaton (\"delta\") or a system (\"matrix\")")


# ---------------------------------------------------------------------------
# rendering

def _vec(v) -> list[str]:
    return [str(x) for x in v]


def _class_name(pc) -> str:
    from .system import SingularDetZero, SingularPole

    if isinstance(pc.kind, SingularDetZero):
        return "singular-det-zero"
    if isinstance(pc.kind, SingularPole):
        return "singular-pole"
    return "regular"


def _verdict_json(i: int, v) -> dict:
    from .values import Algebraic, Transcendental

    out = {"f": f"f{i + 1}"}
    if isinstance(v, Algebraic):
        out.update(status="algebraic", value=str(v.value))
    elif isinstance(v, Transcendental):
        out["status"] = "transcendental"
    else:
        out.update(status="inconclusive", reason=v.reason)
    return out


def _report_json(report) -> dict:
    out = {
        "alpha": str(report.alpha),
        "class": _class_name(report.point_class),
        "l": report.l,
        "kernel": [_vec(r) for r in report.kernel.rows],
        "functional": [[str(p) for p in g] for g in report.relations.generators],
        "value_relations": [_vec(r) for r in report.value_relations.rows],
        "status": report.relations.status,
        "trace": report.trace,
    }
    if report.verdicts:
        out["verdicts"] = [_verdict_json(i, v) for i, v in enumerate(report.verdicts)]
    return out


def _emit(args, data: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=False))
    else:
        for line in lines:
            print(line)


def _matrix_lines(system) -> list[str]:
    cells = system.pretty()
    width = max(len(c) for row in cells for c in row)
    return ["  [ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells]


# ---------------------------------------------------------------------------
# subcommands

def _cmd_compile(args) -> int:
    s = load_session(args.source, args.minpoly, args.root_near)
    data = {"q": s.system.q, "n": s.system.n, "matrix": s.system.pretty()}
    if s.automaton is not None:
        from .automaton import kernel_closure

        data["maps"] = [_vec(m) for m in kernel_closure(s.automaton).maps]
    lines = [f"q = {s.system.q}, n = {s.system.n}", "A(z) ="] + _matrix_lines(s.system)
    _emit(args, data, lines)
    return EXIT_OK


def _cmd_expand(args) -> int:
    s = load_session(args.source, args.minpoly, args.root_near)
    pre = s.stream.prefix(args.terms)
    if args.all:
        rows = [_vec(v) for v in pre]
        lines = [f"{i}: " + ", ".join(r) for i, r in enumerate(rows)]
    else:
        if not 1 <= args.component <= s.system.n:
            raise ValueError(f"component must be between 1 and {s.system.n}")
        rows = [str(v[args.component - 1]) for v in pre]
        lines = [f"{i}: {r}" for i, r in enumerate(rows)]
    _emit(args, {"terms": rows}, lines)
    return EXIT_OK


def _cmd_bound(args) -> int:
    from .relations import zero_bound, zero_bound_pre_ceiling

    c = zero_bound(args.n, args.d, args.q, args.nu, args.height)
    try:
        pre = str(zero_bound_pre_ceiling(args.n, args.d, args.q, args.nu, args.height))
    except ValueError:
        pre = None
    _emit(args, {"c": c, "pre_ceiling": pre}, [str(c)])
    return EXIT_OK


def _cmd_relations(args) -> int:
    from .relations import find_relations
    from .series import AugmentedStream
    from .system import augment_constant

    s = load_session(args.source, args.minpoly, args.root_near)
    system, stream = s.system, s.stream
    if args.augment:
        system, stream = augment_constant(system), AugmentedStream(stream)
    rb = find_relations(system, stream, max_columns=args.max_columns, window=args.window, method=args.method)
    lines = [f"rank {rb.rank} ({rb.status}, {rb.columns_used} columns, method {rb.method})"]
    lines += ["  (" + ", ".join(str(p) for p in g) + ")" for g in rb.generators]
    _emit(args, rb.to_json(), lines)
    return EXIT_OK if rb.status == "certified" else EXIT_INCONCLUSIVE


def _cmd_independence(args) -> int:
    from .relations import Dependent, Independent, decide_independence, full_bound_kernel, zero_bound

    s = load_session(args.source, args.minpoly, args.root_near)
    sysm = s.system
    if args.full_bound:
        if s.automaton is None:
            raise ValueError("--full-bound needs an automaton source")
        h = sysm.d // (sysm.q - 1)
        c = zero_bound(sysm.n, sysm.d, sysm.q, sysm.nu, h)
        res = full_bound_kernel(s.stream, h, c + 1)
        indep = res.basis.dimension == 0
        data = {"result": "independent" if indep else "kernel", "height": h, "bound": c,
                "columns_used": res.columns_used, "kernel_dimension": res.basis.dimension}
        _emit(args, data, [f"{data['result']} after {res.columns_used} columns (bound c = {c})"])
        return EXIT_OK
    dec = decide_independence(sysm, s.stream, max_columns=args.max_columns, window=args.window)
    if isinstance(dec, Independent):
        data = {"result": "independent", "columns_used": dec.columns_used}
        lines = [f"independent ({dec.columns_used} columns)"]
        code = EXIT_OK
    elif isinstance(dec, Dependent):
        data = {"result": "dependent", "relation": [str(p) for p in dec.w], "columns_used": dec.columns_used}
        lines = ["dependent: (" + ", ".join(data["relation"]) + ")"]
        code = EXIT_OK
    else:
        data = {"result": "inconclusive", "reason": dec.reason, "columns_used": dec.columns_used}
        lines = [f"inconclusive: {dec.reason}"]
        code = EXIT_INCONCLUSIVE
    _emit(args, data, lines)
    return code


def _report_lines(report) -> list[str]:
    lines = [
        f"alpha = {report.alpha}: {report.point_class.kind} (l* = {report.point_class.l_star}, l = {report.l})",
        f"ker A_l(alpha) = {report.kernel}",
        f"value relations = {report.value_relations}",
    ]
    for i, v in enumerate(report.verdicts):
        lines.append(f"f{i + 1}(alpha): {v}")
    return lines


def _cmd_point(args) -> int:
    from .values import value_relation_basis

    s = load_session(args.source, args.minpoly, args.root_near)
    alpha = parse_field_elem(args.alpha, s.field)
    report = value_relation_basis(s.system, s.stream, alpha, l=args.l, max_columns=args.max_columns)
    _emit(args, _report_json(report), _report_lines(report))
    return EXIT_OK if report.complete else EXIT_INCONCLUSIVE


def _cmd_verdict(args) -> int:
    from .values import Inconclusive, numeric_check, verdict, weighted_verdict

    s = load_session(args.source, args.minpoly, args.root_near)
    alpha = parse_field_elem(args.alpha, s.field)
    if args.weights:
        weights = [parse_field_elem(w, s.field) for w in args.weights.split(",")]
        wv = weighted_verdict(s.system, s.stream, alpha, weights, max_columns=args.max_columns)
        data = {"alpha": str(alpha), "weights": _vec(weights), "verdict": _verdict_json(0, wv.verdict)}
        data["verdict"].pop("f")
        if wv.kernel_part is not None:
            data["kernel_part"] = _vec(wv.kernel_part)
            data["functional_part"] = _vec(wv.functional_part)
        _emit(args, data, [f"sum w_i f_i({alpha}): {wv.verdict}"])
        return EXIT_INCONCLUSIVE if isinstance(wv.verdict, Inconclusive) else EXIT_OK
    report = verdict(s.system, s.stream, alpha, max_columns=args.max_columns)
    data = _report_json(report)
    lines = _report_lines(report)
    if args.check:
        rows = numeric_check(report, s.stream, args.check, args.precision)
        data["numeric_check"] = [{"label": r.label, "contains_zero": r.contains_zero, "ok": r.ok} for r in rows]
        lines += [f"  check {r.label}: {'ok' if r.ok else 'MISMATCH'}" for r in rows]
    _emit(args, data, lines)
    return EXIT_INCONCLUSIVE if any(isinstance(v, Inconclusive) for v in report.verdicts) else EXIT_OK


def _cmd_demo(args) -> int:
    from .relations import decide_independence, find_relations
    from .series import AugmentedStream
    from .system import augment_constant, classify_point, dedouble
    from .values import Inconclusive, numeric_check, verdict, weighted_verdict

    s = load_session("demo:" + args.name)
    K = s.field
    phi = K.gen
    dec = decide_independence(s.system, s.stream)
    pc = classify_point(s.system, phi)
    rel = find_relations(augment_constant(s.system), AugmentedStream(s.stream))
    report = verdict(s.system, s.stream, phi)
    rows = numeric_check(report, s.stream, args.terms, 256)
    data = {
        "demo": args.name,
        "field": {"minpoly": "t^2 - t - 1", "root": "t ~ -0.618"},
        "q": s.system.q,
        "matrix": s.system.pretty(),
        "independence": type(dec).__name__.lower(),
        "columns_used": dec.columns_used,
        "point": {"alpha": "t", "class": _class_name(pc), "l_star": pc.l_star},
        "relations_with_constant": rel.to_json(),
        "report": _report_json(report),
        "numeric_check": [{"label": r.label, "ok": r.ok} for r in rows],
    }
    lines = [f"demo {args.name}: q = {s.system.q}, A(z) ="] + _matrix_lines(s.system)
    lines.append(f"independence of the components: {data['independence']} ({dec.columns_used} columns)")
    lines.append(f"alpha = t: {pc.kind}, l* = {pc.l_star}")
    lines.append("relations with the constant 1: " + "; ".join(
        "(" + ", ".join(str(p) for p in g) + ")" for g in rel.generators))
    lines += _report_lines(report)[1:]
    if args.name == "thue3":
        dd = dedouble(s.system)
        data["doubled"] = {"matrix": dd.pretty(), "class": _class_name(classify_point(dd, phi))}
        lines.append("doubled system:")
        lines += _matrix_lines(dd)
        lines.append(f"alpha = t for the doubled system: {classify_point(dd, phi).kind}")
    else:
        wv = weighted_verdict(s.system, s.stream, phi, [1, 1, 1, 1])
        data["weighted_1111"] = _verdict_json(0, wv.verdict)
        lines.append(f"f1 + f2 + f3 + f4 at t: {wv.verdict}")
    lines.append("numeric check: " + ", ".join(f"{r.label} {'ok' if r.ok else 'MISMATCH'}" for r in rows))
    _emit(args, data, lines)
    return EXIT_INCONCLUSIVE if any(isinstance(v, Inconclusive) for v in report.verdicts) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mahlerkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True):
        if source:
            p.add_argument("source", help="JSON automaton or system file, or demo:thue3 / demo:four-state")
            p.add_argument("--minpoly", help="minimal polynomial of the field generator t, e.g. 'z^2 - z - 1'")
            p.add_argument("--root-near", help="complex hint selecting the embedding of t")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--max-columns", type=int, default=10**6)
        p.add_argument("--window", type=int, default=None, help="quiet columns before certification")

    p = sub.add_parser("compile-automaton", help="compile an automaton to its Mahler system")
    common(p)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("expand", help="print series coefficients")
    common(p)
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--component", type=int, default=1)
    p.add_argument("--all", action="store_true", help="print every component")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("bound", help="the zero bound c")
    common(p, source=False)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--nu", type=int, default=0)
    p.add_argument("--height", type=int, required=True)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("relations", help="basis of the linear relations over k(z)")
    common(p)
    p.add_argument("--augment", action="store_true", help="append the constant function 1")
    p.add_argument("--method", choices=["auto", "height", "reduction"], default="auto")
    p.set_defaults(func=_cmd_relations)

    p = sub.add_parser("independence", help="decide linear independence over k(z)")
    common(p)
    p.add_argument("--full-bound", action="store_true", help="scan all columns up to the zero bound")
    p.set_defaults(func=_cmd_independence)

    p = sub.add_parser("point", help="linear relations among the values at alpha")
    common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--l", type=int, default=None)
    p.set_defaults(func=_cmd_point)

    p = sub.add_parser("verdict", help="algebraic or transcendental values at alpha")
    common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--weights", help="comma-separated weights for a single combination")
    p.add_argument("--check", type=int, default=0, metavar="N", help="numeric check with N terms")
    p.add_argument("--precision", type=int, default=256)
    p.set_defaults(func=_cmd_verdict)

    p = sub.add_parser("demo", help="run a built-in example end to end")
    p.add_argument("name", choices=["thue3", "four-state"])
    p.add_argument("--json", action="store_true")
    p.add_argument("--terms", type=int, default=2000, help="terms for the numeric check")
    p.set_defaults(func=_cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    from .series import InconsistentSeed
    from .system import AskMorePrecision, DegenerateSystem, PoleOnOrbit

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (DegenerateSystem, InconsistentSeed, PoleOnOrbit, AskMorePrecision, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

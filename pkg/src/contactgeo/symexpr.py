"""Exact symbolic scalar expressions over a coordinate chart.

Expressions are immutable wrappers around sympy trees restricted to a small
grammar: exact rationals, chart coordinates, +, -, *, /, integer powers and
the functions sin, cos, sinh, cosh, exp, ln, sqrt.  No floating constants are
ever stored; all coefficient algebra stays exact.

Zero testing is two-staged: rational-normal-form simplification first, then
deterministic seeded sampling on the chart's declared sample domain.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import sympy as sp

__all__ = [
    "Chart",
    "Expr",
    "SamplingPlan",
    "ZeroVerdict",
    "SymExprError",
    "ParseError",
    "UnknownIdentifierError",
    "UnknownFunctionError",
    "EvalDomainError",
    "SamplingError",
    "parse",
    "print_expr",
    "differentiate",
    "simplify",
    "eval_at",
    "is_zero",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "exp",
    "ln",
    "sqrt",
]

DEFAULT_SEED = 20240
DEFAULT_SAMPLES = 20
DEFAULT_TOLERANCE = 1e-9

# Sample points where a declared excluded locus is closer to zero than this
# are rejected; keeps denominators well conditioned, not just nonzero.
EXCLUSION_GUARD = 1e-6

_FUNCTIONS: dict[str, Callable] = {
    "sin": sp.sin,
    "cos": sp.cos,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "exp": sp.exp,
    "ln": sp.log,
    "sqrt": sp.sqrt,
}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class SymExprError(Exception):
    """Base class for expression-layer failures."""


class ParseError(SymExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownIdentifierError(ParseError):
    pass


class UnknownFunctionError(ParseError):
    pass


class EvalDomainError(SymExprError):
    """Numeric evaluation hit a singular or out-of-domain subexpression."""

    def __init__(self, message: str, subexpression: str, point: dict):
        super().__init__(f"{message} in {subexpression} at {point}")
        self.subexpression = subexpression
        self.point = point


class SamplingError(SymExprError):
    """The sampler could not find enough admissible points."""


@dataclass(frozen=True)
class SamplingPlan:
    """Sample count, tolerance and seed for numeric zero testing."""

    samples: int = DEFAULT_SAMPLES
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a zero test: symbolic_zero, numeric_zero or nonzero."""

    kind: str
    max_abs: float | None = None
    witness_point: dict | None = None
    witness_value: float | None = None
    samples_used: int = 0

    @property
    def is_zero(self) -> bool:
        return self.kind in ("symbolic_zero", "numeric_zero")

    def describe(self) -> str:
        if self.kind == "symbolic_zero":
            return "symbolic_zero"
        if self.kind == "numeric_zero":
            return f"numeric_zero(max_abs={self.max_abs:.3e}, samples={self.samples_used})"
        return f"nonzero(value={self.witness_value:.6e} at {self.witness_point})"


class Chart:
    """An ordered coordinate system with a sampling box per coordinate.

    `excluded_loci` lists expressions that must stay away from zero at every
    sample point (declared denominators, ln/sqrt arguments and the like).
    """

    def __init__(
        self,
        names: Sequence[str],
        sample_domain: Sequence[tuple[float, float]] | None = None,
        excluded_loci: Sequence["Expr"] = (),
    ):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be distinct")
        for name in names:
            if not _IDENT_RE.fullmatch(name):
                raise ValueError(f"invalid coordinate identifier {name!r}")
            if name in _FUNCTIONS:
                raise ValueError(f"coordinate name {name!r} collides with a function")
        if len(names) < 2:
            raise ValueError("chart needs at least two coordinates")
        if sample_domain is None:
            sample_domain = [(-1.0, 1.0)] * len(names)
        sample_domain = tuple((float(lo), float(hi)) for lo, hi in sample_domain)
        if len(sample_domain) != len(names):
            raise ValueError("sample_domain length must match coordinate count")
        for lo, hi in sample_domain:
            if not lo < hi:
                raise ValueError("sample intervals must be nondegenerate")
        self.names = names
        self.sample_domain = sample_domain
        self.symbols = tuple(sp.Symbol(n, real=True) for n in names)
        self._index = {n: i for i, n in enumerate(names)}
        self.excluded_loci: tuple[Expr, ...] = tuple(excluded_loci)

    @property
    def dim(self) -> int:
        return len(self.names)

    def with_excluded(self, *texts: str) -> "Chart":
        extra = tuple(parse(t, self) for t in texts)
        return Chart(self.names, self.sample_domain, self.excluded_loci + extra)

    def symbol(self, name: str) -> sp.Symbol:
        return self.symbols[self._index[name]]

    def coord(self, name_or_index) -> "Expr":
        if isinstance(name_or_index, int):
            return Expr(self, self.symbols[name_or_index])
        return Expr(self, self.symbol(name_or_index))

    def constant(self, value) -> "Expr":
        return Expr(self, _as_rational(value))

    @property
    def zero(self) -> "Expr":
        return self.constant(0)

    @property
    def one(self) -> "Expr":
        return self.constant(1)

    def point_dict(self, values: Sequence[float]) -> dict:
        if len(values) != self.dim:
            raise ValueError("point has wrong dimension")
        return {n: float(v) for n, v in zip(self.names, values)}

    def sample_points(
        self, plan: SamplingPlan, avoid: Iterable["Expr"] = ()
    ) -> list[dict]:
        """Deterministic admissible sample points: excluded loci (and any extra
        `avoid` expressions) must evaluate safely and away from zero."""
        rng = random.Random(plan.seed)
        guards = list(self.excluded_loci) + list(avoid)
        points: list[dict] = []
        attempts = 0
        max_attempts = max(50 * plan.samples, 200)
        while len(points) < plan.samples and attempts < max_attempts:
            attempts += 1
            pt = {
                n: rng.uniform(lo, hi)
                for n, (lo, hi) in zip(self.names, self.sample_domain)
            }
            ok = True
            for g in guards:
                try:
                    v = eval_at(g, pt)
                except EvalDomainError:
                    ok = False
                    break
                if abs(v) < EXCLUSION_GUARD:
                    ok = False
                    break
            if ok:
                points.append(pt)
        if len(points) < plan.samples:
            raise SamplingError(
                f"only {len(points)} of {plan.samples} sample points admissible "
                f"after {attempts} draws; check excluded_loci and sample_domain"
            )
        return points

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Chart)
            and self.names == other.names
            and self.sample_domain == other.sample_domain
        )

    def __hash__(self) -> int:
        return hash((self.names, self.sample_domain))

    def __repr__(self) -> str:
        return f"Chart{self.names}"


def _as_rational(value) -> sp.Rational:
    if isinstance(value, bool):
        raise TypeError("boolean is not a rational constant")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        frac = Fraction(value)
        return sp.Rational(frac.numerator, frac.denominator)
    if isinstance(value, sp.Rational):
        return value
    if isinstance(value, float):
        raise TypeError("floating constants are not allowed inside Expr")
    raise TypeError(f"cannot build exact constant from {type(value).__name__}")


class Expr:
    """Immutable exact scalar expression bound to a chart."""

    __slots__ = ("chart", "sym")

    def __init__(self, chart: Chart, sym: sp.Expr):
        sym = sp.sympify(sym)
        if sym.has(sp.zoo, sp.oo, -sp.oo, sp.nan):
            raise SymExprError(f"non-finite expression {sym}")
        if sym.has(sp.Float):
            raise SymExprError("floating constants are not allowed inside Expr")
        bad = sym.free_symbols - set(chart.symbols)
        if bad:
            raise SymExprError(f"symbols {bad} do not belong to chart {chart}")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "sym", sym)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("Expr is immutable")

    @classmethod
    def _raw(cls, chart: Chart, sym: sp.Expr) -> "Expr":
        # Arithmetic on validated operands stays inside the chart; skip the
        # per-node validation that dominates deep tensor computations.
        out = object.__new__(cls)
        object.__setattr__(out, "chart", chart)
        object.__setattr__(out, "sym", sym)
        return out

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.chart != self.chart:
                raise SymExprError("expressions belong to different charts")
            return other
        return Expr._raw(self.chart, _as_rational(other))

    def __add__(self, other):
        return Expr._raw(self.chart, self.sym + self._coerce(other).sym)

    __radd__ = __add__

    def __sub__(self, other):
        return Expr._raw(self.chart, self.sym - self._coerce(other).sym)

    def __rsub__(self, other):
        return Expr._raw(self.chart, self._coerce(other).sym - self.sym)

    def __mul__(self, other):
        return Expr._raw(self.chart, self.sym * self._coerce(other).sym)

    __rmul__ = __mul__

    def __truediv__(self, other):
        den = self._coerce(other)
        if den.sym == 0:
            raise SymExprError("division by syntactic zero")
        return Expr._raw(self.chart, self.sym / den.sym)

    def __rtruediv__(self, other):
        if self.sym == 0:
            raise SymExprError("division by syntactic zero")
        return Expr._raw(self.chart, self._coerce(other).sym / self.sym)

    def __neg__(self):
        return Expr._raw(self.chart, -self.sym)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError("only integer powers are allowed")
        if exponent == 0:
            raise SymExprError("integer powers must have nonzero exponent")
        return Expr._raw(self.chart, self.sym ** exponent)

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.chart == other.chart and self.sym == other.sym

    def __hash__(self) -> int:
        return hash((self.chart, self.sym))

    @property
    def is_syntactic_zero(self) -> bool:
        return self.sym == 0

    def __repr__(self) -> str:
        return f"Expr({self.sym})"

    def __str__(self) -> str:
        return print_expr(self)


def sin(e: Expr) -> Expr:
    return Expr(e.chart, sp.sin(e.sym))


def cos(e: Expr) -> Expr:
    return Expr(e.chart, sp.cos(e.sym))


def sinh(e: Expr) -> Expr:
    return Expr(e.chart, sp.sinh(e.sym))


def cosh(e: Expr) -> Expr:
    return Expr(e.chart, sp.cosh(e.sym))


def exp(e: Expr) -> Expr:
    return Expr(e.chart, sp.exp(e.sym))


def ln(e: Expr) -> Expr:
    return Expr(e.chart, sp.log(e.sym))


def sqrt(e: Expr) -> Expr:
    return Expr(e.chart, sp.sqrt(e.sym))


# --------------------------------------------------------------------------
# Parser.  Grammar (EBNF), binary operators left-associative:
#   expr   := term (('+'|'-') term)*
#   term   := unary (('*'|'/') unary)*
#   unary  := '-' unary | factor
#   factor := base ('^' integer)?
#   base   := number | ident | ident '(' expr ')' | '(' expr ')'
# Precedence: ^ binds tighter than unary minus, which binds tighter than */,
# which bind tighter than +-.
# --------------------------------------------------------------------------


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> tuple[str, str, int]:
        save = self.pos
        tok = self.next()
        self.pos = save
        return tok

    def next(self) -> tuple[str, str, int]:
        self._skip_ws()
        if self.pos >= len(self.text):
            return ("end", "", self.pos)
        start = self.pos
        ch = self.text[start]
        if ch.isdigit():
            m = re.match(r"\d+", self.text[start:])
            self.pos = start + m.end()
            return ("number", m.group(0), start)
        if ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(self.text, start)
            self.pos = m.end()
            return ("ident", m.group(0), start)
        if ch in "+-*/^()":
            self.pos = start + 1
            return (ch, ch, start)
        raise ParseError(f"unexpected character {ch!r}", start)


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.lexer = _Lexer(text)
        self.chart = chart

    def parse(self) -> Expr:
        e = self._expr()
        kind, value, pos = self.lexer.next()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", pos)
        return Expr(self.chart, e)

    def _expr(self) -> sp.Expr:
        e = self._term()
        while True:
            kind, _, _ = self.lexer.peek()
            if kind in ("+", "-"):
                self.lexer.next()
                rhs = self._term()
                e = e + rhs if kind == "+" else e - rhs
            else:
                return e

    def _term(self) -> sp.Expr:
        e = self._unary()
        while True:
            kind, _, pos = self.lexer.peek()
            if kind in ("*", "/"):
                self.lexer.next()
                rhs = self._unary()
                if kind == "/":
                    if rhs == 0:
                        raise ParseError("division by zero constant", pos)
                    e = e / rhs
                else:
                    e = e * rhs
            else:
                return e

    def _unary(self) -> sp.Expr:
        kind, _, _ = self.lexer.peek()
        if kind == "-":
            self.lexer.next()
            return -self._unary()
        return self._factor()

    def _factor(self) -> sp.Expr:
        e = self._base()
        kind, _, _ = self.lexer.peek()
        if kind == "^":
            self.lexer.next()
            exponent = self._integer()
            e = e ** exponent
        return e

    def _integer(self) -> int:
        kind, value, pos = self.lexer.next()
        sign = 1
        if kind == "-":
            sign = -1
            kind, value, pos = self.lexer.next()
        if kind != "number":
            raise ParseError("expected integer exponent", pos)
        n = sign * int(value)
        if n == 0:
            raise ParseError("integer powers must have nonzero exponent", pos)
        return n

    def _base(self) -> sp.Expr:
        kind, value, pos = self.lexer.next()
        if kind == "number":
            return sp.Integer(int(value))
        if kind == "(":
            e = self._expr()
            kind, _, pos2 = self.lexer.next()
            if kind != ")":
                raise ParseError("expected ')'", pos2)
            return e
        if kind == "ident":
            nxt, _, _ = self.lexer.peek()
            if nxt == "(":
                if value not in _FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {value!r}", pos)
                self.lexer.next()
                arg = self._expr()
                kind2, _, pos2 = self.lexer.next()
                if kind2 != ")":
                    raise ParseError("expected ')'", pos2)
                return _FUNCTIONS[value](arg)
            if value not in self.chart._index:
                raise UnknownIdentifierError(f"unknown identifier {value!r}", pos)
            return self.chart.symbol(value)
        raise ParseError(f"unexpected token {value!r}", pos)


def parse(text: str, chart: Chart) -> Expr:
    """Parse grammar text into an Expr over `chart`."""
    return _Parser(text, chart).parse()


# --------------------------------------------------------------------------
# Printer: fully parenthesized canonical text, inverse to the parser.
# --------------------------------------------------------------------------

_FUNC_NAMES = {sp.sin: "sin", sp.cos: "cos", sp.sinh: "sinh", sp.cosh: "cosh", sp.exp: "exp", sp.log: "ln"}


def _print_sym(e: sp.Expr) -> str:
    if isinstance(e, sp.Integer):
        if e < 0:
            return f"(-{-e})"
        return str(e)
    if isinstance(e, sp.Rational):
        if e < 0:
            return f"(-({-e.p}/{e.q}))"
        return f"({e.p}/{e.q})"
    if isinstance(e, sp.Symbol):
        return e.name
    if isinstance(e, sp.Add):
        return "(" + " + ".join(_print_sym(a) for a in e.args) + ")"
    if isinstance(e, sp.Mul):
        num_parts: list[str] = []
        den_parts: list[str] = []
        negative = False
        for a in e.args:
            if isinstance(a, sp.Rational) and not isinstance(a, sp.Integer) or isinstance(a, sp.Integer):
                r = a
                if r < 0:
                    negative = not negative
                    r = -r
                if r != 1:
                    if isinstance(r, sp.Integer):
                        num_parts.append(str(r))
                    else:
                        if r.p != 1:
                            num_parts.append(str(r.p))
                        den_parts.append(str(r.q))
                continue
            if isinstance(a, sp.Pow) and a.exp.is_Rational and a.exp < 0:
                den_parts.append(_print_sym(sp.Pow(a.base, -a.exp)))
                continue
            num_parts.append(_print_sym(a))
        if not num_parts:
            num_parts = ["1"]
        body = " * ".join(num_parts)
        for d in den_parts:
            body += f" / {d}"
        text = f"({body})"
        return f"(-{text})" if negative else text
    if isinstance(e, sp.Pow):
        base, expo = e.base, e.exp
        if expo is sp.S.Half:
            return f"sqrt({_print_sym(base)})"
        if expo == -sp.S.Half:
            return f"(1 / sqrt({_print_sym(base)}))"
        if expo.is_Integer:
            if expo > 0:
                return f"({_print_sym(base)}^{expo})"
            return f"(1 / ({_print_sym(base)}^{-expo}))"
        if expo.is_Rational and expo.q == 2:
            p = expo.p
            if p > 0:
                return f"(sqrt({_print_sym(base)})^{p})"
            return f"(1 / (sqrt({_print_sym(base)})^{-p}))"
        raise SymExprError(f"cannot print power with exponent {expo}")
    for cls, name in _FUNC_NAMES.items():
        if isinstance(e, cls):
            return f"{name}({_print_sym(e.args[0])})"
    raise SymExprError(f"cannot print expression node {type(e).__name__}: {e}")


def print_expr(e: Expr) -> str:
    """Canonical fully parenthesized text; parse(print_expr(e)) recovers e."""
    return _print_sym(e.sym)


# --------------------------------------------------------------------------
# Calculus on scalars.
# --------------------------------------------------------------------------


def differentiate(e: Expr, coord) -> Expr:
    """Exact partial derivative with respect to a chart coordinate."""
    if isinstance(coord, Expr):
        sym = coord.sym
    else:
        try:
            sym = e.chart.symbol(coord)
        except KeyError:
            raise SymExprError(f"{coord} is not a coordinate of {e.chart}") from None
    if sym not in e.chart.symbols:
        raise SymExprError(f"{coord} is not a coordinate of {e.chart}")
    return Expr._raw(e.chart, sp.diff(e.sym, sym))


def simplify(e: Expr) -> Expr:
    """Rational normal form: expanded numerator/denominator via cancellation.

    Canonical (two equal rational expressions produce identical trees) on the
    subclass rational in the coordinates and in transcendental atoms; for
    genuinely transcendental identities no canonicity is promised.
    """
    return Expr._raw(e.chart, sp.cancel(e.sym))


def _eval_node(e: sp.Expr, point: dict, chart: Chart, memo: dict) -> float:
    cached = memo.get(e)
    if cached is not None:
        return cached
    if isinstance(e, sp.Symbol):
        val = point[e.name]
    elif isinstance(e, sp.Rational):
        val = e.p / e.q
    elif isinstance(e, sp.Add):
        val = math.fsum(_eval_node(a, point, chart, memo) for a in e.args)
    elif isinstance(e, sp.Mul):
        val = 1.0
        for a in e.args:
            val *= _eval_node(a, point, chart, memo)
    elif isinstance(e, sp.Pow):
        base = _eval_node(e.base, point, chart, memo)
        expo = e.exp
        if expo.is_Integer:
            k = int(expo)
            if k < 0 and base == 0.0:
                raise EvalDomainError("division by zero", str(e), point)
            val = base ** k
        elif expo.is_Rational and expo.q == 2:
            if base < 0:
                raise EvalDomainError("sqrt of negative value", str(e), point)
            p = int(expo.p)
            if p < 0 and base == 0.0:
                raise EvalDomainError("division by zero", str(e), point)
            val = math.sqrt(base) ** p
        else:
            base2 = base
            expo2 = _eval_node(expo, point, chart, memo)
            if base2 <= 0:
                raise EvalDomainError("power of nonpositive base", str(e), point)
            val = base2 ** expo2
    elif isinstance(e, sp.exp):
        try:
            val = math.exp(_eval_node(e.args[0], point, chart, memo))
        except OverflowError:
            raise EvalDomainError("exp overflow", str(e), point) from None
    elif isinstance(e, sp.log):
        arg = _eval_node(e.args[0], point, chart, memo)
        if arg <= 0:
            raise EvalDomainError("ln of nonpositive value", str(e), point)
        val = math.log(arg)
    elif isinstance(e, sp.sin):
        val = math.sin(_eval_node(e.args[0], point, chart, memo))
    elif isinstance(e, sp.cos):
        val = math.cos(_eval_node(e.args[0], point, chart, memo))
    elif isinstance(e, sp.sinh):
        val = math.sinh(_eval_node(e.args[0], point, chart, memo))
    elif isinstance(e, sp.cosh):
        val = math.cosh(_eval_node(e.args[0], point, chart, memo))
    else:
        raise EvalDomainError("unsupported node", str(e), point)
    if math.isnan(val) or math.isinf(val):
        raise EvalDomainError("non-finite value", str(e), point)
    memo[e] = val
    return val


def eval_at(e: Expr, point) -> float:
    """IEEE double evaluation at a chart point (dict or coordinate tuple)."""
    if not isinstance(point, dict):
        point = e.chart.point_dict(point)
    return _eval_node(e.sym, point, e.chart, {})


def is_zero(e: Expr, plan: SamplingPlan | None = None, avoid: Iterable[Expr] = ()) -> ZeroVerdict:
    """Zero test: symbolic first, then |value| <= tolerance at seeded samples."""
    plan = plan or SamplingPlan()
    s = simplify(e)
    if s.sym == 0:
        return ZeroVerdict(kind="symbolic_zero")
    points = e.chart.sample_points(plan, avoid=avoid)
    worst_val = 0.0
    worst_pt = points[0]
    used = 0
    for pt in points:
        try:
            v = eval_at(s, pt)
        except EvalDomainError:
            # Undeclared singular point; fall back to the raw expression once.
            v = eval_at(e, pt)
        used += 1
        if abs(v) > abs(worst_val):
            worst_val = v
            worst_pt = pt
    if abs(worst_val) <= plan.tolerance:
        return ZeroVerdict(kind="numeric_zero", max_abs=abs(worst_val), samples_used=used)
    return ZeroVerdict(
        kind="nonzero",
        max_abs=abs(worst_val),
        witness_point=worst_pt,
        witness_value=worst_val,
        samples_used=used,
    )

"""Symbolic expression trees and the inequality problem language.

An inequality problem is a rectangular domain together with a goal
expression ``g`` and the claim ``g(x) < 0`` for every ``x`` in the domain.
Problems are written in a small ASCII language::

    -1/sqrt(3) <= x <= sqrt(2); -sqrt(pi) <= y <= 1
        |- x^2*y - x*y^4 + y^6 + x^4 - 7 > -7.17995

Every variable needs both bounds, bound expressions must be constant, and
the consequent must be a strict comparison.  ``e > c`` is normalised to
``c - e < 0`` and ``e < c`` to ``e - c < 0``.

Constants are kept exact (as :class:`fractions.Fraction`) until numeric
evaluation; no rounding happens at parse time.  Constant folding is limited
to identity and annihilator rules plus exact constant arithmetic.  In
particular ``x - x`` is deliberately *not* simplified to ``0``: direct
interval evaluation of that expression is a useful worst case and must
survive parsing untouched.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence


class ExprError(ValueError):
    """Malformed expression or problem."""


class ParseError(ExprError):
    """Syntax or semantic error in problem text, with a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


# ---------------------------------------------------------------------------
# Expression nodes
# ---------------------------------------------------------------------------

class Expr:
    """Immutable expression tree node.

    Arithmetic operators build new trees through the folding constructors,
    which makes hand-written expressions (e.g. the benchmark corpus) read
    naturally.
    """

    __slots__ = ()

    def __add__(self, other) -> "Expr":
        return fold_add(self, as_expr(other))

    def __radd__(self, other) -> "Expr":
        return fold_add(as_expr(other), self)

    def __sub__(self, other) -> "Expr":
        return fold_sub(self, as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return fold_sub(as_expr(other), self)

    def __mul__(self, other) -> "Expr":
        return fold_mul(self, as_expr(other))

    def __rmul__(self, other) -> "Expr":
        return fold_mul(as_expr(other), self)

    def __truediv__(self, other) -> "Expr":
        return fold_div(self, as_expr(other))

    def __rtruediv__(self, other) -> "Expr":
        return fold_div(as_expr(other), self)

    def __pow__(self, k: int) -> "Expr":
        return fold_pow(self, k)

    def __neg__(self) -> "Expr":
        return fold_neg(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True, slots=True)
class Var(Expr):
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ExprError(f"variable index must be >= 1, got {self.index}")


@dataclass(frozen=True, slots=True)
class PiConst(Expr):
    pass


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ExprError(f"integer power exponent must be >= 0, got {self.exponent}")


@dataclass(frozen=True, slots=True)
class Sqrt(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Atan(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Acos(Expr):
    arg: Expr


PI = PiConst()

_ZERO = Fraction(0)
_ONE = Fraction(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    raise ExprError(f"cannot coerce {x!r} to an expression")


# ---------------------------------------------------------------------------
# Folding constructors (identity/annihilator rules and exact constant math)
# ---------------------------------------------------------------------------

def _const_val(e: Expr) -> Fraction | None:
    return e.value if isinstance(e, Const) else None


def fold_neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def fold_add(a: Expr, b: Expr) -> Expr:
    va, vb = _const_val(a), _const_val(b)
    if va is not None and vb is not None:
        return Const(va + vb)
    if va == _ZERO:
        return b
    if vb == _ZERO:
        return a
    return Add(a, b)


def fold_sub(a: Expr, b: Expr) -> Expr:
    va, vb = _const_val(a), _const_val(b)
    if va is not None and vb is not None:
        return Const(va - vb)
    if vb == _ZERO:
        return a
    if va == _ZERO:
        return fold_neg(b)
    return Sub(a, b)


def fold_mul(a: Expr, b: Expr) -> Expr:
    va, vb = _const_val(a), _const_val(b)
    if va is not None and vb is not None:
        return Const(va * vb)
    if va == _ZERO or vb == _ZERO:
        return Const(_ZERO)
    if va == _ONE:
        return b
    if vb == _ONE:
        return a
    return Mul(a, b)


def fold_div(a: Expr, b: Expr) -> Expr:
    va, vb = _const_val(a), _const_val(b)
    if vb is not None and vb == _ZERO:
        raise ExprError("division by constant zero")
    if va is not None and vb is not None:
        return Const(va / vb)
    if vb == _ONE:
        return a
    return Div(a, b)


def fold_pow(a: Expr, k: int) -> Expr:
    if k < 0:
        raise ExprError(f"integer power exponent must be >= 0, got {k}")
    if k == 0:
        return Const(_ONE)
    if k == 1:
        return a
    va = _const_val(a)
    if va is not None:
        return Const(va ** k)
    return Pow(a, k)


def sqrt(a) -> Expr:
    return Sqrt(as_expr(a))


def atan(a) -> Expr:
    return Atan(as_expr(a))


def acos(a) -> Expr:
    return Acos(as_expr(a))


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

def _max_var_index(e: Expr) -> int:
    match e:
        case Var(i):
            return i
        case Const() | PiConst():
            return 0
        case Neg(u) | Sqrt(u) | Atan(u) | Acos(u):
            return _max_var_index(u)
        case Pow(u, _):
            return _max_var_index(u)
        case Add(u, v) | Sub(u, v) | Mul(u, v) | Div(u, v):
            return max(_max_var_index(u), _max_var_index(v))
    raise ExprError(f"unknown expression node {e!r}")


@dataclass(frozen=True)
class Problem:
    """An inequality claim: for all x in [a, b], goal(x) < 0."""

    n: int
    bounds: tuple[tuple[Expr, Expr], ...]  # (lower, upper) per variable, constant
    goal: Expr
    var_names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.bounds) != self.n:
            raise ExprError("one (lower, upper) bound pair per variable required")
        names = self.var_names or tuple(f"x{i}" for i in range(1, self.n + 1))
        object.__setattr__(self, "var_names", names)
        if len(names) != self.n:
            raise ExprError("one name per variable required")
        for lo, hi in self.bounds:
            if _max_var_index(lo) or _max_var_index(hi):
                raise ExprError("bound expressions must be constant")
        if _max_var_index(self.goal) > self.n:
            raise ExprError("goal references a variable outside 1..n")


@dataclass(frozen=True)
class PartialTable:
    """First and second symbolic partial derivatives of a goal.

    Only the lower triangle of the Hessian is stored; :meth:`hess` reflects
    it, relying on the symmetry of second-order mixed partials.
    """

    gradient: tuple[Expr, ...]
    hessian: tuple[tuple[Expr, ...], ...]  # row i (1-based) has i entries

    def hess(self, i: int, j: int) -> Expr:
        if j > i:
            i, j = j, i
        return self.hessian[i - 1][j - 1]


def differentiate(e: Expr, i: int) -> Expr:
    """Partial derivative of ``e`` with respect to variable ``i`` (1-based).

    Results are lightly folded (``0*e -> 0``, ``e+0 -> e``, ``e*1 -> e`` and
    exact constant arithmetic); no deeper simplification is attempted.
    """
    if i < 1:
        raise ExprError(f"variable index must be >= 1, got {i}")
    match e:
        case Const() | PiConst():
            return Const(_ZERO)
        case Var(j):
            return Const(_ONE if j == i else _ZERO)
        case Neg(u):
            return fold_neg(differentiate(u, i))
        case Add(u, v):
            return fold_add(differentiate(u, i), differentiate(v, i))
        case Sub(u, v):
            return fold_sub(differentiate(u, i), differentiate(v, i))
        case Mul(u, v):
            return fold_add(
                fold_mul(differentiate(u, i), v),
                fold_mul(u, differentiate(v, i)),
            )
        case Div(u, v):
            num = fold_sub(
                fold_mul(differentiate(u, i), v),
                fold_mul(u, differentiate(v, i)),
            )
            return fold_div(num, fold_pow(v, 2))
        case Pow(u, k):
            # k >= 0; fold_pow already collapsed k in {0, 1}
            inner = fold_mul(fold_mul(Const(Fraction(k)), fold_pow(u, k - 1)),
                             differentiate(u, i))
            return inner
        case Sqrt(u):
            return fold_div(differentiate(u, i),
                            fold_mul(Const(Fraction(2)), Sqrt(u)))
        case Atan(u):
            return fold_div(differentiate(u, i),
                            fold_add(Const(_ONE), fold_pow(u, 2)))
        case Acos(u):
            num = fold_neg(differentiate(u, i))
            return fold_div(num, Sqrt(fold_sub(Const(_ONE), fold_pow(u, 2))))
    raise ExprError(f"unknown expression node {e!r}")


def partials(p: Problem) -> PartialTable:
    grad = tuple(differentiate(p.goal, i) for i in range(1, p.n + 1))
    hess = tuple(
        tuple(differentiate(grad[i - 1], j) for j in range(1, i + 1))
        for i in range(1, p.n + 1)
    )
    return PartialTable(grad, hess)


def substitute(e: Expr, mapping: Mapping[int, Expr]) -> Expr:
    """Replace variables by expressions (used e.g. to build f(y^2_1, ...))."""
    match e:
        case Var(i):
            return mapping.get(i, e)
        case Const() | PiConst():
            return e
        case Neg(u):
            return fold_neg(substitute(u, mapping))
        case Add(u, v):
            return fold_add(substitute(u, mapping), substitute(v, mapping))
        case Sub(u, v):
            return fold_sub(substitute(u, mapping), substitute(v, mapping))
        case Mul(u, v):
            return fold_mul(substitute(u, mapping), substitute(v, mapping))
        case Div(u, v):
            return fold_div(substitute(u, mapping), substitute(v, mapping))
        case Pow(u, k):
            return fold_pow(substitute(u, mapping), k)
        case Sqrt(u):
            return Sqrt(substitute(u, mapping))
        case Atan(u):
            return Atan(substitute(u, mapping))
        case Acos(u):
            return Acos(substitute(u, mapping))
    raise ExprError(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# Point evaluation (test oracles and corpus self-checks)
# ---------------------------------------------------------------------------

def eval_fraction(e: Expr, point: Sequence[Fraction]) -> Fraction:
    """Exact evaluation; raises ExprError on sqrt/atan/acos/pi."""
    match e:
        case Const(v):
            return v
        case Var(i):
            return Fraction(point[i - 1])
        case PiConst():
            raise ExprError("pi is not rational")
        case Neg(u):
            return -eval_fraction(u, point)
        case Add(u, v):
            return eval_fraction(u, point) + eval_fraction(v, point)
        case Sub(u, v):
            return eval_fraction(u, point) - eval_fraction(v, point)
        case Mul(u, v):
            return eval_fraction(u, point) * eval_fraction(v, point)
        case Div(u, v):
            den = eval_fraction(v, point)
            if den == 0:
                raise ExprError("division by zero")
            return eval_fraction(u, point) / den
        case Pow(u, k):
            return eval_fraction(u, point) ** k
        case Sqrt(_) | Atan(_) | Acos(_):
            raise ExprError("not a rational operation")
    raise ExprError(f"unknown expression node {e!r}")


def eval_float(e: Expr, point: Sequence[float]) -> float:
    match e:
        case Const(v):
            return float(v)
        case Var(i):
            return float(point[i - 1])
        case PiConst():
            return math.pi
        case Neg(u):
            return -eval_float(u, point)
        case Add(u, v):
            return eval_float(u, point) + eval_float(v, point)
        case Sub(u, v):
            return eval_float(u, point) - eval_float(v, point)
        case Mul(u, v):
            return eval_float(u, point) * eval_float(v, point)
        case Div(u, v):
            return eval_float(u, point) / eval_float(v, point)
        case Pow(u, k):
            return eval_float(u, point) ** k
        case Sqrt(u):
            return math.sqrt(eval_float(u, point))
        case Atan(u):
            return math.atan(eval_float(u, point))
        case Acos(u):
            return math.acos(eval_float(u, point))
    raise ExprError(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_LVL_ADD, _LVL_MUL, _LVL_NEG, _LVL_POW, _LVL_ATOM = 1, 2, 3, 4, 5


def _fmt_fraction(q: Fraction) -> tuple[str, int]:
    """Render a constant; returns (text, precedence level)."""
    if q < 0:
        inner, _ = _fmt_fraction(-q)
        return f"-{inner}", _LVL_NEG
    if q.denominator == 1:
        return str(q.numerator), _LVL_ATOM
    # power-of-ten denominators print as decimals, everything else as p/q
    den = q.denominator
    tens = 0
    while den % 10 == 0:
        den //= 10
        tens += 1
    if den == 1:
        digits = str(q.numerator).rjust(tens + 1, "0")
        return f"{digits[:-tens]}.{digits[-tens:]}", _LVL_ATOM
    return f"{q.numerator}/{q.denominator}", _LVL_MUL


def _fmt(e: Expr, names: Sequence[str]) -> tuple[str, int]:
    def wrap(child: Expr, lvl: int, strict: bool = False) -> str:
        text, child_lvl = _fmt(child, names)
        if child_lvl < lvl or (strict and child_lvl == lvl):
            return f"({text})"
        return text

    match e:
        case Const(v):
            return _fmt_fraction(v)
        case Var(i):
            return names[i - 1], _LVL_ATOM
        case PiConst():
            return "pi", _LVL_ATOM
        case Neg(u):
            return f"-{wrap(u, _LVL_NEG, strict=True)}", _LVL_NEG
        case Add(u, v):
            return f"{wrap(u, _LVL_ADD)} + {wrap(v, _LVL_ADD, strict=True)}", _LVL_ADD
        case Sub(u, v):
            return f"{wrap(u, _LVL_ADD)} - {wrap(v, _LVL_ADD, strict=True)}", _LVL_ADD
        case Mul(u, v):
            return f"{wrap(u, _LVL_MUL)}*{wrap(v, _LVL_MUL, strict=True)}", _LVL_MUL
        case Div(u, v):
            return f"{wrap(u, _LVL_MUL)}/{wrap(v, _LVL_MUL, strict=True)}", _LVL_MUL
        case Pow(u, k):
            return f"{wrap(u, _LVL_POW, strict=True)}^{k}", _LVL_POW
        case Sqrt(u):
            return f"sqrt({_fmt(u, names)[0]})", _LVL_ATOM
        case Atan(u):
            return f"atan({_fmt(u, names)[0]})", _LVL_ATOM
        case Acos(u):
            return f"acos({_fmt(u, names)[0]})", _LVL_ATOM
    raise ExprError(f"unknown expression node {e!r}")


def format_expr(e: Expr, names: Sequence[str] | None = None) -> str:
    if names is None:
        names = [f"x{i}" for i in range(1, _max_var_index(e) + 1)]
    return _fmt(e, names)[0]


def format_problem(p: Problem) -> str:
    """Problem text that reparses to a structurally identical Problem."""
    parts = []
    for name, (lo, hi) in zip(p.var_names, p.bounds):
        parts.append(f"{format_expr(lo, p.var_names)} <= {name} <= "
                     f"{format_expr(hi, p.var_names)}")
    return "; ".join(parts) + " |- " + format_expr(p.goal, p.var_names) + " < 0"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\|-|<=|>=|[<>^*/+\-();])"
)

_FUNCTIONS = {"sqrt": Sqrt, "atan": Atan, "acos": Acos}
_KEYWORDS = {"sqrt", "atan", "acos", "pi", "pow"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup or "op"
        tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.var_index: dict[str, int] = {}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def expect_op(self, op: str, what: str | None = None) -> _Token:
        if self.tok.kind == "op" and self.tok.text == op:
            return self.advance()
        raise ParseError(what or f"expected {op!r}, found {self.tok.text!r}",
                         self.tok.pos)

    # expression grammar, lowest precedence first
    def parse_expr(self, constant: bool) -> Expr:
        e = self.parse_term(constant)
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.parse_term(constant)
            e = fold_add(e, rhs) if op == "+" else fold_sub(e, rhs)
        return e

    def parse_term(self, constant: bool) -> Expr:
        e = self.parse_unary(constant)
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            rhs = self.parse_unary(constant)
            try:
                e = fold_mul(e, rhs) if op == "*" else fold_div(e, rhs)
            except ExprError as exc:
                raise ParseError(str(exc), self.tok.pos) from exc
        return e

    def parse_unary(self, constant: bool) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            pos = self.advance().pos
            return fold_neg(self.parse_unary(constant))
        return self.parse_power(constant)

    def parse_power(self, constant: bool) -> Expr:
        base = self.parse_atom(constant)
        if (self.tok.kind == "op" and self.tok.text == "^") or (
                self.tok.kind == "name" and self.tok.text == "pow"):
            self.advance()
            k = self.parse_exponent()
            base = fold_pow(base, k)
            if (self.tok.kind == "op" and self.tok.text == "^") or (
                    self.tok.kind == "name" and self.tok.text == "pow"):
                raise ParseError("chained powers need parentheses", self.tok.pos)
        return base

    def parse_exponent(self) -> int:
        parens = self.tok.kind == "op" and self.tok.text == "("
        if parens:
            self.advance()
        neg = False
        if self.tok.kind == "op" and self.tok.text == "-":
            neg = True
            self.advance()
        t = self.tok
        if t.kind != "num" or "." in t.text or "e" in t.text or "E" in t.text:
            raise ParseError("power exponent must be an integer literal", t.pos)
        self.advance()
        if neg:
            raise ParseError("integer power exponents must be >= 0", t.pos)
        if parens:
            self.expect_op(")")
        return int(t.text)

    def parse_atom(self, constant: bool) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(Fraction(Decimal(t.text)))
        if t.kind == "name":
            if t.text == "pi":
                self.advance()
                return PI
            if t.text in _FUNCTIONS:
                self.advance()
                self.expect_op("(")
                arg = self.parse_expr(constant)
                self.expect_op(")")
                return _FUNCTIONS[t.text](arg)
            if t.text == "pow":
                raise ParseError("'pow' is an infix power operator", t.pos)
            if constant:
                raise ParseError("non-constant bound expression: "
                                 f"variable {t.text!r} not allowed here", t.pos)
            if t.text not in self.var_index:
                raise ParseError(f"missing bound for variable {t.text!r}", t.pos)
            self.advance()
            return Var(self.var_index[t.text])
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.parse_expr(constant)
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {t.text!r}", t.pos)

    def parse_bound(self) -> tuple[str, Expr, Expr]:
        lo = self.parse_expr(constant=True)
        self.expect_op("<=")
        t = self.tok
        if t.kind != "name" or t.text in _KEYWORDS:
            raise ParseError("expected a variable name in bound", t.pos)
        self.advance()
        if not (self.tok.kind == "op" and self.tok.text == "<="):
            raise ParseError(f"missing upper bound for variable {t.text!r}",
                             self.tok.pos)
        self.advance()
        hi = self.parse_expr(constant=True)
        return t.text, lo, hi

    def parse_problem(self) -> Problem:
        bounds: list[tuple[Expr, Expr]] = []
        names: list[str] = []
        while True:
            name, lo, hi = self.parse_bound()
            if name in self.var_index:
                raise ParseError(f"duplicate bound for variable {name!r}",
                                 self.tok.pos)
            self.var_index[name] = len(names) + 1
            names.append(name)
            bounds.append((lo, hi))
            if self.tok.kind == "op" and self.tok.text == ";":
                self.advance()
                continue
            break
        self.expect_op("|-", "expected ';' or '|-' after bounds")
        lhs = self.parse_expr(constant=False)
        t = self.tok
        if t.kind == "op" and t.text in ("<=", ">="):
            raise ParseError("non-strict comparator: the inequality must use "
                             "'<' or '>'", t.pos)
        if not (t.kind == "op" and t.text in ("<", ">")):
            raise ParseError("expected '<' or '>' in the consequent", t.pos)
        self.advance()
        rhs = self.parse_expr(constant=False)
        if self.tok.kind != "end":
            raise ParseError(f"trailing input {self.tok.text!r}", self.tok.pos)
        goal = fold_sub(lhs, rhs) if t.text == "<" else fold_sub(rhs, lhs)
        return Problem(n=len(names), bounds=tuple(bounds), goal=goal,
                       var_names=tuple(names))


def parse_problem(text: str) -> Problem:
    """Parse problem text into a Problem with the goal normalised to g < 0."""
    return _Parser(text).parse_problem()


def parse_expr(text: str, names: Sequence[str]) -> Expr:
    """Parse a bare expression over the given variable names (test helper)."""
    p = _Parser(text)
    p.var_index = {name: i + 1 for i, name in enumerate(names)}
    e = p.parse_expr(constant=False)
    if p.tok.kind != "end":
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.pos)
    return e


def iter_nodes(e: Expr) -> Iterator[Expr]:
    """Preorder traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        match node:
            case Neg(u) | Pow(u, _) | Sqrt(u) | Atan(u) | Acos(u):
                stack.append(u)
            case Add(u, v) | Sub(u, v) | Mul(u, v) | Div(u, v):
                stack.append(v)
                stack.append(u)
            case _:
                pass

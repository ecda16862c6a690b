"""Benchmark corpus: four classic polynomial inequalities, a two-variable
polynomial with irrational bounds, and three inequalities over the
six-variable tetrahedron polynomial

    delta(x1..x6) = x1 x4 (-x1 + x2 + x3 - x4 + x5 + x6)
                  + x2 x5 ( x1 - x2 + x3 + x4 - x5 + x6)
                  + x3 x6 ( x1 + x2 - x3 + x4 + x5 - x6)
                  - x2 x3 x4 - x1 x3 x5 - x1 x2 x6 - x4 x5 x6

and the dihedral-angle functions

    dih_x(x1..x6) = pi/2 - atan(-delta4 / sqrt(4 x1 delta)),  delta4 = d delta / d x4
    dih_y(y1..y6) = dih_x(y1^2, ..., y6^2).

The sqrt in dih_x needs delta > 0; on sub-boxes where the rigorous tier
cannot confirm that, evaluation reports a domain error and the search falls
back to subdivision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import (PI, Const, Expr, Pow, Problem, Var, atan, differentiate,
                   parse_problem, sqrt, substitute)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    problem: Problem
    expected: str  # "verified" or "refuted"
    suggested_depth: int = 50
    note: str = ""


def delta_expr() -> Expr:
    x1, x2, x3, x4, x5, x6 = (Var(i) for i in range(1, 7))
    return (x1 * x4 * (-x1 + x2 + x3 - x4 + x5 + x6)
            + x2 * x5 * (x1 - x2 + x3 + x4 - x5 + x6)
            + x3 * x6 * (x1 + x2 - x3 + x4 + x5 - x6)
            - x2 * x3 * x4 - x1 * x3 * x5 - x1 * x2 * x6 - x4 * x5 * x6)


def delta4_expr() -> Expr:
    return differentiate(delta_expr(), 4)


def dih_x_expr() -> Expr:
    x1 = Var(1)
    delta = delta_expr()
    return PI / 2 - atan(-delta4_expr() / sqrt(4 * x1 * delta))


def dih_y_expr() -> Expr:
    return substitute(dih_x_expr(), {i: Pow(Var(i), 2) for i in range(1, 7)})


def _dec(text: str) -> Const:
    return Const(Fraction(text))


def _box_problem(n: int, lo, hi, goal: Expr, names=None) -> Problem:
    if not isinstance(lo, (list, tuple)):
        lo = [lo] * n
    if not isinstance(hi, (list, tuple)):
        hi = [hi] * n
    bounds = tuple((_dec(str(a)), _dec(str(b))) for a, b in zip(lo, hi))
    return Problem(n=n, bounds=bounds, goal=goal,
                   var_names=tuple(names) if names else ())


def _schwefel() -> Problem:
    x1, x2, x3 = Var(1), Var(2), Var(3)
    f = ((x1 - x2 ** 2) ** 2 + (x2 - Const(Fraction(1))) ** 2
         + (x1 - x3 ** 2) ** 2 + (x3 - Const(Fraction(1))) ** 2)
    # claim: -5.8806e-10 < f, normalised to  -5.8806e-10 - f < 0
    return _box_problem(3, -10, 10, _dec("-5.8806e-10") - f)


def _caprasse() -> Problem:
    x1, x2, x3, x4 = (Var(i) for i in range(1, 5))
    f = (-x1 * x3 ** 3 + 4 * x2 * x3 ** 2 * x4 + 4 * x1 * x3 * x4 ** 2
         + 2 * x2 * x4 ** 3 + 4 * x1 * x3 + 4 * x3 ** 2 - 10 * x2 * x4
         - 10 * x4 ** 2 + 2)
    return _box_problem(4, "-0.5", "0.5", _dec("-3.1801") - f)


def _magnetism() -> Problem:
    x = [Var(i) for i in range(1, 8)]
    f = x[0] ** 2 - x[0]
    for xi in x[1:]:
        f = f + 2 * xi ** 2
    return _box_problem(7, -1, 1, _dec("-0.25001") - f)


def _heart() -> Problem:
    x1, x2, x3, x4, x5, x6, x7, x8 = (Var(i) for i in range(1, 9))
    f = (-x1 * x6 ** 3 + 3 * x1 * x6 * x7 ** 2 - x3 * x7 ** 3
         + 3 * x3 * x7 * x6 ** 2 - x2 * x5 ** 3 + 3 * x2 * x5 * x8 ** 2
         - x4 * x8 ** 3 + 3 * x4 * x8 * x5 ** 2 - _dec("0.9563453"))
    lo = ["-0.1", "0.4", "-0.7", "-0.7", "0.1", "-0.1", "-0.3", "-1.1"]
    hi = ["0.4", "1", "-0.4", "0.4", "0.2", "0.2", "1.1", "-0.3"]
    return _box_problem(8, lo, hi, _dec("-1.7435") - f)


_TWO_VAR_TEXT = ("-1/sqrt(3) <= x <= sqrt(2); -sqrt(pi) <= y <= 1 "
                 "|- x^2*y - x*y^4 + y^6 + x^4 - 7 > -7.17995")


def _flyspeck_4717061266() -> Problem:
    # 4 <= x_i <= 6.3504  =>  delta > 0, normalised to -delta < 0
    return _box_problem(6, 4, "6.3504", Const(Fraction(0)) - delta_expr())


def _flyspeck_7067938795() -> Problem:
    goal = dih_x_expr() - PI / 2 + _dec("0.46")
    lo = ["4", "4", "4", "4", "9.0601", "9.0601"]
    hi = ["6.3504", "6.3504", "6.3504", "4", "10.4976", "10.4976"]
    return _box_problem(6, lo, hi, goal)


def _flyspeck_3318775219() -> Problem:
    y1, y2, y3, y4, y5, y6 = (Var(i) for i in range(1, 7))
    rhs = (dih_y_expr() - _dec("1.629") - _dec("0.763") * (y4 - _dec("2.52"))
           - _dec("0.315") * (y1 - _dec("2.0"))
           + _dec("0.414") * (y2 + y3 + y5 + y6 - _dec("8.0")))
    # claim: 0 < rhs
    return _box_problem(6, 2, "2.52", Const(Fraction(0)) - rhs,
                        names=[f"y{i}" for i in range(1, 7)])


def corpus() -> tuple[CorpusEntry, ...]:
    return (
        CorpusEntry("schwefel", _schwefel(), "verified", suggested_depth=200),
        CorpusEntry("caprasse", _caprasse(), "verified", suggested_depth=120),
        CorpusEntry("magnetism", _magnetism(), "verified", suggested_depth=200),
        CorpusEntry("heart", _heart(), "verified", suggested_depth=200),
        CorpusEntry("two_var_poly", parse_problem(_TWO_VAR_TEXT), "verified",
                    suggested_depth=100),
        CorpusEntry("4717061266", _flyspeck_4717061266(), "verified",
                    suggested_depth=100),
        CorpusEntry("7067938795", _flyspeck_7067938795(), "verified",
                    suggested_depth=200,
                    note="dih_x needs delta > 0 inside the sqrt; slow"),
        CorpusEntry("3318775219", _flyspeck_3318775219(), "verified",
                    suggested_depth=200,
                    note="dih_y benchmark; far outside the fast test budget"),
    )


def corpus_entry(name: str) -> CorpusEntry:
    for entry in corpus():
        if entry.name == name:
            return entry
    raise KeyError(f"no corpus entry named {name!r}")

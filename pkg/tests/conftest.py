"""Shared test helpers: random expression generators and evaluation oracles."""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from boxcert.expr import (Acos, Add, Atan, Const, Div, Expr, Mul, Neg,
                          PiConst, Pow, Problem, Sqrt, Sub, Var, acos, atan,
                          fold_div, fold_mul, fold_pow, sqrt)


def eval_mp(e: Expr, point, prec_dps: int = 50):
    """High-precision pointwise oracle via mpmath."""
    with mpmath.workdps(prec_dps):
        def go(node):
            if isinstance(node, Const):
                return mpmath.mpf(node.value.numerator) / node.value.denominator
            if isinstance(node, Var):
                return point[node.index - 1]
            if isinstance(node, PiConst):
                return mpmath.pi
            if isinstance(node, Neg):
                return -go(node.arg)
            if isinstance(node, Add):
                return go(node.left) + go(node.right)
            if isinstance(node, Sub):
                return go(node.left) - go(node.right)
            if isinstance(node, Mul):
                return go(node.left) * go(node.right)
            if isinstance(node, Div):
                return go(node.left) / go(node.right)
            if isinstance(node, Pow):
                return go(node.base) ** node.exponent
            if isinstance(node, Sqrt):
                return mpmath.sqrt(go(node.arg))
            if isinstance(node, Atan):
                return mpmath.atan(go(node.arg))
            if isinstance(node, Acos):
                return mpmath.acos(go(node.arg))
            raise TypeError(node)

        point = [mpmath.mpf(str(x)) if not isinstance(x, Fraction)
                 else mpmath.mpf(x.numerator) / x.denominator for x in point]
        return go(e)


def eval_numpy(e: Expr, cols: np.ndarray) -> np.ndarray:
    """Vectorised float evaluation; cols has one row per variable."""
    def go(node):
        if isinstance(node, Const):
            return np.full(cols.shape[1], float(node.value))
        if isinstance(node, Var):
            return cols[node.index - 1]
        if isinstance(node, PiConst):
            return np.full(cols.shape[1], np.pi)
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, Add):
            return go(node.left) + go(node.right)
        if isinstance(node, Sub):
            return go(node.left) - go(node.right)
        if isinstance(node, Mul):
            return go(node.left) * go(node.right)
        if isinstance(node, Div):
            return go(node.left) / go(node.right)
        if isinstance(node, Pow):
            return go(node.base) ** node.exponent
        if isinstance(node, Sqrt):
            return np.sqrt(go(node.arg))
        if isinstance(node, Atan):
            return np.arctan(go(node.arg))
        if isinstance(node, Acos):
            return np.arccos(go(node.arg))
        raise TypeError(node)

    with np.errstate(all="ignore"):
        return go(e)


def sample_box(rng: random.Random, problem: Problem, count: int) -> np.ndarray:
    """Uniform random points in the problem's box, one row per variable."""
    from boxcert.fast import FastContext
    from boxcert.taylor import problem_domain

    dom = problem_domain(problem, FastContext())
    rs = np.random.default_rng(rng.randrange(2 ** 63))
    rows = [rs.uniform(dom.lo[i], dom.hi[i], size=count)
            if dom.lo[i] < dom.hi[i] else np.full(count, dom.lo[i])
            for i in range(problem.n)]
    return np.asarray(rows)


def random_polynomial(rng: random.Random, n: int, max_terms: int = 5,
                      max_deg: int = 3) -> Expr:
    """Random multivariate polynomial with small rational coefficients."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        coeff = Fraction(rng.randint(-8, 8), rng.randint(1, 4))
        term: Expr = Const(coeff)
        for i in range(1, n + 1):
            d = rng.randint(0, max_deg)
            if d:
                term = fold_mul(term, fold_pow(Var(i), d))
        terms.append(term)
    out = terms[0]
    for t in terms[1:]:
        out = out + t if rng.random() < 0.7 else out - t
    return out


def random_expression(rng: random.Random, n: int,
                      transcendental: bool = True) -> Expr:
    """Random expression that is total on [-1, 1]^n boxes."""
    base = random_polynomial(rng, n)
    if not transcendental:
        return base
    roll = rng.random()
    inner = random_polynomial(rng, n, max_terms=2, max_deg=2)
    if roll < 0.25:
        return base + atan(inner)
    if roll < 0.45:
        # sqrt of something provably positive
        return base + sqrt(Const(Fraction(1)) + fold_pow(inner, 2))
    if roll < 0.60:
        # acos argument confined to (-1, 1)
        safe = fold_div(inner, Const(Fraction(2)) + fold_pow(inner, 2))
        return base + acos(safe)
    if roll < 0.70:
        return base * Const(Fraction(1, 3)) + PiConst() * Var(rng.randint(1, n))
    return base


@pytest.fixture
def rng():
    return random.Random(0xB0C5)

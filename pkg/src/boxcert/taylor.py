"""Taylor intervals: midpoint/width data with value, gradient and Hessian
enclosures, and the second-order bounds derived from them.

For a box D = [a, b] with midpoint y and width vector
w >= max(b - y, y - a), the data is

    f0  - an enclosure of f(y),
    d_i - enclosures of the first partials at y,
    dd  - enclosures of the second partials over ALL of D (lower triangle).

The upper bound is assembled as

    h >= f0.hi + sum_i |d_i| w_i
              + 1/2 sum_i w_i (w_i |dd_ii| + 2 sum_{j<i} w_j |dd_ij|),

with every step rounded up; the lower bound mirrors it downward.  The
functions are generic over the numeric tier: pass a Precision for the
rigorous tier or a context object (e.g. the search's FastContext).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .expr import Expr, PartialTable, Problem
from .numeric import DomainError, PreciseFloat, as_context

PathStep = tuple[str, int]  # ("l" | "r" | "ml" | "mr", coordinate)
Path = tuple[PathStep, ...]


class GeometryError(ValueError):
    """Degenerate split or malformed box."""


@dataclass(frozen=True)
class Domain:
    """Rectangle [lo, hi] plus its rounded midpoint y and covering width w.

    w_i >= max(hi_i - y_i, y_i - lo_i) holds exactly (w is rounded up), so
    the Taylor remainder bound stays valid for every point of the box.
    """

    lo: tuple
    hi: tuple
    y: tuple
    w: tuple

    @property
    def n(self) -> int:
        return len(self.lo)

    def is_degenerate(self, j: int) -> bool:
        return self.lo[j - 1] == self.hi[j - 1]

    def contains(self, other: "Domain") -> bool:
        """Componentwise closed inclusion: other subset of self."""
        return all(self.lo[i] <= other.lo[i] and other.hi[i] <= self.hi[i]
                   for i in range(self.n))

    def __repr__(self) -> str:
        coords = ", ".join(
            f"[{float(l):.6g}, {float(h):.6g}]" for l, h in zip(self.lo, self.hi))
        return f"Domain({coords})"


def make_domain(lo: Sequence, hi: Sequence, num) -> Domain:
    """Build a Domain; y is the rounded midpoint clamped into the box and w
    covers both half-widths from the rounded y."""
    ctx = as_context(num)
    if len(lo) != len(hi):
        raise GeometryError("lo and hi must have the same length")
    ys = []
    ws = []
    for l, h in zip(lo, hi):
        if l > h:
            raise GeometryError(f"empty coordinate range [{l}, {h}]")
        y = ctx.midpoint(l, h)
        w = ctx.s_max(ctx.s_sub_up(h, y), ctx.s_sub_up(y, l))
        ys.append(y)
        ws.append(w)
    return Domain(tuple(lo), tuple(hi), tuple(ys), tuple(ws))


def problem_domain(p: Problem, num) -> Domain:
    """Outward enclosure of the problem's root box at the given tier.

    Bound expressions (which may involve sqrt/pi) are evaluated as
    intervals; the lower ends round down and the upper ends round up, so
    the verified box contains the exact one.
    """
    ctx = as_context(num)
    lo = []
    hi = []
    for a_expr, b_expr in p.bounds:
        a = ctx.eval(a_expr, [])
        b = ctx.eval(b_expr, [])
        lo.append(a.lo)
        hi.append(b.hi)
        if a.lo > b.hi:
            raise GeometryError("lower bound above upper bound")
    return make_domain(lo, hi, ctx)


def widest_coordinate(dom: Domain) -> int | None:
    """1-based index of the widest non-degenerate coordinate (ties go to the
    lowest index); None for a point box."""
    best = None
    best_width = None
    for j in range(dom.n):
        if dom.lo[j] == dom.hi[j]:
            continue
        # exact comparison: both tiers' scalars order exactly
        width = (dom.hi[j], dom.lo[j])
        if best is None or _wider(width, best_width):
            best = j + 1
            best_width = width
    return best


def _wider(a, b) -> bool:
    # compare hi1 - lo1 > hi2 - lo2 without rounding: hi1 + lo2 > hi2 + lo1
    hi1, lo1 = a
    hi2, lo2 = b
    if isinstance(hi1, PreciseFloat):
        return (hi1.to_fraction() + lo2.to_fraction()
                > hi2.to_fraction() + lo1.to_fraction())
    return hi1 + lo2 > hi2 + lo1


def split_box(dom: Domain, j: int, num) -> tuple[Domain, Domain]:
    """Split along coordinate j at the midpoint; both halves share the split
    point exactly, so their union covers the box."""
    ctx = as_context(num)
    if dom.is_degenerate(j):
        raise GeometryError(f"cannot split degenerate coordinate {j}")
    i = j - 1
    m = ctx.split_point(dom.lo[i], dom.hi[i])
    if m == dom.lo[i] or m == dom.hi[i]:
        raise GeometryError(f"coordinate {j} too narrow to split at this precision")
    left_hi = tuple(m if k == i else v for k, v in enumerate(dom.hi))
    right_lo = tuple(m if k == i else v for k, v in enumerate(dom.lo))
    return (make_domain(dom.lo, left_hi, ctx),
            make_domain(right_lo, dom.hi, ctx))


def restrict_box(dom: Domain, j: int, side: str) -> Domain:
    """Collapse coordinate j to its lo or hi face (identity if degenerate)."""
    i = j - 1
    v = dom.lo[i] if side == "lo" else dom.hi[i]
    if dom.lo[i] == dom.hi[i]:
        return dom
    if isinstance(v, PreciseFloat):
        zero = PreciseFloat.zero(v.base)
    else:
        zero = 0.0
    return Domain(
        tuple(v if k == i else x for k, x in enumerate(dom.lo)),
        tuple(v if k == i else x for k, x in enumerate(dom.hi)),
        tuple(v if k == i else x for k, x in enumerate(dom.y)),
        tuple(zero if k == i else x for k, x in enumerate(dom.w)),
    )


def apply_path(root: Domain, path: Sequence[PathStep], num) -> Domain:
    """Derive the sub-box a certificate path addresses.

    "l"/"r" split at the midpoint and keep one half; "ml"/"mr" restrict to
    the lo/hi face (monotonicity and convexity restrictions).
    """
    ctx = as_context(num)
    dom = root
    for label, j in path:
        if label == "l":
            dom = split_box(dom, j, ctx)[0]
        elif label == "r":
            dom = split_box(dom, j, ctx)[1]
        elif label == "ml":
            dom = restrict_box(dom, j, "lo")
        elif label == "mr":
            dom = restrict_box(dom, j, "hi")
        else:
            raise GeometryError(f"unknown path step label {label!r}")
    return dom


# ---------------------------------------------------------------------------
# Taylor intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaylorInterval:
    """f0 and d hold at the midpoint y; dd holds over the entire box."""

    domain: Domain
    f0: object
    d: tuple
    dd: tuple  # lower triangle, row i (1-based) has i entries

    def dd_at(self, i: int, j: int):
        if j > i:
            i, j = j, i
        return self.dd[i - 1][j - 1]


def make_taylor_interval(pt: PartialTable, goal: Expr, dom: Domain,
                         num) -> TaylorInterval:
    """Evaluate f at y, the gradient at y, and the Hessian over the box.

    Raises DomainError (inconclusive) if any evaluation leaves its domain.
    """
    ctx = as_context(num)
    n = dom.n
    point_box = [ctx.point(y) for y in dom.y]
    full_box = [ctx.interval(dom.lo[i], dom.hi[i]) for i in range(n)]
    f0 = ctx.eval(goal, point_box)
    d = tuple(ctx.eval(pt.gradient[i], point_box) for i in range(n))
    dd = tuple(
        tuple(ctx.eval(pt.hessian[i][j], full_box) for j in range(i + 1))
        for i in range(n)
    )
    return TaylorInterval(dom, f0, d, dd)


def _error_term(ti: TaylorInterval, ctx):
    """a >= sum_i |d_i| w_i + 1/2 sum_ij |dd_ij| w_i w_j, rounded up."""
    dom = ti.domain
    n = dom.n
    b = ctx.ZERO
    for i in range(n):
        b = ctx.s_add_up(b, ctx.s_mul_up(dom.w[i], ctx.abs_bound(ti.d[i])))
    e = ctx.ZERO
    for i in range(n):
        inner = ctx.s_mul_up(dom.w[i], ctx.abs_bound(ti.dd[i][i]))
        for j in range(i):
            t = ctx.s_mul_up(dom.w[j], ctx.abs_bound(ti.dd[i][j]))
            inner = ctx.s_add_up(inner, ctx.s_add_up(t, t))
        e = ctx.s_add_up(e, ctx.s_mul_up(dom.w[i], inner))
    return ctx.s_add_up(b, ctx.s_half_up(e))


def taylor_upper_bound(ti: TaylorInterval, num):
    """h with f(x) <= h for every x in the box, every step rounded up."""
    ctx = as_context(num)
    return ctx.s_add_up(ti.f0.hi, _error_term(ti, ctx))


def taylor_lower_bound(ti: TaylorInterval, num):
    """l with l <= f(x) for every x in the box."""
    ctx = as_context(num)
    return ctx.s_sub_down(ti.f0.lo, _error_term(ti, ctx))


def bound_gradient(ti: TaylorInterval, i: int, num):
    """Enclosure of the i-th partial over the whole box:
    d_i + sum_j [-w_j, w_j] * dd_ij, outward rounded."""
    ctx = as_context(num)
    dom = ti.domain
    g = ti.d[i - 1]
    for j in range(1, dom.n + 1):
        w = dom.w[j - 1]
        wj = ctx.interval(ctx.s_neg(w), w)
        g = ctx.add(g, ctx.mul(wj, ti.dd_at(i, j)))
    return g

"""Fast-tier branch-and-bound search for a solution certificate, and the
transformation that eliminates PASSMONO nodes into a reference-linked list.

The search is untrusted: it runs on hardware floats and only proposes a
certificate; the rigorous checker re-derives every bound.  Per box the
order of checks is fixed: direct interval evaluation first, then the Taylor
bound, then monotonicity, then convexity, then a split along the widest
coordinate.  A monotone restriction whose face lies strictly inside the
root domain becomes PASSMONO: the face must be covered by some other
sub-certificate, which the transform resolves into a reference.

Decreasing monotonicity always requires the strict bound f_j < 0.  With a
non-strict test, two neighbouring boxes could each defer to the other
across their shared face and the inequality would never be verified.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .certificates import (CertificateList, FalseNode, GlueNode, MonoNode,
                           MonoStatus, PassMonoNode, PassNode, RefNode,
                           ResultTree, contains_false, contains_pass_mono,
                           iter_tree)
from .expr import Problem, partials
from .fast import FastContext
from .numeric import DomainError, as_context
from .taylor import (Domain, GeometryError, Path, apply_path, bound_gradient,
                     make_taylor_interval, problem_domain, restrict_box,
                     split_box, taylor_lower_bound, taylor_upper_bound,
                     widest_coordinate)


class TransformError(ValueError):
    """A PASSMONO face is not covered by any listed box."""


@dataclass
class SearchParams:
    max_depth: int = 50
    max_nodes: int = 1_000_000
    workers: int = 1
    parallel_depth: int = 2  # spawn workers for glue children above this depth


@dataclass
class SearchStats:
    nodes: int = 0
    passes: int = 0
    direct_passes: int = 0
    monos: int = 0
    pass_monos: int = 0
    convex_glues: int = 0
    splits: int = 0
    refuted: int = 0
    gave_up: int = 0


def classify_tree(tree: ResultTree) -> str:
    """"complete" (no FALSE), "refuted" (a bound showed f >= 0 somewhere) or
    "inconclusive" (the search gave up)."""
    refuted = False
    incomplete = False
    for node in iter_tree(tree):
        if isinstance(node, FalseNode):
            if node.refuted:
                refuted = True
            else:
                incomplete = True
    if refuted:
        return "refuted"
    return "inconclusive" if incomplete else "complete"


class _Searcher:
    def __init__(self, problem: Problem, root: Domain, params: SearchParams,
                 ctx, stats: SearchStats):
        self.problem = problem
        self.root = root
        self.params = params
        self.ctx = ctx
        self.stats = stats
        self.pt = partials(problem)
        self.pool = (ThreadPoolExecutor(max_workers=params.workers)
                     if params.workers > 1 else None)

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()

    def search(self, dom: Domain, depth: int) -> ResultTree:
        ctx = self.ctx
        stats = self.stats
        stats.nodes += 1
        if stats.nodes > self.params.max_nodes:
            stats.gave_up += 1
            return FalseNode(refuted=False)

        direct = None
        try:
            direct = ctx.eval(self.problem.goal, self._full_box(dom))
        except DomainError:
            pass
        if direct is not None:
            if ctx.is_neg(direct.hi):
                stats.passes += 1
                stats.direct_passes += 1
                return PassNode(direct=True)
            if not ctx.is_neg(direct.lo):
                stats.refuted += 1
                return FalseNode(refuted=True)

        ti = None
        try:
            ti = make_taylor_interval(self.pt, self.problem.goal, dom, ctx)
        except DomainError:
            pass
        if ti is not None:
            if ctx.is_neg(taylor_upper_bound(ti, ctx)):
                stats.passes += 1
                return PassNode(direct=False)
            if not ctx.is_neg(taylor_lower_bound(ti, ctx)):
                stats.refuted += 1
                return FalseNode(refuted=True)

        if depth <= 0:
            stats.gave_up += 1
            return FalseNode(refuted=False)

        if ti is not None:
            mono = self._mono_statuses(ti, dom)
            if mono:
                for status in mono:
                    i = status.index - 1
                    face_value = dom.hi[i] if status.increasing else dom.lo[i]
                    root_value = (self.root.hi[i] if status.increasing
                                  else self.root.lo[i])
                    if face_value != root_value:
                        stats.pass_monos += 1
                        return PassMonoNode(status)
                rbox = dom
                for status in mono:
                    rbox = restrict_box(rbox, status.index, status.face)
                stats.monos += 1
                return MonoNode(tuple(mono), self.search(rbox, depth - 1))

            for j in range(1, dom.n + 1):
                if dom.is_degenerate(j):
                    continue
                if not ctx.is_neg(ti.dd_at(j, j).lo):
                    stats.convex_glues += 1
                    left = restrict_box(dom, j, "lo")
                    right = restrict_box(dom, j, "hi")
                    cl, cr = self._branch(left, right, depth)
                    return GlueNode(j, True, cl, cr)

        j = widest_coordinate(dom)
        if j is None:
            stats.gave_up += 1
            return FalseNode(refuted=False)
        try:
            left, right = split_box(dom, j, ctx)
        except GeometryError:
            stats.gave_up += 1
            return FalseNode(refuted=False)
        stats.splits += 1
        cl, cr = self._branch(left, right, depth)
        return GlueNode(j, False, cl, cr)

    def _branch(self, left: Domain, right: Domain,
                depth: int) -> tuple[ResultTree, ResultTree]:
        level = self.params.max_depth - depth
        if self.pool is not None and level < self.params.parallel_depth:
            fut = self.pool.submit(self.search, left, depth - 1)
            cr = self.search(right, depth - 1)
            return fut.result(), cr
        return self.search(left, depth - 1), self.search(right, depth - 1)

    def _mono_statuses(self, ti, dom: Domain) -> list[MonoStatus]:
        ctx = self.ctx
        statuses = []
        for j in range(1, dom.n + 1):
            if dom.is_degenerate(j):
                continue
            g = bound_gradient(ti, j, ctx)
            if not ctx.is_neg(g.lo):
                statuses.append(MonoStatus(j, increasing=True))
            elif ctx.is_neg(g.hi):  # strict: g.hi < 0
                statuses.append(MonoStatus(j, increasing=False))
        return statuses

    def _full_box(self, dom: Domain):
        ctx = self.ctx
        return [ctx.interval(dom.lo[i], dom.hi[i]) for i in range(dom.n)]


def certificate_search(problem: Problem, dom: Domain | None = None,
                       params: SearchParams | None = None, ctx=None,
                       stats: SearchStats | None = None) -> ResultTree:
    """Search a solution certificate for the problem on dom (default: the
    problem's own box) at the fast tier.

    A returned tree without FALSE nodes certifies (untrusted) success; FALSE
    nodes mean refuted or gave up, see :func:`classify_tree`.
    """
    params = params or SearchParams()
    ctx = ctx or FastContext()
    if dom is None:
        dom = problem_domain(problem, ctx)
    if stats is None:
        stats = SearchStats()
    sys.setrecursionlimit(max(sys.getrecursionlimit(),
                              20 * params.max_depth + 1000))
    searcher = _Searcher(problem, dom, params, ctx, stats)
    try:
        return searcher.search(dom, params.max_depth)
    finally:
        searcher.close()


# ---------------------------------------------------------------------------
# certificate transformation
# ---------------------------------------------------------------------------

def _child_paths(node: ResultTree, path: Path) -> list[tuple[Path, ResultTree]]:
    if isinstance(node, MonoNode):
        steps = tuple((s.step_label, s.index) for s in node.statuses)
        return [(path + steps, node.child)]
    if isinstance(node, GlueNode):
        if node.convex:
            return [(path + (("ml", node.coord),), node.left),
                    (path + (("mr", node.coord),), node.right)]
        return [(path + (("l", node.coord),), node.left),
                (path + (("r", node.coord),), node.right)]
    return []


def _float_bounds(dom: Domain) -> tuple[tuple[float, ...], tuple[float, ...]]:
    return (tuple(float(v) for v in dom.lo), tuple(float(v) for v in dom.hi))


def transform_certificate(tree: ResultTree, root: Domain, num,
                          acc: list | None = None) -> CertificateList:
    """Turn a PASSMONO-carrying tree into a reference-linked entry list.

    Iteratively extracts maximal PASSMONO-free subtrees into the list
    (replacing them with references), then resolves each PASSMONO whose
    restricted face lies inside an already-listed box by appending a MONO
    entry that wraps a reference to the first covering box; terminates when
    the residual tree is PASSMONO-free and is appended with the empty path.
    Box geometry is computed at the rigorous tier so coverage decisions
    match the checker's replay exactly.
    """
    if contains_false(tree):
        raise ValueError("cannot transform a certificate containing FALSE")
    ctx = as_context(num)
    entries: list[tuple[Path, ResultTree]] = [] if acc is None else acc
    boxes: list[Domain] = [apply_path(root, p, ctx) for p, _ in entries]
    # cheap float shadows of the listed boxes, widened a hair outward, to
    # prefilter the exact coverage scan
    shadows: list[tuple[tuple[float, ...], tuple[float, ...]]] = [
        _float_bounds(b) for b in boxes]

    def covering_box(face: Domain) -> int | None:
        flo, fhi = _float_bounds(face)
        n = len(flo)
        for k, (slo, shi) in enumerate(shadows):
            plausible = True
            for i in range(n):
                if slo[i] > flo[i] + 1e-9 + 1e-9 * abs(flo[i]) or \
                   shi[i] < fhi[i] - 1e-9 - 1e-9 * abs(fhi[i]):
                    plausible = False
                    break
            if plausible and boxes[k].contains(face):
                return k
        return None

    def pm_flags(node: ResultTree, flags: dict) -> bool:
        if isinstance(node, PassMonoNode):
            flags[id(node)] = True
            return True
        if isinstance(node, MonoNode):
            has = pm_flags(node.child, flags)
        elif isinstance(node, GlueNode):
            has_l = pm_flags(node.left, flags)
            has_r = pm_flags(node.right, flags)
            has = has_l or has_r
        else:
            has = False
        flags[id(node)] = has
        return has

    def extract(node: ResultTree, path: Path, flags: dict) -> ResultTree:
        if not flags[id(node)]:
            if isinstance(node, RefNode):
                return node
            entries.append((path, node))
            box = apply_path(root, path, ctx)
            boxes.append(box)
            shadows.append(_float_bounds(box))
            return RefNode(len(entries) - 1)
        if isinstance(node, MonoNode):
            (cpath, child), = _child_paths(node, path)
            return MonoNode(node.statuses, extract(child, cpath, flags),
                            node.digits)
        if isinstance(node, GlueNode):
            (lpath, left), (rpath, right) = _child_paths(node, path)
            return GlueNode(node.coord, node.convex,
                            extract(left, lpath, flags),
                            extract(right, rpath, flags), node.digits)
        return node  # PassMonoNode

    def resolve(node: ResultTree, path: Path,
                dom: Domain) -> tuple[ResultTree, bool, int]:
        if isinstance(node, PassMonoNode):
            face = restrict_box(dom, node.status.index, node.status.face)
            k = covering_box(face)
            if k is None:
                return node, False, 1
            entries.append((path, MonoNode((node.status,), RefNode(k))))
            boxes.append(dom)
            shadows.append(_float_bounds(dom))
            return RefNode(len(entries) - 1), True, 0
        if isinstance(node, MonoNode):
            (cpath, child), = _child_paths(node, path)
            cdom = dom
            for s in node.statuses:
                cdom = restrict_box(cdom, s.index, s.face)
            new_child, changed, left_pm = resolve(child, cpath, cdom)
            return (MonoNode(node.statuses, new_child, node.digits), changed,
                    left_pm)
        if isinstance(node, GlueNode):
            (lpath, left), (rpath, right) = _child_paths(node, path)
            if node.convex:
                ldom = restrict_box(dom, node.coord, "lo")
                rdom = restrict_box(dom, node.coord, "hi")
            else:
                ldom, rdom = split_box(dom, node.coord, ctx)
            new_left, ch_l, pm_l = resolve(left, lpath, ldom)
            new_right, ch_r, pm_r = resolve(right, rpath, rdom)
            return (GlueNode(node.coord, node.convex, new_left, new_right,
                             node.digits), ch_l or ch_r, pm_l + pm_r)
        return node, False, 0

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))
    current = tree
    remaining = sum(1 for n in iter_tree(tree) if isinstance(n, PassMonoNode))
    while remaining:
        flags: dict = {}
        pm_flags(current, flags)
        before = len(entries)
        current = extract(current, (), flags)
        extracted = len(entries) > before
        current, resolved, remaining = resolve(current, (), root)
        if not extracted and not resolved:
            raise TransformError(
                "a PASSMONO face is not covered by any listed box "
                "(search/transform mismatch)")
    entries.append(((), current))
    return CertificateList(tuple(entries))

"""Rigorous replay of certificate lists.

The checker trusts nothing from the search: every bound, gradient sign and
convexity side-condition is re-derived with the rigorous tier, and a
reference only discharges a box that is contained (componentwise, with
exact endpoint comparison) in the referenced entry's box.  Four rules build
facts:

    pass  - a bound check shows f < 0 on the box (direct interval
            evaluation when the node carries the direct flag, otherwise the
            Taylor bound with direct evaluation as fallback);
    mono  - a verified derivative sign transfers the fact from a face to
            the box (decreasing requires the strict bound f_j < 0);
    glue  - facts on the two halves (or, with a re-verified convexity
            side-condition, on the two faces) combine to the box;
    ref   - a fact on a superset box applies to a subset.

Node annotations (``digits``) choose the precision of the numeric work per
node; box geometry always uses the run precision so every replay derives
identical sub-boxes.  This module never imports the search; replaying a
saved certificate works with the search disabled entirely.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .certificates import (CertificateError, CertificateList, FalseNode,
                           GlueNode, MonoNode, MonoStatus, PassMonoNode,
                           PassNode, RefNode, ResultTree, count_nodes,
                           validate_certificate_list)
from .expr import PartialTable, Problem, partials
from .numeric import (DomainError, Interval, Precision, RigorousContext,
                      as_context)
from .taylor import (Domain, GeometryError, Path, apply_path, bound_gradient,
                     make_taylor_interval, problem_domain, restrict_box,
                     split_box, taylor_upper_bound)


class CheckFailure(Exception):
    """A rule application failed; the certificate is rejected."""

    def __init__(self, reason: str, path: Path = ()):
        super().__init__(reason)
        self.reason = reason
        self.path = path


@dataclass(frozen=True)
class VerifiedFact:
    """For all x in box: goal(x) < 0, established by `rule` at `digits`."""

    box: Domain
    rule: str
    digits: int

    def statement(self, problem: Problem) -> str:
        return f"forall x in {self.box}: goal(x) < 0"


@dataclass(frozen=True)
class NodeAnnotation:
    """Minimal mantissa digits (and direct-evaluation flag) for one node."""

    entry: int
    node: int
    digits: int
    direct: bool = False


@dataclass
class CheckReport:
    entries: int = 0
    nodes: int = 0
    rule_counts: dict = field(default_factory=lambda: {
        "pass": 0, "mono": 0, "glue": 0, "ref": 0})
    max_digits: int = 0
    seconds: float = 0.0
    audit: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "entries": self.entries,
            "nodes": self.nodes,
            "rules": dict(self.rule_counts),
            "max_digits": self.max_digits,
            "check_seconds": self.seconds,
        }


@dataclass
class CheckResult:
    accepted: bool
    fact: VerifiedFact | None
    report: CheckReport
    failed_entry: int | None = None
    failed_path: Path | None = None
    reason: str | None = None


class _Checker:
    """Shared state for one replay: problem, partial table, contexts."""

    def __init__(self, problem: Problem, prec: Precision,
                 audit: bool = False):
        self.problem = problem
        self.prec = prec
        self.geo = RigorousContext(prec)
        self.pt = partials(problem)
        self.report = CheckReport()
        self.collect_audit = audit
        self._ctxs: dict[int, RigorousContext] = {prec.digits: self.geo}

    def ctx_for(self, digits: int | None) -> RigorousContext:
        d = self.prec.digits if digits is None else digits
        ctx = self._ctxs.get(d)
        if ctx is None:
            ctx = RigorousContext(Precision(self.prec.base, d))
            self._ctxs[d] = ctx
        return ctx

    def _record(self, rule: str, box: Domain, digits: int, ok: bool) -> None:
        self.report.nodes += 1
        self.report.rule_counts[rule] = self.report.rule_counts.get(rule, 0) + 1
        self.report.max_digits = max(self.report.max_digits, digits)
        if self.collect_audit:
            self.report.audit.append(
                f"{rule.upper()} {box!r} {digits} {'ok' if ok else 'fail'}")

    def _full_box(self, dom: Domain, ctx: RigorousContext) -> list[Interval]:
        return [ctx.interval(dom.lo[i], dom.hi[i]) for i in range(dom.n)]

    # -- rules ---------------------------------------------------------------

    def pass_rule(self, box: Domain, direct: bool,
                  digits: int | None = None, path: Path = ()) -> VerifiedFact:
        ctx = self.ctx_for(digits)
        ok = False
        try:
            if direct:
                value = ctx.eval(self.problem.goal, self._full_box(box, ctx))
                ok = value.hi.sign < 0
            else:
                try:
                    ti = make_taylor_interval(self.pt, self.problem.goal,
                                              box, ctx)
                    ok = taylor_upper_bound(ti, ctx).sign < 0
                except DomainError:
                    ok = False
                if not ok:
                    value = ctx.eval(self.problem.goal, self._full_box(box, ctx))
                    ok = value.hi.sign < 0
        except DomainError:
            ok = False
        self._record("pass", box, ctx.prec.digits, ok)
        if not ok:
            raise CheckFailure("pass: upper bound not < 0", path)
        return VerifiedFact(box, "pass", ctx.prec.digits)

    def verify_gradient_sign(self, box: Domain, status: MonoStatus,
                             ctx: RigorousContext) -> bool:
        """f_j >= 0 (increasing) or strictly f_j < 0 (decreasing) on box,
        via the Taylor gradient enclosure with direct evaluation fallback."""
        j = status.index
        enclosures = []
        try:
            ti = make_taylor_interval(self.pt, self.problem.goal, box, ctx)
            enclosures.append(bound_gradient(ti, j, ctx))
        except DomainError:
            pass
        try:
            enclosures.append(ctx.eval(self.pt.gradient[j - 1],
                                       self._full_box(box, ctx)))
        except DomainError:
            pass
        for g in enclosures:
            if status.increasing and g.lo.sign >= 0:
                return True
            if not status.increasing and g.hi.sign < 0:
                return True
        return False

    def mono_rule(self, box: Domain, statuses: tuple[MonoStatus, ...],
                  inner: Callable[[Domain], VerifiedFact],
                  digits: int | None = None, path: Path = ()) -> VerifiedFact:
        ctx = self.ctx_for(digits)
        restricted = box
        for status in statuses:
            ok = self.verify_gradient_sign(restricted, status, ctx)
            self._record("mono", restricted, ctx.prec.digits, ok)
            if not ok:
                raise CheckFailure(
                    f"mono: sign of partial {status} not confirmed", path)
            restricted = restrict_box(restricted, status.index, status.face)
        fact = inner(restricted)
        if not fact.box.contains(restricted):
            raise CheckFailure("mono: inner fact does not cover the face", path)
        return VerifiedFact(box, "mono", ctx.prec.digits)

    def glue_rule(self, box: Domain, coord: int, convex: bool,
                  left_fact: VerifiedFact, right_fact: VerifiedFact,
                  digits: int | None = None, path: Path = ()) -> VerifiedFact:
        ctx = self.ctx_for(digits)
        if convex:
            ok = False
            try:
                dd = ctx.eval(self.pt.hess(coord, coord),
                              self._full_box(box, ctx))
                ok = dd.lo.sign >= 0
            except DomainError:
                ok = False
            self._record("glue", box, ctx.prec.digits, ok)
            if not ok:
                raise CheckFailure(
                    f"glue: convexity dd_{coord}{coord} >= 0 not confirmed",
                    path)
            left = restrict_box(box, coord, "lo")
            right = restrict_box(box, coord, "hi")
        else:
            if box.is_degenerate(coord):
                self._record("glue", box, ctx.prec.digits, False)
                raise CheckFailure("glue: split along a degenerate coordinate",
                                   path)
            left, right = split_box(box, coord, self.geo)
            self._record("glue", box, ctx.prec.digits, True)
        if not (left_fact.box.contains(left) and right_fact.box.contains(right)):
            raise CheckFailure("glue: child facts do not tile the box", path)
        return VerifiedFact(box, "glue", ctx.prec.digits)

    # -- tree walking ----------------------------------------------------------

    def verify_tree(self, tree: ResultTree, box: Domain,
                    facts: list[VerifiedFact], path: Path = ()) -> VerifiedFact:
        if isinstance(tree, PassNode):
            return self.pass_rule(box, tree.direct, tree.digits, path)
        if isinstance(tree, MonoNode):
            def inner(face_box: Domain) -> VerifiedFact:
                steps = tuple((s.step_label, s.index) for s in tree.statuses)
                return self.verify_tree(tree.child, face_box, facts,
                                        path + steps)
            return self.mono_rule(box, tree.statuses, inner, tree.digits, path)
        if isinstance(tree, GlueNode):
            labels = ("ml", "mr") if tree.convex else ("l", "r")
            if tree.convex:
                left_box = restrict_box(box, tree.coord, "lo")
                right_box = restrict_box(box, tree.coord, "hi")
            else:
                if box.is_degenerate(tree.coord):
                    raise CheckFailure("glue: split along a degenerate "
                                       "coordinate", path)
                left_box, right_box = split_box(box, tree.coord, self.geo)
            left_fact = self.verify_tree(tree.left, left_box, facts,
                                         path + ((labels[0], tree.coord),))
            right_fact = self.verify_tree(tree.right, right_box, facts,
                                          path + ((labels[1], tree.coord),))
            return self.glue_rule(box, tree.coord, tree.convex, left_fact,
                                  right_fact, tree.digits, path)
        if isinstance(tree, RefNode):
            if not 0 <= tree.target < len(facts):
                raise CheckFailure(f"ref: target {tree.target} not proved yet",
                                   path)
            fact = facts[tree.target]
            ok = fact.box.contains(box)
            self._record("ref", box, self.prec.digits, ok)
            if not ok:
                raise CheckFailure(
                    f"ref: box not contained in entry {tree.target}", path)
            return VerifiedFact(box, "ref", self.prec.digits)
        if isinstance(tree, (PassMonoNode, FalseNode)):
            raise CheckFailure(
                f"malformed certificate: {type(tree).__name__} in a checked "
                "entry", path)
        raise CheckFailure(f"unknown node {tree!r}", path)


# ---------------------------------------------------------------------------
# public rule surface
# ---------------------------------------------------------------------------

def check_pass(problem: Problem, box: Domain, direct: bool,
               prec: Precision) -> VerifiedFact:
    return _Checker(problem, prec).pass_rule(box, direct)


def check_mono(problem: Problem, box: Domain,
               statuses: tuple[MonoStatus, ...],
               inner: Callable[[Domain], VerifiedFact],
               prec: Precision) -> VerifiedFact:
    return _Checker(problem, prec).mono_rule(box, statuses, inner)


def check_glue(problem: Problem, box: Domain, coord: int, convex: bool,
               left_fact: VerifiedFact, right_fact: VerifiedFact,
               prec: Precision) -> VerifiedFact:
    return _Checker(problem, prec).glue_rule(box, coord, convex, left_fact,
                                             right_fact)


def check_list(problem: Problem, certs: CertificateList, prec: Precision,
               audit: bool = False) -> CheckResult:
    """Replay a certificate list in order.

    Accepts iff every entry verifies on the box its path addresses and the
    final entry covers the root box.  Fails fast: the result carries the
    first failing entry index and path.
    """
    checker = _Checker(problem, prec, audit=audit)
    start = time.perf_counter()
    try:
        validate_certificate_list(certs)
    except CertificateError as exc:
        checker.report.seconds = time.perf_counter() - start
        return CheckResult(False, None, checker.report, None, None,
                           f"malformed certificate: {exc}")
    root = problem_domain(problem, checker.geo)
    facts: list[VerifiedFact] = []
    checker.report.entries = len(certs)
    for idx, (path, tree) in enumerate(certs):
        try:
            box = apply_path(root, path, checker.geo)
            fact = checker.verify_tree(tree, box, facts, path)
        except (CheckFailure, DomainError, GeometryError) as exc:
            checker.report.seconds = time.perf_counter() - start
            failed_path = exc.path if isinstance(exc, CheckFailure) else path
            return CheckResult(False, None, checker.report, idx, failed_path,
                               str(exc))
        facts.append(VerifiedFact(box, fact.rule, fact.digits))
    checker.report.seconds = time.perf_counter() - start
    return CheckResult(True, facts[-1], checker.report)


# ---------------------------------------------------------------------------
# adaptive precision annotation
# ---------------------------------------------------------------------------

def annotate_adaptive(problem: Problem, certs: CertificateList,
                      prec_max: Precision) -> tuple[CertificateList,
                                                    list[NodeAnnotation]]:
    """Annotate every node with the smallest digit count (scanned upward
    from 1) at which its rigorous check succeeds, upgrading PASS nodes to
    direct evaluation where that suffices.

    The pre-condition is that the certificate replays at prec_max; nodes
    that fail at every smaller digit count are annotated with prec_max.
    Box geometry is independent of the annotations, so annotated replay
    derives the same boxes as the default replay.
    """
    checker = _Checker(problem, prec_max)
    root = problem_domain(problem, checker.geo)
    annotations: list[NodeAnnotation] = []

    def minimal_digits(test: Callable[[RigorousContext], bool]) -> int:
        for d in range(1, prec_max.digits + 1):
            try:
                if test(checker.ctx_for(d)):
                    return d
            except DomainError:
                continue
        return prec_max.digits

    def annotate_node(tree: ResultTree, box: Domain,
                      entry_idx: int, counter: list[int],
                      boxes: list[Domain]) -> ResultTree:
        node_idx = counter[0]
        counter[0] += 1
        if isinstance(tree, PassNode):
            def direct_ok(ctx):
                value = ctx.eval(problem.goal, checker._full_box(box, ctx))
                return value.hi.sign < 0

            def taylor_ok(ctx):
                ti = make_taylor_interval(checker.pt, problem.goal, box, ctx)
                return taylor_upper_bound(ti, ctx).sign < 0

            # smallest digit count wins; direct evaluation preferred at ties
            digits, direct = prec_max.digits, tree.direct
            for d in range(1, prec_max.digits + 1):
                try:
                    if direct_ok(checker.ctx_for(d)):
                        digits, direct = d, True
                        break
                except DomainError:
                    pass
                try:
                    if taylor_ok(checker.ctx_for(d)):
                        digits, direct = d, False
                        break
                except DomainError:
                    pass
            annotations.append(NodeAnnotation(entry_idx, node_idx, digits,
                                              direct))
            return PassNode(direct=direct, digits=digits)
        if isinstance(tree, MonoNode):
            def mono_ok(ctx):
                b = box
                for status in tree.statuses:
                    if not checker.verify_gradient_sign(b, status, ctx):
                        return False
                    b = restrict_box(b, status.index, status.face)
                return True

            digits = minimal_digits(mono_ok)
            annotations.append(NodeAnnotation(entry_idx, node_idx, digits))
            rbox = box
            for status in tree.statuses:
                rbox = restrict_box(rbox, status.index, status.face)
            child = annotate_node(tree.child, rbox, entry_idx, counter, boxes)
            return MonoNode(tree.statuses, child, digits)
        if isinstance(tree, GlueNode):
            if tree.convex:
                def convex_ok(ctx):
                    dd = ctx.eval(checker.pt.hess(tree.coord, tree.coord),
                                  checker._full_box(box, ctx))
                    return dd.lo.sign >= 0

                digits = minimal_digits(convex_ok)
                left_box = restrict_box(box, tree.coord, "lo")
                right_box = restrict_box(box, tree.coord, "hi")
            else:
                digits = 1
                left_box, right_box = split_box(box, tree.coord, checker.geo)
            annotations.append(NodeAnnotation(entry_idx, node_idx, digits))
            left = annotate_node(tree.left, left_box, entry_idx, counter, boxes)
            right = annotate_node(tree.right, right_box, entry_idx, counter,
                                  boxes)
            return GlueNode(tree.coord, tree.convex, left, right, digits)
        if isinstance(tree, RefNode):
            # subset comparison is exact geometry, independent of digits
            annotations.append(NodeAnnotation(entry_idx, node_idx, 1))
            return RefNode(tree.target, 1)
        return tree

    new_entries = []
    boxes: list[Domain] = []
    for idx, (path, tree) in enumerate(certs):
        box = apply_path(root, path, checker.geo)
        new_tree = annotate_node(tree, box, idx, [0], boxes)
        boxes.append(box)
        new_entries.append((path, new_tree))
    annotated = CertificateList(tuple(new_entries))
    result = check_list(problem, annotated, prec_max)
    if not result.accepted:
        raise CheckFailure("annotated replay failed; certificate does not "
                           f"replay at prec_max: {result.reason}")
    return annotated, annotations

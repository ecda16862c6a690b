"""Solution certificate trees, certificate lists, and their text format.

A certificate records which rule verifies each sub-box: PASS (bound check),
MONO (monotone restriction to a face), GLUE (split halves, or the two faces
when the convex flag is set), PASSMONO (face restriction deferred to another
sub-certificate) and REF (reference to an earlier list entry).  Transformed
certificate lists contain no PASSMONO nodes; every REF points backward and
the last entry covers the root box.

Text format (one list entry per line, ``#`` starts a comment)::

    entry   := path ':' node
    path    := '[]' | step ('.' step)*
    step    := ('l' | 'r' | 'ml' | 'mr') coordinate
    node    := 'FALSE' | 'PASS' | 'PASS*' | 'REF(' k ')'
             | 'MONO[' status (',' status)* '](' node ')'
             | 'PASSMONO(' status ')'
             | 'GLUE(' j ',' ('0'|'1') ')(' node ',' node ')'
    status  := coordinate ('+' | '-')          # increasing / decreasing

Any node except FALSE/PASSMONO may carry an adaptive-precision annotation
``@d`` (mantissa digits) immediately after its tag, e.g. ``PASS*@3`` or
``MONO[1+]@2(PASS@1)``.  Unannotated certificates never contain ``@``, so
golden files stay stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator

from .taylor import Path, PathStep


class CertificateError(ValueError):
    """Malformed certificate text or structure."""


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class MonoStatus:
    """Sign information for one partial derivative on a box.

    ``increasing`` means f_j >= 0 was established; decreasing always means
    the strict bound f_j < 0 (never emitted from an enclosure whose upper
    endpoint reaches zero).
    """

    index: int
    increasing: bool

    @property
    def face(self) -> str:
        # increasing: maximum at the hi face; decreasing: at the lo face
        return "hi" if self.increasing else "lo"

    @property
    def step_label(self) -> str:
        return "mr" if self.increasing else "ml"

    def __str__(self) -> str:
        return f"{self.index}{'+' if self.increasing else '-'}"


class ResultTree:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class FalseNode(ResultTree):
    """Refuted (bound check showed f >= 0) or search gave up (depth/domain)."""

    refuted: bool = False


@dataclass(frozen=True, slots=True)
class PassNode(ResultTree):
    direct: bool = False
    digits: int | None = None


@dataclass(frozen=True, slots=True)
class MonoNode(ResultTree):
    statuses: tuple[MonoStatus, ...]
    child: ResultTree
    digits: int | None = None


@dataclass(frozen=True, slots=True)
class GlueNode(ResultTree):
    coord: int
    convex: bool
    left: ResultTree
    right: ResultTree
    digits: int | None = None


@dataclass(frozen=True, slots=True)
class PassMonoNode(ResultTree):
    status: MonoStatus


@dataclass(frozen=True, slots=True)
class RefNode(ResultTree):
    target: int
    digits: int | None = None


@dataclass(frozen=True)
class CertificateList:
    """Ordered (path, tree) entries; the last entry has the empty path."""

    entries: tuple[tuple[Path, ResultTree], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[Path, ResultTree]]:
        return iter(self.entries)


def iter_tree(tree: ResultTree) -> Iterator[ResultTree]:
    """Preorder traversal."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, MonoNode):
            stack.append(node.child)
        elif isinstance(node, GlueNode):
            stack.append(node.right)
            stack.append(node.left)


def contains_false(tree: ResultTree) -> bool:
    return any(isinstance(n, FalseNode) for n in iter_tree(tree))


def contains_pass_mono(tree: ResultTree) -> bool:
    return any(isinstance(n, PassMonoNode) for n in iter_tree(tree))


def count_nodes(certs: CertificateList) -> int:
    return sum(1 for _, tree in certs for _ in iter_tree(tree))


def map_tree(tree: ResultTree,
             fn: Callable[[ResultTree], ResultTree | None]) -> ResultTree:
    """Rebuild a tree bottom-up; fn may return a replacement node or None."""
    if isinstance(tree, MonoNode):
        rebuilt = MonoNode(tree.statuses, map_tree(tree.child, fn), tree.digits)
    elif isinstance(tree, GlueNode):
        rebuilt = GlueNode(tree.coord, tree.convex, map_tree(tree.left, fn),
                           map_tree(tree.right, fn), tree.digits)
    else:
        rebuilt = tree
    replacement = fn(rebuilt)
    return rebuilt if replacement is None else replacement


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def format_path(path: Path) -> str:
    if not path:
        return "[]"
    return ".".join(f"{label}{coord}" for label, coord in path)


def _fmt_digits(digits: int | None) -> str:
    return "" if digits is None else f"@{digits}"


def format_tree(tree: ResultTree) -> str:
    if isinstance(tree, FalseNode):
        return "FALSE"
    if isinstance(tree, PassNode):
        return ("PASS*" if tree.direct else "PASS") + _fmt_digits(tree.digits)
    if isinstance(tree, MonoNode):
        inner = ",".join(str(s) for s in tree.statuses)
        return (f"MONO[{inner}]{_fmt_digits(tree.digits)}"
                f"({format_tree(tree.child)})")
    if isinstance(tree, GlueNode):
        return (f"GLUE({tree.coord},{int(tree.convex)}){_fmt_digits(tree.digits)}"
                f"({format_tree(tree.left)},{format_tree(tree.right)})")
    if isinstance(tree, PassMonoNode):
        return f"PASSMONO({tree.status})"
    if isinstance(tree, RefNode):
        return f"REF({tree.target}){_fmt_digits(tree.digits)}"
    raise CertificateError(f"unknown node {tree!r}")


def format_certificate_list(certs: CertificateList) -> str:
    lines = ["# boxcert certificate v1"]
    for path, tree in certs:
        lines.append(f"{format_path(path)}: {format_tree(tree)}")
    return "\n".join(lines) + "\n"


_PATH_STEP_RE = re.compile(r"(ml|mr|l|r)(\d+)$")


def parse_path(text: str) -> Path:
    text = text.strip()
    if text == "[]":
        return ()
    steps = []
    for part in text.split("."):
        m = _PATH_STEP_RE.match(part.strip())
        if m is None:
            raise CertificateError(f"bad path step {part!r}")
        steps.append((m.group(1), int(m.group(2))))
    return tuple(steps)


class _TreeParser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, msg: str) -> CertificateError:
        return CertificateError(f"{msg} at column {self.i} in {self.text!r}")

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.peek().isspace():
            self.i += 1

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.i += 1

    def read_int(self) -> int:
        self.skip_ws()
        start = self.i
        if self.peek() == "-":
            self.i += 1
        while self.peek().isdigit():
            self.i += 1
        if self.i == start:
            raise self.error("expected an integer")
        return int(self.text[start:self.i])

    def read_digits_suffix(self) -> int | None:
        if self.peek() == "@":
            self.i += 1
            return self.read_int()
        return None

    def read_status(self) -> MonoStatus:
        idx = self.read_int()
        sign = self.peek()
        if sign not in "+-":
            raise self.error("expected '+' or '-' after a status index")
        self.i += 1
        return MonoStatus(idx, sign == "+")

    def parse_node(self) -> ResultTree:
        self.skip_ws()
        for tag in ("PASSMONO", "PASS*", "PASS", "FALSE", "MONO", "GLUE", "REF"):
            if self.text.startswith(tag, self.i):
                self.i += len(tag)
                return getattr(self, f"_node_{tag.rstrip('*').lower()}")(
                    direct=tag.endswith("*"))
        raise self.error("expected a node tag")

    def _node_false(self, direct: bool) -> ResultTree:
        return FalseNode()

    def _node_pass(self, direct: bool) -> ResultTree:
        return PassNode(direct=direct, digits=self.read_digits_suffix())

    def _node_passmono(self, direct: bool) -> ResultTree:
        self.expect("(")
        status = self.read_status()
        self.expect(")")
        return PassMonoNode(status)

    def _node_mono(self, direct: bool) -> ResultTree:
        self.expect("[")
        statuses = [self.read_status()]
        while self.peek() == ",":
            self.i += 1
            statuses.append(self.read_status())
        self.expect("]")
        digits = self.read_digits_suffix()
        self.expect("(")
        child = self.parse_node()
        self.expect(")")
        return MonoNode(tuple(statuses), child, digits)

    def _node_glue(self, direct: bool) -> ResultTree:
        self.expect("(")
        coord = self.read_int()
        self.expect(",")
        convex = self.read_int()
        if convex not in (0, 1):
            raise self.error("convex flag must be 0 or 1")
        self.expect(")")
        digits = self.read_digits_suffix()
        self.expect("(")
        left = self.parse_node()
        self.expect(",")
        right = self.parse_node()
        self.expect(")")
        return GlueNode(coord, bool(convex), left, right, digits)

    def _node_ref(self, direct: bool) -> ResultTree:
        self.expect("(")
        target = self.read_int()
        self.expect(")")
        return RefNode(target, self.read_digits_suffix())


def parse_tree(text: str) -> ResultTree:
    p = _TreeParser(text.strip())
    node = p.parse_node()
    p.skip_ws()
    if p.i != len(p.text):
        raise p.error("trailing input")
    return node


def parse_certificate_list(text: str) -> CertificateList:
    entries = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise CertificateError(f"missing ':' in entry line {raw!r}")
        path_text, _, tree_text = line.partition(":")
        entries.append((parse_path(path_text), parse_tree(tree_text)))
    if not entries:
        raise CertificateError("empty certificate")
    return CertificateList(tuple(entries))


def validate_certificate_list(certs: CertificateList) -> None:
    """Structural well-formedness: backward refs, final empty path, no FALSE
    or PASSMONO anywhere."""
    if certs.entries[-1][0] != ():
        raise CertificateError("last entry must have the empty path")
    for idx, (path, tree) in enumerate(certs):
        for node in iter_tree(tree):
            if isinstance(node, FalseNode):
                raise CertificateError(f"entry {idx} contains FALSE")
            if isinstance(node, PassMonoNode):
                raise CertificateError(f"entry {idx} contains PASSMONO")
            if isinstance(node, RefNode) and not 0 <= node.target < idx:
                raise CertificateError(
                    f"entry {idx} has non-backward reference {node.target}")

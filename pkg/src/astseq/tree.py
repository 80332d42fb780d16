"""Concrete syntax tree model.

The parser produces trees of :class:`RawNode`. Nodes are either *named*
(they correspond to a grammar rule such as ``identifier`` or
``for_statement``) or *unnamed* (literal tokens such as ``(`` or ``def``,
whose kind is the token text itself). Spans are byte offsets into the
UTF-8 encoding of the source.

Trees are plain frozen dataclasses: immutable after construction and safe
to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class RawNode:
    """One concrete syntax tree node.

    kind: grammar node-type name; for unnamed token nodes this is the
        token text itself.
    named: grammar-level named vs unnamed token.
    start/end: byte offsets into the UTF-8 source.
    text: the source slice covered by [start, end).
    children: ordered child nodes.
    field_name: role of this node under its parent (e.g. "name" for the
        identifier of a function definition), or None.
    """

    kind: str
    named: bool
    start: int
    end: int
    text: str
    children: tuple[RawNode, ...] = ()
    field_name: str | None = field(default=None, compare=False)

    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        """Yield this node and every descendant in preorder."""
        yield self
        for child in self.children:
            yield from child.walk()

    def named_walk(self):
        """Yield named nodes only, in preorder."""
        for node in self.walk():
            if node.named:
                yield node


@dataclass(frozen=True)
class RawTree:
    """A parsed source file: root node, original source, error flag."""

    root: RawNode
    source: str
    has_errors: bool

    def walk(self):
        return self.root.walk()


ERROR_KINDS = frozenset({"ERROR", "MISSING"})


def count_nodes(tree: RawTree | RawNode) -> int:
    """Total node count, root inclusive, named and unnamed alike."""
    root = tree.root if isinstance(tree, RawTree) else tree
    return sum(1 for _ in root.walk())


def contains_errors(root: RawNode) -> bool:
    return any(node.kind in ERROR_KINDS for node in root.walk())


def dump(tree: RawTree | RawNode, indent: str = "  ") -> str:
    """Debug rendering: one node per line, `kind [start..end] 'text'`.

    Long node texts are elided; the dump is for humans, not round-trips.
    """
    root = tree.root if isinstance(tree, RawTree) else tree
    lines: list[str] = []

    def render(node: RawNode, depth: int) -> None:
        text = node.text
        if len(text) > 40:
            text = text[:37] + "..."
        text = text.replace("\n", "\\n")
        lines.append(f"{indent * depth}{node.kind} [{node.start}..{node.end}] {text!r}")
        for child in node.children:
            render(child, depth + 1)

    render(root, 0)
    return "\n".join(lines)


def validate(tree: RawTree) -> None:
    """Check structural invariants; raise ValueError on the first breach.

    Used by tests and the parser's own self-checks: child spans must be
    ordered and non-overlapping, contained in the parent span, and leaf
    texts must equal the source slice at their span.
    """
    source_bytes = tree.source.encode("utf-8")

    def check(node: RawNode) -> None:
        if not (0 <= node.start <= node.end <= len(source_bytes)):
            raise ValueError(f"span out of range on {node.kind}: {node.start}..{node.end}")
        if node.is_leaf():
            actual = source_bytes[node.start : node.end].decode("utf-8")
            if actual != node.text:
                raise ValueError(f"leaf text mismatch on {node.kind}: {node.text!r} != {actual!r}")
        prev_end = node.start
        for child in node.children:
            if child.start < prev_end:
                raise ValueError(f"overlapping/unordered children under {node.kind}")
            if child.end > node.end:
                raise ValueError(f"child {child.kind} escapes parent {node.kind}")
            prev_end = child.end
            check(child)

    if tree.root.start != 0 or tree.root.end != len(source_bytes):
        raise ValueError("root does not cover the whole source span")
    check(tree.root)

"""Linear tree representations: NIT, SBT, preorder, and squeezed code.

NIT wire format (normative):

    record   = id SP label SP "[" [id ("," id)*] "]" [SP value]
    sequence = record ("; " record)*

Records appear in DFS preorder; the id equals the record's 0-based
position, so a parent always precedes its children and every child id
exceeds its parent's. The child list is rendered even when empty ("[]").
Values are optional; they escape "\\" as "\\\\", ";" as "\\;", newline as
"\\n", and carriage return as "\\r", keeping the sequence single-line and
the separator unambiguous. No trailing separator.

SBT renders each node as X = label, or label "_" value with whitespace in
the value replaced by "_". A leaf emits "(X) X"; an internal node emits
"(X" children ")X". Tokens are joined by single spaces, which makes the
whitespace token count exactly twice the node count.

The preorder form is the raw tree's named-node kinds, space-joined; the
code form is the source with all whitespace runs squeezed to single
spaces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

from .augment import AugNode, AugTree, RelabelRuleSet, augment
from .parser import NAMED_KINDS, parse_source
from .tree import ERROR_KINDS, RawTree

NIT = "NIT"
SBT = "SBT"
PREORDER = "PREORDER"
CODE = "CODE"

REPRESENTATION_KINDS = (NIT, SBT, PREORDER, CODE)

#: Pluggable token counters. "whitespace" splits on whitespace runs;
#: "chars" counts every character, a cheap stand-in for subword tokenizers.
TOKENIZERS: dict[str, Callable[[str], list[str]]] = {
    "whitespace": str.split,
    "chars": list,
}


def get_tokenizer(name: str) -> Callable[[str], list[str]]:
    try:
        return TOKENIZERS[name]
    except KeyError:
        raise ValueError(f"unknown tokenizer {name!r}; "
                         f"available: {sorted(TOKENIZERS)}") from None


@dataclass(frozen=True)
class SerializedSequence:
    kind: str
    text: str
    token_count: int


class NitParseError(ValueError):
    """Malformed NIT input; carries the offending record index."""

    def __init__(self, message: str, record_index: int | None = None):
        if record_index is not None:
            message = f"record {record_index}: {message}"
        super().__init__(message)
        self.record_index = record_index


class SbtParseError(ValueError):
    """Malformed SBT input."""


_LABEL_FORBIDDEN = re.compile(r"[\s;\[\]]")
_NIT_ID = r"(?:0|[1-9][0-9]*)"
_NIT_RECORD = re.compile(
    rf"^({_NIT_ID}) (\S+) \[((?:{_NIT_ID}(?:,{_NIT_ID})*)?)\](?: (.*))?$")
_WHITESPACE = re.compile(r"\s")

#: Labels the default grammar can produce, including relabels and
#: whitelist-retained tokens. parse_sbt needs them to split label_value.
DEFAULT_SBT_LABELS = frozenset(NAMED_KINDS | {"function_name", "variable", ":"})


def _sequence(kind: str, text: str, tokenizer: str) -> SerializedSequence:
    return SerializedSequence(kind, text, len(get_tokenizer(tokenizer)(text)))


def _check_label(label: str) -> None:
    if not label or _LABEL_FORBIDDEN.search(label):
        raise ValueError(f"label unfit for serialization: {label!r}")


def _escape_value(value: str) -> str:
    return (value.replace("\\", "\\\\").replace(";", "\\;")
            .replace("\n", "\\n").replace("\r", "\\r"))


def _unescape_value(value: str, record_index: int) -> str:
    out: list[str] = []
    i = 0
    mapping = {"\\": "\\", ";": ";", "n": "\n", "r": "\r"}
    while i < len(value):
        ch = value[i]
        if ch == "\\":
            if i + 1 >= len(value) or value[i + 1] not in mapping:
                raise NitParseError(f"bad escape in value {value!r}", record_index)
            out.append(mapping[value[i + 1]])
            i += 2
        elif ch == ";":
            raise NitParseError(f"unescaped ';' in value {value!r}", record_index)
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def serialize_nit(tree: AugTree, tokenizer: str = "whitespace") -> SerializedSequence:
    """Emit one record per node in DFS preorder, joined by '; '."""
    slots: list[tuple[AugNode, list[int]] | None] = []

    def assign(node: AugNode) -> int:
        index = len(slots)
        slots.append(None)
        child_ids = [assign(child) for child in node.children]
        slots[index] = (node, child_ids)
        return index

    assign(tree.root)
    records = []
    for index, (node, child_ids) in enumerate(slots):
        _check_label(node.label)
        record = f"{index} {node.label} [{','.join(map(str, child_ids))}]"
        if node.value is not None:
            record += " " + _escape_value(node.value)
        records.append(record)
    return _sequence(NIT, "; ".join(records), tokenizer)


def _split_records(text: str) -> list[str]:
    records: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise NitParseError("dangling backslash at end of input",
                                    len(records))
            current.append(text[i:i + 2])
            i += 2
        elif ch == ";":
            if i + 1 < len(text) and text[i + 1] == " ":
                records.append("".join(current))
                current = []
                i += 2
            else:
                raise NitParseError("';' outside a value must be the "
                                    "record separator '; '", len(records))
        else:
            current.append(ch)
            i += 1
    records.append("".join(current))
    return records


def parse_nit(text: str) -> AugTree:
    """Inverse of serialize_nit; accepts exactly the canonical rendering.

    Validates the record grammar, id-equals-position, child ids above the
    parent and strictly increasing, and DFS-preorder contiguity, reporting
    the failing record index.
    """
    if not text:
        raise NitParseError("empty input", 0)
    raw_records = _split_records(text)
    total = len(raw_records)
    labels: list[str] = []
    values: list[str | None] = []
    children: list[list[int]] = []
    for index, raw in enumerate(raw_records):
        match = _NIT_RECORD.match(raw)
        if match is None or "\n" in raw or "\r" in raw:
            raise NitParseError(f"malformed record {raw!r}", index)
        rec_id = int(match.group(1))
        if rec_id != index:
            raise NitParseError(f"id {rec_id} does not match position", index)
        child_ids = [int(p) for p in match.group(3).split(",")] if match.group(3) else []
        previous = rec_id
        for child in child_ids:
            if child <= rec_id:
                raise NitParseError(
                    f"child id {child} does not exceed parent id {rec_id} "
                    f"(cycle or preorder violation)", index)
            if child <= previous:
                raise NitParseError("child ids not strictly increasing", index)
            if child >= total:
                raise NitParseError(f"dangling child id {child}", index)
            previous = child
        labels.append(match.group(2))
        value = match.group(4)
        values.append(None if value is None else _unescape_value(value, index))
        children.append(child_ids)

    # Preorder contiguity: walking from the root must visit 1..n-1 in order.
    cursor = 1

    def check(index: int) -> None:
        nonlocal cursor
        for child in children[index]:
            if child != cursor:
                raise NitParseError(
                    f"child id {child} breaks DFS preorder (expected {cursor})",
                    index)
            cursor += 1
            check(child)

    check(0)
    if cursor != total:
        raise NitParseError(f"record {cursor} is unreachable from the root",
                            cursor)

    def build(index: int) -> AugNode:
        return AugNode(labels[index], values[index],
                       tuple(build(c) for c in children[index]))

    root = build(0)
    return AugTree(root, total, total)


def _sbt_token(node: AugNode) -> str:
    _check_label(node.label)
    if node.value is None:
        return node.label
    return node.label + "_" + _WHITESPACE.sub("_", node.value)


def serialize_sbt(tree: AugTree, tokenizer: str = "whitespace") -> SerializedSequence:
    """Bracket-marker rendering: leaves "(X) X", internals "(X ... )X"."""
    parts: list[str] = []

    def visit(node: AugNode) -> None:
        x = _sbt_token(node)
        if node.children:
            parts.append("(" + x)
            for child in node.children:
                visit(child)
            parts.append(")" + x)
        else:
            parts.append("(" + x + ")")
            parts.append(x)

    visit(tree.root)
    return _sequence(SBT, " ".join(parts), tokenizer)


def _split_sbt_token(x: str, vocabulary: list[str]) -> tuple[str, str | None]:
    if x in vocabulary:
        return x, None
    for label in vocabulary:  # longest first
        if x.startswith(label + "_"):
            return label, x[len(label) + 1:]
    raise SbtParseError(f"token {x!r} does not start with a known label")


def parse_sbt(text: str, labels: Iterable[str] | None = None) -> AugTree:
    """Inverse of serialize_sbt.

    Needs the label vocabulary to split "label_value" tokens; defaults to
    the grammar's kinds plus the built-in relabels. Note the format folds
    whitespace inside values to "_", so values that contained whitespace
    come back in that folded spelling.
    """
    vocabulary = sorted(set(labels) if labels is not None else DEFAULT_SBT_LABELS,
                        key=len, reverse=True)
    tokens = text.split()
    if not tokens:
        raise SbtParseError("empty input")
    pos = 0

    def parse_node() -> AugNode:
        nonlocal pos
        token = tokens[pos]
        if not token.startswith("(") or len(token) < 2:
            raise SbtParseError(f"expected an open marker at token {pos}, "
                                f"found {token!r}")
        if token.endswith(")"):
            x = token[1:-1]
            pos += 1
            if pos >= len(tokens) or tokens[pos] != x:
                found = tokens[pos] if pos < len(tokens) else "<end>"
                raise SbtParseError(f"leaf {x!r} not echoed after its marker "
                                    f"(found {found!r})")
            pos += 1
            label, value = _split_sbt_token(x, vocabulary)
            return AugNode(label, value)
        x = token[1:]
        pos += 1
        children: list[AugNode] = []
        while pos < len(tokens) and tokens[pos].startswith("("):
            children.append(parse_node())
        if pos >= len(tokens):
            raise SbtParseError(f"unbalanced markers: missing ){x}")
        close = tokens[pos]
        if close != ")" + x:
            raise SbtParseError(f"open/close label mismatch: ({x} closed by {close}")
        pos += 1
        label, value = _split_sbt_token(x, vocabulary)
        return AugNode(label, value, tuple(children))

    root = parse_node()
    if pos != len(tokens):
        raise SbtParseError(f"trailing tokens after the root closes: "
                            f"{tokens[pos]!r}")
    total = sum(1 for _ in root.walk())
    return AugTree(root, total, total)


def serialize_preorder(tree: RawTree, tokenizer: str = "whitespace") -> SerializedSequence:
    """Space-joined kinds of the raw tree's named nodes, in preorder."""
    text = " ".join(node.kind for node in tree.root.named_walk())
    return _sequence(PREORDER, text, tokenizer)


def serialize_code(source: str, tokenizer: str = "whitespace") -> SerializedSequence:
    """Source with whitespace runs (newlines included) squeezed to spaces."""
    return _sequence(CODE, " ".join(source.split()), tokenizer)


class SourceParseError(ValueError):
    """Source text failed to parse; carries the error node's byte span."""

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        super().__init__(message)
        self.span = span


def serialize_source(source: str, kind: str,
                     rules: RelabelRuleSet | None = None,
                     tokenizer: str = "whitespace") -> SerializedSequence:
    """Parse and render source under one representation kind.

    Kind is case-insensitive. Tree-based kinds raise
    :class:`SourceParseError` when the source does not parse; the code
    kind never needs a tree.
    """
    kind = kind.upper()
    if kind not in REPRESENTATION_KINDS:
        raise ValueError(f"unknown representation {kind!r}; "
                         f"available: {REPRESENTATION_KINDS}")
    if kind == CODE:
        return serialize_code(source, tokenizer)
    tree = parse_source(source)
    if tree.has_errors:
        span = next((node.start, node.end) for node in tree.walk()
                    if node.kind in ERROR_KINDS)
        raise SourceParseError(
            f"source does not parse; error node spans bytes "
            f"{span[0]}..{span[1]}", span)
    if kind == PREORDER:
        return serialize_preorder(tree, tokenizer)
    tree_aug = augment(tree, rules)
    if kind == NIT:
        return serialize_nit(tree_aug, tokenizer)
    return serialize_sbt(tree_aug, tokenizer)

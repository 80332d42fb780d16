"""Source-to-CST parser for Python.

Produces concrete syntax trees in the named/unnamed node convention of
grammar-driven parsers: named nodes correspond to grammar rules
("function_definition", "identifier"), unnamed nodes are the literal
tokens ("def", "(", ":"). Node kind names follow the conventional Python
grammar vocabulary so trees are comparable across tools.

The implementation drives the stdlib ``ast`` for structure and ``tokenize``
for the concrete token stream, stitching both into one tree. A token
cursor advances strictly left to right; every structural decision is
cross-checked against the expected token, so a drift between the two
views fails loudly instead of producing a skewed tree.

Grammar notes (pinned behavior of GRAMMAR_VERSION):
  - comments, newlines, indentation, and statement-separating semicolons
    are trivia and do not appear in the tree;
  - string literals (including f-strings) are single leaf nodes; adjacent
    literals form a "concatenated_string";
  - case patterns in match statements are flat "case_pattern" nodes whose
    children are the pattern's tokens.
Node counts are properties of this grammar version; outputs embedding
counts should carry the version string.
"""

from __future__ import annotations

import ast
import io
import tokenize
from dataclasses import dataclass, replace

from .tree import RawNode, RawTree, contains_errors

GRAMMAR_NAME = "python"
GRAMMAR_VERSION = "astseq-python-1.0.0"

#: Named node kinds this grammar can emit. Serializers use this as the
#: label vocabulary when splitting label_value tokens back apart.
NAMED_KINDS = frozenset({
    "module", "ERROR",
    "decorated_definition", "decorator",
    "function_definition", "class_definition",
    "parameters", "lambda_parameters",
    "typed_parameter", "default_parameter", "typed_default_parameter",
    "list_splat_pattern", "dictionary_splat_pattern",
    "block", "expression_statement",
    "assignment", "augmented_assignment",
    "return_statement", "delete_statement",
    "expression_list", "pattern_list", "tuple_pattern", "list_pattern",
    "for_statement", "while_statement", "if_statement",
    "elif_clause", "else_clause",
    "try_statement", "except_clause", "finally_clause",
    "with_statement", "with_clause", "with_item",
    "raise_statement", "pass_statement", "break_statement", "continue_statement",
    "import_statement", "import_from_statement",
    "relative_import", "dotted_name", "aliased_import", "wildcard_import",
    "global_statement", "nonlocal_statement", "assert_statement",
    "match_statement", "case_clause", "case_pattern",
    "type",
    "identifier", "integer", "float", "string", "concatenated_string",
    "true", "false", "none", "ellipsis",
    "binary_operator", "unary_operator", "not_operator", "boolean_operator",
    "comparison_operator", "conditional_expression", "lambda", "named_expression",
    "call", "argument_list", "keyword_argument",
    "list_splat", "dictionary_splat",
    "attribute", "subscript", "slice",
    "tuple", "list", "set", "dictionary", "pair",
    "list_comprehension", "set_comprehension", "dictionary_comprehension",
    "generator_expression", "for_in_clause", "if_clause",
    "await", "yield",
    "parenthesized_expression",
})


class GrammarError(RuntimeError):
    """Requested grammar is not installed / not supported."""


class BuildError(Exception):
    """Internal: the token stream disagreed with the expected structure."""


_BIN_OPS = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.MatMult: "@",
    ast.Div: "/", ast.Mod: "%", ast.Pow: "**", ast.LShift: "<<",
    ast.RShift: ">>", ast.BitOr: "|", ast.BitXor: "^", ast.BitAnd: "&",
    ast.FloorDiv: "//",
}
_AUG_OPS = {op: sym + "=" for op, sym in _BIN_OPS.items()}
_UNARY_OPS = {ast.USub: "-", ast.UAdd: "+", ast.Invert: "~"}
_CMP_OPS = {
    ast.Eq: ("==",), ast.NotEq: ("!=",), ast.Lt: ("<",), ast.LtE: ("<=",),
    ast.Gt: (">",), ast.GtE: (">=",), ast.Is: ("is",), ast.IsNot: ("is", "not"),
    ast.In: ("in",), ast.NotIn: ("not", "in"),
}

_TRIVIA_TYPES = frozenset({
    tokenize.COMMENT, tokenize.NL, tokenize.NEWLINE,
    tokenize.INDENT, tokenize.DEDENT, tokenize.ENDMARKER,
})


@dataclass(frozen=True)
class _Tok:
    string: str
    type: int
    start: int  # absolute byte offset
    end: int


def _line_byte_starts(code: str) -> tuple[list[str], list[int]]:
    """Split on \\n only (tokenize's notion of a line) and compute the
    byte offset where each line begins."""
    lines = code.split("\n")
    starts = [0]
    for line in lines[:-1]:
        starts.append(starts[-1] + len(line.encode("utf-8")) + 1)
    return lines, starts


def _lex(code: str) -> list[_Tok]:
    """Token stream with trivia removed and byte spans attached.

    Dropped as trivia: comments, newlines, indentation, end marker, and
    statement-separating semicolons.
    """
    lines, starts = _line_byte_starts(code)

    def to_byte(row: int, col: int) -> int:
        line = lines[row - 1] if row - 1 < len(lines) else ""
        return starts[row - 1] + len(line[:col].encode("utf-8"))

    out: list[_Tok] = []
    for tok in tokenize.generate_tokens(io.StringIO(code).readline):
        if tok.type in _TRIVIA_TYPES:
            continue
        if tok.type == tokenize.ERRORTOKEN:
            raise BuildError(f"cannot tokenize {tok.string!r} at {tok.start}")
        if tok.string == ";":
            continue
        out.append(_Tok(tok.string, tok.type,
                        to_byte(*tok.start), to_byte(*tok.end)))
    return out


class _Builder:
    """One-pass tree builder over (ast module, token stream)."""

    def __init__(self, code: str, tokens: list[_Tok]):
        self.code = code
        self.bytes = code.encode("utf-8")
        self.toks = tokens
        self.i = 0
        _, self.line_starts = _line_byte_starts(code)

    # --- token cursor -------------------------------------------------

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.string == text

    def take(self, expected: str | None = None) -> RawNode:
        tok = self.peek()
        if tok is None:
            raise BuildError(f"unexpected end of input, wanted {expected!r}")
        if expected is not None and tok.string != expected:
            raise BuildError(
                f"expected {expected!r}, found {tok.string!r} at byte {tok.start}")
        self.i += 1
        return RawNode(tok.string, False, tok.start, tok.end, tok.string)

    def take_any(self, options: frozenset[str] | set[str]) -> RawNode:
        tok = self.peek()
        if tok is None or tok.string not in options:
            found = tok.string if tok else "<eof>"
            raise BuildError(f"expected one of {sorted(options)}, found {found!r}")
        return self.take(tok.string)

    def maybe(self, text: str) -> RawNode | None:
        return self.take(text) if self.at(text) else None

    def leaf(self, kind: str, expected: str | None = None,
             token_type: int | None = None, field: str | None = None) -> RawNode:
        tok = self.peek()
        if tok is None:
            raise BuildError(f"unexpected end of input, wanted a {kind}")
        if token_type is not None and tok.type != token_type:
            raise BuildError(
                f"expected a {kind}, found {tok.string!r} at byte {tok.start}")
        if expected is not None and tok.string != expected:
            raise BuildError(
                f"expected {expected!r}, found {tok.string!r} at byte {tok.start}")
        self.i += 1
        return RawNode(kind, True, tok.start, tok.end, tok.string,
                       field_name=field)

    def identifier(self, expected: str | None = None,
                   field: str | None = None) -> RawNode:
        return self.leaf("identifier", expected, tokenize.NAME, field)

    # --- spans ----------------------------------------------------------

    def abs_start(self, node: ast.AST) -> int:
        return self.line_starts[node.lineno - 1] + node.col_offset

    def abs_end(self, node: ast.AST) -> int:
        return self.line_starts[node.end_lineno - 1] + node.end_col_offset

    def node(self, kind: str, children: list[RawNode],
             field: str | None = None) -> RawNode:
        if not children:
            raise BuildError(f"cannot build empty {kind}")
        start, end = children[0].start, children[-1].end
        text = self.bytes[start:end].decode("utf-8")
        return RawNode(kind, True, start, end, text, tuple(children), field)

    def _paren_matches_end(self, end_byte: int) -> bool:
        """True if the "(" at the cursor closes exactly at end_byte."""
        depth = 0
        for tok in self.toks[self.i:]:
            if tok.string in "([{":
                depth += 1
            elif tok.string in ")]}":
                depth -= 1
                if depth == 0:
                    return tok.end == end_byte
        return False

    # --- module / statements -------------------------------------------

    def build_module(self, mod: ast.Module) -> RawNode:
        children = [self.stmt(s) for s in mod.body]
        if self.i != len(self.toks):
            raise BuildError(f"unconsumed tokens from {self.toks[self.i]}")
        return RawNode("module", True, 0, len(self.bytes), self.code,
                       tuple(children))

    def block(self, body: list[ast.stmt]) -> RawNode:
        return self.node("block", [self.stmt(s) for s in body])

    def stmt(self, s: ast.stmt) -> RawNode:
        method = getattr(self, "stmt_" + type(s).__name__, None)
        if method is None:
            raise BuildError(f"unsupported statement {type(s).__name__}")
        return method(s)

    def _decorated(self, s, build) -> RawNode:
        if not s.decorator_list:
            return build(s)
        decorators = []
        for dec in s.decorator_list:
            at = self.take("@")
            decorators.append(self.node("decorator", [at, self.expr(dec)]))
        return self.node("decorated_definition", decorators + [build(s)])

    def stmt_FunctionDef(self, s) -> RawNode:
        return self._decorated(s, self._function_definition)

    def stmt_AsyncFunctionDef(self, s) -> RawNode:
        return self._decorated(s, self._function_definition)

    def _function_definition(self, s) -> RawNode:
        children = []
        if isinstance(s, ast.AsyncFunctionDef):
            children.append(self.take("async"))
        children.append(self.take("def"))
        children.append(self.identifier(s.name, field="name"))
        children.append(self.parameters(s.args))
        if s.returns is not None:
            children.append(self.take("->"))
            children.append(self.node("type", [self.expr(s.returns)],
                                      field="return_type"))
        children.append(self.take(":"))
        children.append(self.block(s.body))
        return self.node("function_definition", children)

    def stmt_ClassDef(self, s) -> RawNode:
        return self._decorated(s, self._class_definition)

    def _class_definition(self, s) -> RawNode:
        children = [self.take("class"), self.identifier(s.name, field="name")]
        if self.at("("):
            children.append(self.argument_list(s.bases, s.keywords,
                                               field="superclasses"))
        children.append(self.take(":"))
        children.append(self.block(s.body))
        return self.node("class_definition", children)

    def parameters(self, args: ast.arguments,
                   kind: str = "parameters") -> RawNode:
        children: list[RawNode] = []
        if kind == "parameters":
            children.append(self.take("("))

        builders = []
        positional = args.posonlyargs + args.args
        defaults: list = [None] * (len(positional) - len(args.defaults))
        defaults += list(args.defaults)
        for arg, default in zip(positional, defaults):
            builders.append(lambda a=arg, d=default: self.parameter(a, d))
        if args.posonlyargs:
            insert_at = len(args.posonlyargs)
            builders.insert(insert_at, lambda: self.take("/"))
        if args.vararg is not None:
            builders.append(lambda: self.splat_parameter("*", args.vararg))
        elif args.kwonlyargs:
            builders.append(lambda: self.take("*"))
        for arg, default in zip(args.kwonlyargs, args.kw_defaults):
            builders.append(lambda a=arg, d=default: self.parameter(a, d))
        if args.kwarg is not None:
            builders.append(lambda: self.splat_parameter("**", args.kwarg))

        for pos, build in enumerate(builders):
            if pos:
                children.append(self.take(","))
            children.append(build())
        if builders and kind == "parameters":
            trailing = self.maybe(",")
            if trailing is not None:
                children.append(trailing)
        if kind == "parameters":
            children.append(self.take(")"))
        return self.node(kind, children)

    def parameter(self, arg: ast.arg, default: ast.expr | None) -> RawNode:
        name = self.identifier(
            arg.arg, field="name" if (arg.annotation or default) else None)
        if arg.annotation is not None and default is not None:
            return self.node("typed_default_parameter", [
                name, self.take(":"),
                self.node("type", [self.expr(arg.annotation)], field="type"),
                self.take("="), self.expr(default)])
        if arg.annotation is not None:
            return self.node("typed_parameter", [
                name, self.take(":"),
                self.node("type", [self.expr(arg.annotation)], field="type")])
        if default is not None:
            return self.node("default_parameter",
                             [name, self.take("="), self.expr(default)])
        return name

    def splat_parameter(self, star: str, arg: ast.arg) -> RawNode:
        kind = "list_splat_pattern" if star == "*" else "dictionary_splat_pattern"
        splat = self.node(kind, [self.take(star), self.identifier(arg.arg)])
        if arg.annotation is not None:
            return self.node("typed_parameter", [
                splat, self.take(":"),
                self.node("type", [self.expr(arg.annotation)], field="type")])
        return splat

    def stmt_Return(self, s) -> RawNode:
        children = [self.take("return")]
        if s.value is not None:
            children.append(self.rhs(s.value))
        return self.node("return_statement", children)

    def stmt_Delete(self, s) -> RawNode:
        children = [self.take("del")]
        if len(s.targets) == 1:
            children.append(self.rhs(s.targets[0]))
        else:
            elems: list[RawNode] = []
            for pos, target in enumerate(s.targets):
                if pos:
                    elems.append(self.take(","))
                elems.append(self.expr(target))
            children.append(self.node("expression_list", elems))
        return self.node("delete_statement", children)

    def stmt_Assign(self, s) -> RawNode:
        return self.node("expression_statement",
                         [self._assign_chain(s.targets, s.value)])

    def _assign_chain(self, targets: list[ast.expr], value: ast.expr) -> RawNode:
        left = replace(self.pattern(targets[0]), field_name="left")
        eq = self.take("=")
        if len(targets) == 1:
            right = self.rhs(value)
        else:
            right = self._assign_chain(targets[1:], value)
        return self.node("assignment", [left, eq, right])

    def stmt_AnnAssign(self, s) -> RawNode:
        children = [replace(self.pattern(s.target), field_name="left"),
                    self.take(":"),
                    self.node("type", [self.expr(s.annotation)], field="type")]
        if s.value is not None:
            children.append(self.take("="))
            children.append(self.rhs(s.value))
        return self.node("expression_statement",
                         [self.node("assignment", children)])

    def stmt_AugAssign(self, s) -> RawNode:
        left = replace(self.pattern(s.target), field_name="left")
        op = self.take_any(frozenset(_AUG_OPS.values()))
        right = self.rhs(s.value)
        return self.node("expression_statement",
                         [self.node("augmented_assignment", [left, op, right])])

    def stmt_Expr(self, s) -> RawNode:
        return self.node("expression_statement", [self.rhs(s.value)])

    def stmt_For(self, s) -> RawNode:
        return self._for(s, is_async=False)

    def stmt_AsyncFor(self, s) -> RawNode:
        return self._for(s, is_async=True)

    def _for(self, s, is_async: bool) -> RawNode:
        children = []
        if is_async:
            children.append(self.take("async"))
        children.append(self.take("for"))
        children.append(replace(self.pattern(s.target), field_name="left"))
        children.append(self.take("in"))
        children.append(replace(self.rhs(s.iter), field_name="right"))
        children.append(self.take(":"))
        children.append(self.block(s.body))
        if s.orelse:
            children.append(self._else_clause(s.orelse))
        return self.node("for_statement", children)

    def stmt_While(self, s) -> RawNode:
        children = [self.take("while"), self.expr(s.test), self.take(":"),
                    self.block(s.body)]
        if s.orelse:
            children.append(self._else_clause(s.orelse))
        return self.node("while_statement", children)

    def _else_clause(self, body: list[ast.stmt]) -> RawNode:
        return self.node("else_clause",
                         [self.take("else"), self.take(":"), self.block(body)])

    def stmt_If(self, s) -> RawNode:
        children = [self.take("if"), self.expr(s.test), self.take(":"),
                    self.block(s.body)]
        current = s
        while current.orelse:
            branch = current.orelse
            if len(branch) == 1 and isinstance(branch[0], ast.If) and self.at("elif"):
                nested = branch[0]
                children.append(self.node("elif_clause", [
                    self.take("elif"), self.expr(nested.test), self.take(":"),
                    self.block(nested.body)]))
                current = nested
            else:
                children.append(self._else_clause(branch))
                break
        return self.node("if_statement", children)

    def stmt_Try(self, s) -> RawNode:
        children = [self.take("try"), self.take(":"), self.block(s.body)]
        for handler in s.handlers:
            part = [self.take("except")]
            if handler.type is not None:
                part.append(self.expr(handler.type))
            if handler.name is not None:
                part.append(self.take("as"))
                part.append(self.identifier(handler.name))
            part.append(self.take(":"))
            part.append(self.block(handler.body))
            children.append(self.node("except_clause", part))
        if s.orelse:
            children.append(self._else_clause(s.orelse))
        if s.finalbody:
            children.append(self.node("finally_clause", [
                self.take("finally"), self.take(":"), self.block(s.finalbody)]))
        return self.node("try_statement", children)

    def stmt_With(self, s) -> RawNode:
        return self._with(s, is_async=False)

    def stmt_AsyncWith(self, s) -> RawNode:
        return self._with(s, is_async=True)

    def _with(self, s, is_async: bool) -> RawNode:
        children = []
        if is_async:
            children.append(self.take("async"))
        children.append(self.take("with"))
        # A leading "(" is ambiguous: item-group parentheses vs. a
        # parenthesized first expression. Try the expression reading first
        # and fall back; the cursor makes the attempt cheap to rewind.
        snapshot = self.i
        try:
            children.append(self._with_clause(s.items, grouped=False))
        except BuildError:
            self.i = snapshot
            children = children[: 2 if is_async else 1]
            children.append(self._with_clause(s.items, grouped=True))
        children.append(self.take(":"))
        children.append(self.block(s.body))
        return self.node("with_statement", children)

    def _with_clause(self, items, grouped: bool) -> RawNode:
        children: list[RawNode] = []
        if grouped:
            children.append(self.take("("))
        for pos, item in enumerate(items):
            if pos:
                children.append(self.take(","))
            part = [replace(self.expr(item.context_expr), field_name="value")]
            if item.optional_vars is not None:
                part.append(self.take("as"))
                part.append(self.pattern(item.optional_vars))
            children.append(self.node("with_item", part))
        if grouped:
            trailing = self.maybe(",")
            if trailing is not None:
                children.append(trailing)
            children.append(self.take(")"))
        return self.node("with_clause", children)

    def stmt_Raise(self, s) -> RawNode:
        children = [self.take("raise")]
        if s.exc is not None:
            children.append(self.expr(s.exc))
        if s.cause is not None:
            children.append(self.take("from"))
            children.append(self.expr(s.cause))
        return self.node("raise_statement", children)

    def stmt_Assert(self, s) -> RawNode:
        children = [self.take("assert"), self.expr(s.test)]
        if s.msg is not None:
            children.append(self.take(","))
            children.append(self.expr(s.msg))
        return self.node("assert_statement", children)

    def stmt_Pass(self, s) -> RawNode:
        return self.node("pass_statement", [self.take("pass")])

    def stmt_Break(self, s) -> RawNode:
        return self.node("break_statement", [self.take("break")])

    def stmt_Continue(self, s) -> RawNode:
        return self.node("continue_statement", [self.take("continue")])

    def stmt_Import(self, s) -> RawNode:
        children = [self.take("import")]
        for pos, alias in enumerate(s.names):
            if pos:
                children.append(self.take(","))
            children.append(self._aliased(alias))
        return self.node("import_statement", children)

    def _dotted_name(self, dotted: str) -> RawNode:
        children: list[RawNode] = []
        for pos, part in enumerate(dotted.split(".")):
            if pos:
                children.append(self.take("."))
            children.append(self.identifier(part))
        return self.node("dotted_name", children)

    def _aliased(self, alias: ast.alias) -> RawNode:
        name = self._dotted_name(alias.name)
        if alias.asname is None:
            return name
        return self.node("aliased_import",
                         [name, self.take("as"), self.identifier(alias.asname)])

    def stmt_ImportFrom(self, s) -> RawNode:
        children = [self.take("from")]
        if s.level:
            dots: list[RawNode] = []
            seen = 0
            while seen < s.level:
                tok = self.take_any({".", "..."})
                seen += len(tok.kind)
                dots.append(tok)
            if s.module is not None:
                dots.append(self._dotted_name(s.module))
            children.append(self.node("relative_import", dots))
        else:
            children.append(self._dotted_name(s.module))
        children.append(self.take("import"))
        if len(s.names) == 1 and s.names[0].name == "*":
            children.append(self.node("wildcard_import", [self.take("*")]))
            return self.node("import_from_statement", children)
        grouped = self.maybe("(")
        if grouped is not None:
            children.append(grouped)
        for pos, alias in enumerate(s.names):
            if pos:
                children.append(self.take(","))
            children.append(self._aliased(alias))
        if grouped is not None:
            trailing = self.maybe(",")
            if trailing is not None:
                children.append(trailing)
            children.append(self.take(")"))
        return self.node("import_from_statement", children)

    def stmt_Global(self, s) -> RawNode:
        return self._name_list_statement("global", s.names, "global_statement")

    def stmt_Nonlocal(self, s) -> RawNode:
        return self._name_list_statement("nonlocal", s.names, "nonlocal_statement")

    def _name_list_statement(self, keyword: str, names: list[str],
                             kind: str) -> RawNode:
        children = [self.take(keyword)]
        for pos, name in enumerate(names):
            if pos:
                children.append(self.take(","))
            children.append(self.identifier(name))
        return self.node(kind, children)

    def stmt_Match(self, s) -> RawNode:
        children = [self.take("match"), self.rhs(s.subject), self.take(":")]
        cases = [self._case_clause(c) for c in s.cases]
        children.append(self.node("block", cases))
        return self.node("match_statement", children)

    def _case_clause(self, case: ast.match_case) -> RawNode:
        children = [self.take("case"), self._case_pattern()]
        if case.guard is not None:
            children.append(self.node("if_clause",
                                      [self.take("if"), self.expr(case.guard)]))
        children.append(self.take(":"))
        children.append(self.block(case.body))
        return self.node("case_clause", children)

    def _case_pattern(self) -> RawNode:
        # Patterns are kept flat: their tokens become direct children,
        # with names/literals as named leaves and the rest unnamed.
        children: list[RawNode] = []
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                raise BuildError("unterminated case pattern")
            if depth == 0 and tok.string in {":", "if"}:
                break
            if tok.string in "([{":
                depth += 1
            elif tok.string in ")]}":
                depth -= 1
            children.append(self._pattern_token())
        if not children:
            raise BuildError("empty case pattern")
        return self.node("case_pattern", children)

    def _pattern_token(self) -> RawNode:
        tok = self.peek()
        if tok.type == tokenize.NAME:
            if tok.string in ("True", "False", "None"):
                kind = {"True": "true", "False": "false", "None": "none"}[tok.string]
                return self.leaf(kind, tok.string)
            if tok.string not in ("as", "and", "or", "not", "in", "is"):
                return self.identifier()
        elif tok.type == tokenize.NUMBER:
            return self._number_leaf()
        elif tok.type == tokenize.STRING:
            return self.leaf("string", token_type=tokenize.STRING)
        return self.take(tok.string)

    # --- expressions ----------------------------------------------------

    def expr(self, e: ast.expr, field: str | None = None) -> RawNode:
        """Build an expression, recovering grouping parentheses that the
        abstract tree does not represent."""
        start = self.abs_start(e)
        opens: list[RawNode] = []
        while self.at("(") and self.peek().start < start:
            opens.append(self.take("("))
        method = getattr(self, "expr_" + type(e).__name__, None)
        if method is None:
            raise BuildError(f"unsupported expression {type(e).__name__}")
        result = method(e)
        for open_paren in reversed(opens):
            close = self.take(")")
            result = self.node("parenthesized_expression",
                               [open_paren, result, close])
        if field is not None:
            result = replace(result, field_name=field)
        return result

    def rhs(self, e: ast.expr) -> RawNode:
        """Expression in a spot where a bare tuple may appear."""
        if isinstance(e, ast.Tuple) and not self._is_parenthesized(e):
            return self._bare_tuple(e, "expression_list")
        return self.expr(e)

    def pattern(self, e: ast.expr) -> RawNode:
        """Assignment/loop-target position."""
        if isinstance(e, ast.Tuple):
            if self._is_parenthesized(e):
                return self._grouped_elements(e, "tuple_pattern", pattern=True)
            return self._bare_tuple(e, "pattern_list", pattern=True)
        if isinstance(e, ast.List):
            return self._grouped_elements(e, "list_pattern", pattern=True,
                                          open_tok="[", close_tok="]")
        if isinstance(e, ast.Starred):
            return self.node("list_splat_pattern",
                             [self.take("*"), self.pattern(e.value)])
        return self.expr(e)

    def _is_parenthesized(self, e: ast.expr) -> bool:
        return (self.at("(") and self.peek().start == self.abs_start(e)
                and self._paren_matches_end(self.abs_end(e)))

    def _element(self, e: ast.expr, pattern: bool) -> RawNode:
        if pattern:
            return self.pattern(e)
        if isinstance(e, ast.Starred):
            return self.node("list_splat", [self.take("*"), self.expr(e.value)])
        return self.expr(e)

    def _bare_tuple(self, e: ast.Tuple, kind: str,
                    pattern: bool = False) -> RawNode:
        children: list[RawNode] = []
        for pos, elt in enumerate(e.elts):
            if pos:
                children.append(self.take(","))
            children.append(self._element(elt, pattern))
        trailing = self.maybe(",")
        if trailing is not None:
            children.append(trailing)
        return self.node(kind, children)

    def _grouped_elements(self, e, kind: str, pattern: bool = False,
                          open_tok: str = "(", close_tok: str = ")") -> RawNode:
        children = [self.take(open_tok)]
        for pos, elt in enumerate(e.elts):
            if pos:
                children.append(self.take(","))
            children.append(self._element(elt, pattern))
        trailing = self.maybe(",")
        if trailing is not None:
            children.append(trailing)
        children.append(self.take(close_tok))
        return self.node(kind, children)

    def expr_Name(self, e) -> RawNode:
        return self.identifier(e.id)

    def expr_Constant(self, e) -> RawNode:
        value = e.value
        if value is True or value is False:
            text = "True" if value is True else "False"
            return self.leaf(text.lower(), text)
        if value is None:
            return self.leaf("none", "None")
        if value is Ellipsis:
            return self.leaf("ellipsis", "...")
        if isinstance(value, (int, float, complex)):
            return self._number_leaf()
        if isinstance(value, (str, bytes)):
            return self._string(e)
        raise BuildError(f"unsupported constant {value!r}")

    def _number_leaf(self) -> RawNode:
        tok = self.peek()
        if tok is None or tok.type != tokenize.NUMBER:
            found = tok.string if tok else "<eof>"
            raise BuildError(f"expected a number, found {found!r}")
        text = tok.string.lower()
        if text.startswith(("0x", "0b", "0o")):
            kind = "integer"
        else:
            mantissa = text.rstrip("j")
            kind = "float" if ("." in mantissa or "e" in mantissa) else "integer"
        return self.leaf(kind, token_type=tokenize.NUMBER)

    def _string(self, e: ast.expr) -> RawNode:
        end = self.abs_end(e)
        parts = [self.leaf("string", token_type=tokenize.STRING)]
        while True:
            tok = self.peek()
            if tok is None or tok.type != tokenize.STRING or tok.start >= end:
                break
            parts.append(self.leaf("string", token_type=tokenize.STRING))
        if len(parts) == 1:
            return parts[0]
        return self.node("concatenated_string", parts)

    def expr_JoinedStr(self, e) -> RawNode:
        return self._string(e)

    def expr_BinOp(self, e) -> RawNode:
        left = self.expr(e.left)
        op = self.take(_BIN_OPS[type(e.op)])
        right = self.expr(e.right)
        return self.node("binary_operator", [left, op, right])

    def expr_UnaryOp(self, e) -> RawNode:
        if isinstance(e.op, ast.Not):
            return self.node("not_operator",
                             [self.take("not"), self.expr(e.operand)])
        op = self.take(_UNARY_OPS[type(e.op)])
        return self.node("unary_operator", [op, self.expr(e.operand)])

    def expr_BoolOp(self, e) -> RawNode:
        word = "and" if isinstance(e.op, ast.And) else "or"
        result = self.expr(e.values[0])
        for value in e.values[1:]:
            op = self.take(word)
            result = self.node("boolean_operator",
                               [result, op, self.expr(value)])
        return result

    def expr_Compare(self, e) -> RawNode:
        children = [self.expr(e.left)]
        for op, comparator in zip(e.ops, e.comparators):
            for part in _CMP_OPS[type(op)]:
                children.append(self.take(part))
            children.append(self.expr(comparator))
        return self.node("comparison_operator", children)

    def expr_IfExp(self, e) -> RawNode:
        return self.node("conditional_expression", [
            self.expr(e.body), self.take("if"), self.expr(e.test),
            self.take("else"), self.expr(e.orelse)])

    def expr_Lambda(self, e) -> RawNode:
        children = [self.take("lambda")]
        args = e.args
        if (args.posonlyargs or args.args or args.vararg
                or args.kwonlyargs or args.kwarg):
            children.append(self.parameters(args, kind="lambda_parameters"))
        children.append(self.take(":"))
        children.append(self.expr(e.body))
        return self.node("lambda", children)

    def expr_NamedExpr(self, e) -> RawNode:
        return self.node("named_expression", [
            self.pattern(e.target), self.take(":="), self.expr(e.value)])

    def expr_Call(self, e) -> RawNode:
        func = self.expr(e.func)
        arguments = self.argument_list(e.args, e.keywords)
        return self.node("call", [func, arguments])

    def argument_list(self, args, keywords, field: str | None = None) -> RawNode:
        children = [self.take("(")]
        entries = sorted(args + keywords,
                         key=lambda n: (n.lineno, n.col_offset))
        for pos, entry in enumerate(entries):
            if pos:
                children.append(self.take(","))
            children.append(self._argument(entry))
        if entries:
            trailing = self.maybe(",")
            if trailing is not None:
                children.append(trailing)
        children.append(self.take(")"))
        return self.node("argument_list", children, field=field)

    def _argument(self, entry) -> RawNode:
        if isinstance(entry, ast.keyword):
            if entry.arg is None:
                return self.node("dictionary_splat",
                                 [self.take("**"), self.expr(entry.value)])
            name = self.identifier(entry.arg, field="name")
            return self.node("keyword_argument",
                             [name, self.take("="), self.expr(entry.value)])
        if isinstance(entry, ast.Starred):
            return self.node("list_splat",
                             [self.take("*"), self.expr(entry.value)])
        return self.expr(entry)

    def expr_Attribute(self, e) -> RawNode:
        value = self.expr(e.value)
        dot = self.take(".")
        attr = self.identifier(e.attr, field="attribute")
        return self.node("attribute", [value, dot, attr])

    def expr_Subscript(self, e) -> RawNode:
        value = self.expr(e.value)
        children = [value, self.take("[")]
        sl = e.slice
        if isinstance(sl, ast.Tuple) and not self._is_parenthesized(sl):
            for pos, elt in enumerate(sl.elts):
                if pos:
                    children.append(self.take(","))
                children.append(self._subscript_element(elt))
            trailing = self.maybe(",")
            if trailing is not None:
                children.append(trailing)
        else:
            children.append(self._subscript_element(sl))
        children.append(self.take("]"))
        return self.node("subscript", children)

    def _subscript_element(self, e) -> RawNode:
        if isinstance(e, ast.Slice):
            return self._slice(e)
        return self.expr(e)

    def _slice(self, e: ast.Slice) -> RawNode:
        children: list[RawNode] = []
        if e.lower is not None:
            children.append(self.expr(e.lower))
        children.append(self.take(":"))
        if e.upper is not None:
            children.append(self.expr(e.upper))
        second = self.maybe(":")
        if second is not None:
            children.append(second)
            if e.step is not None:
                children.append(self.expr(e.step))
        return self.node("slice", children)

    def expr_Tuple(self, e) -> RawNode:
        if self._is_parenthesized(e):
            return self._grouped_elements(e, "tuple")
        return self._bare_tuple(e, "expression_list")

    def expr_List(self, e) -> RawNode:
        return self._grouped_elements(e, "list", open_tok="[", close_tok="]")

    def expr_Set(self, e) -> RawNode:
        return self._grouped_elements(e, "set", open_tok="{", close_tok="}")

    def expr_Dict(self, e) -> RawNode:
        children = [self.take("{")]
        for pos, (key, value) in enumerate(zip(e.keys, e.values)):
            if pos:
                children.append(self.take(","))
            if key is None:
                children.append(self.node("dictionary_splat",
                                          [self.take("**"), self.expr(value)]))
            else:
                children.append(self.node("pair", [
                    self.expr(key, field="key"), self.take(":"),
                    self.expr(value, field="value")]))
        trailing = self.maybe(",")
        if trailing is not None:
            children.append(trailing)
        children.append(self.take("}"))
        return self.node("dictionary", children)

    def expr_Starred(self, e) -> RawNode:
        return self.node("list_splat", [self.take("*"), self.expr(e.value)])

    def _comprehension_clauses(self, generators) -> list[RawNode]:
        clauses = []
        for gen in generators:
            part = []
            if gen.is_async:
                part.append(self.take("async"))
            part.append(self.take("for"))
            part.append(replace(self.pattern(gen.target), field_name="left"))
            part.append(self.take("in"))
            part.append(replace(self.expr(gen.iter), field_name="right"))
            clauses.append(self.node("for_in_clause", part))
            for test in gen.ifs:
                clauses.append(self.node("if_clause",
                                         [self.take("if"), self.expr(test)]))
        return clauses

    def expr_ListComp(self, e) -> RawNode:
        children = [self.take("["), self.expr(e.elt)]
        children += self._comprehension_clauses(e.generators)
        children.append(self.take("]"))
        return self.node("list_comprehension", children)

    def expr_SetComp(self, e) -> RawNode:
        children = [self.take("{"), self.expr(e.elt)]
        children += self._comprehension_clauses(e.generators)
        children.append(self.take("}"))
        return self.node("set_comprehension", children)

    def expr_DictComp(self, e) -> RawNode:
        children = [self.take("{")]
        children.append(self.node("pair", [
            self.expr(e.key, field="key"), self.take(":"),
            self.expr(e.value, field="value")]))
        children += self._comprehension_clauses(e.generators)
        children.append(self.take("}"))
        return self.node("dictionary_comprehension", children)

    def expr_GeneratorExp(self, e) -> RawNode:
        own_paren = self.at("(") and self.peek().start <= self.abs_start(e)
        children = []
        if own_paren:
            children.append(self.take("("))
        children.append(self.expr(e.elt))
        children += self._comprehension_clauses(e.generators)
        if own_paren:
            children.append(self.take(")"))
        return self.node("generator_expression", children)

    def expr_Await(self, e) -> RawNode:
        return self.node("await", [self.take("await"), self.expr(e.value)])

    def expr_Yield(self, e) -> RawNode:
        children = [self.take("yield")]
        if e.value is not None:
            children.append(self.rhs(e.value))
        return self.node("yield", children)

    def expr_YieldFrom(self, e) -> RawNode:
        return self.node("yield", [self.take("yield"), self.take("from"),
                                   self.expr(e.value)])


def _error_tree(code: str) -> RawTree:
    data = code.encode("utf-8")
    error = RawNode("ERROR", True, 0, len(data), code)
    root = RawNode("module", True, 0, len(data), code, (error,))
    return RawTree(root, code, True)


def parse_source(code: str, grammar: str = GRAMMAR_NAME) -> RawTree:
    """Parse source text into a concrete syntax tree.

    Inputs that fail to parse yield a tree with an ERROR node and
    ``has_errors=True`` rather than raising, so corpus pipelines can
    filter uniformly. Unknown grammars raise :class:`GrammarError`
    (a broken installation, not bad input).
    """
    if not isinstance(code, str):
        raise TypeError(f"source must be text (str), got {type(code).__name__}")
    if grammar != GRAMMAR_NAME:
        raise GrammarError(f"grammar {grammar!r} is not installed; "
                           f"available: {GRAMMAR_NAME!r}")
    try:
        mod = ast.parse(code)
        tokens = _lex(code)
        root = _Builder(code, tokens).build_module(mod)
    except (SyntaxError, ValueError, tokenize.TokenError, BuildError,
            RecursionError):
        return _error_tree(code)
    return RawTree(root, code, contains_errors(root))

#!/usr/bin/env python3
"""Build a function/docstring corpus from the local standard library.

Walks the stdlib source tree, extracts every function definition that
carries a docstring, dedents it to column zero, and writes one JSON
object per line with "code", "docstring", and "split" fields (the raw
layout the prepare pipeline consumes). Functions that stop compiling
once dedented (fragments depending on enclosing context) are skipped;
nothing else is pre-filtered, so the corpus keeps its natural share of
constructors, accessors, test helpers, and short docstrings for the
cleaning pipeline to reject.

Deterministic: files are visited in sorted order, functions in source
order, splits assigned round-robin (18 train : 1 valid : 1 test).
"""

from __future__ import annotations

import argparse
import ast
import json
import sys
import sysconfig
import textwrap
from pathlib import Path

MAX_CODE_CHARS = 4000


def functions_with_docstrings(path: Path):
    try:
        source = path.read_text(encoding="utf-8")
        module = ast.parse(source)
    except (SyntaxError, UnicodeDecodeError, OSError):
        return
    lines = source.splitlines(keepends=True)
    for node in ast.walk(module):
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        docstring = ast.get_docstring(node)
        if not docstring:
            continue
        start = node.lineno - 1
        if node.decorator_list:
            start = min(d.lineno for d in node.decorator_list) - 1
        code = textwrap.dedent("".join(lines[start:node.end_lineno]))
        if len(code) > MAX_CODE_CHARS:
            continue
        try:
            compile(code, "<corpus>", "exec")
        except SyntaxError:
            continue
        yield code, docstring


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output", required=True)
    parser.add_argument("--limit", type=int, default=900,
                        help="stop after this many samples (default 900)")
    parser.add_argument("--source-dir",
                        default=sysconfig.get_paths()["stdlib"],
                        help="directory of .py files to harvest")
    args = parser.parse_args()

    splits = ["train"] * 18 + ["valid", "test"]
    count = 0
    with open(args.output, "w", encoding="utf-8", newline="\n") as out:
        for path in sorted(Path(args.source_dir).glob("*.py")):
            for code, docstring in functions_with_docstrings(path):
                record = {"code": code, "docstring": docstring,
                          "split": splits[count % len(splits)]}
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
                count += 1
                if count >= args.limit:
                    print(f"wrote {count} samples to {args.output}")
                    return 0
    print(f"wrote {count} samples to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Shared fixtures: reference sources, golden renderings, corpus cache."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from astseq import augment, load_corpus, parse_source, prepare
from astseq.corpus import KEPT

DATA_DIR = Path(__file__).parent / "data"
CORPUS_PATH = DATA_DIR / "corpus.jsonl"

# The balance-check example and its four expected renderings (truncated
# where the published renderings truncate).
BALANCE_SOURCE = """\
def check_negative_balance(operations):
    balance = 0
    for op in operations:
        balance += op
        if balance < 0:
            return True
    return False
"""

NIT_GOLDEN_PREFIX = (
    "0 module [1]; 1 function_definition [2,3,5]; "
    "2 function_name [] check_negative_balance; 3 parameters [4]; "
    "4 identifier [] operations; 5 block [6,10,25]; "
    "6 expression_statement [7]; 7 assignment [8,9]; "
    "8 identifier [] balance; 9 integer [] 0")

SBT_GOLDEN_PREFIX = (
    "(module (function_definition (function_name_check_negative_balance) "
    "function_name_check_negative_balance (parameters "
    "(identifier_operations) identifier_operations )parameters (block "
    "(expression_statement (assignment (identifier_balance) "
    "identifier_balance (integer_0) integer_0 )assignment "
    ")expression_statement")

PREORDER_GOLDEN_PREFIX = (
    "module function_definition identifier parameters identifier block "
    "expression_statement assignment identifier")

CODE_GOLDEN_PREFIX = "def check_negative_balance(operations): balance = 0"

# Additional reference functions used in the qualitative examples.
CLEANUP_SOURCE = """\
def cleanup(self):
    if os.path.exists(self.path):
        os.remove(self.path)
"""

CREATE_ENV_SOURCE = """\
def create(env_dir, system_site_packages=False, clear=False, \
symlinks=False, with_pip=False, prompt=None):
    builder = ExtendedEnvBuilder(
        system_site_packages=system_site_packages,
        clear=clear,
        symlinks=symlinks,
        with_pip=with_pip,
        prompt=prompt
    )
    builder.create(env_dir)
    return builder.context
"""

CLEANUP_REFERENCE = "Clean up files in the specified path."
CREATE_ENV_REFERENCE = "Create a virtual environment in a directory."


@pytest.fixture
def balance_tree():
    tree = parse_source(BALANCE_SOURCE)
    assert not tree.has_errors
    return tree


@pytest.fixture
def balance_aug(balance_tree):
    return augment(balance_tree)


def filter_fixture_rows() -> tuple[list[str], dict[str, str | None]]:
    """Twelve-line raw corpus with one known violation per cleaning rule.

    Returns the JSON lines and the expected outcome per id: None for
    kept, otherwise the rejection reason.
    """
    rows = [
        # 1: clean
        {"code": "def combine(a, b):\n    return a + b",
         "docstring": "Combine two values into one result."},
        # 2: summary below four words
        {"code": "def getter(x):\n    return x",
         "docstring": "Returns the value."},
        # 3: constructor
        {"code": "def __init__(self, size):\n    self.size = size",
         "docstring": "Initialize the container with a size."},
        # 4: property accessor
        {"code": "@property\ndef size(self):\n    return self._size",
         "docstring": "Number of elements currently stored."},
        # 5: setter accessor
        {"code": "@size.setter\ndef size(self, value):\n"
                 "    self._size = value",
         "docstring": "Set the number of stored elements."},
        # 6: test case by name
        {"code": "def test_combine():\n    assert combine(1, 2) == 3",
         "docstring": "Check that combine adds correctly."},
        # 7: multi-sentence summary, kept with the first sentence only
        {"code": "def scale(v, k):\n    return [x * k for x in v]",
         "docstring": "Scale a vector by a constant. The input list is "
                      "not modified."},
        # 8: duplicate of 1 modulo whitespace
        {"code": "def combine(a,    b):\n    return a + b",
         "docstring": "Combine two values, reindented duplicate."},
        # 9: unparseable code
        {"code": "def broken(:\n    return",
         "docstring": "This sample cannot be parsed at all."},
        # 10: clean
        {"code": "def flip(pair):\n    left, right = pair\n"
                 "    return right, left",
         "docstring": "Swap the two halves of a pair."},
        # 11: test case by decorator
        {"code": "@pytest.fixture\ndef widget():\n    return Widget()",
         "docstring": "Provide a fresh widget for each check."},
        # 12: clean
        {"code": "def total(items):\n    return sum(i.cost for i in items)",
         "docstring": "Sum the cost field over all items."},
    ]
    expected = {
        "train-1": None,
        "train-2": "short-summary",
        "train-3": "constructor",
        "train-4": "accessor",
        "train-5": "accessor",
        "train-6": "test-case",
        "train-7": None,
        "train-8": "duplicate",
        "train-9": "parse-failure",
        "train-10": None,
        "train-11": "test-case",
        "train-12": None,
    }
    return [json.dumps(r) for r in rows], expected


@pytest.fixture
def filter_fixture(tmp_path):
    lines, expected = filter_fixture_rows()
    path = tmp_path / "raw.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path, expected


@pytest.fixture(scope="session")
def kept_samples():
    """The cleaned real corpus; parsed lazily once per session."""
    samples = [s for s in prepare(load_corpus(CORPUS_PATH))
               if s.status == KEPT]
    assert len(samples) >= 500, "frozen corpus shrank below the suite floor"
    return samples


@pytest.fixture(scope="session")
def corpus_trees(kept_samples):
    """(sample, raw tree, augmented tree) triples, parsed once."""
    triples = []
    for sample in kept_samples:
        tree = parse_source(sample.code)
        assert not tree.has_errors, sample.id
        triples.append((sample, tree, augment(tree)))
    return triples

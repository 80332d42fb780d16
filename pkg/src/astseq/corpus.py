"""Corpus ingestion, filtering, statistics, and training-pair export.

Works on JSON-lines files in the code/docstring layout: one object per
line with a "code" and a "docstring" field (names remappable). The
cleaning pipeline reduces each docstring to its first sentence, excludes
constructors, property accessors, and test cases, enforces a minimum
summary length, drops whitespace-equivalent duplicate code, and rejects
samples that fail to parse. Rejection is a value on the sample, never an
exception, so a stream survives arbitrary bad records.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

from .parser import parse_source
from .augment import RelabelRuleSet
from .serialize import (CODE, NIT, PREORDER, REPRESENTATION_KINDS, SBT,
                        get_tokenizer, serialize_source)

log = logging.getLogger(__name__)

KEPT = "kept"
REJECTED = "rejected"

MALFORMED = "malformed"
CONSTRUCTOR = "constructor"
ACCESSOR = "accessor"
TEST_CASE = "test-case"
SHORT_SUMMARY = "short-summary"
PARSE_FAILURE = "parse-failure"
DUPLICATE = "duplicate"

#: All reason codes, in reporting order.
REASONS = (MALFORMED, CONSTRUCTOR, ACCESSOR, TEST_CASE, SHORT_SUMMARY,
           PARSE_FAILURE, DUPLICATE)

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class Sample:
    id: str
    code: str
    summary: str
    split: str = "train"
    status: str = KEPT
    reason: str | None = None

    def rejected(self, reason: str) -> "Sample":
        return replace(self, status=REJECTED, reason=reason)

    def to_dict(self) -> dict:
        return {"id": self.id, "code": self.code, "docstring": self.summary,
                "split": self.split}


def load_corpus(path: str | Path, split: str = "train",
                code_field: str = "code",
                summary_field: str = "docstring") -> Iterator[Sample]:
    """Stream samples from a JSON-lines file in file order.

    A row's own non-empty string ``id`` field is kept; rows without one
    get a positional id, split name plus 1-based line number. Keeping
    explicit ids makes re-preparing a prepared corpus a true no-op
    (positional ids would shift when rejected rows vanish). Unparseable
    or field-less lines yield samples already rejected as malformed;
    the stream continues.
    """
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            sample_id = f"{split}-{lineno}"
            try:
                record = json.loads(line)
                code = record[code_field]
                summary = record[summary_field]
                if not isinstance(code, str) or not isinstance(summary, str):
                    raise TypeError("code/docstring fields must be strings")
            except (json.JSONDecodeError, KeyError, TypeError):
                yield Sample(sample_id, "", "", split).rejected(MALFORMED)
                continue
            row_id = record.get("id")
            if isinstance(row_id, str) and row_id:
                sample_id = row_id
            yield Sample(sample_id, code, summary,
                         record.get("split", split) if isinstance(record, dict)
                         else split)


_SENTENCE_END = re.compile(r"\.(?=\s|\Z)")


def first_sentence(summary: str) -> str:
    """Text up to and including the first "." that is followed by
    whitespace or end of text; if there is none, the first line.
    Surrounding whitespace is stripped. Abbreviation periods are not
    special-cased: the rule is applied literally.
    """
    match = _SENTENCE_END.search(summary)
    if match is not None:
        return summary[: match.end()].strip()
    return summary.split("\n", 1)[0].strip()


@dataclass(frozen=True)
class FilterConfig:
    """Heuristic knobs for the category exclusions.

    The category names come from the cleaning procedure; the detectors are
    local heuristics (Python has no marked constructors/accessors), kept
    configurable for that reason.
    """

    min_summary_words: int = 4
    constructor_names: frozenset[str] = frozenset({"__init__", "__new__"})
    accessor_decorator_suffixes: tuple[str, ...] = (".setter", ".getter",
                                                    ".deleter")
    test_name_prefix: str = "test"
    test_decorator_roots: frozenset[str] = frozenset({"pytest", "unittest"})


DEFAULT_FILTER = FilterConfig()

_DEF_PATTERN = re.compile(r"^\s*(?:async\s+)?def\s+(\w+)", re.MULTILINE)
_DECORATOR_PATTERN = re.compile(r"^\s*@\s*([\w.]+)", re.MULTILINE)


def _function_name(code: str) -> str | None:
    match = _DEF_PATTERN.search(code)
    return match.group(1) if match else None


def _decorators(code: str) -> list[str]:
    head = _DEF_PATTERN.search(code)
    end = head.start() if head else len(code)
    return _DECORATOR_PATTERN.findall(code, 0, end)


def filter_sample(sample: Sample,
                  config: FilterConfig = DEFAULT_FILTER) -> Sample:
    """Apply the per-sample rules in order: category exclusions, then the
    summary word count, then parseability. The first failing rule decides
    the rejection reason. Expects the summary already reduced to its first
    sentence; already-rejected samples pass through unchanged."""
    if sample.status != KEPT:
        return sample

    name = _function_name(sample.code)
    decorators = _decorators(sample.code)
    if name is not None and name in config.constructor_names:
        return sample.rejected(CONSTRUCTOR)
    if any(d == "property" or d.endswith(config.accessor_decorator_suffixes)
           for d in decorators):
        return sample.rejected(ACCESSOR)
    is_test_name = name is not None and name.startswith(config.test_name_prefix)
    has_test_decorator = any(d.split(".", 1)[0] in config.test_decorator_roots
                             for d in decorators)
    if is_test_name or has_test_decorator:
        return sample.rejected(TEST_CASE)

    if len(sample.summary.split()) < config.min_summary_words:
        return sample.rejected(SHORT_SUMMARY)

    if parse_source(sample.code).has_errors:
        return sample.rejected(PARSE_FAILURE)
    return sample


def dedup(samples: Iterable[Sample]) -> Iterator[Sample]:
    """Reject later kept samples whose whitespace-squeezed code already
    appeared. Keys on code only; summaries play no part. Samples rejected
    upstream neither claim a key nor get re-marked."""
    seen: set[str] = set()
    for sample in samples:
        if sample.status != KEPT:
            yield sample
            continue
        key = " ".join(sample.code.split())
        if key in seen:
            yield sample.rejected(DUPLICATE)
        else:
            seen.add(key)
            yield sample


def prepare(samples: Iterable[Sample],
            config: FilterConfig = DEFAULT_FILTER) -> Iterator[Sample]:
    """Full cleaning pipeline: first-sentence reduction, per-sample
    filters, then duplicate removal. Idempotent on its own output."""
    def reduced() -> Iterator[Sample]:
        for sample in samples:
            if sample.status == KEPT:
                sample = replace(sample, summary=first_sentence(sample.summary))
            yield filter_sample(sample, config)

    return dedup(reduced())


def sample_corpus(samples: Iterable[Sample], size: int,
                  seed: int) -> list[Sample]:
    """Seeded pre-sampling: a uniform random subset of at most ``size``
    samples, in original order. Deterministic for a fixed seed."""
    pool = list(samples)
    if len(pool) <= size:
        return pool
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(pool)), size))
    return [pool[i] for i in picked]


@dataclass(frozen=True)
class SplitStats:
    split: str
    count: int
    code_min: int | None
    code_mean: float | None
    code_max: int | None
    summary_min: int | None
    summary_mean: float | None
    summary_max: int | None


@dataclass(frozen=True)
class CorpusStats:
    splits: tuple[SplitStats, ...]
    tokenizer: str


def _split_order(name: str) -> tuple[int, str]:
    try:
        return (SPLITS.index(name), name)
    except ValueError:
        return (len(SPLITS), name)


def corpus_stats(samples: Iterable[Sample],
                 tokenizer: str = "whitespace") -> CorpusStats:
    """Per-split count and min/mean/max token lengths of code and summary.

    Expects kept samples only; means are kept at full precision here and
    rounded to two decimals at rendering time. Empty splits report count 0
    with absent extrema.
    """
    tokenize = get_tokenizer(tokenizer)
    by_split: dict[str, list[tuple[int, int]]] = {}
    for sample in samples:
        if sample.status != KEPT:
            raise ValueError(f"corpus_stats expects kept samples only; "
                             f"{sample.id} is {sample.status}")
        by_split.setdefault(sample.split, []).append(
            (len(tokenize(sample.code)), len(tokenize(sample.summary))))

    rows = []
    for split in sorted(by_split, key=_split_order):
        lengths = by_split[split]
        code = [c for c, _ in lengths]
        summary = [s for _, s in lengths]
        rows.append(SplitStats(
            split, len(lengths),
            min(code), sum(code) / len(code), max(code),
            min(summary), sum(summary) / len(summary), max(summary)))
    return CorpusStats(tuple(rows), tokenizer)


#: Shared across representation kinds so pairs differ only in the input
#: representation text.
DEFAULT_TEMPLATE = ("Summarize the following function in one sentence.\n\n"
                    "{representation}\n\nSummary:")


@dataclass(frozen=True)
class TrainingPair:
    id: str
    input: str
    output: str
    representation: str

    def to_dict(self) -> dict:
        return {"id": self.id, "input": self.input, "output": self.output,
                "repr": self.representation}


def export_training(samples: Iterable[Sample], kind: str,
                    template: str = DEFAULT_TEMPLATE,
                    rules: RelabelRuleSet | None = None) -> Iterator[TrainingPair]:
    """One prompt/summary pair per kept sample under one representation.

    The template must contain a ``{representation}`` slot and is identical
    across kinds. A sample whose representation cannot be rendered is
    skipped with a logged reason.
    """
    if "{representation}" not in template:
        raise ValueError("template must contain a {representation} slot")
    kind = kind.upper()
    for sample in samples:
        if sample.status != KEPT:
            continue
        try:
            rendered = serialize_source(sample.code, kind, rules=rules)
        except ValueError as exc:
            log.warning("skipping %s: %s", sample.id, exc)
            continue
        yield TrainingPair(sample.id,
                           template.format(representation=rendered.text),
                           sample.summary, kind)


@dataclass(frozen=True)
class ReprStats:
    kind: str
    sample_count: int
    total_tokens: int
    avg_tokens: float


@dataclass(frozen=True)
class CompareReport:
    """Average/total sequence lengths per representation kind, plus the
    pairwise percentage reductions; reduction(a, b) = how much shorter a
    is than b on average."""

    per_kind: tuple[ReprStats, ...]
    reductions: tuple[tuple[str, str, float], ...]
    tokenizer: str

    @property
    def nit_vs_sbt(self) -> float:
        for a, b, pct in self.reductions:
            if a == NIT and b == SBT:
                return pct
        raise LookupError("no NIT/SBT pair in report")


def compare_representations(samples: Iterable[Sample],
                            tokenizer: str = "whitespace",
                            rules: RelabelRuleSet | None = None) -> CompareReport:
    """Serialize every kept sample under all four kinds and aggregate
    token lengths. Raises on an empty corpus."""
    totals = {kind: 0 for kind in REPRESENTATION_KINDS}
    count = 0
    for sample in samples:
        if sample.status != KEPT:
            continue
        for kind in REPRESENTATION_KINDS:
            totals[kind] += serialize_source(sample.code, kind, rules=rules,
                                             tokenizer=tokenizer).token_count
        count += 1
    if count == 0:
        raise ValueError("empty corpus: nothing to compare")
    per_kind = tuple(ReprStats(kind, count, totals[kind], totals[kind] / count)
                     for kind in REPRESENTATION_KINDS)
    averages = {row.kind: row.avg_tokens for row in per_kind}
    reductions = tuple(
        (a, b, 100.0 * (1.0 - averages[a] / averages[b]))
        for a in REPRESENTATION_KINDS for b in REPRESENTATION_KINDS
        if a != b and averages[b] > 0)
    return CompareReport(per_kind, reductions, tokenizer)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write one JSON object per line (UTF-8, LF); returns the row count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count

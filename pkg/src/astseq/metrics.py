"""Summary-quality metrics: sentence BLEU-4, METEOR, and ROUGE-L.

All three operate on token lists; ``tokenize`` is the shared convention
(lowercase, whitespace split). BLEU-4 is scaled to [0, 100]; METEOR and
ROUGE-L stay in [0, 1]. Corpus scores are arithmetic means of per-sample
scores.

BLEU-4 uses add-one smoothing on the n-gram precision numerator and
denominator for n >= 2; the unigram precision is unsmoothed, so zero
unigram overlap scores zero. METEOR runs two alignment stages, exact then
Porter-stem, and charges the standard fragmentation penalty
0.5 x (chunks / matches)^3 against the precision-weighted F-mean
PR / (0.9 P + 0.1 R). The synonym stage of full METEOR needs a lexical
database and is not implemented. ROUGE-L is the F1 over the longest
common subsequence.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .porter import stem

log = logging.getLogger(__name__)

#: Matched-pair budget under which METEOR searches all stage-consistent
#: alignments for the minimal chunk count; above it, a greedy leftmost
#: alignment approximates. 12 keeps the search instant on real summaries.
EXACT_CHUNK_SEARCH_LIMIT = 12

#: Deterministic cap on enumerated alignments; pathological inputs (one
#: word repeated many times on both sides) fall back to greedy.
_SEARCH_BUDGET = 500_000


def tokenize(text: str) -> list[str]:
    """Shared metric tokenization: lowercase, split on whitespace."""
    return text.lower().split()


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def ngram_precisions(candidate: Sequence[str], reference: Sequence[str],
                     max_n: int = 4) -> list[tuple[int, int]]:
    """Clipped n-gram match and candidate n-gram total for n = 1..max_n,
    before smoothing. Exposed so the counts can be checked independently
    of the composed score."""
    rows = []
    for n in range(1, max_n + 1):
        cand = ngram_counts(candidate, n)
        ref = ngram_counts(reference, n)
        matches = sum(min(count, ref[gram]) for gram, count in cand.items())
        rows.append((matches, max(len(candidate) - n + 1, 0)))
    return rows


def bleu4(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Sentence BLEU with n = 1..4, brevity penalty, scaled x100."""
    if not candidate or not reference:
        log.warning("bleu4 on empty input scores 0")
        return 0.0
    log_sum = 0.0
    for n, (matches, total) in enumerate(ngram_precisions(candidate,
                                                          reference), start=1):
        if n >= 2:
            precision = (matches + 1) / (total + 1)
        elif matches == 0:
            return 0.0
        else:
            precision = matches / total
        log_sum += math.log(precision) / 4.0
    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return 100.0 * brevity * math.exp(log_sum)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, single-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    row = [0] * (len(b) + 1)
    for token in a:
        prev_diag = 0
        for j, other in enumerate(b, start=1):
            prev_row = row[j]
            row[j] = prev_diag + 1 if token == other else max(row[j], row[j - 1])
            prev_diag = prev_row
    return row[len(b)]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """F1 over the LCS: P = LCS/|cand|, R = LCS/|ref|."""
    if not candidate or not reference:
        log.warning("rouge_l on empty input scores 0")
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def _match_groups(candidate: Sequence[str],
                  reference: Sequence[str]) -> tuple[list, list, int]:
    """Stage constraints for the METEOR alignment.

    Exact groups pair equal surface forms; stem groups pair whatever the
    exact stage left behind. Each group is (cand positions, ref positions,
    required pair count). The required counts, and hence the total match
    count, do not depend on which positions the exact stage consumes, so
    the stem groups built here assume nothing about that choice beyond
    per-form leftovers.
    """
    cand_by_word: dict[str, list[int]] = {}
    ref_by_word: dict[str, list[int]] = {}
    for i, word in enumerate(candidate):
        cand_by_word.setdefault(word, []).append(i)
    for j, word in enumerate(reference):
        ref_by_word.setdefault(word, []).append(j)

    exact_groups = []
    for word in sorted(set(cand_by_word) & set(ref_by_word)):
        cs, rs = cand_by_word[word], ref_by_word[word]
        exact_groups.append((cs, rs, min(len(cs), len(rs))))

    # Per-form leftover counts after the exact stage are fixed; leftover
    # positions within a form are interchangeable at the count level.
    stem_cand: dict[str, dict[str, int]] = {}
    stem_ref: dict[str, dict[str, int]] = {}
    for word, positions in cand_by_word.items():
        matched = min(len(positions), len(ref_by_word.get(word, ())))
        spare = len(positions) - matched
        if spare:
            stem_cand.setdefault(stem(word), {})[word] = spare
    for word, positions in ref_by_word.items():
        matched = min(len(positions), len(cand_by_word.get(word, ())))
        spare = len(positions) - matched
        if spare:
            stem_ref.setdefault(stem(word), {})[word] = spare

    stem_pairs = 0
    for key in set(stem_cand) & set(stem_ref):
        stem_pairs += min(sum(stem_cand[key].values()),
                          sum(stem_ref[key].values()))
    total = sum(k for _, _, k in exact_groups) + stem_pairs
    return exact_groups, sorted(set(stem_cand) & set(stem_ref)), total


def _chunk_count(pairs: Iterable[tuple[int, int]]) -> int:
    count = 0
    prev_c = prev_r = None
    for c, r in sorted(pairs):
        if prev_c is None or c != prev_c + 1 or r != prev_r + 1:
            count += 1
        prev_c, prev_r = c, r
    return count


def _bijection_count(n_cand: int, n_ref: int, k: int) -> int:
    return (math.comb(n_cand, k) * math.comb(n_ref, k) * math.factorial(k))


def _bijections(cs: Sequence[int], rs: Sequence[int], k: int):
    for chosen_c in combinations(cs, k):
        for chosen_r in combinations(rs, k):
            for ordering in permutations(chosen_r):
                yield tuple(zip(chosen_c, ordering))


def _min_chunks_exhaustive(candidate, reference, exact_groups,
                           total: int) -> int | None:
    """Minimal chunk count over every stage-consistent maximal alignment,
    or None when the enumeration would blow the budget."""
    cand_stems = [stem(w) for w in candidate]
    ref_stems = [stem(w) for w in reference]

    budget = 1
    for cs, rs, k in exact_groups:
        budget *= _bijection_count(len(cs), len(rs), k)
        if budget > _SEARCH_BUDGET:
            return None
    # Upper-bound the stem phase as if the exact stage consumed nothing.
    stem_cand_all: dict[str, list[int]] = {}
    stem_ref_all: dict[str, list[int]] = {}
    for i, s in enumerate(cand_stems):
        stem_cand_all.setdefault(s, []).append(i)
    for j, s in enumerate(ref_stems):
        stem_ref_all.setdefault(s, []).append(j)
    for key in set(stem_cand_all) & set(stem_ref_all):
        cs, rs = stem_cand_all[key], stem_ref_all[key]
        budget *= _bijection_count(len(cs), len(rs), min(len(cs), len(rs)))
        if budget > _SEARCH_BUDGET:
            return None

    best = len(candidate) + 1

    def stem_phase(used_c: set, used_r: set, pairs: list) -> None:
        nonlocal best
        groups = []
        by_stem_c: dict[str, list[int]] = {}
        by_stem_r: dict[str, list[int]] = {}
        for i, s in enumerate(cand_stems):
            if i not in used_c:
                by_stem_c.setdefault(s, []).append(i)
        for j, s in enumerate(ref_stems):
            if j not in used_r:
                by_stem_r.setdefault(s, []).append(j)
        for key in sorted(set(by_stem_c) & set(by_stem_r)):
            cs, rs = by_stem_c[key], by_stem_r[key]
            groups.append((cs, rs, min(len(cs), len(rs))))

        def recurse(index: int, chosen: list) -> None:
            nonlocal best
            if index == len(groups):
                assert len(chosen) == total
                best = min(best, _chunk_count(chosen))
                return
            cs, rs, k = groups[index]
            for assignment in _bijections(cs, rs, k):
                recurse(index + 1, chosen + list(assignment))

        recurse(0, pairs)

    def exact_phase(index: int, used_c: set, used_r: set,
                    pairs: list) -> None:
        if index == len(exact_groups):
            stem_phase(used_c, used_r, pairs)
            return
        cs, rs, k = exact_groups[index]
        for assignment in _bijections(cs, rs, k):
            exact_phase(index + 1,
                        used_c | {c for c, _ in assignment},
                        used_r | {r for _, r in assignment},
                        pairs + list(assignment))

    exact_phase(0, set(), set(), [])
    return best


def _greedy_pairs(candidate, reference) -> list[tuple[int, int]]:
    """Leftmost-available pairing, exact stage then stem stage."""
    pairs = []
    used_c: set[int] = set()
    used_r: set[int] = set()
    for i, word in enumerate(candidate):
        for j, other in enumerate(reference):
            if j not in used_r and other == word:
                pairs.append((i, j))
                used_c.add(i)
                used_r.add(j)
                break
    ref_stems = [stem(w) for w in reference]
    for i, word in enumerate(candidate):
        if i in used_c:
            continue
        target = stem(word)
        for j, other in enumerate(ref_stems):
            if j not in used_r and other == target:
                pairs.append((i, j))
                used_r.add(j)
                break
    return pairs


def meteor(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Unigram-alignment score with a fragmentation penalty, in [0, 1]."""
    if not candidate or not reference:
        log.warning("meteor on empty input scores 0")
        return 0.0
    exact_groups, _, matches = _match_groups(candidate, reference)
    if matches == 0:
        return 0.0
    chunks = None
    if matches <= EXACT_CHUNK_SEARCH_LIMIT:
        chunks = _min_chunks_exhaustive(candidate, reference, exact_groups,
                                        matches)
    if chunks is None:
        chunks = _chunk_count(_greedy_pairs(candidate, reference))
    precision = matches / len(candidate)
    recall = matches / len(reference)
    fmean = (precision * recall) / (0.9 * precision + 0.1 * recall)
    penalty = 0.5 * (chunks / matches) ** 3
    return fmean * (1.0 - penalty)


@dataclass(frozen=True)
class SampleScore:
    id: str
    bleu4: float
    meteor: float
    rouge_l: float

    def to_dict(self) -> dict:
        return {"id": self.id, "bleu4": self.bleu4, "meteor": self.meteor,
                "rouge_l": self.rouge_l}


@dataclass(frozen=True)
class MetricReport:
    bleu4: float
    meteor: float
    rouge_l: float
    per_sample: tuple[SampleScore, ...]

    def to_dict(self) -> dict:
        return {"bleu4": self.bleu4, "meteor": self.meteor,
                "rouge_l": self.rouge_l, "count": len(self.per_sample),
                "per_sample": [row.to_dict() for row in self.per_sample]}


def evaluate_corpus(candidates: Sequence[str], references: Sequence[str],
                    ids: Sequence[str] | None = None) -> MetricReport:
    """Score aligned candidate/reference texts; corpus values are the
    arithmetic means of the per-sample scores."""
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates vs "
                         f"{len(references)} references")
    if ids is None:
        ids = [str(i + 1) for i in range(len(candidates))]
    elif len(ids) != len(candidates):
        raise ValueError("ids out of step with candidates")
    if not candidates:
        raise ValueError("nothing to evaluate")

    rows = []
    for sample_id, cand_text, ref_text in zip(ids, candidates, references):
        cand = tokenize(cand_text)
        ref = tokenize(ref_text)
        rows.append(SampleScore(sample_id, bleu4(cand, ref),
                                meteor(cand, ref), rouge_l(cand, ref)))
    count = len(rows)
    return MetricReport(sum(r.bleu4 for r in rows) / count,
                        sum(r.meteor for r in rows) / count,
                        sum(r.rouge_l for r in rows) / count,
                        tuple(rows))

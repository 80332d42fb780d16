"""Syntax-tree sequence toolkit for code summarization pipelines.

Parse Python source into concrete syntax trees, augment them with lexical
values and structural normalization, serialize them as NIT, SBT, preorder,
or flattened code sequences, prepare summarization corpora, and score
candidate summaries with BLEU-4, METEOR, and ROUGE-L.
"""

from .parser import GRAMMAR_NAME, GRAMMAR_VERSION, GrammarError, parse_source
from .tree import RawNode, RawTree, count_nodes
from .augment import (AugNode, AugTree, DEFAULT_RULES, LexTree, RelabelRule,
                      RelabelRuleSet, VARIABLE_TARGET_RULES, augment,
                      inject_lexical, normalize_structure)
from .serialize import (NIT, SBT, PREORDER, CODE, REPRESENTATION_KINDS,
                        NitParseError, SbtParseError, SerializedSequence,
                        SourceParseError, parse_nit, parse_sbt,
                        serialize_code, serialize_nit, serialize_preorder,
                        serialize_sbt, serialize_source)
from .corpus import (CompareReport, CorpusStats, FilterConfig, Sample,
                     TrainingPair, compare_representations, corpus_stats,
                     dedup, export_training, filter_sample, first_sentence,
                     load_corpus, prepare, sample_corpus)
from .metrics import (MetricReport, SampleScore, bleu4, evaluate_corpus,
                      meteor, rouge_l, tokenize)

__version__ = "0.1.0"

__all__ = [
    "GRAMMAR_NAME", "GRAMMAR_VERSION", "GrammarError", "parse_source",
    "RawNode", "RawTree", "count_nodes",
    "AugNode", "AugTree", "LexTree", "RelabelRule", "RelabelRuleSet",
    "DEFAULT_RULES", "VARIABLE_TARGET_RULES", "augment", "inject_lexical",
    "normalize_structure",
    "NIT", "SBT", "PREORDER", "CODE", "REPRESENTATION_KINDS",
    "NitParseError", "SbtParseError", "SerializedSequence",
    "SourceParseError", "parse_nit", "parse_sbt", "serialize_code",
    "serialize_nit", "serialize_preorder", "serialize_sbt",
    "serialize_source",
    "CompareReport", "CorpusStats", "FilterConfig", "Sample", "TrainingPair",
    "compare_representations", "corpus_stats", "dedup", "export_training",
    "filter_sample", "first_sentence", "load_corpus", "prepare",
    "sample_corpus",
    "MetricReport", "SampleScore", "bleu4", "evaluate_corpus", "meteor",
    "rouge_l", "tokenize",
    "__version__",
]

"""Command-line interface.

Subcommands cover the whole pipeline: serialize one source file, prepare
a corpus, report corpus statistics, compare representation lengths,
evaluate candidate summaries, export training pairs, and run the HTTP
service. Human-readable tables are the default; ``--json`` switches any
command to machine-readable output on stdout.

Exit codes: 0 success, 1 I/O failure, 2 bad input (unparseable source,
malformed corpus lines, unknown kind/tokenizer), 3 contract violation
(mismatched evaluation files, empty comparison corpus).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import corpus
from .augment import RelabelRuleSet
from .metrics import evaluate_corpus
from .parser import GRAMMAR_VERSION
from .serialize import SourceParseError, serialize_source

EXIT_OK = 0
EXIT_IO = 1
EXIT_INPUT = 2
EXIT_CONTRACT = 3

log = logging.getLogger(__name__)


class InputError(Exception):
    """Bad input data; maps to exit code 2."""


class ContractError(Exception):
    """Cross-input contract violation; maps to exit code 3."""


# Settings a config file may provide. Flags win over the file, the file
# wins over these defaults.
_DEFAULTS = {
    "kind": "nit",
    "tokenizer": "whitespace",
    "rules": None,
    "min-summary-words": "4",
    "template": corpus.DEFAULT_TEMPLATE,
}


def _load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    settings = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _DEFAULTS:
            raise InputError(f"config line {lineno}: expected "
                             f"'key = value' with key in "
                             f"{sorted(_DEFAULTS)}, got {raw_line!r}")
        settings[key] = value.strip()
    return settings


def _setting(args: argparse.Namespace, config: dict[str, str],
             key: str) -> str | None:
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    return config.get(key, _DEFAULTS[key])


def _load_rules(args, config) -> RelabelRuleSet | None:
    path = _setting(args, config, "rules")
    if path is None:
        return None
    try:
        return RelabelRuleSet.from_file(path)
    except OSError as exc:
        raise InputError(f"cannot read rules file: {exc}") from None
    except ValueError as exc:
        raise InputError(f"bad rules file: {exc}") from None


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: bad JSON: {exc}") from None
            if not isinstance(row, dict):
                raise InputError(f"{path}:{lineno}: expected an object")
            rows.append(row)
    return rows


def _print_table(header: list[str], rows: list[list[str]]) -> None:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    for line in [header] + rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())


def cmd_serialize(args, config) -> int:
    kind = _setting(args, config, "kind")
    tokenizer = _setting(args, config, "tokenizer")
    rules = _load_rules(args, config)
    source = _read_source(args.input)
    try:
        seq = serialize_source(source, kind, rules=rules, tokenizer=tokenizer)
    except SourceParseError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.json:
        print(json.dumps({"kind": seq.kind, "text": seq.text,
                          "token_count": seq.token_count}))
    else:
        print(seq.text)
    return EXIT_OK


def cmd_prepare(args, config) -> int:
    try:
        min_words = int(_setting(args, config, "min-summary-words"))
    except ValueError:
        raise InputError("min-summary-words must be an integer") from None
    filter_config = corpus.FilterConfig(min_summary_words=min_words)
    samples = list(corpus.load_corpus(args.input, split=args.split,
                                      code_field=args.code_field,
                                      summary_field=args.summary_field))
    if args.sample is not None:
        samples = corpus.sample_corpus(samples, args.sample, args.seed)
    kept_rows: list[dict] = []
    reject_rows: list[dict] = []
    counts: Counter = Counter()
    for sample in corpus.prepare(samples, filter_config):
        if sample.status == corpus.KEPT:
            kept_rows.append(sample.to_dict())
        else:
            reject_rows.append({"id": sample.id, "reason": sample.reason})
            counts[sample.reason] += 1
    corpus.write_jsonl(args.output, kept_rows)
    if args.rejects:
        corpus.write_jsonl(args.rejects, reject_rows)
    if args.json:
        print(json.dumps({"kept": len(kept_rows),
                          "rejected": len(reject_rows),
                          "reasons": {r: counts[r] for r in corpus.REASONS
                                      if counts[r]},
                          "output": args.output}))
    else:
        breakdown = ", ".join(f"{reason} {counts[reason]}"
                              for reason in corpus.REASONS if counts[reason])
        line = f"kept {len(kept_rows)} rejected {len(reject_rows)}"
        if breakdown:
            line += f" ({breakdown})"
        print(line)
    return EXIT_OK


def _load_prepared(args) -> list[corpus.Sample]:
    """Read an already-filtered corpus; malformed lines are fatal here."""
    samples = []
    for sample in corpus.load_corpus(args.input, split=args.split,
                                     code_field=args.code_field,
                                     summary_field=args.summary_field):
        if sample.status != corpus.KEPT:
            raise InputError(f"{args.input}: {sample.id} is {sample.reason}; "
                             f"run prepare first")
        samples.append(sample)
    return samples


def cmd_stats(args, config) -> int:
    tokenizer = _setting(args, config, "tokenizer")
    samples = _load_prepared(args)
    try:
        stats = corpus.corpus_stats(samples, tokenizer)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.json:
        print(json.dumps({
            "tokenizer": stats.tokenizer,
            "splits": [{"split": s.split, "count": s.count,
                        "code": {"min": s.code_min,
                                 "mean": None if s.code_mean is None
                                 else round(s.code_mean, 2),
                                 "max": s.code_max},
                        "summary": {"min": s.summary_min,
                                    "mean": None if s.summary_mean is None
                                    else round(s.summary_mean, 2),
                                    "max": s.summary_max}}
                       for s in stats.splits]}))
        return EXIT_OK
    header = ["split", "count", "code min", "code mean", "code max",
              "summary min", "summary mean", "summary max"]
    rows = [[s.split, str(s.count), str(s.code_min), f"{s.code_mean:.2f}",
             str(s.code_max), str(s.summary_min), f"{s.summary_mean:.2f}",
             str(s.summary_max)] for s in stats.splits]
    _print_table(header, rows)
    return EXIT_OK


def cmd_compare(args, config) -> int:
    tokenizer = _setting(args, config, "tokenizer")
    rules = _load_rules(args, config)
    samples = _load_prepared(args)
    try:
        report = corpus.compare_representations(samples, tokenizer=tokenizer,
                                                rules=rules)
    except SourceParseError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise ContractError(str(exc)) from None
    if args.json:
        print(json.dumps({
            "tokenizer": report.tokenizer,
            "per_kind": [{"kind": r.kind, "samples": r.sample_count,
                          "total_tokens": r.total_tokens,
                          "avg_tokens": round(r.avg_tokens, 2)}
                         for r in report.per_kind],
            "reductions": [{"shorter": a, "longer": b,
                            "percent": round(pct, 2)}
                           for a, b, pct in report.reductions],
            "nit_vs_sbt": round(report.nit_vs_sbt, 2)}))
        return EXIT_OK
    header = ["kind", "samples", "total tokens", "avg tokens"]
    rows = [[r.kind, str(r.sample_count), str(r.total_tokens),
             f"{r.avg_tokens:.2f}"] for r in report.per_kind]
    _print_table(header, rows)
    direction = "shorter" if report.nit_vs_sbt >= 0 else "longer"
    print(f"NIT vs SBT: {abs(report.nit_vs_sbt):.2f}% {direction} "
          f"on average ({report.tokenizer} tokens)")
    return EXIT_OK


def cmd_eval(args, config) -> int:
    if args.references is not None:
        cand_rows = _read_jsonl(args.candidates)
        ref_rows = _read_jsonl(args.references)
        try:
            cand_by_id = {row["id"]: row[args.field] for row in cand_rows}
            ref_by_id = {row["id"]: row[args.field] for row in ref_rows}
        except KeyError as exc:
            raise InputError(f"missing field {exc} in evaluation file"
                             ) from None
        if len(cand_by_id) != len(cand_rows):
            raise ContractError("duplicate ids in candidates file")
        if set(cand_by_id) != set(ref_by_id):
            odd = set(cand_by_id) ^ set(ref_by_id)
            raise ContractError(f"candidate/reference ids do not match "
                                f"(first differences: "
                                f"{sorted(map(str, odd))[:5]})")
        ids = [row["id"] for row in cand_rows]
        candidates = [cand_by_id[i] for i in ids]
        references = [ref_by_id[i] for i in ids]
    else:
        rows = _read_jsonl(args.candidates)
        try:
            ids = [row.get("id", str(i + 1)) for i, row in enumerate(rows)]
            candidates = [row[args.candidate_field] for row in rows]
            references = [row[args.reference_field] for row in rows]
        except KeyError as exc:
            raise InputError(f"missing field {exc} in evaluation file"
                             ) from None
    if not candidates:
        raise ContractError("nothing to evaluate")
    report = evaluate_corpus(candidates, references, [str(i) for i in ids])
    if args.json:
        print(json.dumps(report.to_dict()))
        return EXIT_OK
    _print_table(["BLEU-4", "METEOR", "ROUGE-L"],
                 [[f"{report.bleu4:.2f}", f"{report.meteor:.4f}",
                   f"{report.rouge_l:.4f}"]])
    print(f"samples: {len(report.per_sample)}")
    return EXIT_OK


def cmd_export(args, config) -> int:
    kind = _setting(args, config, "kind")
    template = _setting(args, config, "template")
    rules = _load_rules(args, config)
    samples = _load_prepared(args)
    try:
        pairs = list(corpus.export_training(samples, kind, template, rules))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    corpus.write_jsonl(args.output, (p.to_dict() for p in pairs))
    if args.json:
        print(json.dumps({"pairs": len(pairs), "kind": kind.upper(),
                          "output": args.output}))
    else:
        print(f"wrote {len(pairs)} pairs ({kind.upper()}) to {args.output}")
    return EXIT_OK


def cmd_serve(args, config) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--json", action="store_true",
                        help="machine-readable output on stdout")
    shared.add_argument("--tokenizer", choices=["whitespace", "chars"],
                        default=None, help="sequence length tokenizer")
    shared.add_argument("--config", default=None,
                        help="plain-text settings file (key = value)")

    corpus_shared = argparse.ArgumentParser(add_help=False)
    corpus_shared.add_argument("--split", default="train",
                               help="split label for records without one")
    corpus_shared.add_argument("--code-field", default="code")
    corpus_shared.add_argument("--summary-field", default="docstring")

    parser = argparse.ArgumentParser(
        prog="astseq",
        description="Parse Python functions into augmented syntax trees, "
                    "serialize them for sequence models, prepare "
                    "summarization corpora, and score summaries.")
    parser.add_argument("--grammar-version", action="store_true",
                        help="print the pinned grammar version and exit")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = commands.add_parser("serialize", parents=[shared],
                            help="render one source file as a sequence")
    p.add_argument("input", nargs="?", default="-",
                   help="source file, or - for stdin (default)")
    p.add_argument("--kind", default=None,
                   help="nit, sbt, preorder, or code (default nit)")
    p.add_argument("--rules", default=None, help="relabel rules file")
    p.set_defaults(func=cmd_serialize)

    p = commands.add_parser("prepare", parents=[shared, corpus_shared],
                            help="filter a raw corpus")
    p.add_argument("input", help="raw corpus (JSON lines)")
    p.add_argument("-o", "--output", required=True,
                   help="filtered corpus destination")
    p.add_argument("--rejects", default=None,
                   help="write rejected ids and reasons here")
    p.add_argument("--sample", type=int, default=None,
                   help="pre-sample this many records before filtering")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --sample (default 0)")
    p.add_argument("--min-summary-words", dest="min_summary_words",
                   default=None, help="reject summaries shorter than this")
    p.set_defaults(func=cmd_prepare)

    p = commands.add_parser("stats", parents=[shared, corpus_shared],
                            help="length statistics of a prepared corpus")
    p.add_argument("input", help="prepared corpus (JSON lines)")
    p.set_defaults(func=cmd_stats)

    p = commands.add_parser("compare", parents=[shared, corpus_shared],
                            help="sequence lengths under all four kinds")
    p.add_argument("input", help="prepared corpus (JSON lines)")
    p.add_argument("--rules", default=None, help="relabel rules file")
    p.set_defaults(func=cmd_compare)

    p = commands.add_parser("eval", parents=[shared],
                            help="score candidate summaries")
    p.add_argument("candidates",
                   help="candidates file, or a single file holding both "
                        "fields when no references file is given")
    p.add_argument("references", nargs="?", default=None,
                   help="references file (matched to candidates by id)")
    p.add_argument("--field", default="summary",
                   help="text field in two-file mode (default summary)")
    p.add_argument("--candidate-field", default="candidate",
                   help="candidate field in single-file mode")
    p.add_argument("--reference-field", default="reference",
                   help="reference field in single-file mode")
    p.set_defaults(func=cmd_eval)

    p = commands.add_parser("export", parents=[shared, corpus_shared],
                            help="write prompt/summary training pairs")
    p.add_argument("input", help="prepared corpus (JSON lines)")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--kind", default=None,
                   help="nit, sbt, preorder, or code (default nit)")
    p.add_argument("--rules", default=None, help="relabel rules file")
    p.add_argument("--template", default=None,
                   help="prompt template with a {representation} slot")
    p.set_defaults(func=cmd_export)

    p = commands.add_parser("serve", parents=[shared],
                            help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.grammar_version:
        print(GRAMMAR_VERSION)
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_INPUT
    try:
        config = _load_config(getattr(args, "config", None))
        return args.func(args, config)
    except InputError as exc:
        print(f"astseq: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ContractError as exc:
        print(f"astseq: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"astseq: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

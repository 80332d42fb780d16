"""Command-line behavior: output formats, config precedence, exit codes."""

import io
import json
from pathlib import Path

import pytest

from astseq import GRAMMAR_VERSION
from astseq.cli import main

from conftest import BALANCE_SOURCE, NIT_GOLDEN_PREFIX, SBT_GOLDEN_PREFIX


@pytest.fixture
def run(capsys):
    def invoke(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


@pytest.fixture
def balance_file(tmp_path):
    path = tmp_path / "balance.py"
    path.write_text(BALANCE_SOURCE, encoding="utf-8")
    return str(path)


@pytest.fixture
def prepared_file(run, filter_fixture, tmp_path):
    raw, _ = filter_fixture
    out = tmp_path / "prepared.jsonl"
    code, _, _ = run("prepare", str(raw), "-o", str(out))
    assert code == 0
    return str(out)


# ------------------------------------------------------------------ general

def test_grammar_version_flag(run):
    code, out, _ = run("--grammar-version")
    assert code == 0
    assert out.strip() == GRAMMAR_VERSION


def test_no_command_prints_help_and_fails(run):
    code, out, err = run()
    assert code == 2
    assert not out
    assert "COMMAND" in err


# ---------------------------------------------------------------- serialize

def test_serialize_defaults_to_nit(run, balance_file):
    code, out, err = run("serialize", balance_file)
    assert (code, err) == (0, "")
    assert out.rstrip("\n").startswith(NIT_GOLDEN_PREFIX)


def test_serialize_kind_flag(run, balance_file):
    code, out, _ = run("serialize", balance_file, "--kind", "sbt")
    assert code == 0
    assert out.startswith(SBT_GOLDEN_PREFIX.split()[0])
    code, out, _ = run("serialize", balance_file, "--kind", "code")
    assert code == 0
    assert out.startswith("def check_negative_balance(operations): balance = 0")


def test_serialize_reads_stdin_by_default(run, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("x = 1"))
    code, out, _ = run("serialize")
    assert code == 0
    assert out.rstrip() == ("0 module [1]; 1 expression_statement [2]; "
                            "2 assignment [3,4]; 3 identifier [] x; "
                            "4 integer [] 1")


def test_serialize_json_output(run, balance_file):
    code, out, _ = run("serialize", balance_file, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["kind"] == "NIT"
    assert payload["text"].startswith(NIT_GOLDEN_PREFIX)
    assert payload["token_count"] == len(payload["text"].split())


def test_serialize_unparseable_source(run, tmp_path):
    bad = tmp_path / "bad.py"
    bad.write_text("def broken(:", encoding="utf-8")
    code, out, err = run("serialize", str(bad))
    assert code == 2
    assert not out
    assert err.startswith("astseq: ")
    assert "does not parse" in err and "bytes" in err


def test_serialize_missing_file_is_io_error(run, tmp_path):
    code, _, err = run("serialize", str(tmp_path / "nope.py"))
    assert code == 1
    assert "astseq: " in err


def test_serialize_unknown_kind(run, balance_file):
    code, _, err = run("serialize", balance_file, "--kind", "xml")
    assert code == 2
    assert "unknown representation" in err


def test_serialize_unknown_tokenizer_is_rejected_by_argparse(balance_file):
    with pytest.raises(SystemExit) as exc:
        main(["serialize", balance_file, "--tokenizer", "bytes"])
    assert exc.value.code == 2


def test_serialize_with_rules_file(run, balance_file, tmp_path):
    rules = tmp_path / "rules.conf"
    rules.write_text("[rules]\nassignment, left, identifier, variable\n",
                     encoding="utf-8")
    code, out, _ = run("serialize", balance_file, "--rules", str(rules))
    assert code == 0
    assert "variable [] balance" in out


def test_serialize_bad_rules_file(run, balance_file, tmp_path):
    rules = tmp_path / "rules.conf"
    rules.write_text("[rules]\nbad line\n", encoding="utf-8")
    code, _, err = run("serialize", balance_file, "--rules", str(rules))
    assert code == 2
    assert "bad rules file" in err


# ------------------------------------------------------------------- config

def test_config_supplies_defaults(run, balance_file, tmp_path):
    config = tmp_path / "astseq.conf"
    config.write_text("# settings\nkind = sbt\n", encoding="utf-8")
    code, out, _ = run("serialize", balance_file, "--config", str(config))
    assert code == 0
    assert out.startswith("(module")


def test_flags_beat_config(run, balance_file, tmp_path):
    config = tmp_path / "astseq.conf"
    config.write_text("kind = sbt\n", encoding="utf-8")
    code, out, _ = run("serialize", balance_file, "--config", str(config),
                       "--kind", "preorder")
    assert code == 0
    assert out.startswith("module function_definition")


def test_config_rejects_unknown_keys(run, balance_file, tmp_path):
    config = tmp_path / "astseq.conf"
    config.write_text("kind = sbt\nshade = mauve\n", encoding="utf-8")
    code, _, err = run("serialize", balance_file, "--config", str(config))
    assert code == 2
    assert "config line 2" in err


def test_config_missing_file(run, balance_file, tmp_path):
    code, _, err = run("serialize", balance_file, "--config",
                       str(tmp_path / "none.conf"))
    assert code == 2
    assert "cannot read config" in err


# ------------------------------------------------------------------ prepare

def test_prepare_summary_line_and_output(run, filter_fixture, tmp_path):
    raw, expected = filter_fixture
    out_path = tmp_path / "prepared.jsonl"
    rejects = tmp_path / "rejects.jsonl"
    code, out, _ = run("prepare", str(raw), "-o", str(out_path),
                       "--rejects", str(rejects))
    assert code == 0
    assert out.rstrip() == ("kept 4 rejected 8 (constructor 1, accessor 2, "
                            "test-case 2, short-summary 1, parse-failure 1, "
                            "duplicate 1)")

    kept_rows = [json.loads(line) for line in
                 out_path.read_text(encoding="utf-8").splitlines()]
    assert [row["id"] for row in kept_rows] == \
        [i for i, r in expected.items() if r is None]
    assert all(set(row) == {"id", "code", "docstring", "split"}
               for row in kept_rows)

    reject_rows = [json.loads(line) for line in
                   rejects.read_text(encoding="utf-8").splitlines()]
    assert {row["id"]: row["reason"] for row in reject_rows} == \
        {i: r for i, r in expected.items() if r is not None}


def test_prepare_json_summary(run, filter_fixture, tmp_path):
    raw, _ = filter_fixture
    out_path = tmp_path / "prepared.jsonl"
    code, out, _ = run("prepare", str(raw), "-o", str(out_path), "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["kept"] == 4
    assert payload["rejected"] == 8
    assert payload["reasons"] == {"constructor": 1, "accessor": 2,
                                  "test-case": 2, "short-summary": 1,
                                  "parse-failure": 1, "duplicate": 1}


def test_prepare_is_idempotent_via_cli(run, prepared_file, tmp_path):
    second = tmp_path / "second.jsonl"
    code, out, _ = run("prepare", prepared_file, "-o", str(second))
    assert code == 0
    assert out.rstrip() == "kept 4 rejected 0"
    # byte-identical, not just same-cardinality: rows keep the ids they
    # were assigned on the first pass even though line numbers shifted
    assert second.read_bytes() == Path(prepared_file).read_bytes()


def test_prepare_min_summary_words(run, filter_fixture, tmp_path):
    raw, _ = filter_fixture
    out_path = tmp_path / "prepared.jsonl"
    code, out, _ = run("prepare", str(raw), "-o", str(out_path),
                       "--min-summary-words", "100")
    assert code == 0
    assert "kept 0 rejected 12" in out
    assert "short-summary 7" in out


def test_prepare_min_summary_words_must_be_integer(run, filter_fixture,
                                                   tmp_path):
    raw, _ = filter_fixture
    code, _, err = run("prepare", str(raw), "-o", str(tmp_path / "x.jsonl"),
                       "--min-summary-words", "four")
    assert code == 2
    assert "must be an integer" in err


def test_prepare_sampling_is_deterministic(run, filter_fixture, tmp_path):
    raw, _ = filter_fixture
    first = tmp_path / "first.jsonl"
    second = tmp_path / "second.jsonl"
    for out_path in (first, second):
        code, _, _ = run("prepare", str(raw), "-o", str(out_path),
                         "--sample", "6", "--seed", "3")
        assert code == 0
    assert first.read_text(encoding="utf-8") == \
        second.read_text(encoding="utf-8")


def test_prepare_malformed_corpus_lines_are_counted(run, tmp_path):
    raw = tmp_path / "raw.jsonl"
    raw.write_text('broken\n{"code": "def f(): pass", '
                   '"docstring": "Keep this sample please."}\n',
                   encoding="utf-8")
    out_path = tmp_path / "prepared.jsonl"
    code, out, _ = run("prepare", str(raw), "-o", str(out_path))
    assert code == 0
    assert out.rstrip() == "kept 1 rejected 1 (malformed 1)"


# -------------------------------------------------------------------- stats

def test_stats_table(run, prepared_file):
    code, out, _ = run("stats", prepared_file)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["split", "count", "code", "min", "code",
                                "mean", "code", "max", "summary", "min",
                                "summary", "mean", "summary", "max"]
    assert lines[1].startswith("train")
    assert lines[1].split()[1] == "4"


def test_stats_json(run, prepared_file):
    code, out, _ = run("stats", prepared_file, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["tokenizer"] == "whitespace"
    row = payload["splits"][0]
    assert row["split"] == "train"
    assert row["count"] == 4
    assert set(row["code"]) == {"min", "mean", "max"}


def test_stats_rejects_malformed_corpus(run, tmp_path):
    raw = tmp_path / "raw.jsonl"
    raw.write_text("broken\n", encoding="utf-8")
    code, _, err = run("stats", str(raw))
    assert code == 2
    assert "run prepare first" in err


def test_stats_empty_corpus_prints_header_only(run, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    code, out, _ = run("stats", str(empty))
    assert code == 0
    assert len(out.splitlines()) == 1


# ------------------------------------------------------------------ compare

def test_compare_table_and_headline(run, prepared_file):
    code, out, _ = run("compare", prepared_file)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split()[:2] == ["kind", "samples"]
    kinds = [line.split()[0] for line in lines[1:5]]
    assert kinds == ["NIT", "SBT", "PREORDER", "CODE"]
    assert "NIT vs SBT:" in lines[5]
    # whitespace tokens: three structural tokens per record against
    # SBT's two markers, so the headline reports NIT as the longer form
    assert "% longer on average (whitespace tokens)" in lines[5]


def test_compare_headline_direction_flips_with_chars(run, prepared_file):
    code, out, _ = run("compare", prepared_file, "--tokenizer", "chars")
    assert code == 0
    assert "% shorter on average (chars tokens)" in out.splitlines()[5]


def test_compare_json_and_tokenizer_sign(run, prepared_file):
    code, out, _ = run("compare", prepared_file, "--json")
    assert code == 0
    whitespace = json.loads(out)
    assert len(whitespace["reductions"]) == 12
    # under whitespace tokens each record costs more than SBT's two
    # markers, so NIT is longer: the reduction is negative
    assert whitespace["nit_vs_sbt"] < 0

    code, out, _ = run("compare", prepared_file, "--json",
                       "--tokenizer", "chars")
    assert code == 0
    by_chars = json.loads(out)
    assert by_chars["tokenizer"] == "chars"
    # in characters the id/bracket overhead is smaller than repeating
    # every label twice: NIT comes out shorter
    assert by_chars["nit_vs_sbt"] > 0


def test_compare_empty_corpus_is_contract_error(run, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    code, _, err = run("compare", str(empty))
    assert code == 3
    assert "empty corpus" in err


# --------------------------------------------------------------------- eval

def eval_file(tmp_path, name, rows):
    path = tmp_path / name
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n",
                    encoding="utf-8")
    return str(path)


def test_eval_two_file_self_scores_perfect(run, tmp_path):
    rows = [{"id": "a", "summary": "Return the cached value."},
            {"id": "b", "summary": "Remove the lock file."}]
    cands = eval_file(tmp_path, "cands.jsonl", rows)
    refs = eval_file(tmp_path, "refs.jsonl", list(reversed(rows)))
    code, out, _ = run("eval", cands, refs, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["bleu4"] == pytest.approx(100.0)
    assert payload["rouge_l"] == pytest.approx(1.0)
    assert payload["count"] == 2
    assert [row["id"] for row in payload["per_sample"]] == ["a", "b"]


def test_eval_table_output(run, tmp_path):
    rows = [{"id": 1, "summary": "Compute the mean value."}]
    cands = eval_file(tmp_path, "c.jsonl", rows)
    refs = eval_file(tmp_path, "r.jsonl", rows)
    code, out, _ = run("eval", cands, refs)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["BLEU-4", "METEOR", "ROUGE-L"]
    assert lines[1].split() == ["100.00", "0.9922", "1.0000"]
    assert lines[2] == "samples: 1"


def test_eval_id_mismatch(run, tmp_path):
    cands = eval_file(tmp_path, "c.jsonl",
                      [{"id": "a", "summary": "First sentence here."}])
    refs = eval_file(tmp_path, "r.jsonl",
                     [{"id": "b", "summary": "First sentence here."}])
    code, _, err = run("eval", cands, refs)
    assert code == 3
    assert "ids do not match" in err
    assert "'a'" in err and "'b'" in err


def test_eval_duplicate_candidate_ids(run, tmp_path):
    rows = [{"id": "a", "summary": "One sentence here."},
            {"id": "a", "summary": "Another sentence here."}]
    cands = eval_file(tmp_path, "c.jsonl", rows)
    refs = eval_file(tmp_path, "r.jsonl", rows)
    code, _, err = run("eval", cands, refs)
    assert code == 3
    assert "duplicate ids" in err


def test_eval_single_file_mode(run, tmp_path):
    rows = [{"candidate": "Remove the lock file.",
             "reference": "Clean up files in the specified path."}]
    combined = eval_file(tmp_path, "pairs.jsonl", rows)
    code, out, _ = run("eval", combined, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 1
    assert payload["per_sample"][0]["id"] == "1"
    assert 0 < payload["per_sample"][0]["rouge_l"] < 1


def test_eval_single_file_custom_fields(run, tmp_path):
    rows = [{"id": "s", "guess": "Make a backup.", "gold": "Make a backup."}]
    combined = eval_file(tmp_path, "pairs.jsonl", rows)
    code, out, _ = run("eval", combined, "--candidate-field", "guess",
                       "--reference-field", "gold", "--json")
    assert code == 0
    assert json.loads(out)["bleu4"] == pytest.approx(100.0)


def test_eval_missing_field(run, tmp_path):
    combined = eval_file(tmp_path, "pairs.jsonl",
                         [{"candidate": "Only one side present."}])
    code, _, err = run("eval", combined)
    assert code == 2
    assert "missing field" in err


def test_eval_empty_file(run, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    code, _, err = run("eval", str(empty))
    assert code == 3
    assert "nothing to evaluate" in err


def test_eval_bad_json_line(run, tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("{oops\n", encoding="utf-8")
    code, _, err = run("eval", str(path))
    assert code == 2
    assert "bad JSON" in err


# ------------------------------------------------------------------- export

def test_export_writes_pairs(run, prepared_file, tmp_path):
    out_path = tmp_path / "pairs.jsonl"
    code, out, _ = run("export", prepared_file, "-o", str(out_path))
    assert code == 0
    assert out.rstrip() == f"wrote 4 pairs (NIT) to {out_path}"
    rows = [json.loads(line) for line in
            out_path.read_text(encoding="utf-8").splitlines()]
    assert len(rows) == 4
    assert all(set(row) == {"id", "input", "output", "repr"} for row in rows)
    assert all(row["repr"] == "NIT" for row in rows)
    assert all("{representation}" not in row["input"] for row in rows)


def test_export_kinds_share_ids_and_outputs(run, prepared_file, tmp_path):
    columns = {}
    for kind in ("nit", "sbt", "preorder", "code"):
        out_path = tmp_path / f"{kind}.jsonl"
        code, _, _ = run("export", prepared_file, "-o", str(out_path),
                         "--kind", kind)
        assert code == 0
        rows = [json.loads(line) for line in
                out_path.read_text(encoding="utf-8").splitlines()]
        columns[kind] = ([r["id"] for r in rows], [r["output"] for r in rows])
    baseline = columns["nit"]
    assert all(columns[k] == baseline for k in columns)


def test_export_custom_template(run, prepared_file, tmp_path):
    out_path = tmp_path / "pairs.jsonl"
    code, _, _ = run("export", prepared_file, "-o", str(out_path),
                     "--template", "CODE:\n{representation}\nDOC:")
    assert code == 0
    first = json.loads(out_path.read_text(encoding="utf-8").splitlines()[0])
    assert first["input"].startswith("CODE:\n")
    assert first["input"].endswith("\nDOC:")


def test_export_template_without_slot(run, prepared_file, tmp_path):
    code, _, err = run("export", prepared_file, "-o",
                       str(tmp_path / "x.jsonl"), "--template", "static")
    assert code == 2
    assert "representation" in err


def test_export_json_summary(run, prepared_file, tmp_path):
    out_path = tmp_path / "pairs.jsonl"
    code, out, _ = run("export", prepared_file, "-o", str(out_path),
                       "--kind", "sbt", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload == {"pairs": 4, "kind": "SBT", "output": str(out_path)}

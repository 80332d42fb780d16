"""HTTP endpoints: status codes, payload shapes, library agreement."""

import pytest
from fastapi.testclient import TestClient

from astseq import GRAMMAR_VERSION, serialize_source
from astseq.service import create_app

from conftest import BALANCE_SOURCE, NIT_GOLDEN_PREFIX


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    payload = response.json()
    assert payload["status"] == "ok"
    assert payload["grammar"] == "python"
    assert payload["grammar_version"] == GRAMMAR_VERSION


def test_serialize_matches_library(client):
    response = client.post("/serialize", json={"source": BALANCE_SOURCE})
    assert response.status_code == 200
    payload = response.json()
    assert payload["kind"] == "NIT"
    assert payload["text"].startswith(NIT_GOLDEN_PREFIX)
    assert payload["text"] == serialize_source(BALANCE_SOURCE, "NIT").text
    assert payload["token_count"] == len(payload["text"].split())


def test_serialize_kind_and_tokenizer(client):
    response = client.post("/serialize", json={
        "source": "x = 1", "kind": "sbt", "tokenizer": "chars"})
    assert response.status_code == 200
    payload = response.json()
    assert payload["kind"] == "SBT"
    assert payload["token_count"] == len(payload["text"])


def test_serialize_unparseable_source_is_422(client):
    response = client.post("/serialize", json={"source": "def broken(:"})
    assert response.status_code == 422
    assert "does not parse" in response.json()["detail"]
    assert "bytes 0..12" in response.json()["detail"]


def test_serialize_bad_kind_is_400(client):
    response = client.post("/serialize", json={"source": "x = 1",
                                               "kind": "xml"})
    assert response.status_code == 400
    assert "unknown representation" in response.json()["detail"]


def test_serialize_bad_tokenizer_is_400(client):
    response = client.post("/serialize", json={"source": "x = 1",
                                               "tokenizer": "bytes"})
    assert response.status_code == 400


def test_serialize_with_rules_text(client):
    rules = "[rules]\nassignment, left, identifier, variable\n"
    response = client.post("/serialize", json={"source": "balance = 0",
                                               "rules": rules})
    assert response.status_code == 200
    assert "variable [] balance" in response.json()["text"]


def test_serialize_bad_rules_text_is_400(client):
    response = client.post("/serialize", json={"source": "x = 1",
                                               "rules": "[rules]\nbad"})
    assert response.status_code == 400
    assert "bad rules" in response.json()["detail"]


def test_serialize_missing_source_is_422(client):
    response = client.post("/serialize", json={"kind": "nit"})
    assert response.status_code == 422


def test_filter_endpoint(client):
    samples = [
        {"code": "def f(a):\n    return a", "docstring":
            "Return the argument unchanged. Extra detail here."},
        {"code": "def __init__(self):\n    pass", "docstring":
            "Set up the empty instance."},
        {"id": "own-id", "code": "def g():\n    return 2", "docstring":
            "Too short."},
    ]
    response = client.post("/filter", json={"samples": samples})
    assert response.status_code == 200
    payload = response.json()
    kept = payload["kept"]
    assert len(kept) == 1
    assert kept[0]["id"] == "sample-1"
    # summary reduced to its first sentence on the way through
    assert kept[0]["docstring"] == "Return the argument unchanged."
    assert {r["id"]: r["reason"] for r in payload["rejected"]} == \
        {"sample-2": "constructor", "own-id": "short-summary"}
    assert payload["counts"] == {"constructor": 1, "short-summary": 1}


def test_filter_respects_min_summary_words(client):
    samples = [{"code": "def f():\n    return 1", "docstring": "Two words."}]
    strict = client.post("/filter", json={"samples": samples,
                                          "min_summary_words": 4})
    lax = client.post("/filter", json={"samples": samples,
                                       "min_summary_words": 2})
    assert strict.json()["counts"] == {"short-summary": 1}
    assert lax.json()["kept"][0]["id"] == "sample-1"


def test_eval_endpoint(client):
    pairs = [{"candidate": "Remove the lock file.",
              "reference": "Remove the lock file."},
             {"id": "named", "candidate": "Removes the directory.",
              "reference": "Clean up files in the specified path."}]
    response = client.post("/eval", json={"pairs": pairs})
    assert response.status_code == 200
    payload = response.json()
    assert payload["count"] == 2
    assert [row["id"] for row in payload["per_sample"]] == ["1", "named"]
    assert payload["per_sample"][0]["bleu4"] == pytest.approx(100.0)
    assert payload["per_sample"][0]["rouge_l"] == pytest.approx(1.0)
    assert 0.0 <= payload["meteor"] <= 1.0


def test_eval_empty_is_400(client):
    response = client.post("/eval", json={"pairs": []})
    assert response.status_code == 400


def test_compare_endpoint(client):
    response = client.post("/compare", json={
        "sources": ["def f(x):\n    return x + 1", "y = a * b"]})
    assert response.status_code == 200
    payload = response.json()
    kinds = [row["kind"] for row in payload["per_kind"]]
    assert kinds == ["NIT", "SBT", "PREORDER", "CODE"]
    assert all(row["sample_count"] == 2 for row in payload["per_kind"])
    assert len(payload["reductions"]) == 12
    assert payload["tokenizer"] == "whitespace"
    assert payload["nit_vs_sbt"] < 0  # NIT longer in whitespace tokens


def test_compare_unparseable_source_is_422(client):
    response = client.post("/compare", json={"sources": ["def broken(:"]})
    assert response.status_code == 422


def test_compare_empty_is_400(client):
    response = client.post("/compare", json={"sources": []})
    assert response.status_code == 400
    assert "empty corpus" in response.json()["detail"]

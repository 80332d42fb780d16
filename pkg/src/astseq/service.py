"""HTTP facade over the library: one endpoint per pipeline operation.

Requests carry raw source or samples inline; nothing touches the
filesystem. Bad representation kinds or tokenizer names are 400s;
source that fails to parse is a 422 with the error span in the detail.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import corpus, metrics
from .augment import RelabelRuleSet
from .parser import GRAMMAR_NAME, GRAMMAR_VERSION
from .serialize import SourceParseError, serialize_source
from .schemas import (CompareRequest, CompareResponse, EvalRequest,
                      EvalResponse, FilterRequest, FilterResponse,
                      HealthResponse, RejectedOut, ReprStatsOut,
                      ReductionOut, SampleIn, SampleScoreOut,
                      SerializeRequest, SerializeResponse)


def create_app() -> FastAPI:
    app = FastAPI(title="astseq", version=GRAMMAR_VERSION)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", grammar=GRAMMAR_NAME,
                              grammar_version=GRAMMAR_VERSION)

    @app.post("/serialize", response_model=SerializeResponse)
    def serialize(request: SerializeRequest) -> SerializeResponse:
        rules = None
        if request.rules is not None:
            try:
                rules = RelabelRuleSet.from_text(request.rules)
            except ValueError as exc:
                raise HTTPException(400, f"bad rules: {exc}")
        try:
            seq = serialize_source(request.source, request.kind, rules=rules,
                                   tokenizer=request.tokenizer)
        except SourceParseError as exc:
            raise HTTPException(422, str(exc))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return SerializeResponse(kind=seq.kind, text=seq.text,
                                 token_count=seq.token_count)

    @app.post("/filter", response_model=FilterResponse)
    def filter_samples(request: FilterRequest) -> FilterResponse:
        config = corpus.FilterConfig(
            min_summary_words=request.min_summary_words)
        raw = [corpus.Sample(s.id or f"sample-{i + 1}", s.code, s.docstring,
                             s.split)
               for i, s in enumerate(request.samples)]
        kept, rejected, counts = [], [], {}
        for sample in corpus.prepare(raw, config):
            if sample.status == corpus.KEPT:
                kept.append(SampleIn(id=sample.id, code=sample.code,
                                     docstring=sample.summary,
                                     split=sample.split))
            else:
                rejected.append(RejectedOut(id=sample.id,
                                            reason=sample.reason))
                counts[sample.reason] = counts.get(sample.reason, 0) + 1
        return FilterResponse(kept=kept, rejected=rejected, counts=counts)

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(request: EvalRequest) -> EvalResponse:
        if not request.pairs:
            raise HTTPException(400, "no pairs to evaluate")
        ids = [p.id or str(i + 1) for i, p in enumerate(request.pairs)]
        report = metrics.evaluate_corpus(
            [p.candidate for p in request.pairs],
            [p.reference for p in request.pairs], ids)
        return EvalResponse(
            bleu4=report.bleu4, meteor=report.meteor, rouge_l=report.rouge_l,
            count=len(report.per_sample),
            per_sample=[SampleScoreOut(**row.to_dict())
                        for row in report.per_sample])

    @app.post("/compare", response_model=CompareResponse)
    def compare(request: CompareRequest) -> CompareResponse:
        samples = [corpus.Sample(str(i + 1), source, "")
                   for i, source in enumerate(request.sources)]
        try:
            report = corpus.compare_representations(
                samples, tokenizer=request.tokenizer)
        except SourceParseError as exc:
            raise HTTPException(422, str(exc))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return CompareResponse(
            per_kind=[ReprStatsOut(kind=r.kind, sample_count=r.sample_count,
                                   total_tokens=r.total_tokens,
                                   avg_tokens=r.avg_tokens)
                      for r in report.per_kind],
            reductions=[ReductionOut(shorter=a, longer=b, percent=pct)
                        for a, b, pct in report.reductions],
            nit_vs_sbt=report.nit_vs_sbt, tokenizer=report.tokenizer)

    return app

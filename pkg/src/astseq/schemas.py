"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SerializeRequest(BaseModel):
    source: str
    kind: str = "nit"
    tokenizer: str = "whitespace"
    rules: str | None = Field(
        default=None, description="relabel rule file text; defaults apply "
                                  "when omitted")


class SerializeResponse(BaseModel):
    kind: str
    text: str
    token_count: int


class SampleIn(BaseModel):
    id: str | None = None
    code: str
    docstring: str
    split: str = "train"


class FilterRequest(BaseModel):
    samples: list[SampleIn]
    min_summary_words: int = 4


class RejectedOut(BaseModel):
    id: str
    reason: str


class FilterResponse(BaseModel):
    kept: list[SampleIn]
    rejected: list[RejectedOut]
    counts: dict[str, int]


class EvalPair(BaseModel):
    id: str | None = None
    candidate: str
    reference: str


class EvalRequest(BaseModel):
    pairs: list[EvalPair]


class SampleScoreOut(BaseModel):
    id: str
    bleu4: float
    meteor: float
    rouge_l: float


class EvalResponse(BaseModel):
    bleu4: float
    meteor: float
    rouge_l: float
    count: int
    per_sample: list[SampleScoreOut]


class CompareRequest(BaseModel):
    sources: list[str]
    tokenizer: str = "whitespace"


class ReprStatsOut(BaseModel):
    kind: str
    sample_count: int
    total_tokens: int
    avg_tokens: float


class ReductionOut(BaseModel):
    shorter: str
    longer: str
    percent: float


class CompareResponse(BaseModel):
    per_kind: list[ReprStatsOut]
    reductions: list[ReductionOut]
    nit_vs_sbt: float
    tokenizer: str


class HealthResponse(BaseModel):
    status: str
    grammar: str
    grammar_version: str

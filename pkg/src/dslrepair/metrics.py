"""Corpus-level evaluation: BLEU, validator pass rate, mean semantic score."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .core import DslError, Language
from .scoring import LanguageResources, semantic_score, validate_program

EPSILON = 1e-9

_TOKEN = re.compile(
    r"\"(?:[^\"\\]|\\.)*\""  # double-quoted literal
    r"|'(?:[^'\\]|\\.)*'"  # single-quoted literal
    r"|[A-Za-z0-9_]+"  # identifier / number
    r"|\S"  # any other symbol, one char at a time
)


class EmptyCorpusError(DslError):
    pass


def tokenize_code(text: str) -> list[str]:
    """Whitespace split, punctuation as single-char tokens, quoted strings kept whole."""
    return _TOKEN.findall(text)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(corpus, max_order: int = 4) -> float:
    """Corpus BLEU with add-epsilon smoothing and the standard brevity penalty."""
    pairs = list(corpus)
    if not pairs:
        raise EmptyCorpusError("BLEU needs at least one (prediction, reference) pair")

    matched = [0] * max_order
    totals = [0] * max_order
    pred_len = 0
    ref_len = 0
    for pred, ref in pairs:
        pred = list(pred)
        ref = list(ref)
        pred_len += len(pred)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            pred_counts = _ngram_counts(pred, n)
            ref_counts = _ngram_counts(ref, n)
            matched[n - 1] += sum(min(c, ref_counts[g]) for g, c in pred_counts.items())
            totals[n - 1] += max(len(pred) - n + 1, 0)

    log_sum = 0.0
    orders = 0
    for n in range(max_order):
        if totals[n] == 0:
            continue  # every prediction shorter than n+1 tokens
        orders += 1
        numerator = matched[n] if matched[n] > 0 else EPSILON
        log_sum += math.log(numerator / totals[n])
    precision = math.exp(log_sum / orders) if orders else 0.0

    if pred_len == 0:
        return 0.0
    bp = 1.0 if pred_len >= ref_len else math.exp(1.0 - ref_len / pred_len)
    return bp * precision


@dataclass
class EvalRecord:
    id: str
    query: str
    prediction: str
    ground_truth: str
    passed: bool = False
    parsed: bool = False
    ast_diff: float = 0.0


@dataclass
class EvalReport:
    bleu: float
    pass_rate: float
    mean_ast_diff: float
    total: int
    parsed: int
    passed: int
    records: list[EvalRecord] = field(default_factory=list)
    codebert_score: float | None = None  # reserved for external injection

    def to_dict(self) -> dict:
        out = {
            "bleu": self.bleu,
            "pass_rate": self.pass_rate,
            "mean_ast_diff": self.mean_ast_diff,
            "counts": {"total": self.total, "parsed": self.parsed, "passed": self.passed},
        }
        if self.codebert_score is not None:
            out["codebert_score"] = self.codebert_score
        return out


def evaluate_corpus(records, language: Language, resources: LanguageResources) -> EvalReport:
    """Validate and score every record, then aggregate; deterministic.

    `records` holds dicts with id, query, prediction, ground_truth.
    """
    evaluated: list[EvalRecord] = []
    for raw in records:
        rec = EvalRecord(
            id=str(raw["id"]),
            query=raw.get("query", ""),
            prediction=raw["prediction"],
            ground_truth=raw["ground_truth"],
        )
        try:
            rec.passed = validate_program(language, rec.prediction, resources).passed
        except DslError:
            rec.passed = False
        rec.ast_diff, rec.parsed = semantic_score(language, rec.ground_truth, rec.prediction)
        evaluated.append(rec)

    if not evaluated:
        raise EmptyCorpusError("evaluation corpus is empty")
    evaluated.sort(key=lambda r: r.id)

    pairs = [
        (tokenize_code(r.prediction), tokenize_code(r.ground_truth)) for r in evaluated
    ]
    parsed = [r for r in evaluated if r.parsed]
    return EvalReport(
        bleu=bleu(pairs),
        pass_rate=sum(1 for r in evaluated if r.passed) / len(evaluated),
        mean_ast_diff=(sum(r.ast_diff for r in parsed) / len(parsed)) if parsed else 0.0,
        total=len(evaluated),
        parsed=len(parsed),
        passed=sum(1 for r in evaluated if r.passed),
        records=evaluated,
    )

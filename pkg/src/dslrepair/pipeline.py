"""Generate -> validate -> repair orchestration and training-data synthesis."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .core import Diagnostic, Language, Span, ValidationReport, render_report
from .modelclient import BudgetError, TransportError, extract_code, get_template, render_prompt
from .scoring import LanguageResources, semantic_score, validate_program

log = logging.getLogger(__name__)

FEEDBACK_CAP = 4000  # characters of rendered diagnostics handed to the fixer


@dataclass
class RepairRecord:
    id: str
    query: str
    initial_program: str
    initial_report: ValidationReport
    feedback: str
    revised_program: str | None
    final_program: str
    final_report: ValidationReport
    repair_attempted: bool
    error: str | None = None


def report_to_dict(report: ValidationReport) -> dict:
    return {
        "passed": report.passed,
        "diagnostics": [
            {
                "code": d.code,
                "message": d.message,
                "span": [d.span.line, d.span.column] if d.span else None,
            }
            for d in report.diagnostics
        ],
    }


def report_from_dict(data: dict) -> ValidationReport:
    diags = [
        Diagnostic(
            d["code"],
            d["message"],
            Span(*d["span"]) if d.get("span") else None,
        )
        for d in data.get("diagnostics", [])
    ]
    return ValidationReport(passed=data["passed"], diagnostics=tuple(diags))


def record_to_dict(record: RepairRecord) -> dict:
    return {
        "id": record.id,
        "query": record.query,
        "initial_program": record.initial_program,
        "initial_report": report_to_dict(record.initial_report),
        "feedback": record.feedback,
        "revised_program": record.revised_program,
        "final_program": record.final_program,
        "final_report": report_to_dict(record.final_report),
        "repair_attempted": record.repair_attempted,
        "error": record.error,
    }


def repair_one(
    record_id: str,
    query: str,
    language: Language,
    generator,
    fixer,
    resources: LanguageResources,
    rounds: int = 1,
) -> RepairRecord:
    """One full pass of the inference flow for a single query."""
    gen_prompt = render_prompt(get_template("generate", language), {"task": query})
    try:
        reply = generator.complete(gen_prompt)
    except (TransportError, BudgetError) as exc:
        empty_report = ValidationReport.from_diagnostics([])
        return RepairRecord(
            id=record_id, query=query, initial_program="", initial_report=empty_report,
            feedback="", revised_program=None, final_program="",
            final_report=empty_report, repair_attempted=False, error=str(exc),
        )

    initial = extract_code(reply, language)
    initial_report = validate_program(language, initial, resources)

    feedback = ""
    revised: str | None = None
    final = initial
    final_report = initial_report
    attempted = False
    error: str | None = None

    if not initial_report.passed:
        attempted = True
        current, current_report = initial, initial_report
        for _ in range(rounds):
            feedback = render_report(current_report)[:FEEDBACK_CAP]
            fix_prompt = render_prompt(
                get_template("repair", language),
                {"query": query, "output": current, "feedback": feedback},
            )
            try:
                fix_reply = fixer.complete(fix_prompt)
            except (TransportError, BudgetError) as exc:
                error = str(exc)
                break
            current = extract_code(fix_reply, language)
            # the final report is always recomputed from the final text
            current_report = validate_program(language, current, resources)
            revised = current
            if current_report.passed:
                break
        final = revised if revised is not None else initial
        final_report = validate_program(language, final, resources)

    return RepairRecord(
        id=record_id,
        query=query,
        initial_program=initial,
        initial_report=initial_report,
        feedback=feedback,
        revised_program=revised,
        final_program=final,
        final_report=final_report,
        repair_attempted=attempted,
        error=error,
    )


def run_inference(
    queries,
    language: Language,
    generator,
    fixer,
    resources: LanguageResources,
    rounds: int = 1,
    concurrency: int = 4,
) -> list[RepairRecord]:
    """Repair every (id, query); output order matches input order."""
    items = list(queries)
    if not items:
        return []

    def work(item):
        record_id, query = item
        return repair_one(record_id, query, language, generator, fixer, resources, rounds)

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        return list(pool.map(work, items))


@dataclass
class SynthesisRecord:
    seed_id: str
    query: str
    ground_truth: str
    source_model: str
    sample_index: int
    candidate: str
    passed: bool
    semantic: float
    parsed: bool
    error: str | None = None


def _completed_keys(path: Path) -> set[tuple[str, str, int]]:
    keys = set()
    if path.is_file():
        with open(path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                keys.add((rec["seed_id"], rec["source_model"], rec["sample_index"]))
    return keys


def synthesize_dataset(
    seeds,
    language: Language,
    endpoints,
    samples_per_seed: int,
    resources: LanguageResources,
    out_path: str | Path | None = None,
) -> list[SynthesisRecord]:
    """Sample candidates per seed x endpoint, validate and score each one.

    `endpoints` is a list of (model_name, client).  With an out_path, records
    stream to JSONL as produced and completed (seed, model, sample) cells are
    skipped on rerun.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds must be non-empty")
    if samples_per_seed < 1:
        raise ValueError("samples_per_seed must be >= 1")

    out_file = Path(out_path) if out_path else None
    done = _completed_keys(out_file) if out_file else set()

    records: list[SynthesisRecord] = []
    for seed_id, query, ground_truth in seeds:
        for model_name, client in endpoints:
            for sample_index in range(samples_per_seed):
                if (seed_id, model_name, sample_index) in done:
                    continue
                prompt = render_prompt(get_template("generate", language), {"task": query})
                try:
                    reply = client.complete(prompt)
                except (TransportError, BudgetError) as exc:
                    log.warning(
                        "skipping seed=%s model=%s sample=%d: %s",
                        seed_id, model_name, sample_index, exc,
                    )
                    continue
                candidate = extract_code(reply, language)
                passed = validate_program(language, candidate, resources).passed
                semantic, parsed = semantic_score(language, ground_truth, candidate)
                record = SynthesisRecord(
                    seed_id=seed_id,
                    query=query,
                    ground_truth=ground_truth,
                    source_model=model_name,
                    sample_index=sample_index,
                    candidate=candidate,
                    passed=passed,
                    semantic=semantic,
                    parsed=parsed,
                )
                records.append(record)
                if out_file:
                    with open(out_file, "a") as fh:
                        fh.write(json.dumps(asdict(record)) + "\n")
    return records

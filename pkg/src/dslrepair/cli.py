"""Command-line surface for batch validation, scoring, repair, and evaluation.

Exit codes: 0 success, 1 domain failure (validation), 2 config or I/O error,
3 budget or transport failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import ansible, bash
from .config import ConfigError, RunConfig, config_manifest, load_run_config
from .core import Language, ParseError
from .metrics import evaluate_corpus
from .modelclient import Budget, BudgetError, TransportError, make_client
from .pipeline import record_to_dict, report_to_dict, run_inference, synthesize_dataset
from .reward import BatchItem, compute_rewards
from .scoring import LanguageResources, semantic_score, validate_program

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _language_option(fn):
    return click.option(
        "--language", "-l", required=True,
        type=click.Choice([lang.value for lang in Language]),
        callback=lambda ctx, param, value: Language(value),
    )(fn)


def _resources(language: Language, registry, schema, db_id, arity_table) -> LanguageResources:
    try:
        if arity_table:
            bash.set_default_arity_table(arity_table)
        return LanguageResources.for_language(
            language, registry_path=registry, schema_path=schema, db_id=db_id
        )
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(str(exc)) from exc


def _read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def _write_lines(lines, out: str | None):
    if out:
        with open(out, "w") as fh:
            for line in lines:
                fh.write(line + "\n")
    else:
        for line in lines:
            click.echo(line)


@click.group()
def main():
    """Validate, score, reward, repair, and evaluate DSL programs."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path())
@_language_option
@click.option("--registry", type=click.Path(), help="Ansible module registry JSON")
@click.option("--schema", type=click.Path(), help="database schema JSON (SQL)")
@click.option("--db-id", default=None, help="database id inside a Spider schema file")
@click.option("--arity-table", type=click.Path(), help="Bash option-arity table JSON")
@click.option("--out", type=click.Path(), help="write JSONL reports here instead of stdout")
def validate(files, language, registry, schema, db_id, arity_table, out):
    """Validate program files; exit 0 only if every file passes."""
    try:
        resources = _resources(language, registry, schema, db_id, arity_table)
        texts = [(f, Path(f).read_text()) for f in files]
    except (ConfigError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    lines = []
    all_passed = True
    for name, text in texts:
        report = validate_program(language, text, resources)
        all_passed = all_passed and report.passed
        lines.append(json.dumps({"file": name, **report_to_dict(report)}))
    _write_lines(lines, out)
    sys.exit(EXIT_OK if all_passed else EXIT_DOMAIN)


@main.command()
@click.option("--pairs", required=True, type=click.Path(), help="JSONL {id, ground_truth, prediction}")
@_language_option
@click.option("--out", type=click.Path())
def score(pairs, language, out):
    """Semantic similarity score for each (ground truth, prediction) pair."""
    try:
        records = _read_jsonl(pairs)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    lines = []
    for rec in records:
        value, parsed = semantic_score(language, rec["ground_truth"], rec["prediction"])
        lines.append(json.dumps({"id": rec["id"], "score": value, "parsed": parsed}))
    _write_lines(lines, out)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--batch", required=True, type=click.Path(), help="JSONL {id, passed, semantic}")
@click.option("--out", type=click.Path())
def reward(batch, out):
    """Adaptive batch rewards from validator verdicts and semantic scores."""
    try:
        records = _read_jsonl(batch)
        items = [BatchItem(str(r["id"]), bool(r["passed"]), float(r["semantic"])) for r in records]
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if not items:
        click.echo("error: empty batch", err=True)
        sys.exit(EXIT_CONFIG)
    result = compute_rewards(items)
    lines = [
        json.dumps({"id": item.id, "reward": value, "pass_rate": result.pass_rate})
        for item, value in zip(result.items, result.rewards)
    ]
    _write_lines(lines, out)
    sys.exit(EXIT_OK)


def _load_config_and_resources(config_path) -> tuple[RunConfig, LanguageResources]:
    config = load_run_config(config_path)
    if config.arity_table_path:
        bash.set_default_arity_table(config.arity_table_path)
    resources = LanguageResources.for_language(
        config.language,
        registry_path=config.registry_path,
        schema_path=config.schema_path,
        db_id=config.db_id,
    )
    return config, resources


@main.command()
@click.option("--queries", required=True, type=click.Path(), help="JSONL {id, query}")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--rounds", default=1, show_default=True, help="repair rounds per failing program")
@click.option("--out", type=click.Path(), help="output directory (records + manifest)")
def repair(queries, config_path, rounds, out):
    """Generate, validate, and repair programs for a batch of queries."""
    try:
        config, resources = _load_config_and_resources(config_path)
        records_in = _read_jsonl(queries)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    budget = Budget(config.request_budget)
    generator = make_client(config.generator, budget=budget)
    fixer = make_client(config.fixer, budget=budget)
    try:
        results = run_inference(
            [(str(r["id"]), r["query"]) for r in records_in],
            config.language,
            generator,
            fixer,
            resources,
            rounds=rounds,
            concurrency=config.concurrency,
        )
    except (BudgetError, TransportError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_BUDGET)

    lines = [json.dumps(record_to_dict(r)) for r in results]
    budget_hit = any(r.error for r in results)
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_lines(lines, str(out_dir / "repair_records.jsonl"))
        manifest = config_manifest(config)
        manifest["records"] = len(results)
        manifest["requests"] = budget.spent
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    else:
        _write_lines(lines, None)
    sys.exit(EXIT_BUDGET if budget_hit else EXIT_OK)


@main.command()
@click.option("--seeds", required=True, type=click.Path(), help="JSONL {id, query, ground_truth}")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--samples", default=3, show_default=True, help="samples per seed per endpoint")
@click.option("--out", type=click.Path(), help="output directory (records + manifest)")
def synth(seeds, config_path, samples, out):
    """Synthesize candidate programs from every configured endpoint."""
    try:
        config, resources = _load_config_and_resources(config_path)
        seed_records = _read_jsonl(seeds)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    budget = Budget(config.request_budget)
    endpoints = []
    raw_endpoints = config.raw.get("endpoints")
    if raw_endpoints:
        from .config import _endpoint  # reuse section parsing

        for section in raw_endpoints:
            cfg = _endpoint(section, config.request_budget, config.concurrency)
            endpoints.append((cfg.model or cfg.base_url, make_client(cfg, budget=budget)))
    else:
        endpoints.append(
            (config.generator.model or config.generator.base_url,
             make_client(config.generator, budget=budget))
        )

    out_path = None
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / "synthesis_records.jsonl"
    try:
        records = synthesize_dataset(
            [(str(r["id"]), r["query"], r["ground_truth"]) for r in seed_records],
            config.language,
            endpoints,
            samples_per_seed=samples,
            resources=resources,
            out_path=out_path,
        )
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    if out:
        manifest = config_manifest(config)
        manifest["records"] = len(records)
        manifest["requests"] = budget.spent
        (Path(out) / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    else:
        from dataclasses import asdict

        _write_lines([json.dumps(asdict(r)) for r in records], None)
    sys.exit(EXIT_OK)


@main.command(name="eval")
@click.option("--records", required=True, type=click.Path(),
              help="JSONL {id, language, query, prediction, ground_truth}")
@_language_option
@click.option("--registry", type=click.Path())
@click.option("--schema", type=click.Path())
@click.option("--db-id", default=None)
@click.option("--arity-table", type=click.Path())
@click.option("--out", type=click.Path(), help="write the JSON report here")
@click.option("--csv", "csv_path", type=click.Path(), help="per-record values as CSV")
@click.option("--figures", type=click.Path(), help="directory for rendered figures")
def eval_cmd(records, language, registry, schema, db_id, arity_table, out, csv_path, figures):
    """Corpus evaluation: BLEU, pass rate, and mean semantic score."""
    try:
        resources = _resources(language, registry, schema, db_id, arity_table)
        raw = _read_jsonl(records)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if not raw:
        click.echo("error: empty records file", err=True)
        sys.exit(EXIT_CONFIG)

    report = evaluate_corpus(raw, language, resources)
    payload = json.dumps(report.to_dict(), indent=2)
    if out:
        Path(out).write_text(payload + "\n")
    else:
        click.echo(payload)

    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "passed", "parsed", "ast_diff"])
            for rec in report.records:
                writer.writerow([rec.id, rec.passed, rec.parsed, f"{rec.ast_diff:.6f}"])
    if figures:
        from .figures import render_eval_figures

        for path in render_eval_figures(report, figures):
            click.echo(f"wrote {path}", err=True)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--playbook", required=True, type=click.Path())
@click.option("--root", required=True, type=click.Path(), help="role/collection directory tree")
@click.option("--inventory", type=click.Path(), help="inventory vars YAML/JSON map")
@click.option("--extra", type=click.Path(), help="extra vars YAML/JSON map")
@click.option("--out", type=click.Path())
def infill(playbook, root, inventory, extra, out):
    """Inline role tasks and substitute resolvable variables in a playbook."""
    import yaml

    def load_map(path):
        if not path:
            return {}
        data = yaml.safe_load(Path(path).read_text())
        return data if isinstance(data, dict) else {}

    try:
        text = Path(playbook).read_text()
        ctx = ansible.RoleContext(
            root=Path(root),
            inventory_vars=load_map(inventory),
            extra_vars=load_map(extra),
        )
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        pb = ansible.parse_playbook(text)
        result = ansible.infill_playbook(pb, ctx)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)
    except ansible.InfillError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    rendered = ansible.playbook_to_yaml(result.playbook)
    if out:
        Path(out).write_text(rendered)
    else:
        click.echo(rendered, nl=False)
    for diag in result.diagnostics:
        click.echo(diag.render(), err=True)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()

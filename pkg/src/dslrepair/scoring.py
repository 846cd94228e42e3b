"""Language dispatch: one validator and one semantic scorer per language."""

from __future__ import annotations

from dataclasses import dataclass

from . import ansible, bash, sql
from .core import DslError, Language, ParseError, ValidationReport


@dataclass
class LanguageResources:
    """External data the validators need; load only what the language uses."""

    registry: ansible.ModuleSpecRegistry | None = None
    schema: sql.DatabaseSchema | None = None

    @classmethod
    def for_language(
        cls,
        language: Language,
        registry_path=None,
        schema_path=None,
        db_id: str | None = None,
    ) -> "LanguageResources":
        if language is Language.ANSIBLE:
            return cls(registry=ansible.load_registry(registry_path))
        if language is Language.SQL:
            if schema_path is None:
                raise ValueError("SQL validation requires a schema file")
            return cls(schema=sql.load_schema(schema_path, db_id=db_id))
        return cls()


def validate_program(language: Language, text: str, resources: LanguageResources) -> ValidationReport:
    if language is Language.BASH:
        return bash.validate_bash(text)
    if language is Language.SQL:
        if resources.schema is None:
            raise ValueError("SQL validation requires resources.schema")
        return sql.validate_sql(text, resources.schema)
    if resources.registry is None:
        raise ValueError("Ansible validation requires resources.registry")
    try:
        playbook = ansible.parse_playbook(text)
    except ParseError as exc:
        return ValidationReport.from_diagnostics([exc.diagnostic])
    return ansible.validate_playbook(playbook, resources.registry)


def semantic_score(language: Language, gt_text: str, pred_text: str) -> tuple[float, bool]:
    """(score, parsed): parsed is False when either side fails to parse.

    Unparseable predictions score 0 so the metric is total over any corpus.
    """
    try:
        if language is Language.BASH:
            gt = bash.parse_bash(gt_text)
            pred = bash.parse_bash(pred_text)
            return bash.bash_score(gt, pred).value, True
        if language is Language.SQL:
            gt = sql.normalize_sql(sql.parse_sql(gt_text))
            pred = sql.normalize_sql(sql.parse_sql(pred_text))
            return sql.sql_score(gt, pred).value, True
        gt_pb = ansible.parse_playbook(gt_text)
        pred_pb = ansible.parse_playbook(pred_text)
        return ansible.playbook_score(gt_pb, pred_pb).value, True
    except DslError:
        return 0.0, False

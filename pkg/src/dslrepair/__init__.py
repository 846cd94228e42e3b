"""Validation, semantic scoring, adaptive rewards, and repair orchestration
for Ansible playbooks, Bash one-liners, and SQL queries."""

from .core import (
    Diagnostic,
    DslError,
    Language,
    ParseError,
    SemanticScore,
    SourceProgram,
    Span,
    ValidationReport,
    render_report,
)
from .reward import BatchItem, RewardBatch, compute_rewards

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "DslError",
    "Language",
    "ParseError",
    "SemanticScore",
    "SourceProgram",
    "Span",
    "ValidationReport",
    "render_report",
    "BatchItem",
    "RewardBatch",
    "compute_rewards",
    "__version__",
]

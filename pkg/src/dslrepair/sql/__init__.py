"""SQL parsing, normalization, schema validation, and edit-distance scoring."""

from .ast import Node, node_count, sexpr
from .parser import parse_sql, to_sql
from .normalize import normalize_sql
from .schema import DatabaseSchema, load_schema
from .validate import validate_sql
from .ted import tree_edit_distance

from ..core import SemanticScore


def sql_score(gt: Node, pred: Node, max_cost_product: int = 10**8) -> SemanticScore:
    """1 / (1 + d) where d is the tree edit distance between normalized ASTs."""
    d = tree_edit_distance(gt, pred, max_cost_product=max_cost_product)
    return SemanticScore(1.0 / (1.0 + d))


__all__ = [
    "Node",
    "node_count",
    "sexpr",
    "parse_sql",
    "to_sql",
    "normalize_sql",
    "DatabaseSchema",
    "load_schema",
    "validate_sql",
    "tree_edit_distance",
    "sql_score",
]

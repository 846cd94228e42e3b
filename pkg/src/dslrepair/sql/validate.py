"""Syntax plus schema-reference validation for SQL queries."""

from __future__ import annotations

from ..core import Diagnostic, ParseError, ValidationReport
from .ast import Node
from .parser import parse_sql
from .schema import DatabaseSchema


def _scope_tables(select: Node) -> tuple[dict[str, str], list[str], set[str]]:
    """(alias -> table, real tables, derived aliases) for one select scope."""
    aliases: dict[str, str] = {}
    tables: list[str] = []
    derived: set[str] = set()
    for clause in select.children:
        if clause.kind != "from":
            continue
        for ref in clause.children:
            target = ref.children[0] if ref.kind == "join" else ref
            if target.kind == "table":
                tables.append(target.label)
                if target.children:
                    aliases[target.children[0].label] = target.label
            elif target.kind == "derived" and target.label:
                derived.add(target.label)
    return aliases, tables, derived


def _check(node: Node, schema: DatabaseSchema, scopes: list, diagnostics: list[Diagnostic]):
    if node.kind == "select":
        scope = _scope_tables(node)
        for table in scope[1]:
            if not schema.has_table(table):
                diagnostics.append(
                    Diagnostic("SQL_UNKNOWN_TABLE", f"table {table!r} is not in the schema")
                )
        inner = scopes + [scope]
        for child in node.children:
            _check(child, schema, inner, diagnostics)
        return

    if node.kind == "column":
        if node.label == "*":
            return
        if node.children:
            qualifier = node.children[0].label
            for aliases, tables, derived in reversed(scopes):
                if qualifier in derived:
                    return  # columns of derived tables are not schema names
                table = aliases.get(qualifier, qualifier if qualifier in tables else None)
                if table is not None:
                    if schema.has_table(table) and not schema.has_column(table, node.label):
                        diagnostics.append(
                            Diagnostic(
                                "SQL_UNKNOWN_COLUMN",
                                f"column {node.label!r} is not in table {table!r}",
                            )
                        )
                    return
            # qualifier names a table that is not in any FROM clause
            if schema.has_table(qualifier):
                if not schema.has_column(qualifier, node.label):
                    diagnostics.append(
                        Diagnostic(
                            "SQL_UNKNOWN_COLUMN",
                            f"column {node.label!r} is not in table {qualifier!r}",
                        )
                    )
            else:
                diagnostics.append(
                    Diagnostic("SQL_UNKNOWN_TABLE", f"table {qualifier!r} is not in the schema")
                )
            return
        # unqualified: must exist in some in-scope table (ambiguity allowed)
        in_scope: list[str] = []
        has_derived = False
        for _, tables, derived in scopes:
            in_scope.extend(tables)
            has_derived = has_derived or bool(derived)
        known = [t for t in in_scope if schema.has_table(t)]
        if any(schema.has_column(t, node.label) for t in known):
            return
        if has_derived:
            return  # may come from a derived table's output; presence not decidable
        if known or not in_scope:
            diagnostics.append(
                Diagnostic(
                    "SQL_UNKNOWN_COLUMN",
                    f"column {node.label!r} is not in any table in scope",
                )
            )
        return

    for child in node.children:
        _check(child, schema, scopes, diagnostics)


def validate_sql(text: str, schema: DatabaseSchema) -> ValidationReport:
    """Parse and check that every referenced table/column exists in the schema."""
    try:
        ast = parse_sql(text)
    except ParseError as exc:
        return ValidationReport.from_diagnostics([exc.diagnostic])
    diagnostics: list[Diagnostic] = []
    _check(ast, schema, [], diagnostics)
    return ValidationReport.from_diagnostics(diagnostics)

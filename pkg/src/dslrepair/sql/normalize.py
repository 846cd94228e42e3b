"""AST normalization: alias removal, canonical AND ordering.

Normalized trees are what the edit-distance score compares, so two queries
that differ only in aliasing or AND operand order map to identical trees.
"""

from __future__ import annotations

from ..core import NormalizeError
from .ast import Node, sexpr


def _alias_map(select: Node) -> tuple[dict[str, str], set[str], set[str]]:
    """alias -> table for this scope, plus bare table names and derived aliases."""
    aliases: dict[str, str] = {}
    tables: set[str] = set()
    derived: set[str] = set()
    for clause in select.children:
        if clause.kind != "from":
            continue
        for ref in clause.children:
            target = ref.children[0] if ref.kind == "join" else ref
            if target.kind == "table":
                tables.add(target.label)
                if target.children:
                    aliases[target.children[0].label] = target.label
            elif target.kind == "derived" and target.label:
                derived.add(target.label)
    return aliases, tables, derived


def _rewrite(node: Node, scopes: list[tuple[dict, set, set]]) -> Node:
    if node.kind == "select":
        scope = _alias_map(node)
        inner_scopes = scopes + [scope]
        children = []
        for clause in node.children:
            if clause.kind == "selectlist":
                items = []
                for item in clause.children:
                    if item.kind == "colalias":  # drop the column alias binder
                        items.append(_rewrite(item.children[0], inner_scopes))
                    else:
                        items.append(_rewrite(item, inner_scopes))
                children.append(Node("selectlist", "", tuple(items)))
            else:
                children.append(_rewrite(clause, inner_scopes))
        return Node("select", node.label, tuple(children))

    if node.kind == "table":
        return Node("table", node.label)  # drop the alias binder

    if node.kind == "column" and node.children:
        qualifier = node.children[0].label
        for aliases, tables, derived in reversed(scopes):
            if qualifier in aliases:
                return Node("column", node.label, (Node("qualifier", aliases[qualifier]),))
            if qualifier in tables or qualifier in derived:
                return node
        raise NormalizeError(f"alias {qualifier!r} is referenced but never bound")

    if node.kind == "and":
        # flatten the maximal AND chain, canonicalize operand order
        operands: list[Node] = []

        def collect(n: Node):
            if n.kind == "and":
                collect(n.children[0])
                collect(n.children[1])
            else:
                operands.append(_rewrite(n, scopes))

        collect(node)
        operands.sort(key=sexpr)
        result = operands[0]
        for operand in operands[1:]:
            result = Node("and", "", (result, operand))
        return result

    return node.with_children(_rewrite(c, scopes) for c in node.children)


def normalize_sql(ast: Node) -> Node:
    """Return the canonical form of a parsed query tree."""
    return _rewrite(ast, [])

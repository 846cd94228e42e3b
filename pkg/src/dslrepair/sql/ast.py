"""Ordered-tree AST shared by the SQL parser, normalizer, and edit distance."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Node:
    kind: str
    label: str = ""
    children: tuple["Node", ...] = ()

    def with_children(self, children) -> "Node":
        return Node(self.kind, self.label, tuple(children))


def node_count(node: Node) -> int:
    return 1 + sum(node_count(c) for c in node.children)


def sexpr(node: Node) -> str:
    """Canonical s-expression; used for tree equality and canonical ordering."""
    head = f"{node.kind}:{node.label}" if node.label else node.kind
    if not node.children:
        return head
    return f"({head} {' '.join(sexpr(c) for c in node.children)})"

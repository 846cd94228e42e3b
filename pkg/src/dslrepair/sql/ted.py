"""Ordered-tree edit distance (Zhang & Shasha) with unit costs."""

from __future__ import annotations

from ..core import ResourceError
from .ast import Node


class _Annotated:
    """Postorder node labels, leftmost-leaf indices, and keyroots."""

    def __init__(self, root: Node):
        self.labels: list[tuple[str, str]] = []
        self.lmld: list[int] = []  # leftmost leaf descendant, postorder index

        def walk(node: Node) -> int:
            first_leaf = None
            for child in node.children:
                leaf = walk(child)
                if first_leaf is None:
                    first_leaf = leaf
            index = len(self.labels)
            self.labels.append((node.kind, node.label))
            self.lmld.append(first_leaf if first_leaf is not None else index)
            return self.lmld[index]

        walk(root)
        n = len(self.labels)
        # keyroots: nodes with no left sibling on the path to the root
        seen: set[int] = set()
        self.keyroots: list[int] = []
        for i in range(n - 1, -1, -1):
            if self.lmld[i] not in seen:
                self.keyroots.append(i)
                seen.add(self.lmld[i])
        self.keyroots.reverse()


def tree_edit_distance(a: Node, b: Node, max_cost_product: int = 10**8) -> int:
    """Minimum number of unit-cost node inserts, deletes, and relabels."""
    ta, tb = _Annotated(a), _Annotated(b)
    m, n = len(ta.labels), len(tb.labels)
    if m * n > max_cost_product:
        raise ResourceError(f"tree size product {m * n} exceeds bound {max_cost_product}")

    treedist = [[0] * n for _ in range(m)]
    la, lb = ta.lmld, tb.lmld

    for i in ta.keyroots:
        for j in tb.keyroots:
            _compute(ta, tb, i, j, treedist, la, lb)
    return treedist[m - 1][n - 1]


def _compute(ta, tb, i, j, treedist, la, lb):
    li, lj = la[i], lb[j]
    rows = i - li + 2
    cols = j - lj + 2
    fd = [[0] * cols for _ in range(rows)]
    for x in range(1, rows):
        fd[x][0] = fd[x - 1][0] + 1
    for y in range(1, cols):
        fd[0][y] = fd[0][y - 1] + 1
    for x in range(1, rows):
        px = li + x - 1  # postorder index in a
        for y in range(1, cols):
            py = lj + y - 1
            if la[px] == li and lb[py] == lj:
                rename = 0 if ta.labels[px] == tb.labels[py] else 1
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[x - 1][y - 1] + rename,
                )
                treedist[px][py] = fd[x][y]
            else:
                sx = la[px] - li
                sy = lb[py] - lj
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[sx][sy] + treedist[px][py],
                )

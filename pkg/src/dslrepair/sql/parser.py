"""Recursive-descent parser and renderer for the SELECT surface used here.

Covers: SELECT [DISTINCT], multi-table FROM, INNER/LEFT/RIGHT JOIN ... ON,
WHERE with AND/OR/NOT/IN/LIKE/BETWEEN/IS NULL/comparisons, aggregates,
GROUP BY, HAVING, ORDER BY, LIMIT/OFFSET, UNION/INTERSECT/EXCEPT, and
nested subqueries in WHERE and FROM.  Anything else is a syntax error.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core import Diagnostic, ParseError, Span
from .ast import Node

KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
    "OFFSET", "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS",
    "ON", "AS", "AND", "OR", "NOT", "IN", "LIKE", "BETWEEN", "IS", "NULL",
    "DISTINCT", "UNION", "INTERSECT", "EXCEPT", "ALL", "ASC", "DESC",
}

_CMP_OPS = ("<=", ">=", "<>", "!=", "=", "<", ">")
_PUNCT = ("(", ")", ",", ".", "+", "-", "*", "/", "%", ";")


@dataclass
class _Token:
    kind: str  # word | str | num | op | end
    text: str
    pos: int


def _span(text: str, pos: int) -> Span:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return Span(line, col)


def _syntax_error(text: str, pos: int, message: str) -> ParseError:
    return ParseError(Diagnostic("SQL_SYNTAX", message, _span(text, pos)))


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "'" or c == '"':
            quote = c
            j = i + 1
            buf = []
            while j < n:
                if text[j] == quote:
                    if text[j : j + 2] == quote * 2:  # doubled-quote escape
                        buf.append(quote)
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            if j >= n:
                raise _syntax_error(text, i, "unterminated string literal")
            tokens.append(_Token("str", "".join(buf), i))
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # `1.` followed by identifier is a qualified name, not a float
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            tokens.append(_Token("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("word", text[i:j], i))
            i = j
            continue
        for op in _CMP_OPS:
            if text.startswith(op, i):
                tokens.append(_Token("op", op, i))
                i += len(op)
                break
        else:
            if c in _PUNCT:
                tokens.append(_Token("op", c, i))
                i += 1
            else:
                raise _syntax_error(text, i, f"unexpected character {c!r}")
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers -----------------------------------------------------
    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.text.upper() in words

    def accept_keyword(self, *words: str) -> str | None:
        if self.at_keyword(*words):
            return self.advance().text.upper()
        return None

    def expect_keyword(self, word: str) -> None:
        if not self.accept_keyword(word):
            tok = self.peek()
            raise _syntax_error(self.text, tok.pos, f"expected {word}, found {tok.text or 'end of input'!r}")

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def accept_op(self, *ops: str) -> str | None:
        if self.at_op(*ops):
            return self.advance().text
        return None

    def expect_op(self, op: str) -> None:
        if not self.accept_op(op):
            tok = self.peek()
            raise _syntax_error(self.text, tok.pos, f"expected {op!r}, found {tok.text or 'end of input'!r}")

    def error(self, message: str) -> ParseError:
        return _syntax_error(self.text, self.peek().pos, message)

    def identifier(self, what: str) -> str:
        tok = self.peek()
        if tok.kind == "word" and tok.text.upper() not in KEYWORDS:
            self.advance()
            return tok.text.lower()
        raise _syntax_error(self.text, tok.pos, f"expected {what}, found {tok.text or 'end of input'!r}")

    # -- grammar -----------------------------------------------------------
    def parse(self) -> Node:
        node = self.query()
        self.accept_op(";")
        if self.peek().kind != "end":
            raise self.error(f"unexpected trailing input {self.peek().text!r}")
        return node

    def query(self) -> Node:
        left = self.select_core()
        while self.at_keyword("UNION", "INTERSECT", "EXCEPT"):
            op = self.advance().text.lower()
            if self.accept_keyword("ALL"):
                op += " all"
            right = self.select_core()
            left = Node("setop", op, (left, right))
        return left

    def select_core(self) -> Node:
        self.expect_keyword("SELECT")
        distinct = bool(self.accept_keyword("DISTINCT"))
        if self.at_keyword("FROM"):
            raise self.error("empty select list")
        items = [self.select_item()]
        while self.accept_op(","):
            items.append(self.select_item())
        clauses = [Node("selectlist", "", tuple(items))]

        self.expect_keyword("FROM")
        clauses.append(self.from_clause())
        if self.accept_keyword("WHERE"):
            clauses.append(Node("where", "", (self.expr(),)))
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            exprs = [self.expr()]
            while self.accept_op(","):
                exprs.append(self.expr())
            clauses.append(Node("groupby", "", tuple(exprs)))
        if self.accept_keyword("HAVING"):
            clauses.append(Node("having", "", (self.expr(),)))
        if self.accept_keyword("ORDER"):
            self.expect_keyword("BY")
            orders = [self.order_item()]
            while self.accept_op(","):
                orders.append(self.order_item())
            clauses.append(Node("orderby", "", tuple(orders)))
        if self.accept_keyword("LIMIT"):
            tok = self.peek()
            if tok.kind != "num":
                raise self.error("LIMIT expects an integer")
            self.advance()
            limit_children: tuple[Node, ...] = ()
            if self.accept_keyword("OFFSET"):
                off = self.peek()
                if off.kind != "num":
                    raise self.error("OFFSET expects an integer")
                self.advance()
                limit_children = (Node("offset", off.text),)
            clauses.append(Node("limit", tok.text, limit_children))
        return Node("select", "distinct" if distinct else "", tuple(clauses))

    def select_item(self) -> Node:
        if self.at_op("*"):
            self.advance()
            return Node("column", "*")
        expr = self.expr()
        if self.accept_keyword("AS"):
            alias = self.identifier("column alias")
            return Node("colalias", alias, (expr,))
        return expr

    def order_item(self) -> Node:
        expr = self.expr()
        direction = self.accept_keyword("ASC", "DESC") or "ASC"
        return Node("order", direction.lower(), (expr,))

    def from_clause(self) -> Node:
        refs = [self.table_ref()]
        while True:
            if self.accept_op(","):
                refs.append(self.table_ref())
                continue
            join_type = None
            if self.at_keyword("JOIN"):
                join_type = "inner"
                self.advance()
            elif self.at_keyword("INNER", "LEFT", "RIGHT", "FULL", "CROSS"):
                join_type = self.advance().text.lower()
                if join_type in ("left", "right", "full") and self.accept_keyword("OUTER"):
                    pass  # OUTER is implied; normalized away
                self.expect_keyword("JOIN")
            if join_type is None:
                break
            ref = self.table_ref()
            if join_type == "cross":
                refs.append(Node("join", "cross", (ref,)))
            else:
                self.expect_keyword("ON")
                refs.append(Node("join", join_type, (ref, self.expr())))
        return Node("from", "", tuple(refs))

    def table_ref(self) -> Node:
        if self.accept_op("("):
            inner = self.query()
            self.expect_op(")")
            alias = self._optional_alias()
            return Node("derived", alias or "", (inner,))
        name = self.identifier("table name")
        alias = self._optional_alias()
        children = (Node("alias", alias),) if alias else ()
        return Node("table", name, children)

    def _optional_alias(self) -> str | None:
        if self.accept_keyword("AS"):
            return self.identifier("alias")
        tok = self.peek()
        if tok.kind == "word" and tok.text.upper() not in KEYWORDS:
            self.advance()
            return tok.text.lower()
        return None

    # expressions, loosest binding first
    def expr(self) -> Node:
        return self.or_expr()

    def or_expr(self) -> Node:
        left = self.and_expr()
        while self.accept_keyword("OR"):
            left = Node("or", "", (left, self.and_expr()))
        return left

    def and_expr(self) -> Node:
        left = self.not_expr()
        while self.accept_keyword("AND"):
            left = Node("and", "", (left, self.not_expr()))
        return left

    def not_expr(self) -> Node:
        if self.accept_keyword("NOT"):
            return Node("not", "", (self.not_expr(),))
        return self.predicate()

    def predicate(self) -> Node:
        left = self.sum_expr()
        if self.accept_keyword("IS"):
            negated = bool(self.accept_keyword("NOT"))
            self.expect_keyword("NULL")
            return Node("is", "notnull" if negated else "null", (left,))
        negated = bool(self.accept_keyword("NOT"))
        if self.accept_keyword("IN"):
            self.expect_op("(")
            if self.at_keyword("SELECT"):
                rhs = Node("subquery", "", (self.query(),))
            else:
                items = [self.expr()]
                while self.accept_op(","):
                    items.append(self.expr())
                rhs = Node("exprlist", "", tuple(items))
            self.expect_op(")")
            return Node("notin" if negated else "in", "", (left, rhs))
        if self.accept_keyword("LIKE"):
            return Node("notlike" if negated else "like", "", (left, self.sum_expr()))
        if self.accept_keyword("BETWEEN"):
            lo = self.sum_expr()
            self.expect_keyword("AND")
            hi = self.sum_expr()
            return Node("notbetween" if negated else "between", "", (left, lo, hi))
        if negated:
            raise self.error("expected IN, LIKE, or BETWEEN after NOT")
        op = self.accept_op(*_CMP_OPS)
        if op:
            if op == "<>":
                op = "!="
            return Node("cmp", op, (left, self.sum_expr()))
        return left

    def sum_expr(self) -> Node:
        left = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            left = Node("arith", op, (left, self.term()))
        return left

    def term(self) -> Node:
        left = self.factor()
        while self.at_op("*", "/", "%"):
            op = self.advance().text
            left = Node("arith", op, (left, self.factor()))
        return left

    def factor(self) -> Node:
        if self.accept_op("-"):
            return Node("neg", "", (self.factor(),))
        if self.accept_op("+"):
            return self.factor()
        return self.primary()

    def primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Node("literal", tok.text)
        if tok.kind == "str":
            self.advance()
            # canonical single-quote form, regardless of source quoting style
            return Node("literal", "'" + tok.text.replace("'", "''") + "'")
        if self.accept_op("("):
            if self.at_keyword("SELECT"):
                inner = self.query()
                self.expect_op(")")
                return Node("subquery", "", (inner,))
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == "word":
            if tok.text.upper() == "NULL":
                self.advance()
                return Node("literal", "null")
            if tok.text.upper() in KEYWORDS and tok.text.upper() not in ("LEFT", "RIGHT"):
                raise self.error(f"unexpected keyword {tok.text!r}")
            name = self.advance().text.lower()
            if self.accept_op("("):
                return self._call(name)
            if self.accept_op("."):
                nxt = self.peek()
                if nxt.kind == "op" and nxt.text == "*":
                    self.advance()
                    return Node("column", "*", (Node("qualifier", name),))
                col = self.identifier("column name")
                return Node("column", col, (Node("qualifier", name),))
            return Node("column", name)
        raise self.error(f"unexpected token {tok.text or 'end of input'!r}")

    def _call(self, name: str) -> Node:
        children: list[Node] = []
        if self.accept_keyword("DISTINCT"):
            children.append(Node("distinct", ""))
        if self.at_op("*"):
            self.advance()
            children.append(Node("column", "*"))
        elif not self.at_op(")"):
            children.append(self.expr())
            while self.accept_op(","):
                children.append(self.expr())
        self.expect_op(")")
        return Node("func", name, tuple(children))


def parse_sql(text: str) -> Node:
    """Parse a query into an ordered AST; raises ParseError(SQL_SYNTAX)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# rendering back to SQL (used for round-trip checks and reports)

_PRECEDENCE = {
    "or": 1, "and": 2, "not": 3,
    "cmp": 4, "in": 4, "notin": 4, "like": 4, "notlike": 4,
    "between": 4, "notbetween": 4, "is": 4,
    "arith+": 5, "arith-": 5, "arith*": 6, "arith/": 6, "arith%": 6,
    "neg": 7,
}


def _prec(node: Node) -> int:
    if node.kind == "arith":
        return _PRECEDENCE[f"arith{node.label}"]
    return _PRECEDENCE.get(node.kind, 8)


def _render_expr(node: Node, parent_prec: int = 0) -> str:
    prec = _prec(node)
    text = _render_expr_inner(node)
    if prec < parent_prec:
        return f"({text})"
    return text


def _render_expr_inner(node: Node) -> str:
    kind = node.kind
    if kind == "literal":
        return node.label
    if kind == "column":
        if node.children:
            return f"{node.children[0].label}.{node.label}"
        return node.label
    if kind == "colalias":
        return f"{_render_expr(node.children[0])} AS {node.label}"
    if kind == "func":
        parts = []
        children = node.children
        if children and children[0].kind == "distinct":
            parts.append("DISTINCT")
            children = children[1:]
        args = ", ".join(_render_expr(c) for c in children)
        if parts:
            args = f"{parts[0]} {args}"
        return f"{node.label}({args})"
    if kind in ("or", "and"):
        prec = _prec(node)
        op = kind.upper()
        return f"{_render_expr(node.children[0], prec)} {op} {_render_expr(node.children[1], prec)}"
    if kind == "not":
        return f"NOT {_render_expr(node.children[0], _prec(node))}"
    if kind == "cmp":
        return f"{_render_expr(node.children[0], 5)} {node.label} {_render_expr(node.children[1], 5)}"
    if kind == "arith":
        prec = _prec(node)
        return f"{_render_expr(node.children[0], prec)} {node.label} {_render_expr(node.children[1], prec + 1)}"
    if kind == "neg":
        return f"-{_render_expr(node.children[0], _prec(node))}"
    if kind in ("in", "notin"):
        op = "NOT IN" if kind == "notin" else "IN"
        rhs = node.children[1]
        if rhs.kind == "subquery":
            inner = to_sql(rhs.children[0])
        else:
            inner = ", ".join(_render_expr(c) for c in rhs.children)
        return f"{_render_expr(node.children[0], 5)} {op} ({inner})"
    if kind in ("like", "notlike"):
        op = "NOT LIKE" if kind == "notlike" else "LIKE"
        return f"{_render_expr(node.children[0], 5)} {op} {_render_expr(node.children[1], 5)}"
    if kind in ("between", "notbetween"):
        op = "NOT BETWEEN" if kind == "notbetween" else "BETWEEN"
        e, lo, hi = node.children
        return f"{_render_expr(e, 5)} {op} {_render_expr(lo, 5)} AND {_render_expr(hi, 5)}"
    if kind == "is":
        op = "IS NOT NULL" if node.label == "notnull" else "IS NULL"
        return f"{_render_expr(node.children[0], 5)} {op}"
    if kind == "subquery":
        return f"({to_sql(node.children[0])})"
    raise ValueError(f"cannot render node kind {kind!r}")


def _render_table_ref(node: Node) -> str:
    if node.kind == "table":
        if node.children:
            return f"{node.label} AS {node.children[0].label}"
        return node.label
    if node.kind == "derived":
        inner = f"({to_sql(node.children[0])})"
        return f"{inner} AS {node.label}" if node.label else inner
    raise ValueError(f"cannot render table ref {node.kind!r}")


def to_sql(node: Node) -> str:
    """Render an AST back to SQL text; parse(to_sql(t)) == t for parser output."""
    if node.kind == "setop":
        op = node.label.upper()
        return f"{to_sql(node.children[0])} {op} {to_sql(node.children[1])}"
    if node.kind != "select":
        return _render_expr(node)

    parts = ["SELECT"]
    if node.label == "distinct":
        parts.append("DISTINCT")
    for clause in node.children:
        if clause.kind == "selectlist":
            parts.append(", ".join(_render_expr(c) for c in clause.children))
        elif clause.kind == "from":
            out = ""
            for ref in clause.children:
                if ref.kind == "join":
                    if ref.label == "cross":
                        piece = f"CROSS JOIN {_render_table_ref(ref.children[0])}"
                    else:
                        op = "JOIN" if ref.label == "inner" else f"{ref.label.upper()} JOIN"
                        piece = f"{op} {_render_table_ref(ref.children[0])} ON {_render_expr(ref.children[1])}"
                    out += f" {piece}"
                elif out:
                    out += f", {_render_table_ref(ref)}"
                else:
                    out = _render_table_ref(ref)
            parts.append("FROM " + out)
        elif clause.kind == "where":
            parts.append("WHERE " + _render_expr(clause.children[0]))
        elif clause.kind == "groupby":
            parts.append("GROUP BY " + ", ".join(_render_expr(c) for c in clause.children))
        elif clause.kind == "having":
            parts.append("HAVING " + _render_expr(clause.children[0]))
        elif clause.kind == "orderby":
            items = [f"{_render_expr(c.children[0])} {c.label.upper()}" for c in clause.children]
            parts.append("ORDER BY " + ", ".join(items))
        elif clause.kind == "limit":
            limit = f"LIMIT {clause.label}"
            if clause.children:
                limit += f" OFFSET {clause.children[0].label}"
            parts.append(limit)
    return " ".join(parts)

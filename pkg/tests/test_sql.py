import json

import pytest

from dslrepair.core import NormalizeError, ParseError
from dslrepair.sql import (
    DatabaseSchema,
    Node,
    load_schema,
    node_count,
    normalize_sql,
    parse_sql,
    sexpr,
    sql_score,
    to_sql,
    tree_edit_distance,
    validate_sql,
)


class TestParser:
    def test_simple_select_shape(self):
        ast = parse_sql("SELECT name FROM users")
        assert ast.kind == "select"
        clauses = {c.kind for c in ast.children}
        assert clauses == {"selectlist", "from"}

    def test_keywords_case_insensitive_identifiers_lowercased(self):
        assert parse_sql("select Name from Users") == parse_sql("SELECT name FROM users")

    def test_distinct_marks_select(self):
        assert parse_sql("SELECT DISTINCT a FROM t").label == "distinct"
        assert parse_sql("SELECT a FROM t").label == ""

    def test_string_literals_canonicalized(self):
        single = parse_sql("SELECT * FROM t WHERE a = 'it''s'")
        double = parse_sql('SELECT * FROM t WHERE a = "it\'s"')
        assert single == double

    def test_comparison_operator_normalization(self):
        assert parse_sql("SELECT * FROM t WHERE a <> 1") == parse_sql(
            "SELECT * FROM t WHERE a != 1"
        )

    def test_and_or_precedence(self):
        ast = parse_sql("SELECT * FROM t WHERE a = 1 OR b = 2 AND c = 3")
        where = next(c for c in ast.children if c.kind == "where")
        assert where.children[0].kind == "or"
        assert where.children[0].children[1].kind == "and"

    def test_arithmetic_precedence(self):
        ast = parse_sql("SELECT a + b * c FROM t")
        item = next(c for c in ast.children if c.kind == "selectlist").children[0]
        assert item.label == "+"
        assert item.children[1].label == "*"

    def test_left_outer_join_normalized(self):
        assert parse_sql("SELECT * FROM a LEFT OUTER JOIN b ON a.x = b.x") == parse_sql(
            "SELECT * FROM a LEFT JOIN b ON a.x = b.x"
        )

    def test_order_by_defaults_to_asc(self):
        assert parse_sql("SELECT a FROM t ORDER BY a") == parse_sql(
            "SELECT a FROM t ORDER BY a ASC"
        )

    def test_limit_offset(self):
        ast = parse_sql("SELECT a FROM t LIMIT 10 OFFSET 5")
        limit = next(c for c in ast.children if c.kind == "limit")
        assert limit.label == "10"
        assert limit.children[0] == Node("offset", "5")

    def test_subquery_in_where(self):
        ast = parse_sql("SELECT a FROM t WHERE a IN (SELECT b FROM u)")
        where = next(c for c in ast.children if c.kind == "where")
        assert where.children[0].kind == "in"
        assert where.children[0].children[1].kind == "subquery"

    def test_derived_table(self):
        ast = parse_sql("SELECT * FROM (SELECT a FROM t) AS d")
        from_clause = next(c for c in ast.children if c.kind == "from")
        assert from_clause.children[0].kind == "derived"
        assert from_clause.children[0].label == "d"

    def test_union_chain(self):
        ast = parse_sql("SELECT a FROM t UNION ALL SELECT a FROM u")
        assert ast.kind == "setop" and ast.label == "union all"

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as err:
            parse_sql("SELECT * FORM users")
        diag = err.value.diagnostic
        assert diag.code == "SQL_SYNTAX"
        assert diag.span is not None and diag.span.line == 1

    def test_round_trip_over_corpus(self, sql_corpus):
        for text in sql_corpus["valid"]:
            ast = parse_sql(text)
            assert parse_sql(to_sql(ast)) == ast, text


class TestAstHelpers:
    def test_node_count(self):
        tree = Node("n", "a", (Node("n", "b"), Node("n", "c", (Node("n", "d"),))))
        assert node_count(tree) == 4

    def test_sexpr_is_canonical_and_distinct(self):
        a = Node("n", "a", (Node("n", "b"),))
        b = Node("n", "a", (Node("n", "c"),))
        assert sexpr(a) != sexpr(b)
        assert sexpr(a) == sexpr(Node("n", "a", (Node("n", "b"),)))


class TestNormalize:
    def norm(self, text):
        return normalize_sql(parse_sql(text))

    def test_table_alias_replaced_by_table_name(self):
        assert self.norm("SELECT u.name FROM users u") == self.norm(
            "SELECT users.name FROM users"
        )

    def test_alias_binder_dropped(self):
        assert self.norm("SELECT name FROM users AS u") == self.norm(
            "SELECT name FROM users"
        )

    def test_column_alias_dropped(self):
        assert self.norm("SELECT name AS n FROM users") == self.norm(
            "SELECT name FROM users"
        )

    def test_and_chain_sorted(self):
        assert self.norm("SELECT * FROM t WHERE a = 1 AND b = 2") == self.norm(
            "SELECT * FROM t WHERE b = 2 AND a = 1"
        )

    def test_three_way_and_chain_sorted(self):
        variants = [
            "SELECT * FROM t WHERE a = 1 AND b = 2 AND c = 3",
            "SELECT * FROM t WHERE c = 3 AND a = 1 AND b = 2",
            "SELECT * FROM t WHERE b = 2 AND c = 3 AND a = 1",
        ]
        normalized = {self.norm(v) for v in variants}
        assert len(normalized) == 1

    def test_or_chain_not_reordered(self):
        # OR ordering is preserved: only AND chains are commutative here
        left = self.norm("SELECT * FROM t WHERE a = 1 OR b = 2")
        right = self.norm("SELECT * FROM t WHERE b = 2 OR a = 1")
        assert left != right

    def test_nested_scope_aliases(self):
        a = self.norm(
            "SELECT u.name FROM users u WHERE u.user_id IN "
            "(SELECT o.user_id FROM orders o)"
        )
        b = self.norm(
            "SELECT users.name FROM users WHERE users.user_id IN "
            "(SELECT orders.user_id FROM orders)"
        )
        assert a == b

    def test_unbound_qualifier_rejected(self):
        with pytest.raises(NormalizeError):
            self.norm("SELECT ghost.name FROM users")


class TestSchema:
    def test_native_loader(self, schema):
        assert schema.has_table("singer")
        assert schema.has_column("singer", "age")
        assert not schema.has_column("singer", "salary")
        assert schema.any_table_with_column("name")

    def test_names_lowercased(self):
        s = DatabaseSchema(tables={"Users": {"Name": "text"}})
        assert s.has_table("users") and s.has_column("USERS", "NAME")

    def test_foreign_key_endpoints_validated(self):
        with pytest.raises(ValueError, match="foreign key endpoint"):
            DatabaseSchema(tables={"a": {"x": "number"}}, foreign_keys=[("a.x", "b.y")])

    def test_spider_format(self, tmp_path):
        entry = {
            "db_id": "toy",
            "table_names_original": ["Pets"],
            "column_names_original": [[-1, "*"], [0, "PetId"], [0, "Name"]],
            "column_types": ["text", "number", "text"],
            "foreign_keys": [],
        }
        path = tmp_path / "tables.json"
        path.write_text(json.dumps([entry]))
        schema = load_schema(path, db_id="toy")
        assert schema.has_column("pets", "petid")

    def test_spider_multiple_requires_db_id(self, tmp_path):
        entry = {
            "db_id": "a",
            "table_names_original": ["T"],
            "column_names_original": [[-1, "*"], [0, "x"]],
            "column_types": ["text", "number"],
        }
        path = tmp_path / "tables.json"
        path.write_text(json.dumps([entry, {**entry, "db_id": "b"}]))
        with pytest.raises(ValueError, match="db_id"):
            load_schema(path)
        assert load_schema(path, db_id="b").has_table("t")


class TestValidate:
    def test_valid_query_passes(self, schema):
        assert validate_sql("SELECT name FROM singer WHERE age > 30", schema).passed

    def test_unknown_table(self, schema):
        report = validate_sql("SELECT * FROM ghosts", schema)
        assert not report.passed
        assert report.diagnostics[0].code == "SQL_UNKNOWN_TABLE"

    def test_unknown_column_qualified(self, schema):
        report = validate_sql("SELECT singer.salary FROM singer", schema)
        assert [d.code for d in report.diagnostics] == ["SQL_UNKNOWN_COLUMN"]

    def test_unknown_column_unqualified(self, schema):
        report = validate_sql("SELECT salary FROM singer", schema)
        assert [d.code for d in report.diagnostics] == ["SQL_UNKNOWN_COLUMN"]

    def test_alias_resolves_to_table(self, schema):
        assert validate_sql("SELECT s.age FROM singer s", schema).passed
        report = validate_sql("SELECT s.salary FROM singer s", schema)
        assert [d.code for d in report.diagnostics] == ["SQL_UNKNOWN_COLUMN"]

    def test_derived_table_columns_skipped(self, schema):
        text = "SELECT d.anything FROM (SELECT age FROM singer) d"
        assert validate_sql(text, schema).passed

    def test_outer_scope_visible_in_subquery(self, schema):
        text = (
            "SELECT name FROM singer WHERE singer_id IN "
            "(SELECT singer_id FROM singer_in_concert WHERE singer.age > 30)"
        )
        assert validate_sql(text, schema).passed

    def test_syntax_error_reported(self, schema):
        report = validate_sql("SELECT FROM", schema)
        assert not report.passed
        assert report.diagnostics[0].code == "SQL_SYNTAX"


class TestScore:
    def test_identical_scores_one(self):
        ast = normalize_sql(parse_sql("SELECT name FROM users"))
        assert sql_score(ast, ast).value == 1.0

    def test_one_edit_scores_half(self):
        a = normalize_sql(parse_sql("SELECT name FROM users"))
        b = normalize_sql(parse_sql("SELECT email FROM users"))
        assert tree_edit_distance(a, b) == 1
        assert sql_score(a, b).value == pytest.approx(0.5)

    def test_score_decreases_with_distance(self):
        base = normalize_sql(parse_sql("SELECT name FROM users"))
        near = normalize_sql(parse_sql("SELECT email FROM users"))
        far = normalize_sql(parse_sql("SELECT age, city FROM orders WHERE total > 5"))
        assert sql_score(base, near).value > sql_score(base, far).value

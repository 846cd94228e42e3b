"""Database schema model and loaders (native JSON and Spider tables.json)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class DatabaseSchema:
    # table name -> column name -> type tag; all names lowercase
    tables: dict[str, dict[str, str]]
    primary_keys: dict[str, list[str]] = field(default_factory=dict)
    foreign_keys: list[tuple[str, str]] = field(default_factory=list)  # "t.c" -> "t.c"

    def __post_init__(self):
        self.tables = {
            t.lower(): {c.lower(): ty for c, ty in cols.items()}
            for t, cols in self.tables.items()
        }
        for src, dst in self.foreign_keys:
            for endpoint in (src, dst):
                t, _, c = endpoint.lower().partition(".")
                if t not in self.tables or c not in self.tables[t]:
                    raise ValueError(f"foreign key endpoint {endpoint!r} not in schema")

    def has_table(self, name: str) -> bool:
        return name.lower() in self.tables

    def has_column(self, table: str, column: str) -> bool:
        return column.lower() in self.tables.get(table.lower(), {})

    def any_table_with_column(self, column: str) -> bool:
        column = column.lower()
        return any(column in cols for cols in self.tables.values())


def _from_spider(entry: dict) -> DatabaseSchema:
    table_names = [t.lower() for t in entry["table_names_original"]]
    tables: dict[str, dict[str, str]] = {t: {} for t in table_names}
    columns: list[tuple[int, str]] = []
    types = entry.get("column_types", [])
    for idx, (tbl_idx, col_name) in enumerate(entry["column_names_original"]):
        columns.append((tbl_idx, col_name.lower()))
        if tbl_idx >= 0 and col_name != "*":
            ty = types[idx] if idx < len(types) else "text"
            tables[table_names[tbl_idx]][col_name.lower()] = ty
    fks = []
    for src, dst in entry.get("foreign_keys", []):
        s_tbl, s_col = columns[src]
        d_tbl, d_col = columns[dst]
        fks.append((f"{table_names[s_tbl]}.{s_col}", f"{table_names[d_tbl]}.{d_col}"))
    return DatabaseSchema(tables=tables, foreign_keys=fks)


def load_schema(path: str | Path, db_id: str | None = None) -> DatabaseSchema:
    """Load a schema from native JSON or a Spider tables.json entry."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, list):  # Spider tables.json: a list of database entries
        if db_id is None:
            if len(data) != 1:
                raise ValueError("Spider schema file holds several databases; pass db_id")
            return _from_spider(data[0])
        for entry in data:
            if entry.get("db_id") == db_id:
                return _from_spider(entry)
        raise ValueError(f"database {db_id!r} not found in schema file")
    if "column_names_original" in data:
        return _from_spider(data)
    return DatabaseSchema(
        tables=data["tables"],
        primary_keys=data.get("primary_keys", {}),
        foreign_keys=[tuple(fk) for fk in data.get("foreign_keys", [])],
    )

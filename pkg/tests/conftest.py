import json
from pathlib import Path

import pytest

from dslrepair import ansible, sql
from dslrepair.scoring import LanguageResources

DATA_DIR = Path(__file__).parent / "data"


def load_json(name: str):
    return json.loads((DATA_DIR / name).read_text())


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def schema_path() -> Path:
    return DATA_DIR / "schema.json"


@pytest.fixture(scope="session")
def schema(schema_path):
    return sql.load_schema(schema_path)


@pytest.fixture(scope="session")
def registry():
    return ansible.load_registry()


@pytest.fixture(scope="session")
def sql_resources(schema) -> LanguageResources:
    return LanguageResources(schema=schema)


@pytest.fixture(scope="session")
def ansible_resources(registry) -> LanguageResources:
    return LanguageResources(registry=registry)


@pytest.fixture(scope="session")
def bash_resources() -> LanguageResources:
    return LanguageResources()


@pytest.fixture(scope="session")
def sql_corpus():
    return load_json("corpus_sql.json")


@pytest.fixture(scope="session")
def bash_corpus():
    return load_json("corpus_bash.json")


@pytest.fixture(scope="session")
def ansible_corpus():
    return load_json("corpus_ansible.json")


@pytest.fixture(scope="session")
def alias_pairs():
    return load_json("alias_pairs.json")

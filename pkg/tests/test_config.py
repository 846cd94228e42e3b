import pytest

from dslrepair.config import ConfigError, config_manifest, load_run_config
from dslrepair.core import Language


def write_config(tmp_path, body: str):
    path = tmp_path / "run.toml"
    path.write_text(body)
    return path


MINIMAL = """
language = "bash"

[generator]
base_url = "mock://"

[fixer]
base_url = "mock://"
"""


def test_minimal_config(tmp_path):
    config = load_run_config(write_config(tmp_path, MINIMAL))
    assert config.language is Language.BASH
    assert config.generator.base_url == "mock://"
    assert config.concurrency == 4
    assert config.request_budget == 500


def test_full_config(tmp_path, monkeypatch):
    schema = tmp_path / "schema.json"
    schema.write_text('{"tables": {}}')
    monkeypatch.setenv("MY_KEY_VAR", "OPENAI_KEY")
    body = f"""
language = "sql"
concurrency = 2
request_budget = 10
seed = 42
output_dir = "out"

[resources]
schema = "{schema}"
db_id = "concerts"

[generator]
base_url = "http://host/v1"
model = "gen-model"
temperature = 0.7
max_tokens = 256
api_key_env = "${{MY_KEY_VAR}}"

[fixer]
base_url = "http://host/v1"
model = "fix-model"
"""
    config = load_run_config(write_config(tmp_path, body))
    assert config.language is Language.SQL
    assert config.generator.model == "gen-model"
    assert config.generator.temperature == 0.7
    assert config.generator.api_key_env == "OPENAI_KEY"
    assert config.schema_path == str(schema)
    assert config.db_id == "concerts"
    assert config.seed == 42
    assert config.generator.request_budget == 10


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "nope.toml")


def test_missing_language(tmp_path):
    with pytest.raises(ConfigError, match="language"):
        load_run_config(write_config(tmp_path, '[generator]\nbase_url = "mock://"\n'))


def test_unknown_language(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(write_config(tmp_path, 'language = "perl"\n'))


def test_missing_base_url(tmp_path):
    body = 'language = "bash"\n\n[generator]\nmodel = "m"\n'
    with pytest.raises(ConfigError, match="base_url"):
        load_run_config(write_config(tmp_path, body))


def test_nonexistent_resource_rejected(tmp_path):
    body = MINIMAL + '\n[resources]\nregistry = "/does/not/exist.json"\n'
    with pytest.raises(ConfigError, match="registry"):
        load_run_config(write_config(tmp_path, body))


def test_unset_env_var_rejected(tmp_path, monkeypatch):
    monkeypatch.delenv("SURELY_UNSET_VAR", raising=False)
    body = (
        'language = "bash"\n\n[generator]\nbase_url = "mock://"\n'
        'api_key_env = "${SURELY_UNSET_VAR}"\n\n[fixer]\nbase_url = "mock://"\n'
    )
    with pytest.raises(ConfigError, match="SURELY_UNSET_VAR"):
        load_run_config(write_config(tmp_path, body))


def test_manifest_is_complete_and_serializable(tmp_path):
    import json

    config = load_run_config(write_config(tmp_path, MINIMAL))
    manifest = config_manifest(config)
    assert json.loads(json.dumps(manifest)) == manifest
    assert manifest["language"] == "bash"
    assert manifest["generator"]["base_url"] == "mock://"
    assert manifest["request_budget"] == 500

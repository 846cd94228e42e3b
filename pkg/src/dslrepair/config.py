"""Run configuration: TOML file with env-var interpolation for secrets."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .core import Language
from .modelclient import EndpointConfig

# env interpolation is applied to secret-bearing keys only (api_key_env)
_ENV_REF = re.compile(r"\$\{(\w+)\}")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    language: Language
    generator: EndpointConfig
    fixer: EndpointConfig
    registry_path: str | None = None
    arity_table_path: str | None = None
    schema_path: str | None = None
    db_id: str | None = None
    output_dir: str = "."
    concurrency: int = 4
    request_budget: int = 500
    seed: int = 0
    raw: dict = field(default_factory=dict)


def _interpolate(value: str) -> str:
    def repl(m):
        name = m.group(1)
        if name not in os.environ:
            raise ConfigError(f"environment variable {name!r} is not set")
        return os.environ[name]

    return _ENV_REF.sub(repl, value)


def _endpoint(section: dict, budget: int, concurrency: int) -> EndpointConfig:
    if "base_url" not in section:
        raise ConfigError("endpoint section must set base_url")
    api_key_env = section.get("api_key_env", "DSLREPAIR_API_KEY")
    if isinstance(api_key_env, str):
        api_key_env = _interpolate(api_key_env)
    return EndpointConfig(
        base_url=section["base_url"],
        model=section.get("model", ""),
        api_key_env=api_key_env,
        temperature=float(section.get("temperature", 0.0)),
        max_tokens=int(section.get("max_tokens", 1024)),
        timeout=float(section.get("timeout", 60.0)),
        max_retries=int(section.get("max_retries", 3)),
        request_budget=budget,
        concurrency=concurrency,
    )


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        data = tomllib.load(fh)

    try:
        language = Language.parse(data["language"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid or missing language: {exc}") from exc

    concurrency = int(data.get("concurrency", 4))
    budget = int(data.get("request_budget", 500))
    resources = data.get("resources", {})

    for key in ("registry", "arity_table", "schema"):
        value = resources.get(key)
        if value is not None and not Path(value).is_file():
            raise ConfigError(f"resources.{key} does not exist: {value}")

    try:
        generator = _endpoint(data.get("generator", {}), budget, concurrency)
        fixer = _endpoint(data.get("fixer", {}), budget, concurrency)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid endpoint config: {exc}") from exc

    return RunConfig(
        language=language,
        generator=generator,
        fixer=fixer,
        registry_path=resources.get("registry"),
        arity_table_path=resources.get("arity_table"),
        schema_path=resources.get("schema"),
        db_id=resources.get("db_id"),
        output_dir=data.get("output_dir", "."),
        concurrency=concurrency,
        request_budget=budget,
        seed=int(data.get("seed", 0)),
        raw=data,
    )


def config_manifest(config: RunConfig) -> dict:
    """Fully serialized run config for the output manifest."""
    return {
        "language": config.language.value,
        "generator": {
            "base_url": config.generator.base_url,
            "model": config.generator.model,
            "temperature": config.generator.temperature,
            "max_tokens": config.generator.max_tokens,
        },
        "fixer": {
            "base_url": config.fixer.base_url,
            "model": config.fixer.model,
            "temperature": config.fixer.temperature,
            "max_tokens": config.fixer.max_tokens,
        },
        "resources": {
            "registry": config.registry_path,
            "arity_table": config.arity_table_path,
            "schema": config.schema_path,
            "db_id": config.db_id,
        },
        "concurrency": config.concurrency,
        "request_budget": config.request_budget,
        "seed": config.seed,
    }

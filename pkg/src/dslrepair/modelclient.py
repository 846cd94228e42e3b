"""Model endpoint access: prompt templates, OpenAI-compatible HTTP client,
and a deterministic mock client so the whole pipeline runs offline."""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import httpx

from .core import DslError, Language

log = logging.getLogger(__name__)


class TransportError(DslError):
    pass


class AuthError(DslError):
    pass


class BudgetError(DslError):
    pass


class MissingPlaceholder(DslError):
    def __init__(self, name: str):
        super().__init__(f"prompt fill is missing placeholder {name!r}")
        self.name = name


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str = ""
    api_key_env: str = "DSLREPAIR_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 60.0
    max_retries: int = 3
    request_budget: int = 500
    concurrency: int = 4

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


@dataclass(frozen=True)
class PromptTemplate:
    role: str  # generate | repair | icl
    language: Language
    body: str

    @property
    def placeholders(self) -> set[str]:
        return set(re.findall(r"\{(\w+)\}", self.body))


_LANG_WORD = {Language.ANSIBLE: "Ansible", Language.BASH: "Bash", Language.SQL: "SQL"}
_LANG_FENCE = {Language.ANSIBLE: "yaml", Language.BASH: "bash", Language.SQL: "sql"}
_LANG_ARTIFACT = {
    Language.ANSIBLE: "an Ansible playbook",
    Language.BASH: "a bash command",
    Language.SQL: "a SQL command",
}
_LANG_NOUN = {Language.ANSIBLE: "playbook", Language.BASH: "command", Language.SQL: "command"}

_ANSIBLE_NO_SHELL = (
    " DO NOT use any shell commands (ansible.builtin.shell, "
    "ansible.builtin.command, etc.) in the playbook."
)


def _generate_body(language: Language) -> str:
    return (
        f"You are an expert in {_LANG_WORD[language]}. The user will give you a task "
        f"description and ask you to generate {_LANG_ARTIFACT[language]} to complete the "
        f"given task. You only need to output the content of the {_LANG_NOUN[language]}."
        f"{_ANSIBLE_NO_SHELL if language is Language.ANSIBLE else ''}\n"
        "\n"
        "Task: {task}\n"
        "\n"
        f"Answer: ```{_LANG_FENCE[language]}"
    )


def _repair_body(language: Language) -> str:
    noun = _LANG_NOUN[language]
    artifact = "Ansible playbook" if language is Language.ANSIBLE else f"{_LANG_WORD[language]} command"
    return (
        f"You are an expert in {_LANG_WORD[language]}. You are asked to fix a possibly "
        f"incorrect {artifact}. You will be provided with the {noun} to fix, the user "
        "input, and feedback from an interpreter that lists all syntactic errors in the "
        f"{noun}. Your goal is to fix the syntactic errors in the {noun} (if any) while "
        "following the user's instruction. You only need to output the content of the "
        f"modified {noun}.\n"
        "\n"
        "User query: {query}\n"
        "\n"
        f"Original {noun}:\n"
        "{output}\n"
        "\n"
        "Interpreter feedback:\n"
        "{feedback}\n"
        "\n"
        f"Answer: ```{_LANG_FENCE[language]}"
    )


def _icl_body(language: Language) -> str:
    noun = _LANG_NOUN[language]
    plural = "Ansible playbooks" if language is Language.ANSIBLE else f"{_LANG_WORD[language]} commands"
    return (
        f"You are an expert in {_LANG_WORD[language]}. The user will give you a task "
        f"description and ask you to generate {_LANG_ARTIFACT[language]} to complete the "
        f"given task. You only need to output the content of the {noun}."
        f"{_ANSIBLE_NO_SHELL if language is Language.ANSIBLE else ''}\n"
        f"The following are some example input queries and corresponding {plural} "
        "for your reference:\n"
        "{examples}\n"
        "Task: {task}\n"
        f"Answer: ```{_LANG_FENCE[language]}"
    )


PROMPTS: dict[tuple[str, Language], PromptTemplate] = {}
for _lang in Language:
    PROMPTS[("generate", _lang)] = PromptTemplate("generate", _lang, _generate_body(_lang))
    PROMPTS[("repair", _lang)] = PromptTemplate("repair", _lang, _repair_body(_lang))
    PROMPTS[("icl", _lang)] = PromptTemplate("icl", _lang, _icl_body(_lang))


def get_template(role: str, language: Language) -> PromptTemplate:
    return PROMPTS[(role, language)]


def render_prompt(template: PromptTemplate, fills: dict[str, str]) -> str:
    """Byte-exact placeholder substitution; no other mutation of the body."""
    text = template.body
    for name in sorted(template.placeholders):
        if name not in fills:
            raise MissingPlaceholder(name)
        text = text.replace("{" + name + "}", str(fills[name]))
    return text


def format_icl_examples(examples) -> str:
    """Join (task, answer) pairs into the block format used by the ICL prompt."""
    return "\n".join(f"Task: {task}\nAnswer: {answer}" for task, answer in examples)


def extract_code(reply: str, language: Language) -> str:
    """Take the content before the first closing fence; strip a language tag line."""
    text = reply
    stripped = text.lstrip()
    if stripped.startswith("```"):
        # an opening fence at the very start belongs to the reply's own wrapping
        after = stripped[3:]
        newline = after.find("\n")
        first_line = after[:newline] if newline != -1 else after
        if first_line.strip().lower() in ("", _LANG_FENCE[language]):
            text = after[newline + 1 :] if newline != -1 else ""
    fence = text.find("```")
    if fence != -1:
        text = text[:fence]
    lines = text.strip("\n").split("\n")
    if lines and lines[0].strip().lower() == _LANG_FENCE[language]:
        lines = lines[1:]
    return "\n".join(lines).strip()


class Budget:
    """Thread-safe request counter shared by all calls of one run."""

    def __init__(self, limit: int):
        self.limit = limit
        self._count = 0
        self._lock = threading.Lock()

    def spend(self):
        with self._lock:
            if self._count >= self.limit:
                raise BudgetError(f"request budget of {self.limit} exhausted")
            self._count += 1

    @property
    def spent(self) -> int:
        return self._count


class HttpClient:
    """OpenAI-compatible chat-completion client with retries and backoff."""

    def __init__(
        self,
        config: EndpointConfig,
        budget: Budget | None = None,
        log_path: str | Path | None = None,
        backoff_base: float = 0.5,
    ):
        self.config = config
        self.budget = budget or Budget(config.request_budget)
        self.log_path = Path(log_path) if log_path else None
        self.backoff_base = backoff_base
        self._log_lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        cfg = self.config
        self.budget.spend()
        headers = {}
        api_key = os.environ.get(cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            start = time.monotonic()
            try:
                response = httpx.post(url, json=payload, headers=headers, timeout=cfg.timeout)
                if response.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected credentials ({response.status_code})")
                if response.status_code >= 500 or response.status_code == 429:
                    raise httpx.TransportError(f"server error {response.status_code}")
                response.raise_for_status()
                reply = response.json()["choices"][0]["message"]["content"]
                self._log(prompt, reply, time.monotonic() - start)
                return reply
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
                log.warning("request attempt %d failed: %s", attempt + 1, exc)
                if attempt < cfg.max_retries:
                    time.sleep(self.backoff_base * (2**attempt))
        raise TransportError(f"request failed after {cfg.max_retries + 1} attempts: {last_error}")

    def _log(self, prompt: str, reply: str, latency: float):
        if self.log_path is None:
            return
        record = {"prompt": prompt, "reply": reply, "latency_s": round(latency, 4)}
        with self._log_lock:
            with open(self.log_path, "a") as fh:
                fh.write(json.dumps(record) + "\n")


class MockClient:
    """Deterministic offline client: canned prompt -> reply map or a function."""

    def __init__(self, replies=None, default: str = "", budget: Budget | None = None):
        self.replies = replies or {}
        self.default = default
        self.budget = budget
        self.calls: list[str] = []
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        if self.budget is not None:
            self.budget.spend()
        with self._lock:
            self.calls.append(prompt)
        if callable(self.replies):
            return self.replies(prompt)
        return self.replies.get(prompt, self.default)


def make_client(config: EndpointConfig, budget: Budget | None = None, log_path=None):
    """mock:// base URLs resolve to a MockClient fed from a JSON replies file."""
    if config.base_url.startswith("mock://"):
        replies: dict[str, str] = {}
        default = ""
        path = config.base_url[len("mock://") :]
        if path:
            data = json.loads(Path(path).read_text())
            replies = data.get("replies", {})
            default = data.get("default", "")
        return MockClient(replies=replies, default=default, budget=budget)
    return HttpClient(config, budget=budget, log_path=log_path)

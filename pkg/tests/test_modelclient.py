import json
import threading

import httpx
import pytest

from dslrepair.core import Language
from dslrepair.modelclient import (
    AuthError,
    Budget,
    BudgetError,
    EndpointConfig,
    HttpClient,
    MissingPlaceholder,
    MockClient,
    TransportError,
    extract_code,
    format_icl_examples,
    get_template,
    make_client,
    render_prompt,
)

BASH_GENERATE = (
    "You are an expert in Bash. The user will give you a task description and "
    "ask you to generate a bash command to complete the given task. You only "
    "need to output the content of the command.\n"
    "\n"
    "Task: {task}\n"
    "\n"
    "Answer: ```bash"
)

ANSIBLE_GENERATE = (
    "You are an expert in Ansible. The user will give you a task description and "
    "ask you to generate an Ansible playbook to complete the given task. You only "
    "need to output the content of the playbook. DO NOT use any shell commands "
    "(ansible.builtin.shell, ansible.builtin.command, etc.) in the playbook.\n"
    "\n"
    "Task: {task}\n"
    "\n"
    "Answer: ```yaml"
)


class TestTemplates:
    def test_bash_generate_body_byte_exact(self):
        assert get_template("generate", Language.BASH).body == BASH_GENERATE

    def test_ansible_generate_body_byte_exact(self):
        assert get_template("generate", Language.ANSIBLE).body == ANSIBLE_GENERATE

    def test_sql_generate_ends_with_open_fence(self):
        body = get_template("generate", Language.SQL).body
        assert body.endswith("Answer: ```sql")
        assert "SQL command" in body

    def test_repair_placeholders(self):
        tpl = get_template("repair", Language.SQL)
        assert tpl.placeholders == {"query", "output", "feedback"}

    def test_icl_placeholders(self):
        tpl = get_template("icl", Language.BASH)
        assert tpl.placeholders == {"examples", "task"}

    def test_only_ansible_bans_shell(self):
        assert "DO NOT use any shell" in get_template("generate", Language.ANSIBLE).body
        assert "DO NOT" not in get_template("generate", Language.BASH).body
        assert "DO NOT" not in get_template("generate", Language.SQL).body

    def test_every_role_and_language_present(self):
        for role in ("generate", "repair", "icl"):
            for lang in Language:
                assert get_template(role, lang).role == role


class TestRenderPrompt:
    def test_substitution(self):
        tpl = get_template("generate", Language.BASH)
        text = render_prompt(tpl, {"task": "list files"})
        assert "Task: list files\n" in text
        assert "{task}" not in text

    def test_missing_placeholder_raises(self):
        tpl = get_template("repair", Language.BASH)
        with pytest.raises(MissingPlaceholder):
            render_prompt(tpl, {"query": "x", "output": "y"})

    def test_fill_values_are_not_reinterpreted(self):
        tpl = get_template("generate", Language.BASH)
        text = render_prompt(tpl, {"task": "literal {braces} stay"})
        assert "literal {braces} stay" in text

    def test_format_icl_examples(self):
        block = format_icl_examples([("list files", "ls"), ("print date", "date")])
        assert block == "Task: list files\nAnswer: ls\nTask: print date\nAnswer: date"


class TestExtractCode:
    def test_reply_with_closing_fence(self):
        assert extract_code("ls -l\n```", Language.BASH) == "ls -l"

    def test_reply_with_full_fence_block(self):
        reply = "```bash\nls -l\n```\nSome explanation."
        assert extract_code(reply, Language.BASH) == "ls -l"

    def test_reply_with_bare_fences(self):
        assert extract_code("```\nSELECT 1\n```", Language.SQL) == "SELECT 1"

    def test_reply_without_fences(self):
        assert extract_code("SELECT * FROM t", Language.SQL) == "SELECT * FROM t"

    def test_language_tag_line_stripped(self):
        assert extract_code("yaml\n- hosts: all\n```", Language.ANSIBLE) == "- hosts: all"

    def test_multiline_program_preserved(self):
        reply = "- hosts: all\n  tasks: []\n```"
        assert extract_code(reply, Language.ANSIBLE) == "- hosts: all\n  tasks: []"

    def test_text_after_first_fence_ignored(self):
        reply = "ls\n```\n\n```bash\nrm -rf /\n```"
        assert extract_code(reply, Language.BASH) == "ls"


class TestBudget:
    def test_spend_until_exhausted(self):
        budget = Budget(2)
        budget.spend()
        budget.spend()
        with pytest.raises(BudgetError):
            budget.spend()
        assert budget.spent == 2

    def test_thread_safety(self):
        budget = Budget(100)
        errors = []

        def worker():
            for _ in range(30):
                try:
                    budget.spend()
                except BudgetError:
                    errors.append(1)

        threads = [threading.Thread(target=worker) for _ in range(5)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert budget.spent == 100
        assert len(errors) == 50


class TestMockClient:
    def test_dict_replies(self):
        client = MockClient(replies={"hello": "world"}, default="dunno")
        assert client.complete("hello") == "world"
        assert client.complete("other") == "dunno"
        assert client.calls == ["hello", "other"]

    def test_callable_replies(self):
        client = MockClient(replies=lambda p: p.upper())
        assert client.complete("abc") == "ABC"

    def test_budget_enforced(self):
        client = MockClient(default="x", budget=Budget(1))
        client.complete("a")
        with pytest.raises(BudgetError):
            client.complete("b")


class TestMakeClient:
    def test_mock_url_loads_replies_file(self, tmp_path):
        path = tmp_path / "replies.json"
        path.write_text(json.dumps({"replies": {"p": "r"}, "default": "d"}))
        client = make_client(EndpointConfig(base_url=f"mock://{path}"))
        assert isinstance(client, MockClient)
        assert client.complete("p") == "r"
        assert client.complete("q") == "d"

    def test_bare_mock_url(self):
        client = make_client(EndpointConfig(base_url="mock://"))
        assert isinstance(client, MockClient)
        assert client.complete("anything") == ""

    def test_http_url_gives_http_client(self):
        client = make_client(EndpointConfig(base_url="http://localhost:9"))
        assert isinstance(client, HttpClient)


class TestEndpointConfig:
    def test_rejects_negative_temperature(self):
        with pytest.raises(ValueError):
            EndpointConfig(base_url="mock://", temperature=-1)

    def test_rejects_nonpositive_timeout(self):
        with pytest.raises(ValueError):
            EndpointConfig(base_url="mock://", timeout=0)


class _FakeResponse:
    def __init__(self, status_code=200, content="ok"):
        self.status_code = status_code
        self._content = content

    def raise_for_status(self):
        if self.status_code >= 400:
            raise httpx.HTTPStatusError("boom", request=None, response=None)

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


class TestHttpClient:
    def config(self, **kw):
        kw.setdefault("base_url", "http://example.test/v1")
        kw.setdefault("max_retries", 2)
        return EndpointConfig(**kw)

    def test_successful_completion(self, monkeypatch):
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen["url"] = url
            seen["payload"] = json
            return _FakeResponse(content="the reply")

        monkeypatch.setattr(httpx, "post", fake_post)
        client = HttpClient(self.config(model="m1", temperature=0.5))
        assert client.complete("the prompt") == "the reply"
        assert seen["url"] == "http://example.test/v1/chat/completions"
        assert seen["payload"]["model"] == "m1"
        assert seen["payload"]["messages"] == [{"role": "user", "content": "the prompt"}]

    def test_auth_error_not_retried(self, monkeypatch):
        calls = []

        def fake_post(url, **kw):
            calls.append(1)
            return _FakeResponse(status_code=401)

        monkeypatch.setattr(httpx, "post", fake_post)
        client = HttpClient(self.config())
        with pytest.raises(AuthError):
            client.complete("p")
        assert len(calls) == 1

    def test_server_errors_retried_then_transport_error(self, monkeypatch):
        calls = []

        def fake_post(url, **kw):
            calls.append(1)
            return _FakeResponse(status_code=503)

        monkeypatch.setattr(httpx, "post", fake_post)
        client = HttpClient(self.config(), backoff_base=0.0)
        with pytest.raises(TransportError):
            client.complete("p")
        assert len(calls) == 3  # initial try + 2 retries

    def test_retry_recovers(self, monkeypatch):
        responses = [_FakeResponse(status_code=500), _FakeResponse(content="late")]

        def fake_post(url, **kw):
            return responses.pop(0)

        monkeypatch.setattr(httpx, "post", fake_post)
        client = HttpClient(self.config(), backoff_base=0.0)
        assert client.complete("p") == "late"

    def test_budget_checked_before_request(self, monkeypatch):
        monkeypatch.setattr(httpx, "post", lambda *a, **k: _FakeResponse())
        client = HttpClient(self.config(), budget=Budget(0))
        with pytest.raises(BudgetError):
            client.complete("p")

    def test_api_key_header(self, monkeypatch):
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen["headers"] = headers
            return _FakeResponse()

        monkeypatch.setattr(httpx, "post", fake_post)
        monkeypatch.setenv("TEST_KEY_VAR", "sekrit")
        client = HttpClient(self.config(api_key_env="TEST_KEY_VAR"))
        client.complete("p")
        assert seen["headers"]["Authorization"] == "Bearer sekrit"

    def test_request_log_written(self, monkeypatch, tmp_path):
        monkeypatch.setattr(httpx, "post", lambda *a, **k: _FakeResponse(content="r"))
        log_path = tmp_path / "requests.jsonl"
        client = HttpClient(self.config(), log_path=log_path)
        client.complete("p")
        record = json.loads(log_path.read_text().strip())
        assert record["prompt"] == "p" and record["reply"] == "r"
        assert "latency_s" in record

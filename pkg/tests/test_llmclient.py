"""Chat clients: fixture replay, HTTP with retries, and transcript recording."""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from feedprio import ExternalServiceError, ParseError
from feedprio.llmclient import (
    FixtureClient,
    HttpChatClient,
    TranscriptRecorder,
    prompt_sha256,
    run_prompts,
)


class ScriptedHandler(BaseHTTPRequestHandler):
    """Serves a scripted list of (status, body) responses, then repeats the last."""

    script: list[tuple[int, str]] = []
    requests_seen: list[dict] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).requests_seen.append(
            {"body": body, "authorization": self.headers.get("Authorization")}
        )
        index = min(len(type(self).requests_seen) - 1, len(self.script) - 1)
        status, text = self.script[index]
        payload = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def chat_server():
    server = HTTPServer(("127.0.0.1", 0), ScriptedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    ScriptedHandler.script = []
    ScriptedHandler.requests_seen = []
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()
    thread.join()


def ok_body(content: str) -> str:
    return json.dumps({"choices": [{"message": {"content": content}}]})


class TestPromptSha:
    def test_stable_and_distinct(self):
        assert prompt_sha256("abc") == prompt_sha256("abc")
        assert prompt_sha256("abc") != prompt_sha256("abd")
        assert len(prompt_sha256("abc")) == 64


class TestFixtureClient:
    def test_replays_by_hash(self):
        client = FixtureClient({prompt_sha256("hello"): "world"})
        assert client.complete("hello") == "world"

    def test_unknown_prompt_rejected(self):
        client = FixtureClient({})
        with pytest.raises(ExternalServiceError):
            client.complete("hello")

    def test_from_file(self, tmp_path):
        path = tmp_path / "fixtures.json"
        path.write_text(
            json.dumps([{"prompt_sha256": prompt_sha256("p"), "response_text": "r"}])
        )
        assert FixtureClient.from_file(path).complete("p") == "r"

    def test_shipped_fixtures_load(self):
        client = FixtureClient.from_file("data/wordprocessor/llm_fixtures.json")
        assert len(client.responses) == 8  # one whole-set prompt plus seven clusters

    @pytest.mark.parametrize("content", ["not json", "{}", '[{"prompt_sha256": "x"}]'])
    def test_malformed_file_rejected(self, tmp_path, content):
        path = tmp_path / "fixtures.json"
        path.write_text(content)
        with pytest.raises(ParseError):
            FixtureClient.from_file(path)


class TestTranscriptRecorder:
    def test_records_in_call_order(self):
        inner = FixtureClient({prompt_sha256("a"): "ra", prompt_sha256("b"): "rb"})
        recorder = TranscriptRecorder(client=inner)
        recorder.complete("a")
        recorder.complete("b")
        assert [e["response_text"] for e in recorder.entries] == ["ra", "rb"]
        assert recorder.entries[0]["prompt_sha256"] == prompt_sha256("a")

    def test_saved_transcript_replays(self, tmp_path):
        inner = FixtureClient({prompt_sha256("a"): "ra"})
        recorder = TranscriptRecorder(client=inner)
        recorder.complete("a")
        path = tmp_path / "transcript.json"
        recorder.save(path)
        replay = FixtureClient.from_file(path)
        assert replay.complete("a") == "ra"

    def test_save_is_byte_stable(self, tmp_path):
        inner = FixtureClient({prompt_sha256("a"): "ra"})
        recorder = TranscriptRecorder(client=inner)
        recorder.complete("a")
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        recorder.save(a)
        recorder.save(b)
        assert a.read_bytes() == b.read_bytes()


class TestRunPrompts:
    def test_order_preserved(self):
        client = FixtureClient({prompt_sha256(p): f"resp-{p}" for p in ("a", "b", "c")})
        assert run_prompts(client, ["c", "a", "b"]) == ["resp-c", "resp-a", "resp-b"]

    def test_failed_prompt_yields_none(self, caplog):
        client = FixtureClient({prompt_sha256("a"): "ra"})
        with caplog.at_level("WARNING"):
            out = run_prompts(client, ["a", "missing"])
        assert out == ["ra", None]
        assert "failed" in caplog.text

    def test_bad_concurrency_rejected(self):
        with pytest.raises(ValueError):
            run_prompts(FixtureClient({}), [], max_in_flight=0)

    def test_concurrent_calls_keep_slots(self):
        class SlowClient:
            def complete(self, prompt: str) -> str:
                time.sleep(0.05 if prompt == "slow" else 0.0)
                return f"resp-{prompt}"

        out = run_prompts(SlowClient(), ["slow", "fast1", "fast2"], max_in_flight=3)
        assert out == ["resp-slow", "resp-fast1", "resp-fast2"]


class TestHttpChatClient:
    def test_success_path_and_request_shape(self, chat_server):
        ScriptedHandler.script = [(200, ok_body("the answer"))]
        client = HttpChatClient(chat_server, model="m-1", api_key="secret", temperature=0.5)
        assert client.complete("question") == "the answer"
        seen = ScriptedHandler.requests_seen[0]
        assert seen["authorization"] == "Bearer secret"
        assert seen["body"]["model"] == "m-1"
        assert seen["body"]["temperature"] == 0.5
        assert seen["body"]["messages"] == [{"role": "user", "content": "question"}]

    def test_no_auth_header_without_key(self, chat_server):
        ScriptedHandler.script = [(200, ok_body("x"))]
        HttpChatClient(chat_server, model="m").complete("q")
        assert ScriptedHandler.requests_seen[0]["authorization"] is None

    def test_server_error_retried_then_succeeds(self, chat_server):
        ScriptedHandler.script = [(500, "oops"), (200, ok_body("recovered"))]
        client = HttpChatClient(chat_server, model="m", max_retries=2)
        assert client.complete("q") == "recovered"
        assert len(ScriptedHandler.requests_seen) == 2

    def test_persistent_server_error_exhausts_retries(self, chat_server):
        ScriptedHandler.script = [(500, "oops")]
        client = HttpChatClient(chat_server, model="m", max_retries=1)
        with pytest.raises(ExternalServiceError, match="after retries"):
            client.complete("q")
        assert len(ScriptedHandler.requests_seen) == 2

    def test_client_error_fails_immediately(self, chat_server):
        ScriptedHandler.script = [(400, "bad request")]
        client = HttpChatClient(chat_server, model="m", max_retries=3)
        with pytest.raises(ExternalServiceError, match="400"):
            client.complete("q")
        assert len(ScriptedHandler.requests_seen) == 1

    def test_malformed_payload_rejected(self, chat_server):
        ScriptedHandler.script = [(200, json.dumps({"choices": []}))]
        client = HttpChatClient(chat_server, model="m")
        with pytest.raises(ExternalServiceError, match="malformed"):
            client.complete("q")

    def test_unreachable_endpoint(self):
        client = HttpChatClient("http://127.0.0.1:1/nothing", model="m", max_retries=0, timeout=0.2)
        with pytest.raises(ExternalServiceError):
            client.complete("q")

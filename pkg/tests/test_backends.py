import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from causechain import chain
from causechain.backends import (
    BackendConfig,
    Completion,
    CompletionRequest,
    PermanentBackendError,
    RemoteBackend,
    SymbolicBackend,
    SymbolicDispatchError,
    TransientBackendError,
    live_question,
    make_backend,
    template_regex,
)

# Exemplar reasonings the solver renders differently; the source material
# words these inconsistently with its own majority phrasing. Shot 8 of the
# final subquestion also answers 0 by scanning the listed edges, while the
# universal reading over every graph the answer set represents gives 1.
KNOWN_REASONING_DIFFS = {
    (7, 1), (7, 2), (7, 3), (8, 4), (8, 5), (8, 7), (8, 8), (8, 9)}
KNOWN_ANSWER_DIFFS = {(8, 8)}


def ws(text: str) -> str:
    return " ".join(text.split())


@pytest.fixture(scope="module")
def backend():
    return SymbolicBackend()


def test_solver_reproduces_exemplar_answers(backend):
    for i, spec in chain.load_subq_specs().items():
        for j, shot in enumerate(spec.shots, start=1):
            _, answer = backend._solve(shot.question)
            if (i, j) in KNOWN_ANSWER_DIFFS:
                continue
            assert ws(answer) == ws(shot.answer), f"subq{i} shot{j}"


def test_solver_reproduces_exemplar_reasonings(backend):
    for i, spec in chain.load_subq_specs().items():
        for j, shot in enumerate(spec.shots, start=1):
            reasoning, _ = backend._solve(shot.question)
            matches = ws(reasoning) == ws(shot.reasoning)
            expected = (i, j) not in KNOWN_REASONING_DIFFS
            assert matches == expected, f"subq{i} shot{j}"


def test_solver_final_shot8_divergence(backend):
    # The one exemplar answer the solver contradicts: every graph in the
    # answer set contains a two-step route, so the universal label is 1.
    shot = chain.load_subq_specs()[8].shots[7]
    _, answer = backend._solve(shot.question)
    assert shot.answer == "0"
    assert answer == "1"


def test_solver_reproduces_baseline_answers(backend):
    for j, shot in enumerate(chain.load_baseline_shots(), start=1):
        _, answer = backend._solve(shot.question)
        assert ws(answer) == ws(shot.answer), f"baseline shot{j}"


def test_symbolic_two_call_protocol(backend):
    spec = chain.load_subq_specs()[1]
    prompt = chain.build_subq_prompt(
        spec, {"premise": "Suppose there is a closed system of 2 variables, "
                          "A and B. All the statistical relations among "
                          "these 2 variables are as follows: A correlates "
                          "with B."})
    first = backend.complete(CompletionRequest(prompt=prompt,
                                               stop=("Answer:",)))
    assert first.text.startswith(" Since our variables are A,B")
    assert "Answer:" not in first.text
    second = backend.complete(CompletionRequest(
        prompt=f"{prompt} {first.text.strip()}\nAnswer:",
        stop=("Question:",)))
    assert second.text == " (A,B)"


def test_symbolic_deterministic(backend):
    spec = chain.load_subq_specs()[3]
    prompt = chain.build_subq_prompt(spec, {"ans2": "(A,B), (B,C)"})
    req = CompletionRequest(prompt=prompt, stop=("Answer:",))
    assert backend.complete(req).text == backend.complete(req).text


def test_symbolic_dispatch_error(backend):
    with pytest.raises(SymbolicDispatchError) as err:
        backend.complete(CompletionRequest(prompt="What is 2+2?\nAnswer:",
                                           stop=("Question:",)))
    assert "sha256" in str(err.value)


def test_symbolic_rejects_unparseable_live_values(backend):
    spec = chain.load_subq_specs()[2]
    prompt = chain.build_subq_prompt(
        spec, {"premise": "Suppose there is a closed system of 2 variables, "
                          "A and B. All the statistical relations among "
                          "these 2 variables are as follows: A correlates "
                          "with B.",
               "ans1": "no graph to speak of"})
    with pytest.raises(SymbolicDispatchError):
        backend.complete(CompletionRequest(prompt=prompt, stop=("Answer:",)))


def test_symbolic_healthcheck(backend):
    assert backend.healthcheck() == "ok"


def test_template_regex():
    rx = template_regex("Given the graph: {ans2}. Done?")
    m = rx.fullmatch("Given the graph: (A,B), (B,C). Done?")
    assert m.group("ans2") == "(A,B), (B,C)"
    assert rx.fullmatch("Something else") is None


def test_live_question():
    prompt = ("Question: old shot\nReasoning: because\nAnswer: 1\n\n"
              "Question: the live one\nReasoning:")
    assert live_question(prompt) == "the live one"
    answered = ("Question: the live one\nReasoning: so it goes\nAnswer:")
    assert live_question(answered) == "the live one"


def test_completion_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest(prompt="p", stop=(), max_tokens=None)
    with pytest.raises(ValueError):
        CompletionRequest(prompt="p", stop=("x",), temperature=-1.0)
    req = CompletionRequest(prompt="p", stop=("x",))
    assert req.temperature == 0.0


def test_backend_config_validation():
    with pytest.raises(ValueError):
        BackendConfig(kind="quantum")
    with pytest.raises(ValueError):
        BackendConfig(kind="remote")
    with pytest.raises(ValueError):
        BackendConfig(max_attempts=0)
    cfg = BackendConfig(kind="remote", endpoint="http://localhost:1/v1")
    assert cfg.max_attempts == 3


def test_backend_config_from_toml(tmp_path):
    p = tmp_path / "backend.toml"
    p.write_text(
        '[backend]\nkind = "remote"\nendpoint = "http://localhost:9/v1"\n'
        'model = "m1"\ntemperature = 0.5\nconcurrency = 2\n')
    cfg = BackendConfig.from_toml(str(p))
    assert cfg.kind == "remote"
    assert cfg.model == "m1"
    assert cfg.temperature == 0.5
    assert cfg.concurrency == 2
    flat = tmp_path / "flat.toml"
    flat.write_text('kind = "symbolic"\n')
    assert BackendConfig.from_toml(str(flat)).kind == "symbolic"
    bad = tmp_path / "bad.toml"
    bad.write_text('[backend]\nkind = "symbolic"\nshiny = true\n')
    with pytest.raises(ValueError):
        BackendConfig.from_toml(str(bad))


def test_make_backend():
    assert isinstance(make_backend(BackendConfig()), SymbolicBackend)
    cfg = BackendConfig(kind="remote", endpoint="http://localhost:9/v1")
    assert isinstance(make_backend(cfg), RemoteBackend)


class _Script(BaseHTTPRequestHandler):
    """Replays a scripted list of (status, body) responses."""

    script: list[tuple[int, dict]] = []
    hits: list[dict] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).hits.append(
            {"payload": body, "auth": self.headers.get("Authorization")})
        status, reply = self.script[min(len(self.hits) - 1,
                                        len(self.script) - 1)]
        data = json.dumps(reply).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def mock_server():
    server = HTTPServer(("127.0.0.1", 0), _Script)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Script.script = []
    _Script.hits = []
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()
    thread.join()


def _reply(text: str, usage: dict | None = None) -> dict:
    obj = {"choices": [{"message": {"content": text}}]}
    if usage:
        obj["usage"] = usage
    return obj


def _remote(endpoint: str, **overrides) -> RemoteBackend:
    base = dict(kind="remote", endpoint=endpoint, model="test-model",
                max_attempts=3, backoff_s=0.0, timeout_s=5.0)
    base.update(overrides)
    return RemoteBackend(BackendConfig(**base))


def test_remote_success(mock_server, monkeypatch):
    monkeypatch.setenv("CORR2CAUSE_API_KEY", "sekrit")
    _Script.script = [(200, _reply("raw Question: trailing",
                                   {"prompt_tokens": 3,
                                    "completion_tokens": 5}))]
    backend = _remote(mock_server)
    out = backend.complete(CompletionRequest(prompt="hello",
                                             stop=("Question:",)))
    assert out == Completion("raw ", 3, 5)
    hit = _Script.hits[0]
    assert hit["auth"] == "Bearer sekrit"
    assert hit["payload"]["model"] == "test-model"
    assert hit["payload"]["messages"] == [{"role": "user",
                                           "content": "hello"}]
    assert hit["payload"]["stop"] == ["Question:"]


def test_remote_retries_transient(mock_server, monkeypatch):
    monkeypatch.setenv("CORR2CAUSE_API_KEY", "k")
    _Script.script = [(500, {"error": "boom"}), (429, {"error": "slow"}),
                      (200, _reply("ok"))]
    backend = _remote(mock_server)
    out = backend.complete(CompletionRequest(prompt="p", stop=("X",)))
    assert out.text == "ok"
    assert len(_Script.hits) == 3


def test_remote_gives_up_after_max_attempts(mock_server, monkeypatch):
    monkeypatch.setenv("CORR2CAUSE_API_KEY", "k")
    _Script.script = [(503, {"error": "down"})]
    backend = _remote(mock_server, max_attempts=2)
    with pytest.raises(TransientBackendError):
        backend.complete(CompletionRequest(prompt="p", stop=("X",)))
    assert len(_Script.hits) == 2


def test_remote_client_error_is_permanent(mock_server, monkeypatch):
    monkeypatch.setenv("CORR2CAUSE_API_KEY", "k")
    _Script.script = [(400, {"error": "bad request"})]
    backend = _remote(mock_server)
    with pytest.raises(PermanentBackendError):
        backend.complete(CompletionRequest(prompt="p", stop=("X",)))
    assert len(_Script.hits) == 1


def test_remote_bad_shape_is_permanent(mock_server, monkeypatch):
    monkeypatch.setenv("CORR2CAUSE_API_KEY", "k")
    _Script.script = [(200, {"unexpected": True})]
    backend = _remote(mock_server)
    with pytest.raises(PermanentBackendError):
        backend.complete(CompletionRequest(prompt="p", stop=("X",)))


def test_remote_missing_credential(mock_server, monkeypatch):
    monkeypatch.delenv("CORR2CAUSE_API_KEY", raising=False)
    backend = _remote(mock_server)
    with pytest.raises(PermanentBackendError):
        backend.complete(CompletionRequest(prompt="p", stop=("X",)))
    assert _Script.hits == []


def test_remote_custom_credential_env(mock_server, monkeypatch):
    monkeypatch.delenv("CORR2CAUSE_API_KEY", raising=False)
    monkeypatch.setenv("OTHER_KEY", "k2")
    _Script.script = [(200, _reply("fine"))]
    backend = _remote(mock_server, credential_env="OTHER_KEY")
    out = backend.complete(CompletionRequest(prompt="p", stop=("X",)))
    assert out.text == "fine"
    assert _Script.hits[0]["auth"] == "Bearer k2"


def test_remote_healthcheck(mock_server, monkeypatch):
    monkeypatch.setenv("CORR2CAUSE_API_KEY", "k")
    _Script.script = [(200, _reply("pong"))]
    assert _remote(mock_server).healthcheck() == "ok"
    _Script.hits = []
    _Script.script = [(401, {"error": "no"})]
    assert _remote(mock_server).healthcheck().startswith("error:")

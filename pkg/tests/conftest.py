import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import hypothesis
import pytest

from akeys.captions import CaptionStore, parse_caption_line
from akeys.synthetic import SyntheticParams, generate_synthetic

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=30, deadline=None)
hypothesis.settings.load_profile(os.environ.get("AKEYS_HYPOTHESIS_PROFILE", "ci"))


def store_from_text(text):
    return CaptionStore(parse_caption_line(l, n) for n, l in enumerate(text.splitlines(), 1))


def make_world(seed=7, **kw):
    """(store, task, world) for one synthetic video."""
    text, task, world = generate_synthetic(SyntheticParams(**kw), seed)
    return store_from_text(text), task, world


@pytest.fixture
def late_event():
    # 3-minute video at 1 fps, decisive event in frames 126..130
    return make_world(seed=7, key_start=126, key_len=5)


def chat_body(content):
    return {"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}],
            "usage": {"prompt_tokens": 11, "completion_tokens": 3}}


class StubServer:
    """Chat-completions stub replaying a script of (status, body) pairs.

    The last entry repeats once the script runs out.
    """

    def __init__(self):
        self.script = [(200, chat_body("ok"))]
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                stub.requests.append({"path": self.path, "headers": dict(self.headers),
                                      "body": json.loads(self.rfile.read(length) or b"{}")})
                idx = min(len(stub.requests) - 1, len(stub.script) - 1)
                status, body = stub.script[idx]
                payload = body.encode() if isinstance(body, str) else json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, args=(0.01,), daemon=True)
        self.thread.start()

    @property
    def url(self):
        return f"http://127.0.0.1:{self.httpd.server_address[1]}/v1"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

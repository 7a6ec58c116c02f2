"""Deterministic mock of the remote geocoder's HTTP search endpoint.

Used by the test suite and for offline demos: answers come from a fixed
mapping (or a stable hash into the UK bounding box when unmapped), and
every request is logged so tests can assert call counts and stage order.
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

# Rough UK extent for hash-derived coordinates.
_UK_LAT = (50.0, 58.0)
_UK_LON = (-5.5, 1.5)


def deterministic_point(query: str) -> tuple[float, float]:
    digest = hashlib.sha256(query.encode("utf-8")).digest()
    lat = _UK_LAT[0] + (digest[0] * 256 + digest[1]) / 65535 * (_UK_LAT[1] - _UK_LAT[0])
    lon = _UK_LON[0] + (digest[2] * 256 + digest[3]) / 65535 * (_UK_LON[1] - _UK_LON[0])
    return round(lat, 5), round(lon, 5)


class MockGeocoderServer:
    """Scriptable geocoder. Entries in ``answers`` may be:

    - {"lat": .., "lon": ..} for a point hit
    - {"boundingbox": [min_lat, max_lat, min_lon, max_lon]} for a box hit
    - None for a definitive miss (empty candidate list)
    - "fail" for a persistent HTTP 500
    Queries not in ``answers`` get a hash-derived UK point unless
    ``strict`` is set, in which case they miss.
    """

    def __init__(self, answers: dict | None = None, *, strict: bool = False,
                 fail_first: int = 0):
        self.answers = dict(answers or {})
        self.strict = strict
        self.fail_first = fail_first
        self._lock = threading.Lock()
        self.calls: list[str] = []
        self._server: ThreadingHTTPServer | None = None

        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                parsed = urlparse(self.path)
                if parsed.path != "/search":
                    self._send(404, b"{}")
                    return
                query = parse_qs(parsed.query).get("q", [""])[0]
                with outer._lock:
                    outer.calls.append(query)
                    must_fail = outer.fail_first > 0
                    if must_fail:
                        outer.fail_first -= 1
                if must_fail:
                    self._send(500, b"transient")
                    return
                answer = outer.answers.get(query, "___unset___")
                if answer == "fail":
                    self._send(500, b"broken")
                    return
                if answer is None:
                    body = []
                elif answer == "___unset___":
                    if outer.strict:
                        body = []
                    else:
                        lat, lon = deterministic_point(query)
                        body = [{"lat": lat, "lon": lon}]
                else:
                    body = [answer]
                self._send(200, json.dumps(body).encode("utf-8"))

            def _send(self, status, payload):
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self._handler = Handler

    def start(self) -> str:
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), self._handler)
        thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        thread.start()
        return self.url

    @property
    def url(self) -> str:
        assert self._server is not None, "server not started"
        return f"http://127.0.0.1:{self._server.server_port}"

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server = None

    def call_count(self, query: str | None = None) -> int:
        with self._lock:
            if query is None:
                return len(self.calls)
            return sum(1 for c in self.calls if c == query)

    def __enter__(self) -> "MockGeocoderServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

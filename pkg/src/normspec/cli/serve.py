"""JSON-lines service: one request object per input line, one response per output line.

Requests (all carry ``"v": 1``)::

    {"v": 1, "kind": "phrase", "payload": "+bidder(Amy)."}
    {"v": 1, "kind": "phrase", "payload": "?Holds(user(Eve)).",
     "additional": [{"instance": "user(Eve)", "value": true}]}
    {"v": 1, "kind": "inspect-open-types"}
    {"v": 1, "kind": "revert", "state": 3}

Responses carry ``ok``, the current ``state`` id and either ``results``,
``types``, ``missing`` (an interrupt naming an instance or a type) or ``error``.
"""

from __future__ import annotations

import json
from typing import TextIO

from ..errors import EvalInterrupt, NormSpecError
from ..knowledge import TruthValue
from ..syntax import parse_program
from ..transition import Session, SessionOptions
from ..typesystem import Finite, InfinitePrimitive
from .common import load_paths, missing_json, parse_instance, result_json, session_options

PROTOCOL_VERSION = 1


def _domain(registry, name: str) -> dict:
    rec = registry.get(name)
    dom = registry.domain_of(name)
    if isinstance(dom, Finite) and rec.is_primitive:
        return {"kind": "literals", "values": list(rec.literals)}
    if isinstance(dom, InfinitePrimitive):
        return {"kind": dom.base}
    return {"kind": "product", "finite": isinstance(dom, Finite),
            "fields": [[label, t] for label, t in registry.field_types(name)]}


def inspect_open_types(session: Session) -> list[dict]:
    st = session.state
    out = []
    for rec in st.registry.open_types():
        assigned = st.kb.asserted.get(rec.name, {})
        out.append({
            "name": rec.name,
            "kind": rec.kind,
            "domain": _domain(st.registry, rec.name),
            "instances": [{"instance": str(i), "value": v.value} for i, v in sorted(
                assigned.items(), key=lambda kv: str(kv[0])) if v is not TruthValue.UNKNOWN],
        })
    return out


class Server:
    def __init__(self, options: SessionOptions):
        self.session = Session(options)

    def _reply(self, **fields) -> dict:
        return {"v": PROTOCOL_VERSION, "state": self.session.head, **fields}

    def handle(self, req) -> dict:
        if not isinstance(req, dict):
            return self._reply(ok=False, error="request must be a JSON object")
        if req.get("v", PROTOCOL_VERSION) != PROTOCOL_VERSION:
            return self._reply(ok=False, error=f"unsupported protocol version {req.get('v')!r}")
        kind = req.get("kind")
        if kind == "inspect-open-types":
            return self._reply(ok=True, types=inspect_open_types(self.session))
        if kind == "revert":
            try:
                self.session.revert(int(req.get("state")))
            except (KeyError, TypeError, ValueError):
                return self._reply(ok=False, error=f"unknown state {req.get('state')!r}")
            return self._reply(ok=True)
        if kind in ("phrase", "query", "additional-input+phrase"):
            return self._phrase(req)
        return self._reply(ok=False, error=f"unknown request kind {kind!r}")

    def _phrase(self, req: dict) -> dict:
        head = self.session.head
        try:
            phrases = parse_program(str(req.get("payload", "")), filename="<request>")
            additional = [(parse_instance(self.session, str(a["instance"])), bool(a.get("value", True)))
                          for a in req.get("additional", [])]
            results = []
            for phrase in phrases:
                results += result_json(self.session.exec_phrase(phrase, additional or None))
        except EvalInterrupt as exc:
            self.session.head = head
            return self._reply(ok=False, missing=missing_json(exc))
        except (NormSpecError, KeyError, TypeError) as exc:
            self.session.head = head
            return self._reply(ok=False, error=f"{type(exc).__name__}: {exc}")
        return self._reply(ok=True, results=results)

    def handle_line(self, line: str) -> dict:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            return self._reply(ok=False, error=f"malformed JSON: {exc.msg}")
        return self.handle(req)


def serve(args, stdin: TextIO, stdout: TextIO) -> int:
    server = Server(session_options(args))
    if args.files:
        for phrase in load_paths(args.files):
            server.session.exec_phrase(phrase)
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(json.dumps(server.handle_line(line)) + "\n")
        stdout.flush()
    return 0

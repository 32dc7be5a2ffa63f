"""REST facade over the policy engine.

Routes (all JSON):

    GET  /sites /principals /categories /actions /resources
    GET  /sites/{id} ... /resources/{id}
    GET  /customFacts
    GET  /customFacts/{factId}/params/{rank}/options
    POST /pars        body: {"customFacts": [{"fact": id, "parameters": [...]}],
                             "priority": "permissions" | "prohibitions"}

Every /pars run uses a fresh engine session over a shared immutable policy
snapshot, so identical requests produce byte-identical bodies; evaluation
wall time travels in the X-Elapsed-Ms response header to keep it that way.
Errors use one envelope: {"code", "message", "details"}.
"""

from __future__ import annotations

import json
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from . import engine, graph
from .config import PolicyConfig, validate_custom_fact_values
from .errors import BudgetExhaustedError, CbacError, CustomFactError
from .model import Par

_ENTITY_ROUTES = {
    "sites": ("SITE", ("id", "name")),
    "principals": ("PRINCIPAL", ("id", "name", "title")),
    "categories": ("CATEGORY", ("id", "name")),
    "actions": ("ACTION", ("id", "name")),
    "resources": ("RESOURCE", ("id", "name")),
}

_OPTIONS_ROUTE = re.compile(r"^/customFacts/([^/]+)/params/(\d+)/options$")


def serialize_par(par: Par) -> dict[str, Any]:
    return {
        "principal": par.principal,
        "chain": list(par.chain),
        "permission": {"action": par.permission.action, "resource": par.permission.resource},
        "sign": par.sign.value,
    }


def serialize_decl(decl) -> dict[str, Any]:
    parameters = []
    for p in decl.parameters:
        entry: dict[str, Any] = {
            "type": p.type,
            "rank": p.rank,
            "label": p.label,
            "description": p.description,
        }
        if p.option_type is not None:
            entry["optionType"] = p.option_type
        parameters.append(entry)
    return {
        "fact": decl.fact,
        "description": decl.description,
        "label": decl.label,
        "single": decl.single,
        "parameters": parameters,
    }


class Response:
    def __init__(self, status: int, payload: Any = None, headers: dict[str, str] | None = None):
        self.status = status
        self.body = b"" if payload is None else (json.dumps(payload, indent=2) + "\n").encode("utf-8")
        self.headers = {"Content-Type": "application/json; charset=utf-8"}
        if headers:
            self.headers.update(headers)


def _error(status: int, code: str, message: str, details: Any = None) -> Response:
    return Response(status, {"code": code, "message": message, "details": details})


class PolicyService:
    """Transport-independent request handling; the HTTP layer stays thin."""

    def __init__(self, policy: PolicyConfig, cors_origin: str = "*", budget: int = 100_000):
        self._lock = threading.Lock()
        self._policy = policy
        self.cors_origin = cors_origin
        self.budget = budget

    @property
    def policy(self) -> PolicyConfig:
        with self._lock:
            return self._policy

    def replace_policy(self, policy: PolicyConfig) -> None:
        """Atomic snapshot swap; in-flight requests finish on the old one."""
        with self._lock:
            self._policy = policy

    # ------------------------------------------------------------------

    def handle(self, method: str, path: str, body: bytes = b"") -> Response:
        policy = self.policy
        if method == "OPTIONS":
            return Response(204, None)
        if path == "/pars":
            if method != "POST":
                return _error(405, "method_not_allowed", "use POST for /pars")
            return self._compute_pars(policy, body)
        if method != "GET":
            return _error(405, "method_not_allowed", f"{method} not supported on {path}")

        parts = [p for p in path.split("/") if p]
        if len(parts) == 1 and parts[0] in _ENTITY_ROUTES:
            kind, fields = _ENTITY_ROUTES[parts[0]]
            table = policy.registry.by_kind(kind)
            return Response(200, [self._entity_doc(table[i], fields) for i in sorted(table)])
        if len(parts) == 2 and parts[0] in _ENTITY_ROUTES:
            kind, fields = _ENTITY_ROUTES[parts[0]]
            entity = policy.registry.by_kind(kind).get(parts[1])
            if entity is None:
                return _error(404, "not_found", f"no {kind.lower()} with id {parts[1]!r}")
            return Response(200, self._entity_doc(entity, fields))
        if path == "/customFacts":
            decls = sorted(policy.custom_fact_decls, key=lambda d: d.fact)
            return Response(200, [serialize_decl(d) for d in decls])
        match = _OPTIONS_ROUTE.match(path)
        if match:
            return self._param_options(policy, match.group(1), int(match.group(2)))
        return _error(404, "not_found", f"no route for {path}")

    @staticmethod
    def _entity_doc(entity, fields: tuple[str, ...]) -> dict[str, str]:
        return {f: getattr(entity, f) for f in fields}

    def _param_options(self, policy: PolicyConfig, fact_id: str, rank: int) -> Response:
        try:
            decl = policy.decl(fact_id)
        except CustomFactError:
            return _error(404, "not_found", f"no custom fact with id {fact_id!r}")
        params = [p for p in decl.parameters if p.rank == rank]
        if not params:
            return _error(404, "not_found", f"{fact_id} has no parameter with rank {rank}")
        param = params[0]
        if param.type != "SELECTION":
            return _error(400, "invalid_parameter", f"{fact_id} parameter {rank} is {param.type}, not SELECTION")
        table = policy.registry.by_kind(param.option_type or "")
        return Response(200, [{"id": i, "label": table[i].name or i} for i in sorted(table)])

    def _compute_pars(self, policy: PolicyConfig, body: bytes) -> Response:
        try:
            document = json.loads(body.decode("utf-8") or "{}")
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _error(400, "invalid_request", f"request body is not valid JSON: {exc}")
        if not isinstance(document, dict):
            return _error(400, "invalid_request", "request body must be a JSON object")
        priority = document.get("priority", engine.PRIORITY_PERMISSIONS)
        if priority not in (engine.PRIORITY_PERMISSIONS, engine.PRIORITY_PROHIBITIONS):
            return _error(400, "invalid_request", f"unknown priority {priority!r}")
        raw_facts = document.get("customFacts", [])
        if not isinstance(raw_facts, list):
            return _error(400, "invalid_request", "customFacts must be an array")
        instances = []
        singles_seen: set[str] = set()
        for i, raw in enumerate(raw_facts):
            if not isinstance(raw, dict) or not isinstance(raw.get("fact"), str):
                return _error(400, "invalid_fact", "each entry needs a 'fact' id", {"entry": i})
            parameters = raw.get("parameters", [])
            if not isinstance(parameters, list):
                return _error(400, "invalid_fact", "'parameters' must be an array", {"entry": i})
            try:
                decl = policy.decl(raw["fact"])
                if decl.single and decl.fact in singles_seen:
                    raise CustomFactError(f"{decl.fact} is declared single and may appear at most once")
                singles_seen.add(decl.fact)
                instances.append(validate_custom_fact_values(decl, parameters, policy.registry))
            except CustomFactError as exc:
                return _error(400, "invalid_fact", str(exc), {"entry": i})

        started = time.perf_counter()
        try:
            result = engine.evaluate(policy, tuple(instances), priority, self.budget)
        except BudgetExhaustedError as exc:
            return _error(500, "budget_exhausted", str(exc), {"recent_rules": exc.recent_rules})
        except CbacError as exc:
            return _error(500, "evaluation_failed", str(exc))
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        g = graph.build_graph(result.pars, policy.registry)
        payload = {
            "pars": [serialize_par(p) for p in result.pars],
            "graph": graph.node_link_document(g),
            "stats": {"firedCount": result.report.fired_count},
        }
        return Response(200, payload, {"X-Elapsed-Ms": f"{elapsed_ms:.3f}"})


class _Handler(BaseHTTPRequestHandler):
    service: PolicyService  # injected by make_server

    protocol_version = "HTTP/1.1"

    def _dispatch(self, method: str) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        response = self.service.handle(method, self.path, body)
        self.send_response(response.status)
        for key, value in response.headers.items():
            self.send_header(key, value)
        self.send_header("Access-Control-Allow-Origin", self.service.cors_origin)
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", str(len(response.body)))
        self.end_headers()
        if method != "HEAD":
            self.wfile.write(response.body)

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def do_OPTIONS(self) -> None:  # noqa: N802
        self._dispatch("OPTIONS")

    def log_message(self, format: str, *args) -> None:  # quiet by default
        pass


def make_server(service: PolicyService, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)

"""HTTP service exposing analysis and chat, with optional journaling.

State lives in memory; with a journal path configured every analysis and
chat append is also written as one JSON line and replayed on startup, so
a restarted service serves the same results and chat histories.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from starlette.concurrency import run_in_threadpool

from .article import FetchLimits, MediaKind, article_from_dict, kind_from_locator
from .engine import (
    AnalysisResult,
    ChatMessage,
    Engine,
    EngineConfig,
    message_from_dict,
    message_to_dict,
    result_from_dict,
    result_to_dict,
)
from .errors import (
    AnalysisError,
    BackendError,
    FollowupBackendError,
    UnknownAnalysisError,
    ValidationError,
)
from .llm import ModelConfig, build_backend
from .serialization import canonical_json, canonical_json_line

DEFAULT_MAX_BODY_BYTES = 2 * 1024 * 1024

_LOCAL_ORIGIN_REGEX = r"https?://(localhost|127\.0\.0\.1)(:\d+)?"


@dataclass
class ServiceConfig:
    bind_address: str = "127.0.0.1"
    port: int = 8099
    journal_path: Optional[str] = None
    model: ModelConfig = field(default_factory=ModelConfig)
    fetch_limits: FetchLimits = field(default_factory=FetchLimits)
    max_body_bytes: int = DEFAULT_MAX_BODY_BYTES
    cors_origins: Optional[list[str]] = None  # None = permissive local default

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValidationError(f"port {self.port} outside [1, 65535]")
        if self.journal_path is not None:
            parent = Path(self.journal_path).parent
            if not parent.is_dir():
                raise ValidationError(f"journal directory {parent} does not exist")

    @classmethod
    def from_env(cls, **overrides: Any) -> "ServiceConfig":
        model = ModelConfig(
            backend=os.environ.get("MEDIACONTEXT_BACKEND", "mock"),
            endpoint=os.environ.get("MEDIACONTEXT_ENDPOINT"),
            model_name=os.environ.get("MEDIACONTEXT_MODEL", "phi-3-mini"),
            token_env=os.environ.get("MEDIACONTEXT_TOKEN_ENV", "MEDIACONTEXT_TOKEN"),
            mock_script_path=os.environ.get("MEDIACONTEXT_MOCK_SCRIPT"),
        )
        config = {"model": model}
        if os.environ.get("MEDIACONTEXT_JOURNAL"):
            config["journal_path"] = os.environ["MEDIACONTEXT_JOURNAL"]
        config.update(overrides)
        return cls(**config)


class Journal:
    """Append-only JSON-lines event log, flushed per event."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._handle = open(path, "a", encoding="utf-8")

    def append(self, event: dict[str, Any]) -> None:
        with self._lock:
            self._handle.write(canonical_json_line(event) + "\n")
            self._handle.flush()

    def close(self) -> None:
        with self._lock:
            self._handle.close()

    @staticmethod
    def read_events(path: str) -> list[dict[str, Any]]:
        events = []
        if not Path(path).is_file():
            return events
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events


def _json_response(payload: Any, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str, **extra: Any) -> Response:
    body = {"error": {"message": message, **extra}}
    return _json_response(body, status_code)


def _parse_article_payload(payload: dict[str, Any]):
    media = payload.get("media", [])
    if not isinstance(media, list):
        raise ValidationError("article.media must be a list")
    items = []
    for raw in media:
        if not isinstance(raw, dict) or not raw.get("locator"):
            raise ValidationError("each media item needs a locator")
        kind = raw.get("kind")
        if kind is None:
            inferred = kind_from_locator(raw["locator"])
            kind = inferred.value if inferred else MediaKind.IMAGE.value
        if kind not in (k.value for k in MediaKind):
            raise ValidationError(f"unknown media kind {kind!r}")
        items.append(
            {
                "locator": raw["locator"],
                "kind": kind,
                "caption": raw.get("caption"),
                "sidecar": raw.get("sidecar"),
            }
        )
    title = payload.get("title")
    body = payload.get("body")
    if not isinstance(title, str) or not title.strip():
        raise ValidationError("article.title must be non-empty text")
    if not isinstance(body, str) or not body.strip():
        raise ValidationError("article.body must be non-empty text")
    return article_from_dict({"title": title, "body": body, "media": items})


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.engine = Engine(
            build_backend(config.model),
            EngineConfig(fetch_limits=config.fetch_limits),
        )
        # one canonical chat session per analysis for the UI
        self.canonical_sessions: dict[str, str] = {}
        self.journal: Optional[Journal] = None
        if config.journal_path:
            self._replay(config.journal_path)
            self.journal = Journal(config.journal_path)

    def _replay(self, path: str) -> None:
        for event in Journal.read_events(path):
            kind = event.get("event")
            if kind == "analysis":
                self.engine.restore_result(result_from_dict(event["result"]))
            elif kind == "chat":
                self.engine.restore_message(
                    event["session_id"],
                    event["analysis_id"],
                    message_from_dict(event["message"]),
                )
                self.canonical_sessions[event["analysis_id"]] = event["session_id"]

    def record_analysis(self, result: AnalysisResult) -> None:
        if self.journal is not None:
            self.journal.append({"event": "analysis", "result": result_to_dict(result)})

    def record_message(self, analysis_id: str, session_id: str, message: ChatMessage) -> None:
        if self.journal is not None:
            self.journal.append(
                {
                    "event": "chat",
                    "analysis_id": analysis_id,
                    "session_id": session_id,
                    "message": message_to_dict(message),
                }
            )


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    state = ServiceState(config)
    app = FastAPI(title="mediacontext", docs_url=None, redoc_url=None)
    app.state.service = state

    if config.cors_origins is not None:
        app.add_middleware(CORSMiddleware, allow_origins=config.cors_origins, allow_methods=["*"], allow_headers=["*"])
    else:
        app.add_middleware(
            CORSMiddleware,
            allow_origin_regex=_LOCAL_ORIGIN_REGEX,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    async def _read_json_body(request: Request) -> dict[str, Any]:
        raw = await request.body()
        if len(raw) > config.max_body_bytes:
            raise ValidationError(f"request body exceeds {config.max_body_bytes} bytes")
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise ValidationError(f"request body is not JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ValidationError("request body must be a JSON object")
        return payload

    @app.post("/api/analyze")
    async def analyze(request: Request) -> Response:
        try:
            payload = await _read_json_body(request)
        except ValidationError as exc:
            status = 413 if "exceeds" in str(exc) else 400
            return _error(status, str(exc))
        has_url = "url" in payload
        has_article = "article" in payload
        if has_url == has_article:
            return _error(400, "provide exactly one of 'url' or 'article'")
        try:
            if has_url:
                if not isinstance(payload["url"], str) or not payload["url"].strip():
                    return _error(400, "'url' must be non-empty text")
                source = payload["url"]
            else:
                if not isinstance(payload["article"], dict):
                    return _error(400, "'article' must be an object")
                source = _parse_article_payload(payload["article"])
        except ValidationError as exc:
            return _error(400, str(exc))
        try:
            # engine work is blocking (HTTP fetches, model call); keep it off
            # the event loop so the service stays responsive
            result = await run_in_threadpool(state.engine.analyze, source)
        except AnalysisError as exc:
            if exc.stage == "ingest":
                return _error(422, str(exc), stage=exc.stage)
            return _error(502, str(exc), stage=exc.stage)
        except ValidationError as exc:
            return _error(400, str(exc))
        state.record_analysis(result)
        return _json_response({"id": result.id, "result": result_to_dict(result)})

    @app.get("/api/analyses/{analysis_id}")
    async def get_analysis(analysis_id: str) -> Response:
        try:
            result = state.engine.get_result(analysis_id)
        except UnknownAnalysisError as exc:
            return _error(404, str(exc))
        return _json_response({"result": result_to_dict(result)})

    @app.post("/api/analyses/{analysis_id}/chat")
    async def chat(analysis_id: str, request: Request) -> Response:
        try:
            payload = await _read_json_body(request)
        except ValidationError as exc:
            status = 413 if "exceeds" in str(exc) else 400
            return _error(status, str(exc))
        question = payload.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error(400, "'question' must be non-empty text")
        try:
            state.engine.get_result(analysis_id)
        except UnknownAnalysisError as exc:
            return _error(404, str(exc))
        session_id = state.canonical_sessions.get(analysis_id)
        if session_id is None:
            session = state.engine.start_session(analysis_id)
            session_id = session.id
            state.canonical_sessions[analysis_id] = session_id
        before = len(state.engine.get_session(session_id).messages)
        backend_failed: Optional[str] = None
        try:
            await run_in_threadpool(state.engine.ask_followup, session_id, question)
        except FollowupBackendError as exc:
            backend_failed = str(exc)
        except BackendError as exc:
            backend_failed = str(exc)
        session = state.engine.get_session(session_id)
        for message in session.messages[before:]:
            state.record_message(analysis_id, session_id, message)
        body = {
            "session_id": session_id,
            "messages": [message_to_dict(m) for m in session.messages],
        }
        if backend_failed is not None:
            body["error"] = {"message": backend_failed}
            return _json_response(body, 502)
        return _json_response(body)

    @app.get("/api/health")
    async def health() -> Response:
        return _json_response({"status": "ok", "backend": config.model.backend})

    return app

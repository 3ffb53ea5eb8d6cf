"""Pipeline orchestration: ingest, provenance, verdict, boxes, and chat.

``analyze`` never aborts on per-media failures; it degrades with explicit
warnings so absent or unreadable provenance stays visible instead of
silently shaping the verdict. Chat sessions are strictly append-only.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping, Optional, Union
from urllib.parse import urlparse

from .article import (
    Article,
    FetchLimits,
    MEDIA_FETCH_LIMITS,
    MediaItem,
    MediaKind,
    article_from_dict,
    article_to_dict,
    extract_article,
    fetch_article,
)
from .errors import (
    AnalysisError,
    AssessmentParseError,
    BackendError,
    ExtractionError,
    FetchError,
    FollowupBackendError,
    ManifestParseError,
    SidecarValidationError,
    UnknownAnalysisError,
    UnknownSessionError,
    ValidationError,
)
from .llm import (
    Assessment,
    BODY_CHAR_LIMIT,
    OverallLabel,
    PromptBundle,
    assessment_from_dict,
    assessment_to_dict,
    render_inference_prompt,
    render_followup_prompt,
    render_system_prompt,
    request_assessment,
)
from .provenance.container import detect_media_format, extract_embedded_manifest
from .provenance.manifest import parse_manifest_store
from .provenance.model import (
    OriginMethod,
    ProvenanceRecord,
    ProvenanceSummary,
    SummaryStatus,
    TamperClass,
    classify_actions,
    filter_fields,
    render_summary,
    summary_no_metadata,
    summary_parse_error,
    summary_unsupported_kind,
)
from .provenance.sidecar import find_sidecar, load_sidecar
from .serialization import format_utc, parse_utc, utc_now

NO_METADATA_WARNING = "No provenance metadata is available for one or more media items."
TRUNCATION_WARNING = "Article body was truncated before being sent to the model."
FOLLOWUP_FAILURE_NOTICE = "The model backend failed to answer this question."


# heuristic_tamper_class extends TamperClass with "unknown" for the
# no-provenance case; serialized as plain strings.
HEURISTIC_UNKNOWN = "unknown"


@dataclass
class ThreeBoxView:
    """The result layout: overall verdict on top, then the two topic boxes."""

    overall_label: OverallLabel
    overall_headline: str
    location_flag: bool
    location_reason: str
    tampering_flag: bool
    tampering_reason: str


@dataclass
class AnalysisResult:
    article: Article
    summaries: list[ProvenanceSummary]
    assessment: Assessment
    boxes: ThreeBoxView
    warnings: list[str]
    heuristic_tamper_class: str
    created_at: datetime
    id: str


@dataclass
class ChatMessage:
    role: str  # "user" | "assistant"
    text: str
    at: datetime


@dataclass
class ChatSession:
    id: str
    analysis_id: str
    messages: list[ChatMessage] = field(default_factory=list)


_HEADLINES = {
    OverallLabel.RELEVANT: "The attached media appear relevant to this story.",
    OverallLabel.NOT_RELEVANT: "The attached media do not appear relevant to this story.",
}


def structure_boxes(assessment: Assessment) -> ThreeBoxView:
    """Map the five verdict fields onto the five display fields."""
    return ThreeBoxView(
        overall_label=assessment.overall,
        overall_headline=_HEADLINES[assessment.overall],
        location_flag=assessment.origin_relevant,
        location_reason=assessment.origin_reason,
        tampering_flag=assessment.edits_relevant,
        tampering_reason=assessment.edits_reason,
    )


def aggregate_media(assessments: list[Assessment]) -> Assessment:
    """Combine per-media verdicts: any NOT RELEVANT vetoes the whole.

    Only exercised in per-media mode; the default pipeline sends all media
    in a single prompt.
    """
    if not assessments:
        raise ValidationError("cannot aggregate an empty assessment list")
    overall = (
        OverallLabel.NOT_RELEVANT
        if any(a.overall is OverallLabel.NOT_RELEVANT for a in assessments)
        else OverallLabel.RELEVANT
    )

    def _join(reasons: list[str]) -> str:
        return " ".join(f"[media {i + 1}] {reason}" for i, reason in enumerate(reasons))

    return Assessment(
        origin_relevant=all(a.origin_relevant for a in assessments),
        origin_reason=_join([a.origin_reason for a in assessments]),
        edits_relevant=all(a.edits_relevant for a in assessments),
        edits_reason=_join([a.edits_reason for a in assessments]),
        overall=overall,
        raw_model_output=_join([a.raw_model_output for a in assessments]),
    )


def _is_local_path(locator: str) -> bool:
    scheme = urlparse(locator).scheme.lower()
    return scheme in ("", "file")


def _local_path(locator: str) -> Path:
    return Path(locator[7:]) if locator.lower().startswith("file://") else Path(locator)


@dataclass
class EngineConfig:
    fetch_limits: FetchLimits = field(default_factory=FetchLimits)
    media_limits: FetchLimits = field(default_factory=lambda: MEDIA_FETCH_LIMITS)
    per_media: bool = False
    max_repair_retries: int = 1


class Engine:
    """Runs analyses and owns the result/session stores."""

    def __init__(self, backend, config: Optional[EngineConfig] = None):
        self.backend = backend
        self.config = config or EngineConfig()
        self.results: dict[str, AnalysisResult] = {}
        self.sessions: dict[str, ChatSession] = {}
        self._store_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}

    # -- pipeline ---------------------------------------------------------

    def analyze(self, source: Union[str, Article]) -> AnalysisResult:
        warnings: list[str] = []
        if isinstance(source, str):
            try:
                raw = fetch_article(source, self.config.fetch_limits)
                article = extract_article(raw, raw.final_url)
            except (FetchError, ExtractionError, ValidationError) as exc:
                raise AnalysisError("ingest", str(exc)) from exc
        else:
            article = source

        resolved, summaries, records = self._gather_provenance(article, warnings)

        if any(summary.status is not SummaryStatus.OK for summary in summaries) or not resolved.media:
            warnings.append(NO_METADATA_WARNING)
        if len(resolved.body) > BODY_CHAR_LIMIT:
            warnings.append(TRUNCATION_WARNING)

        try:
            assessment = self._assess(resolved, summaries)
        except BackendError as exc:
            raise AnalysisError("model", str(exc)) from exc
        except AssessmentParseError as exc:
            raise AnalysisError("parse", str(exc)) from exc

        result = AnalysisResult(
            article=resolved,
            summaries=summaries,
            assessment=assessment,
            boxes=structure_boxes(assessment),
            warnings=warnings,
            heuristic_tamper_class=self._heuristic_class(records),
            created_at=utc_now(),
            id=secrets.token_hex(16),
        )
        with self._store_lock:
            self.results[result.id] = result
        return result

    def _gather_provenance(
        self, article: Article, warnings: list[str]
    ) -> tuple[Article, list[ProvenanceSummary], list[ProvenanceRecord]]:
        from .article import resolve_media

        items: list[MediaItem] = []
        summaries: list[ProvenanceSummary] = []
        records: list[ProvenanceRecord] = []
        for item in article.media:
            resolved, error = resolve_media(item, self.config.media_limits)
            if error is not None:
                warnings.append(error)
            items.append(resolved)
            if resolved.kind is not MediaKind.IMAGE:
                summaries.append(summary_unsupported_kind(resolved.locator))
                continue
            summary, record = self._provenance_for(resolved, warnings)
            summaries.append(summary)
            if record is not None:
                records.append(record)
        resolved_article = Article(
            title=article.title,
            body=article.body,
            media=items,
            source_url=article.source_url,
            fetched_at=article.fetched_at,
        )
        return resolved_article, summaries, records

    def _provenance_for(
        self, item: MediaItem, warnings: list[str]
    ) -> tuple[ProvenanceSummary, Optional[ProvenanceRecord]]:
        record: Optional[ProvenanceRecord] = None
        store = None
        if item.content is not None:
            media_format = item.media_format or detect_media_format(item.content)
            if media_format in ("jpeg", "png"):
                try:
                    store = extract_embedded_manifest(item.content, media_format)
                except ManifestParseError as exc:
                    warnings.append(f"provenance unreadable for {item.locator}: {exc}")
                    return summary_parse_error(item.locator), None
        if store is not None:
            try:
                record = parse_manifest_store(store)
            except ManifestParseError as exc:
                warnings.append(f"provenance unreadable for {item.locator}: {exc}")
                return summary_parse_error(item.locator), None
        if record is None:
            document = item.sidecar
            if document is None and _is_local_path(item.locator):
                try:
                    document = find_sidecar(_local_path(item.locator))
                except SidecarValidationError as exc:
                    warnings.append(f"sidecar unreadable for {item.locator}: {exc}")
                    return summary_parse_error(item.locator), None
            if document is not None:
                try:
                    record = load_sidecar(document)
                except SidecarValidationError as exc:
                    warnings.append(f"sidecar invalid for {item.locator}: {exc}")
                    return summary_parse_error(item.locator), None
        if record is None:
            return summary_no_metadata(item.locator), None
        filtered = filter_fields(record)
        return render_summary(filtered, item.locator), filtered

    def _assess(self, article: Article, summaries: list[ProvenanceSummary]) -> Assessment:
        system = render_system_prompt()
        if self.config.per_media and article.media:
            per_media = []
            for item, summary in zip(article.media, summaries):
                view = Article(
                    title=article.title,
                    body=article.body,
                    media=[item],
                    source_url=article.source_url,
                    fetched_at=article.fetched_at,
                )
                bundle = PromptBundle(system=system, user=render_inference_prompt(view, [summary]))
                per_media.append(
                    request_assessment(bundle, self.backend, self.config.max_repair_retries)
                )
            return aggregate_media(per_media)
        bundle = PromptBundle(system=system, user=render_inference_prompt(article, summaries))
        return request_assessment(bundle, self.backend, self.config.max_repair_retries)

    @staticmethod
    def _heuristic_class(records: list[ProvenanceRecord]) -> str:
        if not records:
            return HEURISTIC_UNKNOWN
        classes = {classify_actions(r.actions, r.origin_method) for r in records}
        if TamperClass.GENERATED in classes:
            return TamperClass.GENERATED.value
        if TamperClass.EDITED in classes:
            return TamperClass.EDITED.value
        return TamperClass.BENIGN.value

    # -- store ------------------------------------------------------------

    def get_result(self, analysis_id: str) -> AnalysisResult:
        with self._store_lock:
            result = self.results.get(analysis_id)
        if result is None:
            raise UnknownAnalysisError(f"unknown analysis id {analysis_id!r}")
        return result

    # -- chat ---------------------------------------------------------------

    def start_session(self, analysis_id: str, session_id: Optional[str] = None) -> ChatSession:
        with self._store_lock:
            if analysis_id not in self.results:
                raise UnknownAnalysisError(f"unknown analysis id {analysis_id!r}")
            session = ChatSession(id=session_id or secrets.token_hex(16), analysis_id=analysis_id)
            self.sessions[session.id] = session
            self._session_locks[session.id] = threading.Lock()
        return session

    def get_session(self, session_id: str) -> ChatSession:
        with self._store_lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"unknown session id {session_id!r}")
        return session

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._store_lock:
            lock = self._session_locks.get(session_id)
        if lock is None:
            raise UnknownSessionError(f"unknown session id {session_id!r}")
        return lock

    def ask_followup(self, session_id: str, question: str) -> str:
        """Ask a follow-up; appends the question and the reply (or a fixed
        failure notice) so the history only ever grows."""
        if not question.strip():
            raise ValidationError("follow-up question must be non-empty")
        session = self.get_session(session_id)
        result = self.get_result(session.analysis_id)
        lock = self._session_lock(session_id)
        with lock:
            reasoning_parts = [
                result.assessment.origin_reason,
                result.assessment.edits_reason,
            ] + [m.text for m in session.messages if m.role == "assistant"]
            prompt = render_followup_prompt(" ".join(reasoning_parts), question)
            bundle = PromptBundle(system=render_system_prompt(), user=prompt)
            session.messages.append(ChatMessage("user", question, utc_now()))
            try:
                reply = self.backend.complete(bundle)
            except BackendError as exc:
                session.messages.append(ChatMessage("assistant", FOLLOWUP_FAILURE_NOTICE, utc_now()))
                raise FollowupBackendError(session_id, FOLLOWUP_FAILURE_NOTICE) from exc
            session.messages.append(ChatMessage("assistant", reply, utc_now()))
            return reply

    # -- journal replay support ---------------------------------------------

    def restore_result(self, result: AnalysisResult) -> None:
        with self._store_lock:
            self.results[result.id] = result

    def restore_message(self, session_id: str, analysis_id: str, message: ChatMessage) -> None:
        with self._store_lock:
            session = self.sessions.get(session_id)
            if session is None:
                session = ChatSession(id=session_id, analysis_id=analysis_id)
                self.sessions[session_id] = session
                self._session_locks[session_id] = threading.Lock()
            session.messages.append(message)


# --- serialization -----------------------------------------------------------


def boxes_to_dict(boxes: ThreeBoxView) -> dict[str, Any]:
    return {
        "overall": {"label": boxes.overall_label.value, "headline": boxes.overall_headline},
        "location_source": {"flag": boxes.location_flag, "reason": boxes.location_reason},
        "tampering": {"flag": boxes.tampering_flag, "reason": boxes.tampering_reason},
    }


def boxes_from_dict(data: Mapping[str, Any]) -> ThreeBoxView:
    return ThreeBoxView(
        overall_label=OverallLabel(data["overall"]["label"]),
        overall_headline=data["overall"]["headline"],
        location_flag=data["location_source"]["flag"],
        location_reason=data["location_source"]["reason"],
        tampering_flag=data["tampering"]["flag"],
        tampering_reason=data["tampering"]["reason"],
    )


def summary_to_dict(summary: ProvenanceSummary) -> dict[str, Any]:
    return {"media_ref": summary.media_ref, "text": summary.text, "status": summary.status.value}


def summary_from_dict(data: Mapping[str, Any]) -> ProvenanceSummary:
    return ProvenanceSummary(data["media_ref"], data["text"], SummaryStatus(data["status"]))


def result_to_dict(result: AnalysisResult) -> dict[str, Any]:
    return {
        "id": result.id,
        "created_at": format_utc(result.created_at),
        "article": article_to_dict(result.article),
        "summaries": [summary_to_dict(s) for s in result.summaries],
        "assessment": assessment_to_dict(result.assessment),
        "boxes": boxes_to_dict(result.boxes),
        "warnings": list(result.warnings),
        "heuristic_tamper_class": result.heuristic_tamper_class,
    }


def result_from_dict(data: Mapping[str, Any]) -> AnalysisResult:
    return AnalysisResult(
        article=article_from_dict(data["article"]),
        summaries=[summary_from_dict(s) for s in data["summaries"]],
        assessment=assessment_from_dict(data["assessment"]),
        boxes=boxes_from_dict(data["boxes"]),
        warnings=list(data["warnings"]),
        heuristic_tamper_class=data["heuristic_tamper_class"],
        created_at=parse_utc(data["created_at"]),
        id=data["id"],
    )


def message_to_dict(message: ChatMessage) -> dict[str, Any]:
    return {"role": message.role, "text": message.text, "at": format_utc(message.at)}


def message_from_dict(data: Mapping[str, Any]) -> ChatMessage:
    return ChatMessage(role=data["role"], text=data["text"], at=parse_utc(data["at"]))

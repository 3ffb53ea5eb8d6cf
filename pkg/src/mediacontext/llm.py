"""Prompt rendering, model backends, and verdict parsing.

The three prompts are fixed: the system prompt lives as a canonical text
fixture, the inference prompt lays out article fields and provenance
summaries in a set order, and the follow-up prompt substitutes two slots
into an otherwise untouched template. The model's quasi-JSON reply (it may
use Python literals, or bury the object in prose) is normalized and parsed
into an :class:`Assessment`.
"""

from __future__ import annotations

import hashlib
import json
import re
import string
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Any, Mapping, Optional

import requests

from .article import Article
from .errors import (
    AssessmentParseError,
    BackendEnvelopeError,
    BackendStatusError,
    BackendTransportError,
    PromptContractError,
    UnscriptedRequestError,
    ValidationError,
)
from .provenance.model import ProvenanceSummary

#: Body text sent to the model is capped here, cut at a paragraph boundary.
BODY_CHAR_LIMIT = 12_000
TRUNCATION_MARKER = "[truncated]"

REPAIR_INSTRUCTION = "Return only the JSON object in the required format."

_REQUIRED_KEYS = ("1-relevant", "1-reason", "2-relevant", "2-reason", "3-assessment")

_SYSTEM_PROMPT = (
    resources.files("mediacontext").joinpath("prompts/system_prompt.txt").read_text("utf-8")
)


class OverallLabel(str, Enum):
    RELEVANT = "RELEVANT"
    NOT_RELEVANT = "NOT RELEVANT"


@dataclass(frozen=True)
class PromptBundle:
    system: str
    user: str


@dataclass
class ModelConfig:
    backend: str = "mock"  # "mock" | "remote"
    endpoint: Optional[str] = None
    model_name: str = "phi-3-mini"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    timeout: float = 60.0
    max_repair_retries: int = 1
    token_env: str = "MEDIACONTEXT_TOKEN"  # env var NAME holding the bearer token
    mock_script_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.backend not in ("mock", "remote"):
            raise ValidationError(f"unknown backend {self.backend!r}")
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if not 0 <= self.max_repair_retries <= 2:
            raise ValidationError("max_repair_retries must be in [0, 2]")


@dataclass
class Assessment:
    origin_relevant: bool
    origin_reason: str
    edits_relevant: bool
    edits_reason: str
    overall: OverallLabel
    raw_model_output: str = ""


# --- rendering --------------------------------------------------------------


def render_system_prompt() -> str:
    """The canonical system prompt; the fixture file is the normative bytes."""
    return _SYSTEM_PROMPT


def truncate_body(body: str) -> tuple[str, bool]:
    """Cap the body at BODY_CHAR_LIMIT on a paragraph boundary, visibly."""
    if len(body) <= BODY_CHAR_LIMIT:
        return body, False
    head = body[:BODY_CHAR_LIMIT]
    boundary = head.rfind("\n\n")
    if boundary > 0:
        head = head[:boundary]
    return head.rstrip() + "\n" + TRUNCATION_MARKER, True


def render_inference_prompt(article: Article, summaries: list[ProvenanceSummary]) -> str:
    """Lay out title, body, and per-media caption/metadata blocks in order."""
    if len(summaries) != len(article.media):
        raise PromptContractError(
            f"{len(summaries)} summaries for {len(article.media)} media items"
        )
    body, _ = truncate_body(article.body)
    lines = [f"- title: {article.title}", f"- body: {body}"]
    if not article.media:
        lines.append("- attached media: none")
    for item, summary in zip(article.media, summaries):
        lines.append(f"- image caption: {item.caption if item.caption else '(none)'}")
        lines.append("- provenance metadata:")
        for summary_line in summary.text.split("\n"):
            lines.append("  " + summary_line)
    return "\n".join(lines)


def render_followup_prompt(current_reasoning: str, question: str) -> str:
    """Fill the two slots of the follow-up template, altering nothing else."""
    if not question.strip():
        raise ValidationError("follow-up question must be non-empty")
    return (
        f"Here is your current reasoning: {current_reasoning}. "
        f"Generate a verbose response to the following question, "
        f"highlighting the importance of provenance metadata: {question}."
    )


# --- backends ----------------------------------------------------------------


def request_digest(bundle: PromptBundle) -> str:
    """Content digest keying mock scripts: sha256 over system + RS + user."""
    material = bundle.system + "\x1e" + bundle.user
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class MockBackend:
    """Scripted backend: digest-keyed responses with an optional default."""

    def __init__(self, script: Optional[Mapping[str, str]] = None, default: Optional[str] = None):
        self._script = dict(script or {})
        self._default = self._script.pop("default", default)
        self.calls: list[PromptBundle] = []

    @classmethod
    def from_file(cls, path: str) -> "MockBackend":
        with open(path, "r", encoding="utf-8") as handle:
            return cls(json.load(handle))

    def complete(self, bundle: PromptBundle) -> str:
        self.calls.append(bundle)
        digest = request_digest(bundle)
        if digest in self._script:
            return self._script[digest]
        if self._default is not None:
            return self._default
        raise UnscriptedRequestError(f"no scripted response for digest {digest[:12]}…")


class RemoteBackend:
    """Chat-completions-style HTTP backend."""

    def __init__(self, config: ModelConfig):
        if not config.endpoint:
            raise ValidationError("remote backend requires an endpoint")
        self._config = config

    def complete(self, bundle: PromptBundle) -> str:
        import os

        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self._config.token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {
            "model": self._config.model_name,
            "messages": [
                {"role": "system", "content": bundle.system},
                {"role": "user", "content": bundle.user},
            ],
            "temperature": self._config.temperature,
            "max_tokens": self._config.max_output_tokens,
        }
        try:
            response = requests.post(
                self._config.endpoint,
                json=payload,
                headers=headers,
                timeout=self._config.timeout,
            )
        except requests.RequestException as exc:
            raise BackendTransportError(f"backend unreachable: {exc}") from exc
        if not 200 <= response.status_code < 300:
            raise BackendStatusError(response.status_code)
        try:
            envelope = response.json()
            content = envelope["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendEnvelopeError(f"malformed response envelope: {exc}") from exc
        if not isinstance(content, str):
            raise BackendEnvelopeError("message content is not text")
        return content


def build_backend(config: ModelConfig):
    if config.backend == "mock":
        if config.mock_script_path:
            return MockBackend.from_file(config.mock_script_path)
        return MockBackend()
    return RemoteBackend(config)


def complete(bundle: PromptBundle, config: ModelConfig) -> str:
    """One-shot completion against a backend built from ``config``."""
    return build_backend(config).complete(bundle)


# --- verdict parsing ----------------------------------------------------------


def _balanced_regions(text: str):
    """Yield candidate {...} regions, earliest start first, quote-aware."""
    start = text.find("{")
    while start >= 0:
        depth = 0
        quote: Optional[str] = None
        escaped = False
        for index in range(start, len(text)):
            char = text[index]
            if quote is not None:
                if escaped:
                    escaped = False
                elif char == "\\":
                    escaped = True
                elif char == quote:
                    quote = None
                continue
            if char in "'\"":
                quote = char
            elif char == "{":
                depth += 1
            elif char == "}":
                depth -= 1
                if depth == 0:
                    yield text[start : index + 1]
                    break
        start = text.find("{", start + 1)


def _json_escape_codepoint(codepoint: int) -> str:
    if codepoint < 0x10000:
        return f"\\u{codepoint:04x}"
    reduced = codepoint - 0x10000
    return f"\\u{0xD800 + (reduced >> 10):04x}\\u{0xDC00 + (reduced & 0x3FF):04x}"


def _translate_escape(region: str, index: int, body: list[str]) -> int:
    """Convert one Python escape at ``index`` ('\\' position) to JSON form.

    Returns the index just past the consumed escape. Python-only escapes
    (\\xNN, \\U........, \\a, \\v, octal) become \\uXXXX; unknown escapes
    keep a literal backslash, matching Python's own behavior.
    """
    nxt = region[index + 1]
    if nxt == "'":
        body.append("'")  # \' has no meaning in JSON
        return index + 2
    if nxt in "\"\\/bfnrt":
        body.append("\\" + nxt)
        return index + 2
    if nxt in "xuU":
        width = {"x": 2, "u": 4, "U": 8}[nxt]
        digits = region[index + 2 : index + 2 + width]
        if len(digits) == width and all(c in string.hexdigits for c in digits):
            body.append(_json_escape_codepoint(int(digits, 16)))
            return index + 2 + width
        body.append("\\\\" + nxt)  # malformed: keep a literal backslash
        return index + 2
    if nxt == "a":
        body.append("\\u0007")
        return index + 2
    if nxt == "v":
        body.append("\\u000b")
        return index + 2
    if nxt in "01234567":
        digits = nxt
        for offset in (2, 3):
            candidate = region[index + offset : index + offset + 1]
            if candidate and candidate in "01234567":
                digits += candidate
            else:
                break
        body.append(_json_escape_codepoint(int(digits, 8)))
        return index + 1 + len(digits)
    body.append("\\\\" + nxt)
    return index + 2


def _normalize_literals(region: str) -> str:
    """Rewrite Python-style literals to strict JSON outside string bodies."""
    out: list[str] = []
    index = 0
    length = len(region)
    while index < length:
        char = region[index]
        if char == "'" or char == '"':
            quote = char
            index += 1
            body: list[str] = []
            while index < length:
                current = region[index]
                if current == "\\" and index + 1 < length:
                    index = _translate_escape(region, index, body)
                    continue
                if current == quote:
                    index += 1
                    break
                if current == '"':
                    body.append('\\"')
                elif current == "\n":
                    body.append("\\n")
                elif current == "\r":
                    body.append("\\r")
                elif current == "\t":
                    body.append("\\t")
                elif ord(current) < 0x20:
                    body.append(_json_escape_codepoint(ord(current)))
                else:
                    body.append(current)
                index += 1
            out.append('"' + "".join(body) + '"')
            continue
        if char.isalpha():
            match = re.match(r"[A-Za-z_]+", region[index:])
            word = match.group(0) if match else char
            replacement = {"True": "true", "False": "false", "None": "null"}.get(word, word)
            out.append(replacement)
            index += len(word)
            continue
        if char == ",":
            # drop trailing commas before a closer
            lookahead = index + 1
            while lookahead < length and region[lookahead] in " \t\r\n":
                lookahead += 1
            if lookahead < length and region[lookahead] in "}]":
                index += 1
                continue
        out.append(char)
        index += 1
    return "".join(out)


def _coerce_bool(value: Any, key: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise AssessmentParseError(f"key {key!r} is not a boolean")


def _coerce_reason(value: Any, key: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise AssessmentParseError(f"empty value for key {key!r}")
    return value


def parse_assessment(model_output: str) -> Assessment:
    """Structure the model's reply into an Assessment.

    Finds the first balanced brace region that parses as JSON after literal
    normalization, then checks the five required keys and the overall label.
    """
    data: Optional[dict[str, Any]] = None
    for region in _balanced_regions(model_output):
        try:
            candidate = json.loads(_normalize_literals(region))
        except ValueError:
            continue
        if isinstance(candidate, dict):
            data = candidate
            break
    if data is None:
        raise AssessmentParseError("no JSON object found")
    for key in _REQUIRED_KEYS:
        if key not in data:
            raise AssessmentParseError(f'missing key "{key}"')
    label_raw = data["3-assessment"]
    if not isinstance(label_raw, str):
        raise AssessmentParseError("assessment label is not text")
    label_text = re.sub(r"[\s_]+", " ", label_raw.strip()).upper()
    try:
        overall = OverallLabel(label_text)
    except ValueError:
        raise AssessmentParseError(f"unrecognized assessment label {label_raw!r}") from None
    return Assessment(
        origin_relevant=_coerce_bool(data["1-relevant"], "1-relevant"),
        origin_reason=_coerce_reason(data["1-reason"], "1-reason"),
        edits_relevant=_coerce_bool(data["2-relevant"], "2-relevant"),
        edits_reason=_coerce_reason(data["2-reason"], "2-reason"),
        overall=overall,
        raw_model_output=model_output,
    )


def serialize_assessment(assessment: Assessment, style: str = "json") -> str:
    """Render an Assessment back into the model's answer format.

    ``style="python"`` mirrors the dictionary-with-Python-literals shape the
    model tends to produce; ``"json"`` is strict JSON. Useful for authoring
    mock scripts.
    """
    if style == "python":
        return (
            "{"
            f"'1-relevant': {assessment.origin_relevant}, "
            f"'1-reason': {assessment.origin_reason!r}, "
            f"'2-relevant': {assessment.edits_relevant}, "
            f"'2-reason': {assessment.edits_reason!r}, "
            f"'3-assessment': '{assessment.overall.value}'"
            "}"
        )
    return json.dumps(
        {
            "1-relevant": assessment.origin_relevant,
            "1-reason": assessment.origin_reason,
            "2-relevant": assessment.edits_relevant,
            "2-reason": assessment.edits_reason,
            "3-assessment": assessment.overall.value,
        },
        ensure_ascii=False,
    )


def request_assessment(bundle: PromptBundle, backend, max_repair_retries: int = 1) -> Assessment:
    """Complete and parse, re-asking on parse failure up to the retry cap.

    The repair turn sends the model its prior output plus a fixed
    instruction to return only the JSON object.
    """
    text = backend.complete(bundle)
    attempts = 0
    while True:
        try:
            return parse_assessment(text)
        except AssessmentParseError:
            if attempts >= max_repair_retries:
                raise
            attempts += 1
            repair = PromptBundle(
                system=bundle.system,
                user=text + "\n\n" + REPAIR_INSTRUCTION,
            )
            text = backend.complete(repair)


# --- assessment serialization (canonical documents) ---------------------------


def assessment_to_dict(assessment: Assessment) -> dict[str, Any]:
    return {
        "origin_relevant": assessment.origin_relevant,
        "origin_reason": assessment.origin_reason,
        "edits_relevant": assessment.edits_relevant,
        "edits_reason": assessment.edits_reason,
        "overall": assessment.overall.value,
        "raw_model_output": assessment.raw_model_output,
    }


def assessment_from_dict(data: Mapping[str, Any]) -> Assessment:
    return Assessment(
        origin_relevant=data["origin_relevant"],
        origin_reason=data["origin_reason"],
        edits_relevant=data["edits_relevant"],
        edits_reason=data["edits_reason"],
        overall=OverallLabel(data["overall"]),
        raw_model_output=data.get("raw_model_output", ""),
    )

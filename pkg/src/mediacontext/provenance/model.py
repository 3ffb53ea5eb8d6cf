"""Provenance domain types, field filtering, summary rendering, and the
offline tampering classifier.

The record mirrors what a decoded manifest contributes to the analysis:
where/when/how the media came to be and which edits were applied since.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Any, Mapping, Optional

from ..serialization import format_utc, parse_utc

_ACTION_ID_RE = re.compile(r"^[A-Za-z0-9_-]+(\.[A-Za-z0-9_-]+)*$")

# Source-type URIs announce generation/composition/capture; matching is
# case-insensitive substring so vocabulary variants still classify.
_GENERATED_MARKER = "algorithmicmedia"
_COMPOSITE_MARKER = "composite"
_CAPTURE_MARKER = "digitalcapture"

SOURCE_TYPE_CAPTURED = "http://cv.iptc.org/newscodes/digitalsourcetype/digitalCapture"
SOURCE_TYPE_GENERATED = "http://cv.iptc.org/newscodes/digitalsourcetype/trainedAlgorithmicMedia"
SOURCE_TYPE_COMPOSITED = "http://cv.iptc.org/newscodes/digitalsourcetype/composite"

# Edit actions that do not count as tampering. Anything outside this set is
# treated as an edit (fail-closed).
BENIGN_ACTIONS = frozenset(
    {
        "c2pa.created",
        "c2pa.opened",
        "c2pa.resized",
        "c2pa.published",
        "c2pa.converted",
        "c2pa.repackaged",
    }
)


class OriginMethod(str, Enum):
    CAPTURED = "captured"
    GENERATED = "generated"
    COMPOSITED = "composited"
    UNKNOWN = "unknown"


class IngestPath(str, Enum):
    EMBEDDED = "embedded"
    SIDECAR = "sidecar"


class TamperClass(str, Enum):
    BENIGN = "benign"
    EDITED = "edited"
    GENERATED = "generated"


class SummaryStatus(str, Enum):
    OK = "ok"
    NO_METADATA = "no_metadata"
    PARSE_ERROR = "parse_error"
    UNSUPPORTED_KIND = "unsupported_kind"


@dataclass(frozen=True)
class GeoPoint:
    """Decimal-degree coordinate; float64 keeps well over six decimals."""

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass
class EditAction:
    """One entry of the manifest's edit history, in manifest order."""

    action_id: str
    when: Optional[datetime] = None
    software_agent: Optional[str] = None
    parameters: Optional[dict[str, Any]] = None

    def __post_init__(self) -> None:
        if not _ACTION_ID_RE.match(self.action_id or ""):
            raise ValueError(f"invalid action id {self.action_id!r}")
        if self.when is not None:
            self.when = self.when.replace(microsecond=0)

    def declares_generation(self) -> bool:
        return _source_type_of(self.parameters or {}).find(_GENERATED_MARKER) >= 0


def _source_type_of(params: Mapping[str, Any]) -> str:
    for key in ("digitalSourceType", "digital_source_type"):
        value = params.get(key)
        if isinstance(value, str):
            return value.lower()
    return ""


@dataclass
class ProvenanceRecord:
    """Decoded origin/edit facts for one media item.

    ``raw_fields`` keeps everything retained for audit that is not one of
    the first-class fields (unrecognized assertions, precision notes,
    trust notes); :func:`filter_fields` clears it.
    """

    capture_time: Optional[datetime] = None
    capture_location: Optional[GeoPoint] = None
    place_name: Optional[str] = None
    creator: Optional[str] = None
    claim_generator: Optional[str] = None
    origin_method: OriginMethod = OriginMethod.UNKNOWN
    actions: list[EditAction] = field(default_factory=list)
    signature_present: bool = False
    ingest_path: IngestPath = IngestPath.EMBEDDED
    raw_fields: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.capture_time is not None:
            self.capture_time = self.capture_time.replace(microsecond=0)
        # Generation declared anywhere in the history dominates the stated
        # origin method; the record never claims a milder origin.
        if any(a.declares_generation() for a in self.actions):
            self.origin_method = OriginMethod.GENERATED

    def retained_fields(self) -> tuple:
        """The tuple filter_fields keeps; equality basis for round-trips."""
        return (
            self.capture_time,
            self.capture_location,
            self.place_name,
            self.creator,
            self.claim_generator,
            self.origin_method,
            tuple((a.action_id, a.when, a.software_agent, _freeze(a.parameters)) for a in self.actions),
            self.signature_present,
        )


def _freeze(value: Any) -> Any:
    if isinstance(value, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in value.items()))
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


@dataclass
class ProvenanceSummary:
    """LLM-readable rendering of one media item's provenance."""

    media_ref: str
    text: str
    status: SummaryStatus


NO_METADATA_SENTENCE = "No provenance metadata is available for this media."
PARSE_ERROR_SENTENCE = "Provenance metadata is present but could not be decoded."
UNSUPPORTED_KIND_SENTENCE = "Provenance extraction is unsupported for this media kind."


def classify_origin_method(source_type: Optional[str]) -> OriginMethod:
    """Map a declared source-type URI onto the origin enum."""
    if not source_type:
        return OriginMethod.UNKNOWN
    lowered = source_type.lower()
    if _GENERATED_MARKER in lowered:
        return OriginMethod.GENERATED
    if _COMPOSITE_MARKER in lowered:
        return OriginMethod.COMPOSITED
    if _CAPTURE_MARKER in lowered:
        return OriginMethod.CAPTURED
    return OriginMethod.UNKNOWN


def filter_fields(record: ProvenanceRecord) -> ProvenanceRecord:
    """Drop everything except the fields the LLM should see.

    Keeps capture time/location, place name, creator, producing tool,
    origin method, the action list, and signature presence; ``raw_fields``
    is cleared. ``ingest_path`` describes how the record was read and is
    left alone.
    """
    return replace(record, raw_fields={})


def classify_actions(actions: list[EditAction], origin_method: OriginMethod) -> TamperClass:
    """Deterministic offline tampering baseline.

    The LLM remains the decider in the pipeline; this classifier exists for
    degraded/offline use and for consistency checks. Generation dominates;
    any action outside the benign set means the media was edited.
    """
    if origin_method is OriginMethod.GENERATED:
        return TamperClass.GENERATED
    if all(a.action_id in BENIGN_ACTIONS for a in actions):
        return TamperClass.BENIGN
    return TamperClass.EDITED


def _line(name: str, value: Optional[str]) -> str:
    if value is None:
        return f"- {name}: unknown"
    # Values stay on one line so no field can forge another field's line.
    return f"- {name}: " + value.replace("\n", "\\n")


def render_summary(record: ProvenanceRecord, media_ref: str = "") -> ProvenanceSummary:
    """Render a filtered record as a fixed-order bullet list.

    The text is a pure function of the record's retained fields; absent
    fields render as the literal ``- <field>: unknown``. The month-precision
    origin time leads because the verdict reasons at that granularity.
    """
    lines = []
    if record.capture_time is not None:
        month = f"{record.capture_time.year:04d}-{record.capture_time.month:02d}"
        lines.append(_line("origin time (year, month)", month))
        lines.append(_line("origin time", format_utc(record.capture_time)))
    else:
        lines.append(_line("origin time (year, month)", None))
        lines.append(_line("origin time", None))
    if record.capture_location is not None:
        loc = f"{record.capture_location.latitude}, {record.capture_location.longitude}"
        lines.append(_line("origin location", loc))
    else:
        lines.append(_line("origin location", None))
    lines.append(_line("place name", record.place_name))
    method = record.origin_method.value if record.origin_method is not OriginMethod.UNKNOWN else None
    lines.append(_line("origin method", method))
    lines.append(_line("author", record.creator))
    lines.append(_line("producing tool", record.claim_generator))
    lines.append(_line("signature", "present" if record.signature_present else "absent"))
    if record.actions:
        for action in record.actions:
            when = format_utc(action.when) if action.when is not None else "unknown"
            agent = action.software_agent if action.software_agent is not None else "unknown"
            agent = agent.replace("\n", "\\n")
            lines.append(f"- action: {action.action_id} (when: {when}, agent: {agent})")
    else:
        lines.append(_line("actions", None))
    return ProvenanceSummary(media_ref=media_ref, text="\n".join(lines), status=SummaryStatus.OK)


def summary_no_metadata(media_ref: str) -> ProvenanceSummary:
    return ProvenanceSummary(media_ref, NO_METADATA_SENTENCE, SummaryStatus.NO_METADATA)


def summary_parse_error(media_ref: str) -> ProvenanceSummary:
    return ProvenanceSummary(media_ref, PARSE_ERROR_SENTENCE, SummaryStatus.PARSE_ERROR)


def summary_unsupported_kind(media_ref: str) -> ProvenanceSummary:
    return ProvenanceSummary(media_ref, UNSUPPORTED_KIND_SENTENCE, SummaryStatus.UNSUPPORTED_KIND)


# --- serialization -------------------------------------------------------


def action_to_dict(action: EditAction) -> dict[str, Any]:
    return {
        "action": action.action_id,
        "when": format_utc(action.when) if action.when is not None else None,
        "software_agent": action.software_agent,
        "parameters": action.parameters,
    }


def action_from_dict(data: Mapping[str, Any]) -> EditAction:
    when = data.get("when")
    return EditAction(
        action_id=data["action"],
        when=parse_utc(when) if when else None,
        software_agent=data.get("software_agent"),
        parameters=dict(data["parameters"]) if data.get("parameters") is not None else None,
    )


def record_to_dict(record: ProvenanceRecord) -> dict[str, Any]:
    location = record.capture_location
    return {
        "capture_time": format_utc(record.capture_time) if record.capture_time else None,
        "capture_location": (
            {"latitude": location.latitude, "longitude": location.longitude} if location else None
        ),
        "place_name": record.place_name,
        "creator": record.creator,
        "claim_generator": record.claim_generator,
        "origin_method": record.origin_method.value,
        "actions": [action_to_dict(a) for a in record.actions],
        "signature_present": record.signature_present,
        "ingest_path": record.ingest_path.value,
        "raw_fields": record.raw_fields,
    }

"""Sidecar provenance reports.

A sidecar is a JSON companion file carrying the same facts an embedded
manifest would, for media whose bytes carry none (adoption is young).
One document per media item, named ``<media-basename>.c2pa.json`` next to
the media file; the schema in ``sidecar_schema.json`` is normative.

The reader is tolerant: unknown keys are preserved in ``raw_fields``,
never fatal.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional

import jsonschema

from ..errors import SidecarValidationError
from ..serialization import parse_utc_or_date
from .model import EditAction, GeoPoint, IngestPath, OriginMethod, ProvenanceRecord

_KNOWN_TOP_KEYS = {"claim_generator", "signature_present", "creator", "capture", "origin_method", "actions"}
_KNOWN_CAPTURE_KEYS = {"when", "latitude", "longitude", "place_name"}
_KNOWN_ACTION_KEYS = {"action", "when", "software_agent", "parameters"}


def _schema() -> dict[str, Any]:
    raw = resources.files("mediacontext").joinpath("sidecar_schema.json").read_text("utf-8")
    return json.loads(raw)


_SCHEMA = _schema()
_VALIDATOR = jsonschema.Draft202012Validator(_SCHEMA)


def _parse_when(value: Optional[str], field: str, record: ProvenanceRecord, note_key: str):
    if value is None:
        return None
    try:
        parsed, date_only = parse_utc_or_date(value)
    except ValueError as exc:
        raise SidecarValidationError(field, f"not an ISO-8601 timestamp: {value!r}") from exc
    if date_only:
        record.raw_fields[note_key] = "day"
    return parsed


def load_sidecar(document: Mapping[str, Any]) -> ProvenanceRecord:
    """Map a sidecar document onto a ProvenanceRecord (ingest_path=sidecar)."""
    error = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(document))
    if error is not None:
        field = ".".join(str(part) for part in error.absolute_path) or "(document)"
        raise SidecarValidationError(field, error.message)

    record = ProvenanceRecord(ingest_path=IngestPath.SIDECAR)
    record.claim_generator = document.get("claim_generator")
    record.signature_present = bool(document["signature_present"])
    record.creator = document.get("creator")
    record.origin_method = OriginMethod(document["origin_method"])

    capture = document.get("capture") or {}
    record.capture_time = _parse_when(capture.get("when"), "capture.when", record, "date_precision")
    lat, lon = capture.get("latitude"), capture.get("longitude")
    if lat is not None and lon is not None:
        record.capture_location = GeoPoint(float(lat), float(lon))
    elif lat is not None or lon is not None:
        raise SidecarValidationError("capture", "latitude and longitude must be given together")
    record.place_name = capture.get("place_name")

    actions = []
    for index, item in enumerate(document["actions"]):
        when = _parse_when(item.get("when"), f"actions.{index}.when", record, f"action_{index}_date_precision")
        try:
            actions.append(
                EditAction(
                    action_id=item["action"],
                    when=when,
                    software_agent=item.get("software_agent"),
                    parameters=item.get("parameters"),
                )
            )
        except ValueError as exc:
            raise SidecarValidationError(f"actions.{index}.action", str(exc)) from exc

    for key, value in document.items():
        if key not in _KNOWN_TOP_KEYS:
            record.raw_fields[key] = value
    for key, value in capture.items():
        if key not in _KNOWN_CAPTURE_KEYS:
            record.raw_fields[f"capture.{key}"] = value

    # Rebuild so the generation-dominance normalization sees the actions.
    return ProvenanceRecord(
        capture_time=record.capture_time,
        capture_location=record.capture_location,
        place_name=record.place_name,
        creator=record.creator,
        claim_generator=record.claim_generator,
        origin_method=record.origin_method,
        actions=actions,
        signature_present=record.signature_present,
        ingest_path=IngestPath.SIDECAR,
        raw_fields=record.raw_fields,
    )


def sidecar_path_for(media_path: Path) -> Path:
    """Companion file location: ``<media-basename>.c2pa.json`` beside the media."""
    return media_path.with_name(media_path.stem + ".c2pa.json")


def find_sidecar(media_path: Path) -> Optional[dict[str, Any]]:
    """Load the companion document if one exists; None otherwise."""
    path = sidecar_path_for(media_path)
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise SidecarValidationError("(document)", f"unreadable sidecar {path}: {exc}") from exc

"""Building and parsing manifest stores.

A manifest store is a labeled JUMBF superbox holding one manifest superbox
per lifecycle hop; the last manifest is the active one. Each manifest holds
an assertion store, a claim box, and (when signed) a signature box. Claim
and assertion payloads may be CBOR or JSON; the leading byte decides.

The builder exists as a test/fixture utility: production media arrive with
their manifests already embedded.
"""

from __future__ import annotations

import json
import uuid
from typing import Any, Iterable, Mapping, Optional

from ..errors import ManifestParseError
from ..serialization import format_utc, parse_utc_or_date
from . import cbor
from .jumbf import SuperBox, make_superbox, parse_box_as_superbox, parse_superbox, type_uuid, write_box
from .model import (
    EditAction,
    GeoPoint,
    IngestPath,
    OriginMethod,
    ProvenanceRecord,
    SOURCE_TYPE_CAPTURED,
    SOURCE_TYPE_COMPOSITED,
    SOURCE_TYPE_GENERATED,
    classify_origin_method,
)

MANIFEST_STORE_LABEL = "c2pa"
ASSERTION_STORE_LABEL = "c2pa.assertions"
CLAIM_LABEL = "c2pa.claim"
SIGNATURE_LABEL = "c2pa.signature"

ACTIONS_ASSERTION = "c2pa.actions"
EXIF_ASSERTION = "stds.exif"
CREATIVE_WORK_ASSERTION = "stds.schema-org.CreativeWork"

STORE_UUID = type_uuid(b"c2pa")
MANIFEST_UUID = type_uuid(b"c2ma")
ASSERTION_STORE_UUID = type_uuid(b"c2as")
CLAIM_UUID = type_uuid(b"c2cl")
SIGNATURE_UUID = type_uuid(b"c2cs")
JSON_UUID = type_uuid(b"json")
CBOR_UUID = type_uuid(b"cbor")

_SOURCE_TYPE_BY_METHOD = {
    OriginMethod.CAPTURED: SOURCE_TYPE_CAPTURED,
    OriginMethod.GENERATED: SOURCE_TYPE_GENERATED,
    OriginMethod.COMPOSITED: SOURCE_TYPE_COMPOSITED,
}


# --- payload encoding ----------------------------------------------------


def encode_payload(value: Any, payload_format: str) -> bytes:
    if payload_format == "json":
        return json.dumps(value, ensure_ascii=False).encode("utf-8")
    if payload_format == "cbor":
        return cbor.dumps(value)
    raise ValueError(f"unknown payload format {payload_format!r}")


def decode_payload(data: bytes, box_label: str) -> Any:
    """Decode a claim/assertion payload, JSON or CBOR by leading byte."""
    stripped = data.lstrip(b" \t\r\n")
    try:
        if stripped[:1] in (b"{", b"["):
            return json.loads(stripped.decode("utf-8"))
        return cbor.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ManifestParseError(f"undecodable payload: {exc}", box_label=box_label) from exc


# --- building (test utility) ---------------------------------------------


def _content_box(payload: bytes, payload_format: str) -> tuple[bytes, bytes]:
    tag = b"json" if payload_format == "json" else b"cbor"
    return type_uuid(tag), write_box(tag, payload)


def _assertion_box(label: str, value: Any, payload_format: str) -> bytes:
    content_type, content = _content_box(encode_payload(value, payload_format), payload_format)
    return make_superbox(content_type, label, [content])


def _action_to_payload(action: EditAction) -> dict[str, Any]:
    payload: dict[str, Any] = {"action": action.action_id}
    if action.when is not None:
        payload["when"] = format_utc(action.when)
    if action.software_agent is not None:
        payload["softwareAgent"] = action.software_agent
    if action.parameters is not None:
        payload["parameters"] = action.parameters
    return payload


def build_manifest(
    record: ProvenanceRecord,
    *,
    payload_format: str = "cbor",
    label: Optional[str] = None,
    extra_assertions: Optional[Mapping[str, Any]] = None,
) -> bytes:
    """Serialize one record as a manifest superbox."""
    assertions: list[tuple[str, Any]] = []

    if record.actions or record.origin_method is not OriginMethod.UNKNOWN:
        actions_payload: dict[str, Any] = {"actions": [_action_to_payload(a) for a in record.actions]}
        source_type = _SOURCE_TYPE_BY_METHOD.get(record.origin_method)
        if source_type is not None:
            actions_payload["digitalSourceType"] = source_type
        assertions.append((ACTIONS_ASSERTION, actions_payload))

    if record.capture_time or record.capture_location or record.place_name:
        exif: dict[str, Any] = {}
        if record.capture_time is not None:
            exif["exif:DateTimeOriginal"] = format_utc(record.capture_time)
        if record.capture_location is not None:
            exif["exif:GPSLatitude"] = record.capture_location.latitude
            exif["exif:GPSLongitude"] = record.capture_location.longitude
        if record.place_name is not None:
            exif["exif:GPSAreaInformation"] = record.place_name
        assertions.append((EXIF_ASSERTION, exif))

    if record.creator is not None:
        assertions.append(
            (
                CREATIVE_WORK_ASSERTION,
                {
                    "@context": "https://schema.org",
                    "@type": "CreativeWork",
                    "author": [{"@type": "Person", "name": record.creator}],
                },
            )
        )

    for extra_label, value in (extra_assertions or {}).items():
        assertions.append((extra_label, value))

    assertion_boxes = [_assertion_box(lbl, val, payload_format) for lbl, val in assertions]
    children = [make_superbox(ASSERTION_STORE_UUID, ASSERTION_STORE_LABEL, assertion_boxes)]

    claim: dict[str, Any] = {}
    if record.claim_generator is not None:
        claim["claim_generator"] = record.claim_generator
    claim["assertions"] = [lbl for lbl, _ in assertions]
    claim_type, claim_content = _content_box(encode_payload(claim, payload_format), payload_format)
    children.append(make_superbox(CLAIM_UUID, CLAIM_LABEL, [claim_content]))

    if record.signature_present:
        signature = {"alg": "none", "signature": "unsigned-test-placeholder"}
        sig_type, sig_content = _content_box(encode_payload(signature, payload_format), payload_format)
        children.append(make_superbox(SIGNATURE_UUID, SIGNATURE_LABEL, [sig_content]))

    if label is None:
        digest_source = repr(record.retained_fields())
        label = f"urn:uuid:{uuid.uuid5(uuid.NAMESPACE_URL, digest_source)}"
    return make_superbox(MANIFEST_UUID, label, children)


def build_manifest_store(
    record: ProvenanceRecord,
    *,
    payload_format: str = "cbor",
    ingredients: Iterable[ProvenanceRecord] = (),
    extra_assertions: Optional[Mapping[str, Any]] = None,
) -> bytes:
    """Serialize a store whose active (last) manifest is ``record``.

    ``ingredients`` become earlier manifests, which the parser ignores.
    """
    manifests = [build_manifest(r, payload_format=payload_format) for r in ingredients]
    manifests.append(
        build_manifest(record, payload_format=payload_format, extra_assertions=extra_assertions)
    )
    return make_superbox(STORE_UUID, MANIFEST_STORE_LABEL, manifests)


# --- parsing --------------------------------------------------------------


def _single_payload(sbox: SuperBox, label: str) -> bytes:
    if len(sbox.children) != 1:
        raise ManifestParseError("expected exactly one content box", box_label=label)
    return sbox.children[0].payload


def _parse_actions(payload: Any) -> tuple[list[EditAction], OriginMethod]:
    if not isinstance(payload, dict) or not isinstance(payload.get("actions"), list):
        raise ManifestParseError("actions assertion is not an action list", box_label=ACTIONS_ASSERTION)
    actions = []
    for item in payload["actions"]:
        if not isinstance(item, dict) or not isinstance(item.get("action"), str):
            raise ManifestParseError("malformed action entry", box_label=ACTIONS_ASSERTION)
        when = None
        if item.get("when") is not None:
            when, _ = parse_utc_or_date(str(item["when"]))
        parameters = item.get("parameters")
        if parameters is not None and not isinstance(parameters, dict):
            raise ManifestParseError("action parameters must be a map", box_label=ACTIONS_ASSERTION)
        try:
            actions.append(
                EditAction(
                    action_id=item["action"],
                    when=when,
                    software_agent=item.get("softwareAgent"),
                    parameters=parameters,
                )
            )
        except ValueError as exc:
            raise ManifestParseError(str(exc), box_label=ACTIONS_ASSERTION) from exc
    method = classify_origin_method(payload.get("digitalSourceType"))
    return actions, method


def _parse_exif(payload: Any, record: ProvenanceRecord) -> None:
    if not isinstance(payload, dict):
        raise ManifestParseError("capture metadata is not a map", box_label=EXIF_ASSERTION)
    when = payload.get("exif:DateTimeOriginal") or payload.get("DateTimeOriginal")
    if when is not None:
        try:
            record.capture_time, date_only = parse_utc_or_date(str(when))
        except ValueError as exc:
            raise ManifestParseError(f"bad capture time: {exc}", box_label=EXIF_ASSERTION) from exc
        if date_only:
            record.raw_fields["date_precision"] = "day"
    lat = payload.get("exif:GPSLatitude", payload.get("GPSLatitude"))
    lon = payload.get("exif:GPSLongitude", payload.get("GPSLongitude"))
    if lat is not None and lon is not None:
        try:
            record.capture_location = GeoPoint(float(lat), float(lon))
        except (TypeError, ValueError) as exc:
            raise ManifestParseError(f"bad GPS coordinates: {exc}", box_label=EXIF_ASSERTION) from exc
    place = payload.get("exif:GPSAreaInformation") or payload.get("place_name")
    if isinstance(place, str) and place:
        record.place_name = place


def _parse_creative_work(payload: Any, record: ProvenanceRecord) -> None:
    if not isinstance(payload, dict):
        raise ManifestParseError("creative-work assertion is not a map", box_label=CREATIVE_WORK_ASSERTION)
    authors = payload.get("author")
    if isinstance(authors, list):
        for author in authors:
            if isinstance(author, dict) and isinstance(author.get("name"), str):
                record.creator = author["name"]
                break
    elif isinstance(authors, dict) and isinstance(authors.get("name"), str):
        record.creator = authors["name"]


def parse_manifest_store(store: bytes) -> ProvenanceRecord:
    """Decode the active manifest of a store into a ProvenanceRecord.

    Unrecognized assertions are retained in ``raw_fields`` and otherwise
    ignored. Structural problems raise :class:`ManifestParseError` naming
    the failing box.
    """
    if not store:
        raise ManifestParseError("empty manifest store", offset=0)
    try:
        return _parse_store(store)
    except ManifestParseError:
        raise
    except (ValueError, TypeError, KeyError, OverflowError) as exc:
        raise ManifestParseError(f"malformed manifest content: {exc}") from exc


def _parse_store(store: bytes) -> ProvenanceRecord:
    root = parse_superbox(store)
    if root.label != MANIFEST_STORE_LABEL:
        raise ManifestParseError(
            f"superbox label {root.label!r} is not a manifest store", box_label=root.label or ""
        )
    if not root.children:
        raise ManifestParseError("manifest store holds no manifests", box_label=MANIFEST_STORE_LABEL)
    manifests = [parse_box_as_superbox(box) for box in root.children]
    active = manifests[-1]

    record = ProvenanceRecord(ingest_path=IngestPath.EMBEDDED)
    assertion_store: Optional[SuperBox] = None
    claim_box: Optional[SuperBox] = None
    has_signature = False
    for child in active.children:
        section = parse_box_as_superbox(child)
        if section.label == ASSERTION_STORE_LABEL:
            assertion_store = section
        elif section.label == CLAIM_LABEL:
            claim_box = section
        elif section.label == SIGNATURE_LABEL:
            has_signature = True

    if claim_box is None:
        raise ManifestParseError("manifest has no claim box", box_label=active.label or "")
    claim = decode_payload(_single_payload(claim_box, CLAIM_LABEL), CLAIM_LABEL)
    if not isinstance(claim, dict):
        raise ManifestParseError("claim payload is not a map", box_label=CLAIM_LABEL)
    generator = claim.get("claim_generator")
    if generator is not None and not isinstance(generator, str):
        raise ManifestParseError("claim generator is not text", box_label=CLAIM_LABEL)
    record.claim_generator = generator
    record.signature_present = has_signature

    declared_method = OriginMethod.UNKNOWN
    if assertion_store is not None:
        for box in assertion_store.children:
            assertion = parse_box_as_superbox(box)
            label = assertion.label or ""
            payload = decode_payload(_single_payload(assertion, label), label)
            if label == ACTIONS_ASSERTION:
                record.actions, declared_method = _parse_actions(payload)
            elif label == EXIF_ASSERTION:
                _parse_exif(payload, record)
            elif label == CREATIVE_WORK_ASSERTION:
                _parse_creative_work(payload, record)
            else:
                record.raw_fields[label] = payload

    record.origin_method = declared_method
    if has_signature:
        record.raw_fields["trust_status"] = "unvalidated"
    # Re-run the generation-dominance normalization now that actions exist.
    return ProvenanceRecord(
        capture_time=record.capture_time,
        capture_location=record.capture_location,
        place_name=record.place_name,
        creator=record.creator,
        claim_generator=record.claim_generator,
        origin_method=record.origin_method,
        actions=record.actions,
        signature_present=record.signature_present,
        ingest_path=IngestPath.EMBEDDED,
        raw_fields=record.raw_fields,
    )

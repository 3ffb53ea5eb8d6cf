"""Provenance metadata: locating, decoding, filtering, and rendering."""

from .container import (
    detect_media_format,
    embed_manifest_jpeg,
    embed_manifest_png,
    extract_embedded_manifest,
    minimal_jpeg,
    minimal_png,
)
from .manifest import build_manifest_store, parse_manifest_store
from .model import (
    BENIGN_ACTIONS,
    EditAction,
    GeoPoint,
    IngestPath,
    OriginMethod,
    ProvenanceRecord,
    ProvenanceSummary,
    SummaryStatus,
    TamperClass,
    classify_actions,
    filter_fields,
    record_to_dict,
    render_summary,
    summary_no_metadata,
    summary_parse_error,
    summary_unsupported_kind,
)
from .sidecar import find_sidecar, load_sidecar, sidecar_path_for

__all__ = [
    "BENIGN_ACTIONS",
    "EditAction",
    "GeoPoint",
    "IngestPath",
    "OriginMethod",
    "ProvenanceRecord",
    "ProvenanceSummary",
    "SummaryStatus",
    "TamperClass",
    "build_manifest_store",
    "classify_actions",
    "detect_media_format",
    "embed_manifest_jpeg",
    "embed_manifest_png",
    "extract_embedded_manifest",
    "filter_fields",
    "find_sidecar",
    "load_sidecar",
    "minimal_jpeg",
    "minimal_png",
    "parse_manifest_store",
    "record_to_dict",
    "render_summary",
    "sidecar_path_for",
    "summary_no_metadata",
    "summary_parse_error",
    "summary_unsupported_kind",
]

"""Canonical JSON and timestamp helpers.

Every serialized document in the package (API responses, CLI --json output,
journal lines) goes through :func:`canonical_json` so the byte form is
stable: lower_snake_case keys in fixed construction order, UTC ISO-8601
timestamps, two-space indentation, no ASCII escaping.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any


def canonical_json(value: Any) -> str:
    """Serialize to the package's canonical JSON form (no trailing newline)."""
    return json.dumps(value, ensure_ascii=False, indent=2)


def canonical_json_line(value: Any) -> str:
    """One-line canonical form, used for journal records."""
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"))


def utc_now() -> datetime:
    """Current UTC time truncated to whole seconds (the stored precision)."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_utc(dt: datetime) -> str:
    """Render as ``YYYY-MM-DDTHH:MM:SSZ``; naive datetimes are taken as UTC."""
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_utc(text: str) -> datetime:
    """Parse an ISO-8601 timestamp to an aware UTC datetime (whole seconds).

    Accepts a trailing ``Z`` or a numeric offset; naive values are taken as
    UTC. Raises ValueError on anything else.
    """
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def is_date_only(text: str) -> bool:
    """True when the value carries a calendar date but no time component."""
    return "T" not in text.strip() and " " not in text.strip()


def parse_utc_or_date(text: str) -> tuple[datetime, bool]:
    """Parse a timestamp or bare date.

    Bare dates become midnight UTC; the second element reports whether the
    value was date-only so callers can record the reduced precision.
    """
    if is_date_only(text):
        dt = datetime.fromisoformat(text.strip())
        return dt.replace(tzinfo=timezone.utc), True
    return parse_utc(text), False

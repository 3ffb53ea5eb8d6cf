"""JUMBF box reading and writing.

A box is an 8-byte header (4-byte big-endian total size, 4-char type)
followed by its payload. A superbox (type ``jumb``) starts with a
description box (type ``jumd``) carrying a 16-byte content-type UUID,
a toggles byte, and an optional NUL-terminated label; the remaining
child boxes are the content.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import ManifestParseError

SUPERBOX_TYPE = b"jumb"
DESCRIPTION_TYPE = b"jumd"

# Toggle bits in the description box.
_TOGGLE_REQUESTABLE = 0x01
_TOGGLE_LABEL = 0x02
_TOGGLE_ID = 0x04
_TOGGLE_SIGNATURE = 0x08

# All content-type UUIDs share this 12-byte JUMBF suffix after the 4-char tag.
UUID_SUFFIX = bytes.fromhex("00110010800000AA00389B71")


def type_uuid(tag: bytes) -> bytes:
    if len(tag) != 4:
        raise ValueError("content type tag must be 4 bytes")
    return tag + UUID_SUFFIX


@dataclass
class Box:
    box_type: bytes
    payload: bytes
    offset: int  # byte offset of the box header in the parsed stream


@dataclass
class SuperBox:
    content_type: bytes  # 16-byte UUID from the description box
    label: Optional[str]
    children: list[Box]
    offset: int


def write_box(box_type: bytes, payload: bytes) -> bytes:
    size = 8 + len(payload)
    if size > 0xFFFFFFFF:
        raise ValueError("box too large for a 32-bit size field")
    return size.to_bytes(4, "big") + box_type + payload


def read_boxes(data: bytes, base_offset: int = 0) -> list[Box]:
    """Split a byte run into consecutive boxes; errors carry byte offsets."""
    boxes = []
    pos = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise ManifestParseError("truncated box header", offset=base_offset + pos)
        size = int.from_bytes(data[pos : pos + 4], "big")
        box_type = data[pos + 4 : pos + 8]
        if size == 0:  # "extends to end of stream"
            size = len(data) - pos
        if size == 1:
            raise ManifestParseError("extended box sizes unsupported", offset=base_offset + pos)
        if size < 8 or pos + size > len(data):
            raise ManifestParseError(
                f"box size {size} exceeds remaining {len(data) - pos} bytes",
                offset=base_offset + pos,
            )
        boxes.append(Box(box_type, data[pos + 8 : pos + size], base_offset + pos))
        pos += size
    return boxes


def make_description(content_type: bytes, label: Optional[str]) -> bytes:
    toggles = _TOGGLE_REQUESTABLE
    payload = bytearray(content_type)
    if label is not None:
        toggles |= _TOGGLE_LABEL
    payload.insert(16, toggles)
    if label is not None:
        payload += label.encode("utf-8") + b"\x00"
    return write_box(DESCRIPTION_TYPE, bytes(payload))


def make_superbox(content_type: bytes, label: Optional[str], children: list[bytes]) -> bytes:
    return write_box(SUPERBOX_TYPE, make_description(content_type, label) + b"".join(children))


def _parse_description(box: Box) -> tuple[bytes, Optional[str]]:
    data = box.payload
    if len(data) < 17:
        raise ManifestParseError("description box too short", offset=box.offset)
    content_type = data[:16]
    toggles = data[16]
    pos = 17
    label = None
    if toggles & _TOGGLE_LABEL:
        end = data.find(b"\x00", pos)
        if end < 0:
            raise ManifestParseError("unterminated description label", offset=box.offset + pos)
        try:
            label = data[pos:end].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ManifestParseError("description label is not UTF-8", offset=box.offset + pos) from exc
    return content_type, label


def parse_superbox(data: bytes, base_offset: int = 0) -> SuperBox:
    """Parse one complete superbox from ``data`` (which must be exactly it)."""
    boxes = read_boxes(data, base_offset)
    if len(boxes) != 1 or boxes[0].box_type != SUPERBOX_TYPE:
        raise ManifestParseError("expected a single jumb superbox", offset=base_offset)
    return parse_box_as_superbox(boxes[0])


def parse_box_as_superbox(box: Box) -> SuperBox:
    """Interpret an already-read box as a superbox."""
    if box.box_type != SUPERBOX_TYPE:
        raise ManifestParseError(
            f"unexpected box type {box.box_type!r} where a superbox was required",
            offset=box.offset,
        )
    children = read_boxes(box.payload, box.offset + 8)
    if not children or children[0].box_type != DESCRIPTION_TYPE:
        raise ManifestParseError("superbox missing description box", offset=box.offset)
    content_type, label = _parse_description(children[0])
    return SuperBox(content_type, label, children[1:], box.offset)


def superbox_label(data: bytes) -> Optional[str]:
    """Label of a superbox without fully walking its children; None if not
    a parseable superbox."""
    try:
        return parse_superbox(data).label
    except ManifestParseError:
        return None

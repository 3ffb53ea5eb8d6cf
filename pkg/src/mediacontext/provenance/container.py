"""Embedding and extracting manifest stores from media containers.

JPEG carries the store in APP11 (0xFFEB) marker segments: after the 2-byte
length come the common identifier ``JP``, a 2-byte box instance number, a
4-byte packet sequence number, and the original box's 8-byte header
repeated in every packet, then the next slice of the box body. PNG carries
the complete store in a single ``caBX`` chunk.

The embed side exists as a test/fixture utility only.
"""

from __future__ import annotations

import zlib
from typing import Iterator, Optional

from ..errors import ManifestParseError
from .jumbf import superbox_label

JPEG_SOI = b"\xff\xd8"
PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

APP11 = 0xEB
COMMON_IDENTIFIER = b"JP"
PNG_MANIFEST_CHUNK = b"caBX"

# A segment's 2-byte length covers itself, so the payload tops out at
# 65533 bytes; 16 of those are the CI/En/Z/LBox/TBox prefix.
MAX_SEGMENT_PAYLOAD = 65533
_PREFIX_LEN = 16
MAX_FRAGMENT = MAX_SEGMENT_PAYLOAD - _PREFIX_LEN

_STANDALONE_MARKERS = frozenset({0x01, 0xD8, *range(0xD0, 0xD8)})


def detect_media_format(content: bytes) -> Optional[str]:
    """``jpeg``/``png`` from leading magic bytes, else None."""
    if content.startswith(JPEG_SOI):
        return "jpeg"
    if content.startswith(PNG_SIGNATURE):
        return "png"
    return None


# --- JPEG -----------------------------------------------------------------


def _walk_jpeg_segments(content: bytes) -> Iterator[tuple[int, bytes, int]]:
    """Yield (marker, payload, offset) for each length-bearing segment.

    Stops at SOS (entropy-coded data follows; metadata segments precede it)
    or EOI. Raises ManifestParseError with a byte offset on malformed
    structure.
    """
    if not content.startswith(JPEG_SOI):
        raise ManifestParseError("not a JPEG (missing SOI)", offset=0)
    pos = 2
    while pos < len(content):
        if content[pos] != 0xFF:
            raise ManifestParseError("expected marker byte 0xFF", offset=pos)
        while pos < len(content) and content[pos] == 0xFF:  # fill bytes
            pos += 1
        if pos >= len(content):
            raise ManifestParseError("truncated marker", offset=pos)
        marker = content[pos]
        start = pos - 1
        pos += 1
        if marker == 0x00:
            raise ManifestParseError("stuffed byte outside scan data", offset=start)
        if marker in _STANDALONE_MARKERS:
            continue
        if marker == 0xD9:  # EOI
            return
        if pos + 2 > len(content):
            raise ManifestParseError("truncated segment length", offset=pos)
        length = int.from_bytes(content[pos : pos + 2], "big")
        if length < 2:
            raise ManifestParseError(f"invalid segment length {length}", offset=pos)
        if pos + length > len(content):
            raise ManifestParseError(
                f"segment length {length} exceeds remaining bytes", offset=pos
            )
        if marker == 0xDA:  # SOS
            return
        yield marker, content[pos + 2 : pos + length], start
        pos += length


def _insertion_point(content: bytes) -> int:
    """Offset right after SOI and any APP0/APP1 segments."""
    pos = 2
    while pos + 4 <= len(content) and content[pos] == 0xFF and content[pos + 1] in (0xE0, 0xE1):
        length = int.from_bytes(content[pos + 2 : pos + 4], "big")
        if length < 2 or pos + 2 + length > len(content):
            break
        pos += 2 + length
    return pos


def embed_manifest_jpeg(
    jpeg: bytes,
    manifest: bytes,
    *,
    instance: int = 1,
    max_fragment: int = MAX_FRAGMENT,
) -> bytes:
    """Write a manifest store into a JPEG's APP11 segments (test utility).

    ``max_fragment`` caps the box-body bytes per segment so tests can force
    multi-segment splits.
    """
    if not jpeg.startswith(JPEG_SOI):
        raise ValueError("not a JPEG")
    if len(manifest) < 8:
        raise ValueError("manifest store too small to be a box")
    if not 1 <= max_fragment <= MAX_FRAGMENT:
        raise ValueError(f"max_fragment must be in [1, {MAX_FRAGMENT}]")
    header, body = manifest[:8], manifest[8:]
    fragments = [body[i : i + max_fragment] for i in range(0, len(body), max_fragment)] or [b""]
    segments = bytearray()
    for index, fragment in enumerate(fragments, start=1):
        payload = (
            COMMON_IDENTIFIER
            + instance.to_bytes(2, "big")
            + index.to_bytes(4, "big")
            + header
            + fragment
        )
        segments += b"\xff" + bytes([APP11]) + (len(payload) + 2).to_bytes(2, "big") + payload
    cut = _insertion_point(jpeg)
    return jpeg[:cut] + bytes(segments) + jpeg[cut:]


def _reassemble(
    packets: list[tuple[int, bytes, bytes, bytes, int]],
) -> bytes:
    """Rebuild one box from its (Z, LBox, TBox, fragment, offset) packets."""
    packets = sorted(packets, key=lambda p: p[0])
    header = packets[0][1] + packets[0][2]
    declared = int.from_bytes(packets[0][1], "big")
    body = bytearray()
    for expected, (z, lbox, tbox, fragment, offset) in enumerate(packets, start=1):
        if z != expected:
            raise ManifestParseError(
                f"APP11 sequence gap: expected packet {expected}, got {z}", offset=offset
            )
        if lbox + tbox != header:
            raise ManifestParseError("inconsistent box header across APP11 packets", offset=offset)
        body += fragment
    total = header + bytes(body)
    if declared != len(total):
        raise ManifestParseError(
            f"reassembled box is {len(total)} bytes but header declares {declared}",
            offset=packets[0][4],
        )
    return total


def extract_manifest_jpeg(content: bytes) -> Optional[bytes]:
    """Reassemble the manifest store from a JPEG, or None when absent."""
    groups: dict[int, list[tuple[int, bytes, bytes, bytes, int]]] = {}
    for marker, payload, offset in _walk_jpeg_segments(content):
        if marker != APP11 or not payload.startswith(COMMON_IDENTIFIER):
            continue
        if len(payload) < _PREFIX_LEN:
            raise ManifestParseError("APP11 JUMBF segment too short", offset=offset)
        instance = int.from_bytes(payload[2:4], "big")
        z = int.from_bytes(payload[4:8], "big")
        groups.setdefault(instance, []).append(
            (z, payload[8:12], payload[12:16], payload[16:], offset)
        )
    for instance in sorted(groups):
        box = _reassemble(groups[instance])
        if superbox_label(box) == "c2pa":
            return box
    return None


# --- PNG --------------------------------------------------------------


def _walk_png_chunks(content: bytes) -> Iterator[tuple[bytes, bytes, int]]:
    if not content.startswith(PNG_SIGNATURE):
        raise ManifestParseError("not a PNG (missing signature)", offset=0)
    pos = len(PNG_SIGNATURE)
    while pos < len(content):
        if pos + 8 > len(content):
            raise ManifestParseError("truncated chunk header", offset=pos)
        length = int.from_bytes(content[pos : pos + 4], "big")
        chunk_type = content[pos + 4 : pos + 8]
        end = pos + 8 + length + 4  # payload + CRC
        if end > len(content):
            raise ManifestParseError(
                f"chunk length {length} exceeds remaining bytes", offset=pos
            )
        yield chunk_type, content[pos + 8 : pos + 8 + length], pos
        if chunk_type == b"IEND":
            return
        pos = end


def _png_chunk(chunk_type: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(chunk_type + payload) & 0xFFFFFFFF
    return len(payload).to_bytes(4, "big") + chunk_type + payload + crc.to_bytes(4, "big")


def embed_manifest_png(png: bytes, manifest: bytes) -> bytes:
    """Write a manifest store into a PNG's caBX chunk (test utility)."""
    if not png.startswith(PNG_SIGNATURE):
        raise ValueError("not a PNG")
    insert_at = None
    for chunk_type, payload, offset in _walk_png_chunks(png):
        if chunk_type == b"IHDR":
            insert_at = offset + 8 + len(payload) + 4
            break
    if insert_at is None:
        raise ValueError("PNG has no IHDR chunk")
    return png[:insert_at] + _png_chunk(PNG_MANIFEST_CHUNK, manifest) + png[insert_at:]


def extract_manifest_png(content: bytes) -> Optional[bytes]:
    for chunk_type, payload, _offset in _walk_png_chunks(content):
        if chunk_type == PNG_MANIFEST_CHUNK and superbox_label(payload) == "c2pa":
            return payload
    return None


# --- shared entry point -----------------------------------------------


def extract_embedded_manifest(content: bytes, media_format: str) -> Optional[bytes]:
    """Locate and reassemble the embedded manifest store.

    Returns None when no manifest is present (a finding, not a failure);
    raises ManifestParseError on malformed container structure.
    """
    if not content:
        raise ManifestParseError("empty media content", offset=0)
    if media_format == "jpeg":
        return extract_manifest_jpeg(content)
    if media_format == "png":
        return extract_manifest_png(content)
    raise ValueError(f"unsupported media format {media_format!r}")


# --- minimal fixtures ---------------------------------------------------


def minimal_jpeg() -> bytes:
    """Smallest structurally valid JPEG: SOI followed by EOI."""
    return b"\xff\xd8\xff\xd9"


def minimal_png() -> bytes:
    """A valid 1x1 grayscale PNG."""
    ihdr = (1).to_bytes(4, "big") + (1).to_bytes(4, "big") + bytes([8, 0, 0, 0, 0])
    idat = zlib.compress(b"\x00\x00")  # filter byte + one pixel
    return (
        PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", idat)
        + _png_chunk(b"IEND", b"")
    )

"""Minimal CBOR codec for manifest claim/assertion payloads.

Covers the subset manifests actually carry: null, booleans, integers,
float64, byte strings, text strings, arrays, and string-keyed maps, all
definite-length. Indefinite lengths, tags, and exotic simple values are
rejected with :class:`CborDecodeError`; the decoder never raises anything
else on arbitrary input.
"""

from __future__ import annotations

import struct
from typing import Any

_MAX_DEPTH = 64


class CborDecodeError(ValueError):
    """Payload is not decodable with this codec's CBOR subset."""


def dumps(value: Any) -> bytes:
    out = bytearray()
    _encode(value, out)
    return bytes(out)


def loads(data: bytes) -> Any:
    value, end = _decode(data, 0, 0)
    if end != len(data):
        raise CborDecodeError(f"{len(data) - end} trailing bytes after CBOR item")
    return value


def _head(major: int, arg: int, out: bytearray) -> None:
    if arg < 24:
        out.append((major << 5) | arg)
    elif arg < 0x100:
        out.append((major << 5) | 24)
        out.append(arg)
    elif arg < 0x10000:
        out.append((major << 5) | 25)
        out += arg.to_bytes(2, "big")
    elif arg < 0x100000000:
        out.append((major << 5) | 26)
        out += arg.to_bytes(4, "big")
    else:
        out.append((major << 5) | 27)
        out += arg.to_bytes(8, "big")


def _encode(value: Any, out: bytearray) -> None:
    if value is None:
        out.append(0xF6)
    elif value is True:
        out.append(0xF5)
    elif value is False:
        out.append(0xF4)
    elif isinstance(value, int):
        if value >= 0:
            _head(0, value, out)
        else:
            _head(1, -1 - value, out)
    elif isinstance(value, float):
        out.append(0xFB)
        out += struct.pack(">d", value)
    elif isinstance(value, bytes):
        _head(2, len(value), out)
        out += value
    elif isinstance(value, str):
        encoded = value.encode("utf-8")
        _head(3, len(encoded), out)
        out += encoded
    elif isinstance(value, (list, tuple)):
        _head(4, len(value), out)
        for item in value:
            _encode(item, out)
    elif isinstance(value, dict):
        _head(5, len(value), out)
        for key, item in value.items():
            if not isinstance(key, str):
                raise TypeError(f"map keys must be str, got {type(key).__name__}")
            _encode(key, out)
            _encode(item, out)
    else:
        raise TypeError(f"cannot encode {type(value).__name__} as CBOR")


def _read_arg(data: bytes, pos: int, info: int) -> tuple[int, int]:
    if info < 24:
        return info, pos
    widths = {24: 1, 25: 2, 26: 4, 27: 8}
    width = widths.get(info)
    if width is None:
        raise CborDecodeError(f"unsupported additional info {info} at byte {pos - 1}")
    if pos + width > len(data):
        raise CborDecodeError(f"truncated length field at byte {pos}")
    return int.from_bytes(data[pos : pos + width], "big"), pos + width


def _decode(data: bytes, pos: int, depth: int) -> tuple[Any, int]:
    if depth > _MAX_DEPTH:
        raise CborDecodeError("nesting too deep")
    if pos >= len(data):
        raise CborDecodeError(f"unexpected end of input at byte {pos}")
    initial = data[pos]
    major, info = initial >> 5, initial & 0x1F
    pos += 1
    if major in (0, 1):
        arg, pos = _read_arg(data, pos, info)
        return (arg if major == 0 else -1 - arg), pos
    if major == 2 or major == 3:
        length, pos = _read_arg(data, pos, info)
        if pos + length > len(data):
            raise CborDecodeError(f"truncated string at byte {pos}")
        raw = data[pos : pos + length]
        if major == 2:
            return bytes(raw), pos + length
        try:
            return raw.decode("utf-8"), pos + length
        except UnicodeDecodeError as exc:
            raise CborDecodeError(f"invalid UTF-8 in text string at byte {pos}") from exc
    if major == 4:
        count, pos = _read_arg(data, pos, info)
        if count > len(data) - pos:  # each element needs at least one byte
            raise CborDecodeError(f"array length {count} exceeds remaining input")
        items = []
        for _ in range(count):
            item, pos = _decode(data, pos, depth + 1)
            items.append(item)
        return items, pos
    if major == 5:
        count, pos = _read_arg(data, pos, info)
        if count > (len(data) - pos) // 2:
            raise CborDecodeError(f"map length {count} exceeds remaining input")
        result: dict[str, Any] = {}
        for _ in range(count):
            key, pos = _decode(data, pos, depth + 1)
            if not isinstance(key, str):
                raise CborDecodeError(f"non-string map key at byte {pos}")
            value, pos = _decode(data, pos, depth + 1)
            result[key] = value
        return result, pos
    if major == 6:
        raise CborDecodeError(f"tags are not supported (byte {pos - 1})")
    # major 7: simple values and floats
    if info == 20:
        return False, pos
    if info == 21:
        return True, pos
    if info == 22:
        return None, pos
    if info == 25:
        if pos + 2 > len(data):
            raise CborDecodeError(f"truncated float16 at byte {pos}")
        return float(struct.unpack(">e", data[pos : pos + 2])[0]), pos + 2
    if info == 26:
        if pos + 4 > len(data):
            raise CborDecodeError(f"truncated float32 at byte {pos}")
        return float(struct.unpack(">f", data[pos : pos + 4])[0]), pos + 4
    if info == 27:
        if pos + 8 > len(data):
            raise CborDecodeError(f"truncated float64 at byte {pos}")
        return struct.unpack(">d", data[pos : pos + 8])[0], pos + 8
    raise CborDecodeError(f"unsupported simple value {info} at byte {pos - 1}")

"""Canonical byte serialization for signed and hashed records.

The value domain is deliberately small: text, integers, booleans,
byte-strings, lists, and string-keyed maps.  Floating point is banned
(amounts are integers in minor units, time is an integer tick).

Encoding rules:

* UTF-8 text output, no insignificant whitespace.
* Maps: ``{"k":v,...}`` with keys sorted by UTF-8 byte value.
* Lists: ``[v,...]``.
* Text: double-quoted; ``\\`` and ``"`` are backslash-escaped, control
  characters below U+0020 become ``\\u00xx`` (lowercase hex), everything
  else is emitted as raw UTF-8.
* Byte-strings: ``0x`` followed by lowercase hex (``0x`` alone is empty).
* Integers: decimal, optional leading ``-``, no leading zeros.
* Booleans: ``true`` / ``false``.

Each type has a distinct lexical form, so the encoding is injective and
``decode(encode(v)) == v``.  The parser is strict about value lexemes
(lowercase hex only, no leading zeros, fixed escape set) so that no two
distinct byte strings decode to the same value; it is tolerant only of
whitespace between tokens, which lets config files be hand-formatted.
"""

from __future__ import annotations

from typing import Any

from .errors import DecodeError, UnsupportedValue

_WHITESPACE = frozenset(b" \t\r\n")
_HEX_DIGITS = frozenset(b"0123456789abcdef")
_DIGITS = frozenset(b"0123456789")


# --- encoding ---------------------------------------------------------------

def canonical_serialize(value: Any) -> bytes:
    """Serialize *value* to canonical bytes.

    Raises UnsupportedValue for anything outside the canonical domain
    (floats, None, non-string map keys, arbitrary objects).
    """
    parts: list[str] = []
    _emit(value, parts)
    return "".join(parts).encode("utf-8")


def _emit(value: Any, out: list[str]) -> None:
    if isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, str):
        _emit_text(value, out)
    elif isinstance(value, (bytes, bytearray)):
        out.append("0x")
        out.append(bytes(value).hex())
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(value, dict):
        for key in value:
            if not isinstance(key, str):
                raise UnsupportedValue(f"map keys must be text, got {type(key).__name__}")
        out.append("{")
        for i, key in enumerate(sorted(value, key=lambda k: k.encode("utf-8"))):
            if i:
                out.append(",")
            _emit_text(key, out)
            out.append(":")
            _emit(value[key], out)
        out.append("}")
    else:
        raise UnsupportedValue(f"cannot canonically serialize {type(value).__name__}")


def _emit_text(text: str, out: list[str]) -> None:
    out.append('"')
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')


# --- decoding ---------------------------------------------------------------

def canonical_parse(data: bytes) -> Any:
    """Parse canonical bytes back into a value.

    Inverse of canonical_serialize on its whole output; additionally
    accepts whitespace between tokens.  Raises DecodeError on anything
    else.
    """
    parser = _Parser(data)
    value = parser.parse_value()
    parser.skip_ws()
    if not parser.at_end():
        raise DecodeError(f"trailing data at byte {parser.pos}")
    return value


class _Parser:
    def __init__(self, data: bytes) -> None:
        if not isinstance(data, (bytes, bytearray)):
            raise DecodeError("canonical input must be bytes")
        self.data = bytes(data)
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.data)

    def skip_ws(self) -> None:
        while self.pos < len(self.data) and self.data[self.pos] in _WHITESPACE:
            self.pos += 1

    def fail(self, message: str) -> DecodeError:
        return DecodeError(f"{message} at byte {self.pos}")

    def peek(self) -> int:
        if self.at_end():
            raise self.fail("unexpected end of input")
        return self.data[self.pos]

    def expect(self, byte: int) -> None:
        if self.at_end() or self.data[self.pos] != byte:
            raise self.fail(f"expected {chr(byte)!r}")
        self.pos += 1

    def parse_value(self) -> Any:
        self.skip_ws()
        head = self.peek()
        if head == ord("{"):
            return self.parse_map()
        if head == ord("["):
            return self.parse_list()
        if head == ord('"'):
            return self.parse_text()
        if head == ord("t") or head == ord("f"):
            return self.parse_bool()
        if head == ord("0") and self.pos + 1 < len(self.data) and self.data[self.pos + 1] == ord("x"):
            return self.parse_bytes()
        if head == ord("-") or head in _DIGITS:
            return self.parse_int()
        raise self.fail(f"unexpected byte {chr(head)!r}")

    def parse_map(self) -> dict[str, Any]:
        self.expect(ord("{"))
        result: dict[str, Any] = {}
        self.skip_ws()
        if not self.at_end() and self.peek() == ord("}"):
            self.pos += 1
            return result
        while True:
            self.skip_ws()
            key = self.parse_text()
            if key in result:
                raise self.fail(f"duplicate map key {key!r}")
            self.skip_ws()
            self.expect(ord(":"))
            result[key] = self.parse_value()
            self.skip_ws()
            if self.at_end():
                raise self.fail("unterminated map")
            if self.peek() == ord(","):
                self.pos += 1
                continue
            self.expect(ord("}"))
            return result

    def parse_list(self) -> list[Any]:
        self.expect(ord("["))
        result: list[Any] = []
        self.skip_ws()
        if not self.at_end() and self.peek() == ord("]"):
            self.pos += 1
            return result
        while True:
            result.append(self.parse_value())
            self.skip_ws()
            if self.at_end():
                raise self.fail("unterminated list")
            if self.peek() == ord(","):
                self.pos += 1
                continue
            self.expect(ord("]"))
            return result

    def parse_text(self) -> str:
        self.expect(ord('"'))
        chunks: list[str] = []
        start = self.pos
        while True:
            if self.at_end():
                raise self.fail("unterminated text")
            byte = self.data[self.pos]
            if byte == ord('"'):
                chunks.append(self._decode_utf8(start, self.pos))
                self.pos += 1
                return "".join(chunks)
            if byte == ord("\\"):
                chunks.append(self._decode_utf8(start, self.pos))
                self.pos += 1
                chunks.append(self._parse_escape())
                start = self.pos
            elif byte < 0x20:
                raise self.fail("raw control character in text")
            else:
                self.pos += 1

    def _decode_utf8(self, start: int, end: int) -> str:
        try:
            return self.data[start:end].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8 in text at byte {start}: {exc}") from None

    def _parse_escape(self) -> str:
        if self.at_end():
            raise self.fail("unterminated escape")
        byte = self.data[self.pos]
        self.pos += 1
        if byte == ord("\\"):
            return "\\"
        if byte == ord('"'):
            return '"'
        if byte == ord("u"):
            if self.pos + 4 > len(self.data):
                raise self.fail("truncated \\u escape")
            hex_part = self.data[self.pos : self.pos + 4]
            if any(b not in _HEX_DIGITS for b in hex_part):
                raise self.fail("\\u escape requires four lowercase hex digits")
            self.pos += 4
            code = int(hex_part, 16)
            if 0xD800 <= code <= 0xDFFF:
                raise self.fail("surrogate code point in \\u escape")
            return chr(code)
        raise self.fail(f"unknown escape \\{chr(byte)!r}")

    def parse_bool(self) -> bool:
        for literal, value in ((b"true", True), (b"false", False)):
            if self.data.startswith(literal, self.pos):
                self.pos += len(literal)
                return value
        raise self.fail("malformed boolean literal")

    def parse_bytes(self) -> bytes:
        self.pos += 2  # consume "0x"
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] in _HEX_DIGITS:
            self.pos += 1
        hex_part = self.data[start : self.pos]
        if len(hex_part) % 2 != 0:
            raise self.fail("odd-length hex in byte-string")
        return bytes.fromhex(hex_part.decode("ascii"))

    def parse_int(self) -> int:
        start = self.pos
        if self.peek() == ord("-"):
            self.pos += 1
        digit_start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] in _DIGITS:
            self.pos += 1
        digits = self.data[digit_start : self.pos]
        if not digits:
            raise self.fail("missing digits in integer")
        if len(digits) > 1 and digits[0] == ord("0"):
            raise self.fail("leading zeros in integer")
        if digits == b"0" and self.data[start] == ord("-"):
            raise self.fail("negative zero")
        return int(self.data[start : self.pos])

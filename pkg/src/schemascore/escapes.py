"""Encoding and decoding of JSON string literals.

``decode_string`` is deliberately strict: it is the inverse of
``encode_string`` and rejects anything the encoder would never produce,
with a distinct error code per failure mode.
"""

from __future__ import annotations

_ENCODE = {
    '"': '\\"',
    "\\": "\\\\",
    "\b": "\\b",
    "\f": "\\f",
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}

_DECODE = {
    '"': '"',
    "\\": "\\",
    "/": "/",
    "b": "\b",
    "f": "\f",
    "n": "\n",
    "r": "\r",
    "t": "\t",
}

_HEX = set("0123456789abcdefABCDEF")


class StringDecodeError(ValueError):
    """Raised by decode_string; ``code`` names the failure mode."""

    def __init__(self, code: str, offset: int, message: str):
        super().__init__(f"{message} (at offset {offset})")
        self.code = code
        self.offset = offset


def encode_string(raw: str) -> str:
    """Encode ``raw`` as a quoted JSON string literal.

    Escapes only what the grammar forces: quote, backslash, and control
    characters U+0000..U+001F; everything else is emitted verbatim.  Lone
    surrogates (possible in Python str) are emitted as \\uXXXX escapes.
    """
    out = ['"']
    for ch in raw:
        esc = _ENCODE.get(ch)
        if esc is not None:
            out.append(esc)
        elif ch < " " or 0xD800 <= ord(ch) <= 0xDFFF:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def decode_string(literal: str) -> str:
    """Decode a quoted JSON string literal back to its raw value.

    Surrogate-pair escapes combine into a single code point.  Raises
    StringDecodeError with code ``unterminated``, ``invalid_escape``,
    ``lone_surrogate``, ``control_char``, or ``trailing_data``.
    """
    n = len(literal)
    if n < 1 or literal[0] != '"':
        raise StringDecodeError("unterminated", 0, "not a quoted string literal")
    out = []
    i = 1
    while True:
        if i >= n:
            raise StringDecodeError("unterminated", n, "unterminated string literal")
        ch = literal[i]
        if ch == '"':
            if i != n - 1:
                raise StringDecodeError("trailing_data", i + 1, "data after closing quote")
            return "".join(out)
        if ch == "\\":
            if i + 1 >= n:
                raise StringDecodeError("unterminated", n, "unterminated escape sequence")
            e = literal[i + 1]
            if e == "u":
                cp, i = _decode_unicode_escape(literal, i, n)
                out.append(chr(cp))
                continue
            rep = _DECODE.get(e)
            if rep is None:
                raise StringDecodeError("invalid_escape", i, f"invalid escape \\{e}")
            out.append(rep)
            i += 2
            continue
        if ch < " ":
            raise StringDecodeError("control_char", i, "raw control character in literal")
        out.append(ch)
        i += 1


def _decode_unicode_escape(literal, i, n):
    cp = _hex4(literal, i, n)
    i += 6
    if 0xDC00 <= cp <= 0xDFFF:
        raise StringDecodeError("lone_surrogate", i - 6, "unpaired low surrogate")
    if 0xD800 <= cp <= 0xDBFF:
        if literal[i : i + 2] != "\\u":
            raise StringDecodeError("lone_surrogate", i - 6, "unpaired high surrogate")
        lo = _hex4(literal, i, n)
        if not 0xDC00 <= lo <= 0xDFFF:
            raise StringDecodeError("lone_surrogate", i - 6, "high surrogate not followed by low")
        cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00)
        i += 6
    return cp, i


def _hex4(literal, i, n):
    digits = literal[i + 2 : i + 6]
    if len(digits) != 4 or any(c not in _HEX for c in digits):
        raise StringDecodeError("invalid_escape", i, "malformed \\u escape")
    return int(digits, 16)

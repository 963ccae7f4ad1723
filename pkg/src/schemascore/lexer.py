"""Tolerant JSON / JSON5 lexing with exact byte offsets.

A scanner produces raw token records; this module decodes string and number
payloads and wraps everything in :class:`~schemascore.tokens.TokenStream`.
The compiled scanner (``schemascore._speedups``, built from Cython) is used
when importable; set ``SCHEMASCORE_PURE=1`` to force the pure-Python
fallback.  Both backends must emit identical records.
"""

from __future__ import annotations

import os

from . import _pylex
from ._pylex import _utf8_len
from .tokens import (
    F_HAS_ESCAPE,
    F_HEX,
    F_IDENT,
    Dialect,
    K_NUMBER,
    K_STRING,
    Token,
    TokenKind,
    TokenStream,
)

if os.environ.get("SCHEMASCORE_PURE"):
    _scan = _pylex.scan
    LEX_BACKEND = "pure"
else:
    try:
        from . import _speedups

        _scan = _speedups.scan
        LEX_BACKEND = "compiled"
    except ImportError:
        _scan = _pylex.scan
        LEX_BACKEND = "pure"

_SHORT = {
    0x22: '"',
    0x5C: "\\",
    0x2F: "/",
    0x62: "\b",
    0x66: "\f",
    0x6E: "\n",
    0x72: "\r",
    0x74: "\t",
}
_J5_EXTRA = {0x27: "'", 0x76: "\v"}

_KIND_OBJECTS = list(TokenKind)


def lex(text, dialect: Dialect | str = Dialect.JSON) -> TokenStream:
    """Tokenize ``text`` (str or bytes). Never fails; see TokenStream."""
    dialect = Dialect.coerce(dialect)
    src = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    json5 = dialect is Dialect.JSON5
    tokens = [_materialize(src, rec, json5) for rec in _scan(src, json5)]
    return TokenStream(tokens, src)


def _materialize(src, rec, json5):
    kind, start, end, flags, invalid_at, decode_end = rec
    decoded = None
    if kind == K_STRING:
        if flags & F_IDENT:
            decoded = src[start:end].decode("ascii")
        else:
            stop = end - 1 if invalid_at < 0 else decode_end
            if flags & F_HAS_ESCAPE:
                decoded = _decode_escaped(src, start + 1, stop, json5)
            else:
                decoded = src[start + 1 : stop].decode("utf-8")
    elif kind == K_NUMBER:
        text = src[start:end].decode("ascii")
        if flags & F_HEX:
            try:
                decoded = float(int(text, 16))
            except OverflowError:
                decoded = float("-inf") if text.startswith("-") else float("inf")
        else:
            decoded = float(text)
    return Token(_KIND_OBJECTS[kind], start, end, decoded, flags, invalid_at, decode_end)


def _decode_escaped(src, a, b, json5):
    """Unescape the string content bytes ``src[a:b]``.

    The scanner guarantees the range contains only complete, valid escape
    sequences and valid UTF-8, so this never raises.
    """
    out = []
    i = a
    while i < b:
        if src[i] != 0x5C:
            j = i
            while j < b and src[j] != 0x5C:
                j += 1
            out.append(src[i:j].decode("utf-8"))
            i = j
            continue
        e = src[i + 1]
        if e == 0x75:  # \uXXXX, pairing surrogates when both halves present
            cp = int(src[i + 2 : i + 6], 16)
            i += 6
            if 0xD800 <= cp <= 0xDBFF and i + 5 < b and src[i] == 0x5C and src[i + 1] == 0x75:
                lo = int(src[i + 2 : i + 6], 16)
                if 0xDC00 <= lo <= 0xDFFF:
                    cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00)
                    i += 6
            out.append(chr(cp))
            continue
        if not json5:
            out.append(_SHORT[e])
            i += 2
            continue
        if e == 0x78:  # \xXX
            out.append(chr(int(src[i + 2 : i + 4], 16)))
            i += 4
            continue
        if e == 0x0A:
            i += 2
            continue
        if e == 0x0D:
            i += 2
            if i < b and src[i] == 0x0A:
                i += 1
            continue
        if e == 0x30:
            out.append("\0")
            i += 2
            continue
        if e >= 0x80:
            ln, _st = _utf8_len(src, i + 1, b)
            ch = src[i + 1 : i + 1 + ln].decode("utf-8")
            if ch not in (" ", " "):  # those are line continuations
                out.append(ch)
            i += 1 + ln
            continue
        ch = _SHORT.get(e) or _J5_EXTRA.get(e)
        out.append(ch if ch is not None else chr(e))
        i += 2
    return "".join(out)

"""Lexical token model shared by the pure-Python and compiled scanners."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Dialect(enum.Enum):
    JSON = "json"
    JSON5 = "json5"

    @classmethod
    def coerce(cls, value: "Dialect | str") -> "Dialect":
        if isinstance(value, Dialect):
            return value
        return cls(str(value).lower())


class TokenKind(enum.IntEnum):
    LBRACE = 0
    RBRACE = 1
    LBRACKET = 2
    RBRACKET = 3
    COLON = 4
    COMMA = 5
    STRING = 6
    NUMBER = 7
    TRUE = 8
    FALSE = 9
    NULL = 10
    COMMENT = 11
    ERROR = 12


# Raw integer codes used by the scanners (must stay aligned with TokenKind).
K_LBRACE = 0
K_RBRACE = 1
K_LBRACKET = 2
K_RBRACKET = 3
K_COLON = 4
K_COMMA = 5
K_STRING = 6
K_NUMBER = 7
K_TRUE = 8
K_FALSE = 9
K_NULL = 10
K_COMMENT = 11
K_ERROR = 12

# Token flag bits.
F_INCOMPLETE = 1  # token ran into end-of-input and could still be extended
F_IDENT = 2  # JSON5 unquoted identifier (usable only as an object key)
F_HAS_ESCAPE = 4  # string contains at least one escape sequence
F_HEX = 8  # JSON5 hexadecimal number

_KINDS = list(TokenKind)


class Token:
    """One lexical token.

    ``start``/``end`` are byte offsets into the (UTF-8) source, half-open.
    ``decoded`` holds the unescaped text for strings, the numeric value for
    numbers, and ``None`` otherwise.  For a string cut short by the end of
    input or an invalid byte, ``invalid_at`` is the offset where lexing gave
    up and ``decode_end`` is the end of the longest cleanly decodable prefix
    (the point at which a closing quote could be appended).
    """

    __slots__ = ("kind", "start", "end", "decoded", "flags", "invalid_at", "decode_end")

    def __init__(self, kind, start, end, decoded=None, flags=0, invalid_at=-1, decode_end=-1):
        self.kind = kind
        self.start = start
        self.end = end
        self.decoded = decoded
        self.flags = flags
        self.invalid_at = invalid_at
        self.decode_end = decode_end if decode_end >= 0 else end

    @property
    def incomplete(self) -> bool:
        return bool(self.flags & F_INCOMPLETE)

    @property
    def is_ident(self) -> bool:
        return bool(self.flags & F_IDENT)

    def __eq__(self, other):
        if not isinstance(other, Token):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.start == other.start
            and self.end == other.end
            and self.decoded == other.decoded
            and self.flags == other.flags
            and self.invalid_at == other.invalid_at
            and self.decode_end == other.decode_end
        )

    def __repr__(self):
        extra = ""
        if self.decoded is not None:
            extra = f" decoded={self.decoded!r}"
        if self.flags:
            extra += f" flags={self.flags}"
        return f"<Token {TokenKind(self.kind).name} [{self.start}:{self.end}]{extra}>"


@dataclass
class TokenStream:
    """All tokens of one source text plus the source itself.

    Lexing is total: any byte string produces a stream; bytes no scanner can
    claim are covered by ERROR tokens, one per maximal contiguous run.
    """

    tokens: list = field(default_factory=list)
    source: bytes = b""

    @property
    def source_len(self) -> int:
        return len(self.source)

    def text(self, token: Token) -> str:
        """Raw source slice of a token, decoded leniently for display."""
        return self.source[token.start : token.end].decode("utf-8", "replace")

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

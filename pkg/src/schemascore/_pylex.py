"""Pure-Python byte scanner: fallback for the compiled lexer core.

Produces raw token records ``(kind, start, end, flags, invalid_at,
decode_end)``; :mod:`schemascore.lexer` materializes them into ``Token``
objects.  The compiled scanner in ``schemascore._speedups`` must produce
bit-identical records (enforced by the parity tests).

Scanning is total: any byte string yields records whose spans are non-empty,
strictly increasing, and separated only by whitespace.  Bytes that cannot
start a token are collected into ERROR records, one per maximal run.

``invalid_at`` is -1 for a clean token, otherwise the byte offset at which
the token became unsalvageable (== len(src) for tokens cut short by end of
input, which also sets F_INCOMPLETE).  ``decode_end`` is, for strings, the
end of the longest prefix that a closing quote could terminate.
"""

from __future__ import annotations

from .tokens import (
    F_HAS_ESCAPE,
    F_HEX,
    F_IDENT,
    F_INCOMPLETE,
    K_COLON,
    K_COMMA,
    K_COMMENT,
    K_ERROR,
    K_FALSE,
    K_LBRACE,
    K_LBRACKET,
    K_NULL,
    K_NUMBER,
    K_RBRACE,
    K_RBRACKET,
    K_STRING,
    K_TRUE,
)

_STRUCTURAL = {
    0x7B: K_LBRACE,
    0x7D: K_RBRACE,
    0x5B: K_LBRACKET,
    0x5D: K_RBRACKET,
    0x3A: K_COLON,
    0x2C: K_COMMA,
}

_DIGITS = frozenset(range(0x30, 0x3A))
_HEXDIGITS = frozenset(b"0123456789abcdefABCDEF")
_STRICT_ESCAPES = frozenset(b'"\\/bfnrt')
_NUMBERISH = frozenset(b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ.+-")
_LITERALS = {0x74: b"true", 0x66: b"false", 0x6E: b"null"}
_LITERAL_KINDS = {0x74: K_TRUE, 0x66: K_FALSE, 0x6E: K_NULL}


def _ws_len(src, i, n, json5):
    b = src[i]
    if b in (0x20, 0x09, 0x0A, 0x0D):
        return 1
    if not json5:
        return 0
    if b in (0x0B, 0x0C):
        return 1
    if b == 0xC2 and i + 1 < n and src[i + 1] == 0xA0:  # U+00A0
        return 2
    if b == 0xEF and i + 2 < n and src[i + 1] == 0xBB and src[i + 2] == 0xBF:  # U+FEFF
        return 3
    if b == 0xE2 and i + 2 < n and src[i + 1] == 0x80 and src[i + 2] in (0xA8, 0xA9):
        return 3  # U+2028 / U+2029
    return 0


def _utf8_len(src, i, n):
    """Validate one UTF-8 sequence starting at ``i``.

    Returns ``(length, status)``: status 1 = valid, 0 = invalid, -1 = cut
    short by end of input.  Matches CPython's strict decoder (rejects
    surrogates and overlong forms).
    """
    b0 = src[i]
    if b0 < 0x80:
        return 1, 1
    if 0xC2 <= b0 <= 0xDF:
        need, lo, hi = 1, 0x80, 0xBF
    elif b0 == 0xE0:
        need, lo, hi = 2, 0xA0, 0xBF
    elif 0xE1 <= b0 <= 0xEC or b0 == 0xEE or b0 == 0xEF:
        need, lo, hi = 2, 0x80, 0xBF
    elif b0 == 0xED:
        need, lo, hi = 2, 0x80, 0x9F
    elif b0 == 0xF0:
        need, lo, hi = 3, 0x90, 0xBF
    elif 0xF1 <= b0 <= 0xF3:
        need, lo, hi = 3, 0x80, 0xBF
    elif b0 == 0xF4:
        need, lo, hi = 3, 0x80, 0x8F
    else:
        return 1, 0
    for k in range(1, need + 1):
        if i + k >= n:
            return k, -1
        b = src[i + k]
        if k == 1:
            if not (lo <= b <= hi):
                return 1, 0
        elif not (0x80 <= b <= 0xBF):
            return k, 0
    return need + 1, 1


def _scan_string(src, i, n, json5, quote):
    j = i + 1
    flags = 0
    while j < n:
        b = src[j]
        if b == quote:
            return (K_STRING, i, j + 1, flags, -1, j)
        if b == 0x5C:  # backslash
            esc = j
            if j + 1 >= n:
                return (K_STRING, i, n, flags | F_INCOMPLETE, n, esc)
            e = src[j + 1]
            flags |= F_HAS_ESCAPE
            if e == 0x75:  # \uXXXX
                k = j + 2
                stop = j + 6
                while k < stop:
                    if k >= n:
                        return (K_STRING, i, n, flags | F_INCOMPLETE, n, esc)
                    if src[k] not in _HEXDIGITS:
                        return (K_STRING, i, k, flags, k, esc)
                    k += 1
                j = stop
                continue
            if not json5:
                if e in _STRICT_ESCAPES:
                    j += 2
                    continue
                return (K_STRING, i, j + 1, flags, j + 1, esc)
            # JSON5 escapes
            if e == 0x78:  # \xXX
                k = j + 2
                stop = j + 4
                while k < stop:
                    if k >= n:
                        return (K_STRING, i, n, flags | F_INCOMPLETE, n, esc)
                    if src[k] not in _HEXDIGITS:
                        return (K_STRING, i, k, flags, k, esc)
                    k += 1
                j = stop
                continue
            if e == 0x0A:  # line continuation
                j += 2
                continue
            if e == 0x0D:
                j += 2
                if j < n and src[j] == 0x0A:
                    j += 1
                continue
            if e == 0x30:  # \0, invalid when followed by a digit
                if j + 2 < n and src[j + 2] in _DIGITS:
                    return (K_STRING, i, j + 2, flags, j + 2, esc)
                j += 2
                continue
            if 0x31 <= e <= 0x39:
                return (K_STRING, i, j + 1, flags, j + 1, esc)
            if e >= 0x80:
                ln, st = _utf8_len(src, j + 1, n)
                if st < 0:
                    return (K_STRING, i, n, flags | F_INCOMPLETE, n, esc)
                if st == 0:
                    return (K_STRING, i, j + 1, flags, j + 1, esc)
                # \ + U+2028/2029 continues the line; any other char
                # escapes to itself.  Either way the bytes are consumed.
                j += 1 + ln
                continue
            j += 2  # any other single-byte char escapes to itself
            continue
        if b < 0x20:
            if json5 and b != 0x0A and b != 0x0D:
                j += 1  # JSON5 allows raw control chars except line ends
                continue
            return (K_STRING, i, j, flags, j, j)
        if b < 0x80:
            j += 1
            continue
        ln, st = _utf8_len(src, j, n)
        if st < 0:
            return (K_STRING, i, n, flags | F_INCOMPLETE, n, j)
        if st == 0:
            return (K_STRING, i, j, flags, j, j)
        j += ln
    return (K_STRING, i, n, flags | F_INCOMPLETE, n, j)


def _number_error(src, start, fail_at, n):
    j = fail_at
    while j < n and src[j] in _NUMBERISH:
        j += 1
    flags = F_INCOMPLETE if fail_at >= n else 0
    return (K_ERROR, start, j if j > start else fail_at, flags, fail_at, j)


def _scan_number(src, i, n, json5):
    j = i
    if src[j] == 0x2D or src[j] == 0x2B:  # '+' only dispatched in JSON5
        j += 1
    if json5 and j < n and (src[j] == 0x49 or src[j] == 0x4E):  # Infinity / NaN
        cand = b"Infinity" if src[j] == 0x49 else b"NaN"
        k = j
        while k < n and (0x41 <= src[k] <= 0x5A or 0x61 <= src[k] <= 0x7A):
            k += 1
        word = src[j:k]
        if word == cand:
            return (K_NUMBER, i, k, 0, -1, k)
        m = 0
        lim = min(len(word), len(cand))
        while m < lim and word[m] == cand[m]:
            m += 1
        return _number_error(src, i, j + m, n)
    saw_int = False
    saw_frac = False
    if j < n and src[j] == 0x30:
        j += 1
        saw_int = True
        if json5 and j < n and (src[j] == 0x78 or src[j] == 0x58):  # 0x hex
            j += 1
            h0 = j
            while j < n and src[j] in _HEXDIGITS:
                j += 1
            if j == h0:
                return _number_error(src, i, j, n)
            return (K_NUMBER, i, j, F_HEX, -1, j)
        if j < n and src[j] in _DIGITS:
            return _number_error(src, i, j, n)  # leading zero
    elif j < n and src[j] in _DIGITS:
        while j < n and src[j] in _DIGITS:
            j += 1
        saw_int = True
    if j < n and src[j] == 0x2E:
        if not json5 and not saw_int:
            return _number_error(src, i, j, n)
        j += 1
        f0 = j
        while j < n and src[j] in _DIGITS:
            j += 1
        saw_frac = j > f0
        if not json5 and not saw_frac:
            return _number_error(src, i, j, n)
        if json5 and not (saw_int or saw_frac):
            return _number_error(src, i, j, n)
    if j < n and (src[j] == 0x65 or src[j] == 0x45):
        if not (saw_int or saw_frac):
            return _number_error(src, i, j, n)
        j += 1
        if j < n and (src[j] == 0x2B or src[j] == 0x2D):
            j += 1
        e0 = j
        while j < n and src[j] in _DIGITS:
            j += 1
        if j == e0:
            return _number_error(src, i, j, n)
    if not (saw_int or saw_frac):
        return _number_error(src, i, j, n)
    return (K_NUMBER, i, j, 0, -1, j)


def _scan_literal(src, i, n):
    cand = _LITERALS[src[i]]
    j = i
    while j < n and (0x41 <= src[j] <= 0x5A or 0x61 <= src[j] <= 0x7A):
        j += 1
    word = src[i:j]
    if word == cand:
        return (_LITERAL_KINDS[src[i]], i, j, 0, -1, j)
    m = 0
    lim = min(len(word), len(cand))
    while m < lim and word[m] == cand[m]:
        m += 1
    fail_at = i + m
    flags = F_INCOMPLETE if fail_at >= n else 0
    return (K_ERROR, i, j, flags, fail_at, j)


def _scan_ident(src, i, n):
    j = i
    while j < n:
        b = src[j]
        if 0x41 <= b <= 0x5A or 0x61 <= b <= 0x7A or b in _DIGITS or b == 0x5F or b == 0x24:
            j += 1
        else:
            break
    word = src[i:j]
    if word == b"true":
        return (K_TRUE, i, j, 0, -1, j)
    if word == b"false":
        return (K_FALSE, i, j, 0, -1, j)
    if word == b"null":
        return (K_NULL, i, j, 0, -1, j)
    if word == b"Infinity" or word == b"NaN":
        return (K_NUMBER, i, j, 0, -1, j)
    return (K_STRING, i, j, F_IDENT, -1, j)


def _scan_comment(src, i, n):
    nxt = src[i + 1] if i + 1 < n else -1
    if nxt == 0x2F:  # // to end of line
        j = i + 2
        while j < n:
            b = src[j]
            if b == 0x0A or b == 0x0D:
                break
            if b == 0xE2 and j + 2 < n and src[j + 1] == 0x80 and (src[j + 2] == 0xA8 or src[j + 2] == 0xA9):
                break
            j += 1
        return (K_COMMENT, i, j, 0, -1, j)
    if nxt == 0x2A:  # /* ... */
        j = i + 2
        while j + 1 < n:
            if src[j] == 0x2A and src[j + 1] == 0x2F:
                return (K_COMMENT, i, j + 2, 0, -1, j + 2)
            j += 1
        return (K_COMMENT, i, n, F_INCOMPLETE, n, n)
    return None


def _can_start(b, json5):
    if b in _STRUCTURAL or b == 0x22 or b in _DIGITS or b == 0x2D:
        return True
    if json5:
        return (
            b == 0x27
            or b == 0x2B
            or b == 0x2E
            or b == 0x2F
            or 0x41 <= b <= 0x5A
            or 0x61 <= b <= 0x7A
            or b == 0x5F
            or b == 0x24
        )
    return b == 0x74 or b == 0x66 or b == 0x6E


def _push(recs, rec):
    # Adjacent ERROR records collapse into one maximal run; the first
    # fragment's doom offset wins (it is the earliest).
    if rec[0] == K_ERROR and recs:
        last = recs[-1]
        if last[0] == K_ERROR and last[2] == rec[1]:
            recs[-1] = (K_ERROR, last[1], rec[2], last[3], last[4], rec[2])
            return
    recs.append(rec)


def _error_run(src, i, n, json5, recs):
    j = i
    while j < n:
        if _ws_len(src, j, n, json5) or _can_start(src[j], json5):
            break
        j += 1
    if j == i:
        j = i + 1  # byte that can start a token but failed elsewhere
    _push(recs, (K_ERROR, i, j, 0, i, j))
    return j


def scan(src: bytes, json5: bool) -> list:
    n = len(src)
    recs = []
    i = 0
    while i < n:
        w = _ws_len(src, i, n, json5)
        if w:
            i += w
            continue
        b = src[i]
        kind = _STRUCTURAL.get(b)
        if kind is not None:
            recs.append((kind, i, i + 1, 0, -1, i + 1))
            i += 1
            continue
        if b == 0x22 or (json5 and b == 0x27):
            rec = _scan_string(src, i, n, json5, b)
        elif b in _DIGITS or b == 0x2D or (json5 and (b == 0x2B or b == 0x2E)):
            rec = _scan_number(src, i, n, json5)
        elif json5 and (0x41 <= b <= 0x5A or 0x61 <= b <= 0x7A or b == 0x5F or b == 0x24):
            rec = _scan_ident(src, i, n)
        elif not json5 and (b == 0x74 or b == 0x66 or b == 0x6E):
            rec = _scan_literal(src, i, n)
        elif json5 and b == 0x2F:
            rec = _scan_comment(src, i, n)
            if rec is None:
                i = _error_run(src, i, n, json5, recs)
                continue
        else:
            i = _error_run(src, i, n, json5, recs)
            continue
        _push(recs, rec)
        i = rec[2]
    return recs

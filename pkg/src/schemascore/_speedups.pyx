# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scanner core: a C port of schemascore._pylex.scan.

Must produce records bit-identical to the pure scanner (the parity tests
enforce it).  The byte scan runs without the GIL; records are materialized
into Python tuples afterwards.
"""

from libc.stdlib cimport free, malloc

cdef enum:
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

cdef enum:
    F_INCOMPLETE = 1
    F_IDENT = 2
    F_HAS_ESCAPE = 4
    F_HEX = 8

cdef struct Rec:
    Py_ssize_t kind
    Py_ssize_t start
    Py_ssize_t end
    Py_ssize_t flags
    Py_ssize_t invalid_at
    Py_ssize_t decode_end


cdef inline bint _is_digit(unsigned char b) nogil:
    return 0x30 <= b <= 0x39

cdef inline bint _is_hex(unsigned char b) nogil:
    return _is_digit(b) or 0x61 <= b <= 0x66 or 0x41 <= b <= 0x46

cdef inline bint _is_alpha(unsigned char b) nogil:
    return 0x41 <= b <= 0x5A or 0x61 <= b <= 0x7A

cdef inline bint _is_ident_char(unsigned char b) nogil:
    return _is_alpha(b) or _is_digit(b) or b == 0x5F or b == 0x24

cdef inline bint _is_numberish(unsigned char b) nogil:
    return _is_digit(b) or _is_alpha(b) or b == 0x2E or b == 0x2B or b == 0x2D

cdef inline bint _is_structural(unsigned char b) nogil:
    return b == 0x7B or b == 0x7D or b == 0x5B or b == 0x5D or b == 0x3A or b == 0x2C

cdef inline Py_ssize_t _structural_kind(unsigned char b) nogil:
    if b == 0x7B:
        return K_LBRACE
    if b == 0x7D:
        return K_RBRACE
    if b == 0x5B:
        return K_LBRACKET
    if b == 0x5D:
        return K_RBRACKET
    if b == 0x3A:
        return K_COLON
    return K_COMMA

cdef inline bint _is_strict_escape(unsigned char b) nogil:
    # " \ / b f n r t
    return (b == 0x22 or b == 0x5C or b == 0x2F or b == 0x62 or b == 0x66
            or b == 0x6E or b == 0x72 or b == 0x74)


cdef Py_ssize_t _ws_len(const unsigned char* s, Py_ssize_t i, Py_ssize_t n, bint json5) nogil:
    cdef unsigned char b = s[i]
    if b == 0x20 or b == 0x09 or b == 0x0A or b == 0x0D:
        return 1
    if not json5:
        return 0
    if b == 0x0B or b == 0x0C:
        return 1
    if b == 0xC2 and i + 1 < n and s[i + 1] == 0xA0:
        return 2
    if b == 0xEF and i + 2 < n and s[i + 1] == 0xBB and s[i + 2] == 0xBF:
        return 3
    if b == 0xE2 and i + 2 < n and s[i + 1] == 0x80 and (s[i + 2] == 0xA8 or s[i + 2] == 0xA9):
        return 3
    return 0


cdef int _utf8_check(const unsigned char* s, Py_ssize_t i, Py_ssize_t n, Py_ssize_t* length) nogil:
    """status 1 = valid (length set), 0 = invalid, -1 = truncated by EOF."""
    cdef unsigned char b0 = s[i]
    cdef Py_ssize_t need
    cdef unsigned char lo, hi, b
    cdef Py_ssize_t k
    if b0 < 0x80:
        length[0] = 1
        return 1
    if 0xC2 <= b0 <= 0xDF:
        need = 1; lo = 0x80; hi = 0xBF
    elif b0 == 0xE0:
        need = 2; lo = 0xA0; hi = 0xBF
    elif (0xE1 <= b0 <= 0xEC) or b0 == 0xEE or b0 == 0xEF:
        need = 2; lo = 0x80; hi = 0xBF
    elif b0 == 0xED:
        need = 2; lo = 0x80; hi = 0x9F
    elif b0 == 0xF0:
        need = 3; lo = 0x90; hi = 0xBF
    elif 0xF1 <= b0 <= 0xF3:
        need = 3; lo = 0x80; hi = 0xBF
    elif b0 == 0xF4:
        need = 3; lo = 0x80; hi = 0x8F
    else:
        length[0] = 1
        return 0
    for k in range(1, need + 1):
        if i + k >= n:
            length[0] = k
            return -1
        b = s[i + k]
        if k == 1:
            if not (lo <= b <= hi):
                length[0] = 1
                return 0
        elif not (0x80 <= b <= 0xBF):
            length[0] = k
            return 0
    length[0] = need + 1
    return 1


cdef inline Rec _string_rec(Py_ssize_t start, Py_ssize_t end, Py_ssize_t flags,
                            Py_ssize_t invalid_at, Py_ssize_t decode_end) nogil:
    cdef Rec r
    r.kind = K_STRING; r.start = start; r.end = end
    r.flags = flags; r.invalid_at = invalid_at; r.decode_end = decode_end
    return r


cdef Rec _scan_string(const unsigned char* s, Py_ssize_t i, Py_ssize_t n,
                      bint json5, unsigned char quote) nogil:
    cdef Py_ssize_t j = i + 1
    cdef Py_ssize_t flags = 0
    cdef Py_ssize_t esc, k, stop, ln
    cdef unsigned char b, e
    cdef int st
    while j < n:
        b = s[j]
        if b == quote:
            return _string_rec(i, j + 1, flags, -1, j)
        if b == 0x5C:
            esc = j
            if j + 1 >= n:
                return _string_rec(i, n, flags | F_INCOMPLETE, n, esc)
            e = s[j + 1]
            flags |= F_HAS_ESCAPE
            if e == 0x75:  # \uXXXX
                k = j + 2
                stop = j + 6
                while k < stop:
                    if k >= n:
                        return _string_rec(i, n, flags | F_INCOMPLETE, n, esc)
                    if not _is_hex(s[k]):
                        return _string_rec(i, k, flags, k, esc)
                    k += 1
                j = stop
                continue
            if not json5:
                if _is_strict_escape(e):
                    j += 2
                    continue
                return _string_rec(i, j + 1, flags, j + 1, esc)
            if e == 0x78:  # \xXX
                k = j + 2
                stop = j + 4
                while k < stop:
                    if k >= n:
                        return _string_rec(i, n, flags | F_INCOMPLETE, n, esc)
                    if not _is_hex(s[k]):
                        return _string_rec(i, k, flags, k, esc)
                    k += 1
                j = stop
                continue
            if e == 0x0A:
                j += 2
                continue
            if e == 0x0D:
                j += 2
                if j < n and s[j] == 0x0A:
                    j += 1
                continue
            if e == 0x30:
                if j + 2 < n and _is_digit(s[j + 2]):
                    return _string_rec(i, j + 2, flags, j + 2, esc)
                j += 2
                continue
            if 0x31 <= e <= 0x39:
                return _string_rec(i, j + 1, flags, j + 1, esc)
            if e >= 0x80:
                st = _utf8_check(s, j + 1, n, &ln)
                if st < 0:
                    return _string_rec(i, n, flags | F_INCOMPLETE, n, esc)
                if st == 0:
                    return _string_rec(i, j + 1, flags, j + 1, esc)
                j += 1 + ln
                continue
            j += 2
            continue
        if b < 0x20:
            if json5 and b != 0x0A and b != 0x0D:
                j += 1
                continue
            return _string_rec(i, j, flags, j, j)
        if b < 0x80:
            j += 1
            continue
        st = _utf8_check(s, j, n, &ln)
        if st < 0:
            return _string_rec(i, n, flags | F_INCOMPLETE, n, j)
        if st == 0:
            return _string_rec(i, j, flags, j, j)
        j += ln
    return _string_rec(i, n, flags | F_INCOMPLETE, n, j)


cdef Rec _number_error(const unsigned char* s, Py_ssize_t start, Py_ssize_t fail_at, Py_ssize_t n) nogil:
    cdef Py_ssize_t j = fail_at
    cdef Rec r
    while j < n and _is_numberish(s[j]):
        j += 1
    r.kind = K_ERROR
    r.start = start
    r.end = j if j > start else fail_at
    r.flags = F_INCOMPLETE if fail_at >= n else 0
    r.invalid_at = fail_at
    r.decode_end = j
    return r


cdef inline Py_ssize_t _word_diverge(const unsigned char* s, Py_ssize_t wstart, Py_ssize_t wlen,
                                     const char* cand, Py_ssize_t clen) nogil:
    cdef Py_ssize_t m = 0
    cdef Py_ssize_t lim = wlen if wlen < clen else clen
    while m < lim and s[wstart + m] == <unsigned char> cand[m]:
        m += 1
    return m


cdef inline bint _word_equals(const unsigned char* s, Py_ssize_t wstart, Py_ssize_t wlen,
                              const char* cand, Py_ssize_t clen) nogil:
    if wlen != clen:
        return False
    return _word_diverge(s, wstart, wlen, cand, clen) == wlen


cdef Rec _scan_number(const unsigned char* s, Py_ssize_t i, Py_ssize_t n, bint json5) nogil:
    cdef Py_ssize_t j = i
    cdef Py_ssize_t k, h0, f0, e0, m, wlen
    cdef bint saw_int = False
    cdef bint saw_frac = False
    cdef bint is_inf
    cdef Rec r
    if s[j] == 0x2D or s[j] == 0x2B:
        j += 1
    if json5 and j < n and (s[j] == 0x49 or s[j] == 0x4E):  # Infinity / NaN
        is_inf = s[j] == 0x49
        k = j
        while k < n and _is_alpha(s[k]):
            k += 1
        wlen = k - j
        if is_inf and _word_equals(s, j, wlen, "Infinity", 8):
            r.kind = K_NUMBER; r.start = i; r.end = k
            r.flags = 0; r.invalid_at = -1; r.decode_end = k
            return r
        if (not is_inf) and _word_equals(s, j, wlen, "NaN", 3):
            r.kind = K_NUMBER; r.start = i; r.end = k
            r.flags = 0; r.invalid_at = -1; r.decode_end = k
            return r
        if is_inf:
            m = _word_diverge(s, j, wlen, "Infinity", 8)
        else:
            m = _word_diverge(s, j, wlen, "NaN", 3)
        return _number_error(s, i, j + m, n)
    if j < n and s[j] == 0x30:
        j += 1
        saw_int = True
        if json5 and j < n and (s[j] == 0x78 or s[j] == 0x58):
            j += 1
            h0 = j
            while j < n and _is_hex(s[j]):
                j += 1
            if j == h0:
                return _number_error(s, i, j, n)
            r.kind = K_NUMBER; r.start = i; r.end = j
            r.flags = F_HEX; r.invalid_at = -1; r.decode_end = j
            return r
        if j < n and _is_digit(s[j]):
            return _number_error(s, i, j, n)
    elif j < n and _is_digit(s[j]):
        while j < n and _is_digit(s[j]):
            j += 1
        saw_int = True
    if j < n and s[j] == 0x2E:
        if not json5 and not saw_int:
            return _number_error(s, i, j, n)
        j += 1
        f0 = j
        while j < n and _is_digit(s[j]):
            j += 1
        saw_frac = j > f0
        if not json5 and not saw_frac:
            return _number_error(s, i, j, n)
        if json5 and not (saw_int or saw_frac):
            return _number_error(s, i, j, n)
    if j < n and (s[j] == 0x65 or s[j] == 0x45):
        if not (saw_int or saw_frac):
            return _number_error(s, i, j, n)
        j += 1
        if j < n and (s[j] == 0x2B or s[j] == 0x2D):
            j += 1
        e0 = j
        while j < n and _is_digit(s[j]):
            j += 1
        if j == e0:
            return _number_error(s, i, j, n)
    if not (saw_int or saw_frac):
        return _number_error(s, i, j, n)
    r.kind = K_NUMBER; r.start = i; r.end = j
    r.flags = 0; r.invalid_at = -1; r.decode_end = j
    return r


cdef Rec _scan_literal(const unsigned char* s, Py_ssize_t i, Py_ssize_t n) nogil:
    cdef const char* cand
    cdef Py_ssize_t clen, j, wlen, m, fail_at, kind
    cdef Rec r
    if s[i] == 0x74:
        cand = "true"; clen = 4; kind = K_TRUE
    elif s[i] == 0x66:
        cand = "false"; clen = 5; kind = K_FALSE
    else:
        cand = "null"; clen = 4; kind = K_NULL
    j = i
    while j < n and _is_alpha(s[j]):
        j += 1
    wlen = j - i
    if _word_equals(s, i, wlen, cand, clen):
        r.kind = kind; r.start = i; r.end = j
        r.flags = 0; r.invalid_at = -1; r.decode_end = j
        return r
    m = _word_diverge(s, i, wlen, cand, clen)
    fail_at = i + m
    r.kind = K_ERROR; r.start = i; r.end = j
    r.flags = F_INCOMPLETE if fail_at >= n else 0
    r.invalid_at = fail_at; r.decode_end = j
    return r


cdef Rec _scan_ident(const unsigned char* s, Py_ssize_t i, Py_ssize_t n) nogil:
    cdef Py_ssize_t j = i
    cdef Py_ssize_t wlen, kind, flags
    cdef Rec r
    while j < n and _is_ident_char(s[j]):
        j += 1
    wlen = j - i
    flags = 0
    if _word_equals(s, i, wlen, "true", 4):
        kind = K_TRUE
    elif _word_equals(s, i, wlen, "false", 5):
        kind = K_FALSE
    elif _word_equals(s, i, wlen, "null", 4):
        kind = K_NULL
    elif _word_equals(s, i, wlen, "Infinity", 8) or _word_equals(s, i, wlen, "NaN", 3):
        kind = K_NUMBER
    else:
        kind = K_STRING
        flags = F_IDENT
    r.kind = kind; r.start = i; r.end = j
    r.flags = flags; r.invalid_at = -1; r.decode_end = j
    return r


cdef Rec _scan_comment(const unsigned char* s, Py_ssize_t i, Py_ssize_t n) nogil:
    """kind == -1 signals a lone '/' (not a comment)."""
    cdef Py_ssize_t j
    cdef unsigned char nxt = s[i + 1] if i + 1 < n else 0
    cdef Rec r
    if nxt == 0x2F:
        j = i + 2
        while j < n:
            if s[j] == 0x0A or s[j] == 0x0D:
                break
            if s[j] == 0xE2 and j + 2 < n and s[j + 1] == 0x80 and (s[j + 2] == 0xA8 or s[j + 2] == 0xA9):
                break
            j += 1
        r.kind = K_COMMENT; r.start = i; r.end = j
        r.flags = 0; r.invalid_at = -1; r.decode_end = j
        return r
    if nxt == 0x2A:
        j = i + 2
        while j + 1 < n:
            if s[j] == 0x2A and s[j + 1] == 0x2F:
                r.kind = K_COMMENT; r.start = i; r.end = j + 2
                r.flags = 0; r.invalid_at = -1; r.decode_end = j + 2
                return r
            j += 1
        r.kind = K_COMMENT; r.start = i; r.end = n
        r.flags = F_INCOMPLETE; r.invalid_at = n; r.decode_end = n
        return r
    r.kind = -1
    return r


cdef bint _can_start(unsigned char b, bint json5) nogil:
    if _is_structural(b) or b == 0x22 or _is_digit(b) or b == 0x2D:
        return True
    if json5:
        return (b == 0x27 or b == 0x2B or b == 0x2E or b == 0x2F
                or _is_ident_char(b))
    return b == 0x74 or b == 0x66 or b == 0x6E


cdef inline void _push(Rec* recs, Py_ssize_t* count, Rec rec) nogil:
    if rec.kind == K_ERROR and count[0] > 0:
        if recs[count[0] - 1].kind == K_ERROR and recs[count[0] - 1].end == rec.start:
            recs[count[0] - 1].end = rec.end
            recs[count[0] - 1].decode_end = rec.end
            return
    recs[count[0]] = rec
    count[0] += 1


cdef Py_ssize_t _error_run(const unsigned char* s, Py_ssize_t i, Py_ssize_t n,
                           bint json5, Rec* recs, Py_ssize_t* count) nogil:
    cdef Py_ssize_t j = i
    cdef Rec r
    while j < n:
        if _ws_len(s, j, n, json5) or _can_start(s[j], json5):
            break
        j += 1
    if j == i:
        j = i + 1
    r.kind = K_ERROR; r.start = i; r.end = j
    r.flags = 0; r.invalid_at = i; r.decode_end = j
    _push(recs, count, r)
    return j


cdef Py_ssize_t _scan_all(const unsigned char* s, Py_ssize_t n, bint json5,
                          Rec* recs) nogil:
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t w
    cdef unsigned char b
    cdef Rec rec
    while i < n:
        w = _ws_len(s, i, n, json5)
        if w:
            i += w
            continue
        b = s[i]
        if _is_structural(b):
            rec.kind = _structural_kind(b); rec.start = i; rec.end = i + 1
            rec.flags = 0; rec.invalid_at = -1; rec.decode_end = i + 1
            recs[count] = rec
            count += 1
            i += 1
            continue
        if b == 0x22 or (json5 and b == 0x27):
            rec = _scan_string(s, i, n, json5, b)
        elif _is_digit(b) or b == 0x2D or (json5 and (b == 0x2B or b == 0x2E)):
            rec = _scan_number(s, i, n, json5)
        elif json5 and _is_ident_char(b) and not _is_digit(b):
            rec = _scan_ident(s, i, n)
        elif (not json5) and (b == 0x74 or b == 0x66 or b == 0x6E):
            rec = _scan_literal(s, i, n)
        elif json5 and b == 0x2F:
            rec = _scan_comment(s, i, n)
            if rec.kind == -1:
                i = _error_run(s, i, n, json5, recs, &count)
                continue
        else:
            i = _error_run(s, i, n, json5, recs, &count)
            continue
        _push(recs, &count, rec)
        i = rec.end
    return count


def scan(src, bint json5):
    """Raw token records for ``src`` (bytes); see _pylex.scan."""
    cdef bytes data = bytes(src)
    cdef const unsigned char* s = data
    cdef Py_ssize_t n = len(data)
    cdef Py_ssize_t count, idx
    cdef Rec* recs
    if n == 0:
        return []
    recs = <Rec*> malloc((n + 1) * sizeof(Rec))
    if recs == NULL:
        raise MemoryError()
    try:
        with nogil:
            count = _scan_all(s, n, json5, recs)
        out = []
        for idx in range(count):
            out.append((recs[idx].kind, recs[idx].start, recs[idx].end,
                        recs[idx].flags, recs[idx].invalid_at, recs[idx].decode_end))
        return out
    finally:
        free(recs)

import pytest
from hypothesis import given, strategies as st

from schemascore import lex
from schemascore.lexer import LEX_BACKEND
from schemascore.tokens import TokenKind

WS_JSON = {0x20, 0x09, 0x0A, 0x0D}


def kinds(stream):
    return [TokenKind(t.kind).name for t in stream]


def test_simple_object():
    assert kinds(lex('{"a":1}')) == ["LBRACE", "STRING", "COLON", "NUMBER", "RBRACE"]


def test_empty_input():
    assert len(lex("")) == 0


def test_error_token_covers_maximal_run():
    stream = lex('{"a": @}')
    assert kinds(stream) == ["LBRACE", "STRING", "COLON", "ERROR", "RBRACE"]
    err = stream[3]
    assert (err.start, err.end) == (6, 7)


def test_garbage_collapses_to_one_error():
    stream = lex("@#$%^&")
    assert kinds(stream) == ["ERROR"]
    assert (stream[0].start, stream[0].end) == (0, 6)


def test_error_runs_split_by_whitespace():
    stream = lex("@@ @@")
    assert kinds(stream) == ["ERROR", "ERROR"]


def test_bad_literal_merges_with_adjacent_garbage():
    stream = lex("tru@")
    assert kinds(stream) == ["ERROR"]
    assert (stream[0].start, stream[0].end) == (0, 4)


def test_string_decoding():
    stream = lex('"a\\nb\\u00e9\\ud83d\\ude00"')
    tok = stream[0]
    assert tok.decoded == "a\nbé\U0001F600"


def test_number_values():
    stream = lex("[1, -2.5, 3e2, 0.125]")
    nums = [t.decoded for t in stream if t.kind == TokenKind.NUMBER]
    assert nums == [1.0, -2.5, 300.0, 0.125]


def test_strict_rejects_json5_forms():
    assert "ERROR" in kinds(lex("{a: 1}"))
    assert "ERROR" in kinds(lex("'single'"))
    assert "ERROR" in kinds(lex("// comment"))


def test_json5_comments_and_idents():
    stream = lex("{a: 1, /* note */ b: 'x'} // tail", "json5")
    names = kinds(stream)
    assert "COMMENT" in names and "ERROR" not in names
    idents = [t for t in stream if t.is_ident]
    assert [t.decoded for t in idents] == ["a", "b"]


def test_json5_numbers():
    stream = lex("[0x1F, .5, 5., +3, Infinity, -Infinity, NaN]", "json5")
    nums = [t.decoded for t in stream if t.kind == TokenKind.NUMBER]
    assert nums[0] == 31.0
    assert nums[1] == 0.5 and nums[2] == 5.0 and nums[3] == 3.0
    assert nums[4] == float("inf") and nums[5] == float("-inf")
    assert nums[6] != nums[6]  # NaN


def test_json5_string_escapes():
    stream = lex(r"'\x41\v\0 \q'", "json5")
    assert stream[0].decoded == "A\v\0 q"


def test_json5_line_continuation():
    stream = lex('"ab\\\ncd"', "json5")
    assert stream[0].decoded == "abcd"


def test_unterminated_string_is_incomplete():
    stream = lex('"abc')
    tok = stream[0]
    assert tok.kind == TokenKind.STRING and tok.incomplete
    assert tok.invalid_at == 4 and tok.decode_end == 4
    assert tok.decoded == "abc"


def test_string_broken_by_control_char():
    stream = lex('"ab\ncd"')
    tok = stream[0]
    assert tok.kind == TokenKind.STRING and not tok.incomplete
    assert tok.invalid_at == 3 and tok.decoded == "ab"


def test_string_broken_by_bad_escape():
    stream = lex(r'"ab\qcd"')
    tok = stream[0]
    assert tok.invalid_at == 4  # the offending escape char
    assert tok.decoded == "ab"


def test_invalid_utf8_in_string():
    stream = lex(b'"ab\xff"')
    tok = stream[0]
    assert tok.kind == TokenKind.STRING and tok.invalid_at == 3
    assert tok.decoded == "ab"


def test_invalid_utf8_outside_string_is_error_run():
    stream = lex(b"\xff\xfe")
    assert kinds(stream) == ["ERROR"]


def _only_whitespace(gap, dialect):
    if dialect == "json":
        return all(b in WS_JSON for b in gap)
    from schemascore._pylex import _ws_len

    i = 0
    while i < len(gap):
        w = _ws_len(gap, i, len(gap), True)
        if not w:
            return False
        i += w
    return True


def _assert_stream_invariants(text, dialect):
    stream = lex(text, dialect)
    src = stream.source
    prev_end = 0
    for tok in stream:
        assert tok.start < tok.end, "spans are non-empty"
        assert tok.start >= prev_end, "spans strictly increase and never overlap"
        gap = src[prev_end : tok.start]
        assert _only_whitespace(gap, dialect), f"non-whitespace gap {gap!r}"
        prev_end = tok.end
    assert prev_end <= len(src)
    assert _only_whitespace(src[prev_end:], dialect)


@given(st.binary(max_size=120))
def test_lexing_total_and_tiled_on_bytes(data):
    _assert_stream_invariants(data, "json")
    _assert_stream_invariants(data, "json5")


@given(st.text(max_size=80))
def test_lexing_total_on_text(text):
    _assert_stream_invariants(text, "json")
    _assert_stream_invariants(text, "json5")


@pytest.mark.skipif(LEX_BACKEND != "compiled", reason="compiled scanner not built")
class TestBackendParity:
    @given(st.binary(max_size=200))
    def test_scan_records_identical(self, data):
        from schemascore import _pylex, _speedups

        for json5 in (False, True):
            assert _speedups.scan(data, json5) == _pylex.scan(data, json5)

    def test_scan_records_identical_on_corpus(self):
        from schemascore import _pylex, _speedups

        cases = [
            b'{"a": 1, "b": [true, null, 1.5e-3], "c": "\\u00e9\\n"}',
            b'{a: .5, b: 0x1F, c: +Infinity, /* x */ d: \'s\'} // t',
            b'"unterminated \\u12',
            b"@@@ tru 01 1e+ -",
            "桁 {\"k\": \"中文\"}  ".encode("utf-8"),
            b"\xff\xc3\x28\xed\xa0\x80",
        ]
        for data in cases:
            for json5 in (False, True):
                assert _speedups.scan(data, json5) == _pylex.scan(data, json5)

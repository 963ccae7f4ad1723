"""JSON / JSON5 parsing over token streams, plus truncation repair.

``parse`` never raises on bad input: it returns either a :class:`JsonTree`
(every node annotated with its token span and document pointer) or a
:class:`ParseFailure` describing the earliest byte offset at which the text
stops being extendable to valid JSON, along with the stack of unclosed
constructs.

``repair`` turns any failure into parseable text by cutting at the failure
point, dropping dangling key/colon/comma fragments and partial trailing
tokens, and appending the missing closers; the count of synthetic tokens it
introduces feeds the scoring denominator in :mod:`schemascore.reward`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import lex
from .tokens import (
    Dialect,
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
    TokenStream,
)

# Parser states.
S_ROOT = 0  # expecting the root value
S_OKEY0 = 1  # inside {, before the first member
S_OKEY = 2  # inside {, after a comma
S_OCOLON = 3  # key seen, expecting :
S_OVALUE = 4  # colon seen, expecting the member value
S_ONEXT = 5  # member complete, expecting , or }
S_AVAL0 = 6  # inside [, before the first element
S_AVAL = 7  # inside [, after a comma
S_ANEXT = 8  # element complete, expecting , or ]
S_DONE = 9  # root value complete, expecting end of input

_VALUE_STATES = (S_ROOT, S_OVALUE, S_AVAL0, S_AVAL)
_KEY_STATES = (S_OKEY0, S_OKEY)


def escape_pointer_segment(segment: str) -> str:
    """JSON pointer escaping: ``~`` -> ``~0``, then ``/`` -> ``~1``."""
    return segment.replace("~", "~0").replace("/", "~1")


def unescape_pointer_segment(segment: str) -> str:
    return segment.replace("~1", "/").replace("~0", "~")


class JsonNode:
    """One value in a parsed document.

    ``first``/``last`` are inclusive token indices into the owning stream;
    child spans nest strictly inside parent spans.  ``path`` is the node's
    JSON pointer.  For numbers ``value`` is int or float and ``raw`` keeps
    the source text so enum/const checks can compare exact decimal values.
    """

    __slots__ = ("kind", "value", "raw", "entries", "items", "first", "last", "path", "_map")

    def __init__(self, kind, first, last=-1, value=None, raw=None, path=""):
        self.kind = kind
        self.value = value
        self.raw = raw
        self.entries = [] if kind == "object" else None
        self.items = [] if kind == "array" else None
        self.first = first
        self.last = last
        self.path = path
        self._map = None

    @property
    def members(self) -> dict:
        """Object members keyed by name; duplicate keys resolve last-wins."""
        if self._map is None:
            self._map = {key: child for key, _idx, child in self.entries}
        return self._map

    def to_python(self):
        k = self.kind
        if k == "object":
            return {key: child.to_python() for key, child in self.members.items()}
        if k == "array":
            return [child.to_python() for child in self.items]
        return self.value

    def __repr__(self):
        return f"<JsonNode {self.kind} path={self.path!r} tokens=[{self.first}..{self.last}]>"


@dataclass
class JsonTree:
    root: JsonNode
    stream: TokenStream
    trivia: list = field(default_factory=list)  # indices of COMMENT tokens
    dialect: Dialect = Dialect.JSON

    def to_python(self):
        return self.root.to_python()

    def node_at(self, pointer: str):
        """Resolve a document pointer (e.g. ``/a/0/b``) to its node."""
        node = self.root
        if pointer in ("", "#"):
            return node
        for seg in pointer.lstrip("#").strip("/").split("/"):
            seg = unescape_pointer_segment(seg)
            if node.kind == "object":
                node = node.members.get(seg)
            elif node.kind == "array":
                try:
                    node = node.items[int(seg)]
                except (ValueError, IndexError):
                    return None
            else:
                return None
            if node is None:
                return None
        return node


@dataclass
class ParseFailure:
    """Where and why parsing stopped.

    ``error_offset`` is the byte offset of the first input position with no
    valid continuation (== source length when the text simply ended too
    soon).  ``open_stack`` lists unclosed constructs outermost-first;
    ``partial_tokens`` are the tokens consumed before the failure.
    """

    error_offset: int
    open_stack: tuple
    partial_tokens: list
    _stream: TokenStream = field(repr=False, default=None)
    _fail_index: int = field(repr=False, default=-1)  # -1 means end of input
    _state: int = field(repr=False, default=S_ROOT)
    _frames: list = field(repr=False, default_factory=list)
    _keep_string: bool = field(repr=False, default=False)
    _root_done: bool = field(repr=False, default=False)
    _dialect: Dialect = field(repr=False, default=Dialect.JSON)


class _Frame:
    __slots__ = ("kind", "node", "opener", "key", "key_idx", "comma_idx")

    def __init__(self, kind, node, opener):
        self.kind = kind
        self.node = node
        self.opener = opener
        self.key = None
        self.key_idx = -1
        self.comma_idx = -1


def parse(text, dialect: Dialect | str = Dialect.JSON):
    """Parse text into a JsonTree, or report the failure point."""
    dialect = Dialect.coerce(dialect)
    return parse_stream(lex(text, dialect), dialect)


def parse_stream(stream: TokenStream, dialect: Dialect | str = Dialect.JSON):
    dialect = Dialect.coerce(dialect)
    json5 = dialect is Dialect.JSON5
    tokens = stream.tokens
    n = stream.source_len
    frames: list[_Frame] = []
    trivia = []
    root = None
    state = S_ROOT

    def failure(idx):
        tok = tokens[idx] if idx >= 0 else None
        keep = False
        broken_string = (
            tok is not None
            and tok.kind == K_STRING
            and tok.invalid_at >= 0
            and state in _VALUE_STATES + _KEY_STATES
        )
        if tok is None:
            offset = n
        elif broken_string or tok.kind == K_ERROR:
            offset = tok.invalid_at
        else:
            offset = tok.start
        if broken_string and state in _VALUE_STATES:
            keep = True
        open_stack = tuple(f.kind for f in frames)
        if broken_string:
            open_stack += ("string",)
        partial = [t for t in tokens if t.start < offset]
        return ParseFailure(
            offset,
            open_stack,
            partial,
            _stream=stream,
            _fail_index=idx,
            _state=state,
            _frames=[(f.kind, f.opener, f.key_idx, f.comma_idx) for f in frames],
            _keep_string=keep,
            _root_done=state == S_DONE,
            _dialect=dialect,
        )

    def child_path():
        if not frames:
            return ""
        top = frames[-1]
        if top.kind == "object":
            return top.node.path + "/" + escape_pointer_segment(top.key)
        return top.node.path + "/" + str(len(top.node.items))

    def complete(node):
        nonlocal root, state
        if not frames:
            root = node
            state = S_DONE
            return
        top = frames[-1]
        if top.kind == "object":
            top.node.entries.append((top.key, top.key_idx, node))
            top.key = None
            top.key_idx = -1
            top.comma_idx = -1
            state = S_ONEXT
        else:
            top.node.items.append(node)
            top.comma_idx = -1
            state = S_ANEXT

    for idx, tok in enumerate(tokens):
        k = tok.kind
        if k == K_COMMENT:
            trivia.append(idx)
            continue
        if state == S_DONE:
            return failure(idx)
        if state in _VALUE_STATES:
            if k == K_LBRACE:
                node = JsonNode("object", idx, path=child_path())
                frames.append(_Frame("object", node, idx))
                state = S_OKEY0
            elif k == K_LBRACKET:
                node = JsonNode("array", idx, path=child_path())
                frames.append(_Frame("array", node, idx))
                state = S_AVAL0
            elif k == K_RBRACKET and state in (S_AVAL0, S_AVAL):
                if state == S_AVAL and not json5:
                    return failure(idx)  # trailing comma
                top = frames.pop()
                top.node.last = idx
                complete(top.node)
            elif k == K_STRING:
                if tok.invalid_at >= 0 or tok.is_ident:
                    return failure(idx)
                complete(JsonNode("string", idx, idx, value=tok.decoded, path=child_path()))
            elif k == K_NUMBER:
                raw = stream.source[tok.start : tok.end].decode("ascii")
                complete(JsonNode("number", idx, idx, value=_number_value(raw, tok), raw=raw, path=child_path()))
            elif k == K_TRUE or k == K_FALSE:
                complete(JsonNode("boolean", idx, idx, value=k == K_TRUE, path=child_path()))
            elif k == K_NULL:
                complete(JsonNode("null", idx, idx, path=child_path()))
            else:
                return failure(idx)
        elif state in _KEY_STATES:
            if k == K_STRING and tok.invalid_at < 0:
                top = frames[-1]
                top.key = tok.decoded
                top.key_idx = idx
                state = S_OCOLON
            elif k == K_RBRACE:
                if state == S_OKEY and not json5:
                    return failure(idx)  # trailing comma
                top = frames.pop()
                top.node.last = idx
                complete(top.node)
            else:
                return failure(idx)
        elif state == S_OCOLON:
            if k == K_COLON:
                state = S_OVALUE
            else:
                return failure(idx)
        elif state == S_ONEXT:
            if k == K_COMMA:
                frames[-1].comma_idx = idx
                state = S_OKEY
            elif k == K_RBRACE:
                top = frames.pop()
                top.node.last = idx
                complete(top.node)
            else:
                return failure(idx)
        elif state == S_ANEXT:
            if k == K_COMMA:
                frames[-1].comma_idx = idx
                state = S_AVAL
            elif k == K_RBRACKET:
                top = frames.pop()
                top.node.last = idx
                complete(top.node)
            else:
                return failure(idx)

    if state == S_DONE:
        return JsonTree(root, stream, trivia, dialect)
    return failure(-1)


def _number_value(raw: str, tok):
    low = raw.lower()
    if low.startswith("0x") or low.startswith("-0x") or low.startswith("+0x"):
        return int(raw, 16)
    if "." not in raw and "e" not in low and "inf" not in low and "nan" not in low:
        return int(raw)
    return tok.decoded


@dataclass
class RepairResult:
    repaired_text: str
    padded_token_count: int
    kept_indices: list  # repaired-stream position -> original token index
    stream: TokenStream
    tree: JsonTree


def repair(text, failure: ParseFailure) -> dict:
    """Minimal closing repair per the documented truncate-drop-close rule."""
    out = repair_failure(failure)
    return {
        "repaired_text": out.repaired_text,
        "padded_token_count": out.padded_token_count,
    }


def repair_failure(failure: ParseFailure) -> RepairResult:
    stream = failure._stream
    src = stream.source
    tokens = stream.tokens
    n = len(src)
    dropped = 0
    closers = []
    string_kept = False
    fi = failure._fail_index
    ftok = tokens[fi] if fi >= 0 else None

    if failure._keep_string:
        cut = ftok.decode_end
        closers.append('"')
        string_kept = True
    else:
        cut = n if ftok is None else ftok.start
        if ftok is not None and ftok.incomplete:
            dropped += 1  # partial trailing token removed
        if failure._frames:
            _kind, _opener, key_idx, comma_idx = failure._frames[-1]
            state = failure._state
            if state in (S_OCOLON, S_OVALUE) and key_idx >= 0:
                cut = min(cut, tokens[key_idx].start)
                dropped += 1  # dangling key (and colon)
                if comma_idx >= 0:
                    cut = min(cut, tokens[comma_idx].start)
                    dropped += 1
            elif state in (S_OKEY, S_AVAL) and comma_idx >= 0:
                cut = min(cut, tokens[comma_idx].start)
                dropped += 1  # dangling comma

    # An unterminated block comment would swallow appended closers.
    while True:
        last = _last_token_ending_at_or_before(tokens, cut)
        if last is not None and tokens[last].kind == K_COMMENT and tokens[last].incomplete:
            cut = tokens[last].start
            continue
        break

    for kind, _opener, _key, _comma in reversed(failure._frames):
        closers.append("}" if kind == "object" else "]")

    if not failure._frames and not failure._root_done and not string_kept:
        return _degenerate_repair(failure._dialect)

    kept = [i for i, t in enumerate(tokens) if t.end <= cut and i != fi]
    if string_kept:
        kept.append(fi)

    sep = ""
    if closers and not string_kept:
        last = _last_token_ending_at_or_before(tokens, cut)
        if last is not None:
            lt = tokens[last]
            if lt.kind == K_COMMENT and src[lt.start : lt.start + 2] == b"//":
                gap = src[lt.end : cut]
                if 0x0A not in gap and 0x0D not in gap:
                    sep = "\n"  # keep the closers out of the line comment

    repaired_text = src[:cut].decode("utf-8", "replace") + sep + "".join(closers)
    padded = dropped + len(closers)

    stream2 = lex(repaired_text, failure._dialect)
    result = parse_stream(stream2, failure._dialect)
    # The '"' closer extends the kept string token instead of adding one.
    expected = len(kept) + len(closers) - (1 if string_kept else 0)
    if isinstance(result, ParseFailure) or len(stream2.tokens) != expected:
        raise RuntimeError(f"repair produced unparseable text: {repaired_text!r}")
    return RepairResult(repaired_text, padded, kept, stream2, result)


def _degenerate_repair(dialect) -> RepairResult:
    stream = lex("null", dialect)
    tree = parse_stream(stream, dialect)
    return RepairResult("null", 1, [], stream, tree)


def _last_token_ending_at_or_before(tokens, cut):
    best = None
    for i, t in enumerate(tokens):
        if t.end <= cut:
            best = i
        elif t.start >= cut:
            break
    return best

"""Schema compilation: ref merging, meta-validation, depth, corpus stats.

The supported keyword set is draft-07 style with ``$defs`` accepted as an
alias of ``definitions`` and ``prefixItems`` from later drafts; unknown
keywords are carried along as inert annotations, since crawled corpora are
heterogeneous.
"""

from __future__ import annotations

import json
import posixpath
import re
from copy import deepcopy
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from urllib.parse import urljoin, urlparse

from .parser import JsonTree, unescape_pointer_segment

SUPPORTED_KEYWORDS = frozenset(
    {
        "type", "properties", "required", "additionalProperties", "items",
        "prefixItems", "enum", "const", "pattern", "format",
        "minLength", "maxLength",
        "minimum", "maximum", "exclusiveMinimum", "exclusiveMaximum",
        "multipleOf", "minItems", "maxItems", "uniqueItems",
        "minProperties", "maxProperties", "patternProperties",
        "oneOf", "anyOf", "allOf", "not", "if", "then", "else",
        "$ref", "$defs", "definitions",
        "description", "title", "default",
    }
)

_TYPE_NAMES = frozenset({"object", "array", "string", "number", "integer", "boolean", "null"})

# Subschema-bearing keywords: maps of schemas, lists of schemas, single schemas.
_MAP_KEYWORDS = ("properties", "patternProperties", "$defs", "definitions")
_LIST_KEYWORDS = ("prefixItems", "oneOf", "anyOf", "allOf")
_SINGLE_KEYWORDS = ("not", "if", "then", "else")


class CompileError(ValueError):
    def __init__(self, reason: str, pointer: str = ""):
        super().__init__(f"{reason} (at {pointer or '#'})" if pointer else reason)
        self.reason = reason
        self.pointer = pointer


@dataclass
class SchemaDoc:
    """A compiled schema: meta-validated, all internal refs resolvable."""

    root: object
    defs: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)  # canonical pointer -> subschema
    dialect_keywords: frozenset = SUPPORTED_KEYWORDS
    source_len: int = 0
    desc_len: int = 0
    depth: int = 1
    cycles: list = field(default_factory=list)  # (pointer, $ref) edges closing a loop

    def resolve_ref(self, ref: str):
        if ref in self.resolved:
            return self.resolved[ref]
        return resolve_pointer(self.root, ref)

    def dumps(self) -> str:
        return json.dumps(self.root, ensure_ascii=False)


class ResolveStatus(Enum):
    MERGED = "merged"
    UNRESOLVABLE = "unresolvable"


@dataclass
class ResolverResult:
    status: ResolveStatus
    merged_schema: object = None
    failed_uris: list = field(default_factory=list)


class MappingResolver:
    """Resolver backed by an in-memory {uri: document} map."""

    def __init__(self, documents: dict):
        self.documents = dict(documents)

    def __call__(self, uri: str):
        return deepcopy(self.documents.get(uri))


class DirectoryResolver:
    """Resolver mapping relative URIs onto files under a root directory.

    Absolute URIs (http, https, ...) are never fetched: they resolve to None
    and the schema referencing them becomes a filtering candidate.
    """

    def __init__(self, root):
        self.root = Path(root)

    def __call__(self, uri: str):
        if urlparse(uri).scheme:
            return None
        norm = posixpath.normpath(uri)
        if norm.startswith("..") or norm.startswith("/"):
            return None
        path = self.root / norm
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


def resolve_pointer(doc, ref: str):
    """Resolve an internal ``#/...`` pointer; None when the target is missing."""
    if not ref.startswith("#"):
        return None
    pointer = ref[1:]
    if pointer in ("", "/"):
        return doc if pointer == "" else None
    if not pointer.startswith("/"):
        return None  # named anchors are out of scope
    node = doc
    for seg in pointer[1:].split("/"):
        seg = unescape_pointer_segment(seg)
        if isinstance(node, dict):
            if seg not in node:
                return None
            node = node[seg]
        elif isinstance(node, list):
            if not seg.isdigit() or int(seg) >= len(node):
                return None
            node = node[int(seg)]
        else:
            return None
    return node


def _as_document(schema_json):
    if isinstance(schema_json, JsonTree):
        return schema_json.to_python(), schema_json.stream.source_len
    if isinstance(schema_json, (dict, bool)):
        return schema_json, None
    raise CompileError(f"schema document must be an object or boolean, got {type(schema_json).__name__}")


def compile_schema(schema_json, resolver=None, source_len=None) -> SchemaDoc:
    """Compile a raw schema document into a validated SchemaDoc.

    External refs are merged through ``resolver`` first when one is given;
    otherwise their presence is a CompileError.  Raises CompileError for
    meta-invalid keyword values, invalid regexes, and unresolvable refs.
    """
    doc, inferred_len = _as_document(schema_json)
    if source_len is None:
        source_len = inferred_len if inferred_len is not None else len(json.dumps(doc, ensure_ascii=False))
    externals = _external_refs(doc)
    if externals:
        if resolver is None:
            raise CompileError(f"external refs present and no resolver given: {sorted(externals)[:3]}")
        merged = merge_external_refs(doc, resolver)
        if merged.status is ResolveStatus.UNRESOLVABLE:
            raise CompileError(f"unresolvable external refs: {merged.failed_uris[:3]}")
        doc = merged.merged_schema
    _meta_validate(doc, "#")
    resolved, cycles = _index(doc)
    defs = {}
    if isinstance(doc, dict):
        for container in ("$defs", "definitions"):
            for name, sub in (doc.get(container) or {}).items():
                defs.setdefault(name, sub)
    return SchemaDoc(
        root=doc,
        defs=defs,
        resolved=resolved,
        dialect_keywords=SUPPORTED_KEYWORDS,
        source_len=source_len,
        desc_len=_desc_len(doc),
        depth=schema_depth(doc),
        cycles=cycles,
    )


def _external_refs(node, out=None):
    if out is None:
        out = set()
    if isinstance(node, dict):
        ref = node.get("$ref")
        if isinstance(ref, str) and not ref.startswith("#"):
            out.add(ref)
        for v in node.values():
            _external_refs(v, out)
    elif isinstance(node, list):
        for v in node:
            _external_refs(v, out)
    return out


def merge_external_refs(schema_json, resolver) -> ResolverResult:
    """Inline every externally referenced fragment under a fresh $defs entry.

    Refs inside fetched documents are interpreted relative to their source
    document and inlined recursively, so the merged schema is closed under
    dereferencing.  Idempotent: a merged schema merges to itself.
    """
    doc, _ = _as_document(schema_json)
    doc = deepcopy(doc)
    if not isinstance(doc, dict):
        return ResolverResult(ResolveStatus.MERGED, doc, [])
    failed: list[str] = []
    inlined: dict = {}  # (uri, fragment) -> defs name

    def defs_name(uri, frag):
        stem = posixpath.basename(urlparse(uri).path or uri)
        stem = stem.rsplit(".", 1)[0] if "." in stem else stem
        parts = [stem] + [s for s in frag.strip("/").split("/") if s]
        base = re.sub(r"[^A-Za-z0-9_]+", "_", "_".join(parts)).strip("_") or "external"
        name = base
        k = 2
        taken = set(doc.get("$defs") or {}) | set(inlined.values())
        while name in taken:
            name = f"{base}_{k}"
            k += 1
        return name

    def inline(uri, frag):
        full = uri + ("#" + frag if frag else "")
        key = (uri, frag)
        if key in inlined:
            return "#/$defs/" + inlined[key]
        try:
            fetched = resolver(uri)
        except Exception as exc:  # resolver faults count as unreachable
            failed.append(f"{full} ({exc})")
            return None
        if fetched is None:
            failed.append(full)
            return None
        target = resolve_pointer(fetched, "#" + frag) if frag else fetched
        if target is None:
            failed.append(full)
            return None
        name = defs_name(uri, frag)
        inlined[key] = name
        copy = deepcopy(target)
        doc.setdefault("$defs", {})[name] = copy
        walk(copy, uri)
        return "#/$defs/" + name

    def walk(node, base):
        if isinstance(node, dict):
            ref = node.get("$ref")
            if isinstance(ref, str):
                if ref.startswith("#"):
                    if base:  # internal ref of a fetched document
                        new = inline(base, ref[1:])
                        if new:
                            node["$ref"] = new
                else:
                    uri, _, frag = ref.partition("#")
                    target_uri = urljoin(base, uri) if base else uri
                    new = inline(target_uri, frag)
                    if new:
                        node["$ref"] = new
            for v in list(node.values()):
                walk(v, base)
        elif isinstance(node, list):
            for v in node:
                walk(v, base)

    walk(doc, "")
    if failed:
        return ResolverResult(ResolveStatus.UNRESOLVABLE, None, sorted(set(failed)))
    return ResolverResult(ResolveStatus.MERGED, doc, [])


def _schema_positions(node, pointer):
    """Yield (pointer, subschema) for every schema position in the document."""
    yield pointer, node
    if not isinstance(node, dict):
        return
    for key in _MAP_KEYWORDS:
        sub = node.get(key)
        if isinstance(sub, dict):
            for name, child in sub.items():
                yield from _schema_positions(child, f"{pointer}/{key}/{_esc(name)}")
    for key in _LIST_KEYWORDS:
        sub = node.get(key)
        if isinstance(sub, list):
            for i, child in enumerate(sub):
                yield from _schema_positions(child, f"{pointer}/{key}/{i}")
    for key in _SINGLE_KEYWORDS:
        if key in node:
            yield from _schema_positions(node[key], f"{pointer}/{key}")
    items = node.get("items")
    if isinstance(items, list):
        for i, child in enumerate(items):
            yield from _schema_positions(child, f"{pointer}/items/{i}")
    elif "items" in node:
        yield from _schema_positions(items, f"{pointer}/items")
    ap = node.get("additionalProperties")
    if isinstance(ap, dict):
        yield from _schema_positions(ap, f"{pointer}/additionalProperties")


def _esc(segment):
    return segment.replace("~", "~0").replace("/", "~1")


def _index(doc):
    resolved = {}
    refs = []
    for pointer, sub in _schema_positions(doc, "#"):
        resolved[pointer] = sub
        if isinstance(sub, dict) and isinstance(sub.get("$ref"), str):
            refs.append((pointer, sub["$ref"]))
    cycles = []
    for pointer, ref in refs:
        target = resolve_pointer(doc, ref)
        if target is None:
            raise CompileError(f"unresolvable internal ref {ref!r}", pointer)
        resolved.setdefault(ref, target)
        if _ref_cycles_back(pointer, ref, refs):
            cycles.append((pointer, ref))
    return resolved, cycles


def _within(pointer, subtree):
    return pointer == subtree or pointer.startswith(subtree + "/")


def _ref_cycles_back(origin, ref, refs):
    """True when expanding ``ref`` can reach back to the ref node itself."""
    seen = set()
    stack = [ref]
    while stack:
        target = stack.pop()
        if target in seen:
            continue
        seen.add(target)
        if _within(origin, target):
            return True
        for pointer, nested in refs:
            if _within(pointer, target):
                stack.append(nested)
    return False


def _require(cond, reason, pointer):
    if not cond:
        raise CompileError(reason, pointer)


def _is_count(v):
    return not isinstance(v, bool) and (isinstance(v, int) or (isinstance(v, float) and v.is_integer())) and v >= 0


def _is_number(v):
    return not isinstance(v, bool) and isinstance(v, (int, float))


def _meta_validate(node, pointer):
    if isinstance(node, bool):
        return
    _require(isinstance(node, dict), "schema must be an object or boolean", pointer)
    t = node.get("type")
    if t is not None:
        if isinstance(t, str):
            _require(t in _TYPE_NAMES, f"unknown type name {t!r}", pointer)
        elif isinstance(t, list):
            _require(
                all(isinstance(x, str) and x in _TYPE_NAMES for x in t),
                "type list must contain type names",
                pointer,
            )
        else:
            _require(False, f"'type' must be a string or list of strings, got {t!r}", pointer)
    if "enum" in node:
        _require(isinstance(node["enum"], list), "'enum' must be an array", pointer)
    if "pattern" in node:
        _require(isinstance(node["pattern"], str), "'pattern' must be a string", pointer)
        _compile_regex(node["pattern"], pointer)
    if "required" in node:
        req = node["required"]
        _require(
            isinstance(req, list) and all(isinstance(x, str) for x in req),
            "'required' must be an array of strings",
            pointer,
        )
    for kw in ("minLength", "maxLength", "minItems", "maxItems", "minProperties", "maxProperties"):
        if kw in node:
            _require(_is_count(node[kw]), f"{kw!r} must be a non-negative integer", pointer)
    for kw in ("minimum", "maximum"):
        if kw in node:
            _require(_is_number(node[kw]), f"{kw!r} must be a number", pointer)
    for kw in ("exclusiveMinimum", "exclusiveMaximum"):
        if kw in node:
            _require(
                isinstance(node[kw], bool) or _is_number(node[kw]),
                f"{kw!r} must be a number (or draft-4 boolean)",
                pointer,
            )
    if "multipleOf" in node:
        _require(
            _is_number(node["multipleOf"]) and node["multipleOf"] > 0,
            "'multipleOf' must be a positive number",
            pointer,
        )
    if "uniqueItems" in node:
        _require(isinstance(node["uniqueItems"], bool), "'uniqueItems' must be a boolean", pointer)
    if "$ref" in node:
        _require(isinstance(node["$ref"], str), "'$ref' must be a string", pointer)
    for kw in ("description", "title", "format"):
        if kw in node:
            _require(isinstance(node[kw], str), f"{kw!r} must be a string", pointer)
    for kw in _MAP_KEYWORDS:
        if kw in node:
            sub = node[kw]
            _require(isinstance(sub, dict), f"{kw!r} must be an object of schemas", pointer)
            for name, child in sub.items():
                if kw == "patternProperties":
                    _compile_regex(name, pointer)
                _meta_validate(child, f"{pointer}/{kw}/{_esc(name)}")
    for kw in _LIST_KEYWORDS:
        if kw in node:
            sub = node[kw]
            _require(isinstance(sub, list) and sub, f"{kw!r} must be a non-empty array of schemas", pointer)
            for i, child in enumerate(sub):
                _meta_validate(child, f"{pointer}/{kw}/{i}")
    for kw in _SINGLE_KEYWORDS:
        if kw in node:
            _meta_validate(node[kw], f"{pointer}/{kw}")
    if "items" in node:
        items = node["items"]
        if isinstance(items, list):
            _require(bool(items), "'items' array form must be non-empty", pointer)
            for i, child in enumerate(items):
                _meta_validate(child, f"{pointer}/items/{i}")
        else:
            _meta_validate(items, f"{pointer}/items")
    if "additionalProperties" in node:
        ap = node["additionalProperties"]
        if not isinstance(ap, bool):
            _meta_validate(ap, f"{pointer}/additionalProperties")


def _compile_regex(pattern, pointer):
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise CompileError(f"invalid regex {pattern!r}: {exc}", pointer)


def schema_depth(node) -> int:
    """Maximum definition-nesting depth.

    The root counts 1 and each subschema reached through properties,
    patternProperties, items, prefixItems, $defs/definitions, oneOf, anyOf,
    allOf, not, if, then, else adds a level.  $ref edges are not followed,
    so cyclic schemas contribute their acyclic definition depth.
    """
    if not isinstance(node, dict):
        return 1
    best = 1
    for key in _MAP_KEYWORDS:
        sub = node.get(key)
        if isinstance(sub, dict):
            for child in sub.values():
                d = 1 + schema_depth(child)
                if d > best:
                    best = d
    for key in _LIST_KEYWORDS:
        sub = node.get(key)
        if isinstance(sub, list):
            for child in sub:
                d = 1 + schema_depth(child)
                if d > best:
                    best = d
    for key in _SINGLE_KEYWORDS:
        if key in node:
            d = 1 + schema_depth(node[key])
            if d > best:
                best = d
    if "items" in node:
        items = node["items"]
        children = items if isinstance(items, list) else [items]
        for child in children:
            d = 1 + schema_depth(child)
            if d > best:
                best = d
    return best


def _desc_len(node) -> int:
    total = 0
    if isinstance(node, dict):
        desc = node.get("description")
        if isinstance(desc, str):
            total += len(desc)
        for v in node.values():
            total += _desc_len(v)
    elif isinstance(node, list):
        for v in node:
            total += _desc_len(v)
    return total


@dataclass
class CorpusStats:
    count: int
    mean_source_len: float
    mean_desc_len: float
    mean_depth: float
    under_2k: int
    under_4k: int
    under_10k: int

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_source_len": self.mean_source_len,
            "mean_desc_len": self.mean_desc_len,
            "mean_depth": self.mean_depth,
            "under_2k": self.under_2k,
            "under_4k": self.under_4k,
            "under_10k": self.under_10k,
        }


def corpus_stats(schemas: list) -> CorpusStats:
    """Means and cumulative <2K/<4K/<10K length buckets over SchemaDocs."""
    if not schemas:
        raise ValueError("corpus_stats requires a non-empty list of schemas")
    n = len(schemas)
    lens = [s.source_len for s in schemas]
    return CorpusStats(
        count=n,
        mean_source_len=sum(lens) / n,
        mean_desc_len=sum(s.desc_len for s in schemas) / n,
        mean_depth=sum(s.depth for s in schemas) / n,
        under_2k=sum(1 for x in lens if x < 2000),
        under_4k=sum(1 for x in lens if x < 4000),
        under_10k=sum(1 for x in lens if x < 10000),
    )

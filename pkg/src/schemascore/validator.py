"""Instance validation against compiled schemas.

Violations are path-addressed and categorized into the failure taxonomy
used for error statistics (parser / validation / pattern / type / enum /
required buckets, with finer categories preserved on each violation).
Custom format rules (phone, file paths, passwords, RGB, base64, const)
live in ``data/custom_rules.json`` so the validator and the task generator
share one pattern table.
"""

from __future__ import annotations

import enum
import json
import re
import sys
from copy import deepcopy
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, localcontext
from importlib import resources

from .parser import JsonNode, JsonTree, ParseFailure
from .schema import CompileError, SchemaDoc, compile_schema, resolve_pointer


class FailureCategory(enum.Enum):
    PARSER_ERROR = "parser_error"
    VALIDATION_ERROR = "validation_error"
    PATTERN_ERROR = "pattern_error"
    TYPE_ERROR = "type_error"
    ENUM_ERROR = "enum_error"
    REQUIRED_ERROR = "required_error"
    FORMAT_ERROR = "format_error"
    LENGTH_BOUND_ERROR = "length_bound_error"
    COMPOSITION_ERROR = "composition_error"
    OTHER = "other"


_CATEGORY_BY_KEYWORD = {
    "type": FailureCategory.TYPE_ERROR,
    "enum": FailureCategory.ENUM_ERROR,
    "const": FailureCategory.ENUM_ERROR,
    "pattern": FailureCategory.PATTERN_ERROR,
    "required": FailureCategory.REQUIRED_ERROR,
    "format": FailureCategory.FORMAT_ERROR,
    "minLength": FailureCategory.LENGTH_BOUND_ERROR,
    "maxLength": FailureCategory.LENGTH_BOUND_ERROR,
    "minItems": FailureCategory.LENGTH_BOUND_ERROR,
    "maxItems": FailureCategory.LENGTH_BOUND_ERROR,
    "minProperties": FailureCategory.LENGTH_BOUND_ERROR,
    "maxProperties": FailureCategory.LENGTH_BOUND_ERROR,
    "oneOf": FailureCategory.COMPOSITION_ERROR,
    "anyOf": FailureCategory.COMPOSITION_ERROR,
    "not": FailureCategory.COMPOSITION_ERROR,
    "false": FailureCategory.COMPOSITION_ERROR,
}

_SPECIFIC = (
    FailureCategory.PATTERN_ERROR,
    FailureCategory.TYPE_ERROR,
    FailureCategory.ENUM_ERROR,
    FailureCategory.REQUIRED_ERROR,
)


@dataclass
class Violation:
    instance_path: str
    schema_path: str
    keyword: str
    category: FailureCategory
    detail: str
    node: JsonNode = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {
            "instance_path": self.instance_path,
            "schema_path": self.schema_path,
            "keyword": self.keyword,
            "category": self.category.value,
            "detail": self.detail,
        }


def _category(keyword: str) -> FailureCategory:
    return _CATEGORY_BY_KEYWORD.get(keyword, FailureCategory.VALIDATION_ERROR)


# Instances nested deeper than this are rejected wholesale rather than
# risking the interpreter stack; recursion headroom is raised up to the cap.
MAX_INSTANCE_DEPTH = 2500


def _instance_depth(node) -> int:
    best = 1
    stack = [(node, 1)]
    while stack:
        current, depth = stack.pop()
        if depth > best:
            best = depth
        if current.kind == "array":
            stack.extend((child, depth + 1) for child in current.items)
        elif current.kind == "object":
            stack.extend((child, depth + 1) for _k, _i, child in current.entries)
    return best


def validate(tree, schema: SchemaDoc, formats: dict | None = None) -> list:
    """All violations of ``tree`` against ``schema`` (empty list == valid).

    Sibling keywords never short-circuit each other.  ``formats`` may map
    format names to ``str -> bool`` checkers; without a checker the format
    keyword stays annotation-only.
    """
    node = tree.root if isinstance(tree, JsonTree) else tree
    depth = _instance_depth(node)
    if depth > MAX_INSTANCE_DEPTH:
        return [
            Violation(node.path, "#", "maxDepth", FailureCategory.OTHER,
                      f"instance nesting {depth} exceeds the {MAX_INSTANCE_DEPTH} validation limit", node)
        ]
    needed = 8 * (depth + schema.depth) + 500
    if needed > sys.getrecursionlimit():
        sys.setrecursionlimit(needed)
    out: list[Violation] = []
    _walk(node, schema.root, "#", schema, out, formats or {}, set())
    return out


def _walk(node, sub, spath, doc, out, formats, active):
    if isinstance(sub, bool):
        if not sub:
            out.append(
                Violation(node.path, spath, "false", _category("false"), "schema 'false' admits nothing", node)
            )
        return
    if not isinstance(sub, dict):
        return

    ref = sub.get("$ref")
    if isinstance(ref, str):
        key = (id(node), ref)
        if key not in active:
            active.add(key)
            target = doc.resolve_ref(ref)
            _walk(node, target, ref, doc, out, formats, active)
            active.discard(key)

    t = sub.get("type")
    if t is not None:
        allowed = [t] if isinstance(t, str) else list(t)
        if not any(_matches_type(node, name) for name in allowed):
            out.append(
                Violation(
                    node.path, f"{spath}/type", "type", _category("type"),
                    f"expected {' or '.join(allowed)}, got {node.kind}", node,
                )
            )

    if "enum" in sub and not any(_json_equal(node, option) for option in sub["enum"]):
        out.append(
            Violation(node.path, f"{spath}/enum", "enum", _category("enum"),
                      "value not among enum options", node)
        )
    if "const" in sub and not _json_equal(node, sub["const"]):
        out.append(
            Violation(node.path, f"{spath}/const", "const", _category("const"),
                      f"value must equal {json.dumps(sub['const'], ensure_ascii=False)}", node)
        )

    if node.kind == "string":
        _check_string(node, sub, spath, out, formats)
    elif node.kind == "number":
        _check_number(node, sub, spath, out)
    elif node.kind == "object":
        _check_object(node, sub, spath, doc, out, formats, active)
    elif node.kind == "array":
        _check_array(node, sub, spath, doc, out, formats, active)

    _check_combinators(node, sub, spath, doc, out, formats, active)


def _matches_type(node, name):
    if name == "integer":
        return node.kind == "number" and _is_integral(node)
    if name == "boolean":
        return node.kind == "boolean"
    return node.kind == name


def _is_integral(node):
    v = node.value
    if isinstance(v, bool):
        return False
    if isinstance(v, int):
        return True
    return isinstance(v, float) and v == v and v not in (float("inf"), float("-inf")) and v.is_integer()


def _node_decimal(node):
    raw = node.raw
    if raw is not None:
        low = raw.lower()
        if "0x" in low:
            return Decimal(int(raw, 16))
        if "infinity" in low:
            return Decimal("-Infinity") if low.startswith("-") else Decimal("Infinity")
        if "nan" in low:
            return Decimal("NaN")
        return Decimal(raw)
    v = node.value
    return Decimal(v) if isinstance(v, int) else Decimal(repr(v))


def _plain_decimal(value):
    if isinstance(value, int):
        return Decimal(value)
    return Decimal(repr(value))


def _num_equal(node, value):
    try:
        a = _node_decimal(node)
        b = _plain_decimal(value)
    except (InvalidOperation, ValueError):
        return False
    if a.is_nan() or b.is_nan():
        return False
    return a == b


def _json_equal(node, value):
    k = node.kind
    if k == "null":
        return value is None
    if k == "boolean":
        return isinstance(value, bool) and node.value == value
    if k == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        return _num_equal(node, value)
    if k == "string":
        return isinstance(value, str) and node.value == value
    if k == "array":
        if not isinstance(value, list) or len(value) != len(node.items):
            return False
        return all(_json_equal(child, v) for child, v in zip(node.items, value))
    if k == "object":
        if not isinstance(value, dict):
            return False
        members = node.members
        if set(members) != set(value):
            return False
        return all(_json_equal(members[key], value[key]) for key in members)
    return False


def _check_string(node, sub, spath, out, formats):
    text = node.value
    pattern = sub.get("pattern")
    if pattern is not None and re.search(pattern, text) is None:
        out.append(
            Violation(node.path, f"{spath}/pattern", "pattern", _category("pattern"),
                      f"string does not match {pattern!r}", node)
        )
    if "minLength" in sub and len(text) < sub["minLength"]:
        out.append(
            Violation(node.path, f"{spath}/minLength", "minLength", _category("minLength"),
                      f"length {len(text)} < minLength {sub['minLength']}", node)
        )
    if "maxLength" in sub and len(text) > sub["maxLength"]:
        out.append(
            Violation(node.path, f"{spath}/maxLength", "maxLength", _category("maxLength"),
                      f"length {len(text)} > maxLength {sub['maxLength']}", node)
        )
    fmt = sub.get("format")
    if fmt is not None and fmt in formats and not formats[fmt](text):
        out.append(
            Violation(node.path, f"{spath}/format", "format", _category("format"),
                      f"string fails format {fmt!r}", node)
        )


def _check_number(node, sub, spath, out):
    v = node.value

    minimum = sub.get("minimum")
    ex_min = sub.get("exclusiveMinimum")
    if minimum is not None:
        strict = ex_min is True  # draft-4 boolean form
        ok = v > minimum if strict else v >= minimum
        if not ok:
            out.append(
                Violation(node.path, f"{spath}/minimum", "minimum", _category("minimum"),
                          f"{v} violates minimum {minimum}", node)
            )
    if ex_min is not None and not isinstance(ex_min, bool) and not v > ex_min:
        out.append(
            Violation(node.path, f"{spath}/exclusiveMinimum", "exclusiveMinimum",
                      _category("exclusiveMinimum"), f"{v} violates exclusiveMinimum {ex_min}", node)
        )
    maximum = sub.get("maximum")
    ex_max = sub.get("exclusiveMaximum")
    if maximum is not None:
        strict = ex_max is True
        ok = v < maximum if strict else v <= maximum
        if not ok:
            out.append(
                Violation(node.path, f"{spath}/maximum", "maximum", _category("maximum"),
                          f"{v} violates maximum {maximum}", node)
            )
    if ex_max is not None and not isinstance(ex_max, bool) and not v < ex_max:
        out.append(
            Violation(node.path, f"{spath}/exclusiveMaximum", "exclusiveMaximum",
                      _category("exclusiveMaximum"), f"{v} violates exclusiveMaximum {ex_max}", node)
        )
    m = sub.get("multipleOf")
    if m is not None and not _is_multiple(node, m):
        out.append(
            Violation(node.path, f"{spath}/multipleOf", "multipleOf", _category("multipleOf"),
                      f"{v} is not a multiple of {m}", node)
        )


def _is_multiple(node, m):
    v = node.value
    if isinstance(v, int) and isinstance(m, int):
        return v % m == 0
    try:
        with localcontext() as ctx:
            ctx.prec = 60
            q = _node_decimal(node) / _plain_decimal(m)
            return q == q.to_integral_value()
    except (InvalidOperation, OverflowError, ZeroDivisionError):
        return False


def _check_object(node, sub, spath, doc, out, formats, active):
    members = node.members
    for name in sub.get("required", ()):  # addressed at the object itself
        if name not in members:
            out.append(
                Violation(node.path, f"{spath}/required", "required", _category("required"),
                          f"missing required property {name!r}", node)
            )
    if "minProperties" in sub and len(members) < sub["minProperties"]:
        out.append(
            Violation(node.path, f"{spath}/minProperties", "minProperties", _category("minProperties"),
                      f"{len(members)} properties < minProperties {sub['minProperties']}", node)
        )
    if "maxProperties" in sub and len(members) > sub["maxProperties"]:
        out.append(
            Violation(node.path, f"{spath}/maxProperties", "maxProperties", _category("maxProperties"),
                      f"{len(members)} properties > maxProperties {sub['maxProperties']}", node)
        )
    props = sub.get("properties") or {}
    patterns = sub.get("patternProperties") or {}
    additional = sub.get("additionalProperties")
    for key, _idx, child in node.entries:
        claimed = False
        if key in props:
            claimed = True
            _walk(child, props[key], f"{spath}/properties/{_esc(key)}", doc, out, formats, active)
        for pat, psub in patterns.items():
            if re.search(pat, key):
                claimed = True
                _walk(child, psub, f"{spath}/patternProperties/{_esc(pat)}", doc, out, formats, active)
        if not claimed and additional is not None:
            if additional is False:
                out.append(
                    Violation(child.path, f"{spath}/additionalProperties", "additionalProperties",
                              _category("additionalProperties"),
                              f"property {key!r} is not allowed here", child)
                )
            elif additional is not True:
                _walk(child, additional, f"{spath}/additionalProperties", doc, out, formats, active)


def _check_array(node, sub, spath, doc, out, formats, active):
    items = node.items
    if "minItems" in sub and len(items) < sub["minItems"]:
        out.append(
            Violation(node.path, f"{spath}/minItems", "minItems", _category("minItems"),
                      f"{len(items)} items < minItems {sub['minItems']}", node)
        )
    if "maxItems" in sub and len(items) > sub["maxItems"]:
        out.append(
            Violation(node.path, f"{spath}/maxItems", "maxItems", _category("maxItems"),
                      f"{len(items)} items > maxItems {sub['maxItems']}", node)
        )
    if sub.get("uniqueItems"):
        seen = {}
        for i, child in enumerate(items):
            key = _freeze(child)
            if key in seen:
                out.append(
                    Violation(child.path, f"{spath}/uniqueItems", "uniqueItems", _category("uniqueItems"),
                              f"item {i} duplicates item {seen[key]}", child)
                )
            else:
                seen[key] = i
    prefix = sub.get("prefixItems")
    rest = sub.get("items")
    if prefix is None and isinstance(rest, list):  # draft-7 array form of items
        prefix, rest = rest, None
    if prefix:
        for i, child in enumerate(items[: len(prefix)]):
            _walk(child, prefix[i], f"{spath}/prefixItems/{i}", doc, out, formats, active)
    if rest is not None and not isinstance(rest, list):
        start = len(prefix) if prefix else 0
        for child in items[start:]:
            _walk(child, rest, f"{spath}/items", doc, out, formats, active)


def _check_combinators(node, sub, spath, doc, out, formats, active):
    all_of = sub.get("allOf")
    if all_of:
        for i, branch in enumerate(all_of):  # conjunction: propagate directly
            _walk(node, branch, f"{spath}/allOf/{i}", doc, out, formats, active)
    any_of = sub.get("anyOf")
    if any_of is not None:
        if not any(_branch_ok(node, branch, doc, formats, active) for branch in any_of):
            out.append(
                Violation(node.path, f"{spath}/anyOf", "anyOf", _category("anyOf"),
                          "value matches no anyOf branch", node)
            )
    one_of = sub.get("oneOf")
    if one_of is not None:
        matches = sum(1 for branch in one_of if _branch_ok(node, branch, doc, formats, active))
        if matches != 1:
            out.append(
                Violation(node.path, f"{spath}/oneOf", "oneOf", _category("oneOf"),
                          f"value matches {matches} oneOf branches, need exactly 1", node)
            )
    if "not" in sub and _branch_ok(node, sub["not"], doc, formats, active):
        out.append(
            Violation(node.path, f"{spath}/not", "not", _category("not"),
                      "value matches the forbidden 'not' schema", node)
        )
    if "if" in sub:
        branch = "then" if _branch_ok(node, sub["if"], doc, formats, active) else "else"
        if branch in sub:
            _walk(node, sub[branch], f"{spath}/{branch}", doc, out, formats, active)


def _branch_ok(node, branch, doc, formats, active):
    scratch: list[Violation] = []
    _walk(node, branch, "#", doc, scratch, formats, active)
    return not scratch


def _freeze(node):
    k = node.kind
    if k == "number":
        try:
            d = _node_decimal(node)
            tag = "nan" if d.is_nan() else str(d.normalize())
        except (InvalidOperation, ValueError):
            tag = repr(node.value)
        return ("number", tag)
    if k == "array":
        return ("array", tuple(_freeze(c) for c in node.items))
    if k == "object":
        return ("object", frozenset((key, _freeze(c)) for key, c in node.members.items()))
    return (k, node.value)


def _esc(segment):
    return segment.replace("~", "~0").replace("/", "~1")


def classify(outcome) -> FailureCategory:
    """Single-label classification of a failed generation.

    Parse failures are PARSER_ERROR.  For a non-empty report the first
    violation in document order decides; pattern/type/enum/required keep
    their specific label, everything else collapses to VALIDATION_ERROR.
    """
    if isinstance(outcome, ParseFailure):
        return FailureCategory.PARSER_ERROR
    report = list(outcome)
    if not report:
        raise ValueError("cannot classify an empty (passing) validation report")
    first = min(report, key=_document_order)
    if first.category in _SPECIFIC:
        return first.category
    return FailureCategory.VALIDATION_ERROR


def _document_order(v: Violation):
    anchor = v.node.first if v.node is not None else 1 << 30
    return (anchor, v.keyword, v.schema_path, v.instance_path)


# ---------------------------------------------------------------------------
# Custom format rules


class RuleKind(enum.Enum):
    PHONE = "Phone"
    LINUX_PATH = "LinuxPath"
    WINDOWS_PATH = "WindowsPath"
    STRONG_PASSWORD = "StrongPassword"
    RGB_COLOR = "RgbColor"
    BASE64 = "Base64"
    CONST_LITERAL = "ConstLiteral"
    REGEX_PATTERN = "RegexPattern"


def _load_rule_table() -> dict:
    with resources.files("schemascore.data").joinpath("custom_rules.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


RULE_TABLE = _load_rule_table()

# Kinds with a fixed pattern (everything except const/regex parametrized ones).
FIXED_RULE_KINDS = tuple(k for k in RuleKind if "pattern" in RULE_TABLE[k.value])


@dataclass(frozen=True)
class CustomRule:
    """One field rule: a kind plus kind-specific parameters.

    ConstLiteral takes ``literal``; RegexPattern takes ``pattern`` and
    optionally ``example``.  The fixed kinds take no parameters.
    """

    kind: RuleKind
    params: tuple = ()

    @classmethod
    def of(cls, kind, **params) -> "CustomRule":
        if isinstance(kind, str):
            kind = RuleKind(kind)
        if kind is RuleKind.CONST_LITERAL and "literal" not in params:
            raise ValueError("ConstLiteral requires a 'literal' parameter")
        if kind is RuleKind.REGEX_PATTERN and "pattern" not in params:
            raise ValueError("RegexPattern requires a 'pattern' parameter")
        return cls(kind, tuple(sorted(params.items())))

    @property
    def parameters(self) -> dict:
        return dict(self.params)

    def pattern(self) -> str | None:
        if self.kind is RuleKind.CONST_LITERAL:
            return None
        if self.kind is RuleKind.REGEX_PATTERN:
            return self.parameters["pattern"]
        return RULE_TABLE[self.kind.value]["pattern"]

    def instruction(self) -> str:
        template = RULE_TABLE[self.kind.value]["instruction"]
        if self.kind is RuleKind.CONST_LITERAL:
            return template.format(literal=self.parameters["literal"])
        if self.kind is RuleKind.REGEX_PATTERN:
            return template.format(pattern=self.parameters["pattern"])
        return template

    def example(self) -> str:
        if self.kind is RuleKind.CONST_LITERAL:
            return self.parameters["literal"]
        if self.kind is RuleKind.REGEX_PATTERN:
            ex = self.parameters.get("example")
            if ex is None:
                raise ValueError("RegexPattern rule has no example value")
            return ex
        return RULE_TABLE[self.kind.value]["example"]


def check_custom(value: str, rule: CustomRule) -> bool:
    """Deterministic rule check for one string value."""
    if rule.kind is RuleKind.CONST_LITERAL:
        return value == rule.parameters["literal"]
    return re.search(rule.pattern(), value) is not None


def inject_rule(schema: SchemaDoc, field_path: str, rule: CustomRule, include_constraint: bool = True) -> SchemaDoc:
    """Return a new SchemaDoc whose addressed string subschema enforces ``rule``.

    The rule's natural-language instruction is appended to the subschema's
    description.  With ``include_constraint=False`` only the instruction is
    added (the prompt-facing variant); otherwise the machine-checkable
    ``pattern``/``const`` is inserted as well.
    """
    doc = deepcopy(schema.root)
    pointer = field_path if field_path.startswith("#") else "#" + field_path
    target = resolve_pointer(doc, pointer)
    if not isinstance(target, dict):
        raise ValueError(f"field path {field_path!r} does not address a subschema")
    if target.get("type") != "string":
        raise ValueError(f"field path {field_path!r} is not a string-typed subschema")
    if include_constraint:
        if rule.kind is RuleKind.CONST_LITERAL:
            target["const"] = rule.parameters["literal"]
        else:
            target["pattern"] = rule.pattern()
    instruction = rule.instruction()
    existing = target.get("description")
    target["description"] = f"{existing} {instruction}" if existing else instruction
    try:
        return compile_schema(doc, source_len=None)
    except CompileError as exc:  # rule patterns are pre-vetted; re-raise with context
        raise ValueError(f"injected rule produced an uncompilable schema: {exc}")

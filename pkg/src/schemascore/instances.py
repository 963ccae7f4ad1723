"""Deterministic construction of schema-satisfying instances.

Used by the task generator for solvability self-tests: walk a compiled
schema choosing minimal satisfying values, then verify the result
end-to-end through the real parser and validator.  Pattern keywords are
satisfied from the shared custom-rule table when the pattern is one of
ours, otherwise from a small regex sampler that builds a minimal matching
string (literals, classes, ranges, repeats, branches; no lookarounds or
backrefs).
"""

from __future__ import annotations

import math
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext

try:  # the regex parser moved in 3.11
    from re import _parser as sre_parse
except ImportError:  # pragma: no cover
    import sre_parse

from .escapes import encode_string
from .parser import ParseFailure, parse
from .schema import SchemaDoc, compile_schema
from .validator import RULE_TABLE, validate


class UnsatisfiableError(ValueError):
    """No instance could be constructed for the schema."""


_PATTERN_EXAMPLES = {
    entry["pattern"]: entry["example"] for entry in RULE_TABLE.values() if "pattern" in entry
}


def satisfying_instance(schema):
    """A Python value that validates against ``schema``, or raise.

    The construction is verified through the real pipeline (render, parse,
    validate) before being returned, so a successful return is a guarantee.
    """
    doc = schema if isinstance(schema, SchemaDoc) else compile_schema(schema)
    value = _satisfy(doc.root, doc, 0)
    text = render_json(value)
    tree = parse(text)
    if isinstance(tree, ParseFailure):
        raise UnsatisfiableError(f"generated instance does not parse: {text!r}")
    problems = validate(tree, doc)
    if problems:
        raise UnsatisfiableError(f"generated instance fails validation: {problems[0].detail}")
    return value


def render_json(value) -> str:
    """Serialize a value as strict JSON, escaping strings ourselves."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return encode_string(value)
    if isinstance(value, (int, float)):
        if isinstance(value, float):
            if value != value or value in (float("inf"), float("-inf")):
                raise ValueError("non-finite numbers are not strict JSON")
            return repr(value)
        return str(value)
    if isinstance(value, list):
        return "[" + ", ".join(render_json(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{encode_string(k)}: {render_json(v)}" for k, v in value.items()) + "}"
    raise TypeError(f"not a JSON value: {value!r}")


_MAX_DEPTH = 48


def _satisfy(sub, doc, depth):
    if depth > _MAX_DEPTH:
        raise UnsatisfiableError("recursion budget exceeded (required cycle?)")
    if sub is True:
        return None
    if sub is False:
        raise UnsatisfiableError("schema 'false' admits nothing")
    if not isinstance(sub, dict):
        raise UnsatisfiableError(f"not a schema: {sub!r}")

    if "$ref" in sub:
        merged = {k: v for k, v in sub.items() if k != "$ref"}
        target = doc.resolve_ref(sub["$ref"])
        if isinstance(target, dict):
            merged = _merge(target, merged)
        elif not merged:
            return _satisfy(target, doc, depth + 1)
        return _satisfy(merged, doc, depth + 1)

    if "allOf" in sub:
        merged = {k: v for k, v in sub.items() if k != "allOf"}
        for branch in sub["allOf"]:
            if isinstance(branch, dict):
                merged = _merge(merged, branch)
            elif branch is False:
                raise UnsatisfiableError("allOf contains 'false'")
        return _satisfy(merged, doc, depth + 1)

    for combinator in ("oneOf", "anyOf"):
        if combinator in sub:
            base = {k: v for k, v in sub.items() if k != combinator}
            last_err = None
            for branch in sub[combinator]:
                try:
                    candidate = branch if not base else _merge(base, branch if isinstance(branch, dict) else {})
                    value = _satisfy(candidate, doc, depth + 1)
                    if _passes(value, sub, doc):
                        return value
                except UnsatisfiableError as exc:
                    last_err = exc
            raise UnsatisfiableError(f"no satisfiable {combinator} branch ({last_err})")

    if "if" in sub:
        base = {k: v for k, v in sub.items() if k not in ("if", "then", "else")}
        trials = []
        if isinstance(sub["if"], dict):
            then = sub.get("then")
            merged = _merge(base, sub["if"])
            if isinstance(then, dict):
                merged = _merge(merged, then)
            trials.append(merged)
        if isinstance(sub.get("else"), dict):
            trials.append(_merge(base, sub["else"]))
        trials.append(base)
        last_err = None
        for trial in trials:
            try:
                value = _satisfy(trial, doc, depth + 1)
                if _passes(value, sub, doc):
                    return value
            except UnsatisfiableError as exc:
                last_err = exc
        raise UnsatisfiableError(f"if/then/else unsatisfiable ({last_err})")

    if "const" in sub:
        return sub["const"]
    if "enum" in sub:
        for option in sub["enum"]:
            if _passes(option, sub, doc):
                return option
        raise UnsatisfiableError("no enum option passes the sibling constraints")

    for type_name in _candidate_types(sub):
        try:
            value = _build(type_name, sub, doc, depth)
        except UnsatisfiableError:
            continue
        return value
    raise UnsatisfiableError(f"no candidate type works for {list(sub)}")


def _candidate_types(sub):
    t = sub.get("type")
    if isinstance(t, str):
        return [t]
    if isinstance(t, list) and t:
        return list(t)
    hints = []
    if any(k in sub for k in ("properties", "required", "patternProperties", "minProperties", "maxProperties")):
        hints.append("object")
    if any(k in sub for k in ("items", "prefixItems", "minItems", "maxItems", "uniqueItems")):
        hints.append("array")
    if any(k in sub for k in ("pattern", "minLength", "maxLength", "format")):
        hints.append("string")
    if any(k in sub for k in ("minimum", "maximum", "exclusiveMinimum", "exclusiveMaximum", "multipleOf")):
        hints.append("number")
    return hints or ["null"]


def _build(type_name, sub, doc, depth):
    if type_name == "null":
        return None
    if type_name == "boolean":
        return True
    if type_name in ("number", "integer"):
        return _gen_number(sub, type_name == "integer")
    if type_name == "string":
        return _gen_string(sub)
    if type_name == "object":
        return _gen_object(sub, doc, depth)
    if type_name == "array":
        return _gen_array(sub, doc, depth)
    raise UnsatisfiableError(f"unknown type {type_name!r}")


def _bounds(sub):
    lo, lo_strict = sub.get("minimum"), False
    hi, hi_strict = sub.get("maximum"), False
    ex_lo = sub.get("exclusiveMinimum")
    ex_hi = sub.get("exclusiveMaximum")
    if ex_lo is True:
        lo_strict = True
    elif isinstance(ex_lo, (int, float)) and not isinstance(ex_lo, bool):
        if lo is None or ex_lo >= lo:
            lo, lo_strict = ex_lo, True
    if ex_hi is True:
        hi_strict = True
    elif isinstance(ex_hi, (int, float)) and not isinstance(ex_hi, bool):
        if hi is None or ex_hi <= hi:
            hi, hi_strict = ex_hi, True
    return lo, lo_strict, hi, hi_strict


def _dec(x):
    return Decimal(x) if isinstance(x, int) else Decimal(repr(x))


def _gen_number(sub, want_int):
    lo, lo_strict, hi, hi_strict = _bounds(sub)
    m = sub.get("multipleOf")
    unit = _dec(m) if m is not None else Decimal(1)

    def ok(x):
        if want_int and not float(x).is_integer():
            return False
        if lo is not None and (x <= lo if lo_strict else x < lo):
            return False
        if hi is not None and (x >= hi if hi_strict else x > hi):
            return False
        if m is not None:
            # exact decimal test, mirroring the validator
            with localcontext() as ctx:
                ctx.prec = 60
                q = _dec(x) / _dec(m)
                if q != q.to_integral_value():
                    return False
        return True

    def snap(d):
        # float through shortest repr keeps the decimal value exact
        f = float(d)
        return int(f) if f.is_integer() else f

    candidates = [0, snap(unit), snap(-unit), 1, -1]
    if lo is not None:
        k = (_dec(lo) / unit).to_integral_value(rounding=ROUND_CEILING)
        candidates += [snap(k * unit), snap((k + 1) * unit), snap((k + 2) * unit), math.ceil(lo), math.ceil(lo) + 1]
    if hi is not None:
        k = (_dec(hi) / unit).to_integral_value(rounding=ROUND_FLOOR)
        candidates += [snap(k * unit), snap((k - 1) * unit), snap((k - 2) * unit), math.floor(hi), math.floor(hi) - 1]
    for x in candidates:
        if ok(x):
            return int(x) if want_int else x
    raise UnsatisfiableError("numeric bounds admit no candidate")


def _gen_string(sub):
    pattern = sub.get("pattern")
    if pattern is not None:
        return _example_for_pattern(pattern)
    length = sub.get("minLength", 0)
    hi = sub.get("maxLength")
    if hi is not None and length > hi:
        raise UnsatisfiableError("minLength exceeds maxLength")
    return "a" * length


def _example_for_pattern(pattern):
    known = _PATTERN_EXAMPLES.get(pattern)
    if known is not None:
        return known
    return sample_pattern(pattern)


def _gen_object(sub, doc, depth):
    props = sub.get("properties") or {}
    additional = sub.get("additionalProperties")
    out = {}
    for name in sub.get("required", ()):
        child = props.get(name)
        if child is None:
            if additional is False:
                raise UnsatisfiableError(f"required property {name!r} has no admissible schema")
            child = additional if isinstance(additional, dict) else True
        out[name] = _satisfy(child, doc, depth + 1)
    need = sub.get("minProperties", 0)
    if len(out) < need:
        for name, child in props.items():
            if len(out) >= need:
                break
            if name not in out:
                out[name] = _satisfy(child, doc, depth + 1)
        i = 0
        while len(out) < need:
            if additional is False:
                raise UnsatisfiableError("minProperties unreachable under additionalProperties:false")
            name = f"k{i}"
            if name not in out:
                out[name] = _satisfy(additional if isinstance(additional, dict) else True, doc, depth + 1)
            i += 1
    max_props = sub.get("maxProperties")
    if max_props is not None and len(out) > max_props:
        raise UnsatisfiableError("required properties exceed maxProperties")
    return out


def _gen_array(sub, doc, depth):
    need = sub.get("minItems", 0)
    max_items = sub.get("maxItems")
    if max_items is not None and need > max_items:
        raise UnsatisfiableError("minItems exceeds maxItems")
    prefix = sub.get("prefixItems")
    rest = sub.get("items")
    if prefix is None and isinstance(rest, list):
        prefix, rest = rest, None
    out = []
    unique = bool(sub.get("uniqueItems"))
    seen = []
    for i in range(need):
        if prefix and i < len(prefix):
            child = prefix[i]
        else:
            child = rest if rest is not None else True
        value = _satisfy(child, doc, depth + 1)
        if unique:
            value = _distinct(value, seen, child, doc, depth)
            seen.append(value)
        out.append(value)
    return out


def _distinct(value, seen, child, doc, depth):
    if value not in seen:
        return value
    if isinstance(child, dict) and "enum" in child:
        for option in child["enum"]:
            if option not in seen:
                return option
    if isinstance(value, bool):
        if (not value) not in seen:
            return not value
    elif isinstance(value, (int, float)):
        for k in range(1, 50):
            if value + k not in seen:
                return value + k
    elif isinstance(value, str):
        for k in range(1, 50):
            candidate = value + "a" * k
            if candidate not in seen:
                return candidate
    raise UnsatisfiableError("cannot make array items unique")


def _merge(a: dict, b: dict) -> dict:
    """Conjunction of two schema objects, best effort.

    Raises UnsatisfiableError on contradictions it cannot express (the
    caller's final validation pass is the safety net either way).
    """
    out = dict(a)
    for key, val in b.items():
        if key not in out:
            out[key] = val
            continue
        cur = out[key]
        if cur == val:
            continue
        if key == "required":
            out[key] = sorted(set(cur) | set(val))
        elif key == "properties":
            merged = dict(cur)
            for name, child in val.items():
                if name in merged and isinstance(merged[name], dict) and isinstance(child, dict):
                    merged[name] = _merge(merged[name], child)
                else:
                    merged[name] = child
            out[key] = merged
        elif key == "type":
            cur_list = [cur] if isinstance(cur, str) else list(cur)
            val_list = [val] if isinstance(val, str) else list(val)
            both = [t for t in cur_list if t in val_list]
            if not both:
                raise UnsatisfiableError(f"type intersection empty: {cur_list} & {val_list}")
            out[key] = both if len(both) > 1 else both[0]
        elif key in ("minLength", "minItems", "minProperties", "minimum", "exclusiveMinimum"):
            out[key] = max(cur, val)
        elif key in ("maxLength", "maxItems", "maxProperties", "maximum", "exclusiveMaximum"):
            out[key] = min(cur, val)
        elif key in ("description", "title", "default", "$defs", "definitions"):
            pass  # annotations: first wins
        elif key == "allOf":
            out[key] = list(cur) + list(val)
        else:
            raise UnsatisfiableError(f"cannot merge conflicting {key!r}")
    return out


def _passes(value, sub, doc) -> bool:
    try:
        text = render_json(value)
    except (ValueError, TypeError):
        return False
    tree = parse(text)
    if isinstance(tree, ParseFailure):
        return False
    scratch = SchemaDoc(root=sub, resolved=doc.resolved, source_len=0)
    return not validate(tree, scratch)


# ---------------------------------------------------------------------------
# Minimal regex sampling


def sample_pattern(pattern: str) -> str:
    """A minimal string matching ``pattern``, or raise UnsatisfiableError."""
    try:
        parsed = sre_parse.parse(pattern)
    except Exception as exc:
        raise UnsatisfiableError(f"unparseable pattern {pattern!r}: {exc}")
    return _sample_seq(parsed)


def _sample_seq(seq):
    return "".join(_sample_op(op, arg) for op, arg in seq)


def _sample_op(op, arg):
    name = str(op)
    if name == "LITERAL":
        return chr(arg)
    if name == "NOT_LITERAL":
        return "a" if arg != ord("a") else "b"
    if name == "ANY":
        return "a"
    if name == "AT":
        return ""
    if name == "IN":
        return _sample_class(arg)
    if name in ("MAX_REPEAT", "MIN_REPEAT"):
        lo, _hi, sub = arg
        return _sample_seq(sub) * lo
    if name == "SUBPATTERN":
        return _sample_seq(arg[3])
    if name == "BRANCH":
        last = None
        for branch in arg[1]:
            try:
                return _sample_seq(branch)
            except UnsatisfiableError as exc:
                last = exc
        raise UnsatisfiableError(f"no branch samples: {last}")
    raise UnsatisfiableError(f"unsupported regex construct {name}")


_CATEGORY_SAMPLES = {
    "CATEGORY_DIGIT": "0",
    "CATEGORY_WORD": "a",
    "CATEGORY_SPACE": " ",
    "CATEGORY_NOT_DIGIT": "a",
    "CATEGORY_NOT_WORD": " ",
    "CATEGORY_NOT_SPACE": "a",
}


def _sample_class(items):
    negated = any(str(op) == "NEGATE" for op, _ in items)
    if negated:
        for candidate in "a0Z _-./":
            if not _class_matches(items, candidate):
                return candidate
        raise UnsatisfiableError("cannot find a char outside the negated class")
    for op, arg in items:
        name = str(op)
        if name == "LITERAL":
            return chr(arg)
        if name == "RANGE":
            return chr(arg[0])
        if name == "CATEGORY":
            sample = _CATEGORY_SAMPLES.get(str(arg))
            if sample:
                return sample
    raise UnsatisfiableError("empty character class")


def _class_matches(items, ch):
    code = ord(ch)
    for op, arg in items:
        name = str(op)
        if name == "LITERAL" and code == arg:
            return True
        if name == "RANGE" and arg[0] <= code <= arg[1]:
            return True
        if name == "CATEGORY":
            cat = str(arg)
            if cat == "CATEGORY_DIGIT" and ch.isdigit():
                return True
            if cat == "CATEGORY_WORD" and (ch.isalnum() or ch == "_"):
                return True
            if cat == "CATEGORY_SPACE" and ch.isspace():
                return True
    return False

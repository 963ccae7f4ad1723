"""Benchmark task generation and response judging.

Three schema-only task kinds (complex generation, custom field formats,
escape translation) plus schema-constrained reasoning wrappers for common
QA datasets.  Generation is seeded and byte-deterministic: the same
(schema, seed) always yields the same instance, prompts included.

For custom-format tasks the prompted schema and the judging schema differ
on purpose: the prompt carries only the natural-language instruction in
the field description, while the judging schema additionally holds the
machine-checkable pattern/const.
"""

from __future__ import annotations

import enum
import json
import random
import string as _string_mod
from copy import deepcopy
from dataclasses import dataclass

from .instances import render_json, satisfying_instance
from .parser import ParseFailure, parse
from .reward import RewardScore, ScoreMode, fine_grained_score
from .schema import SchemaDoc, compile_schema, resolve_pointer
from .tokens import Dialect
from .validator import (
    CustomRule,
    FailureCategory,
    RuleKind,
    check_custom,
    classify,
    inject_rule,
    validate,
)

SYSTEM_PROMPT_TEMPLATE = (
    "You should generate answer with given JSON format.\n"
    "<Schema> Here are the json-schema of the content format:\n"
    "{schema}\n"
    "</Schema>"
)

GENERATE_USER_PROMPT = (
    "Please generate a valid JSON object according to the JSON schema. "
    "Give your JSON object directly, without ```."
)

ESCAPE_USER_PROMPT = (
    "Please generate a valid JSON object according to the JSON schema, "
    "remember your special token here: {special_token} "
    "Give your JSON object directly, without ```."
)


class TaskKind(enum.Enum):
    COMPLEX = "complex"
    CUSTOM_FORMATS = "custom"
    ESCAPE = "escape"
    REASONING = "reasoning"


class ReasoningKind(enum.Enum):
    GSM8K = "gsm8k"
    MATH500 = "math500"
    MMLU = "mmlu"
    ARC = "arc"


REASONING_SCHEMAS = {
    ReasoningKind.GSM8K: {
        "type": "object",
        "properties": {
            "thought": {"type": "string", "description": "put your thought here"},
            "answer": {"type": "number", "description": "put your answer here, integer only"},
        },
        "required": ["thought", "answer"],
    },
    ReasoningKind.MATH500: {
        "type": "object",
        "properties": {
            "thought": {"type": "string", "description": "put your thought here"},
            "answer": {"type": "number", "description": "put your answer here"},
        },
        "required": ["thought", "answer"],
    },
    ReasoningKind.MMLU: {
        "type": "object",
        "properties": {
            "thought": {"type": "string", "description": "put your thought here"},
            "answer": {
                "type": "string",
                "enum": ["A", "B", "C", "D"],
                "description": "put your choice here",
            },
        },
        "required": ["thought", "answer"],
    },
    ReasoningKind.ARC: {
        "type": "object",
        "properties": {
            "thought": {"type": "string", "description": "put your thought here"},
            "answer": {
                "type": "string",
                "description": "put your answer here, Options only, e.g. A",
                "enum": [
                    "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K",
                    "1", "2", "3", "4", "5", "6", "7", "8", "9", "10",
                ],
            },
        },
        "required": ["thought", "answer"],
    },
}

NUMERIC_ANSWER_TOLERANCE = 1e-6


@dataclass
class Prompt:
    system: str
    user: str


@dataclass
class TaskInstance:
    kind: TaskKind
    schema: SchemaDoc  # the judging schema
    prompt: Prompt
    hidden: dict
    seed: int = 0

    def to_record(self, task_id: str) -> dict:
        return {
            "id": task_id,
            "kind": self.kind.value,
            "seed": self.seed,
            "schema": self.schema.root,
            "system_prompt": self.prompt.system,
            "user_prompt": self.prompt.user,
            "hidden": self.hidden,
        }

    @classmethod
    def from_record(cls, record: dict) -> "TaskInstance":
        return cls(
            kind=TaskKind(record["kind"]),
            schema=compile_schema(record["schema"]),
            prompt=Prompt(record["system_prompt"], record["user_prompt"]),
            hidden=record.get("hidden") or {},
            seed=record.get("seed", 0),
        )


def _system_prompt(doc) -> str:
    return SYSTEM_PROMPT_TEMPLATE.format(schema=json.dumps(doc, ensure_ascii=False))


def gen_complex(schema: SchemaDoc) -> TaskInstance:
    """Plain generation task: produce any instance valid under the schema."""
    return TaskInstance(
        kind=TaskKind.COMPLEX,
        schema=schema,
        prompt=Prompt(_system_prompt(schema.root), GENERATE_USER_PROMPT),
        hidden={},
        seed=0,
    )


# Rule kinds eligible for injection (RegexPattern has no canned family).
INJECTABLE_KINDS = (
    RuleKind.PHONE,
    RuleKind.LINUX_PATH,
    RuleKind.WINDOWS_PATH,
    RuleKind.STRONG_PASSWORD,
    RuleKind.RGB_COLOR,
    RuleKind.BASE64,
    RuleKind.CONST_LITERAL,
)

_CONST_WORDS = ("alpha", "bravo", "delta", "echo", "kilo", "nova", "sigma", "zulu")


def find_string_fields(doc_root) -> list:
    """Schema pointers of string-typed fields reachable through properties.

    Restricting to property chains keeps the instance path of every field
    derivable from its schema pointer, which the hidden checks rely on.
    """
    out = []

    def walk(node, pointer):
        if not isinstance(node, dict):
            return
        props = node.get("properties")
        if not isinstance(props, dict):
            return
        for name, child in props.items():
            cptr = f"{pointer}/properties/{_esc(name)}"
            if isinstance(child, dict):
                if child.get("type") == "string":
                    out.append(cptr)
                walk(child, cptr)

    walk(doc_root, "")
    return out


def find_escape_targets(doc_root) -> list:
    """(schema pointer, instance segments) of fields that can hold any string."""
    targets = []

    def unconstrained(child):
        if any(k in child for k in ("pattern", "const", "enum", "format")):
            return False
        return child.get("minLength", 0) <= 8 and child.get("maxLength", 1 << 30) >= 64

    def walk(node, pointer, segments):
        if not isinstance(node, dict):
            return
        props = node.get("properties")
        if not isinstance(props, dict):
            return
        for name, child in props.items():
            cptr = f"{pointer}/properties/{_esc(name)}"
            if isinstance(child, dict):
                if child.get("type") == "string" and unconstrained(child):
                    targets.append((cptr, segments + [name]))
                walk(child, cptr, segments + [name])

    walk(doc_root, "", [])
    return targets


def _rule_compatible(child: dict) -> bool:
    # A rule replaces the field's value shape, so the field must not already
    # constrain it; 24 chars covers the longest canned rule example.
    if any(k in child for k in ("pattern", "const", "enum", "format")):
        return False
    return child.get("minLength", 0) <= 7 and child.get("maxLength", 1 << 30) >= 24


def gen_custom_formats(schema: SchemaDoc, seed: int, max_fields: int = 3) -> TaskInstance:
    """Hide 1..max_fields machine-checkable field rules behind descriptions."""
    rng = random.Random(seed)
    fields = [
        pointer
        for pointer in find_string_fields(schema.root)
        if _rule_compatible(resolve_pointer(schema.root, "#" + pointer))
    ]
    if not fields:
        raise ValueError("schema has no string-typed property fields to constrain")
    count = rng.randint(1, min(max_fields, len(fields)))
    chosen = rng.sample(fields, count)
    rules = []
    for pointer in chosen:
        kind = rng.choice(INJECTABLE_KINDS)
        if kind is RuleKind.CONST_LITERAL:
            rule = CustomRule.of(kind, literal=f"{rng.choice(_CONST_WORDS)}-{rng.randrange(100)}")
        else:
            rule = CustomRule.of(kind)
        rules.append((pointer, rule))

    judging = schema
    prompted = schema
    for pointer, rule in rules:
        judging = inject_rule(judging, pointer, rule, include_constraint=True)
        prompted = inject_rule(prompted, pointer, rule, include_constraint=False)
    hidden = {
        "rules": [
            {"path": pointer, "kind": rule.kind.value, "params": rule.parameters}
            for pointer, rule in rules
        ]
    }
    return TaskInstance(
        kind=TaskKind.CUSTOM_FORMATS,
        schema=judging,
        prompt=Prompt(_system_prompt(prompted.root), GENERATE_USER_PROMPT),
        hidden=hidden,
        seed=seed,
    )


_SPECIAL_HEAVY = ['"', "\\", "\n", "\t", "\r", "/"]
_SPECIAL_UNICODE = ["é", "ß", "Ω", "ж", "中", "→", "…", "😀"]
_SPECIAL_PRINTABLE = list(_string_mod.ascii_letters + _string_mod.digits + " !#$%&'()*+,-.:;<=>?@[]^_`{|}")
_SPECIAL_POPULATION = _SPECIAL_HEAVY * 8 + _SPECIAL_UNICODE * 2 + _SPECIAL_PRINTABLE


def _special_string(rng: random.Random) -> str:
    length = rng.randint(8, 64)
    return "".join(rng.choice(_SPECIAL_POPULATION) for _ in range(length))


def gen_escape(schema: SchemaDoc, seed: int) -> TaskInstance:
    """Escape-translation task: a raw special string must land, correctly
    escaped, in one designated string field of a valid instance."""
    rng = random.Random(seed)
    targets = find_escape_targets(schema.root)
    if not targets:
        raise ValueError("schema has no unconstrained string field for the special token")
    pointer, segments = rng.choice(targets)
    special = _special_string(rng)
    hidden = {
        "special_string": special,
        "target_path": "/" + "/".join(_esc(s) for s in segments),
        "target_pointer": pointer,
    }
    return TaskInstance(
        kind=TaskKind.ESCAPE,
        schema=schema,
        prompt=Prompt(_system_prompt(schema.root), ESCAPE_USER_PROMPT.format(special_token=special)),
        hidden=hidden,
        seed=seed,
    )


def wrap_reasoning(kind, question: str, gold=None) -> TaskInstance:
    """Wrap a QA question in its fixed answer schema.

    ``gold`` is the hidden reference answer; without it the judge checks
    schema conformance only.
    """
    kind = kind if isinstance(kind, ReasoningKind) else ReasoningKind(str(kind).lower())
    doc = deepcopy(REASONING_SCHEMAS[kind])
    return TaskInstance(
        kind=TaskKind.REASONING,
        schema=compile_schema(doc),
        prompt=Prompt(_system_prompt(doc), question),
        hidden={"dataset": kind.value, "gold": gold},
        seed=0,
    )


@dataclass
class JudgeResult:
    correct: bool
    category: FailureCategory | None
    score: RewardScore


def judge(task: TaskInstance, response_text, mode=ScoreMode.STRICT) -> JudgeResult:
    """Full verdict: parse, schema-validate, then kind-specific hidden checks."""
    mode = ScoreMode.coerce(mode)
    score = fine_grained_score(response_text, task.schema, mode)
    dialect = Dialect.JSON5 if mode is ScoreMode.TOS else Dialect.JSON
    tree = parse(response_text, dialect)
    if isinstance(tree, ParseFailure):
        return JudgeResult(False, FailureCategory.PARSER_ERROR, score)
    violations = validate(tree, task.schema)
    if violations:
        return JudgeResult(False, classify(violations), score)

    if task.kind is TaskKind.CUSTOM_FORMATS:
        data = tree.to_python()
        for entry in task.hidden.get("rules", ()):
            rule = CustomRule.of(entry["kind"], **entry.get("params", {}))
            value = _get_by_segments(data, _pointer_to_segments(entry["path"]))
            if isinstance(value, str) and not check_custom(value, rule):
                bad = FailureCategory.ENUM_ERROR if rule.kind is RuleKind.CONST_LITERAL else FailureCategory.PATTERN_ERROR
                return JudgeResult(False, bad, score)
    elif task.kind is TaskKind.ESCAPE:
        node = tree.node_at(task.hidden["target_path"])
        if node is None or node.kind != "string" or node.value != task.hidden["special_string"]:
            return JudgeResult(False, FailureCategory.OTHER, score)
    elif task.kind is TaskKind.REASONING:
        gold = task.hidden.get("gold")
        if gold is not None:
            answer = tree.to_python().get("answer")
            if isinstance(gold, (int, float)) and not isinstance(gold, bool):
                if not isinstance(answer, (int, float)) or isinstance(answer, bool):
                    return JudgeResult(False, FailureCategory.OTHER, score)
                if abs(float(answer) - float(gold)) > NUMERIC_ANSWER_TOLERANCE:
                    return JudgeResult(False, FailureCategory.OTHER, score)
            elif answer != gold:
                return JudgeResult(False, FailureCategory.OTHER, score)
    return JudgeResult(True, None, score)


def self_test_response(task: TaskInstance) -> str:
    """Construct a response that must judge correct (solvability witness)."""
    if task.kind in (TaskKind.COMPLEX, TaskKind.CUSTOM_FORMATS):
        return render_json(satisfying_instance(task.schema))
    if task.kind is TaskKind.ESCAPE:
        value = satisfying_instance(task.schema)
        segments = _pointer_to_segments(task.hidden["target_pointer"])
        value = _with_value_at(value, segments, task.hidden["special_string"], task.schema)
        return render_json(value)
    if task.kind is TaskKind.REASONING:
        value = satisfying_instance(task.schema)
        gold = task.hidden.get("gold")
        if gold is not None:
            value["answer"] = gold
        return render_json(value)
    raise ValueError(f"unknown task kind {task.kind!r}")


def _esc(segment: str) -> str:
    return segment.replace("~", "~0").replace("/", "~1")


def _unesc(segment: str) -> str:
    return segment.replace("~1", "/").replace("~0", "~")


def _pointer_to_segments(pointer: str) -> list:
    """Field names from either a schema pointer or an instance pointer."""
    parts = [_unesc(p) for p in pointer.lstrip("#").strip("/").split("/") if p]
    if "properties" in parts:
        return [parts[i + 1] for i in range(len(parts) - 1) if parts[i] == "properties"]
    return parts


def _get_by_segments(data, segments):
    for seg in segments:
        if not isinstance(data, dict) or seg not in data:
            return None
        data = data[seg]
    return data


def _with_value_at(value, segments, payload, schema: SchemaDoc):
    """Set ``payload`` at the property chain, creating missing parents with
    schema-satisfying values."""
    if not isinstance(value, dict):
        value = {}
    root = deepcopy(value)
    cursor = root
    sub = schema.root
    for i, seg in enumerate(segments):
        sub = (sub.get("properties") or {}).get(seg, True) if isinstance(sub, dict) else True
        last = i == len(segments) - 1
        if last:
            cursor[seg] = payload
        else:
            nxt = cursor.get(seg)
            if not isinstance(nxt, dict):
                built = satisfying_instance(compile_schema(_rebased(sub, schema)))
                cursor[seg] = built if isinstance(built, dict) else {}
            cursor = cursor[seg]
    return root


def _rebased(sub, schema: SchemaDoc):
    """A subschema lifted to a standalone document (keeps $defs resolvable)."""
    if not isinstance(sub, dict):
        return sub
    if not isinstance(schema.root, dict):
        return sub
    out = deepcopy(sub)
    for container in ("$defs", "definitions"):
        if container in schema.root and container not in out:
            out[container] = deepcopy(schema.root[container])
    return out

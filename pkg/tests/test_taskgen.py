import json
import random

import pytest

from schemascore import (
    FailureCategory,
    TaskInstance,
    TaskKind,
    compile_schema,
    gen_complex,
    gen_custom_formats,
    gen_escape,
    judge,
    outcome_score,
    self_test_response,
    satisfying_instance,
    wrap_reasoning,
)
from schemascore.taskgen import (
    ESCAPE_USER_PROMPT,
    GENERATE_USER_PROMPT,
    REASONING_SCHEMAS,
    SYSTEM_PROMPT_TEMPLATE,
    ReasoningKind,
    find_escape_targets,
    find_string_fields,
)

from corpus import random_schema

NESTED = compile_schema(
    {
        "type": "object",
        "properties": {
            "name": {"type": "string"},
            "meta": {
                "type": "object",
                "properties": {"note": {"type": "string"}, "rank": {"type": "integer"}},
                "required": ["note"],
            },
        },
        "required": ["name"],
    }
)


def test_system_prompt_template_shape():
    task = gen_complex(NESTED)
    assert task.prompt.system.startswith("You should generate answer with given JSON format.\n<Schema>")
    assert task.prompt.system.endswith("</Schema>")
    assert json.dumps(NESTED.root, ensure_ascii=False) in task.prompt.system
    assert task.prompt.user == GENERATE_USER_PROMPT


def test_complex_judged_by_outcome():
    task = gen_complex(NESTED)
    good = self_test_response(task)
    assert judge(task, good).correct
    assert outcome_score(good, task.schema) == 1.0
    assert not judge(task, '{"name": 3}').correct


def test_empty_schema_admits_everything():
    task = gen_complex(compile_schema({}))
    for text in ('{"x": 1}', "[1,2]", '"s"', "null"):
        assert judge(task, text).correct


def test_string_field_discovery():
    fields = find_string_fields(NESTED.root)
    assert fields == ["/properties/name", "/properties/meta/properties/note"]


def test_custom_formats_deterministic():
    a = gen_custom_formats(NESTED, seed=7)
    b = gen_custom_formats(NESTED, seed=7)
    assert a.prompt.system == b.prompt.system
    assert a.prompt.user == b.prompt.user
    assert a.hidden == b.hidden
    assert a.schema.root == b.schema.root
    c = gen_custom_formats(NESTED, seed=8)
    assert (c.hidden != a.hidden) or (c.schema.root != a.schema.root)


def test_custom_formats_prompt_hides_constraint():
    task = gen_custom_formats(NESTED, seed=3)
    prompted = json.loads(task.prompt.system.split("content format:\n", 1)[1].rsplit("\n</Schema>", 1)[0])
    for rule in task.hidden["rules"]:
        segs = [s for s in rule["path"].split("/") if s]
        judging_sub = task.schema.root
        prompted_sub = prompted
        for seg in segs:
            judging_sub = judging_sub[seg]
            prompted_sub = prompted_sub[seg]
        assert "description" in prompted_sub
        assert "pattern" not in prompted_sub and "const" not in prompted_sub
        assert "pattern" in judging_sub or "const" in judging_sub
        assert judging_sub["description"] == prompted_sub["description"]


def test_custom_formats_no_string_fields():
    numbers_only = compile_schema({"type": "object", "properties": {"n": {"type": "integer"}}})
    with pytest.raises(ValueError):
        gen_custom_formats(numbers_only, seed=1)


def test_custom_formats_bad_response_classified():
    # force a single known rule by trying seeds until base64 lands on /properties/name
    for seed in range(200):
        task = gen_custom_formats(NESTED, seed=seed, max_fields=1)
        rule = task.hidden["rules"][0]
        if rule["kind"] == "Base64" and rule["path"] == "/properties/name":
            break
    else:
        pytest.fail("no seed produced the wanted rule")
    verdict = judge(task, '{"name": "###not-base64"}')
    assert not verdict.correct
    assert verdict.category is FailureCategory.PATTERN_ERROR


def test_escape_prompt_carries_raw_token():
    task = gen_escape(NESTED, seed=11)
    special = task.hidden["special_string"]
    assert 8 <= len(special) <= 64
    assert task.prompt.user == ESCAPE_USER_PROMPT.format(special_token=special)
    assert special in task.prompt.user  # raw, unescaped substitution


def test_escape_selftest_and_wrong_field():
    task = gen_escape(NESTED, seed=11)
    good = self_test_response(task)
    assert judge(task, good).correct
    # same special string placed in the wrong field
    data = json.loads(good)
    special = task.hidden["special_string"]
    wrong = {"name": "x", "meta": {"note": "y"}}
    target = task.hidden["target_path"]
    if target == "/name":
        wrong = {"name": "x", "meta": {"note": special}}
    else:
        wrong = {"name": special, "meta": {"note": "y"}}
    verdict = judge(task, json.dumps(wrong, ensure_ascii=False))
    assert not verdict.correct


def test_escape_wrong_backslash_count_fails():
    schema = compile_schema({"type": "object", "properties": {"s": {"type": "string"}}})
    task = None
    for seed in range(100):
        candidate = gen_escape(schema, seed=seed)
        if "\n" in candidate.hidden["special_string"]:
            task = candidate
            break
    assert task is not None
    special = task.hidden["special_string"]
    # doubled escapes decode to literal backslash-n rather than a newline
    doubled = json.dumps({"s": special}).replace("\\n", "\\\\n")
    assert not judge(task, doubled).correct
    assert judge(task, json.dumps({"s": special})).correct


def test_escape_requires_unconstrained_field():
    constrained = compile_schema(
        {"type": "object", "properties": {"s": {"type": "string", "maxLength": 10}}}
    )
    with pytest.raises(ValueError):
        gen_escape(constrained, seed=1)
    assert find_escape_targets(constrained.root) == []


def test_reasoning_schemas_match_fixed_docs():
    gsm = wrap_reasoning("gsm8k", "Q?")
    assert gsm.schema.root == REASONING_SCHEMAS[ReasoningKind.GSM8K]
    assert gsm.schema.root["required"] == ["thought", "answer"]
    mmlu = wrap_reasoning("mmlu", "Q?")
    assert mmlu.schema.root["properties"]["answer"]["enum"] == ["A", "B", "C", "D"]
    arc = wrap_reasoning("arc", "Q?")
    enum = arc.schema.root["properties"]["answer"]["enum"]
    assert "K" in enum and "10" in enum and len(enum) == 21
    assert gsm.prompt.user == "Q?"
    assert gsm.prompt.system == SYSTEM_PROMPT_TEMPLATE.format(schema=json.dumps(gsm.schema.root, ensure_ascii=False))


def test_reasoning_judging():
    task = wrap_reasoning("gsm8k", "6*7?", gold=42)
    assert judge(task, '{"thought": "6*7=42", "answer": 42}').correct
    assert judge(task, '{"thought": "", "answer": 42.0000001}').correct  # inside 1e-6? no: 1e-7
    assert not judge(task, '{"thought": "", "answer": 41}').correct
    assert not judge(task, '{"answer": 42}').correct  # thought required
    mmlu = wrap_reasoning("mmlu", "?", gold="B")
    assert judge(mmlu, '{"thought": "", "answer": "B"}').correct
    bad = judge(mmlu, '{"thought": "", "answer": "E"}')
    assert not bad.correct and bad.category is FailureCategory.ENUM_ERROR
    wrong = judge(mmlu, '{"thought": "", "answer": "C"}')
    assert not wrong.correct and wrong.category is FailureCategory.OTHER


def test_judge_score_always_present():
    task = gen_complex(NESTED)
    verdict = judge(task, "@@@ not json")
    assert verdict.category is FailureCategory.PARSER_ERROR
    assert 0.0 <= verdict.score.ratio <= 1.0


def test_task_record_round_trip():
    task = gen_custom_formats(NESTED, seed=5)
    record = task.to_record("t-0")
    again = TaskInstance.from_record(json.loads(json.dumps(record)))
    assert again.kind is TaskKind.CUSTOM_FORMATS
    assert again.schema.root == task.schema.root
    assert again.hidden == task.hidden
    response = self_test_response(again)
    assert judge(again, response).correct


def test_solvability_sample_across_kinds():
    rng = random.Random(4242)
    made = 0
    for i in range(200):
        schema_doc = compile_schema(random_schema(rng))
        for kind, gen in (("complex", None), ("custom", None), ("escape", None)):
            try:
                if kind == "complex":
                    task = gen_complex(schema_doc)
                elif kind == "custom":
                    task = gen_custom_formats(schema_doc, seed=i)
                else:
                    task = gen_escape(schema_doc, seed=i)
            except ValueError:
                continue
            response = self_test_response(task)
            assert judge(task, response).correct, (kind, schema_doc.root, response)
            made += 1
        if made >= 150:
            break
    assert made >= 150

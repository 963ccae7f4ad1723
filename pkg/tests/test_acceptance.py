"""Acceptance gate: one test per criterion, each timed against its budget.

Run with ``pytest tests/test_acceptance.py -v`` for one pass/fail line per
criterion (add ``-s`` to see the timing lines).
"""

import itertools
import json
import random
import time
from contextlib import contextmanager

import pytest

from schemascore import (
    ClipConfig,
    CurationOutcome,
    JsonTree,
    MappingResolver,
    ParseFailure,
    TaskInstance,
    compile_schema,
    curate,
    decode_string,
    encode_string,
    fine_grained_score,
    gen_complex,
    gen_custom_formats,
    gen_escape,
    judge,
    parse,
    ppo_clip_term,
    render_json,
    repair,
    rloo_advantages,
    satisfying_instance,
    self_test_response,
    validate,
)
from schemascore.toolconv import ToolDef, convert, pointer_escape

from corpus import (
    KEYWORD_SCHEMAS,
    curation_corpus,
    instance_grid,
    mutate_text,
    mutate_value,
    random_schema,
    valid_documents,
)
from oracle_validator import is_valid


@contextmanager
def budget(name, seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    print(f"ACCEPTANCE PASS [{name}] {elapsed:.2f}s (budget {seconds}s)")
    assert elapsed < seconds, f"{name} exceeded its {seconds}s budget ({elapsed:.2f}s)"


def test_rloo_advantage_exactness_and_zero_sum():
    with budget("leave-one-out advantages", 1.0):
        adv = rloo_advantages([1.0, 0.5, 0.5, 0.0])
        expected = [2.0 / 3.0, 0.0, 0.0, -2.0 / 3.0]
        for got, want in zip(adv, expected):
            assert abs(got - want) < 1e-9
        rng = random.Random(2024)
        for _ in range(1000):
            k = rng.randint(2, 64)
            rewards = [rng.uniform(-10, 10) for _ in range(k)]
            assert abs(sum(rloo_advantages(rewards))) < 1e-9


def test_clip_term_exactness_and_bounds():
    with budget("clipped objective term", 1.0):
        cfg = ClipConfig(0.2)
        assert abs(ppo_clip_term(1.0, 2.0, cfg) - 2.0) < 1e-12
        assert abs(ppo_clip_term(1.5, 1.0, cfg) - 1.2) < 1e-12
        assert abs(ppo_clip_term(0.5, -1.0, cfg) - (-0.8)) < 1e-12
        rng = random.Random(77)
        for _ in range(10_000):
            ratio = rng.uniform(0.01, 4.0)
            advantage = rng.uniform(-5, 5)
            eps = rng.uniform(0.01, 0.99)
            term = ppo_clip_term(ratio, advantage, ClipConfig(eps))
            clipped = min(max(ratio, 1 - eps), 1 + eps)
            assert term == min(ratio * advantage, clipped * advantage)
            assert term <= ratio * advantage + 1e-12
            if advantage > 0:
                assert term <= (1 + eps) * advantage + 1e-12
            if abs(ratio - 1.0) <= eps:
                assert abs(term - ratio * advantage) < 1e-12


def _independent_outcome(text, doc):
    """Strict-valid + conformant + unpadded, checked outside RewardScore."""
    tree = parse(text, "json")
    if isinstance(tree, ParseFailure):
        return False
    return not validate(tree, doc)


def test_score_calibration():
    with budget("score calibration (ratio=1 iff valid+conformant+unpadded)", 30.0):
        a_int = compile_schema({"type": "object", "properties": {"a": {"type": "integer"}}})
        s = fine_grained_score('{"a":"x"}', a_int)
        assert (s.ratio, s.total_tokens, s.correct_tokens) == (0.8, 5, 4)
        s = fine_grained_score('{"a": 1', a_int)
        assert (s.ratio, s.total_tokens, s.correct_tokens, s.padded_tokens) == (0.8, 5, 4, 1)

        rng = random.Random(20_24)
        for _ in range(1000):  # 1,000 generated pairs + 1,000 mutations
            doc = compile_schema(random_schema(rng))
            value = satisfying_instance(doc)
            text = render_json(value)
            score = fine_grained_score(text, doc)
            assert score.ratio == 1.0 and score.padded_tokens == 0, (doc.root, text)
            assert _independent_outcome(text, doc)

            mutated = mutate_text(rng, text) if rng.random() < 0.5 else render_json(mutate_value(rng, value))
            mscore = fine_grained_score(mutated, doc)
            outcome = _independent_outcome(mutated, doc) and mscore.padded_tokens == 0
            assert (mscore.ratio == 1.0) == outcome, (doc.root, mutated)
            assert (mscore.ratio == 1.0) == (mscore.parse_ok and mscore.schema_ok and mscore.padded_tokens == 0)


SPECIAL_ALPHABET = ['"', "\\", "/", "\b", "\f", "\n", "\r", "\t", "\x00", "é", "中", "😀"]


def test_escape_round_trip_exhaustive_and_random():
    with budget("escape round-trip", 30.0):
        count = 0
        for length in range(0, 5):  # exhaustive to length 4: 22,621 strings
            for combo in itertools.product(SPECIAL_ALPHABET, repeat=length):
                s = "".join(combo)
                assert decode_string(encode_string(s)) == s
                count += 1
        assert count > 8000

        rng = random.Random(909)
        pool = [chr(c) for c in range(0x20, 0x7F)] + SPECIAL_ALPHABET + [
            chr(rng.randint(0x80, 0xD7FF)) for _ in range(64)
        ] + [chr(rng.randint(0xE000, 0x10FFFF)) for _ in range(64)]
        for _ in range(100_000):
            s = "".join(rng.choice(pool) for _ in range(rng.randint(0, 20)))
            assert decode_string(encode_string(s)) == s


def test_repair_totality():
    with budget("repair totality", 120.0):
        docs = valid_documents(200)
        assert len(docs) == 200
        for text in docs:
            tree = parse(text)
            assert isinstance(tree, JsonTree), text
            data = text.encode("utf-8")
            for cut in range(len(data) + 1):  # byte prefixes: may split UTF-8
                prefix = data[:cut]
                result = parse(prefix)
                if isinstance(result, JsonTree):
                    continue
                fixed = repair(prefix, result)
                assert isinstance(parse(fixed["repaired_text"]), JsonTree), (text, cut)

        any_schema = compile_schema({"type": "object", "required": ["k"]})
        rng = random.Random(616)
        for _ in range(100_000):
            blob = bytes(rng.randrange(256) for _ in range(rng.randint(0, 48)))
            score = fine_grained_score(blob, any_schema)
            assert 0.0 <= score.ratio <= 1.0


def test_validator_oracle_agreement():
    with budget("validator oracle agreement", 60.0):
        grid = instance_grid()
        rng = random.Random(31)
        extra = []
        while len(extra) < 120:
            try:
                extra.append(satisfying_instance(compile_schema(random_schema(rng))))
            except Exception:
                continue
        instances = grid + extra
        pairs = 0
        for schema in KEYWORD_SCHEMAS:
            doc = compile_schema(schema)
            for value in instances:
                text = json.dumps(value)
                ours = not validate(parse(text), doc)
                theirs = is_valid(value, schema)
                assert ours == theirs, (schema, value)
                pairs += 1
        assert pairs >= 10_000, f"only {pairs} pairs"


def test_taskgen_solvability_and_determinism():
    with budget("taskgen solvability", 60.0):
        rng = random.Random(808)
        docs = []
        while len(docs) < 60:
            doc = compile_schema(random_schema(rng))
            try:
                gen_custom_formats(doc, seed=0)
                gen_escape(doc, seed=0)
            except ValueError:
                continue
            docs.append(doc)

        made = 0
        i = 0
        while made < 500:
            doc = docs[i % len(docs)]
            kind = ("complex", "custom", "escape")[i % 3]
            seed = 1000 + i
            i += 1
            if kind == "complex":
                task = gen_complex(doc)
                again = gen_complex(doc)
            elif kind == "custom":
                task = gen_custom_formats(doc, seed)
                again = gen_custom_formats(doc, seed)
            else:
                task = gen_escape(doc, seed)
                again = gen_escape(doc, seed)
            # byte-identical regeneration
            assert task.prompt.system == again.prompt.system
            assert task.prompt.user == again.prompt.user
            assert json.dumps(task.to_record("x"), ensure_ascii=False) == json.dumps(
                again.to_record("x"), ensure_ascii=False
            )
            response = self_test_response(task)
            verdict = judge(task, response)
            assert verdict.correct, (kind, doc.root, response)
            made += 1
        assert made == 500


def test_toolconv_structure_and_fuzz():
    with budget("tool conversion", 10.0):
        one = convert([ToolDef("get_weather", "w", {"type": "dict", "properties": {"city": {"type": "str"}}, "required": ["city"]})])
        assert one["$defs"]["tools"]["oneOf"] == [{"$ref": "#/$defs/get_weather"}]
        assert one["oneOf"][0]["minItems"] == 2
        assert one["oneOf"][2]["type"] == "string"
        assert one["$defs"]["get_weather"]["properties"]["get_weather"]["properties"]["city"]["type"] == "string"

        two = convert([ToolDef("a", "", {"type": "object"}), ToolDef("b", "", {"type": "object"})])
        assert [r["$ref"] for r in two["$defs"]["tools"]["oneOf"]] == ["#/$defs/a", "#/$defs/b"]

        weird = convert([ToolDef("a/b~c", "", {"type": "object"})])
        assert weird["$defs"]["tools"]["oneOf"][0]["$ref"] == "#/$defs/" + pointer_escape("a/b~c") == "#/$defs/a~1b~0c"
        assert "a/b~c" in weird["$defs"]

        # every fuzzed output compiles; bare string always validates; single
        # call array never does
        rng = random.Random(4444)
        types = ["object", "dict", "list", "str", "int", "float", "bool", "string", "number"]
        for round_no in range(50):
            tools = []
            for i in range(rng.randint(1, 6)):
                params = {"type": "object", "properties": {f"p{j}": {"type": rng.choice(types)} for j in range(rng.randint(0, 3))}}
                tools.append(ToolDef(f"t{round_no}_{i}" + ("/x" if rng.random() < 0.2 else ""), "", params if rng.random() < 0.9 else None))
            schema = convert(tools)
            doc = compile_schema(schema)
            assert not validate(parse('"none of these apply"'), doc)
            first = tools[0].name
            single_call = json.dumps([{first: {}}])
            assert validate(parse(single_call), doc), "a one-call array must fail minItems 2"


def test_curation_conservation_and_idempotence():
    with budget("curation pipeline", 10.0):
        pairs, resolver_docs = curation_corpus(200)
        resolver = MappingResolver(resolver_docs)
        records = list(curate(pairs, resolver))
        assert len(records) == 200
        by_outcome = {outcome: [] for outcome in CurationOutcome}
        for record in records:
            by_outcome[record.outcome].append(record)
        assert all(by_outcome[o] for o in CurationOutcome), "all three outcome classes present"
        assert sum(len(v) for v in by_outcome.values()) == 200

        kept = by_outcome[CurationOutcome.KEPT]
        second = list(curate(((r.source_id, json.dumps(r.final_schema)) for r in kept), resolver))
        assert all(r.outcome is CurationOutcome.KEPT for r in second)
        assert [r.final_schema for r in second] == [r.final_schema for r in kept]

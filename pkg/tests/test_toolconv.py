import random

import pytest

from schemascore import (
    CompileError,
    ToolDef,
    compile_schema,
    convert,
    normalize_types,
    parse,
    pointer_escape,
    validate,
)
from schemascore.toolconv import MULTI_CALL_DESCRIPTION, NO_TOOL_DESCRIPTION, TOOLS_DESCRIPTION


def test_normalize_informal_types():
    assert normalize_types({"type": "dict"}) == {"type": "object"}
    assert normalize_types({"type": "list", "items": {"type": "int"}}) == {
        "type": "array",
        "items": {"type": "integer"},
    }
    for alias, standard in [("str", "string"), ("float", "number"), ("bool", "boolean"), ("tuple", "array")]:
        assert normalize_types({"type": alias}) == {"type": standard}


def test_normalize_unknown_passthrough():
    node = {"type": "object", "properties": {"a": {"type": "string"}}}
    assert normalize_types(node) == node


def test_pointer_escape():
    assert pointer_escape("a/b") == "a~1b"
    assert pointer_escape("a~b") == "a~0b"
    assert pointer_escape("a/b~c") == "a~1b~0c"


def test_single_tool_structure():
    schema = convert([ToolDef("get_weather", "Weather lookup", {"type": "dict", "properties": {"city": {"type": "str"}}, "required": ["city"]})])
    assert schema["$defs"]["tools"]["description"] == TOOLS_DESCRIPTION
    assert schema["$defs"]["tools"]["oneOf"] == [{"$ref": "#/$defs/get_weather"}]
    tool = schema["$defs"]["get_weather"]
    assert tool["type"] == "object"
    assert tool["required"] == ["get_weather"]
    assert tool["additionalProperties"] is False
    assert tool["properties"]["get_weather"]["type"] == "object"
    assert tool["properties"]["get_weather"]["properties"]["city"]["type"] == "string"
    branches = schema["oneOf"]
    assert branches[0]["type"] == "array"
    assert branches[0]["minItems"] == 2
    assert branches[0]["items"] == {"$ref": "#/$defs/tools"}
    assert branches[0]["description"] == MULTI_CALL_DESCRIPTION
    assert branches[1] == {"$ref": "#/$defs/tools"}
    assert branches[2]["type"] == "string"
    assert branches[2]["description"] == NO_TOOL_DESCRIPTION


def test_two_tool_structure():
    schema = convert([
        {"name": "alpha", "parameters": {"type": "object"}},
        {"name": "beta", "description": "b", "parameters": {"type": "dict"}},
    ])
    refs = schema["$defs"]["tools"]["oneOf"]
    assert refs == [{"$ref": "#/$defs/alpha"}, {"$ref": "#/$defs/beta"}]
    assert "alpha" in schema["$defs"] and "beta" in schema["$defs"]


def test_weird_name_pointer_escaped_and_resolvable():
    schema = convert([ToolDef("a/b~c", "", {"type": "object"})])
    ref = schema["$defs"]["tools"]["oneOf"][0]["$ref"]
    assert ref == "#/$defs/a~1b~0c"
    compiled = compile_schema(schema)  # the escaped ref must resolve
    assert compiled.resolve_ref(ref)["required"] == ["a/b~c"]


def test_missing_parameters_default():
    schema = convert([ToolDef("noop")])
    assert schema["$defs"]["noop"]["properties"]["noop"] == {"type": "object"}


def test_duplicate_and_empty_rejected():
    with pytest.raises(ValueError):
        convert([])
    with pytest.raises(ValueError):
        convert([ToolDef("x"), ToolDef("x")])
    with pytest.raises(ValueError):
        convert([ToolDef("tools")])
    with pytest.raises(ValueError):
        ToolDef("")


def _check(schema, text):
    return validate(parse(text), compile_schema(schema))


def test_valid_call_validates():
    schema = convert([
        ToolDef("get_weather", "", {"type": "object", "properties": {"city": {"type": "string"}}, "required": ["city"]}),
        ToolDef("noop"),
    ])
    assert _check(schema, '{"get_weather": {"city": "Lima"}}') == []
    assert _check(schema, '{"unknown_tool": {}}') != []
    assert _check(schema, '{"get_weather": {}}') != []  # missing required arg
    assert _check(schema, '{"get_weather": {"city": "Lima"}, "noop": {}}') != []  # two keys


def test_string_branch_always_validates():
    schema = convert([ToolDef("only", "", {"type": "object"})])
    assert _check(schema, '"no function applies here"') == []


def test_multi_call_needs_two():
    schema = convert([
        ToolDef("a", "", {"type": "object"}),
        ToolDef("b", "", {"type": "object"}),
    ])
    assert _check(schema, '[{"a": {}}, {"b": {}}]') == []
    assert _check(schema, '[{"a": {}}]') != []  # minItems 2


_TYPES = ["object", "array", "string", "integer", "number", "boolean", "dict", "list", "str", "int", "float", "bool"]


def _random_params(rng, depth=0):
    if depth > 2 or rng.random() < 0.3:
        return {"type": rng.choice(_TYPES)}
    n = rng.randint(0, 3)
    props = {f"p{i}": _random_params(rng, depth + 1) for i in range(n)}
    out = {"type": rng.choice(["object", "dict"])}
    if props:
        out["properties"] = props
        if rng.random() < 0.5:
            out["required"] = sorted(rng.sample(sorted(props), rng.randint(1, n)))
    return out


def test_fuzzed_outputs_compile():
    rng = random.Random(31337)
    for round_no in range(60):
        count = rng.randint(1, 5)
        tools = []
        for i in range(count):
            name = rng.choice([f"tool_{round_no}_{i}", f"ns/{i}", f"odd~{i}", f"get{i}"])
            has_params = rng.random() < 0.85
            tools.append(ToolDef(name, "desc", _random_params(rng) if has_params else None))
        schema = convert(tools)
        compile_schema(schema)  # must never raise


def test_output_compiles_is_part_of_convert():
    # convert itself meta-validates; a broken parameters doc surfaces as CompileError
    with pytest.raises(CompileError):
        convert([ToolDef("bad", "", {"type": "object", "properties": {"x": {"pattern": "["}}})])

"""Conversion of tool/function definitions into one dispatch schema.

The output schema admits exactly three response shapes: an array of two or
more tool calls, a single tool call, or a bare string explaining why no
tool applies.  Each tool call is an object with a single required property
named after the tool, holding its (type-normalized) parameters.
"""

from __future__ import annotations

from copy import deepcopy
from dataclasses import dataclass, field

from .schema import compile_schema

# Informal type names seen in crawled tool corpora -> standard schema types.
TYPE_ALIASES = {
    "dict": "object",
    "list": "array",
    "tuple": "array",
    "str": "string",
    "int": "integer",
    "float": "number",
    "bool": "boolean",
}

MULTI_CALL_DESCRIPTION = "Calling multiple tools in a array."
NO_TOOL_DESCRIPTION = (
    "If none of the function can be used, point it out here. "
    "If the given question lacks the parameters required by the function, "
    "also point it out here."
)
TOOLS_DESCRIPTION = "Available tools you could use."


@dataclass
class ToolDef:
    name: str
    description: str = ""
    parameters: dict = field(default=None)

    def __post_init__(self):
        if not self.name:
            raise ValueError("tool name must be non-empty")

    @classmethod
    def from_dict(cls, record: dict) -> "ToolDef":
        return cls(
            name=record.get("name", ""),
            description=record.get("description", "") or "",
            parameters=record.get("parameters"),
        )


def normalize_types(node):
    """Recursively align informal type names ('dict', 'int', ...) to
    standard schema type names; unknown names pass through unchanged."""
    if isinstance(node, dict):
        out = {}
        for key, value in node.items():
            if key == "type":
                if isinstance(value, str):
                    out[key] = TYPE_ALIASES.get(value, value)
                elif isinstance(value, list):
                    out[key] = [TYPE_ALIASES.get(v, v) if isinstance(v, str) else normalize_types(v) for v in value]
                else:
                    out[key] = normalize_types(value)
            else:
                out[key] = normalize_types(value)
        return out
    if isinstance(node, list):
        return [normalize_types(v) for v in node]
    return node


def pointer_escape(name: str) -> str:
    """JSON pointer escaping, '~' before '/' (the order matters)."""
    return name.replace("~", "~0").replace("/", "~1")


def convert(tools) -> dict:
    """Build the dispatch schema for a list of tools.

    Tools without parameters get an empty-object parameters schema.  The
    result is guaranteed meta-valid (it is compiled before returning).
    Raises ValueError for an empty list or duplicate names.
    """
    tools = [t if isinstance(t, ToolDef) else ToolDef.from_dict(t) for t in tools]
    if not tools:
        raise ValueError("cannot convert an empty tool list")
    names = [t.name for t in tools]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ValueError(f"duplicate tool names: {dupes}")
    if "tools" in names:
        raise ValueError("tool name 'tools' is reserved for the dispatch entry")

    schema = {
        "$defs": {
            "tools": {
                "description": TOOLS_DESCRIPTION,
                "oneOf": [],
            }
        },
    }
    for tool in tools:
        parameters = tool.parameters if tool.parameters is not None else {"type": "object"}
        normalized = normalize_types(deepcopy(parameters))
        schema["$defs"][tool.name] = {
            "type": "object",
            "description": tool.description or "",
            "properties": {tool.name: normalized},
            "required": [tool.name],
            "additionalProperties": False,
        }
        schema["$defs"]["tools"]["oneOf"].append({"$ref": "#/$defs/" + pointer_escape(tool.name)})
    schema["oneOf"] = [
        {
            "type": "array",
            "description": MULTI_CALL_DESCRIPTION,
            "items": {"$ref": "#/$defs/tools"},
            "minItems": 2,
        },
        {"$ref": "#/$defs/tools"},
        {
            "type": "string",
            "description": NO_TOOL_DESCRIPTION,
        },
    ]
    compile_schema(schema)  # meta-validity is part of the contract
    return schema

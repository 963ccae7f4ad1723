"""schemascore: scoring and tooling for schema-constrained JSON generation.

Tolerant JSON/JSON5 lexing and parsing with byte-exact error offsets,
truncation repair, a draft-07-style schema validator with an error
taxonomy, token-level reward scoring with leave-one-out advantages and the
clipped policy objective, benchmark task generation, corpus curation, and
tool-to-schema conversion.  The lexer core has a compiled (Cython) fast
path with a pure-Python fallback selected at import; see
``schemascore.lexer.LEX_BACKEND``.
"""

from .escapes import StringDecodeError, decode_string, encode_string
from .instances import UnsatisfiableError, render_json, satisfying_instance
from .lexer import LEX_BACKEND, lex
from .parser import JsonNode, JsonTree, ParseFailure, parse, repair
from .reward import (
    ClipConfig,
    RewardScore,
    RolloutBatch,
    ScoreMode,
    combine_advantages,
    fine_grained_score,
    outcome_score,
    ppo_clip_term,
    rloo_advantages,
)
from .schema import (
    CompileError,
    CorpusStats,
    DirectoryResolver,
    MappingResolver,
    ResolverResult,
    ResolveStatus,
    SchemaDoc,
    compile_schema,
    corpus_stats,
    merge_external_refs,
    schema_depth,
)
from .curation import (
    DEFAULT_TEST_FRACTION,
    CurationOutcome,
    CurationRecord,
    SplitResult,
    curate,
    curate_one,
    report,
    split,
)
from .taskgen import (
    JudgeResult,
    Prompt,
    ReasoningKind,
    TaskInstance,
    TaskKind,
    gen_complex,
    gen_custom_formats,
    gen_escape,
    judge,
    self_test_response,
    wrap_reasoning,
)
from .tokens import Dialect, Token, TokenKind, TokenStream
from .toolconv import ToolDef, convert, normalize_types, pointer_escape
from .validator import (
    CustomRule,
    FailureCategory,
    RuleKind,
    Violation,
    check_custom,
    classify,
    inject_rule,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ClipConfig", "CompileError", "CorpusStats", "CurationOutcome",
    "CurationRecord", "CustomRule", "DEFAULT_TEST_FRACTION", "Dialect",
    "DirectoryResolver", "FailureCategory", "JsonNode", "JsonTree",
    "JudgeResult", "LEX_BACKEND", "MappingResolver", "ParseFailure",
    "Prompt", "ReasoningKind", "ResolveStatus", "ResolverResult",
    "RewardScore", "RolloutBatch", "RuleKind", "SchemaDoc", "ScoreMode",
    "SplitResult", "StringDecodeError", "TaskInstance", "TaskKind",
    "Token", "TokenKind", "TokenStream", "ToolDef", "UnsatisfiableError",
    "Violation", "check_custom", "classify", "combine_advantages",
    "compile_schema", "convert", "corpus_stats", "curate", "curate_one",
    "decode_string", "encode_string", "fine_grained_score", "gen_complex",
    "gen_custom_formats", "gen_escape", "inject_rule", "judge", "lex",
    "merge_external_refs", "normalize_types", "outcome_score", "parse",
    "pointer_escape", "ppo_clip_term", "render_json", "repair", "report",
    "rloo_advantages", "satisfying_instance", "schema_depth",
    "self_test_response", "split", "validate", "wrap_reasoning",
]

"""In-process scoring bindings for ML training loops.

A thin, batch-first layer over :mod:`schemascore` so the schema validator
can sit inside a rewarding phase without subprocess overhead: bind a schema
once, then score K-sized rollout batches against the shared immutable
handle.  Results are elementwise identical to the library's
``fine_grained_score`` and to the ``schemascore score`` CLI.

Handles are immutable and safe to share across threads.  When the compiled
scanner core is active, the byte-scanning phase of each score releases the
GIL, so caller threads overlap during lexing.
"""

from importlib.metadata import version as _dist_version

import schemascore as _core
from schemascore import (
    ClipConfig,
    RewardScore,
    SchemaDoc,
    ScoreMode,
    combine_advantages,
    fine_grained_score,
    outcome_score,
    ppo_clip_term,
    rloo_advantages,
    validate,
)
from schemascore import compile_schema as compile  # noqa: A001 - bound API name

__version__ = _dist_version("schemascore")
if __version__ != _core.__version__:  # pragma: no cover
    raise ImportError(
        f"schemascore-bindings {__version__} does not match schemascore {_core.__version__}"
    )

__all__ = [
    "BoundSchema",
    "bind_schema",
    "score_batch",
    "score_one",
    "compile",
    "validate",
    "fine_grained_score",
    "outcome_score",
    "rloo_advantages",
    "combine_advantages",
    "ppo_clip_term",
    "ClipConfig",
    "RewardScore",
    "ScoreMode",
    "__version__",
]


class BoundSchema:
    """Opaque immutable handle to a compiled schema."""

    __slots__ = ("_doc",)

    def __init__(self, doc: SchemaDoc):
        if not isinstance(doc, SchemaDoc):
            raise TypeError("BoundSchema wraps a compiled SchemaDoc")
        object.__setattr__(self, "_doc", doc)

    def __setattr__(self, name, value):
        raise AttributeError("BoundSchema handles are immutable")

    @property
    def doc(self) -> SchemaDoc:
        return self._doc


def bind_schema(schema) -> BoundSchema:
    """Compile (if needed) and wrap a schema for repeated batch scoring."""
    doc = schema if isinstance(schema, SchemaDoc) else compile(schema)
    return BoundSchema(doc)


def _require_handle(handle) -> SchemaDoc:
    if isinstance(handle, BoundSchema):
        return handle.doc
    raise TypeError(f"expected a BoundSchema handle, got {type(handle).__name__}")


def score_one(handle: BoundSchema, text, mode=ScoreMode.STRICT) -> dict:
    """Score a single response; convenience wrapper over score_batch."""
    return score_batch(handle, [text], mode)[0]


def score_batch(handle: BoundSchema, texts, mode=ScoreMode.STRICT) -> list:
    """Fine-grained scores for a batch of responses, in input order.

    Each element is ``{ratio, parse_ok, schema_ok, category}`` and equals
    the primary scorer's output for that text; one unparseable element
    never affects its neighbours.
    """
    doc = _require_handle(handle)
    mode = ScoreMode.coerce(mode)
    out = []
    for text in texts:
        score = fine_grained_score(text, doc, mode)
        out.append(
            {
                "ratio": score.ratio,
                "parse_ok": score.parse_ok,
                "schema_ok": score.schema_ok,
                "category": score.category.value if score.category else None,
            }
        )
    return out

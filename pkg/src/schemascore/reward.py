"""Reward mathematics for schema-constrained generation.

``fine_grained_score`` turns a generated string into a correctness ratio in
[0, 1]: the fraction of lexical tokens that survive parsing (with repair of
truncated output) and schema validation.  Tokens appended by repair inflate
the denominator only, so a repaired-but-otherwise-perfect response scores
strictly below 1.  ``rloo_advantages`` and ``ppo_clip_term`` implement the
leave-one-out advantage estimate and the clipped surrogate objective term
used by policy-gradient consumers; both are plain per-sample math with no
model code attached.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .lexer import lex
from .parser import ParseFailure, parse_stream, repair_failure
from .schema import SchemaDoc
from .tokens import Dialect, K_COMMENT, K_ERROR
from .validator import FailureCategory, classify, validate


class ScoreMode(enum.Enum):
    """STRICT scores plain JSON; TOS lexes JSON5 and ignores comment tokens,
    so interleaved reasoning comments neither help nor hurt the ratio."""

    STRICT = "strict"
    TOS = "tos"

    @classmethod
    def coerce(cls, value) -> "ScoreMode":
        if isinstance(value, ScoreMode):
            return value
        return cls(str(value).lower())


@dataclass
class RewardScore:
    ratio: float
    total_tokens: int
    correct_tokens: int
    padded_tokens: int
    parse_ok: bool
    schema_ok: bool
    category: FailureCategory | None = None

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "total_tokens": self.total_tokens,
            "correct_tokens": self.correct_tokens,
            "padded_tokens": self.padded_tokens,
            "parse_ok": self.parse_ok,
            "schema_ok": self.schema_ok,
            "category": self.category.value if self.category else None,
        }


def fine_grained_score(text, schema: SchemaDoc, mode=ScoreMode.STRICT) -> RewardScore:
    """Token-level correctness ratio of ``text`` against ``schema``.

    Pipeline: lex (JSON or JSON5 per mode); parse; on failure repair the
    truncation and re-parse, marking every original token at or after the
    error offset incorrect and counting repair closers in the denominator
    only; validate the resulting tree and mark each violating node's token
    span incorrect (for missing required members: the owning object's
    braces); ERROR tokens are always incorrect.  In TOS mode comment tokens
    are invisible to both numerator and denominator.
    """
    mode = ScoreMode.coerce(mode)
    dialect = Dialect.JSON5 if mode is ScoreMode.TOS else Dialect.JSON
    stream = lex(text, dialect)
    tokens = stream.tokens
    counted = [i for i, t in enumerate(tokens) if t.kind != K_COMMENT] if mode is ScoreMode.TOS else list(range(len(tokens)))

    result = parse_stream(stream, dialect)
    incorrect = {i for i in counted if tokens[i].kind == K_ERROR}
    if isinstance(result, ParseFailure):
        parse_ok = False
        rep = repair_failure(result)
        tree = rep.tree
        padded = rep.padded_token_count
        mapping = rep.kept_indices  # repaired stream position -> original index
        for i in counted:
            if tokens[i].start >= result.error_offset:
                incorrect.add(i)
        category = FailureCategory.PARSER_ERROR
    else:
        parse_ok = True
        tree = result
        padded = 0
        mapping = list(range(len(tokens)))
        category = None

    violations = validate(tree, schema)
    schema_ok = parse_ok and not violations
    if violations and category is None:
        category = classify(violations)
    n_mapped = len(mapping)
    for v in violations:
        node = v.node
        if node is None:
            continue
        if v.category is FailureCategory.REQUIRED_ERROR:
            span = (node.first, node.last)
        else:
            span = range(node.first, node.last + 1)
        for pos in span:
            if 0 <= pos < n_mapped:  # positions beyond are repair padding
                incorrect.add(mapping[pos])

    counted_set = set(counted)
    total = len(counted) + padded
    correct = len(counted_set) - len(incorrect & counted_set)
    ratio = correct / total if total > 0 else 0.0
    return RewardScore(
        ratio=ratio,
        total_tokens=total,
        correct_tokens=correct,
        padded_tokens=padded,
        parse_ok=parse_ok,
        schema_ok=schema_ok,
        category=category,
    )


def outcome_score(text, schema: SchemaDoc, mode=ScoreMode.STRICT) -> float:
    """Binary reward: 1.0 iff the text parses cleanly and validates."""
    mode = ScoreMode.coerce(mode)
    dialect = Dialect.JSON5 if mode is ScoreMode.TOS else Dialect.JSON
    result = parse_stream(lex(text, dialect), dialect)
    if isinstance(result, ParseFailure):
        return 0.0
    return 1.0 if not validate(result, schema) else 0.0


def rloo_advantages(rewards) -> list:
    """Leave-one-out advantages: A_i = r_i - mean of the other K-1 rewards."""
    rewards = [float(r) for r in rewards]
    k = len(rewards)
    if k < 2:
        raise ValueError("leave-one-out advantages need at least 2 rewards")
    total = sum(rewards)
    return [r - (total - r) / (k - 1) for r in rewards]


def combine_advantages(validator_adv, model_adv) -> list:
    """Elementwise sum of the validator and reward-model advantage streams."""
    if len(validator_adv) != len(model_adv):
        raise ValueError(f"advantage length mismatch: {len(validator_adv)} vs {len(model_adv)}")
    return [float(a) + float(b) for a, b in zip(validator_adv, model_adv)]


@dataclass
class ClipConfig:
    epsilon: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")


def ppo_clip_term(ratio: float, advantage: float, cfg: ClipConfig) -> float:
    """Clipped surrogate objective term: min(r*A, clip(r, 1-eps, 1+eps)*A).

    This is the per-sample objective value (the caller negates for a loss).
    """
    if ratio <= 0:
        raise ValueError(f"probability ratio must be positive, got {ratio}")
    clipped = min(max(ratio, 1.0 - cfg.epsilon), 1.0 + cfg.epsilon)
    return min(ratio * advantage, clipped * advantage)


@dataclass
class RolloutBatch:
    """K rollouts of one task with their reward streams and advantages.

    Advantages are the elementwise sum of the leave-one-out advantages of
    the validator rewards and of the (externally supplied) model rewards;
    each stream's advantages sum to zero up to float error.
    """

    responses: list
    validator_rewards: list
    model_rewards: list
    advantages: list = field(default_factory=list)

    @classmethod
    def from_rewards(cls, responses, validator_rewards, model_rewards=None) -> "RolloutBatch":
        k = len(responses)
        if k < 2:
            raise ValueError("a rollout batch needs K >= 2 responses")
        if len(validator_rewards) != k:
            raise ValueError("validator_rewards length must match responses")
        if model_rewards is None:
            model_rewards = [0.0] * k
        if len(model_rewards) != k:
            raise ValueError("model_rewards length must match responses")
        advantages = combine_advantages(rloo_advantages(validator_rewards), rloo_advantages(model_rewards))
        return cls(list(responses), list(validator_rewards), list(model_rewards), advantages)

"""Corpus curation: parse, merge external refs, meta-validate, split.

The pipeline never throws past a record: every document comes out as a
CurationRecord whose outcome says which stage kept or dropped it, so
|input| == |kept| + |dropped unresolvable| + |dropped meta-invalid| holds
by construction.  Reachability of external URIs is entirely the resolver's
verdict; there is no network access here.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .parser import ParseFailure, parse
from .schema import (
    CompileError,
    CorpusStats,
    ResolveStatus,
    compile_schema,
    corpus_stats,
    merge_external_refs,
)

# Train/test proportions of the reference corpus split (3,746 of 40,706).
DEFAULT_TEST_FRACTION = 3746 / 40706


class CurationOutcome(enum.Enum):
    KEPT = "kept"
    DROPPED_UNRESOLVABLE = "dropped_unresolvable"
    DROPPED_META_INVALID = "dropped_meta_invalid"


@dataclass
class CurationRecord:
    source_id: str
    outcome: CurationOutcome
    reasons: list = field(default_factory=list)
    final_schema: object = None  # merged document, present iff KEPT

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "outcome": self.outcome.value,
            "reasons": self.reasons,
            "final_schema": self.final_schema,
        }


def curate_one(source_id: str, text, resolver=None) -> CurationRecord:
    parsed = parse(text, "json")
    if isinstance(parsed, ParseFailure):
        return CurationRecord(
            source_id,
            CurationOutcome.DROPPED_META_INVALID,
            [f"not parseable as JSON (error at byte {parsed.error_offset})"],
        )
    doc = parsed.to_python()
    if not isinstance(doc, (dict, bool)):
        return CurationRecord(
            source_id,
            CurationOutcome.DROPPED_META_INVALID,
            [f"schema document must be an object or boolean, got {type(doc).__name__}"],
        )
    merged = merge_external_refs(doc, resolver)
    if merged.status is ResolveStatus.UNRESOLVABLE:
        return CurationRecord(
            source_id,
            CurationOutcome.DROPPED_UNRESOLVABLE,
            [f"inaccessible external URI: {uri}" for uri in merged.failed_uris],
        )
    source_len = len(text) if isinstance(text, str) else len(bytes(text))
    try:
        compile_schema(merged.merged_schema, source_len=source_len)
    except CompileError as exc:
        return CurationRecord(source_id, CurationOutcome.DROPPED_META_INVALID, [str(exc)])
    return CurationRecord(source_id, CurationOutcome.KEPT, [], merged.merged_schema)


def curate(corpus, resolver=None):
    """Curate an iterable of ``(source_id, text)`` pairs, in input order."""
    for source_id, text in corpus:
        yield curate_one(source_id, text, resolver)


@dataclass
class SplitResult:
    train: list
    test: list


def split(kept: list, test_fraction: float = DEFAULT_TEST_FRACTION, seed: int = 0) -> SplitResult:
    """Seeded uniform shuffle, then prefix split into test/train."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    items = list(kept)
    rng = random.Random(seed)
    rng.shuffle(items)
    n_test = int(round(len(items) * test_fraction))
    return SplitResult(train=items[n_test:], test=items[:n_test])


def report(kept: list) -> CorpusStats:
    """Corpus statistics over kept records (or pre-compiled SchemaDocs)."""
    docs = []
    for item in kept:
        if isinstance(item, CurationRecord):
            if item.outcome is not CurationOutcome.KEPT:
                raise ValueError(f"report expects kept records, got {item.outcome.value}")
            docs.append(compile_schema(item.final_schema))
        else:
            docs.append(item)
    return corpus_stats(docs)

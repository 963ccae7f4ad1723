"""Batch command-line interface over JSONL streams.

Every command reads and writes line-delimited JSON records and processes
them one at a time, so memory stays bounded by the largest record.
Malformed records are echoed with an ``error`` field and processing
continues.  Exit codes: 0 = ran to completion, 2 = usage error, 3 = I/O
error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .curation import CurationOutcome, curate_one
from .parser import ParseFailure, parse
from .reward import ClipConfig, ScoreMode, combine_advantages, fine_grained_score, ppo_clip_term, rloo_advantages
from .schema import CompileError, DirectoryResolver, compile_schema, corpus_stats
from .taskgen import TaskInstance, gen_complex, gen_custom_formats, gen_escape, judge as judge_task
from .toolconv import ToolDef, convert
from .validator import classify, validate


class IOFailure(click.ClickException):
    exit_code = 3


def _open_in(path):
    if path == "-":
        return sys.stdin
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(str(exc))


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout
    try:
        return open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(str(exc))


def _records(fh):
    """Yield (line_number, record_or_None, raw_line) for a JSONL stream."""
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line), line
        except ValueError:
            yield lineno, None, line


def _emit(out, record):
    out.write(json.dumps(record, ensure_ascii=False) + "\n")


def _load_schema(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(str(exc))
    tree = parse(text, "json")
    if isinstance(tree, ParseFailure):
        raise click.UsageError(f"schema file {path} is not valid JSON (error at byte {tree.error_offset})")
    try:
        return compile_schema(tree)
    except CompileError as exc:
        raise click.UsageError(f"schema file {path} does not compile: {exc}")


@click.group()
@click.version_option(package_name="schemascore")
def main():
    """Schema-constrained generation scoring toolkit."""


@main.command(name="validate")
@click.option("--schema", "schema_path", required=True, help="Schema file to validate against.")
@click.option("--input", "input_path", required=True, help="JSONL of {id, text} records ('-' for stdin).")
@click.option("--out", "out_path", default="-", help="Output JSONL (default stdout).")
@click.option("--tos", is_flag=True, help="Parse as JSON5 and ignore comments.")
def validate_cmd(schema_path, input_path, out_path, tos):
    """Emit a verdict record with failure category per input text."""
    schema = _load_schema(schema_path)
    dialect = "json5" if tos else "json"
    out = _open_out(out_path)
    with _open_in(input_path) as fh:
        for lineno, record, _raw in _records(fh):
            if record is None or "text" not in record:
                _emit(out, {"id": None if record is None else record.get("id"), "line": lineno, "error": "malformed record"})
                continue
            tree = parse(record["text"], dialect)
            if isinstance(tree, ParseFailure):
                _emit(out, {
                    "id": record.get("id"),
                    "valid": False,
                    "category": classify(tree).value,
                    "error_offset": tree.error_offset,
                })
                continue
            violations = validate(tree, schema)
            _emit(out, {
                "id": record.get("id"),
                "valid": not violations,
                "category": classify(violations).value if violations else None,
                "violations": [v.to_dict() for v in violations],
            })


@main.command(name="score")
@click.option("--schema", "schema_path", required=True, help="Schema file to score against.")
@click.option("--input", "input_path", required=True, help="JSONL of {id, text[, mode]} records.")
@click.option("--out", "out_path", default="-", help="Output JSONL (default stdout).")
@click.option("--tos", is_flag=True, help="Default mode: JSON5 with comments ignored.")
def score_cmd(schema_path, input_path, out_path, tos):
    """Emit fine-grained token-ratio reward records."""
    schema = _load_schema(schema_path)
    default_mode = ScoreMode.TOS if tos else ScoreMode.STRICT
    out = _open_out(out_path)
    with _open_in(input_path) as fh:
        for lineno, record, _raw in _records(fh):
            if record is None or "text" not in record:
                _emit(out, {"id": None if record is None else record.get("id"), "line": lineno, "error": "malformed record"})
                continue
            try:
                mode = ScoreMode.coerce(record.get("mode", default_mode))
            except ValueError:
                _emit(out, {"id": record.get("id"), "line": lineno, "error": f"unknown mode {record.get('mode')!r}"})
                continue
            score = fine_grained_score(record["text"], schema, mode)
            _emit(out, {"id": record.get("id"), **score.to_dict()})


@main.command(name="advantages")
@click.option("--input", "input_path", required=True, help="JSONL of {id, reward[, model_reward][, prob_ratio]}.")
@click.option("--out", "out_path", default="-", help="Output JSONL (default stdout).")
@click.option("--k", "group_k", required=True, type=int, help="Rollout group size (consecutive records).")
@click.option("--epsilon", type=float, default=None, help="Also emit the clipped objective term (needs prob_ratio).")
def advantages_cmd(input_path, out_path, group_k, epsilon):
    """Leave-one-out advantages over groups of K consecutive records."""
    if group_k < 2:
        raise click.UsageError("--k must be at least 2")
    cfg = ClipConfig(epsilon) if epsilon is not None else None
    out = _open_out(out_path)
    group = []

    def flush():
        rewards = [r.get("reward", 0.0) for _ln, r in group]
        models = [r.get("model_reward", 0.0) for _ln, r in group]
        advantages = combine_advantages(rloo_advantages(rewards), rloo_advantages(models))
        for (lineno, record), adv in zip(group, advantages):
            rec = {"id": record.get("id"), "advantage": adv}
            if cfg is not None and record.get("prob_ratio") is not None:
                rec["clip_term"] = ppo_clip_term(record["prob_ratio"], adv, cfg)
            _emit(out, rec)
        group.clear()

    with _open_in(input_path) as fh:
        for lineno, record, _raw in _records(fh):
            if record is None or not isinstance(record.get("reward"), (int, float)):
                _emit(out, {"id": None if record is None else record.get("id"), "line": lineno, "error": "malformed record"})
                continue
            group.append((lineno, record))
            if len(group) == group_k:
                flush()
    if group:
        for lineno, record in group:
            _emit(out, {"id": record.get("id"), "line": lineno, "error": f"incomplete trailing group of {len(group)} < k={group_k}"})


@main.command(name="taskgen")
@click.option("--kind", required=True, type=click.Choice(["complex", "custom", "escape"]))
@click.option("--schemas", "schemas_dir", required=True, help="Directory of schema .json files.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", "count", type=int, required=True, help="Number of task instances.")
@click.option("--out", "out_path", default="-", help="Output JSONL (default stdout).")
def taskgen_cmd(kind, schemas_dir, seed, count, out_path):
    """Generate benchmark task instances from a schema corpus."""
    root = Path(schemas_dir)
    if not root.is_dir():
        raise click.UsageError(f"--schemas {schemas_dir} is not a directory")
    docs = []
    for path in sorted(root.glob("*.json")):
        tree = parse(path.read_text(encoding="utf-8"), "json")
        if isinstance(tree, ParseFailure):
            continue
        try:
            docs.append((path.name, compile_schema(tree)))
        except CompileError:
            continue
    if not docs:
        raise click.UsageError(f"no compilable schemas found in {schemas_dir}")
    out = _open_out(out_path)
    made = 0
    index = 0
    while made < count:
        if index >= 4 * count + len(docs):  # corpus cannot host this kind
            raise click.UsageError(f"could not generate {count} {kind} tasks from {schemas_dir}")
        name, doc = docs[index % len(docs)]
        task_seed = seed + index
        index += 1
        try:
            if kind == "complex":
                task = gen_complex(doc)
            elif kind == "custom":
                task = gen_custom_formats(doc, task_seed)
            else:
                task = gen_escape(doc, task_seed)
        except ValueError:
            continue  # schema lacks usable string fields for this kind
        _emit(out, task.to_record(f"{kind}-{made:05d}"))
        made += 1


@main.command(name="judge")
@click.option("--tasks", "tasks_path", required=True, help="Task JSONL from `taskgen`.")
@click.option("--responses", "responses_path", required=True, help="JSONL of {id, text}.")
@click.option("--out", "out_path", default="-", help="Output JSONL (default stdout).")
@click.option("--tos", is_flag=True, help="Judge in JSON5 comment-tolerant mode.")
def judge_cmd(tasks_path, responses_path, out_path, tos):
    """Judge responses against their tasks (matched by id)."""
    tasks = {}
    with _open_in(tasks_path) as fh:
        for lineno, record, _raw in _records(fh):
            if record is None or "id" not in record:
                continue
            try:
                tasks[record["id"]] = TaskInstance.from_record(record)
            except (KeyError, ValueError, CompileError):
                continue
    mode = ScoreMode.TOS if tos else ScoreMode.STRICT
    out = _open_out(out_path)
    with _open_in(responses_path) as fh:
        for lineno, record, _raw in _records(fh):
            if record is None or "text" not in record:
                _emit(out, {"id": None if record is None else record.get("id"), "line": lineno, "error": "malformed record"})
                continue
            task = tasks.get(record.get("id"))
            if task is None:
                _emit(out, {"id": record.get("id"), "line": lineno, "error": "no task with this id"})
                continue
            verdict = judge_task(task, record["text"], mode)
            _emit(out, {
                "id": record.get("id"),
                "correct": verdict.correct,
                "category": verdict.category.value if verdict.category else None,
                "ratio": verdict.score.ratio,
            })


@main.command(name="curate")
@click.option("--input", "input_path", required=True, help="Directory of schema files or a JSONL of {id, text}.")
@click.option("--resolver", "resolver_dir", default=None, help="Directory resolving relative $ref URIs.")
@click.option("--out", "out_path", required=True, help="Output JSONL of curation records.")
def curate_cmd(input_path, resolver_dir, out_path):
    """Run the curation pipeline; a summary JSON is printed to stdout."""
    resolver = DirectoryResolver(resolver_dir) if resolver_dir else None
    out = _open_out(out_path)
    counts = {outcome: 0 for outcome in CurationOutcome}
    source = Path(input_path)
    if source.is_dir():
        pairs = ((p.name, p.read_text(encoding="utf-8")) for p in sorted(source.glob("*.json")))
    else:
        def pairs_from_jsonl():
            with _open_in(input_path) as fh:
                for lineno, record, raw in _records(fh):
                    if record is None or "text" not in record:
                        yield (f"line-{lineno}", raw if record is None else json.dumps(record))
                    else:
                        yield (str(record.get("id", f"line-{lineno}")), record["text"])

        pairs = pairs_from_jsonl()
    for source_id, text in pairs:
        record = curate_one(source_id, text, resolver)
        counts[record.outcome] += 1
        _emit(out, record.to_dict())
    summary = {outcome.value: count for outcome, count in counts.items()}
    summary["total"] = sum(counts.values())
    click.echo(json.dumps(summary))


@main.command(name="stats")
@click.option("--input", "input_path", required=True, help="JSONL: schema per line, or {id, schema} records.")
def stats_cmd(input_path):
    """Corpus statistics (means and <2K/<4K/<10K length buckets)."""
    docs = []
    with _open_in(input_path) as fh:
        for lineno, record, raw in _records(fh):
            if record is None:
                continue
            doc = record.get("schema") if isinstance(record, dict) and "schema" in record else record
            try:
                docs.append(compile_schema(doc, source_len=len(raw)))
            except CompileError:
                continue
    if not docs:
        raise click.UsageError("no compilable schemas in input")
    click.echo(json.dumps(corpus_stats(docs).to_dict()))


@main.command(name="convert-tools")
@click.option("--input", "input_path", required=True, help="JSONL of tool definitions {name, description, parameters}.")
@click.option("--out", "out_path", default="-", help="Output schema JSON (default stdout).")
def convert_tools_cmd(input_path, out_path):
    """Convert tool definitions into one dispatch schema document."""
    tools = []
    with _open_in(input_path) as fh:
        for lineno, record, _raw in _records(fh):
            if record is None or not record.get("name"):
                raise click.UsageError(f"line {lineno}: not a tool definition")
            tools.append(ToolDef.from_dict(record))
    try:
        schema = convert(tools)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    out = _open_out(out_path)
    out.write(json.dumps(schema, ensure_ascii=False, indent=2) + "\n")


if __name__ == "__main__":
    main()

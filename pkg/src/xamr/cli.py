"""Operator entry points: ingest, serve, batch extraction, evaluation, export.

Exit codes: 0 success, 2 input error, 3 partial failure. Diagnostics go to
stderr, data to stdout.
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

import click

from .annotations import load_annotations, save_annotations
from .config import load_config
from .corpus import (
    DEFAULT_DEV_TOPICS,
    ingest_corpus,
    load_corpus,
    load_manifest,
    save_corpus,
    save_manifest,
)
from .errors import XamrError
from .frames import load_frames
from .metrics import (
    acceptance_ratios,
    agreement,
    corpus_stats,
    gpt_accuracy,
    render_acceptance,
    render_agreement,
    render_gpt_accuracy,
    render_stats,
)
from .pipeline import CannedResponseClient, DecodingParams, HttpLlmClient, run_pipeline
from .store import decisions_to_annotations, load_decisions

INPUT_ERROR, PARTIAL_FAILURE = 2, 3


def _fail(message: str, code: int = INPUT_ERROR):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Corpus-level event annotation toolkit."""


@main.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(), help="Mention manifest JSONL to write.")
@click.option("--out-corpus", type=click.Path(), help="Optional full corpus JSON for the service.")
@click.option("--dev-topics", default=",".join(str(t) for t in sorted(DEFAULT_DEV_TOPICS)),
              show_default=True, help="Comma-separated dev topic ids within 1-35.")
def ingest(corpus_dir, out, out_corpus, dev_topics):
    """Ingest a corpus directory into a mention manifest plus split summary."""
    try:
        topics = [int(t) for t in dev_topics.split(",") if t.strip()]
        corpus = ingest_corpus(corpus_dir, topics)
    except (XamrError, ValueError) as e:
        _fail(str(e))
    save_manifest(corpus.mentions, out)
    if out_corpus:
        save_corpus(corpus, out_corpus)
    doc_counts = Counter()
    for doc in corpus.documents:
        split = next((m.split for m in corpus.mentions if m.topic_id == doc.topic_id), None)
        if split is None:
            from .corpus import assign_split

            split = assign_split(doc.topic_id, topics, {doc.topic_id})
        doc_counts[split] += 1
    mention_counts = Counter(m.split for m in corpus.mentions)
    for split in ("train", "dev", "test"):
        click.echo(f"{split}: {doc_counts[split]} documents, {mention_counts[split]} mentions", err=True)
    click.echo(f"wrote {len(corpus.mentions)} mentions to {out}", err=True)


@main.command("annotate-gpt")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path())
@click.option("--split", type=click.Choice(["train", "dev", "test"]), help="Restrict to one split.")
@click.option("--mock", "mock_dir", type=click.Path(exists=True, file_okay=False),
              help="Run against canned responses in this directory instead of a live endpoint.")
@click.option("--base-url", help="Chat-completion endpoint base URL.")
@click.option("--model", default="gpt-4", show_default=True)
@click.option("--cache", "cache_dir", type=click.Path(), help="Response cache directory; reruns are free.")
@click.option("--failures", "failures_path", type=click.Path(), help="Where to write the failures report (JSON).")
@click.option("--max-failure-frac", default=0.5, show_default=True,
              help="Exit 3 when the failed fraction exceeds this.")
@click.option("--parallelism", default=1, show_default=True)
@click.option("--temperature", default=0.0, show_default=True)
@click.option("--trace", is_flag=True, help="Log request/response bodies (API key redacted).")
def annotate_gpt(manifest, out, split, mock_dir, base_url, model, cache_dir, failures_path,
                 max_failure_frac, parallelism, temperature, trace):
    """Run the two-step extraction over a mention manifest."""
    mentions = load_manifest(manifest)
    if split:
        mentions = [m for m in mentions if m.split == split]
    if not mentions:
        _fail("no mentions selected")
    if mock_dir:
        client = CannedResponseClient(mock_dir)
    elif base_url:
        client = HttpLlmClient(base_url, model, trace=trace)
    else:
        _fail("either --mock or --base-url is required")
    result = run_pipeline(
        mentions,
        client,
        cache_dir=cache_dir,
        params=DecodingParams(temperature=temperature),
        parallelism=parallelism,
    )
    save_annotations(result.annotations, out)
    click.echo(
        f"{len(result.annotations)} annotations, {len(result.failures)} failures, "
        f"{result.client_calls} client calls",
        err=True,
    )
    if failures_path:
        Path(failures_path).write_text(
            json.dumps(
                [{"mention_id": f.mention_id, "stage": f.stage, "error": f.error} for f in result.failures],
                indent=1,
            ),
            encoding="utf-8",
        )
    failed_mentions = {f.mention_id for f in result.failures}
    if mentions and len(failed_mentions) / len(mentions) > max_failure_frac:
        _fail(f"{len(failed_mentions)}/{len(mentions)} mentions failed", PARTIAL_FAILURE)


@main.command("eval-gpt")
@click.option("--pred", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def eval_gpt(pred, gold, fmt):
    """Per-field accuracy of predicted annotations against adjudicated gold."""
    try:
        report = gpt_accuracy(load_annotations(pred), load_annotations(gold))
    except XamrError as e:
        _fail(str(e))
    click.echo(render_gpt_accuracy(report, fmt))


@main.command()
@click.option("--a", "path_a", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--b", "path_b", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def iaa(path_a, path_b, fmt):
    """Inter-annotator agreement on rolesets over commonly annotated mentions."""
    label_a = {x.mention_id: x.roleset for x in load_annotations(path_a)}
    label_b = {x.mention_id: x.roleset for x in load_annotations(path_b)}
    try:
        report = agreement(label_a, label_b)
    except XamrError as e:
        _fail(str(e))
    click.echo(render_agreement(report, fmt))


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True),
              help="Corpus JSON or corpus directory.")
@click.option("--annotations", "annotations_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--decisions", "decisions_path", type=click.Path(exists=True, dir_okay=False),
              help="Decision log; adds acceptance ratios to the report.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def stats(corpus_path, annotations_path, decisions_path, fmt):
    """Corpus statistics per split, optionally with acceptance ratios."""
    try:
        corpus_path = Path(corpus_path)
        corpus = ingest_corpus(corpus_path) if corpus_path.is_dir() else load_corpus(corpus_path)
        annotations = load_annotations(annotations_path) if annotations_path else []
    except XamrError as e:
        _fail(str(e))
    click.echo(render_stats(corpus_stats(corpus, annotations), fmt))
    if decisions_path:
        click.echo(render_acceptance(acceptance_ratios(load_decisions(decisions_path)), fmt))


@main.command()
@click.option("--decisions", "decisions_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path())
def export(decisions_path, out):
    """Derive the annotation JSONL from a decision log."""
    annotations = decisions_to_annotations(load_decisions(decisions_path))
    save_annotations(annotations, out)
    click.echo(f"wrote {len(annotations)} annotations to {out}", err=True)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def serve(config_path):
    """Run the annotation service from a YAML config file."""
    from .service import serve as run_serve

    try:
        config = load_config(config_path)
    except (XamrError, ValueError, TypeError) as e:
        _fail(str(e))
    run_serve(config)


@main.command("validate")
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--frames", "frames_path", required=True, type=click.Path(exists=True, file_okay=False))
def validate_cmd(annotations_path, frames_path):
    """Validate an annotation JSONL against a frame index."""
    from .annotations import validate_xamr

    index = load_frames(frames_path)
    bad = 0
    for x in load_annotations(annotations_path):
        violations = validate_xamr(x, index)
        for v in violations:
            click.echo(f"{x.mention_id}\t{v.code.value}\t{v.slot}\t{v.detail}")
        bad += bool(violations)
    click.echo(f"{bad} annotations with violations", err=True)
    if bad:
        sys.exit(PARTIAL_FAILURE)


if __name__ == "__main__":
    main()

"""Command-line entry points for the evaluation harness."""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import analytics, corpus as corpus_mod, engine, metrics, records, reporting
from .config import build_gateway, load_config
from .domain import QualityVector
from .prompts import (
    DemonstrationPool,
    build_benchmark_prompt,
    build_judge_prompt,
    build_reviewer_prompt,
)


def _load_pairs(path: str):
    pairs, manifest, rejects = corpus_mod.load_corpus(path)
    return pairs, manifest, rejects


def _load_pool(path: str) -> DemonstrationPool:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                data = json.loads(line)
                items.append((data["code"], data["comment"]))
    return DemonstrationPool(items=tuple(items))


@click.group()
def main():
    """Criterion-based evaluation harness for code review comment generators."""


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--rejects", "rejects_path", type=click.Path(), default=None)
@click.option("--name", default=None)
def ingest(in_path, out_path, rejects_path, name):
    """Load a corpus, normalize it to the canonical schema, report rejects."""
    pairs, manifest, rejects = corpus_mod.load_corpus(in_path, name=name)
    corpus_mod.store_corpus(pairs, out_path)
    if rejects_path:
        with open(rejects_path, "w", encoding="utf-8") as fh:
            for reject in rejects:
                fh.write(
                    json.dumps(
                        {"line": reject.line_number, "reason": reject.reason, "raw": reject.raw},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    click.echo(f"ingested {len(pairs)} pairs ({len(rejects)} rejects) -> {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--n", required=True, type=int)
@click.option("--seed", required=True, type=int)
def sample(in_path, out_path, n, seed):
    """Seeded uniform sample without replacement."""
    pairs, _, _ = _load_pairs(in_path)
    sampled, manifest = corpus_mod.sample_corpus(pairs, n, seed)
    corpus_mod.store_corpus(sampled, out_path)
    click.echo(f"sampled {n}/{len(pairs)} with seed {seed} -> {out_path}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--threshold", default=0.7, type=float, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def dedup(in_path, out_path, threshold, report_path):
    """Drop near-duplicate cases by ROUGE-L similarity of their code."""
    pairs, _, _ = _load_pairs(in_path)
    kept, report = metrics.dedup_by_rougeL(pairs, threshold)
    corpus_mod.store_corpus(kept, out_path)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(
                json.dumps({"threshold": report.threshold, "basis": report.basis}) + "\n"
            )
            for dropped_id, kept_id, score in report.dropped:
                fh.write(
                    json.dumps({"dropped": dropped_id, "kept": kept_id, "score": score}) + "\n"
                )
    click.echo(f"kept {len(kept)}/{len(pairs)} (dropped {len(report.dropped)}) -> {out_path}")


@main.group()
def prompt():
    """Prompt inspection."""


@prompt.command("preview")
@click.option("--kind", type=click.Choice(["judge", "benchmark", "reviewer"]), required=True)
@click.option("--case", "case_id", required=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--comments", "comment_paths", multiple=True, type=click.Path(exists=True))
@click.option("--pool", "pool_path", type=click.Path(exists=True), default=None)
@click.option("--order", type=click.Choice(["ascending", "descending"]), default="ascending")
@click.option("--k", default=3, type=int)
@click.option("--seed", default=0, type=int)
def prompt_preview(kind, case_id, corpus_path, comment_paths, pool_path, order, k, seed):
    """Render one prompt for inspection."""
    pairs, _, _ = _load_pairs(corpus_path)
    by_id = {p.id: p for p in pairs}
    if case_id not in by_id:
        raise click.ClickException(f"unknown case {case_id!r}")
    pair = by_id[case_id]
    if kind == "judge":
        merged = records.comments_by_case([records.load_comments(p) for p in comment_paths])
        blueprint = build_judge_prompt(pair.code, merged.get(case_id, []), order=order)
    elif kind == "benchmark":
        if not pair.reference_comment:
            raise click.ClickException(f"case {case_id!r} has no reference comment")
        blueprint = build_benchmark_prompt(pair.code, pair.reference_comment)
    else:
        pool = _load_pool(pool_path) if pool_path else None
        blueprint = build_reviewer_prompt(pair.code, pool, k=k, seed=seed)
    click.echo(blueprint.rendered)


@main.command()
@click.option("--generator", default="llm-reviewer", show_default=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--pool", "pool_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--k", default=3, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def generate(generator, corpus_path, pool_path, out_dir, k, seed, config_path):
    """Generate comments for every case with the few-shot reviewer."""
    if generator != "llm-reviewer":
        raise click.ClickException("only the llm-reviewer generator is built in")
    config = load_config(config_path)
    gateway = build_gateway(config)
    pairs, _, _ = _load_pairs(corpus_path)
    pool = _load_pool(pool_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = engine.RunStore(out / "generation.jsonl")
    comments = engine.run_generation(
        pairs, pool, gateway, store, k=k, seed=seed, model=config.provider.model
    )
    records.save_comments(comments, out / "comments.jsonl")
    click.echo(f"generated {len(comments)} comments -> {out / 'comments.jsonl'}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--comments", "comment_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--workers", default=1, type=int, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def evaluate(corpus_path, comment_paths, out_dir, workers, config_path):
    """Judge every case with dual-order passes and aggregate."""
    config = load_config(config_path)
    gateway = build_gateway(config)
    pairs, _, _ = _load_pairs(corpus_path)
    merged = records.comments_by_case([records.load_comments(p) for p in comment_paths])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = engine.RunStore(out / "results.jsonl")
    results, failures = engine.run_evaluation(
        pairs, merged, gateway, store, model=config.provider.model, workers=workers
    )
    click.echo(f"judged {len(results)} cases ({len(failures)} failures) -> {store.path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def audit(corpus_path, out_dir, config_path):
    """Score each case's own reference comment (benchmark audit)."""
    config = load_config(config_path)
    gateway = build_gateway(config)
    pairs, _, _ = _load_pairs(corpus_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = engine.RunStore(out / "audit.jsonl")
    annotation_records = engine.run_audit(
        pairs, gateway, store, model=config.provider.model
    )
    records.save_annotations(annotation_records, out / "annotations.jsonl")
    click.echo(f"audited {len(annotation_records)} cases -> {out / 'annotations.jsonl'}")


@main.command()
@click.option("--annotations", "annotation_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def agree(annotation_paths, out_path):
    """Per-criterion ICC agreement table (humans and LLMs vs reference)."""
    merged = [r for path in annotation_paths for r in records.load_annotations(path)]
    report = analytics.agreement_table(merged)
    payload = {
        "icc_variant": report.icc_variant,
        "subject_count": report.subject_count,
        "per_criterion": {k: list(v) for k, v in report.per_criterion.items()},
        "notes": list(report.notes),
    }
    Path(out_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    click.echo(f"agreement over {report.subject_count} subjects -> {out_path}")


@main.command()
@click.option("--annotations", "annotation_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--threshold", default=6.0, type=float, show_default=True)
def stats(annotation_path, out_path, threshold):
    """Quality means, low-quality fractions, and category distribution."""
    loaded = records.load_annotations(annotation_path)
    fractions = analytics.low_quality_fractions(loaded, threshold)
    means = {
        key: sum(r.quality[key] for r in loaded) / len(loaded)
        for key in fractions
    }
    payload = {"low_quality_threshold": threshold, "means": means, "low_quality": fractions}
    try:
        payload["categories"] = {
            c.value: f for c, f in analytics.category_distribution(loaded).items()
        }
    except ValueError:
        pass  # llm audit records carry no categories
    Path(out_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    click.echo(f"stats over {len(loaded)} records -> {out_path}")


@main.command()
@click.option("--annotations", "annotation_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quality-threshold", default=6.0, type=float, show_default=True)
def venn(annotation_path, out_path, quality_threshold):
    """16-region suitability overlap counts and the ideal fraction."""
    loaded = records.load_annotations(annotation_path)
    summary = analytics.venn_suitability(
        loaded, analytics.SuitabilityRule(quality_threshold=quality_threshold)
    )
    payload = {
        "regions": dict(summary.regions),
        "ideal_fraction": summary.ideal_fraction,
        "total": summary.total,
        "quality_threshold": summary.rule.quality_threshold,
    }
    Path(out_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    click.echo(f"venn over {summary.total} records -> {out_path}")


@main.command()
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["csv", "txt", "jsonl"]), default="csv")
def report(run_dir, fmt):
    """Render report tables from a run directory."""
    run = Path(run_dir)
    bundle = reporting.ReportBundle(metadata={"run_dir": str(run)})
    results_path = run / "results.jsonl"
    if results_path.exists():
        store = engine.RunStore(results_path)
        case_results = []
        for record in store.load():
            if record["type"] != "aggregate":
                continue
            case_results.append(
                engine.CaseResult(
                    case_id=record["case_id"],
                    scores={
                        g: QualityVector.from_list(v) for g, v in record["scores"].items()
                    },
                    ranks=record["ranking"],
                    verdicts=(),
                )
            )
        if case_results:
            computed = reporting.bundle_from_results(case_results, bundle.metadata)
            bundle.scoring = computed.scoring
            bundle.ranking = computed.ranking
    annotations_path = run / "annotations.jsonl"
    if annotations_path.exists():
        loaded = records.load_annotations(annotations_path)
        bundle.low_quality = analytics.low_quality_fractions(loaded)
        bundle.quality_means = {
            key: sum(r.quality[key] for r in loaded) / len(loaded)
            for key in bundle.low_quality
        }
    written = reporting.render(bundle, run / "reports", format=fmt)
    for path in written:
        click.echo(str(path))


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--comments", "comment_paths", multiple=True, type=click.Path(exists=True))
@click.option("--log-dir", "log_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, type=int, show_default=True)
def serve(corpus_path, comment_paths, log_dir, host, port):
    """Run the human-evaluation session service."""
    import uvicorn

    from .session import CaseContent, SessionService
    from .session.api import build_app

    pairs, _, _ = _load_pairs(corpus_path)
    merged = records.comments_by_case([records.load_comments(p) for p in comment_paths])
    cases = {
        p.id: CaseContent(
            case_id=p.id,
            code=p.code,
            reference_comment=p.reference_comment,
            comments=dict(merged.get(p.id, [])),
        )
        for p in pairs
    }
    service = SessionService(cases, log_dir=log_dir)
    uvicorn.run(build_app(service), host=host, port=port)


if __name__ == "__main__":
    main()

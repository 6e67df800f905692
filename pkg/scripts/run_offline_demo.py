#!/usr/bin/env python3
"""Run the whole harness offline against the deterministic mock provider.

Builds a small corpus, generates comments with the few-shot reviewer,
judges them with dual-order passes, audits the reference comments, and
renders the report tables. Everything lands under --out (default
./demo-run) and the run is reproducible bit-for-bit.
"""

import argparse
import random
from pathlib import Path

from crceval.corpus import store_corpus
from crceval.domain import CodeCommentPair
from crceval.engine import RunStore, run_audit, run_evaluation, run_generation
from crceval.gateway import Gateway, MockProvider
from crceval.mockjudge import synthetic_response
from crceval.prompts import DemonstrationPool
from crceval.records import save_annotations, save_comments
from crceval.reporting import bundle_from_results, render

SNIPPETS = [
    "public int divide(int a, int b) {{ return a / b; }}",
    "while (queue.size() > 0) {{ process(queue.peek()); }}",
    "String name = user.getName(); if (name.length() > {n}) trim(name);",
    "List<Integer> items = loadItems(); return items.get({n});",
    "Map<String, Long> cache; if (cache.containsKey(key)) return cache.get(key);",
]

REFERENCES = [
    "Handle the division-by-zero case before dividing.",
    "peek() without poll() makes this loop spin forever.",
    "getName() may return null; check before calling length().",
    "The list can be shorter than the index; validate first.",
    "Use a single get() and compare against null instead of two lookups.",
]


def build_corpus(n: int, seed: int) -> list[CodeCommentPair]:
    rng = random.Random(seed)
    pairs = []
    for i in range(n):
        j = i % len(SNIPPETS)
        pairs.append(
            CodeCommentPair(
                id=f"demo-{i:03d}",
                dataset="demo",
                language="java",
                code=SNIPPETS[j].format(n=rng.randint(1, 40)),
                reference_comment=REFERENCES[j],
            )
        )
    return pairs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo-run", type=Path)
    parser.add_argument("--cases", default=10, type=int)
    parser.add_argument("--seed", default=42, type=int)
    args = parser.parse_args()

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus(args.cases, args.seed)
    store_corpus(corpus, out / "corpus.jsonl")

    gateway = Gateway(MockProvider(fallback=synthetic_response))
    pool = DemonstrationPool(
        items=(
            ("int total = a + b + c;", "Consider overflow for large inputs."),
            ("file.open(); read(file);", "Close the file handle on every path."),
            ("return data[idx];", "idx is unchecked; guard the bounds."),
        )
    )

    generated = run_generation(
        corpus, pool, gateway, RunStore(out / "generation.jsonl"), k=3, seed=args.seed
    )
    save_comments(generated, out / "comments.jsonl")
    print(f"generated {len(generated)} reviewer comments")

    comments_by_case = {
        case.id: [
            ("llm-reviewer", comment.text),
            ("baseline-template", f"Please double-check {case.id}."),
        ]
        for case, comment in zip(corpus, generated)
    }
    results, failures = run_evaluation(
        corpus, comments_by_case, gateway, RunStore(out / "results.jsonl"), workers=4
    )
    print(f"judged {len(results)} cases ({len(failures)} failures)")

    audits = run_audit(corpus, gateway, RunStore(out / "audit.jsonl"))
    save_annotations(audits, out / "annotations.jsonl")
    print(f"audited {len(audits)} reference comments")

    bundle = bundle_from_results(results, metadata={"seed": args.seed, "cases": args.cases})
    written = render(bundle, out / "reports", format="txt")
    print("reports:")
    for path in written:
        print(f"  {path}")
    print((out / "reports" / "ranking.txt").read_text(), end="")


if __name__ == "__main__":
    main()

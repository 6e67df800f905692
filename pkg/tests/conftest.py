import random

import pytest

from crceval.domain import CodeCommentPair
from crceval.gateway import CostLedger, Gateway, MockProvider
from crceval.mockjudge import synthetic_response
from crceval.prompts import DemonstrationPool


@pytest.fixture
def offline_gateway():
    return Gateway(MockProvider(fallback=synthetic_response), ledger=CostLedger())


@pytest.fixture
def demo_pool():
    return DemonstrationPool(
        items=(
            ("int a = 1 / b;", "Guard against b being zero before dividing."),
            ("if (s == t)", "Use equals() to compare strings, not ==."),
            ("catch (Exception e) {}", "Do not swallow exceptions silently."),
            ("FileReader r = new FileReader(p);", "Close the reader in a finally block."),
            ("for (;;) {}", "This loop never terminates; add an exit condition."),
        )
    )


def make_corpus(n: int, dataset: str = "fixture", with_reference: bool = True, seed: int = 0):
    rng = random.Random(seed)
    snippets = [
        "public void m%d() { int x = %d; while (x > 0) { x += %d; } }",
        "Map<String,Integer> m%d; if (m%d.containsKey(k)) { return m%d.get(k); }",
        "String s%d = null; if (s%d.length() > %d) { return; }",
        "List<Integer> l%d = new ArrayList<>(); l%d.get(%d);",
    ]
    comments = [
        "This loop may never terminate; revisit the increment.",
        "Use a single map lookup instead of containsKey plus get.",
        "Possible null dereference; check before calling length().",
        "Index may be out of bounds for an empty list.",
        "why do we need this",
        "Remove this line.",
    ]
    pairs = []
    for i in range(n):
        template = snippets[i % len(snippets)]
        code = template.replace("%d", str(i + rng.randint(0, 9)))
        pairs.append(
            CodeCommentPair(
                id=f"case-{i:04d}",
                dataset=dataset,
                language="java",
                code=code,
                reference_comment=comments[i % len(comments)] if with_reference else None,
            )
        )
    return pairs

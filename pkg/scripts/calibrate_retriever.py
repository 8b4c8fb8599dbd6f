"""One-off oracle run: score the fixture queries against the shipped repo.

Prints the full candidate ranking for each probe query so threshold and
argmax values can be frozen into the golden tests. Not part of the test
suite; rerun after editing data/goals.yaml.
"""

from __future__ import annotations

from pathlib import Path

from goalflow.goals import load_repository
from goalflow.retriever import build_index, match

ROOT = Path(__file__).resolve().parent.parent

PROBES = [
    "How to perform data hygiene to delete duplicate audience segments?",
    "List the duplicate segments for me.",
    "What is the weather today?",
    "I need to create a support ticket",
    "How do I detect duplicate segments?",
    "delete the non-essential segments",
]


def main() -> None:
    repo = load_repository(ROOT / "data" / "goals.yaml")
    index = build_index(repo)
    print(f"targets: {len(index)}")
    for i, t in enumerate(index.targets):
        print(f"  [{i}] {t.goal_id}/{t.step_index}: {t.text[:60]}")
    for query in PROBES:
        result = match(index, query)
        print(f"\nQ: {query}")
        print(f"  -> {result.kind.value} goal={result.goal_id} step={result.step_index} "
              f"lex={result.lexical_score:.4f} sem={result.semantic_score:.4f} comb={result.combined_score:.4f}")
        for c in result.candidates[:4]:
            print(f"     {c.combined:.4f} (lex {c.lexical:.4f} sem {c.semantic:.4f}) "
                  f"{c.target.goal_id}/{c.target.step_index}")


if __name__ == "__main__":
    main()

"""End-to-end CLI runs whose outputs are frozen under tests/golden.

Run this file directly to regenerate the golden files after an
intentional output change:

    python tests/golden_pipeline.py
"""

from __future__ import annotations

import shutil
import sys
from pathlib import Path

from tagnet.cli import main

HERE = Path(__file__).resolve().parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"

FIXTURE_FILES = (
    "posts.jsonl",
    "filter_report.json",
    "normalization_report.json",
    "graph.json",
    "graph.graphml",
    "graph.dot",
    "centrality.csv",
    "centrality.json",
    "communities.json",
    "summary.txt",
    "network.svg",
)
TRIANGLE_FILES = (
    "centrality.csv",
    "centrality.json",
    "communities.json",
    "summary.txt",
    "network.svg",
)


def run_fixture_pipeline(out: Path) -> list[int]:
    out = str(out)
    return [
        main([
            "ingest", str(DATA / "fixture_posts.jsonl"),
            "--query", "greatbarrierreef", "granbarreradecoral",
            "--blocklist", str(DATA / "blocklist.txt"),
            "--translations", str(DATA / "translations.tsv"),
            "--output-dir", out,
        ]),
        main(["graph", "--query", "greatbarrierreef", "--graphml", "--dot", "--output-dir", out]),
        main(["analyze", "--output-dir", out]),
        main(["plot", "--seed", "0", "--title", "greatbarrierreef", "--output-dir", out]),
    ]


def run_triangle_pipeline(out: Path) -> list[int]:
    out = str(out)
    return [
        main(["analyze", str(DATA / "two_triangles.json"), "--output-dir", out]),
        main(["plot", str(DATA / "two_triangles.json"), "--seed", "1", "--output-dir", out]),
    ]


def run_three_post_graph(out: Path) -> list[int]:
    return [main(["graph", str(DATA / "three_posts.jsonl"), "--query", "greatbarrierreef",
                  "--output-dir", str(out)])]


PIPELINES = {
    "fixture": (run_fixture_pipeline, FIXTURE_FILES),
    "two_triangles": (run_triangle_pipeline, TRIANGLE_FILES),
    "three_posts": (run_three_post_graph, ("graph.json",)),
}


def regenerate() -> None:
    tmp = GOLDEN / "_tmp"
    for name, (run, files) in PIPELINES.items():
        shutil.rmtree(tmp, ignore_errors=True)
        codes = run(tmp)
        if any(codes):
            sys.exit(f"{name}: pipeline failed with exit codes {codes}")
        dest = GOLDEN / name
        dest.mkdir(parents=True, exist_ok=True)
        for f in files:
            shutil.copyfile(tmp / f, dest / f)
    shutil.rmtree(tmp, ignore_errors=True)


if __name__ == "__main__":
    regenerate()

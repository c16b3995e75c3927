#!/usr/bin/env python3
"""Walk the CLI end to end on a small synthetic corpus.

Writes every intermediate artifact into an output directory so the file
formats are easy to inspect: synthesized records, the TI/stream split,
step-1 clusters/rules/embeddings, step-2 detections, and the per-cluster
analysis reports.
"""
from __future__ import annotations

import argparse
import json
from collections import Counter, defaultdict
from pathlib import Path

from gsdetect.cli import main as gsdetect

TEMPLATES = [
    {"brand": "lumipay", "technique": "combo", "tlds": [".com", ".net"],
     "count": 12, "seed": 11},
    {"brand": "vextabank", "technique": "typo", "tlds": [".com", ".icu"],
     "count": 12, "seed": 22},
    {"brand": "orbimail", "technique": "deceptive_subdomain", "tlds": [".top"],
     "count": 12, "seed": 33},
]


def run(argv: list[str]) -> None:
    print("$ gsdetect " + " ".join(argv), flush=True)
    code = gsdetect(argv)
    if code != 0:
        raise SystemExit(f"gsdetect {argv[0]} exited {code}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("demo-out"))
    parser.add_argument("--eps", type=float, default=0.575)
    args = parser.parse_args(argv)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    templates = out / "templates.ldjson"
    templates.write_text("".join(json.dumps(t) + "\n" for t in TEMPLATES))
    corpus = out / "corpus.ldjson"
    run(["synth", "--templates", str(templates), "--benign", "10",
         "--seed", "7", "--out", str(corpus)])

    by_brand = defaultdict(list)
    stream_lines = []
    for line in corpus.read_text().splitlines():
        record = json.loads(line)
        if record["brand"] is None:
            stream_lines.append(line)
        else:
            by_brand[record["brand"]].append(line)
    ti_lines = []
    for brand_lines in by_brand.values():
        n_ti = round(0.7 * len(brand_lines))
        ti_lines.extend(brand_lines[:n_ti])
        stream_lines.extend(brand_lines[n_ti:])
    ti = out / "ti.ldjson"
    ti.write_text("".join(line + "\n" for line in ti_lines))
    new = out / "new.ldjson"
    new.write_text("".join(line + "\n" for line in stream_lines))
    print(f"split: {len(ti_lines)} TI records, {len(stream_lines)} stream records")

    clusters = out / "clusters.ldjson"
    rules = out / "rules.json"
    embeddings = out / "embeddings.ldjson"
    run(["step1", "--ti", str(ti), "--eps", str(args.eps),
         "--clusters", str(clusters), "--rules", str(rules),
         "--embeddings", str(embeddings)])

    detections = out / "detections.ldjson"
    run(["step2", "--new", str(new), "--eps", str(args.eps),
         "--clusters", str(clusters), "--rules", str(rules),
         "--embeddings", str(embeddings), "--out", str(detections)])

    reports = out / "reports.ldjson"
    run(["analyze", "--clusters", str(clusters), "--meta", str(ti),
         "--out", str(reports)])

    verdicts = Counter(
        json.loads(line)["verdict"] for line in detections.read_text().splitlines()
    )
    print(f"verdicts: {dict(verdicts)}")
    print(f"artifacts in {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

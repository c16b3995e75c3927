#!/usr/bin/env python3
"""Synthetic end-to-end evaluation of the detection pipeline.

Generates squatting clusters for a set of fictitious brands, splits
each cluster into a threat-intel snapshot (references) and a held-out
stream, calibrates the clustering radius on a validation brand split by
maximizing F1, then reports recall and false-positive rate on the
remaining brands plus a benign background stream.
"""
from __future__ import annotations

import argparse
import sys
import time
from importlib import resources

import numpy as np

from gsdetect.clustering import run_step1
from gsdetect.detector import Mode, Verdict, build_index, query
from gsdetect.domains import load_psl
from gsdetect.embedding import ReferenceEmbedder, TokenVocabulary
from gsdetect.ingest import IngestRecord, Source
from gsdetect.synth import SynthTemplate, Technique, synthesize_benign, synthesize_cluster


def bundled_brands() -> list[str]:
    text = resources.files("gsdetect.data").joinpath("brands.txt").read_text()
    return [line.strip() for line in text.splitlines()
            if line.strip() and not line.startswith("#")]


class CachedEmbedder:
    """Embeds every name once up front; the sweep then reuses rows."""

    def __init__(self, embedder, fqdns: list[str]):
        matrix = embedder.embed_batch(fqdns)
        self.rows = {fqdn: matrix[i] for i, fqdn in enumerate(fqdns)}

    def embed_batch(self, fqdns):
        return np.array([self.rows[f] for f in fqdns])


def detect_rates(eps, ti, positives, negatives, cached):
    records = [IngestRecord(domain=d, source=Source.TI) for d in ti]
    step1 = run_step1(records, cached, eps=eps, min_pts=3)
    if not step1.clusters:
        return 0, 0
    index = build_index(step1.clusters, step1.reference_vectors,
                        t=1.0 - eps, k=2, mode=Mode.EXACT)

    def hits(domains):
        return sum(
            query(index, cached.rows[d.fqdn], d).verdict is Verdict.GSD
            for d in domains
        )

    return hits(positives), hits(negatives)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--brands", type=int, default=25,
                        help="number of brands (4 techniques each)")
    parser.add_argument("--val-brands", type=int, default=5,
                        help="brands reserved for eps calibration")
    parser.add_argument("--count", type=int, default=24,
                        help="members per synthetic cluster")
    parser.add_argument("--ti-fraction", type=float, default=0.7,
                        help="fraction of each cluster placed in the TI snapshot")
    parser.add_argument("--benign", type=int, default=10000,
                        help="benign domains per stream")
    parser.add_argument("--eps-min", type=float, default=0.30)
    parser.add_argument("--eps-max", type=float, default=0.75)
    parser.add_argument("--eps-step", type=float, default=0.025)
    args = parser.parse_args(argv)

    started = time.perf_counter()
    psl = load_psl()
    brands = bundled_brands()
    if len(brands) < args.brands:
        print(f"only {len(brands)} bundled brands available", file=sys.stderr)
        return 2
    brands = brands[:args.brands]
    n_ti = round(args.ti_fraction * args.count)

    members_by_brand = {
        brand: [
            synthesize_cluster(
                SynthTemplate(brand=brand, technique=tech,
                              tld_pool=(".com", ".net", ".icu", ".top"),
                              count=args.count, seed=1000 * t_idx + b_idx),
                psl,
            )
            for t_idx, tech in enumerate(Technique)
        ]
        for b_idx, brand in enumerate(brands)
    }

    def split(brand_group):
        ti, stream = [], []
        for brand in brand_group:
            for members in members_by_brand[brand]:
                ti.extend(members[:n_ti])
                stream.extend(members[n_ti:])
        return ti, stream

    val_ti, val_stream = split(brands[:args.val_brands])
    test_ti, test_stream = split(brands[args.val_brands:])
    val_benign = synthesize_benign(args.benign, seed=999, psl=psl)
    test_benign = synthesize_benign(args.benign, seed=31337, psl=psl)

    pools = (val_ti, val_stream, val_benign, test_ti, test_stream, test_benign)
    names = sorted({d.fqdn for pool in pools for d in pool})
    cached = CachedEmbedder(ReferenceEmbedder(vocab=TokenVocabulary.default()), names)
    print(f"corpus: {len(names)} unique domains, "
          f"{len(val_ti)}/{len(val_stream)} val TI/stream, "
          f"{len(test_ti)}/{len(test_stream)} test TI/stream")

    steps = round((args.eps_max - args.eps_min) / args.eps_step)
    grid = [round(args.eps_min + args.eps_step * i, 6) for i in range(steps + 1)]
    print("eps\tval_tp\tval_fp\tval_f1")
    best_f1, best_eps = -1.0, None
    for eps in grid:
        tp, fp = detect_rates(eps, val_ti, val_stream, val_benign, cached)
        fn = len(val_stream) - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn)
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        print(f"{eps:g}\t{tp}\t{fp}\t{f1:.4f}")
        if f1 > best_f1:
            best_f1, best_eps = f1, eps

    tp, fp = detect_rates(best_eps, test_ti, test_stream, test_benign, cached)
    elapsed = time.perf_counter() - started
    print(f"calibrated eps={best_eps:g} (val F1 {best_f1:.4f})")
    print(f"test recall={tp / len(test_stream):.4f} "
          f"fpr={fp / len(test_benign):.5f} ({elapsed:.1f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Single-process throughput benchmark for the detection path.

Measures parse+filter, embedding, and exact-query stage rates at a
reduced scale, then projects the full workload (by default 100,000 new
domains against 50,000 references). Query cost scales linearly with the
reference count, so the projection multiplies the measured per-query
time by the reference ratio.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gsdetect.clustering import Cluster
from gsdetect.detector import Mode, build_index, query
from gsdetect.domains import load_psl, parse_fqdn
from gsdetect.embedding import ReferenceEmbedder, TokenVocabulary
from gsdetect.prefilter import filter_domain
from gsdetect.synth import synthesize_benign


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--new", type=int, default=2000,
                        help="new domains to measure with")
    parser.add_argument("--refs", type=int, default=5000,
                        help="reference vectors to measure with")
    parser.add_argument("--project-new", type=int, default=100_000)
    parser.add_argument("--project-refs", type=int, default=50_000)
    args = parser.parse_args(argv)

    psl = load_psl()
    embedder = ReferenceEmbedder(vocab=TokenVocabulary.default())
    new_names = [d.fqdn for d in synthesize_benign(args.new, seed=4242, psl=psl)]

    t0 = time.perf_counter()
    parsed = [parse_fqdn(n, psl) for n in new_names]
    kept = [d for d in parsed if filter_domain(d).keep]
    t_filter = time.perf_counter() - t0

    t0 = time.perf_counter()
    vectors = embedder.embed_batch([d.fqdn for d in kept])
    t_embed = time.perf_counter() - t0

    rng = np.random.default_rng(5150)
    n_clusters = args.refs // 4
    clusters, rows = [], []
    for c in range(n_clusters):
        members = tuple(parse_fqdn(f"ref{c:05d}m{j}.test", psl) for j in range(4))
        clusters.append(Cluster(cluster_id=c, members=members, rule=None))
        for _ in members:
            v = rng.normal(size=embedder.dim)
            rows.append(v / np.linalg.norm(v))
    index = build_index(clusters, np.array(rows), t=0.96, k=2, mode=Mode.EXACT)

    t0 = time.perf_counter()
    for domain, vec in zip(kept, vectors):
        query(index, vec, domain)
    t_query = time.perf_counter() - t0

    n = len(kept)
    refs = 4 * n_clusters
    scale_new = args.project_new / n
    scale_refs = args.project_refs / refs
    projected = (t_filter + t_embed) * scale_new + t_query * scale_new * scale_refs
    print(f"measured on {n} new domains vs {refs} references:")
    print(f"  parse+filter {n / t_filter:,.0f}/s")
    print(f"  embed        {n / t_embed:,.0f}/s")
    print(f"  exact query  {n / t_query:,.0f}/s")
    print(f"projected {args.project_new:,} new vs {args.project_refs:,} refs: "
          f"{projected:,.0f}s single-core")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

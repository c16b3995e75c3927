"""Command-line orchestration of the pipeline.

One-shot subcommands bind the modules to files; scheduling (daily
Step 1 over the TI lookback window, Step 2 per new-domain batch) is the
host scheduler's job.

Exit codes: 0 success, 2 configuration or input error, 3 empty
reference set after Step-1 filtering/clustering, 4 missing or unusable
Step-1 artifacts in Step 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import files
from .analytics import analyze_clusters, eval_sweep, sweep_to_tsv
from .clustering import run_step1
from .config import PipelineConfig, build_config, make_embedder
from .detector import Mode, build_index, run_step2
from .domains import load_psl, parse_fqdn
from .errors import (
    ConfigError,
    DegenerateLabels,
    EmptyInput,
    EmptyReferenceSet,
    ImpossibleTemplate,
    MalformedRecord,
    PipelineError,
    UnsortedInput,
)
from .ingest import (
    IngestRecord,
    SeenSet,
    Source,
    diff_zone,
    ingest_ct,
    ingest_pdns,
    load_ti,
)
from .prefilter import FilterReason, filter_domain
from .synth import SynthTemplate, Technique, synthesize_benign, synthesize_cluster

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EMPTY_REFERENCES = 3
EXIT_MISSING_ARTIFACTS = 4


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    flags = {
        "eps": getattr(args, "eps", None),
        "min_pts": getattr(args, "min_pts", None),
        "threshold": getattr(args, "threshold", None),
        "k": getattr(args, "k", None),
        "embedder": getattr(args, "embedder", None),
        "psl_path": getattr(args, "psl", None),
        "clusters_path": getattr(args, "clusters", None),
        "rules_path": getattr(args, "rules", None),
        "embeddings_path": getattr(args, "embeddings", None),
        "out_path": getattr(args, "out", None),
        "mode": getattr(args, "mode", None),
        "seed": getattr(args, "seed", None),
    }
    return build_config(flags)


def _read_lines(path: str) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _load_ti_or_records(paths, psl, stats) -> list[IngestRecord]:
    """TI inputs are either raw feed lines or already-ingested record
    lines; sniff per file on the first non-blank line."""
    records: list[IngestRecord] = []
    for path in paths:
        lines = _read_lines(path)
        head = next((ln for ln in lines if ln.strip()), "")
        if head.lstrip().startswith("{"):
            for line in lines:
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(files.record_from_line(line, psl))
                except MalformedRecord:
                    stats["malformed_records"] = stats.get("malformed_records", 0) + 1
        else:
            records.extend(load_ti(lines, psl, stats))
    return records


def cmd_step1(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    for name in ("clusters_path", "rules_path", "embeddings_path"):
        if getattr(config, name) is None:
            raise ConfigError(f"step1 requires --{name.removesuffix('_path')}")
    if not args.ti:
        raise ConfigError("step1 requires at least one --ti file")
    psl = load_psl(config.psl_path)
    embedder = make_embedder(config)
    stats: dict = {}
    records = _load_ti_or_records(args.ti, psl, stats)
    try:
        result = run_step1(records, embedder, eps=config.eps, min_pts=config.min_pts)
    except EmptyInput:
        print("error: no domains left after filtering", file=sys.stderr)
        return EXIT_EMPTY_REFERENCES
    if not result.reference_domains:
        print("error: clustering produced an empty reference set", file=sys.stderr)
        return EXIT_EMPTY_REFERENCES
    files.write_clusters(config.clusters_path, result.clusters)
    files.write_rules(config.rules_path, result.clusters)
    from .adapters import write_embedding_file

    write_embedding_file(
        config.embeddings_path,
        [d.fqdn for d in result.reference_domains],
        result.reference_vectors,
        model=embedder.model_name,
    )
    s = result.stats
    print(
        f"step1: input={s['input']} filtered={s['input'] - s['kept_after_filter']} "
        f"unique={s['unique']} clustered={s['clustered']} noise={s['noise']} "
        f"clusters={s['clusters']}",
        file=sys.stderr,
    )
    return EXIT_OK


def _new_domain_records(paths, psl, stats) -> list[IngestRecord]:
    """New-domain inputs: IngestRecord lines or bare FQDNs, one per line."""
    records: list[IngestRecord] = []
    for path in paths:
        for line in _read_lines(path):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                if line.startswith("{"):
                    records.append(files.record_from_line(line, psl))
                else:
                    records.append(
                        IngestRecord(domain=parse_fqdn(line, psl), source=Source.TI)
                    )
            except (MalformedRecord, PipelineError):
                stats["malformed_records"] = stats.get("malformed_records", 0) + 1
    return records


def cmd_step2(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    for name in ("clusters_path", "rules_path", "embeddings_path", "out_path"):
        if getattr(config, name) is None:
            raise ConfigError(f"step2 requires --{name.removesuffix('_path')}")
    if not args.new:
        raise ConfigError("step2 requires at least one --new file")
    for path in (config.clusters_path, config.rules_path, config.embeddings_path):
        if not Path(path).exists():
            print(f"error: missing Step-1 artifact: {path}", file=sys.stderr)
            return EXIT_MISSING_ARTIFACTS
    psl = load_psl(config.psl_path)
    from .adapters import FileEmbedder
    from .errors import AdapterUnavailable, MissingEmbedding

    try:
        rules = files.read_rules(config.rules_path)
        clusters = files.read_clusters(config.clusters_path, psl, rules)
        reference = FileEmbedder(config.embeddings_path)
        vectors = reference.embed_batch(
            [m.fqdn for c in clusters for m in c.members]
        )
        index = build_index(
            clusters,
            vectors,
            t=config.resolved_threshold(),
            k=config.k,
            mode=Mode(config.mode),
        )
    except (MalformedRecord, AdapterUnavailable, MissingEmbedding,
            EmptyReferenceSet, PipelineError) as exc:
        print(f"error: unusable Step-1 artifacts: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACTS
    embedder = make_embedder(config)
    stats: dict = {}
    records = _new_domain_records(args.new, psl, stats)
    counts = files.write_detections(config.out_path, run_step2(records, index, embedder))
    summary = " ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "empty=0"
    malformed = stats.get("malformed_records", 0)
    print(f"step2: {summary} malformed={malformed}", file=sys.stderr)
    return EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    psl = load_psl(args.psl)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for path in args.inputs:
            for line in _read_lines(path):
                raw = line.strip()
                if not raw or raw.startswith("#"):
                    continue
                try:
                    name = parse_fqdn(raw, psl)
                except PipelineError:
                    out.write(f"{raw}\tdrop\tmalformed\n")
                    continue
                verdict = filter_domain(name)
                if verdict.keep:
                    out.write(f"{name.fqdn}\tkeep\n")
                else:
                    out.write(f"{name.fqdn}\tdrop\t{verdict.reason.value.lower()}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _write_records(out_path: str | None, records) -> int:
    count = 0
    out = open(out_path, "w") if out_path else sys.stdout
    try:
        for record in records:
            out.write(record.to_json_line() + "\n")
            count += 1
    finally:
        if out is not sys.stdout:
            out.close()
    return count


def cmd_ingest(args: argparse.Namespace) -> int:
    psl = load_psl(args.psl)
    stats: dict = {}
    if args.source == "zone":
        if not (args.today and args.yesterday):
            raise ConfigError("zone ingestion requires --today and --yesterday")
        ts = args.ts or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

        def zone_records():
            for e2ld in diff_zone(_read_lines(args.today), _read_lines(args.yesterday)):
                try:
                    domain = parse_fqdn(e2ld, psl)
                except PipelineError:
                    stats["malformed_records"] = stats.get("malformed_records", 0) + 1
                    continue
                yield IngestRecord(domain=domain, source=Source.ZONE, first_seen=ts)

        count = _write_records(args.out, zone_records())
    else:
        if not args.inputs:
            raise ConfigError(f"{args.source} ingestion requires input files")
        lines = [ln for path in args.inputs for ln in _read_lines(path)]
        if args.source == "ti":
            count = _write_records(args.out, load_ti(lines, psl, stats))
        else:
            if not args.seen:
                raise ConfigError(f"{args.source} ingestion requires --seen")
            with SeenSet(args.seen, ttl_seconds=args.ttl_seconds,
                         approximate=args.approximate) as seen:
                stream = (
                    ingest_ct(lines, seen, psl, stats)
                    if args.source == "ct"
                    else ingest_pdns(lines, seen, psl, stats)
                )
                count = _write_records(args.out, stream)
    summary = " ".join(f"{k}={v}" for k, v in sorted(stats.items()))
    print(f"ingest {args.source}: written={count} {summary}".rstrip(), file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    psl = load_psl(args.psl)
    clusters = files.read_clusters(args.clusters, psl)
    first_seen: dict[str, str] = {}
    a_records: dict[str, list[str]] = {}
    brand_labels: dict[str, str] = {}
    for path in args.meta:
        for record in files.load_ingest_file(path, psl):
            fqdn = record.domain.fqdn
            if record.first_seen and fqdn not in first_seen:
                first_seen[fqdn] = record.first_seen
            if record.ips:
                a_records.setdefault(fqdn, []).extend(record.ips)
            if record.brand and fqdn not in brand_labels:
                brand_labels[fqdn] = record.brand
    reports = analyze_clusters(clusters, first_seen, a_records, brand_labels)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for report in reports:
            out.write(report.to_json_line() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    psl = load_psl(config.psl_path)
    embedder = make_embedder(config)
    labeled = []
    for line in _read_lines(args.labeled):
        line = line.strip()
        if not line:
            continue
        try:
            fields = json.loads(line)
            labeled.append((parse_fqdn(fields["domain"], psl), bool(fields["gsd"])))
        except (json.JSONDecodeError, KeyError, PipelineError) as exc:
            raise ConfigError(f"bad labeled line: {exc}") from None
    count = round((args.eps_max - args.eps_min) / args.eps_step)
    grid = [round(args.eps_min + i * args.eps_step, 10) for i in range(count + 1)]
    rows = eval_sweep(labeled, embedder, grid, min_pts=config.min_pts)
    text = sweep_to_tsv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    psl = load_psl(args.psl)
    source = Source(args.source)
    base = datetime.fromisoformat(args.base_ts.replace("Z", "+00:00"))

    def stamp(i: int) -> str:
        return (base + timedelta(hours=i)).strftime("%Y-%m-%dT%H:%M:%SZ")

    def generate():
        counter = 0
        if args.templates:
            for line in _read_lines(args.templates):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    fields = json.loads(line)
                    tpl = SynthTemplate(
                        brand=fields["brand"],
                        technique=Technique(fields["technique"]),
                        tld_pool=tuple(fields["tlds"]),
                        count=int(fields["count"]),
                        seed=int(fields["seed"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"bad template line: {exc}") from None
                for name in synthesize_cluster(tpl, psl):
                    yield IngestRecord(
                        domain=name, source=source,
                        first_seen=stamp(counter), brand=tpl.brand,
                    )
                    counter += 1
        if args.benign:
            for name in synthesize_benign(args.benign, args.seed if args.seed is not None else 0, psl):
                yield IngestRecord(domain=name, source=source, first_seen=stamp(counter))
                counter += 1

    count = _write_records(args.out, generate())
    print(f"synth: written={count}", file=sys.stderr)
    return EXIT_OK


def _add_pipeline_flags(sub: argparse.ArgumentParser, *, artifacts: bool) -> None:
    sub.add_argument("--eps", type=float, help="DBSCAN cosine-distance radius")
    sub.add_argument("--min-pts", dest="min_pts", type=int, help="DBSCAN density minimum")
    sub.add_argument("--threshold", type=float, help="similarity threshold t (default 1 - eps)")
    sub.add_argument("--k", type=int, help="minimum matches for a candidate")
    sub.add_argument("--embedder", help="reference | file:<path> | sidecar:<command>")
    sub.add_argument("--psl", help="public-suffix snapshot path")
    sub.add_argument("--seed", type=int, help="seed for seeded components")
    if artifacts:
        sub.add_argument("--clusters", help="clusters file path")
        sub.add_argument("--rules", help="rules file path")
        sub.add_argument("--embeddings", help="reference-embeddings file path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsdetect",
        description="Detect generated squatting domains among newly observed domain names.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    step1 = commands.add_parser("step1", help="cluster TI domains and derive rules")
    _add_pipeline_flags(step1, artifacts=True)
    step1.add_argument("--ti", action="append", default=[], help="TI feed or record file (repeatable)")
    step1.set_defaults(func=cmd_step1)

    step2 = commands.add_parser("step2", help="score new domains against Step-1 artifacts")
    _add_pipeline_flags(step2, artifacts=True)
    step2.add_argument("--new", action="append", default=[], help="new-domain file (repeatable)")
    step2.add_argument("--out", help="detection output path")
    step2.add_argument("--mode", choices=["exact", "ann-verified", "ann"], help="search mode")
    step2.set_defaults(func=cmd_step2)

    filt = commands.add_parser("filter", help="run the prefilter over domain lines")
    filt.add_argument("inputs", nargs="+", help="files of domain names, one per line")
    filt.add_argument("--psl", help="public-suffix snapshot path")
    filt.add_argument("--out", help="TSV output path (default stdout)")
    filt.set_defaults(func=cmd_filter)

    ingest = commands.add_parser("ingest", help="normalize a source stream into records")
    ingest.add_argument("--source", required=True, choices=["ct", "zone", "pdns", "ti"])
    ingest.add_argument("inputs", nargs="*", help="input files for ct/pdns/ti")
    ingest.add_argument("--psl", help="public-suffix snapshot path")
    ingest.add_argument("--seen", help="SeenSet database path (ct/pdns)")
    ingest.add_argument("--ttl-seconds", dest="ttl_seconds", type=float,
                        help="optional SeenSet entry lifetime")
    ingest.add_argument("--approximate", action="store_true",
                        help="Bloom-filter SeenSet (no false negatives, FPR <= 1e-6)")
    ingest.add_argument("--today", help="today's zone snapshot (zone)")
    ingest.add_argument("--yesterday", help="yesterday's zone snapshot (zone)")
    ingest.add_argument("--ts", help="first-seen timestamp for zone records")
    ingest.add_argument("--out", help="record output path (default stdout)")
    ingest.set_defaults(func=cmd_ingest)

    analyze = commands.add_parser("analyze", help="per-cluster campaign reports")
    analyze.add_argument("--clusters", required=True, help="clusters file")
    analyze.add_argument("--meta", action="append", default=[], required=True,
                         help="IngestRecord file with first-seen/IP/brand metadata")
    analyze.add_argument("--psl", help="public-suffix snapshot path")
    analyze.add_argument("--out", help="report output path (default stdout)")
    analyze.set_defaults(func=cmd_analyze)

    sweep = commands.add_parser("sweep", help="precision/recall/accuracy across an eps grid")
    _add_pipeline_flags(sweep, artifacts=False)
    sweep.add_argument("--labeled", required=True,
                       help='file of {"domain":...,"gsd":true|false} lines')
    sweep.add_argument("--eps-min", dest="eps_min", type=float, default=0.01)
    sweep.add_argument("--eps-max", dest="eps_max", type=float, default=0.07)
    sweep.add_argument("--eps-step", dest="eps_step", type=float, default=0.01)
    sweep.add_argument("--out", help="TSV output path (default stdout)")
    sweep.set_defaults(func=cmd_sweep)

    synth = commands.add_parser("synth", help="generate synthetic clusters and benign names")
    synth.add_argument("--templates", help="template record file")
    synth.add_argument("--benign", type=int, help="number of benign names")
    synth.add_argument("--seed", type=int, help="seed for benign generation")
    synth.add_argument("--source", default="ti", choices=["ti", "ct"])
    synth.add_argument("--base-ts", dest="base_ts", default="2026-01-01T00:00:00Z",
                       help="first-seen timestamp base (RFC 3339)")
    synth.add_argument("--psl", help="public-suffix snapshot path")
    synth.add_argument("--out", help="record output path (default stdout)")
    synth.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnsortedInput, DegenerateLabels, ImpossibleTemplate,
            MalformedRecord) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyReferenceSet as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_REFERENCES


if __name__ == "__main__":
    sys.exit(main())

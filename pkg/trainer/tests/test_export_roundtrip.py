from __future__ import annotations

import json
import subprocess
import sys

import numpy as np

from trainer import (
    TrainerConfig,
    augment_vocabulary,
    build_model,
    build_tokenizer,
    build_triplets,
    export_embeddings,
    load_clusters,
    train,
)

from conftest import BRANDS, make_clusters, make_pool


class TestExport:
    def test_header_golden(self, tiny_config, tokenizer, tmp_path):
        model = build_model(tokenizer, tiny_config)
        path = tmp_path / "embeds.ldjson"
        written = export_embeddings(model, tokenizer, ["alpha.test"], path)
        assert written == 1
        header = path.read_text().splitlines()[0]
        assert header == '{"dim":32,"model":"gsd-trainer-v1"}'

    def test_records_are_unit_vectors_in_order(self, tiny_config, tokenizer, tmp_path):
        model = build_model(tokenizer, tiny_config)
        path = tmp_path / "embeds.ldjson"
        domains = ["alpha.test", "beta.test", "gamma.test"]
        assert export_embeddings(model, tokenizer, domains, path) == 3
        lines = path.read_text().splitlines()
        records = [json.loads(line) for line in lines[1:]]
        assert [r["domain"] for r in records] == domains
        for record in records:
            vec = np.asarray(record["vec"], dtype=np.float64)
            assert vec.shape == (tiny_config.hidden_size,)
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-5

    def test_empty_input_writes_header_only(self, tiny_config, tokenizer, tmp_path):
        model = build_model(tokenizer, tiny_config)
        path = tmp_path / "embeds.ldjson"
        assert export_embeddings(model, tokenizer, [], path) == 0
        assert path.read_text() == '{"dim":32,"model":"gsd-trainer-v1"}\n'

    def test_rewrite_is_byte_identical(self, tiny_config, tokenizer, tmp_path):
        model = build_model(tokenizer, tiny_config)
        a, b = tmp_path / "a.ldjson", tmp_path / "b.ldjson"
        domains = ["one.test", "two.test"]
        export_embeddings(model, tokenizer, domains, a)
        export_embeddings(model, tokenizer, domains, b)
        assert a.read_bytes() == b.read_bytes()


def _pipeline(args: list[str]) -> str:
    """Run the detection pipeline CLI out of process; the trainer only
    touches it through its files and exit codes."""
    proc = subprocess.run(
        [sys.executable, "-m", "gsdetect.cli", *args],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"{args[0]} failed: {proc.stderr}"
    return proc.stderr


def test_round_trip_drives_pipeline_cli(tmp_path):
    """Exported embeddings must drive the pipeline's step1/step2 via the
    file-embedder interface, clustering at the tight radius the trained
    space is meant to support."""
    brands = BRANDS[:5]
    families = make_clusters(brands)
    # interleave so every held-out name has a close sibling in TI
    ti = [n for fam in families for k, n in enumerate(fam) if k % 3 != 2]
    stream = [name for fam in families for name in fam[2::3]]
    pool = make_pool()
    benign_new = pool[-50:]

    ti_path = tmp_path / "ti.txt"
    ti_path.write_text("".join(f"{d}\n" for d in ti))
    new_path = tmp_path / "new.txt"
    new_path.write_text("".join(f"{d}\n" for d in stream + benign_new))

    art0 = tmp_path / "bootstrap"
    art0.mkdir()
    _pipeline([
        "step1", "--ti", str(ti_path), "--embedder", "reference", "--eps", "0.575",
        "--clusters", str(art0 / "clusters.ldjson"),
        "--rules", str(art0 / "rules.json"),
        "--embeddings", str(art0 / "embeddings.ldjson"),
    ])

    triplets = build_triplets(
        load_clusters(art0 / "clusters.ldjson"), pool, count=500, seed=0
    )
    config = TrainerConfig()
    tokenizer = build_tokenizer()
    augment_vocabulary(tokenizer, ["com", "net"], brands)
    model = build_model(tokenizer, config)
    train(model, tokenizer, triplets, config)

    emb_path = tmp_path / "trained.ldjson"
    written = export_embeddings(model, tokenizer, ti + stream + benign_new, emb_path)
    assert written == len(ti) + len(stream) + len(benign_new)

    art1 = tmp_path / "trained"
    art1.mkdir()
    stderr1 = _pipeline([
        "step1", "--ti", str(ti_path),
        "--embedder", f"file:{emb_path}", "--eps", "0.04",
        "--clusters", str(art1 / "clusters.ldjson"),
        "--rules", str(art1 / "rules.json"),
        "--embeddings", str(art1 / "embeddings.ldjson"),
    ])
    assert stderr1.startswith("step1:")

    clusters = [
        json.loads(line)
        for line in (art1 / "clusters.ldjson").read_text().splitlines()
    ]
    assert clusters and all("cluster_id" in c and c["members"] for c in clusters)
    assert isinstance(json.loads((art1 / "rules.json").read_text()), list)
    ref_header = json.loads(
        (art1 / "embeddings.ldjson").read_text().splitlines()[0]
    )
    assert ref_header == {"dim": config.hidden_size, "model": "gsd-trainer-v1"}

    det_path = tmp_path / "detections.ldjson"
    stderr2 = _pipeline([
        "step2", "--new", str(new_path),
        "--embedder", f"file:{emb_path}",
        "--clusters", str(art1 / "clusters.ldjson"),
        "--rules", str(art1 / "rules.json"),
        "--embeddings", str(art1 / "embeddings.ldjson"),
        "--out", str(det_path),
    ])
    assert stderr2.startswith("step2:")

    detections = [json.loads(line) for line in det_path.read_text().splitlines()]
    assert len(detections) == len(stream) + len(benign_new)
    verdicts = {d["verdict"] for d in detections}
    assert verdicts <= {"gsd", "rejected_by_rule", "not_similar"}
    assert any(d["verdict"] == "gsd" for d in detections)
    print(f"round-trip: clusters={len(clusters)} "
          f"verdicts={sorted(verdicts)} detections={len(detections)}")

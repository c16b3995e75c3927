from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsdetect.clustering import (
    NOISE,
    MatchingRule,
    dbscan,
    generate_rule,
    run_step1,
)
from gsdetect.errors import EmptyInput
from gsdetect.ingest import IngestRecord, Source

from oracles import dbscan_oracle

TRIPLES = [
    ["alphabeta00.test", "alphabeta01.test", "alphabeta02.test"],
    ["gatewing-a1.org", "gatewing-b2.org", "gatewing-c3.org"],
    ["login.cordell.net", "signin.cordell.net", "verify.cordell.net"],
]
SINGLETONS = ["quorapex.com", "zubindor.net", "merkatal.org", "xylovant.test", "pridonia.com"]
FIXTURE_EPS = 0.45


def planted_vectors(seed: int, centers: int = 8, per: int = 12, strays: int = 40, dim: int = 16):
    """Unit vectors in tight blobs plus uniform strays."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(centers):
        c = rng.normal(size=dim)
        c /= np.linalg.norm(c)
        for _ in range(per):
            p = c + rng.normal(scale=0.05, size=dim)
            rows.append(p / np.linalg.norm(p))
    for _ in range(strays):
        p = rng.normal(size=dim)
        rows.append(p / np.linalg.norm(p))
    rows = np.array(rows)
    rng.shuffle(rows)
    return rows


def ti_records(parse, names):
    return [IngestRecord(domain=parse(n), source=Source.TI) for n in names]


def test_identical_triple_forms_one_cluster():
    v = np.zeros((3, 4))
    v[:, 0] = 1.0
    assert dbscan(v, eps=0.04, min_pts=3) == [0, 0, 0]


def test_pair_plus_orthogonal_is_all_noise():
    v = np.zeros((3, 4))
    v[0, 0] = v[1, 0] = 1.0
    v[2, 1] = 1.0
    assert dbscan(v, eps=0.04, min_pts=3) == [NOISE, NOISE, NOISE]


def at_angle(a: float) -> np.ndarray:
    return np.array([np.cos(a), np.sin(a), 0.0])


def test_border_point_joins_first_cluster():
    # two 4-point chains with one border point between them; the border
    # touches exactly one point of each chain, so with min_pts=4 it is
    # reachable from both clusters but core in neither
    eps = 0.01
    e = np.arccos(1.0 - eps)
    chain_a = [at_angle(i * 0.25 * e) for i in range(4)]
    border = at_angle(1.65 * e)
    chain_b = [at_angle(2.55 * e + i * 0.25 * e) for i in range(4)]
    forward = np.array(chain_a + [border] + chain_b)
    assert dbscan(forward, eps=eps, min_pts=4) == [0, 0, 0, 0, 0, 1, 1, 1, 1]
    backward = np.array(chain_b + [border] + chain_a)
    assert dbscan(backward, eps=eps, min_pts=4) == [0, 0, 0, 0, 0, 1, 1, 1, 1]


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("eps", [0.01, 0.05, 0.2, 0.5])
def test_matches_brute_force_oracle(seed, eps):
    vectors = planted_vectors(seed)
    assert dbscan(vectors, eps=eps, min_pts=3) == dbscan_oracle(vectors, eps, 3)


@pytest.mark.parametrize("min_pts", [2, 3, 5])
def test_oracle_equivalence_other_min_pts(min_pts):
    vectors = planted_vectors(99, centers=5, per=min_pts + 2, strays=30)
    for eps in (0.03, 0.1, 0.4):
        assert dbscan(vectors, eps=eps, min_pts=min_pts) == dbscan_oracle(
            vectors, eps, min_pts
        )


def test_eps_monotonicity_of_clustered_set():
    vectors = planted_vectors(3, centers=6, per=6, strays=50)
    grid = [0.01, 0.02, 0.04, 0.08, 0.16, 0.32]
    previous: set[int] = set()
    for eps in grid:
        labels = dbscan(vectors, eps=eps, min_pts=3)
        clustered = {i for i, lab in enumerate(labels) if lab != NOISE}
        assert previous <= clustered
        previous = clustered


def core_partition(vectors, labels, eps, min_pts):
    sims = vectors @ vectors.T
    within = sims >= 1.0 - eps
    cores = [i for i in range(len(labels)) if int(within[i].sum()) >= min_pts]
    groups: dict[int, set[int]] = {}
    for i in cores:
        groups.setdefault(labels[i], set()).add(i)
    return {frozenset(g) for g in groups.values()}


@pytest.mark.parametrize("seed", range(4))
def test_core_partition_permutation_invariant(seed):
    vectors = planted_vectors(seed, centers=4, per=8, strays=20)
    eps, min_pts = 0.1, 3
    base = core_partition(vectors, dbscan(vectors, eps, min_pts), eps, min_pts)
    rng = np.random.default_rng(seed + 100)
    perm = rng.permutation(len(vectors))
    shuffled = vectors[perm]
    labels = dbscan(shuffled, eps, min_pts)
    unshuffled = [0] * len(vectors)
    for pos, orig in enumerate(perm):
        unshuffled[orig] = labels[pos]
    assert core_partition(vectors, unshuffled, eps, min_pts) == base


def test_dbscan_input_validation():
    with pytest.raises(EmptyInput):
        dbscan(np.zeros((0, 4)), eps=0.04, min_pts=3)
    v = np.eye(3)
    for bad_eps in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            dbscan(v, eps=bad_eps, min_pts=3)
    with pytest.raises(ValueError):
        dbscan(v, eps=0.04, min_pts=1)


def test_rule_golden_tld_and_num(parse):
    members = [parse(f"example{i:03d}.test") for i in range(3)]
    rule = generate_rule(members)
    assert rule == MatchingRule(tld=".test", e2ld=None, num=15)
    assert rule.to_json() == '{"tld":".test","num":15}'


def test_rule_golden_shared_e2ld(parse):
    members = [parse(f"{x}.example.test") for x in "abc"]
    rule = generate_rule(members)
    assert rule == MatchingRule(tld=".test", e2ld="example.test", num=14)


def test_rule_golden_nothing_shared(parse):
    members = [parse("short.a"), parse("muchlongername.b"), parse("mid.c")]
    assert generate_rule(members) is None


def test_rule_matches_semantics(parse):
    rule = MatchingRule(tld=".test", e2ld=None, num=15)
    assert rule.matches(parse("example999.test"))
    assert not rule.matches(parse("example999.com"))  # wrong tld
    assert not rule.matches(parse("example99.test"))  # wrong length


@settings(max_examples=50)
@given(st.lists(st.sampled_from([t for tri in TRIPLES for t in tri] + SINGLETONS), min_size=3, max_size=9, unique=True))
def test_rule_soundness_property(parse, names):
    members = [parse(n) for n in names]
    rule = generate_rule(members)
    if rule is not None:
        assert all(rule.matches(m) for m in members)


def test_run_step1_fixture(parse, embedder):
    names = [n for tri in TRIPLES for n in tri] + SINGLETONS
    result = run_step1(ti_records(parse, names), embedder, eps=FIXTURE_EPS, min_pts=3)
    assert len(result.clusters) == 3
    grouped = [sorted(m.fqdn for m in c.members) for c in result.clusters]
    assert grouped == [sorted(t) for t in TRIPLES]
    assert [c.cluster_id for c in result.clusters] == [0, 1, 2]
    assert len(result.reference_domains) == 9
    assert result.reference_vectors.shape == (9, embedder.dim)
    # reference rows are the embeddings of the listed domains, in order
    for row, name in zip(result.reference_vectors, result.reference_domains):
        assert np.array_equal(row, embedder.embed(name.fqdn))
    assert result.stats == {
        "input": 14,
        "kept_after_filter": 14,
        "unique": 14,
        "clustered": 9,
        "noise": 5,
        "clusters": 3,
    }


def test_run_step1_rules(parse, embedder):
    names = [n for tri in TRIPLES for n in tri] + SINGLETONS
    result = run_step1(ti_records(parse, names), embedder, eps=FIXTURE_EPS, min_pts=3)
    rules = [c.rule for c in result.clusters]
    assert rules[0] == MatchingRule(tld=".test", e2ld=None, num=16)
    assert rules[1] == MatchingRule(tld=".org", e2ld=None, num=15)
    assert rules[2] == MatchingRule(tld=".net", e2ld="cordell.net", num=None)


def test_run_step1_deduplicates(parse, embedder):
    names = TRIPLES[0] + TRIPLES[0] + SINGLETONS  # every triple member twice
    result = run_step1(ti_records(parse, names), embedder, eps=FIXTURE_EPS, min_pts=3)
    assert result.stats["input"] == 11
    assert result.stats["unique"] == 8
    assert len(result.clusters) == 1
    assert len(result.clusters[0].members) == 3


def test_run_step1_empty_after_filter(parse, embedder):
    records = ti_records(parse, ["ab.test", "123456789.test"])
    with pytest.raises(EmptyInput):
        run_step1(records, embedder, eps=0.04, min_pts=3)


def test_run_step1_empty_input(embedder):
    with pytest.raises(EmptyInput):
        run_step1([], embedder, eps=0.04, min_pts=3)


def test_cluster_members_unique_and_min_size(parse, embedder):
    names = [n for tri in TRIPLES for n in tri] + SINGLETONS
    result = run_step1(ti_records(parse, names), embedder, eps=FIXTURE_EPS, min_pts=3)
    for cluster in result.clusters:
        fqdns = [m.fqdn for m in cluster.members]
        assert len(fqdns) == len(set(fqdns))
        assert len(fqdns) >= 3

from __future__ import annotations

import re

import pytest

from gsdetect.analytics import damerau_levenshtein, guideline_match
from gsdetect.errors import ImpossibleTemplate
from gsdetect.prefilter import filter_domain
from gsdetect.synth import (
    SplitMix64,
    SynthTemplate,
    Technique,
    synthesize_benign,
    synthesize_cluster,
)


class TestSplitMix64:
    def test_known_answer_vectors(self):
        # published test vectors for the splitmix64 stream seeded with 0
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4
        assert rng.next_u64() == 0x06C45D188009454F

    def test_streams_reproducible(self):
        a = SplitMix64(123456789)
        b = SplitMix64(123456789)
        assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]

    def test_below_and_randint_ranges(self):
        rng = SplitMix64(3)
        for _ in range(500):
            assert 0 <= rng.below(7) < 7
            assert 2 <= rng.randint(2, 9) <= 9

    def test_choice_and_shuffle_deterministic(self):
        items = list("abcdefgh")
        a, b = SplitMix64(5), SplitMix64(5)
        assert [a.choice(items) for _ in range(20)] == [b.choice(items) for _ in range(20)]
        left, right = items[:], items[:]
        a.shuffle(left)
        b.shuffle(right)
        assert left == right
        assert sorted(left) == sorted(items)


def template(brand, technique, tlds, count, seed):
    return SynthTemplate(
        brand=brand, technique=technique, tld_pool=tuple(tlds), count=count, seed=seed
    )


class TestSynthesizeCluster:
    def test_deterministic_per_template(self, psl):
        tpl = template("zephyr", Technique.COMBO, [".com"], 5, 11)
        first = [m.fqdn for m in synthesize_cluster(tpl, psl)]
        second = [m.fqdn for m in synthesize_cluster(tpl, psl)]
        assert first == second

    def test_seed_changes_output(self, psl):
        base = template("zephyr", Technique.RANDOM_SUFFIX, [".com"], 5, 1)
        other = template("zephyr", Technique.RANDOM_SUFFIX, [".com"], 5, 2)
        assert [m.fqdn for m in synthesize_cluster(base, psl)] != [
            m.fqdn for m in synthesize_cluster(other, psl)
        ]

    def test_deceptive_golden_seed_42(self, psl):
        tpl = template("amazon", Technique.DECEPTIVE_SUBDOMAIN, [".icu"], 3, 42)
        members = [m.fqdn for m in synthesize_cluster(tpl, psl)]
        assert members == [
            "amazon-com-uu.gb6bc9.icu",
            "amazon-iom-uk.cfjpay.icu",
            "amazon-com-uk.bujbth.icu",
        ]
        result = guideline_match(synthesize_cluster(tpl, psl), ["amazon"])
        assert result.conditions[1:] == (True, True, True)

    def test_deceptive_shape(self, psl):
        tpl = template("zephyr", Technique.DECEPTIVE_SUBDOMAIN, [".shop"], 6, 3)
        shape = re.compile(r"^zephyr-[a-z]{2,3}-[a-z]{2}\.[a-z0-9]{6}\.shop$")
        members = synthesize_cluster(tpl, psl)
        for m in members:
            assert shape.match(m.fqdn), m.fqdn
        # e2LDs are distinct random 6-char labels
        e2l = [m.e2ld for m in members]
        assert len(set(e2l)) == len(e2l)

    def test_typo_edit_distance_bound(self, psl):
        tpl = template("visa", Technique.TYPO, [".test"], 5, 1)
        members = synthesize_cluster(tpl, psl)
        assert len(members) == 5
        for m in members:
            d = damerau_levenshtein(m.fqdn, "visa.test")
            assert 1 <= d <= 3
        stems = [m.fqdn.rsplit(".", 1)[0] for m in members]
        assert len(set(stems)) == len(stems)

    def test_typo_longer_brand_stays_within_budget(self, psl):
        tpl = template("mountainbank", Technique.TYPO, [".net"], 8, 77)
        for m in synthesize_cluster(tpl, psl):
            assert 1 <= damerau_levenshtein(m.fqdn, "mountainbank.net") <= 3

    def test_combo_members_join_brand_and_word(self, psl):
        tpl = template("zephyr", Technique.COMBO, [".com"], 6, 9)
        members = synthesize_cluster(tpl, psl)
        for m in members:
            assert re.match(r"^zephyr-[a-z]+\.com$", m.fqdn)
        words = [m.fqdn.split("-", 1)[1].split(".", 1)[0] for m in members]
        assert len(set(words)) == len(words)
        # campaign words come from a narrow length window for shape consistency
        assert max(len(w) for w in words) - min(len(w) for w in words) <= 2

    def test_random_suffix_shape(self, psl):
        tpl = template("zephyr", Technique.RANDOM_SUFFIX, [".xyz"], 8, 9)
        for m in synthesize_cluster(tpl, psl):
            assert re.match(r"^zephyr-[a-z0-9]{6,8}\.xyz$", m.fqdn)

    @pytest.mark.parametrize("technique", list(Technique))
    @pytest.mark.parametrize("seed", [0, 1, 2026])
    def test_members_pass_prefilter_and_guidelines(self, psl, technique, seed):
        tpl = template("lumenpay", technique, [".test", ".shop"], 6, seed)
        members = synthesize_cluster(tpl, psl)
        assert len(members) == 6
        assert len({m.fqdn for m in members}) == 6
        for m in members:
            assert filter_domain(m).keep, m.fqdn
        result = guideline_match(members, ["lumenpay"])
        assert result.conditions[1] and result.conditions[2] and result.conditions[3]

    def test_count_two_rejected(self):
        with pytest.raises(ImpossibleTemplate):
            template("zephyr", Technique.COMBO, [".com"], 2, 0)

    def test_brand_too_short_for_typo(self, psl):
        tpl = template("abc", Technique.TYPO, [".test"], 3, 0)
        with pytest.raises(ImpossibleTemplate):
            synthesize_cluster(tpl, psl)

    def test_empty_tld_pool_rejected(self):
        with pytest.raises(ImpossibleTemplate):
            template("zephyr", Technique.COMBO, [], 3, 0)

    def test_tld_without_dot_rejected(self):
        with pytest.raises(ImpossibleTemplate):
            template("zephyr", Technique.COMBO, ["com"], 3, 0)

    def test_uppercase_brand_rejected(self):
        with pytest.raises(ImpossibleTemplate):
            template("Zephyr", Technique.COMBO, [".com"], 3, 0)


class TestSynthesizeBenign:
    def test_deterministic(self, psl):
        first = [m.fqdn for m in synthesize_benign(3, 7, psl)]
        second = [m.fqdn for m in synthesize_benign(3, 7, psl)]
        assert first == second == ["sejbodmo44.com", "gezogahu.xyz", "hadjetivaji.com"]

    def test_count_zero_rejected(self, psl):
        with pytest.raises(ValueError):
            synthesize_benign(0, 7, psl)

    def test_no_brand_substrings_in_10k(self, psl):
        from gsdetect.synth import _brandlist

        brands = _brandlist()
        members = synthesize_benign(10_000, 7, psl)
        assert len(members) == 10_000
        fqdns = [m.fqdn for m in members]
        assert len(set(fqdns)) == 10_000
        for fqdn in fqdns:
            stem = fqdn.rsplit(".", 1)[0]
            assert not any(brand in stem for brand in brands)

    def test_all_pass_prefilter(self, psl):
        for m in synthesize_benign(500, 99, psl):
            assert filter_domain(m).keep

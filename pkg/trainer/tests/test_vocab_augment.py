from __future__ import annotations

from trainer import augment_vocabulary, base_vocab, build_tokenizer


class TestBaseVocab:
    def test_no_duplicates(self):
        vocab = base_vocab()
        assert len(vocab) == len(set(vocab))

    def test_covers_every_domain_character(self):
        vocab = set(base_vocab())
        for c in "abcdefghijklmnopqrstuvwxyz0123456789":
            assert c in vocab and f"##{c}" in vocab
        assert "." in vocab and "-" in vocab

    def test_pad_is_index_zero(self):
        assert base_vocab()[0] == "[PAD]"


class TestTokenizer:
    def test_char_level_before_augmentation(self, tokenizer):
        assert tokenizer.tokenize("www.mastercard.com") == [
            "w", "##w", "##w", ".",
            "m", "##a", "##s", "##t", "##e", "##r", "##c", "##a", "##r", "##d",
            ".", "c", "##o", "##m",
        ]

    def test_no_unknowns_on_domains(self, tokenizer):
        for name in ("login-2fa.example.co.uk", "xn--e1afmkfd.test", "a_b.test"):
            assert "[UNK]" not in tokenizer.tokenize(name)

    def test_lowercases(self, tokenizer):
        assert tokenizer.tokenize("ABC.test") == tokenizer.tokenize("abc.test")


class TestAugmentation:
    def test_brand_becomes_whole_token(self):
        tok = build_tokenizer()
        assert "mastercard" not in tok.tokenize("www.mastercard.com")
        added = augment_vocabulary(tok, [], ["mastercard"])
        assert added == 1
        assert tok.tokenize("www.mastercard.com") == [
            "w", "##w", "##w", ".", "mastercard", ".", "c", "##o", "##m",
        ]

    def test_tlds_split_into_label_tokens(self):
        tok = build_tokenizer()
        added = augment_vocabulary(tok, [".com", ".co.uk"], [])
        assert added == 3  # com, co, uk
        assert tok.tokenize("shop.example.co.uk")[-3:] == ["co", ".", "uk"]

    def test_duplicates_count_once(self):
        tok = build_tokenizer()
        added = augment_vocabulary(tok, [".com", ".com"], ["acme", "acme"])
        assert added == 2

    def test_repeat_call_adds_nothing(self):
        tok = build_tokenizer()
        assert augment_vocabulary(tok, [".com"], ["acme"]) == 2
        assert augment_vocabulary(tok, [".com"], ["acme"]) == 0

    def test_uppercase_inputs_normalized(self):
        tok = build_tokenizer()
        assert augment_vocabulary(tok, [".COM"], ["ACME"]) == 2
        assert "acme" in tok.tokenize("login.acme.com")

    def test_vocab_grows_by_added_count(self):
        tok = build_tokenizer()
        before = len(tok)
        added = augment_vocabulary(tok, [".net", ".org"], ["brandx"])
        assert len(tok) == before + added

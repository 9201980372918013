from gapmine.evaluation.textnorm import collapse_whitespace, normalized_key, tokenize


def test_lowercases_and_strips_punctuation():
    assert tokenize("The Gap, remains!", use_stemming=False) == \
        ["the", "gap", "remains"]


def test_intra_word_hyphens_survive():
    assert tokenize("non-diabetic CKD", use_stemming=False) == \
        ["non-diabetic", "ckd"]


def test_dangling_hyphens_are_stripped():
    assert tokenize("range - finding -trial pre-", use_stemming=False) == \
        ["range", "finding", "trial", "pre"]


def test_stemming_applied_per_token():
    assert tokenize("remains unknown") == ["remain", "unknown"]


def test_normalized_key_is_string_form():
    assert normalized_key("The gaps remain.") == \
        " ".join(tokenize("the gaps remain"))


def test_collapse_whitespace():
    assert collapse_whitespace("  a \t b\n\nc ") == "a b c"

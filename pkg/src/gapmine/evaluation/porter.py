"""Porter-style suffix-stripping stemmer.

Implements the classic five-step Porter algorithm. The public ``stem``
iterates the single transformation pass to a fixpoint so that
``stem(stem(t)) == stem(t)`` holds for every token, which downstream
matching relies on. Tokens shorter than three characters pass through
unchanged.
"""

from __future__ import annotations

from functools import lru_cache

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem_part: str) -> int:
    """Count VC sequences: a word has the form [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem_part)):
        if not _is_consonant(stem_part, i):
            prev_vowel = True
        elif prev_vowel:
            m += 1
            prev_vowel = False
    return m


def _contains_vowel(stem_part: str) -> bool:
    return any(not _is_consonant(stem_part, i) for i in range(len(stem_part)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        stem_part = word[:-3]
        return word[:-1] if _measure(stem_part) > 0 else word
    if word.endswith("ed"):
        stem_part = word[:-2]
        if not _contains_vowel(stem_part):
            return word
        word = stem_part
    elif word.endswith("ing"):
        stem_part = word[:-3]
        if not _contains_vowel(stem_part):
            return word
        word = stem_part
    else:
        return word
    # cleanup after stripping -ed/-ing
    if word.endswith(("at", "bl", "iz")):
        return word + "e"
    if _ends_double_consonant(word) and word[-1] not in "lsz":
        return word[:-1]
    if _measure(word) == 1 and _ends_cvc(word):
        return word + "e"
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_STEP2 = (
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
    ("logi", "log"),
)

_STEP3 = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _replace_longest(word: str, rules, min_measure: int) -> str:
    """Apply the rule for the longest matching suffix; longest match wins
    even when its measure condition fails (no shorter rule is tried)."""
    best = None
    for suffix, repl in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    if best is None:
        return word
    suffix, repl = best
    stem_part = word[: len(word) - len(suffix)]
    if _measure(stem_part) > min_measure:
        return stem_part + repl
    return word


def _step4(word: str) -> str:
    best = None
    for suffix in _STEP4:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is None:
        return word
    stem_part = word[: len(word) - len(best)]
    if _measure(stem_part) <= 1:
        return word
    if best == "ion" and (not stem_part or stem_part[-1] not in "st"):
        return word
    return stem_part


def _step5a(word: str) -> str:
    if not word.endswith("e"):
        return word
    stem_part = word[:-1]
    m = _measure(stem_part)
    if m > 1 or (m == 1 and not _ends_cvc(stem_part)):
        return stem_part
    return word


def _step5b(word: str) -> str:
    if _measure(word) > 1 and word.endswith("ll"):
        return word[:-1]
    return word


def _one_pass(word: str) -> str:
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _replace_longest(word, _STEP2, 0)
    word = _replace_longest(word, _STEP3, 0)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Stem ``token``, iterating to a fixpoint (idempotent by construction)."""
    current = token.lower()
    for _ in range(8):
        nxt = _one_pass(current)
        if nxt == current:
            return current
        current = nxt
    return current

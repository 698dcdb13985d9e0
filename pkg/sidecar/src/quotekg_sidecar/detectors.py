"""Deterministic offline language detection from stopword and character
profiles. Covers the pipeline's shipped languages plus a few neighbours;
unknown input detects as "und" (BCP-47 undetermined)."""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

STOPWORDS = {
    "en": {
        "the", "of", "and", "to", "in", "is", "you", "that", "it", "for", "on",
        "with", "as", "are", "this", "but", "be", "at", "we", "can", "do", "not",
        "what", "all", "a", "an", "was", "will", "more", "than", "there",
    },
    "de": {
        "der", "die", "das", "und", "ist", "nicht", "ich", "sie", "zu", "den",
        "von", "mit", "auf", "für", "ein", "eine", "im", "dem", "des", "wir",
        "es", "an", "auch", "als", "sich", "aus", "wird", "bei", "man", "gut",
    },
    "fr": {
        "le", "la", "les", "de", "des", "du", "et", "est", "pas", "que", "qui",
        "ne", "un", "une", "dans", "pour", "ce", "il", "elle", "en", "au",
        "avec", "sur", "je", "nous", "vous", "plus", "mais", "sont", "tout",
        "chose", "font", "gens", "peut",
    },
    "it": {
        "il", "lo", "la", "gli", "le", "di", "che", "e", "è", "non", "un",
        "una", "per", "con", "si", "del", "della", "i", "in", "al", "da",
        "più", "sono", "come", "ma", "questo", "anche", "cosa",
    },
    "es": {
        "el", "los", "las", "de", "que", "y", "es", "en", "un", "una", "por",
        "con", "no", "se", "del", "al", "lo", "como", "más", "para", "pero",
        "sus", "le", "su", "a",
    },
    "pt": {
        "o", "os", "as", "de", "que", "e", "é", "em", "um", "uma", "por",
        "com", "não", "se", "do", "da", "no", "na", "para", "mais", "mas",
        "como", "os",
    },
    "hr": {
        "je", "i", "u", "se", "na", "da", "su", "za", "od", "kao", "što",
        "ali", "ili", "nije", "sam", "smo", "to", "koji", "biti",
    },
}

CHAR_MARKERS = {
    "de": "äöüß",
    "fr": "àâçéèêëîïôùûœ",
    "it": "ìò",
    "es": "ñ¿¡",
    "pt": "ãõ",
    "hr": "čćđšž",
}

_STOPWORD_WEIGHT = 2.0
_CHAR_WEIGHT = 1.0


def detect_language(text: str) -> tuple[str, float]:
    """Best-guess (language_code, confidence in [0, 1])."""
    tokens = [t.lower() for t in _TOKEN_RE.findall(text)]
    scores = {lang: 0.0 for lang in STOPWORDS}
    for lang, words in STOPWORDS.items():
        scores[lang] += _STOPWORD_WEIGHT * sum(1 for t in tokens if t in words)
    lowered = text.lower()
    for lang, chars in CHAR_MARKERS.items():
        scores[lang] += _CHAR_WEIGHT * sum(1 for ch in lowered if ch in chars)
    total = sum(scores.values())
    if total <= 0:
        return "und", 0.0
    best = max(sorted(scores), key=lambda l: scores[l])
    return best, scores[best] / total


def detect_many(texts) -> list[tuple[str, float]]:
    return [detect_language(t) for t in texts]

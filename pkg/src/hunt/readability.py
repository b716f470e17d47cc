"""Six readability formulas over shared text statistics.

The tokenizer rules are frozen so fixtures stay stable:
sentences split on . ! ? with an abbreviation guard; words are maximal
alphanumeric runs with internal apostrophes/hyphens; syllables use a
vowel-run heuristic (silent trailing 'e' dropped unless preceded by a
consonant + 'l'; minimum one per word).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources

from .errors import EmptyCorpus, EmptyText, ZeroSentences, ZeroWords

METRICS = ("FKGL", "FRE", "DaleChall", "ARI", "ColemanLiau", "LinsearWrite")

ABBREVIATIONS = frozenset({
    "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "vs", "etc", "e.g",
    "i.e", "fig", "al", "inc", "ltd", "co", "dept", "est", "approx", "no",
    "u.s", "u.k",
})

_WORD_RE = re.compile(r"[A-Za-z0-9]+(?:['’-][A-Za-z0-9]+)*")
_VOWEL_RUN_RE = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class TextStats:
    sentence_count: int
    word_count: int
    syllable_count: int
    letter_count: int
    character_count: int
    difficult_word_count: int
    word_syllables: tuple       # per-word syllable counts
    sentence_word_counts: tuple  # words per sentence, in order

    def to_json(self):
        return {
            "sentences": self.sentence_count,
            "words": self.word_count,
            "syllables": self.syllable_count,
            "letters": self.letter_count,
            "characters": self.character_count,
            "difficult_words": self.difficult_word_count,
        }


_FAMILIAR_WORDS = None


def familiar_words() -> frozenset:
    """Lowercased familiar-word list (exact match only, lemma-unaware)."""
    global _FAMILIAR_WORDS
    if _FAMILIAR_WORDS is None:
        text = resources.files("hunt.data").joinpath("familiar_words.txt").read_text()
        _FAMILIAR_WORDS = frozenset(
            w.strip().lower() for w in text.splitlines()
            if w.strip() and not w.startswith("#"))
    return _FAMILIAR_WORDS


def count_syllables(word: str) -> int:
    w = re.sub(r"[^a-z]", "", word.lower())
    if not w:
        return 1
    runs = _VOWEL_RUN_RE.findall(w)
    n = len(runs)
    # silent trailing 'e' (a singleton run) is dropped, except after a
    # consonant + 'l' as in "table"
    if n > 1 and w.endswith("e") and len(w) >= 2 and w[-2] not in "aeiouy":
        if not (w[-2] == "l" and len(w) >= 3 and w[-3] not in "aeiouy"):
            n -= 1
    return max(n, 1)


def _split_sentences(text: str):
    """Sentence spans split on terminal punctuation with abbreviation guard."""
    sentences = []
    current = []
    tokens = re.split(r"(\.|!|\?)", text)
    i = 0
    while i < len(tokens):
        chunk = tokens[i]
        current.append(chunk)
        if i + 1 < len(tokens) and tokens[i + 1] in ".!?":
            punct = tokens[i + 1]
            current.append(punct)
            last_word = re.findall(r"[A-Za-z][A-Za-z.]*$", chunk.strip())
            is_abbrev = (punct == "." and last_word
                         and last_word[0].lower().rstrip(".") in ABBREVIATIONS)
            # a period inside a number (e.g. 3.14) does not end a sentence
            in_number = (punct == "." and chunk and chunk[-1:].isdigit()
                         and i + 2 < len(tokens) and tokens[i + 2][:1].isdigit())
            if not is_abbrev and not in_number:
                sentence = "".join(current).strip()
                if _WORD_RE.search(sentence):
                    sentences.append(sentence)
                current = []
            i += 2
            continue
        i += 1
    tail = "".join(current).strip()
    if _WORD_RE.search(tail):
        sentences.append(tail)
    return sentences


def compute_stats(text: str) -> TextStats:
    if not text or not text.strip():
        raise EmptyText("cannot compute statistics of empty text")
    sentences = _split_sentences(text)
    words = _WORD_RE.findall(text)
    if not words:
        raise EmptyText("text contains no words")
    familiar = familiar_words()
    syllables = tuple(count_syllables(w) for w in words)
    letters = sum(1 for w in words for ch in w if ch.isalpha())
    characters = sum(1 for w in words for ch in w if ch.isalnum())
    difficult = sum(1 for w in words if w.lower() not in familiar)
    per_sentence = tuple(len(_WORD_RE.findall(s)) for s in sentences)
    return TextStats(
        sentence_count=len(sentences),
        word_count=len(words),
        syllable_count=sum(syllables),
        letter_count=letters,
        character_count=characters,
        difficult_word_count=difficult,
        word_syllables=syllables,
        sentence_word_counts=per_sentence,
    )


def _fre_grade(score: float) -> str:
    if score >= 90:
        return "5th grade"
    if score >= 80:
        return "6th grade"
    if score >= 70:
        return "7th grade"
    if score >= 60:
        return "8th and 9th grade"
    if score >= 50:
        return "10th to 12th grade"
    if score >= 30:
        return "college"
    return "graduate"


def _dale_chall_grade(score: float) -> str:
    if score < 5.0:
        return "4th grade or below"
    if score < 6.0:
        return "5th-6th grade"
    if score < 7.0:
        return "7th-8th grade"
    if score < 8.0:
        return "9th-10th grade"
    if score < 9.0:
        return "11th-12th grade"
    if score < 10.0:
        return "college"
    return "graduate"


def readability(metric: str, stats: TextStats) -> dict:
    """Score one formula; returns {score, grade_level}."""
    if stats.word_count < 1:
        raise ZeroWords("formula requires at least one word")
    if stats.sentence_count < 1:
        raise ZeroSentences("formula requires at least one sentence")
    W = stats.word_count
    S = stats.sentence_count
    syl = stats.syllable_count

    if metric == "FKGL":
        score = 0.39 * (W / S) + 11.8 * (syl / W) - 15.59
        return {"score": score, "grade_level": round(score)}
    if metric == "FRE":
        score = 206.835 - 1.015 * (W / S) - 84.6 * (syl / W)
        return {"score": score, "grade_level": _fre_grade(score)}
    if metric == "DaleChall":
        pdw = 100.0 * stats.difficult_word_count / W
        score = 0.1579 * pdw + 0.0496 * (W / S)
        if pdw > 5.0:
            score += 3.6365
        return {"score": score, "grade_level": _dale_chall_grade(score)}
    if metric == "ARI":
        score = 4.71 * (stats.character_count / W) + 0.5 * (W / S) - 21.43
        grade = "graduate" if score >= 14 else round(score)
        return {"score": score, "grade_level": grade}
    if metric == "ColemanLiau":
        L = 100.0 * stats.letter_count / W
        s_per_100 = 100.0 * S / W
        score = 0.0588 * L - 0.296 * s_per_100 - 15.8
        return {"score": score, "grade_level": round(score)}
    if metric == "LinsearWrite":
        sample = min(100, W)
        easy = sum(1 for c in stats.word_syllables[:sample] if c <= 2)
        hard = sample - easy
        # sentences needed to cover the sample, by per-sentence word counts
        covered, sents = 0, 0
        for n in stats.sentence_word_counts:
            if covered >= sample:
                break
            covered += n
            sents += 1
        sents = max(sents, 1)
        raw = (easy * 1 + hard * 3) / sents
        score = raw / 2 - (1 if raw <= 20 else 0)
        return {"score": score, "grade_level": round(score)}
    raise ValueError(f"unknown readability metric {metric!r}")


def report(text: str) -> dict:
    """All six formulas for one text."""
    stats = compute_stats(text)
    return {
        "digest": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "stats": stats.to_json(),
        "metrics": {m: readability(m, stats) for m in METRICS},
    }


def score_corpus(texts) -> dict:
    """Per-formula arithmetic mean over a corpus; per-text reports retained."""
    texts = list(texts)
    if not texts:
        raise EmptyCorpus("no texts supplied")
    reports, errors = [], []
    for i, t in enumerate(texts):
        try:
            reports.append(report(t))
        except EmptyText as e:
            errors.append({"index": i, "error": e.code, "message": str(e)})
    if not reports:
        raise EmptyCorpus("every text in the corpus was rejected")
    means = {m: sum(r["metrics"][m]["score"] for r in reports) / len(reports)
             for m in METRICS}
    return {
        "n_texts": len(texts),
        "n_scored": len(reports),
        "partial_coverage": bool(errors),
        "errors": errors,
        "mean_scores": means,
        "reports": reports,
    }

"""Multiple-choice exam harness: grade an LLM transport on a fixture.

Exam content is always user-supplied; the harness owns the JSON format,
the one-question-per-request protocol, and the answer extraction rule.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import FixtureInvalid, TransportError

CHOICE_KEYS = ("A", "B", "C", "D", "E")

DEFAULT_PROMPT_TEMPLATE = (
    "{stem}\n\n{choices}\n\n"
    "Answer with a single letter."
)


@dataclass(frozen=True)
class ExamQuestion:
    id: str
    stem: str
    choices: dict  # key letter -> choice text
    key: str


@dataclass(frozen=True)
class ExamFixture:
    exam: str
    questions: tuple
    provenance: str = ""

    @staticmethod
    def from_json(obj) -> "ExamFixture":
        if "exam" not in obj or "questions" not in obj:
            raise FixtureInvalid("fixture must contain 'exam' and 'questions'")
        questions = []
        seen = set()
        for q in obj["questions"]:
            try:
                qid, stem, choices, key = q["id"], q["stem"], q["choices"], q["key"]
            except (KeyError, TypeError) as e:
                raise FixtureInvalid(f"malformed question: {e}") from None
            if qid in seen:
                raise FixtureInvalid(f"duplicate question id {qid!r}")
            seen.add(qid)
            bad = [k for k in choices if k not in CHOICE_KEYS]
            if bad:
                raise FixtureInvalid(f"question {qid}: invalid choice keys {bad}")
            if key not in choices:
                raise FixtureInvalid(f"question {qid}: key {key!r} not in choices")
            questions.append(ExamQuestion(str(qid), stem, dict(choices), key))
        if not questions:
            raise FixtureInvalid("fixture contains no questions")
        return ExamFixture(obj["exam"], tuple(questions),
                           obj.get("provenance", ""))

    @staticmethod
    def load(path) -> "ExamFixture":
        with open(path, "r", encoding="utf-8") as fh:
            return ExamFixture.from_json(json.load(fh))


def question_prompt(q: ExamQuestion,
                    template: str = DEFAULT_PROMPT_TEMPLATE) -> str:
    choices = "\n".join(f"{k}. {q.choices[k]}" for k in CHOICE_KEYS
                        if k in q.choices)
    return template.format(stem=q.stem, choices=choices)


# Extraction rule, fixed and tested against the committed reply-format
# corpus: prefer an explicit "answer is X" phrasing, otherwise take the
# first standalone letter token (parenthesized, or terminated by
# punctuation/end-of-text so prose articles like "A firewall" don't match).
_ANSWER_PHRASE_RE = re.compile(
    r"(?i)\banswer\s*(?:is|:|-)?\s*\(?([A-Ea-e])\)?(?![A-Za-z])")
_STANDALONE_RE = re.compile(
    r"(?:\(([A-E])\))|(?:(?<![A-Za-z(])([A-E])(?=[.):,!]|$|\s*$))", re.MULTILINE)


def extract_choice(reply: str) -> str | None:
    m = _ANSWER_PHRASE_RE.search(reply)
    if m:
        return m.group(1).upper()
    for m in _STANDALONE_RE.finditer(reply):
        return (m.group(1) or m.group(2)).upper()
    return None


def run_exam(fixture: ExamFixture, transport,
             prompt_template: str = DEFAULT_PROMPT_TEMPLATE,
             strict_total: bool = False) -> dict:
    """Grade every question independently (no shared context).

    Errored questions count toward n_total only when strict_total is set.
    """
    per_question = []
    n_correct = n_errored = 0
    for q in fixture.questions:
        prompt = question_prompt(q, prompt_template)
        messages = [{"role": "user", "content": prompt}]
        try:
            reply = transport.complete(messages)
        except TransportError as e:
            per_question.append({"id": q.id, "model_answer": None,
                                 "correct": False, "errored": True,
                                 "raw_text": str(e)})
            n_errored += 1
            continue
        answer = extract_choice(reply)
        correct = answer == q.key
        n_correct += correct
        per_question.append({"id": q.id, "model_answer": answer,
                             "correct": correct, "errored": False,
                             "unparseable": answer is None,
                             "raw_text": reply})
    n_total = len(fixture.questions) if strict_total \
        else len(fixture.questions) - n_errored
    return {
        "exam": fixture.exam,
        "questions": per_question,
        "n_correct": n_correct,
        "n_errored": n_errored,
        "n_total": n_total,
        "success_rate": n_correct / n_total if n_total else 0.0,
    }

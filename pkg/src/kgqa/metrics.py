"""QALD-style macro scoring.

Per question, precision/recall/F1 over normalized value-tuple sets. Two
aggregates are reported: the plain macro mean over all questions, and the
QALD variant, which averages F1 only over questions the system answered
plus questions whose gold answer is empty — an unanswered question with a
non-empty gold zeroes the plain macro but is excluded from the QALD mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from kgqa.answers import AnswerSet
from kgqa.endpoint import QueryFailure
from kgqa.errors import EmptyInput


@dataclass(frozen=True)
class PerQuestionScore:
    id: str
    precision: float
    recall: float
    f1: float
    answered: bool


@dataclass(frozen=True)
class EvalReport:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_f1_qald: float
    n_questions: int
    n_answered: int
    per_question: tuple
    config_fingerprint: str = ""

    def to_dict(self) -> dict:
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_f1_qald": self.macro_f1_qald,
            "n_questions": self.n_questions,
            "n_answered": self.n_answered,
            "config_fingerprint": self.config_fingerprint,
            "per_question": [
                {
                    "id": s.id,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "answered": s.answered,
                }
                for s in self.per_question
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            macro_precision=data["macro_precision"],
            macro_recall=data["macro_recall"],
            macro_f1=data["macro_f1"],
            macro_f1_qald=data["macro_f1_qald"],
            n_questions=data["n_questions"],
            n_answered=data["n_answered"],
            config_fingerprint=data.get("config_fingerprint", ""),
            per_question=tuple(
                PerQuestionScore(
                    id=s["id"],
                    precision=s["precision"],
                    recall=s["recall"],
                    f1=s["f1"],
                    answered=s["answered"],
                )
                for s in data["per_question"]
            ),
        )


def f1_of(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score_question(
    gold: AnswerSet, system: AnswerSet | QueryFailure, qid: str = ""
) -> PerQuestionScore:
    """Score one question; any QueryFailure counts as an empty answer."""
    gold_tuples = gold.value_tuples()
    if isinstance(system, QueryFailure):
        system_tuples: frozenset = frozenset()
    else:
        system_tuples = system.value_tuples()
    answered = bool(system_tuples)
    if not gold_tuples and not system_tuples:
        return PerQuestionScore(qid, 1.0, 1.0, 1.0, answered=False)
    if not system_tuples:
        return PerQuestionScore(qid, 0.0, 0.0, 0.0, answered=False)
    if not gold_tuples:
        return PerQuestionScore(qid, 0.0, 0.0, 0.0, answered=True)
    hits = len(gold_tuples & system_tuples)
    precision = hits / len(system_tuples)
    recall = hits / len(gold_tuples)
    return PerQuestionScore(qid, precision, recall, f1_of(precision, recall), answered)


def _mean(values) -> float:
    values = list(values)
    if not values:
        return 0.0
    return sum(values) / len(values)


def aggregate(scores, config_fingerprint: str = "") -> EvalReport:
    """Macro means over all questions, plus the QALD-variant F1.

    An unanswered question has f1 == 1.0 exactly when its gold answer was
    empty; that is what re-admits it into the QALD subpopulation.
    """
    scores = list(scores)
    if not scores:
        raise EmptyInput("cannot aggregate zero scores")
    qald_pop = [s.f1 for s in scores if s.answered or s.f1 == 1.0]
    return EvalReport(
        macro_precision=_mean(s.precision for s in scores),
        macro_recall=_mean(s.recall for s in scores),
        macro_f1=_mean(s.f1 for s in scores),
        macro_f1_qald=_mean(qald_pop),
        n_questions=len(scores),
        n_answered=sum(1 for s in scores if s.answered),
        per_question=tuple(scores),
        config_fingerprint=config_fingerprint,
    )


TABLE_COLUMNS = ("F1", "Precision", "Recall", "F1 QALD")


def render_table(report: EvalReport) -> str:
    """Aligned plain-text summary row, headline metrics first."""
    values = (
        report.macro_f1,
        report.macro_precision,
        report.macro_recall,
        report.macro_f1_qald,
    )
    cells = [f"{v:.4f}" for v in values]
    widths = [max(len(h), len(c)) for h, c in zip(TABLE_COLUMNS, cells)]
    header = "  ".join(h.ljust(w) for h, w in zip(TABLE_COLUMNS, widths))
    row = "  ".join(c.ljust(w) for c, w in zip(cells, widths))
    counts = f"n={report.n_questions} answered={report.n_answered}"
    return f"{header}\n{row}\n{counts}\n"


def emit_report(report: EvalReport, path, fmt: str = "JSON") -> None:
    """Write a report as machine-readable JSON or an aligned text table."""
    fmt = fmt.upper()
    if fmt == "JSON":
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(report.to_dict(), handle, ensure_ascii=False, indent=1,
                      sort_keys=True)
            handle.write("\n")
    elif fmt == "TABLE":
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(render_table(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def load_report(path) -> EvalReport:
    with open(path, encoding="utf-8") as handle:
        return EvalReport.from_dict(json.load(handle))

"""Word and character error rates."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .kernels import edit_counts

_NON_ALNUM = re.compile(r"[^\w\s']|_")


@dataclass(frozen=True)
class ErrorRateReport:
    substitutions: int
    insertions: int
    deletions: int
    reference_length: int

    @property
    def edits(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def rate(self) -> float:
        """(S + I + D) / N; 0.0 for an empty pair and +inf for an empty reference."""
        if self.reference_length:
            return self.edits / self.reference_length
        return math.inf if self.edits else 0.0

    @property
    def empty_reference(self) -> bool:
        return self.reference_length == 0 and self.edits > 0

    def to_json(self) -> dict:
        rate = self.rate
        return {
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "reference_length": self.reference_length,
            "rate": rate if math.isfinite(rate) else None,
        }

    def __add__(self, other: "ErrorRateReport") -> "ErrorRateReport":
        return ErrorRateReport(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.reference_length + other.reference_length,
        )


ZERO = ErrorRateReport(0, 0, 0, 0)


def normalize_text(text: str) -> str:
    """Lowercase, drop non-alphanumerics except apostrophes, collapse whitespace."""
    return " ".join(_NON_ALNUM.sub("", text.lower()).split())


def error_counts(reference: Sequence[Hashable], hypothesis: Sequence[Hashable]) -> ErrorRateReport:
    s, i, d = edit_counts(reference, hypothesis)
    return ErrorRateReport(s, i, d, len(reference))


def wer(reference: Sequence[str] | str, hypothesis: Sequence[str] | str) -> ErrorRateReport:
    """Word error rate over token lists.

    Strings are normalized with :func:`normalize_text` and split; token
    lists are used as given. An empty reference with a non-empty hypothesis
    reports ``rate == inf``.
    """
    if isinstance(reference, str):
        reference = normalize_text(reference).split()
    if isinstance(hypothesis, str):
        hypothesis = normalize_text(hypothesis).split()
    return error_counts(list(reference), list(hypothesis))


def cer(reference: str, hypothesis: str) -> ErrorRateReport:
    """Character error rate over normalized text; spaces count as characters."""
    return error_counts(normalize_text(reference), normalize_text(hypothesis))


def corpus_report(reports: Iterable[ErrorRateReport]) -> ErrorRateReport:
    """Pool edits and reference lengths (not a mean of per-utterance rates)."""
    total = ZERO
    for r in reports:
        total = total + r
    return total

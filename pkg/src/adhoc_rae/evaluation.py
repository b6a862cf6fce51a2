"""Confusion-matrix metrics and the baseline-vs-challenger comparison table.

Precision and recall are macro-averaged over classes; F1 is the harmonic
mean of those two macro figures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .errors import DataError

METRICS = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: tuple[tuple[int, ...], ...]  # rows: truth, columns: prediction
    class_names: tuple[str, ...]

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))

    @property
    def trace(self) -> int:
        return sum(self.counts[k][k] for k in range(len(self.counts)))


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class_precision: tuple[float, ...] = ()
    per_class_recall: tuple[float, ...] = ()
    n: int = 0

    def values(self) -> tuple[float, float, float, float]:
        return self.accuracy, self.precision, self.recall, self.f1

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_class_precision": list(self.per_class_precision),
            "per_class_recall": list(self.per_class_recall),
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            d["accuracy"], d["precision"], d["recall"], d["f1"],
            tuple(d.get("per_class_precision", ())), tuple(d.get("per_class_recall", ())),
            int(d.get("n", 0)),
        )


@dataclass(frozen=True)
class ComparisonReport:
    baseline: MetricsReport
    challenger: MetricsReport
    relative_improvement: dict[str, float]
    baseline_name: str = "Random Forest"
    challenger_name: str = "Recursive Autoencoder"

    def to_dict(self) -> dict:
        return {
            "averaging": "macro",
            "baseline": {"name": self.baseline_name, **self.baseline.to_dict()},
            "challenger": {"name": self.challenger_name, **self.challenger.to_dict()},
            "relative_improvement": dict(self.relative_improvement),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        header = ("Method", "Accuracy", "Precision", "Recall", "F1-Score")
        rows = [
            (self.baseline_name, *(round_half_up(v) for v in self.baseline.values())),
            (self.challenger_name, *(round_half_up(v) for v in self.challenger.values())),
            ("Relative Improvement", *(format_percent(self.relative_improvement[m]) for m in METRICS)),
        ]
        w0 = max(len(r[0]) for r in rows + [header])
        widths = [w0] + [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(1, 5)]

        def line(cells):
            first = cells[0].ljust(widths[0])
            rest = (c.rjust(w) for c, w in zip(cells[1:], widths[1:]))
            return "  ".join([first, *rest]).rstrip()

        out = ["Precision and recall are macro-averaged over classes.", line(header)]
        out.append("-" * len(out[-1]))
        out.extend(line(r) for r in rows)
        return "\n".join(out) + "\n"


def round_half_up(x: float, places: int = 2) -> str:
    q = Decimal(1).scaleb(-places)
    d = Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP)
    return str(abs(d) if d == 0 else d)


def format_percent(fraction: float, places: int = 2) -> str:
    return f"{round_half_up(100.0 * fraction, places)} %"


def confusion_matrix(truth: Sequence[int], predicted: Sequence[int], n_classes: int,
                     class_names: Sequence[str] | None = None) -> ConfusionMatrix:
    if len(truth) != len(predicted):
        raise DataError(f"cannot pair {len(truth)} true labels with {len(predicted)} predictions")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(truth, predicted):
        if not (0 <= t < n_classes and 0 <= p < n_classes):
            raise DataError(f"class index out of range 0..{n_classes - 1}: ({t}, {p})")
        counts[t, p] += 1
    names = tuple(class_names) if class_names is not None else tuple(str(k) for k in range(n_classes))
    return ConfusionMatrix(tuple(tuple(int(c) for c in row) for row in counts), names)


def metrics_from_confusion(cm: ConfusionMatrix) -> MetricsReport:
    total = cm.total
    if total <= 0:
        raise DataError("no evaluated samples: metrics undefined")
    c = np.asarray(cm.counts, dtype=float)
    diag = np.diag(c)
    col, row = c.sum(axis=0), c.sum(axis=1)
    prec = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    rec = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    P, R = float(prec.mean()), float(rec.mean())
    f1 = 2 * P * R / (P + R) if P + R > 0 else 0.0
    return MetricsReport(cm.trace / total, P, R, f1, tuple(prec.tolist()), tuple(rec.tolist()), total)


def relative_improvement(baseline: float, challenger: float) -> float:
    if not baseline > 0:
        raise ValueError(f"relative improvement undefined for baseline {baseline}")
    return (challenger - baseline) / baseline


def comparison_report(baseline: MetricsReport, challenger: MetricsReport, **names) -> ComparisonReport:
    imp = {m: relative_improvement(getattr(baseline, m), getattr(challenger, m)) for m in METRICS}
    return ComparisonReport(baseline, challenger, imp, **names)


def evaluate(truth: Sequence[int], predicted: Sequence[int], n_classes: int = 2) -> MetricsReport:
    return metrics_from_confusion(confusion_matrix(truth, predicted, n_classes))

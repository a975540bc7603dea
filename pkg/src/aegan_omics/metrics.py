"""Confusion counts, threshold metrics, empirical ROC/AUC and the evaluation report."""
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DataError, ShapeError

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


def confusion(labels, predictions):
    y = np.asarray(labels).reshape(-1)
    p = np.asarray(predictions).reshape(-1)
    if y.shape != p.shape:
        raise ShapeError("labels and predictions differ in length", expected=y.shape, got=p.shape)
    pos, pred = y == 1, p == 1
    return ConfusionCounts(int(np.sum(pos & pred)), int(np.sum(~pos & ~pred)),
                           int(np.sum(~pos & pred)), int(np.sum(pos & ~pred)))


def _ratio(num, den):
    return (num / den, False) if den else (0.0, True)


def f1_from(precision, recall):
    """Harmonic mean of precision and recall; 0 when both are 0."""
    s = precision + recall
    return 2.0 * precision * recall / s if s else 0.0


@dataclass(frozen=True)
class MetricSuite:
    accuracy: float
    precision: float
    recall: float
    f1: float
    undefined: tuple = ()  # metrics whose denominator was 0 (reported as 0)


def metric_suite(counts):
    if counts.total == 0:
        raise DataError("metric_suite needs at least one evaluated sample")
    accuracy = (counts.tp + counts.tn) / counts.total
    precision, p_undef = _ratio(counts.tp, counts.tp + counts.fp)
    recall, r_undef = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = f1_from(precision, recall)
    undefined = tuple(name for name, flag in (("precision", p_undef), ("recall", r_undef),
                                              ("f1", precision + recall == 0)) if flag)
    return MetricSuite(accuracy, precision, recall, f1, undefined)


def roc_auc(labels, scores):
    """Empirical ROC over descending distinct scores and its trapezoidal AUC.

    Equal scores form a single step. Returns ``(points, auc)`` with points
    running from (0, 0) to (1, 1).
    """
    y = np.asarray(labels).reshape(-1)
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if y.shape != s.shape:
        raise ShapeError("labels and scores differ in length", expected=y.shape, got=s.shape)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC needs both classes among the labels")
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    # last index of each group of equal scores
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tps = np.cumsum(y_sorted == 1)[ends]
    fps = np.cumsum(y_sorted == 0)[ends]
    points = [(0.0, 0.0)] + [(fp / n_neg, tp / n_pos) for fp, tp in zip(fps, tps)]
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return points, auc


@dataclass
class EvalReport:
    counts: ConfusionCounts
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_points: list
    auc: float
    seed: int
    partition_sizes: dict
    threshold: float = 0.5
    undefined_metrics: tuple = ()
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "seed": self.seed,
            "threshold": self.threshold,
            "counts": asdict(self.counts),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "roc_points": [[float(x), float(y)] for x, y in self.roc_points],
            "partition_sizes": dict(self.partition_sizes),
            "undefined_metrics": list(self.undefined_metrics),
            **({"extra": self.extra} if self.extra else {}),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise DataError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(ConfusionCounts(**d["counts"]), d["accuracy"], d["precision"], d["recall"],
                   d["f1"], [tuple(p) for p in d["roc_points"]], d["auc"], d["seed"],
                   d["partition_sizes"], d["threshold"], tuple(d["undefined_metrics"]),
                   d.get("extra", {}))


def evaluate(labels, probabilities, seed, partition_sizes, threshold=0.5):
    y = np.asarray(labels).reshape(-1)
    prob = np.asarray(probabilities, dtype=np.float64).reshape(-1)
    counts = confusion(y, (prob >= threshold).astype(np.int64))
    suite = metric_suite(counts)
    points, auc = roc_auc(y, prob)
    return EvalReport(counts, suite.accuracy, suite.precision, suite.recall, suite.f1,
                      points, auc, int(seed), partition_sizes, threshold, suite.undefined)


def write_roc_tsv(path, points):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fpr\ttpr\n")
        for x, y in points:
            fh.write(f"{float(x)!r}\t{float(y)!r}\n")


def write_roc_svg(path, points, auc=None, size=360, margin=40):
    plot = size - 2 * margin

    def xy(fpr, tpr):
        return f"{margin + fpr * plot:.2f},{margin + (1.0 - tpr) * plot:.2f}"

    line = " ".join(xy(x, y) for x, y in points)
    title = "ROC curve" if auc is None else f"ROC curve (AUC = {auc:.4f})"
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{margin}" y="{margin}" width="{plot}" height="{plot}" fill="none" stroke="#444"/>',
        f'<polyline points="{xy(0, 0)} {xy(1, 1)}" fill="none" stroke="#aaa" stroke-dasharray="4 4"/>',
        f'<polyline points="{line}" fill="none" stroke="#1f77b4" stroke-width="2"/>',
        f'<text x="{size / 2:.0f}" y="{margin / 2:.0f}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{size / 2:.0f}" y="{size - 8}" text-anchor="middle" font-size="12">False positive rate</text>',
        f'<text x="12" y="{size / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {size / 2:.0f})">True positive rate</text>',
        "</svg>",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(svg) + "\n")

"""Statistical feature selection.

Stages run in a fixed order: variance filter, z-score, Welch t-test,
p-value cut, log2 fold-change filter (on raw values), Benjamini-Hochberg
adjustment of the surviving p-values, adjusted-p cut. Nothing here is random.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SelectionError
from .ingest import FeatureMatrix
from .stats import t_two_sided_p

KEPT = "kept"
LOW_VARIANCE = "low_variance"
ZERO_VARIANCE = "zero_variance"
P_VALUE = "p_value"
FOLD_CHANGE = "fold_change"
FDR = "fdr"

_ZERO_STD = 1e-12


@dataclass(frozen=True)
class Thresholds:
    min_variance: float = 0.002
    p_cut: float = 0.05
    fdr_q: float = 0.01
    abs_log2fc_min: float = 1.0
    variance_filter: bool = True
    ttest: bool = True
    fold_change: bool = True
    fdr: bool = True

    def __post_init__(self):
        if self.min_variance < 0:
            raise ValueError("min_variance must be >= 0")
        if not 0 < self.p_cut < 1:
            raise ValueError("p_cut must lie in (0, 1)")
        if not 0 < self.fdr_q < 1:
            raise ValueError("fdr_q must lie in (0, 1)")
        if self.abs_log2fc_min < 0:
            raise ValueError("abs_log2fc_min must be >= 0")


@dataclass
class SelectionReport:
    """Fate and statistics of every input feature (NaN where a stage never ran)."""

    feature_names: tuple
    variance: np.ndarray
    t_stat: np.ndarray
    p_value: np.ndarray
    p_adjusted: np.ndarray
    log2_fc: np.ndarray
    kept: np.ndarray
    reason: list
    mean: np.ndarray
    std: np.ndarray

    @property
    def kept_names(self):
        return [n for n, k in zip(self.feature_names, self.kept) if k]

    def to_tsv(self, path):
        cols = ("variance", "t_stat", "p_value", "p_adjusted", "log2_fc")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("feature\t" + "\t".join(cols) + "\tkept\treason\n")
            for j, name in enumerate(self.feature_names):
                stats = "\t".join(_fmt(getattr(self, c)[j]) for c in cols)
                fh.write(f"{name}\t{stats}\t{int(self.kept[j])}\t{self.reason[j]}\n")


def _fmt(v):
    return "NA" if np.isnan(v) else repr(float(v))


def _class_masks(labels, n):
    y = np.asarray(labels).reshape(-1)
    if y.shape[0] != n:
        raise DataError(f"{y.shape[0]} labels for {n} samples")
    return y == 1, y == 0


def variance_filter(matrix, min_variance):
    """Drop features whose sample variance (ddof=1) is below ``min_variance``.

    Returns ``(reduced_matrix, variances, kept_mask)``.
    """
    if matrix.values.size == 0:
        raise DataError(f"{matrix.kind}: empty matrix")
    variances = np.var(matrix.values, axis=0, ddof=1)
    kept = ~(variances < min_variance)
    if not kept.any():
        raise SelectionError(f"{matrix.kind}: variance filter at {min_variance} removed every "
                             "feature; lower min_variance")
    return matrix.take_features(kept), variances, kept


def zscore_normalize(matrix):
    """Standardize columns to mean 0, sample std 1.

    Zero-variance columns are dropped rather than divided by zero. Returns
    ``(normalized, means, stds, kept_mask)`` with means/stds for kept columns.
    """
    x = matrix.values
    means = x.mean(axis=0)
    stds = x.std(axis=0, ddof=1)
    kept = stds > _ZERO_STD
    z = (x[:, kept] - means[kept]) / stds[kept]
    names = [n for n, k in zip(matrix.feature_names, kept) if k]
    return FeatureMatrix(matrix.kind, matrix.sample_ids, names, z), means[kept], stds[kept], kept


def welch_columns(values, labels):
    """Column-wise Welch test; returns ``(t, df, p)`` arrays (class 1 minus class 0)."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    pos, neg = _class_masks(labels, x.shape[0])
    n1, n0 = int(pos.sum()), int(neg.sum())
    if n1 < 2 or n0 < 2:
        raise SelectionError(f"Welch t-test needs >= 2 samples per class, got {n1} and {n0}")
    m1, m0 = x[pos].mean(axis=0), x[neg].mean(axis=0)
    a = x[pos].var(axis=0, ddof=1) / n1
    b = x[neg].var(axis=0, ddof=1) / n0
    se2 = a + b
    diff = m1 - m0
    t = np.zeros_like(diff)
    df = np.full_like(diff, np.nan)
    p = np.ones_like(diff)
    ok = se2 > 0
    t[ok] = diff[ok] / np.sqrt(se2[ok])
    df[ok] = se2[ok] ** 2 / (a[ok] ** 2 / (n1 - 1) + b[ok] ** 2 / (n0 - 1))
    p[ok] = t_two_sided_p(t[ok], df[ok])
    # both classes constant: equal means give the null, distinct means are certain
    split = ~ok & (diff != 0)
    t[split] = np.sign(diff[split]) * np.inf
    p[split] = 0.0
    return t, df, p


def welch_t_test(values, labels):
    """Two-sided Welch t-test for one feature; returns ``(t, p)``."""
    t, _, p = welch_columns(np.asarray(values, dtype=np.float64).reshape(-1, 1), labels)
    return float(t[0]), float(p[0])


def log2_fold_change_columns(raw_values, labels):
    """``log2(mean_1 / mean_0)`` per column; NaN where either mean is not positive."""
    x = np.asarray(raw_values, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    pos, neg = _class_masks(labels, x.shape[0])
    m1, m0 = x[pos].mean(axis=0), x[neg].mean(axis=0)
    out = np.full(x.shape[1], np.nan)
    ok = (m1 > 0) & (m0 > 0)
    out[ok] = np.log2(m1[ok] / m0[ok])
    return out


def log2_fold_change(raw_values, labels):
    """Single-feature fold change; ``None`` when it is not applicable."""
    v = log2_fold_change_columns(np.asarray(raw_values).reshape(-1, 1), labels)[0]
    return None if np.isnan(v) else float(v)


def bh_adjust(p_values):
    """Benjamini-Hochberg step-up adjusted p-values, in input order."""
    p = np.asarray(p_values, dtype=np.float64).reshape(-1)
    if np.any(np.isnan(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    if m == 0:
        return p.copy()
    order = np.argsort(p, kind="stable")
    ranks = np.arange(1, m + 1, dtype=np.float64)
    scaled = m * p[order] / ranks
    adj_sorted = np.minimum(np.minimum.accumulate(scaled[::-1])[::-1], 1.0)
    out = np.empty(m)
    out[order] = adj_sorted
    return out


def select_features(matrix, labels, thresholds=Thresholds()):
    """Run every enabled stage; returns ``(normalized_reduced_matrix, report)``."""
    labels = np.asarray(labels).reshape(-1)
    names = matrix.feature_names
    n = len(names)
    variance = np.var(matrix.values, axis=0, ddof=1) if matrix.n_samples > 1 else np.full(n, np.nan)
    t_stat, p_value, p_adj, lfc = (np.full(n, np.nan) for _ in range(4))
    mean, std = np.full(n, np.nan), np.full(n, np.nan)
    reason = [KEPT] * n
    alive = np.ones(n, dtype=bool)

    if thresholds.variance_filter:
        low = variance < thresholds.min_variance
        for j in np.flatnonzero(low):
            reason[j] = ZERO_VARIANCE if variance[j] <= _ZERO_STD ** 2 else LOW_VARIANCE
        alive &= ~low

    idx = np.flatnonzero(alive)
    z, mu, sd, nz = zscore_normalize(matrix.take_features(idx))
    for j in idx[~nz]:
        reason[j] = ZERO_VARIANCE
    idx = idx[nz]
    alive[:] = False
    alive[idx] = True
    mean[idx], std[idx] = mu, sd

    if idx.size:
        t, _, p = welch_columns(z.values, labels)
        t_stat[idx], p_value[idx] = t, p
        if thresholds.ttest:
            for j in idx[~(p < thresholds.p_cut)]:
                reason[j] = P_VALUE
                alive[j] = False

    idx = np.flatnonzero(alive)
    if idx.size:
        lfc[idx] = log2_fold_change_columns(matrix.values[:, idx], labels)
        if thresholds.fold_change:
            small = np.abs(lfc[idx]) < thresholds.abs_log2fc_min  # NaN (not applicable) passes
            for j in idx[small]:
                reason[j] = FOLD_CHANGE
                alive[j] = False

    idx = np.flatnonzero(alive)
    if idx.size:
        p_adj[idx] = bh_adjust(p_value[idx])
        if thresholds.fdr:
            for j in idx[~(p_adj[idx] <= thresholds.fdr_q)]:
                reason[j] = FDR
                alive[j] = False

    if not alive.any():
        raise SelectionError(f"{matrix.kind}: no feature survived selection; relax p_cut, "
                             "fdr_q, abs_log2fc_min or min_variance, or disable a stage")
    report = SelectionReport(names, variance, t_stat, p_value, p_adj, lfc, alive.copy(),
                             reason, mean, std)
    return apply_selection(matrix, report), report


def apply_selection(matrix, report):
    """Restrict ``matrix`` to the report's kept features and z-score with its fitted stats."""
    pos = {name: j for j, name in enumerate(matrix.feature_names)}
    try:
        cols = [pos[name] for name in report.kept_names]
    except KeyError as err:
        raise DataError(f"{matrix.kind}: selected feature {err.args[0]!r} missing") from None
    keep = np.flatnonzero(report.kept)
    values = (matrix.values[:, cols] - report.mean[keep]) / report.std[keep]
    return FeatureMatrix(matrix.kind, matrix.sample_ids, report.kept_names, values)

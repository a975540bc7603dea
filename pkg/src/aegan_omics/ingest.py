"""Loading and aligning per-omic feature matrices, labels and gene lists.

Matrix files are UTF-8 tab-separated tables. In the default
``features-by-samples`` orientation (the cBioPortal download layout) the
header row holds sample IDs and the first column holds feature names;
``samples-by-features`` files are the transpose.
"""
import csv
import re
from dataclasses import dataclass

import numpy as np

from .errors import DataError

FEATURES_BY_SAMPLES = "features-by-samples"
SAMPLES_BY_FEATURES = "samples-by-features"
ORIENTATIONS = (FEATURES_BY_SAMPLES, SAMPLES_BY_FEATURES)

MISSING_TOKENS = frozenset({"", "na", "nan"})
MAX_MISSING_FRACTION = 0.2

# approved-symbol shape: uppercase start, then uppercase/digits/hyphens, optional trailing "@"
GENE_SYMBOL = re.compile(r"^[A-Z][A-Z0-9-]*@?$")


@dataclass(frozen=True)
class FeatureMatrix:
    kind: str
    sample_ids: tuple
    feature_names: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if values.shape != (len(self.sample_ids), len(self.feature_names)):
            raise DataError(f"{self.kind}: values shape {values.shape} does not match "
                            f"{len(self.sample_ids)} samples x {len(self.feature_names)} features")
        _check_unique(self.sample_ids, "sample ID", self.kind)
        _check_unique(self.feature_names, "feature", self.kind)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_samples(self):
        return len(self.sample_ids)

    def take_rows(self, index):
        index = np.asarray(index, dtype=int)
        return FeatureMatrix(self.kind, [self.sample_ids[i] for i in index],
                             self.feature_names, self.values[index])

    def take_features(self, index):
        index = np.asarray(index)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        return FeatureMatrix(self.kind, self.sample_ids,
                             [self.feature_names[i] for i in index], self.values[:, index])


@dataclass(frozen=True)
class LabelVector:
    sample_ids: tuple
    labels: np.ndarray
    positive_class_name: str = "1"

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        if labels.shape != (len(self.sample_ids),):
            raise DataError("label count does not match sample count")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be 0 or 1")
        _check_unique(self.sample_ids, "sample ID", "labels")
        if len(np.unique(labels)) < 2:
            raise DataError("labels contain a single class; both classes are required")

    def take(self, index):
        index = np.asarray(index, dtype=int)
        return LabelVector([self.sample_ids[i] for i in index], self.labels[index],
                           self.positive_class_name)


def _check_unique(names, what, context):
    seen = set()
    for name in names:
        if name in seen:
            raise DataError(f"{context}: duplicate {what} {name!r}")
        seen.add(name)


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh, delimiter="\t") if row]
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    return rows


def _parse_cell(cell, path, row, col):
    text = cell.strip()
    if text.lower() in MISSING_TOKENS:
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell {cell!r} at row {row}, column {col}") from None


def impute_missing(values, fit_rows=None, max_missing_fraction=MAX_MISSING_FRACTION):
    """Drop features missing in too many fitting rows, fill the rest with column means.

    Statistics come from ``fit_rows`` only (all rows when ``None``) and are
    applied to every row. Returns ``(filled, kept_mask, means)``.
    """
    values = np.asarray(values, dtype=np.float64)
    fit = values if fit_rows is None else values[np.asarray(fit_rows, dtype=int)]
    missing = np.isnan(fit)
    kept = missing.mean(axis=0) <= max_missing_fraction if len(fit) else np.ones(values.shape[1], bool)
    kept &= ~missing.all(axis=0)
    counts = (~missing).sum(axis=0)
    sums = np.where(missing, 0.0, fit).sum(axis=0)
    means = np.divide(sums, counts, out=np.zeros(values.shape[1]), where=counts > 0)
    filled = values[:, kept]
    filled = np.where(np.isnan(filled), means[kept], filled)
    return filled, kept, means[kept]


def load_matrix(path, kind, orientation=FEATURES_BY_SAMPLES, impute=True,
                max_missing_fraction=MAX_MISSING_FRACTION):
    """Read a TSV feature matrix into samples x features.

    With ``impute=False`` missing cells stay NaN so the caller can fit the
    imputation on a subset of rows (see :func:`impute_missing`).
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0][1:]]
    body = rows[1:]
    if not header or not body:
        raise DataError(f"{path}: no data rows or columns")
    row_names, table = [], []
    for r, row in enumerate(body, start=2):
        if len(row) != len(header) + 1:
            raise DataError(f"{path}: row {r} has {len(row) - 1} values, header has {len(header)}")
        row_names.append(row[0].strip())
        table.append([_parse_cell(c, path, r, j) for j, c in enumerate(row[1:], start=2)])
    table = np.array(table, dtype=np.float64)
    if orientation == FEATURES_BY_SAMPLES:
        features, samples, values = row_names, header, table.T
    else:
        features, samples, values = header, row_names, table
    _check_unique(features, "feature", f"{path}")
    _check_unique(samples, "sample ID", f"{path}")
    if impute:
        values, kept, _ = impute_missing(values, max_missing_fraction=max_missing_fraction)
        features = [f for f, k in zip(features, kept) if k]
        if not features:
            raise DataError(f"{path}: every feature exceeds the missing-value limit")
    return FeatureMatrix(kind, samples, features, values)


def write_matrix(matrix, path, orientation=FEATURES_BY_SAMPLES):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        if orientation == FEATURES_BY_SAMPLES:
            w.writerow(["feature", *matrix.sample_ids])
            for j, name in enumerate(matrix.feature_names):
                w.writerow([name, *(_fmt(v) for v in matrix.values[:, j])])
        else:
            w.writerow(["sample", *matrix.feature_names])
            for i, sid in enumerate(matrix.sample_ids):
                w.writerow([sid, *(_fmt(v) for v in matrix.values[i])])


def _fmt(v):
    return "NA" if np.isnan(v) else repr(float(v))


def load_labels(path, positive_class=None):
    """Two-column ``sample_id<TAB>label`` file with a header line.

    Labels ``0``/``1`` are used as-is. Other two-valued labels map the
    ``positive_class`` name to 1; without one, the rarer class is positive.
    """
    rows = _read_rows(path)[1:]
    ids, raw = [], []
    for r, row in enumerate(rows, start=2):
        if len(row) < 2:
            raise DataError(f"{path}: row {r} needs sample_id and label")
        ids.append(row[0].strip())
        raw.append(row[1].strip())
    names = sorted(set(raw))
    if len(names) != 2:
        raise DataError(f"{path}: expected exactly two label values, found {names}")
    if positive_class is None:
        if set(names) == {"0", "1"}:
            positive_class = "1"
        else:
            counts = {n: raw.count(n) for n in names}
            if counts[names[0]] == counts[names[1]]:
                raise DataError(f"{path}: classes are balanced; set positive_class explicitly")
            positive_class = min(names, key=lambda n: counts[n])
    if positive_class not in names:
        raise DataError(f"{path}: positive class {positive_class!r} not among {names}")
    labels = [1 if v == positive_class else 0 for v in raw]
    return LabelVector(ids, labels, positive_class)


def write_labels(labels, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample_id\tlabel\n")
        for sid, y in zip(labels.sample_ids, labels.labels):
            fh.write(f"{sid}\t{int(y)}\n")


def load_gene_list(path):
    genes = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                genes.append(line)
    if not genes:
        raise DataError(f"{path}: gene list is empty")
    return genes


def align_samples(matrices, labels):
    """Restrict every matrix and the labels to their common samples, in label-file order."""
    common = set(labels.sample_ids)
    for m in matrices:
        common &= set(m.sample_ids)
    order = [sid for sid in labels.sample_ids if sid in common]
    if not order:
        raise DataError("no sample is shared by all matrices and the label file")
    label_pos = {sid: i for i, sid in enumerate(labels.sample_ids)}
    lab_idx = [label_pos[s] for s in order]
    if len(np.unique(labels.labels[lab_idx])) < 2:
        raise DataError("shared samples contain only one class")
    aligned = []
    for m in matrices:
        pos = {sid: i for i, sid in enumerate(m.sample_ids)}
        aligned.append(m.take_rows([pos[s] for s in order]))
    return aligned, labels.take(lab_idx)


def validate_gene_symbols(matrix):
    """Split features into approved-looking symbols (kept) and the rest (rejected names)."""
    keep = [bool(GENE_SYMBOL.match(name)) for name in matrix.feature_names]
    rejected = [n for n, k in zip(matrix.feature_names, keep) if not k]
    return matrix.take_features(np.array(keep, dtype=bool)), rejected


def restrict_to_gene_list(matrix, genes):
    pos = {name: j for j, name in enumerate(matrix.feature_names)}
    index, seen = [], set()
    for g in genes:
        if g in pos and g not in seen:
            index.append(pos[g])
            seen.add(g)
    if not index:
        raise DataError(f"{matrix.kind}: none of the {len(genes)} listed genes is present")
    return matrix.take_features(np.array(index, dtype=int))

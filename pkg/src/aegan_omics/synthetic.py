"""Seeded synthetic datasets used by the tests, demos and acceptance suite."""
import os

import numpy as np

from .ingest import FeatureMatrix, LabelVector, write_labels, write_matrix

KINDS = ("expression", "methylation", "copy-number")


def planted_latent_dataset(n_samples=200, n_features=20, rank=3, noise=0.05, seed=0):
    """Rows ``z @ A + noise`` with standard normal ``z`` (rank-dim) and mixing ``A``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, rank))
    a = rng.standard_normal((rank, n_features))
    return z @ a + noise * rng.standard_normal((n_samples, n_features))


def toy_minority(n=64, center=0.8, spread=0.02, seed=0):
    """1-d minority sample tightly clustered around ``center``, clipped to [0, 1]."""
    rng = np.random.default_rng(seed)
    return np.clip(center + spread * rng.standard_normal((n, 1)), 0.0, 1.0)


def make_multiomics(n_samples=300, minority_fraction=0.1, n_features=500, n_informative=20,
                    effect=(0.4, 0.9), n_bad_symbols=5, seed=0):
    """Three matrices (expression, methylation, copy number) plus binary labels.

    Class 1 is the minority. Each matrix carries ``n_informative`` features
    whose class-1 distribution is shifted by an effect drawn from ``effect``
    (in within-class standard deviations); every other feature is noise.
    Expression values are positive (log-normal), methylation values are
    beta-like fractions, copy-number values are centred log-ratios. The
    expression matrix also holds ``n_bad_symbols`` features whose names are
    not gene symbols.
    """
    rng = np.random.default_rng(seed)
    n_min = int(round(minority_fraction * n_samples))
    y = np.zeros(n_samples, dtype=np.int64)
    y[rng.choice(n_samples, n_min, replace=False)] = 1
    ids = [f"S{i:04d}" for i in range(n_samples)]

    def shifts():
        s = np.zeros(n_features)
        inf = rng.choice(n_features, n_informative, replace=False)
        s[inf] = rng.uniform(*effect, n_informative) * rng.choice([-1.0, 1.0], n_informative)
        return s, np.sort(inf)

    mats, informative = [], {}

    # expression: log2 scale N(mu, sd), shifted for class 1, exponentiated
    s, inf = shifts()
    mu = rng.uniform(4.0, 8.0, n_features)
    sd = rng.uniform(0.6, 1.2, n_features)
    log2x = mu + sd * rng.standard_normal((n_samples, n_features)) + np.outer(y, s * sd * 2.0)
    expr = np.exp2(log2x)
    names = [f"EXPR{j:04d}" for j in range(n_features)]
    if n_bad_symbols:
        bad = 2.0 ** (6 + rng.standard_normal((n_samples, n_bad_symbols)))
        expr = np.hstack([expr, bad])
        names += [f"?|{100000 + j}" for j in range(n_bad_symbols)]
    mats.append(FeatureMatrix("expression", ids, names, expr))
    informative["expression"] = [names[j] for j in inf]

    # methylation: logistic of a shifted normal logit; informative probes sit at low methylation
    s, inf = shifts()
    base = rng.uniform(-2.5, 2.5, n_features)
    base[inf] = rng.uniform(-3.0, -1.5, len(inf))
    logit = base + 0.5 * rng.standard_normal((n_samples, n_features)) + np.outer(y, s * 0.5 * 3.0)
    meth = 1.0 / (1.0 + np.exp(-logit))
    names = [f"METH{j:04d}" for j in range(n_features)]
    mats.append(FeatureMatrix("methylation", ids, names, meth))
    informative["methylation"] = [names[j] for j in inf]

    # copy number: centred log2 ratios
    s, inf = shifts()
    sd = rng.uniform(0.2, 0.4, n_features)
    cna = sd * rng.standard_normal((n_samples, n_features)) + np.outer(y, s * sd * 2.0)
    names = [f"CNA{j:04d}" for j in range(n_features)]
    mats.append(FeatureMatrix("copy-number", ids, names, cna))
    informative["copy-number"] = [names[j] for j in inf]

    return mats, LabelVector(ids, y, "1"), informative


def write_multiomics(directory, seed=0, gan_enabled=True, config_extra="", **kwargs):
    """Write the dataset as TSV files plus a ready-to-run ``config.ini``; returns its path."""
    os.makedirs(directory, exist_ok=True)
    mats, labels, _ = make_multiomics(seed=seed, **kwargs)
    lines = ["[run]", f"seed = {seed}", "split = 0.8", ""]
    lines += ["[data]", "labels = labels.tsv", ""]
    for m in mats:
        fname = f"{m.kind}.tsv"
        write_matrix(m, os.path.join(directory, fname))
        lines += [f"[matrix.{m.kind}]", f"path = {fname}", f"kind = {m.kind}",
                  "latent_dim = 8", ""]
    write_labels(labels, os.path.join(directory, "labels.tsv"))
    lines += ["[gan]", f"enabled = {'true' if gan_enabled else 'false'}", ""]
    path = os.path.join(directory, "config.ini")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + config_extra)
    return path

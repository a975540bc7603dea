"""End-to-end orchestration: ingest, select, autoencode, fuse, balance, classify, report.

Every stage is a function from one :class:`RunState` to the next. A full run
chains them in memory; the CLI stage subcommands persist each state to
``<stage>.state`` and reload it, which gives byte-identical results because
the state container stores raw float64 bytes and each stage draws from its
own named child of the run seed.

Leakage discipline: the train/test split is drawn once, right after the
samples are aligned, and every fitted statistic or model sees training rows
only. Each fit records a hash of the sample IDs it saw in the manifest.
"""
import configparser
import dataclasses
import hashlib
import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import autoencoder as ae
from . import checkpoint as ck
from . import classifier as clf
from . import gan as gan_mod
from . import metrics
from .errors import ArtifactError, ConfigError, DataError, NumericError, PipelineError
from .featsel import Thresholds, apply_selection, select_features
from .ingest import (FEATURES_BY_SAMPLES, ORIENTATIONS, FeatureMatrix, align_samples,
                     impute_missing, load_gene_list, load_labels, load_matrix,
                     restrict_to_gene_list, validate_gene_symbols)
from .nn import check_finite
from .rng import RngHandle, uniform_split

log = logging.getLogger(__name__)

STAGES = ("select", "train-ae", "fuse", "oversample", "train-clf", "evaluate")
STATE_SUFFIX = ".state"
MANIFEST = "manifest.json"
REPORT = "report.json"
LOCK = ".pipeline.lock"


# configuration

@dataclass(frozen=True)
class MatrixSpec:
    name: str
    path: str
    kind: str
    orientation: str = FEATURES_BY_SAMPLES
    latent_dim: int = 64
    validate_symbols: bool = True
    restrict_to_gene_list: bool = False


@dataclass(frozen=True)
class AutoencoderSettings:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3


@dataclass(frozen=True)
class ClassifierSettings:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    validation_split: float = 0.2
    threshold: float = 0.5


@dataclass(frozen=True)
class PipelineConfig:
    matrices: tuple
    labels_path: str
    positive_class: str = None
    gene_list_path: str = None
    thresholds: Thresholds = Thresholds()
    autoencoder: AutoencoderSettings = AutoencoderSettings()
    gan: gan_mod.GanConfig = gan_mod.GanConfig()
    gan_enabled: bool = True
    classifier: ClassifierSettings = ClassifierSettings()
    split: float = 0.8
    seed: int = 0
    max_missing_fraction: float = 0.2
    out_dir: str = None

    def to_dict(self):
        """Canonical, JSON-ready form (without ``out_dir``, which does not affect results)."""
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        d["matrices"] = [dataclasses.asdict(m) for m in self.matrices]
        return d

    @classmethod
    def from_dict(cls, d, out_dir=None):
        d = dict(d)
        return cls(matrices=tuple(MatrixSpec(**m) for m in d.pop("matrices")),
                   thresholds=Thresholds(**d.pop("thresholds")),
                   autoencoder=AutoencoderSettings(**d.pop("autoencoder")),
                   gan=gan_mod.GanConfig(**d.pop("gan")),
                   classifier=ClassifierSettings(**d.pop("classifier")),
                   out_dir=out_dir, **d)

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _section_values(parser, section, cls, skip=()):
    if not parser.has_section(section):
        return {}
    out = {}
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    for key, raw in parser.items(section):
        if key in skip:
            continue
        if key not in types:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        default = defaults[key]
        try:
            if isinstance(default, bool):
                out[key] = parser.getboolean(section, key)
            elif isinstance(default, int):
                out[key] = int(raw)
            elif isinstance(default, float):
                out[key] = float(raw)
            else:
                out[key] = raw
        except ValueError as err:
            raise ConfigError(f"[{section}] {key}: {err}") from None
    return out


def load_config(path, seed=None, out_dir=None, gan_enabled=None):
    """Parse an INI-style config. Relative paths resolve against the config's directory.

    Sections: ``[run]`` (seed, split, max_missing_fraction), ``[data]`` (labels,
    positive_class, gene_list), one ``[matrix.<name>]`` per matrix, and optional
    ``[selection]``, ``[autoencoder]``, ``[gan]``, ``[classifier]``.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from None
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.normpath(os.path.join(base, p))

    known = {"run", "data", "selection", "autoencoder", "gan", "classifier"}
    for section in parser.sections():
        if section not in known and not section.startswith("matrix."):
            raise ConfigError(f"unknown config section [{section}]")

    matrices = []
    for section in parser.sections():
        if not section.startswith("matrix."):
            continue
        vals = _section_values(parser, section, MatrixSpec, skip=("name",))
        if "path" not in vals:
            raise ConfigError(f"[{section}] needs a path")
        name = section.split(".", 1)[1]
        vals.setdefault("kind", name)
        matrices.append(MatrixSpec(name=name, **{**vals, "path": resolve(vals["path"])}))
    if not matrices:
        raise ConfigError("config lists no [matrix.<name>] section")

    data = dict(parser.items("data")) if parser.has_section("data") else {}
    if "labels" not in data:
        raise ConfigError("[data] labels is required")
    run = dict(parser.items("run")) if parser.has_section("run") else {}
    gan_vals = _section_values(parser, "gan", gan_mod.GanConfig, skip=("enabled",))
    enabled = parser.getboolean("gan", "enabled", fallback=True) if parser.has_section("gan") else True
    try:
        cfg = PipelineConfig(
            matrices=tuple(matrices),
            labels_path=resolve(data["labels"]),
            positive_class=data.get("positive_class") or None,
            gene_list_path=resolve(data["gene_list"]) if data.get("gene_list") else None,
            thresholds=Thresholds(**_section_values(parser, "selection", Thresholds)),
            autoencoder=AutoencoderSettings(**_section_values(parser, "autoencoder",
                                                              AutoencoderSettings)),
            gan=gan_mod.GanConfig(**gan_vals),
            gan_enabled=enabled if gan_enabled is None else gan_enabled,
            classifier=ClassifierSettings(**_section_values(parser, "classifier",
                                                            ClassifierSettings)),
            split=float(run.get("split", 0.8)),
            seed=int(run.get("seed", 0)) if seed is None else int(seed),
            max_missing_fraction=float(run.get("max_missing_fraction", 0.2)),
            out_dir=out_dir or (resolve(run["out"]) if run.get("out") else None),
        )
    except (ValueError, TypeError) as err:
        raise ConfigError(f"{path}: {err}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if not cfg.matrices:
        raise ConfigError("at least one matrix is required")
    if not 0.0 < cfg.split < 1.0:
        raise ConfigError(f"split must lie in (0, 1), got {cfg.split}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    names = [m.name for m in cfg.matrices]
    if len(set(names)) != len(names):
        raise ConfigError("matrix names must be unique")
    for m in cfg.matrices:
        if m.orientation not in ORIENTATIONS:
            raise ConfigError(f"matrix {m.name}: orientation must be one of {ORIENTATIONS}")
        if m.latent_dim < 1:
            raise ConfigError(f"matrix {m.name}: latent_dim must be >= 1")
        if not os.path.isfile(m.path):
            raise ConfigError(f"matrix {m.name}: file not found: {m.path}")
        if m.restrict_to_gene_list and not cfg.gene_list_path:
            raise ConfigError(f"matrix {m.name}: restrict_to_gene_list needs [data] gene_list")
    if not os.path.isfile(cfg.labels_path):
        raise ConfigError(f"label file not found: {cfg.labels_path}")
    if cfg.gene_list_path and not os.path.isfile(cfg.gene_list_path):
        raise ConfigError(f"gene list not found: {cfg.gene_list_path}")


# run state

def ids_hash(ids):
    return hashlib.sha256("\n".join(sorted(ids)).encode("utf-8")).hexdigest()


@dataclass
class Block:
    name: str
    kind: str
    features: list
    train: np.ndarray
    test: np.ndarray


@dataclass
class RunState:
    stage: str
    config: dict
    train_ids: list
    test_ids: list
    y_train: np.ndarray
    y_test: np.ndarray
    blocks: list = field(default_factory=list)
    fused_train: np.ndarray = None
    fused_test: np.ndarray = None
    balanced_x: np.ndarray = None
    balanced_y: np.ndarray = None
    synthetic: np.ndarray = None
    manifest: dict = field(default_factory=dict)

    @property
    def cfg(self):
        return PipelineConfig.from_dict(self.config)


def save_state(state, path):
    meta = {"stage": state.stage, "config": state.config, "train_ids": state.train_ids,
            "test_ids": state.test_ids, "manifest": state.manifest,
            "blocks": [{"name": b.name, "kind": b.kind, "features": list(b.features)}
                       for b in state.blocks]}
    arrays = {"y_train": state.y_train, "y_test": state.y_test}
    for i, b in enumerate(state.blocks):
        arrays[f"block/{i}/train"] = b.train
        arrays[f"block/{i}/test"] = b.test
    for name in ("fused_train", "fused_test", "balanced_x", "balanced_y", "synthetic"):
        value = getattr(state, name)
        if value is not None:
            arrays[name] = value
    ck.save_checkpoint(path, "run-state", meta, arrays)


def load_state(path, expect_stage):
    meta, arrays = ck.load_checkpoint(path, "run-state")
    if meta.get("stage") != expect_stage:
        raise ArtifactError(f"{path}: holds stage {meta.get('stage')!r}, expected {expect_stage!r}")
    blocks = [Block(b["name"], b["kind"], b["features"], arrays[f"block/{i}/train"],
                    arrays[f"block/{i}/test"]) for i, b in enumerate(meta["blocks"])]
    return RunState(meta["stage"], meta["config"], meta["train_ids"], meta["test_ids"],
                    arrays["y_train"], arrays["y_test"], blocks,
                    arrays.get("fused_train"), arrays.get("fused_test"),
                    arrays.get("balanced_x"), arrays.get("balanced_y"),
                    arrays.get("synthetic"), meta["manifest"])


class Output:
    """Writes artifacts into one directory and records them in the manifest."""

    def __init__(self, directory, state=None):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.state = state

    def path(self, name):
        if self.state is not None:
            files = self.state.manifest.setdefault("artifacts", [])
            if name not in files:
                files.append(name)
        return os.path.join(self.directory, name)


@contextmanager
def output_lock(directory):
    os.makedirs(directory, exist_ok=True)
    lock = os.path.join(directory, LOCK)
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f"{directory} is locked by another run (remove {LOCK} if stale)") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        os.remove(lock)


def _record_fit(state, name, sample_ids, rows="train"):
    fits = state.manifest.setdefault("leakage", {}).setdefault("fits", {})
    fits[name] = {"ids_hash": ids_hash(sample_ids), "n": len(sample_ids), "rows": rows}


def _record_counts(state, stage, **counts):
    state.manifest.setdefault("stages", {})[stage] = counts


# stages

def stage_select(cfg, out=None):
    """Load, align, split, then fit imputation and feature selection on training rows."""
    labels = load_labels(cfg.labels_path, cfg.positive_class)
    genes = load_gene_list(cfg.gene_list_path) if cfg.gene_list_path else None
    raw, rejected = [], {}
    for spec in cfg.matrices:
        m = load_matrix(spec.path, spec.kind, spec.orientation, impute=False)
        m = FeatureMatrix(spec.name, m.sample_ids, m.feature_names, m.values)
        if spec.validate_symbols:
            m, bad = validate_gene_symbols(m)
            rejected[spec.name] = len(bad)
            if not m.feature_names:
                raise DataError(f"matrix {spec.name}: no feature name looks like a gene symbol")
        if spec.restrict_to_gene_list:
            m = restrict_to_gene_list(m, genes)
        raw.append(m)
    aligned, labels = align_samples(raw, labels)
    n = len(labels.sample_ids)
    train_idx, test_idx = uniform_split(RngHandle(cfg.seed).child("split"), n, cfg.split)
    y = labels.labels
    train_ids = [labels.sample_ids[i] for i in train_idx]
    test_ids = [labels.sample_ids[i] for i in test_idx]
    if len(np.unique(y[train_idx])) < 2:
        raise DataError("training partition holds a single class")
    minority = int(np.argmin(np.bincount(y[train_idx], minlength=2)))

    state = RunState("select", cfg.to_dict(), train_ids, test_ids,
                     y[train_idx].astype(np.int64), y[test_idx].astype(np.int64))
    state.manifest = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "positive_class": labels.positive_class_name,
        "artifacts": [],
        "leakage": {"train_ids": train_ids, "test_ids": test_ids,
                    "train_ids_hash": ids_hash(train_ids), "test_ids_hash": ids_hash(test_ids),
                    "train_minority_ids_hash": ids_hash(
                        [s for s, lab in zip(train_ids, y[train_idx]) if lab == minority]),
                    "fits": {}},
    }
    if out is not None:
        out.state = state
    counts = {"samples": n, "train": len(train_ids), "test": len(test_ids), "matrices": {}}
    for spec, m in zip(cfg.matrices, aligned):
        tr, te = m.take_rows(train_idx), m.take_rows(test_idx)
        filled, kept, means = impute_missing(m.values, train_idx, cfg.max_missing_fraction)
        if not kept.any():
            raise DataError(f"matrix {spec.name}: every feature exceeds the missing-value limit")
        _record_fit(state, f"impute/{spec.name}", tr.sample_ids)
        names = [f for f, k in zip(m.feature_names, kept) if k]
        tr = FeatureMatrix(spec.name, tr.sample_ids, names, filled[train_idx])
        te = FeatureMatrix(spec.name, te.sample_ids, names, filled[test_idx])
        try:
            tr_sel, report = select_features(tr, state.y_train, cfg.thresholds)
        except DataError as err:
            raise type(err)(f"matrix {spec.name}: {err}") from None
        _record_fit(state, f"select/{spec.name}", tr.sample_ids)
        te_sel = apply_selection(te, report)
        if out is not None:
            report.to_tsv(out.path(f"selection_{spec.name}.tsv"))
        state.blocks.append(Block(spec.name, spec.kind, list(tr_sel.feature_names),
                                  check_finite(tr_sel.values, f"{spec.name} train"),
                                  check_finite(te_sel.values, f"{spec.name} test")))
        counts["matrices"][spec.name] = {"features_loaded": len(m.feature_names),
                                         "rejected_symbols": rejected.get(spec.name, 0),
                                         "features_after_missing": len(names),
                                         "features_selected": len(tr_sel.feature_names)}
    _record_counts(state, "select", **counts)
    return state


def _effective_latent_dim(requested, n_features, name):
    if n_features < 2:
        raise DataError(f"matrix {name}: only {n_features} feature(s) survived selection; "
                        "an autoencoder needs at least 2")
    if requested >= n_features:
        log.warning("matrix %s: latent_dim %d >= %d selected features; using %d",
                    name, requested, n_features, n_features - 1)
        return n_features - 1
    return requested


def stage_train_ae(state, out=None):
    cfg = state.cfg
    settings = cfg.autoencoder
    specs = {m.name: m for m in cfg.matrices}
    root = RngHandle(cfg.seed)
    new_blocks, counts = [], {}
    for b in state.blocks:
        k = _effective_latent_dim(specs[b.name].latent_dim, len(b.features), b.name)
        scaler = ae.fit_scaler(b.train)
        model = ae.train_autoencoder(ae.apply_scaler(b.train, scaler), k,
                                     root.child(f"autoencoder/{b.name}"),
                                     epochs=settings.epochs, batch_size=settings.batch_size,
                                     learning_rate=settings.learning_rate, scaler=scaler)
        _record_fit(state, f"autoencoder/{b.name}", state.train_ids)
        h_train = ae.encode(model, ae.apply_scaler(b.train, scaler))
        h_test = ae.encode(model, ae.apply_scaler(b.test, scaler))
        if out is not None:
            save_autoencoder(model, out.path(f"ae_{b.name}.ckpt"), b.name, b.features)
            ae.write_loss_trace(out.path(f"ae_{b.name}_loss.tsv"), model.loss_trace)
        new_blocks.append(Block(b.name, b.kind, [f"{b.name}:h{j}" for j in range(k)],
                                check_finite(h_train, "latent"), check_finite(h_test, "latent")))
        counts[b.name] = {"input_features": len(b.features), "latent_dim": k,
                          "final_mse": model.loss_trace[-1]}
    state.blocks = new_blocks
    state.stage = "train-ae"
    _record_counts(state, "train-ae", **counts)
    return state


def stage_fuse(state, out=None):
    train = ae.fuse_latents([ae.LatentBlock(b.name, tuple(state.train_ids), b.train)
                             for b in state.blocks])
    test = ae.fuse_latents([ae.LatentBlock(b.name, tuple(state.test_ids), b.test)
                            for b in state.blocks])
    state.fused_train, state.fused_test = train.fused, test.fused
    state.stage = "fuse"
    _record_counts(state, "fuse", width=int(train.fused.shape[1]), widths=train.widths,
                   train_rows=int(train.fused.shape[0]), test_rows=int(test.fused.shape[0]))
    return state


def stage_oversample(state, out=None):
    cfg = state.cfg
    x, y = state.fused_train, state.y_train
    counts = np.bincount(y, minlength=2)
    if not cfg.gan_enabled or counts[0] == counts[1]:
        state.balanced_x, state.balanced_y = x.copy(), y.copy()
        state.synthetic = np.zeros(len(y), dtype=bool)
    else:
        root = RngHandle(cfg.seed)
        x01, scaler = gan_mod.normalize_latent(x)
        _record_fit(state, "gan/normalizer", state.train_ids)
        minority = int(np.argmin(counts))
        rows = np.flatnonzero(y == minority)
        model = gan_mod.train_gan(x01[rows], cfg.gan, root.child("gan/train"))
        model.normalizer = scaler
        _record_fit(state, "gan/model", [state.train_ids[i] for i in rows], rows="train-minority")
        bx, by, flags = gan_mod.oversample_to_balance(x, y, model, root.child("gan/sample"))
        state.balanced_x, state.balanced_y, state.synthetic = check_finite(bx, "synthetic"), by, flags
        if out is not None:
            save_gan(model, out.path("gan.ckpt"))
            gan_mod.write_loss_history(out.path("gan_loss.tsv"), model.history)
    state.stage = "oversample"
    bc = np.bincount(state.balanced_y, minlength=2)
    _record_counts(state, "oversample", gan_enabled=cfg.gan_enabled,
                   synthetic_rows=int(state.synthetic.sum()),
                   class_counts=[int(bc[0]), int(bc[1])])
    return state


def stage_train_clf(state, out=None):
    cfg = state.cfg
    s = cfg.classifier
    model = clf.train_classifier(state.balanced_x, state.balanced_y,
                                 RngHandle(cfg.seed).child("classifier"), epochs=s.epochs,
                                 batch_size=s.batch_size, learning_rate=s.learning_rate,
                                 validation_split=s.validation_split, threshold=s.threshold)
    _record_fit(state, "classifier", state.train_ids)
    state.manifest["leakage"]["fits"]["classifier"]["synthetic_rows"] = int(state.synthetic.sum())
    state.stage = "train-clf"
    n = len(state.balanced_y)
    n_val = int(np.floor(s.validation_split * n + 0.5))
    _record_counts(state, "train-clf", rows=n, validation_rows=n_val,
                   final_train_bce=model.train_loss[-1],
                   final_val_bce=model.val_loss[-1] if model.val_loss else None)
    if out is not None:
        save_classifier(model, out.path("classifier.ckpt"))
        with open(out.path("classifier_loss.tsv"), "w", encoding="utf-8") as fh:
            fh.write("epoch\ttrain_bce\tval_bce\n")
            for i, tl in enumerate(model.train_loss):
                vl = model.val_loss[i] if i < len(model.val_loss) else float("nan")
                fh.write(f"{i + 1}\t{tl!r}\t{vl!r}\n")
    return state, model


def stage_evaluate(state, model, out=None):
    cfg = state.cfg
    prob = clf.predict_proba(model, state.fused_test)
    check_finite(prob, "test probabilities")
    n_bal = len(state.balanced_y)
    sizes = {"train": len(state.train_ids), "test": len(state.test_ids),
             "train_synthetic": int(state.synthetic.sum()),
             "train_balanced": n_bal,
             "validation": int(np.floor(cfg.classifier.validation_split * n_bal + 0.5)),
             "test_positive": int(np.sum(state.y_test == 1))}
    report = metrics.evaluate(state.y_test, prob, cfg.seed, sizes, model.threshold)
    state.stage = "evaluate"
    if out is not None:
        with open(out.path(REPORT), "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        metrics.write_roc_tsv(out.path("roc.tsv"), report.roc_points)
        metrics.write_roc_svg(out.path("roc.svg"), report.roc_points, report.auc)
    _record_counts(state, "evaluate", test_rows=len(state.y_test), auc=report.auc,
                   accuracy=report.accuracy)
    return report


# model checkpoints

def save_autoencoder(model, path, name="", features=()):
    arrays = {**ck.network_arrays("net", [model.encoder, model.decoder]),
              "scaler/min": model.input_scaler.mins, "scaler/max": model.input_scaler.maxs,
              "loss_trace": np.asarray(model.loss_trace)}
    ck.save_checkpoint(path, "autoencoder", {"name": name, "features": list(features),
                                             "latent_dim": model.latent_dim,
                                             "activations": ck.activations_of(model.network)},
                       arrays)


def load_autoencoder(path):
    meta, arrays = ck.load_checkpoint(path, "autoencoder")
    enc, dec = ck.network_from_arrays("net", meta["activations"], arrays)
    return ae.AutoencoderModel(enc, dec, ae.MinMaxScaler(arrays["scaler/min"], arrays["scaler/max"]),
                               meta["latent_dim"], list(arrays["loss_trace"]))


def save_gan(model, path):
    arrays = {**ck.network_arrays("generator", model.generator),
              **ck.network_arrays("discriminator", model.discriminator),
              "history": np.asarray(model.history).reshape(-1, 2)}
    if model.normalizer is not None:
        arrays["normalizer/min"] = model.normalizer.mins
        arrays["normalizer/max"] = model.normalizer.maxs
    ck.save_checkpoint(path, "gan", {"noise_dim": model.noise_dim,
                                     "generator": ck.activations_of(model.generator),
                                     "discriminator": ck.activations_of(model.discriminator)},
                       arrays)


def load_gan(path):
    meta, arrays = ck.load_checkpoint(path, "gan")
    model = gan_mod.GanModel(ck.network_from_arrays("generator", meta["generator"], arrays),
                             ck.network_from_arrays("discriminator", meta["discriminator"], arrays),
                             meta["noise_dim"], history=[tuple(r) for r in arrays["history"]])
    if "normalizer/min" in arrays:
        model.normalizer = ae.MinMaxScaler(arrays["normalizer/min"], arrays["normalizer/max"])
    return model


def save_classifier(model, path):
    arrays = {**ck.network_arrays("net", model.network),
              "train_loss": np.asarray(model.train_loss), "val_loss": np.asarray(model.val_loss)}
    ck.save_checkpoint(path, "classifier", {"threshold": model.threshold,
                                            "activations": ck.activations_of(model.network)},
                       arrays)


def load_classifier(path):
    meta, arrays = ck.load_checkpoint(path, "classifier")
    l1, l2 = ck.network_from_arrays("net", meta["activations"], arrays)
    return clf.ClassifierModel(l1, l2, meta["threshold"], list(arrays["train_loss"]),
                               list(arrays["val_loss"]))


# leakage check and manifest

def check_leakage(manifest):
    """Raise :class:`DataError` unless every fit saw exactly the training IDs
    (or the training minority rows, for the GAN) and train/test are disjoint."""
    leak = manifest["leakage"]
    train, test = set(leak["train_ids"]), set(leak["test_ids"])
    if train & test:
        raise DataError(f"{len(train & test)} sample(s) are in both partitions")
    if ids_hash(leak["train_ids"]) != leak["train_ids_hash"]:
        raise DataError("recorded training ID hash does not match the training IDs")
    expected = {"train": leak["train_ids_hash"], "train-minority": leak["train_minority_ids_hash"]}
    if not leak["fits"]:
        raise DataError("manifest records no fitted component")
    for name, fit in leak["fits"].items():
        if fit["ids_hash"] != expected[fit["rows"]]:
            raise DataError(f"{name} was fitted on rows other than the {fit['rows']} set")
    return True


def _write_manifest(out_dir, state, timings):
    manifest = dict(state.manifest)
    manifest["wall_clock_seconds"] = timings
    manifest["completed_stage"] = state.stage
    with open(os.path.join(out_dir, MANIFEST), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


@contextmanager
def _stage(name, timings):
    start = time.perf_counter()
    log.info("stage %s: start", name)
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            yield
    except PipelineError as err:
        if err.stage is None:
            err.stage = name
        raise
    except FloatingPointError as err:
        raise NumericError(f"floating point failure: {err}", stage=name) from err
    finally:
        timings[name] = round(time.perf_counter() - start, 6)
    log.info("stage %s: done in %.2fs", name, timings[name])


def run_pipeline(cfg, out_dir=None, write=True):
    """Execute all stages in order; returns ``(report, manifest)``.

    With ``write`` the state after each stage, model checkpoints, selection
    reports, loss traces, ``report.json``, ROC TSV/SVG and ``manifest.json``
    go to ``out_dir`` (default ``cfg.out_dir``).
    """
    out_dir = out_dir or cfg.out_dir
    if write and not out_dir:
        raise ConfigError("no output directory given")
    timings = {}
    with (output_lock(out_dir) if write else _null()):
        out = Output(out_dir) if write else None
        state = None
        try:
            with _stage("select", timings):
                state = stage_select(cfg, out)
                if out:
                    save_state(state, out.path("select" + STATE_SUFFIX))
            with _stage("train-ae", timings):
                state = stage_train_ae(state, out)
                if out:
                    save_state(state, out.path("train-ae" + STATE_SUFFIX))
            with _stage("fuse", timings):
                state = stage_fuse(state, out)
                if out:
                    save_state(state, out.path("fuse" + STATE_SUFFIX))
            with _stage("oversample", timings):
                state = stage_oversample(state, out)
                if out:
                    save_state(state, out.path("oversample" + STATE_SUFFIX))
            with _stage("train-clf", timings):
                state, model = stage_train_clf(state, out)
                if out:
                    save_state(state, out.path("train-clf" + STATE_SUFFIX))
            with _stage("evaluate", timings):
                report = stage_evaluate(state, model, out)
                check_leakage(state.manifest)
        finally:
            if out and state is not None:
                _write_manifest(out_dir, state, timings)
    return report, state.manifest


@contextmanager
def _null():
    yield


def run_stage(stage, in_dir=None, out_dir=None, cfg=None):
    """Run one stage from the previous stage's artifacts in ``in_dir``."""
    if stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}")
    if not out_dir:
        raise ConfigError("stage commands need --out")
    timings = {}
    if in_dir:
        prev = os.path.join(in_dir, MANIFEST)
        if os.path.isfile(prev):
            with open(prev, encoding="utf-8") as fh:
                timings.update(json.load(fh).get("wall_clock_seconds", {}))
    with output_lock(out_dir):
        out = Output(out_dir)
        state = None
        try:
            with _stage(stage, timings):
                if stage == "select":
                    if cfg is None:
                        raise ConfigError("select needs --config")
                    state = stage_select(cfg, out)
                else:
                    if not in_dir:
                        raise ConfigError(f"{stage} needs --in")
                    prev_stage = STAGES[STAGES.index(stage) - 1]
                    state = load_state(os.path.join(in_dir, prev_stage + STATE_SUFFIX), prev_stage)
                    out.state = state
                    if stage == "train-ae":
                        stage_train_ae(state, out)
                    elif stage == "fuse":
                        stage_fuse(state, out)
                    elif stage == "oversample":
                        stage_oversample(state, out)
                    elif stage == "train-clf":
                        stage_train_clf(state, out)
                    else:
                        model = load_classifier(os.path.join(in_dir, "classifier.ckpt"))
                        stage_evaluate(state, model, out)
                        check_leakage(state.manifest)
                if stage != "evaluate":
                    save_state(state, out.path(stage + STATE_SUFFIX))
        finally:
            if state is not None:
                _write_manifest(out_dir, state, timings)
    return state

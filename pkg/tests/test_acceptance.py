"""Acceptance gate: one test per headline criterion, each printing a PASS/FAIL line."""
import json
import math
import os
import statistics
import time

import numpy as np
import pytest

from aegan_omics import autoencoder as ae
from aegan_omics import featsel, gan, metrics, nn, pipeline
from aegan_omics.metrics import ConfusionCounts, metric_suite
from aegan_omics.rng import RngHandle
from aegan_omics.synthetic import planted_latent_dataset, toy_minority
from conftest import central_diff, record_criterion, rel_err
from oracles import bh_brute_force, concordance_auc, welch_p_quadrature
from test_gan import disc_instance, gen_instance, smooth_instances
from test_nn import GRAD_CASES, two_layer_gradient_errors

E2E_SEEDS = (0, 1, 2, 3, 4)


def test_metric_identity():
    f1_a = metrics.f1_from(1.0, 0.81481)
    f1_b = metrics.f1_from(0.85417, 0.75926)
    # the same values through the count-based suite, counts rebuilt from the reported rates
    s_a = metric_suite(ConfusionCounts(tp=22, tn=75, fp=0, fn=5))
    s_b = metric_suite(ConfusionCounts(tp=41, tn=118, fp=7, fn=13))
    ok = (abs(f1_a - 0.89796) < 1e-4 and abs(f1_b - 0.80392) < 1e-4
          and abs(s_a.f1 - 0.89796) < 1e-4 and abs(s_b.f1 - 0.80392) < 1e-4)
    record_criterion("metric identity", ok,
                     f"F1 {f1_a:.6f} (want 0.89796), {f1_b:.6f} (want 0.80392), tol 1e-4")
    assert ok


def test_gradient_suite():
    start = time.perf_counter()
    worst = {}
    for act1, act2, loss in GRAD_CASES:
        errs, seed = [], 0
        while len(errs) < 20:
            e = two_layer_gradient_errors(seed, act1, act2, loss)
            seed += 1
            if e is not None:
                errs.append(e)
        worst[f"{act1}/{act2}/{loss}"] = max(errs)
    r = np.random.default_rng(0)
    mse_errs, bce_errs = [], []
    for _ in range(20):
        x, xp = r.normal(size=(4, 3)), r.normal(size=(4, 3))
        mse_errs.append(rel_err(nn.mse_loss(x, xp)[1], central_diff(lambda: nn.mse_loss(x, xp)[0], xp)))
        p = r.uniform(0.05, 0.95, size=(6, 1))
        y = (r.uniform(size=(6, 1)) > 0.5).astype(float)
        bce_errs.append(rel_err(nn.bce_loss(p, y)[1], central_diff(lambda: nn.bce_loss(p, y)[0], p)))
    worst["mse"], worst["bce"] = max(mse_errs), max(bce_errs)
    d_errs, g_errs = [], []
    for m, real, fake in smooth_instances(disc_instance):
        _, grads = gan.discriminator_loss(m.discriminator, real, fake)
        f = lambda: gan.discriminator_loss(m.discriminator, real, fake)[0]  # noqa: E731
        d_errs += [rel_err(g, central_diff(f, p)) for g, p in zip(grads, nn.params_of(m.discriminator))]
    for m, noise in smooth_instances(gen_instance):
        _, grads = gan.generator_loss(m.generator, m.discriminator, noise)
        f = lambda: gan.generator_loss(m.generator, m.discriminator, noise)[0]  # noqa: E731
        g_errs += [rel_err(g, central_diff(f, p)) for g, p in zip(grads, nn.params_of(m.generator))]
    worst["L_D"], worst["L_G"] = max(d_errs), max(g_errs)
    elapsed = time.perf_counter() - start
    top = max(worst.values())
    ok = top < 1e-4 and elapsed < 10
    record_criterion("gradient suite", ok,
                     f"{len(worst)} layer/loss cases x 20 instances, worst rel err {top:.2e} "
                     f"(tol 1e-4), {elapsed:.1f}s (budget 10s)")
    assert ok, worst


def test_statistical_oracles():
    start = time.perf_counter()
    r = np.random.default_rng(42)
    bh_ok = True
    for _ in range(1000):
        p = r.uniform(size=r.integers(1, 30))
        if r.uniform() < 0.3:
            p = np.round(p, 2)
        bh_ok &= featsel.bh_adjust(p).tolist() == bh_brute_force(p)
    welch_worst = 0.0
    for _ in range(100):
        a = r.normal(r.uniform(-1.5, 1.5), r.uniform(0.3, 3), r.integers(2, 40))
        b = r.normal(0, r.uniform(0.3, 3), r.integers(2, 40))
        _, p = featsel.welch_t_test(np.r_[a, b], np.r_[np.ones(a.size), np.zeros(b.size)])
        welch_worst = max(welch_worst, abs(p - welch_p_quadrature(a, b)[1]))
    auc_worst = 0.0
    for _ in range(200):
        n = r.integers(4, 60)
        y = r.integers(0, 2, n)
        y[:2] = [0, 1]
        s = np.round(r.uniform(size=n), r.integers(1, 4))
        auc_worst = max(auc_worst, abs(metrics.roc_auc(y, s)[1] - concordance_auc(y, s)))
    elapsed = time.perf_counter() - start
    ok = bh_ok and welch_worst < 1e-6 and auc_worst < 1e-12 and elapsed < 30
    record_criterion("statistical oracles", ok,
                     f"BH exact on 1000 vectors: {bh_ok}; Welch max |dp| {welch_worst:.1e} (tol 1e-6); "
                     f"AUC max diff {auc_worst:.1e} (tol 1e-12); {elapsed:.1f}s (budget 30s)")
    assert ok


def test_autoencoder_efficacy():
    start = time.perf_counter()
    x = planted_latent_dataset(n_samples=200, n_features=20, rank=3, noise=0.05, seed=0)
    x01 = ae.apply_scaler(x, ae.fit_scaler(x))
    model = ae.train_autoencoder(x01, 6, RngHandle(0))
    mse = ae.reconstruction_mse(model, x01)
    baseline = float(np.mean((x01 - x01.mean(axis=0)) ** 2))
    elapsed = time.perf_counter() - start
    ok = mse < 0.5 * baseline and elapsed < 20
    record_criterion("autoencoder efficacy", ok,
                     f"MSE {mse:.5f} = {mse / baseline:.3f} x baseline {baseline:.5f} (need < 0.5), "
                     f"{elapsed:.1f}s (budget 20s)")
    assert ok


def test_gan_efficacy():
    start = time.perf_counter()
    x = toy_minority()
    model = gan.train_gan(x, gan.GanConfig(), RngHandle(0))
    samples = gan.generate(model, 1000, RngHandle(0).child("draw"))
    gap = abs(samples.mean() - x.mean())
    l_d0 = model.history[0][0]
    # near-0.5 start: at initialization the discriminator output is close to one half
    d0 = gan.init_gan(1, gan.GanConfig(), RngHandle(0))
    d_out = nn.predict(d0.discriminator, x)
    elapsed = time.perf_counter() - start
    ok = gap < 0.1 and abs(l_d0 - 2 * math.log(2)) < 0.05 and elapsed < 30
    record_criterion("GAN efficacy", ok,
                     f"synthetic mean {samples.mean():.4f} vs true {x.mean():.4f} (|gap| {gap:.4f}, tol 0.1); "
                     f"initial L_D {l_d0:.4f} vs 2ln2 {2 * math.log(2):.4f} (tol 0.05), "
                     f"D(x) at init in [{d_out.min():.3f}, {d_out.max():.3f}]; {elapsed:.1f}s (budget 30s)")
    assert ok


@pytest.fixture(scope="module")
def e2e(dataset_config, tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e")
    start = time.perf_counter()
    results = {}
    for gan_on in (True, False):
        for seed in E2E_SEEDS:
            cfg = pipeline.load_config(dataset_config, seed=seed, gan_enabled=gan_on)
            out = str(root / f"{'gan' if gan_on else 'nogan'}-{seed}")
            report, manifest = pipeline.run_pipeline(cfg, out_dir=out)
            with open(os.path.join(out, "manifest.json"), encoding="utf-8") as fh:
                on_disk = json.load(fh)
            results[(gan_on, seed)] = (report, manifest, on_disk)
    return results, time.perf_counter() - start


def test_end_to_end_efficacy(e2e):
    results, elapsed = e2e
    acc = [results[(True, s)][0].accuracy for s in E2E_SEEDS]
    rec = [results[(True, s)][0].recall for s in E2E_SEEDS]
    rec_off = [results[(False, s)][0].recall for s in E2E_SEEDS]
    med_acc = statistics.median(acc)
    gain = statistics.median([a - b for a, b in zip(rec, rec_off)])
    ok = med_acc >= 0.90 and gain >= 0.05 and elapsed < 180
    record_criterion("end-to-end efficacy", ok,
                     f"median accuracy {med_acc:.4f} (need >= 0.90); median recall gain over no-GAN "
                     f"{100 * gain:.1f} pp (need >= 5; recall {statistics.median(rec):.3f} vs "
                     f"{statistics.median(rec_off):.3f}); {2 * len(E2E_SEEDS)} runs in {elapsed:.1f}s "
                     "(budget 180s)")
    assert ok


def test_determinism(dataset_config, tmp_path):
    cfg = pipeline.load_config(dataset_config, seed=3)
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    pipeline.run_pipeline(cfg, out_dir=a)
    pipeline.run_pipeline(cfg, out_dir=b)
    prev = None
    for stage in pipeline.STAGES:
        out = str(tmp_path / f"staged-{stage}")
        pipeline.run_stage(stage, in_dir=prev, out_dir=out, cfg=cfg if stage == "select" else None)
        prev = out

    def read(d):
        with open(os.path.join(d, "report.json"), "rb") as fh:
            return fh.read()

    repeat, staged = read(a) == read(b), read(a) == read(prev)
    ok = repeat and staged
    record_criterion("determinism", ok,
                     f"repeat run byte-identical: {repeat}; staged vs monolithic byte-identical: {staged}")
    assert ok


def test_leakage_guard(e2e):
    results, _ = e2e
    checked = 0
    for report, manifest, on_disk in results.values():
        assert pipeline.check_leakage(manifest) and pipeline.check_leakage(on_disk)
        checked += 1
    record_criterion("leakage guard", True,
                     f"manifest ID-hash check passed on all {checked} end-to-end runs "
                     "(in-memory and on-disk manifests)")

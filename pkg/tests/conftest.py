import numpy as np
import pytest

from aegan_omics.rng import RngHandle

ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def dataset_config(tmp_path_factory):
    """Synthetic 3-matrix dataset (seed 0) on disk; returns the config path."""
    from aegan_omics.synthetic import write_multiomics

    return write_multiomics(str(tmp_path_factory.mktemp("multiomics")), seed=0)


@pytest.fixture
def rng():
    return RngHandle(1234)


@pytest.fixture
def nprng():
    return np.random.default_rng(20240601)


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of scalar ``f`` w.r.t. array ``x`` (perturbed in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f()
        x[i] = old - h
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)


KINK_MARGIN = 1e-3


def relu_margin(network, x):
    """Smallest |pre-activation| over all ReLU units for input ``x``.

    Central differences are only meaningful when no step of size ``h``
    pushes a ReLU unit across zero, so gradient checks draw instances
    whose margin exceeds ``KINK_MARGIN``.
    """
    from aegan_omics import nn

    out = np.asarray(x, dtype=np.float64)
    margin = np.inf
    for layer in network:
        pre = out @ layer.weights.T + layer.biases
        if layer.activation == nn.RELU:
            margin = min(margin, float(np.abs(pre).min()))
        out = nn.activation_apply(layer.activation, pre)
    return margin

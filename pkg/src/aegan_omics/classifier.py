"""Dense binary classifier: 128 ReLU units, one sigmoid output, Adam on BCE."""
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import DataError, ShapeError

HIDDEN = 128


@dataclass
class ClassifierModel:
    layer1: nn.DenseLayer
    layer2: nn.DenseLayer
    threshold: float = 0.5
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)

    @property
    def network(self):
        return [self.layer1, self.layer2]

    @property
    def width(self):
        return self.layer1.n_in


def init_classifier(width, rng, zero_output_layer=False, threshold=0.5):
    l1 = nn.init_dense(width, HIDDEN, nn.RELU, rng)
    l2 = nn.init_dense(HIDDEN, 1, nn.SIGMOID, rng)
    if zero_output_layer:
        l2 = nn.DenseLayer(np.zeros_like(l2.weights), np.zeros_like(l2.biases), nn.SIGMOID)
    return ClassifierModel(l1, l2, threshold)


def train_classifier(latent, labels, rng, epochs=10, batch_size=32, learning_rate=1e-3,
                     validation_split=0.2, threshold=0.5):
    """Shuffle once, hold out the last ``validation_split`` of rows, then run
    ``epochs`` passes of shuffled minibatch Adam on binary cross-entropy.

    Per-epoch training loss (sample-weighted batch mean) and full validation
    loss are recorded on the model.
    """
    x = nn.as_matrix(latent)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ShapeError("label count mismatch", expected=x.shape[0], got=y.shape[0])
    if len(np.unique(y)) < 2:
        raise DataError("classifier training rows contain a single class")
    if not 0.0 <= validation_split < 1.0:
        raise ValueError("validation_split must lie in [0, 1)")
    order = rng.permutation(x.shape[0])
    n_val = int(np.floor(validation_split * len(order) + 0.5))
    fit_idx, val_idx = order[:len(order) - n_val], order[len(order) - n_val:]
    if len(np.unique(y[fit_idx])) < 2:
        raise DataError("classifier fitting rows contain a single class after the validation hold-out")
    xf, yf = x[fit_idx], y[fit_idx].reshape(-1, 1)
    xv, yv = x[val_idx], y[val_idx].reshape(-1, 1)

    model = init_classifier(x.shape[1], rng, threshold=threshold)
    net = model.network
    params = nn.params_of(net)
    state = nn.adam_init(params, learning_rate)
    for _ in range(epochs):
        total = 0.0
        for idx in nn.iterate_minibatches(len(xf), batch_size, rng):
            out, cache = nn.forward(net, xf[idx])
            loss, grad = nn.bce_loss(out, yf[idx])
            grads, _ = nn.backprop(net, cache, grad)
            params, state = nn.adam_step(params, nn.grads_flat(grads), state)
            net = nn.with_params(net, params)
            total += loss * len(idx)
        model.train_loss.append(total / len(xf))
        if n_val:
            model.val_loss.append(nn.bce_loss(nn.predict(net, xv), yv)[0])
    nn.check_finite(np.array(model.train_loss + model.val_loss), "classifier loss trace")
    model.layer1, model.layer2 = net
    return model


def predict_proba(model, latent):
    x = nn.as_matrix(latent)
    if x.shape[1] != model.width:
        raise ShapeError("classifier input width mismatch", expected=model.width, got=x.shape[1])
    return nn.predict(model.network, x)[:, 0]


def predict_label(model, latent, threshold=None):
    """Label 1 iff probability >= threshold (ties go to the positive class)."""
    t = model.threshold if threshold is None else threshold
    return (predict_proba(model, latent) >= t).astype(np.int64)

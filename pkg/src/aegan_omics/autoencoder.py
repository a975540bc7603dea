"""Per-matrix single-hidden-layer autoencoders and latent fusion.

Encoder: ReLU dense layer. Decoder: sigmoid dense layer. Because the decoder
can only emit values in (0, 1), inputs are min-max scaled into [0, 1] with a
scaler fitted on training rows and stored with the model.
"""
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import DataError, ShapeError


@dataclass
class MinMaxScaler:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=np.float64)
        self.maxs = np.asarray(self.maxs, dtype=np.float64)
        if self.mins.shape != self.maxs.shape or np.any(self.maxs < self.mins):
            raise ValueError("scaler needs max >= min per column")


def fit_scaler(values):
    x = nn.as_matrix(values)
    return MinMaxScaler(x.min(axis=0), x.max(axis=0))


def apply_scaler(values, scaler):
    """Map columns to [0, 1]; constant columns become 0.5 and out-of-range values are clipped."""
    x = nn.as_matrix(values)
    if x.shape[1] != scaler.mins.shape[0]:
        raise ShapeError("scaler width mismatch", expected=scaler.mins.shape[0], got=x.shape[1])
    span = scaler.maxs - scaler.mins
    live = span > 0
    out = np.full_like(x, 0.5)
    out[:, live] = (x[:, live] - scaler.mins[live]) / span[live]
    return np.clip(out, 0.0, 1.0)


def invert_scaler(values01, scaler):
    x = nn.as_matrix(values01)
    return scaler.mins + x * (scaler.maxs - scaler.mins)


@dataclass
class AutoencoderModel:
    encoder: nn.DenseLayer
    decoder: nn.DenseLayer
    input_scaler: MinMaxScaler
    latent_dim: int
    loss_trace: list = field(default_factory=list)

    def __post_init__(self):
        if self.encoder.n_out != self.latent_dim or self.decoder.n_in != self.latent_dim:
            raise ShapeError("encoder/decoder latent width disagree", expected=self.latent_dim,
                             got=(self.encoder.n_out, self.decoder.n_in))
        if self.decoder.n_out != self.encoder.n_in:
            raise ShapeError("decoder output must match encoder input",
                             expected=self.encoder.n_in, got=self.decoder.n_out)

    @property
    def network(self):
        return [self.encoder, self.decoder]


def init_autoencoder(n_features, latent_dim, rng, scaler=None, center=None):
    """Fresh model. With ``center`` (a feature vector, usually the training
    column means) encoder biases start at ``-W @ center`` so every code unit
    sits at its kink there instead of starting dead on nonnegative inputs."""
    if scaler is None:
        scaler = MinMaxScaler(np.zeros(n_features), np.ones(n_features))
    enc = nn.init_dense(n_features, latent_dim, nn.RELU, rng)
    if center is not None:
        enc = nn.DenseLayer(enc.weights, -enc.weights @ np.asarray(center, dtype=np.float64),
                            nn.RELU)
    return AutoencoderModel(enc, nn.init_dense(latent_dim, n_features, nn.SIGMOID, rng),
                            scaler, latent_dim)


def train_autoencoder(matrix_01, latent_dim, rng, epochs=100, batch_size=32,
                      learning_rate=1e-3, scaler=None):
    """Fit encoder and decoder by Adam on minibatch MSE.

    ``matrix_01`` must already be scaled into [0, 1]. ``loss_trace`` holds the
    sample-weighted mean training loss of each epoch.
    """
    x = nn.as_matrix(matrix_01)
    n, d = x.shape
    if latent_dim >= d:
        raise DataError(f"latent_dim {latent_dim} must be smaller than the feature count {d}")
    if latent_dim < 1:
        raise DataError("latent_dim must be >= 1")
    if epochs < 1:
        raise DataError("epochs must be >= 1")
    if np.any(x < 0) or np.any(x > 1):
        raise DataError("autoencoder input must be scaled into [0, 1]")
    model = init_autoencoder(d, latent_dim, rng, scaler, center=x.mean(axis=0))
    net = model.network
    params = nn.params_of(net)
    state = nn.adam_init(params, learning_rate)
    trace = []
    for _ in range(epochs):
        total = 0.0
        for idx in nn.iterate_minibatches(n, batch_size, rng):
            xb = x[idx]
            out, cache = nn.forward(net, xb)
            loss, grad = nn.mse_loss(xb, out)
            grads, _ = nn.backprop(net, cache, grad)
            params, state = nn.adam_step(params, nn.grads_flat(grads), state)
            net = nn.with_params(net, params)
            total += loss * len(idx)
        trace.append(total / n)
    nn.check_finite(np.array(trace), "autoencoder loss trace")
    return AutoencoderModel(net[0], net[1], model.input_scaler, latent_dim, trace)


def encode(model, matrix_01):
    return nn.dense_forward(model.encoder, matrix_01)


def decode(model, latent):
    return nn.dense_forward(model.decoder, latent)


def reconstruction_mse(model, matrix_01):
    x = nn.as_matrix(matrix_01)
    return nn.mse_loss(x, decode(model, encode(model, x)))[0]


@dataclass(frozen=True)
class LatentBlock:
    kind: str
    sample_ids: tuple
    values: np.ndarray


@dataclass(frozen=True)
class SharedLatent:
    sample_ids: tuple
    blocks: tuple
    fused: np.ndarray

    @property
    def widths(self):
        return [b.values.shape[1] for b in self.blocks]


def fuse_latents(blocks):
    """Concatenate latent blocks column-wise in the given order."""
    blocks = tuple(blocks)
    if not blocks:
        raise DataError("nothing to fuse")
    ids = tuple(blocks[0].sample_ids)
    for b in blocks[1:]:
        if tuple(b.sample_ids) != ids:
            raise DataError(f"latent block {b.kind!r} is not aligned with {blocks[0].kind!r}")
    fused = np.concatenate([nn.as_matrix(b.values) for b in blocks], axis=1)
    return SharedLatent(ids, blocks, fused)


def write_loss_trace(path, trace):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\tmse\n")
        for i, v in enumerate(trace, start=1):
            fh.write(f"{i}\t{float(v)!r}\n")

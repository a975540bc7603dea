"""GAN oversampling of the minority class in the shared latent space.

Generator: noise -> 128 ReLU -> sigmoid output of latent width.
Discriminator: latent -> 128 ReLU -> 1 sigmoid.

Training alternates discriminator updates on
``-(log D(x) + log(1 - D(G(z))))`` with generator updates on
``-log D(G(z))``. The minimax value itself is never evaluated. The sigmoid
generator lives in a per-column min-max normalized copy of the latent space;
synthetic rows are mapped back with the recorded inverse.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import nn
from .autoencoder import MinMaxScaler, apply_scaler, fit_scaler, invert_scaler
from .errors import DataError, ShapeError
from .rng import standard_normal

HIDDEN = 128


@dataclass(frozen=True)
class GanConfig:
    noise_dim: int = 32
    steps: int = 2000
    batch_size: int = 32
    d_steps_per_g_step: int = 1
    learning_rate: float = 2e-4

    def __post_init__(self):
        for name in ("noise_dim", "steps", "batch_size", "d_steps_per_g_step"):
            if getattr(self, name) < 1:
                raise ValueError(f"GanConfig.{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("GanConfig.learning_rate must be positive")


@dataclass
class GanModel:
    generator: list
    discriminator: list
    noise_dim: int
    g_opt: nn.AdamState = None
    d_opt: nn.AdamState = None
    history: list = field(default_factory=list)  # (L_D, L_G) per iteration
    normalizer: MinMaxScaler = None

    def __post_init__(self):
        width = self.generator[-1].n_out
        if self.discriminator[0].n_in != width:
            raise ShapeError("discriminator input must match generator output",
                             expected=width, got=self.discriminator[0].n_in)
        if self.generator[0].n_in != self.noise_dim:
            raise ShapeError("generator input must match noise_dim",
                             expected=self.noise_dim, got=self.generator[0].n_in)
        if self.g_opt is None:
            self.g_opt = nn.adam_init(nn.params_of(self.generator))
        if self.d_opt is None:
            self.d_opt = nn.adam_init(nn.params_of(self.discriminator))

    @property
    def width(self):
        return self.generator[-1].n_out


def init_gan(width, config, rng):
    gen = [nn.init_dense(config.noise_dim, HIDDEN, nn.RELU, rng),
           nn.init_dense(HIDDEN, width, nn.SIGMOID, rng)]
    disc = [nn.init_dense(width, HIDDEN, nn.RELU, rng),
            nn.init_dense(HIDDEN, 1, nn.SIGMOID, rng)]
    lr = config.learning_rate
    return GanModel(gen, disc, config.noise_dim,
                    nn.adam_init(nn.params_of(gen), lr), nn.adam_init(nn.params_of(disc), lr))


def normalize_latent(latent, fit_rows=None):
    """Min-max normalize latent columns using ``fit_rows``; returns ``(normalized, scaler)``."""
    x = nn.as_matrix(latent)
    scaler = fit_scaler(x if fit_rows is None else x[np.asarray(fit_rows, dtype=int)])
    return apply_scaler(x, scaler), scaler


def denormalize_latent(values01, scaler):
    return invert_scaler(values01, scaler)


def discriminator_loss(discriminator, real, fake):
    """``L_D`` averaged over the batch and its gradient for every discriminator parameter."""
    real, fake = nn.as_matrix(real), nn.as_matrix(fake)
    if real.shape[1] != fake.shape[1]:
        raise ShapeError("real and fake batches differ in width", expected=real.shape[1],
                         got=fake.shape[1])
    d_real, c_real = nn.forward(discriminator, real)
    d_fake, c_fake = nn.forward(discriminator, fake)
    l_real, g_real = nn.bce_loss(d_real, np.ones_like(d_real))
    l_fake, g_fake = nn.bce_loss(d_fake, np.zeros_like(d_fake))
    gr, _ = nn.backprop(discriminator, c_real, g_real)
    gf, _ = nn.backprop(discriminator, c_fake, g_fake)
    grads = [a + b for a, b in zip(nn.grads_flat(gr), nn.grads_flat(gf))]
    return l_real + l_fake, grads


def generator_loss(generator, discriminator, noise):
    """``L_G = -mean log D(G(z))``; gradients flow through the frozen discriminator."""
    fake, c_gen = nn.forward(generator, noise)
    d_fake, c_disc = nn.forward(discriminator, fake)
    loss, g = nn.bce_loss(d_fake, np.ones_like(d_fake))
    _, g_fake = nn.backprop(discriminator, c_disc, g)
    grads, _ = nn.backprop(generator, c_gen, g_fake)
    return loss, nn.grads_flat(grads)


def discriminator_step(model, real_batch, fake_batch):
    """One Adam update of the discriminator only. Returns ``(L_D, new_model)``."""
    if nn.as_matrix(real_batch).shape[1] != model.width:
        raise ShapeError("real batch width mismatch", expected=model.width,
                         got=nn.as_matrix(real_batch).shape[1])
    loss, grads = discriminator_loss(model.discriminator, real_batch, fake_batch)
    params, d_opt = nn.adam_step(nn.params_of(model.discriminator), grads, model.d_opt)
    return loss, replace(model, discriminator=nn.with_params(model.discriminator, params),
                         d_opt=d_opt)


def generator_step(model, noise_batch):
    """One Adam update of the generator only. Returns ``(L_G, new_model)``."""
    noise = nn.as_matrix(noise_batch)
    if noise.shape[1] != model.noise_dim:
        raise ShapeError("noise width mismatch", expected=model.noise_dim, got=noise.shape[1])
    loss, grads = generator_loss(model.generator, model.discriminator, noise)
    params, g_opt = nn.adam_step(nn.params_of(model.generator), grads, model.g_opt)
    return loss, replace(model, generator=nn.with_params(model.generator, params), g_opt=g_opt)


def generate(model, n, rng):
    """``n`` synthetic rows in the normalized (0, 1) space."""
    if n <= 0:
        return np.zeros((0, model.width))
    return nn.predict(model.generator, standard_normal(rng, n, model.noise_dim))


def train_gan(minority_01, config, rng):
    x = nn.as_matrix(minority_01)
    n = x.shape[0]
    if n < 2:
        raise DataError(f"GAN training needs at least 2 minority rows, got {n}")
    batch = min(config.batch_size, n)
    model = init_gan(x.shape[1], config, rng)
    history = []
    for _ in range(config.steps):
        for _ in range(config.d_steps_per_g_step):
            real = x[rng.generator.choice(n, size=batch, replace=False)]
            fake = generate(model, batch, rng)
            l_d, model = discriminator_step(model, real, fake)
        l_g, model = generator_step(model, standard_normal(rng, batch, config.noise_dim))
        history.append((l_d, l_g))
    nn.check_finite(np.array(history), "GAN loss history")
    model.history = history
    return model


def oversample_to_balance(latent, labels, model, rng, normalizer=None):
    """Append generated minority rows until both classes have equal counts.

    ``latent`` is in latent scale; ``normalizer`` (default ``model.normalizer``)
    maps generator output back to it. Returns ``(rows, labels, synthetic)``
    with the original rows first and unchanged.
    """
    x = nn.as_matrix(latent)
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ShapeError("label count mismatch", expected=x.shape[0], got=y.shape[0])
    counts = np.bincount(y, minlength=2)
    if counts[0] == counts[1]:
        return x.copy(), y.copy(), np.zeros(len(y), dtype=bool)
    minority = int(np.argmin(counts))
    need = int(counts.max() - counts.min())
    if x.shape[1] != model.width:
        raise ShapeError("latent width does not match the GAN", expected=model.width,
                         got=x.shape[1])
    scaler = normalizer if normalizer is not None else model.normalizer
    if scaler is None:
        raise DataError("oversampling needs the latent normalizer the GAN was trained with")
    synth = denormalize_latent(generate(model, need, rng), scaler)
    rows = np.vstack([x, synth])
    out_y = np.concatenate([y, np.full(need, minority, dtype=np.int64)])
    flags = np.concatenate([np.zeros(len(y), dtype=bool), np.ones(need, dtype=bool)])
    return rows, out_y, flags


def write_loss_history(path, history):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step\tL_D\tL_G\n")
        for i, (ld, lg) in enumerate(history, start=1):
            fh.write(f"{i}\t{float(ld)!r}\t{float(lg)!r}\n")

"""
Compressing a rank-3 matrix with a one-layer autoencoder
=========================================================

200 samples of 20 features generated from 3 hidden factors plus noise.
"""
import numpy as np

from aegan_omics import autoencoder as ae
from aegan_omics.rng import RngHandle
from aegan_omics.synthetic import planted_latent_dataset

x = planted_latent_dataset(n_samples=200, n_features=20, rank=3, noise=0.05, seed=0)

# the sigmoid decoder can only emit (0, 1), so scale inputs into [0, 1] first
scaler = ae.fit_scaler(x)
x01 = ae.apply_scaler(x, scaler)

baseline = np.mean((x01 - x01.mean(axis=0)) ** 2)
for k in (2, 3, 6):
    model = ae.train_autoencoder(x01, k, RngHandle(0))
    mse = ae.reconstruction_mse(model, x01)
    print(f"latent_dim={k}: mse={mse:.5f}  ({mse / baseline:.2f} x mean predictor)")

# per-epoch training loss
print("loss trace (every 20 epochs):", np.round(model.loss_trace[::20], 5))

# the code itself: nonnegative ReLU features, one row per sample
z = ae.encode(model, x01)
print("latent block", z.shape, "min", z.min())

"""
GAN oversampling of a tight 1-d minority cluster
=================================================

64 minority points sit near 0.8. After training, generated points should
land in the same place, and the discriminator loss should start near 2 ln 2
(both outputs at one half).
"""
import math

import numpy as np

from aegan_omics import gan
from aegan_omics.rng import RngHandle
from aegan_omics.synthetic import toy_minority

x = toy_minority(n=64, center=0.8, spread=0.02, seed=0)
model = gan.train_gan(x, gan.GanConfig(), RngHandle(0))

hist = np.array(model.history)
print(f"L_D at step 1: {hist[0, 0]:.4f}   2 ln 2 = {2 * math.log(2):.4f}")
print("L_D / L_G every 400 steps:")
print(np.round(hist[::400], 3))

fake = gan.generate(model, 1000, RngHandle(1))
print(f"real mean {x.mean():.4f}  synthetic mean {fake.mean():.4f}  synthetic std {fake.std():.4f}")

# balancing a labelled latent table: originals first, synthetic rows appended
latent = np.vstack([np.random.default_rng(0).uniform(0.0, 0.5, (20, 1)), x[:4]])
labels = np.r_[np.zeros(20), np.ones(4)].astype(int)
_, scaler = gan.normalize_latent(latent)
rows, y, synthetic = gan.oversample_to_balance(latent, labels, model, RngHandle(2), scaler)
print("class counts after balancing:", np.bincount(y), " synthetic rows:", synthetic.sum())

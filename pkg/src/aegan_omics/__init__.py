"""Multi-omics binary classification with per-matrix autoencoders, latent
fusion, GAN minority oversampling and a dense classifier, on plain numpy."""
from .errors import (ArtifactError, ConfigError, DataError, NumericError, PipelineError,
                     SelectionError, ShapeError)
from .rng import RngHandle

__version__ = "0.1.0"

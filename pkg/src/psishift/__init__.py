"""Distribution shift detection with the Population Stability Index."""

__version__ = "0.1.0"

from .distribution import (BinnedDistribution, BinningMode, BinningScheme, bin_sample,
                           make_edges)
from .divergence import (DivergenceKind, chi_squared, jensen_shannon, kl_divergence, psi,
                         symmetric_kl, tiled_psi, wasserstein1_binned)
from .harness import box_stats, run_corpus, run_sweep, verdict
from .imaging import ChannelId, Image, channel_samples, list_corpus, load_image
from .noise import NoiseKind, NoiseSpec, apply

__all__ = [
    "BinnedDistribution", "BinningMode", "BinningScheme", "bin_sample", "make_edges",
    "DivergenceKind", "chi_squared", "jensen_shannon", "kl_divergence", "psi",
    "symmetric_kl", "tiled_psi", "wasserstein1_binned",
    "box_stats", "run_corpus", "run_sweep", "verdict",
    "ChannelId", "Image", "channel_samples", "list_corpus", "load_image",
    "NoiseKind", "NoiseSpec", "apply",
]

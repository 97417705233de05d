"""PSI and companion divergences between binned distributions on shared edges.

All logarithms are natural. Every function refuses distributions whose edges
differ rather than re-binning one of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .distribution import BinnedDistribution, BinningScheme, DEFAULT_EPSILON, bin_pair
from .imaging import ChannelId, Image, channel_index


class EdgeMismatchError(ValueError):
    pass


class DivergenceKind(str, enum.Enum):
    PSI = "psi"
    KL = "kl"
    SYMMETRIC_KL = "symmetric_kl"
    JENSEN_SHANNON = "jensen_shannon"
    CHI_SQUARED = "chi_squared"
    WASSERSTEIN1 = "wasserstein1"


def _check_edges(s: BinnedDistribution, t: BinnedDistribution) -> None:
    if s.edges.shape != t.edges.shape or not np.array_equal(s.edges, t.edges):
        raise EdgeMismatchError("distributions do not share bin edges")


def psi_terms(qs: np.ndarray, qt: np.ndarray) -> np.ndarray:
    """Per-bin PSI contributions ``(qs - qt) * ln(qs / qt)``; each is >= 0.

    The log ratio is taken as ``ln qs - ln qt`` so swapping the arguments
    negates both factors exactly and PSI stays bit-for-bit symmetric.
    """
    if np.any(qs <= 0) or np.any(qt <= 0):
        raise ValueError("PSI needs strictly positive proportions; enable smoothing")
    return (qs - qt) * (np.log(qs) - np.log(qt))


def psi(s: BinnedDistribution, t: BinnedDistribution) -> float:
    _check_edges(s, t)
    return float(np.sum(psi_terms(s.proportions, t.proportions)))


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    support = p > 0
    if np.any(q[support] <= 0):
        raise ValueError("KL undefined: target proportion is zero where source is positive")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def kl_divergence(s: BinnedDistribution, t: BinnedDistribution) -> float:
    """KL(S || T) over smoothed proportions."""
    _check_edges(s, t)
    return _kl(s.proportions, t.proportions)


def symmetric_kl(s: BinnedDistribution, t: BinnedDistribution) -> float:
    return kl_divergence(s, t) + kl_divergence(t, s)


def jensen_shannon(s: BinnedDistribution, t: BinnedDistribution) -> float:
    _check_edges(s, t)
    p, q = s.proportions, t.proportions
    m = 0.5 * (p + q)
    return 0.5 * _kl(p, m) + 0.5 * _kl(q, m)


def chi_squared(s: BinnedDistribution, t: BinnedDistribution) -> float:
    """Pearson statistic of target counts against source-expected counts.

    Expectations use the raw source proportions. A source bin that is empty
    falls back to its smoothed proportion when the target has counts there,
    and is skipped when the target bin is empty too.
    """
    _check_edges(s, t)
    occupied = s.counts > 0
    # counts * N_t / N_s rather than N_t * (counts / N_s): exact when N_t == N_s
    expected = np.where(occupied, s.counts * t.total / s.total, t.total * s.proportions)
    used = occupied | (t.counts > 0)
    if np.any(expected[used] <= 0):
        raise ValueError("zero expected count; enable smoothing")
    return float(np.sum((t.counts[used] - expected[used]) ** 2 / expected[used]))


def wasserstein1_binned(s: BinnedDistribution, t: BinnedDistribution) -> float:
    """1-D earth mover's distance between the binned CDFs, weighted by bin width."""
    _check_edges(s, t)
    gap = np.abs(np.cumsum(s.proportions) - np.cumsum(t.proportions))
    return float(np.sum(gap * np.diff(s.edges)))


DIVERGENCES = {
    DivergenceKind.PSI: psi,
    DivergenceKind.KL: kl_divergence,
    DivergenceKind.SYMMETRIC_KL: symmetric_kl,
    DivergenceKind.JENSEN_SHANNON: jensen_shannon,
    DivergenceKind.CHI_SQUARED: chi_squared,
    DivergenceKind.WASSERSTEIN1: wasserstein1_binned,
}


def divergence(kind: DivergenceKind | str, s: BinnedDistribution,
               t: BinnedDistribution) -> float:
    return DIVERGENCES[DivergenceKind(kind)](s, t)


def channel_psi(src: Image, tgt: Image, ch: ChannelId | str, scheme: BinningScheme,
                epsilon: float = DEFAULT_EPSILON) -> float:
    """PSI of one channel of ``tgt`` against the same channel of ``src``."""
    i = channel_index(src, ch)
    channel_index(tgt, ch)
    s, t = bin_pair(src.data[i], tgt.data[i], scheme, epsilon)
    return psi(s, t)


@dataclass(frozen=True)
class TiledPSI:
    tiles: np.ndarray
    global_psi: float
    row_bounds: tuple[int, ...]
    col_bounds: tuple[int, ...]


def tile_bounds(length: int, parts: int) -> tuple[int, ...]:
    """Split ``length`` into ``parts`` runs; the last run absorbs the remainder."""
    if parts < 1 or parts > length:
        raise ValueError(f"cannot split {length} pixels into {parts} tiles")
    step = length // parts
    return tuple(step * k for k in range(parts)) + (length,)


def tiled_psi(src: Image, tgt: Image, grid: tuple[int, int], scheme: BinningScheme,
              epsilon: float = DEFAULT_EPSILON, ch: ChannelId | str = ChannelId.GRAY) -> TiledPSI:
    """PSI per spatial tile of one channel, plus the whole-channel PSI.

    Each tile gets its own edges from the source tile, so quantile schemes
    stay source-anchored locally.
    """
    if src.data.shape != tgt.data.shape:
        raise ValueError(f"image shapes differ: {src.data.shape} vs {tgt.data.shape}")
    i = channel_index(src, ch)
    a, b = src.data[i], tgt.data[i]
    rows, cols = grid
    rb, cb = tile_bounds(src.height, rows), tile_bounds(src.width, cols)
    out = np.empty((rows, cols))
    for r in range(rows):
        for c in range(cols):
            window = (slice(rb[r], rb[r + 1]), slice(cb[c], cb[c + 1]))
            out[r, c] = psi(*bin_pair(a[window], b[window], scheme, epsilon))
    return TiledPSI(out, psi(*bin_pair(a, b, scheme, epsilon)), rb, cb)

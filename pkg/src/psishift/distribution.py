"""Binned distributions over numeric samples.

Bins are half-open ``[e_i, e_{i+1})`` except the last, which also takes its
upper edge. Values outside the edge range are clamped into the first or last
bin so nothing is dropped. Proportions are smoothed additively::

    q_i = (counts_i / N + eps) / (1 + B * eps)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

DEFAULT_BINS = 10
DEFAULT_EPSILON = 1e-4
DEFAULT_RANGE = (0.0, 1.0)


class BinningMode(str, enum.Enum):
    FIXED = "fixed"
    QUANTILE = "quantile"


@dataclass(frozen=True)
class BinningScheme:
    mode: BinningMode = BinningMode.FIXED
    bins: int = DEFAULT_BINS
    lo: float = DEFAULT_RANGE[0]
    hi: float = DEFAULT_RANGE[1]

    def __post_init__(self):
        object.__setattr__(self, "mode", BinningMode(self.mode))
        if int(self.bins) != self.bins or self.bins < 2:
            raise ValueError(f"bin count must be an integer >= 2, got {self.bins}")
        if self.mode is BinningMode.FIXED and not self.lo < self.hi:
            raise ValueError(f"range needs lo < hi, got [{self.lo}, {self.hi}]")

    def to_dict(self) -> dict:
        d = {"mode": self.mode.value, "bins": int(self.bins)}
        if self.mode is BinningMode.FIXED:
            d["range"] = [float(self.lo), float(self.hi)]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BinningScheme":
        lo, hi = d.get("range", DEFAULT_RANGE)
        return cls(BinningMode(d["mode"]), int(d["bins"]), float(lo), float(hi))


def linear_quantile(sorted_x: np.ndarray, probs) -> np.ndarray:
    """Quantiles of pre-sorted data by linear interpolation between closest ranks.

    For probability ``p`` with ``h = (n - 1) * p``: ``x[floor(h)] + (h - floor(h))
    * (x[floor(h) + 1] - x[floor(h)])``.
    """
    x = np.asarray(sorted_x, dtype=np.float64)
    h = (x.size - 1) * np.asarray(probs, dtype=np.float64)
    lo = np.floor(h).astype(np.intp)
    hi = np.minimum(lo + 1, x.size - 1)
    return x[lo] + (h - lo) * (x[hi] - x[lo])


def make_edges(scheme: BinningScheme, source_sample=None) -> np.ndarray:
    """Bin edges for ``scheme``; quantile mode reads them off ``source_sample``.

    Quantiles use :func:`linear_quantile`, so the outer edges are the sample
    min and max. Tied quantiles are collapsed, which can leave fewer than
    ``scheme.bins`` bins.
    """
    if scheme.mode is BinningMode.FIXED:
        return np.linspace(scheme.lo, scheme.hi, scheme.bins + 1)
    x = np.asarray(source_sample, dtype=np.float64).ravel() if source_sample is not None else None
    if x is None or x.size == 0:
        raise ValueError("quantile binning needs a non-empty source sample")
    probs = np.arange(scheme.bins + 1) / scheme.bins
    edges = np.unique(linear_quantile(np.sort(x), probs))
    if edges.size < 2:
        raise ValueError("quantile edges collapsed to fewer than 2 distinct values")
    return edges


def bin_counts(sample, edges: np.ndarray) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    n_bins = len(edges) - 1
    idx = np.searchsorted(edges, x, side="right") - 1
    np.clip(idx, 0, n_bins - 1, out=idx)
    return np.bincount(idx, minlength=n_bins).astype(np.int64)


@dataclass(frozen=True, eq=False)
class BinnedDistribution:
    """Counts over fixed edges plus the smoothed proportions derived from them."""

    edges: np.ndarray
    counts: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        edges = np.array(self.edges, dtype=np.float64)
        counts = np.array(self.counts, dtype=np.int64)
        if edges.ndim != 1 or edges.size < 2 or not np.all(np.diff(edges) > 0):
            raise ValueError("edges must be a strictly increasing sequence of >= 2 values")
        if counts.shape != (edges.size - 1,):
            raise ValueError(f"expected {edges.size - 1} counts, got {counts.shape}")
        if np.any(counts < 0) or counts.sum() <= 0:
            raise ValueError("counts must be non-negative with a positive total")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def n_bins(self) -> int:
        return self.counts.size

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def raw_proportions(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def proportions(self) -> np.ndarray:
        return (self.raw_proportions + self.epsilon) / (1.0 + self.n_bins * self.epsilon)

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist(),
                "total": self.total, "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d: dict) -> "BinnedDistribution":
        dist = cls(d["edges"], d["counts"], d.get("epsilon", DEFAULT_EPSILON))
        if "total" in d and int(d["total"]) != dist.total:
            raise ValueError("stored total does not match the sum of counts")
        return dist


def bin_sample(sample, edges, epsilon: float = DEFAULT_EPSILON) -> BinnedDistribution:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot bin an empty sample")
    edges = np.asarray(edges, dtype=np.float64)
    return BinnedDistribution(edges, bin_counts(x, edges), epsilon)


def bin_pair(source, target, scheme: BinningScheme,
             epsilon: float = DEFAULT_EPSILON) -> tuple[BinnedDistribution, BinnedDistribution]:
    """Bin two samples on edges built from the source."""
    edges = make_edges(scheme, source)
    return bin_sample(source, edges, epsilon), bin_sample(target, edges, epsilon)

"""Noise-sweep and corpus experiments, box statistics and drift verdicts."""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import noise
from .distribution import DEFAULT_EPSILON, BinningScheme, linear_quantile
from .divergence import channel_psi
from .imaging import ChannelId, Image, NoLoadableInputs, load_image
from .noise import NoiseKind, NoiseSpec, derive_seed

log = logging.getLogger(__name__)

# {0, 0.1, ..., 1}
DEFAULT_GRID = tuple(k / 10 for k in range(11))
DEFAULT_THRESHOLDS = (0.1, 0.25)


class ShiftType(str, enum.Enum):
    """Shift taxonomy; only covariate shift is measurable from inputs alone."""

    CONCEPT = "concept"
    COVARIATE = "covariate"
    LABEL = "label"


class DriftLabel(str, enum.Enum):
    STABLE = "stable"
    MODERATE = "moderate"
    SIGNIFICANT = "significant"


@dataclass(frozen=True)
class DriftVerdict:
    psi: dict[str, float]
    labels: dict[str, DriftLabel]
    thresholds: tuple[float, float]
    advisory: bool = True

    def to_dict(self) -> dict:
        return {"psi": dict(self.psi),
                "labels": {k: v.value for k, v in self.labels.items()},
                "thresholds": list(self.thresholds),
                "advisory": self.advisory}


def check_thresholds(thresholds: tuple[float, float]) -> tuple[float, float]:
    t1, t2 = (float(t) for t in thresholds)
    if not 0 < t1 < t2:
        raise ValueError(f"thresholds must satisfy 0 < t1 < t2, got ({t1}, {t2})")
    return t1, t2


def label_for(value: float, thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> DriftLabel:
    t1, t2 = check_thresholds(thresholds)
    if value < t1:
        return DriftLabel.STABLE
    if value < t2:
        return DriftLabel.MODERATE
    return DriftLabel.SIGNIFICANT


def verdict(psi_per_channel: dict[str, float],
            thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> DriftVerdict:
    thresholds = check_thresholds(thresholds)
    psi_per_channel = {str(getattr(k, "value", k)): float(v) for k, v in psi_per_channel.items()}
    labels = {k: label_for(v, thresholds) for k, v in psi_per_channel.items()}
    return DriftVerdict(psi_per_channel, labels, thresholds)


@dataclass(frozen=True)
class BoxStats:
    n: int
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    lower_fence: float
    upper_fence: float
    outliers: tuple[float, ...]

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["outliers"] = list(self.outliers)
        return d


def box_stats(values: Sequence[float]) -> BoxStats:
    """Tukey box-plot summary with linear-interpolation quartiles.

    Whiskers reach the most extreme values within 1.5 IQR of the quartiles;
    anything beyond is an outlier (returned in ascending order).
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("box statistics need at least one value")
    q1, med, q3 = linear_quantile(x, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = x[(x < lo_fence) | (x > hi_fence)]
    return BoxStats(int(x.size), float(med), float(q1), float(q3),
                    float(inside.min()), float(inside.max()),
                    float(lo_fence), float(hi_fence), tuple(float(v) for v in outliers))


# -- experiment (i): intensity sweep on one image ------------------------------

@dataclass
class SweepResult:
    """PSI at each grid point, per channel.

    ``values[ch]`` has shape ``(len(axis1),)`` for Gaussian/speckle and
    ``(len(axis1), len(axis2))`` (amount x proportion) for salt-and-pepper.
    """

    kind: NoiseKind
    axis1_name: str
    axis1: tuple[float, ...]
    axis2_name: str | None
    axis2: tuple[float, ...] | None
    values: dict[str, np.ndarray]
    scheme: BinningScheme
    epsilon: float
    seed: int
    image_id: str = ""

    @property
    def channels(self) -> list[str]:
        return list(self.values)

    def rows(self) -> list[dict]:
        """Long-format records, ordered by grid index then channel."""
        out = []
        if self.axis2 is None:
            for i, level in enumerate(self.axis1):
                for ch, vals in self.values.items():
                    out.append({"noise_level": level, "channel": ch, "psi": float(vals[i])})
        else:
            for i, amount in enumerate(self.axis1):
                for j, prop in enumerate(self.axis2):
                    for ch, vals in self.values.items():
                        out.append({"amount": amount, "proportion": prop, "channel": ch,
                                    "psi": float(vals[i, j])})
        return out

    def metadata(self) -> dict:
        d = {"noise_kind": self.kind.value, "axis1": {"name": self.axis1_name,
                                                       "values": list(self.axis1)},
             "scheme": self.scheme.to_dict(), "epsilon": self.epsilon,
             "seed": self.seed, "image_id": self.image_id}
        if self.axis2 is not None:
            d["axis2"] = {"name": self.axis2_name, "values": list(self.axis2)}
        return d


def _psi_all_channels(src: Image, tgt: Image, scheme: BinningScheme, epsilon: float,
                      channels: Sequence[ChannelId] | None = None) -> dict[str, float]:
    chans = src.channel_ids if channels is None else channels
    return {ch.value: channel_psi(src, tgt, ch, scheme, epsilon) for ch in chans}


def run_sweep(img: Image, kind: NoiseKind | str, grid: Sequence[float] = DEFAULT_GRID,
              proportions: Sequence[float] | None = None,
              scheme: BinningScheme | None = None, epsilon: float = DEFAULT_EPSILON,
              seed: int = 0, mean: float = 0.0,
              channels: Sequence[ChannelId] | None = None) -> SweepResult:
    """PSI of noisy copies of ``img`` against ``img`` across a parameter grid.

    ``grid`` holds variances for Gaussian/speckle and amounts for
    salt-and-pepper, where ``proportions`` is the second axis (defaults to the
    same 11-point grid). Grid point ``k`` (flat, row-major) is seeded with
    ``derive_seed(seed, k)``.
    """
    kind = NoiseKind.parse(kind) if isinstance(kind, str) else kind
    scheme = scheme or BinningScheme()
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    chans = list(img.channel_ids if channels is None else channels)

    if kind is NoiseKind.SALT_PEPPER:
        props = tuple(float(p) for p in (DEFAULT_GRID if proportions is None else proportions))
        if not props:
            raise ValueError("proportion grid is empty")
        values = {ch.value: np.zeros((len(grid), len(props))) for ch in chans}
        for i, amount in enumerate(grid):
            for j, prop in enumerate(props):
                spec = NoiseSpec(kind, amount=amount, proportion=prop,
                                 seed=derive_seed(seed, i * len(props) + j))
                res = _psi_all_channels(img, noise.apply(img, spec), scheme, epsilon, chans)
                for ch, v in res.items():
                    values[ch][i, j] = v
        return SweepResult(kind, "amount", grid, "proportion", props, values,
                           scheme, epsilon, seed, img.name)

    values = {ch.value: np.zeros(len(grid)) for ch in chans}
    for i, variance in enumerate(grid):
        spec = NoiseSpec(kind, mean=mean, variance=variance, seed=derive_seed(seed, i))
        res = _psi_all_channels(img, noise.apply(img, spec), scheme, epsilon, chans)
        for ch, v in res.items():
            values[ch][i] = v
    return SweepResult(kind, "variance", grid, None, None, values, scheme, epsilon,
                       seed, img.name)


# -- experiment (ii): one noise setting over a corpus --------------------------

@dataclass
class CorpusResult:
    paths: list[str]
    psi: dict[str, dict[str, float]]
    skipped: list[tuple[str, str]]
    stats: dict[str, BoxStats]
    spec: NoiseSpec
    scheme: BinningScheme
    epsilon: float
    base_seed: int
    channels: list[str] = field(default_factory=list)

    @property
    def image_count(self) -> int:
        return len(self.psi) + len(self.skipped)

    def rows(self) -> list[dict]:
        return [{"path": p, "channel": ch, "psi": v}
                for p, per_ch in self.psi.items() for ch, v in per_ch.items()]

    def metadata(self) -> dict:
        return {"image_count": self.image_count, "success_count": len(self.psi),
                "skip_count": len(self.skipped), "noise": self.spec.to_dict(),
                "scheme": self.scheme.to_dict(), "epsilon": self.epsilon,
                "base_seed": self.base_seed}


def _corpus_item(args) -> tuple[str, dict[str, float] | None, str | None, int]:
    index, path, spec, scheme, epsilon, base_seed = args
    try:
        img = load_image(path)
    except (OSError, ValueError) as exc:
        return str(path), None, f"{type(exc).__name__}: {exc}", 0
    noisy = noise.apply(img, spec.with_seed(derive_seed(base_seed, index)))
    return str(path), _psi_all_channels(img, noisy, scheme, epsilon), None, img.n_channels


def run_corpus(paths: Sequence[str | Path], spec: NoiseSpec,
               scheme: BinningScheme | None = None, epsilon: float = DEFAULT_EPSILON,
               base_seed: int = 0, workers: int = 1) -> CorpusResult:
    """Per-image PSI between each image and its noisy copy, plus box statistics.

    Paths are sorted first; image ``i`` in that order is noised with seed
    ``derive_seed(base_seed, i)``, so the result does not depend on ``workers``.
    Unreadable files and images whose channel count differs from the first
    readable one are recorded as skips.
    """
    scheme = scheme or BinningScheme()
    ordered = sorted(str(p) for p in paths)
    jobs = [(i, p, spec, scheme, epsilon, base_seed) for i, p in enumerate(ordered)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_corpus_item, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_corpus_item(j) for j in jobs]

    psi_values: dict[str, dict[str, float]] = {}
    skipped: list[tuple[str, str]] = []
    n_channels = None
    for path, vals, err, nch in results:
        if vals is not None and n_channels is not None and nch != n_channels:
            err, vals = f"channel count {nch} differs from corpus ({n_channels})", None
        if vals is None:
            log.warning("skipping %s: %s", path, err)
            skipped.append((path, err))
            continue
        n_channels = nch
        psi_values[path] = vals
    if not psi_values:
        raise NoLoadableInputs("no loadable inputs")

    channels = list(next(iter(psi_values.values())))
    stats = {ch: box_stats([v[ch] for v in psi_values.values()]) for ch in channels}
    return CorpusResult(ordered, psi_values, skipped, stats, spec, scheme, epsilon,
                        base_seed, channels)


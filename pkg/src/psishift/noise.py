"""Seeded Gaussian, speckle and salt-and-pepper noise.

Randomness comes from numpy's PCG64 bit generator. A seed is expanded with
:class:`numpy.random.SeedSequence`, so derived seeds (per grid point, per
corpus image) are ``SeedSequence([base_seed, index])`` and never collide with
the plain ``SeedSequence(base_seed)`` stream. Normal variates are drawn with
``Generator.standard_normal`` (numpy's ziggurat) in C order over the
``(channel, row, col)`` array, i.e. channel-major then row-major.

Noise is applied per element (every channel value gets its own draw) and the
result is clipped back into [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .imaging import Image

DEFAULT_PROPORTION = 0.5
_U64 = (1 << 64) - 1


class NoiseKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SPECKLE = "speckle"
    SALT_PEPPER = "sp"

    @classmethod
    def parse(cls, name: str) -> "NoiseKind":
        key = name.strip().lower().replace("&", "").replace("_", "").replace("-", "")
        aliases = {"gaussian": cls.GAUSSIAN, "gauss": cls.GAUSSIAN,
                   "speckle": cls.SPECKLE,
                   "sp": cls.SALT_PEPPER, "saltpepper": cls.SALT_PEPPER,
                   "saltandpepper": cls.SALT_PEPPER}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown noise kind {name!r}") from None


def make_rng(seed: int, *index: int) -> np.random.Generator:
    """Generator for ``seed``, optionally specialised by integer indices."""
    if index:
        ss = np.random.SeedSequence([seed & _U64, *index])
    else:
        ss = np.random.SeedSequence(seed & _U64)
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(base_seed: int, index: int) -> int:
    """64-bit seed for item ``index`` of a run seeded with ``base_seed``."""
    ss = np.random.SeedSequence([base_seed & _U64, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_variance(variance: float) -> None:
    if not variance >= 0:
        raise ValueError(f"variance must be >= 0, got {variance}")


def gaussian_field(shape: tuple[int, ...], mean: float, variance: float,
                   seed: int) -> np.ndarray:
    """The pre-clamp noise stream used by :func:`apply_gaussian` and :func:`apply_speckle`."""
    _check_variance(variance)
    z = make_rng(seed).standard_normal(shape)
    return mean + math.sqrt(variance) * z


def apply_gaussian(img: Image, mean: float = 0.0, variance: float = 0.01,
                   seed: int = 0) -> Image:
    noise = gaussian_field(img.data.shape, mean, variance, seed)
    return img.with_data(np.clip(img.data + noise, 0.0, 1.0))


def apply_speckle(img: Image, mean: float = 0.0, variance: float = 0.01,
                  seed: int = 0) -> Image:
    noise = gaussian_field(img.data.shape, mean, variance, seed)
    return img.with_data(np.clip(img.data + noise * img.data, 0.0, 1.0))


def salt_pepper_mask(n_elements: int, amount: float, proportion: float,
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices to replace and their new values (1.0 salt, 0.0 pepper).

    Exactly ``round_half_up(amount * n_elements)`` distinct indices are chosen
    by a seeded permutation; each is salt with probability ``proportion``.
    """
    if not 0.0 <= amount <= 1.0:
        raise ValueError(f"amount must be in [0, 1], got {amount}")
    if not 0.0 <= proportion <= 1.0:
        raise ValueError(f"proportion must be in [0, 1], got {proportion}")
    k = min(round_half_up(amount * n_elements), n_elements)
    rng = make_rng(seed)
    idx = rng.permutation(n_elements)[:k]
    values = (rng.random(k) < proportion).astype(np.float64)
    return idx, values


def apply_salt_pepper(img: Image, amount: float = 0.05,
                      proportion: float = DEFAULT_PROPORTION, seed: int = 0) -> Image:
    idx, values = salt_pepper_mask(img.data.size, amount, proportion, seed)
    out = img.data.copy().ravel()
    out[idx] = values
    return img.with_data(out.reshape(img.data.shape))


@dataclass(frozen=True)
class NoiseSpec:
    """One noise application. Fields that don't belong to ``kind`` are ignored."""

    kind: NoiseKind
    mean: float = 0.0
    variance: float = 0.1
    amount: float = 0.5
    proportion: float = DEFAULT_PROPORTION
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, NoiseKind):
            object.__setattr__(self, "kind", NoiseKind.parse(str(self.kind)))
        if not 0 <= self.seed <= _U64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.kind is NoiseKind.SALT_PEPPER:
            if not 0.0 <= self.amount <= 1.0:
                raise ValueError(f"amount must be in [0, 1], got {self.amount}")
            if not 0.0 <= self.proportion <= 1.0:
                raise ValueError(f"proportion must be in [0, 1], got {self.proportion}")
        else:
            _check_variance(self.variance)

    def with_seed(self, seed: int) -> "NoiseSpec":
        return NoiseSpec(self.kind, self.mean, self.variance, self.amount,
                         self.proportion, seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        if self.kind is NoiseKind.SALT_PEPPER:
            del d["mean"], d["variance"]
        else:
            del d["amount"], d["proportion"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        unknown = set(d) - {"kind", "mean", "variance", "amount", "proportion", "seed"}
        if unknown:
            raise ValueError(f"unknown noise keys: {sorted(unknown)}")
        kw = {k: d[k] for k in ("mean", "variance", "amount", "proportion") if k in d}
        return cls(NoiseKind.parse(d["kind"]), seed=int(d.get("seed", 0)),
                   **{k: float(v) for k, v in kw.items()})


def apply(img: Image, spec: NoiseSpec) -> Image:
    if spec.kind is NoiseKind.GAUSSIAN:
        return apply_gaussian(img, spec.mean, spec.variance, spec.seed)
    if spec.kind is NoiseKind.SPECKLE:
        return apply_speckle(img, spec.mean, spec.variance, spec.seed)
    return apply_salt_pepper(img, spec.amount, spec.proportion, spec.seed)

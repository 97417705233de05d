"""Raster loading and per-channel decomposition.

Images are held as float64 arrays of shape ``(channels, height, width)`` with
intensities normalized to [0, 1]. Portable pixmaps (P2/P3/P5/P6) are decoded
natively; PNG and friends go through Pillow when it is importable.
"""

from __future__ import annotations

import enum
import fnmatch
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    """Raised when a file cannot be decoded as a supported raster."""


class NoLoadableInputs(ValueError):
    """Raised when a batch of inputs yields no decodable image."""


class ChannelError(ValueError):
    """Raised when a channel is requested that the image does not have."""


class ChannelId(str, enum.Enum):
    R = "R"
    G = "G"
    B = "B"
    GRAY = "Gray"

    @classmethod
    def parse(cls, name: str) -> "ChannelId":
        key = name.strip().lower()
        for ch in cls:
            if ch.value.lower() == key:
                return ch
        raise ChannelError(f"unknown channel {name!r}")


RGB_CHANNELS = (ChannelId.R, ChannelId.G, ChannelId.B)
GRAY_CHANNELS = (ChannelId.GRAY,)


@dataclass(frozen=True, eq=False)
class Image:
    """Channel-separated raster with intensities in [0, 1].

    ``maxval`` is the stored integer maximum the intensities were normalized
    by (255 for 8-bit files); it is kept so :meth:`to_raw` can re-quantize.
    """

    data: np.ndarray
    maxval: int = 255
    name: str = field(default="")

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3 or arr.shape[0] not in (1, 3):
            raise ValueError(f"expected 1 or 3 channel planes, got shape {arr.shape}")
        if arr.shape[1] == 0 or arr.shape[2] == 0:
            raise ImageFormatError("zero-dimension image")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise ValueError("intensities must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channel_ids(self) -> tuple[ChannelId, ...]:
        return GRAY_CHANNELS if self.n_channels == 1 else RGB_CHANNELS

    def with_data(self, data: np.ndarray) -> "Image":
        return Image(data, maxval=self.maxval, name=self.name)

    def to_raw(self, maxval: int | None = None) -> np.ndarray:
        """Re-quantize to integers in ``[0, maxval]`` (round half to even)."""
        m = self.maxval if maxval is None else maxval
        return np.rint(self.data * m).astype(np.uint16 if m > 255 else np.uint8)


def channel_index(img: Image, ch: ChannelId | str) -> int:
    ch = ChannelId.parse(ch) if isinstance(ch, str) else ch
    try:
        return img.channel_ids.index(ch)
    except ValueError:
        raise ChannelError(
            f"channel {ch.value} not available on a {img.n_channels}-channel image"
        ) from None


def channel_samples(img: Image, ch: ChannelId | str) -> np.ndarray:
    """Return one channel plane flattened in row-major order."""
    return img.data[channel_index(img, ch)].ravel()


# -- portable pixmap codec ---------------------------------------------------

_PNM_MAGIC = {b"P2": (1, False), b"P3": (3, False), b"P5": (1, True), b"P6": (3, True)}


def _pnm_header(buf: bytes) -> tuple[list[int], int]:
    """Parse width, height, maxval; return them and the raster offset."""
    tokens: list[int] = []
    pos = 2
    n = len(buf)
    while len(tokens) < 3:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and buf[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated or malformed PNM header")
        tokens.append(int(buf[start:pos]))
    # exactly one whitespace byte separates the header from binary rasters
    if pos >= n and buf[:2] in (b"P5", b"P6"):
        raise ImageFormatError("missing raster data")
    return tokens, pos + 1


def decode_pnm(buf: bytes) -> Image:
    magic = buf[:2]
    if magic not in _PNM_MAGIC:
        raise ImageFormatError("unsupported format")
    n_ch, binary = _PNM_MAGIC[magic]
    (width, height, maxval), offset = _pnm_header(buf)
    if width <= 0 or height <= 0:
        raise ImageFormatError("zero-dimension image")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid maxval {maxval}")
    count = width * height * n_ch
    if binary:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = np.frombuffer(buf, dtype=dtype, count=-1, offset=offset)
        if raw.size < count:
            raise ImageFormatError("truncated raster data")
        raw = raw[:count]
    else:
        text = buf[offset - 1:]
        lines = [ln.split(b"#", 1)[0] for ln in text.splitlines()]
        try:
            raw = np.array(b" ".join(lines).split(), dtype=np.int64)
        except ValueError:
            raise ImageFormatError("non-numeric sample in ASCII raster") from None
        if raw.size < count:
            raise ImageFormatError("truncated raster data")
        raw = raw[:count]
    if raw.max(initial=0) > maxval:
        raise ImageFormatError("sample exceeds maxval")
    # stored interleaved (row, col, channel) -> (channel, row, col)
    planes = raw.reshape(height, width, n_ch).transpose(2, 0, 1)
    return Image(planes.astype(np.float64) / maxval, maxval=maxval)


def encode_pnm(img: Image, binary: bool = True, maxval: int | None = None) -> bytes:
    m = img.maxval if maxval is None else maxval
    raw = np.rint(img.data * m).astype(np.int64).transpose(1, 2, 0)
    if img.n_channels == 1:
        magic = b"P5" if binary else b"P2"
    else:
        magic = b"P6" if binary else b"P3"
    header = b"%s\n%d %d\n%d\n" % (magic, img.width, img.height, m)
    if binary:
        dtype = ">u2" if m > 255 else "u1"
        return header + raw.astype(dtype).tobytes()
    rows = [" ".join(str(v) for v in row.ravel()) for row in raw]
    return header + ("\n".join(rows) + "\n").encode("ascii")


def save_pnm(img: Image, path: str | os.PathLike, binary: bool = True) -> None:
    Path(path).write_bytes(encode_pnm(img, binary=binary))


def _decode_with_pillow(path: Path) -> Image:
    try:
        from PIL import Image as PILImage
    except ImportError:
        raise ImageFormatError("unsupported format") from None
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im, dtype=np.float64)[np.newaxis]
                maxval = 65535
            elif im.mode == "L":
                arr = np.asarray(im, dtype=np.float64)[np.newaxis]
                maxval = 255
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.float64).transpose(2, 0, 1)
                maxval = 255
    except (OSError, ValueError) as exc:
        raise ImageFormatError(f"unsupported format: {exc}") from None
    return Image(arr / maxval, maxval=maxval)


def load_image(path: str | os.PathLike) -> Image:
    """Read a raster file into a normalized :class:`Image`.

    Raises :class:`ImageFormatError` for empty, truncated or unrecognized
    files and ``OSError`` when the file cannot be read at all.
    """
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < 2:
        raise ImageFormatError("unsupported format")
    if buf[:2] in _PNM_MAGIC:
        img = decode_pnm(buf)
    elif buf[:1] == b"P" and buf[1:2].isdigit():
        raise ImageFormatError("unsupported format")
    else:
        img = _decode_with_pillow(path)
    return Image(img.data, maxval=img.maxval, name=str(path))


def list_corpus(directory: str | os.PathLike, pattern: str = "*") -> list[Path]:
    """Files directly inside ``directory`` matching ``pattern``, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {directory}")
    return sorted(
        (p for p in directory.iterdir() if p.is_file() and fnmatch.fnmatch(p.name, pattern)),
        key=lambda p: p.name,
    )


def synthetic_image(height: int = 64, width: int = 64, channels: int = 3,
                    seed: int = 0) -> Image:
    """Deterministic test image: per-channel smooth gradients plus mild texture.

    Each channel is a different mix of a horizontal ramp, a vertical ramp and a
    radial bump, with seeded uniform texture of amplitude 0.1, mapped into
    [0.05, 0.95] so no value sits on a clamp boundary.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    yy, xx = np.mgrid[0:height, 0:width]
    u = xx / max(width - 1, 1)
    v = yy / max(height - 1, 1)
    r2 = (u - 0.5) ** 2 + (v - 0.5) ** 2
    planes = []
    for c in range(channels):
        a, b, d = rng.uniform(0.2, 1.0, size=3)
        base = a * u + b * v + d * np.exp(-8.0 * r2) + 0.1 * rng.random((height, width))
        base = (base - base.min()) / (base.max() - base.min())
        planes.append(0.05 + 0.9 * base)
    return Image(np.stack(planes), name=f"synthetic-{seed}")

"""Command-line front end: ``baseline``, ``compare``, ``sweep``, ``corpus``.

Exit codes: 0 success, 1 usage/config error, 2 input/IO error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .distribution import (DEFAULT_BINS, DEFAULT_EPSILON, BinnedDistribution, BinningMode,
                           BinningScheme, bin_counts, bin_sample, make_edges)
from .divergence import DivergenceKind, divergence
from .harness import (DEFAULT_GRID, DEFAULT_THRESHOLDS, ShiftType, check_thresholds,
                      run_corpus, run_sweep, verdict)
from .imaging import (ChannelError, ChannelId, Image, ImageFormatError, NoLoadableInputs,
                      list_corpus, load_image)
from .noise import DEFAULT_PROPORTION, NoiseKind, NoiseSpec

log = logging.getLogger("psishift")

BASELINE_FORMAT = "psishift-baseline"
BASELINE_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

COMPARE_CSV_HEADER = ["channel", "psi", "label"]
SWEEP_CSV_HEADER = ["noise_level", "channel", "psi"]
SP_SWEEP_CSV_HEADER = ["amount", "proportion", "channel", "psi"]
CORPUS_CSV_HEADER = ["path", "channel", "psi"]
CORPUS_SUMMARY_HEADER = ["channel", "n", "median", "q1", "q3", "whisker_lo",
                         "whisker_hi", "lower_fence", "upper_fence", "n_outliers"]


class ConfigError(ValueError):
    pass


class BaselineError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


@dataclass
class RunConfig:
    bins: int = DEFAULT_BINS
    scheme: str = "fixed"
    range: tuple[float, float] = (0.0, 1.0)
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS
    channels: tuple[str, ...] | None = None
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(NoiseKind.GAUSSIAN))
    format: str = "json"
    metrics: tuple[str, ...] = ("psi",)
    workers: int = 1
    pattern: str = "*"

    def __post_init__(self):
        try:
            self.binning()
            check_thresholds(self.thresholds)
            for m in self.metrics:
                DivergenceKind(m)
            if self.channels is not None:
                self.channels = tuple(ChannelId.parse(c).value for c in self.channels)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.epsilon >= 0:
            raise ConfigError("epsilon must be >= 0")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def binning(self) -> BinningScheme:
        mode = {"fixed": BinningMode.FIXED, "quantile": BinningMode.QUANTILE}.get(self.scheme)
        if mode is None:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        return BinningScheme(mode, self.bins, *self.range)

    def echo(self) -> dict:
        return {"bins": self.bins, "scheme": self.scheme, "range": list(self.range),
                "epsilon": self.epsilon, "seed": self.seed,
                "thresholds": list(self.thresholds), "thresholds_advisory": True,
                "channels": list(self.channels) if self.channels else "all",
                "noise": self.noise.to_dict(), "format": self.format,
                "metrics": list(self.metrics), "workers": self.workers,
                "pattern": self.pattern}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "noise" in kw:
            kw["noise"] = NoiseSpec.from_dict(kw["noise"])
        for k in ("range", "thresholds", "channels", "metrics"):
            if k in kw and kw[k] is not None:
                kw[k] = tuple(kw[k])
        return cls(**kw)


# -- file helpers --------------------------------------------------------------

def atomic_write(path: str | os.PathLike, data: str) -> None:
    """Write ``data`` to ``path`` via a temp file in the same directory + rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def to_csv(header: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(header), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k, "")) for k in header})
    return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def report(kind: str, config: RunConfig, results, **extra) -> dict:
    return {"tool_version": __version__, "report": kind, "config_echo": config.echo(),
            **extra, "results": results}


def resolve_inputs(target: str, pattern: str = "*") -> list[Path]:
    p = Path(target)
    if p.is_dir():
        return list_corpus(p, pattern)
    if p.exists():
        return [p]
    raise FileNotFoundError(f"input not found: {target}")


def load_inputs(paths: Sequence[Path]) -> list[Image]:
    images = []
    for p in paths:
        try:
            images.append(load_image(p))
        except (OSError, ImageFormatError) as exc:
            log.warning("skipping %s: %s", p, exc)
    if not images:
        raise NoLoadableInputs("no loadable inputs")
    counts = {img.n_channels for img in images}
    if len(counts) != 1:
        raise ChannelError("input images mix grayscale and RGB")
    return images


def _selected(images: Sequence[Image], channels: Sequence[str] | None) -> list[ChannelId]:
    available = images[0].channel_ids
    if channels is None:
        return list(available)
    chosen = [ChannelId.parse(c) for c in channels]
    for ch in chosen:
        if ch not in available:
            raise ChannelError(f"channel {ch.value} not present in inputs")
    return chosen


def _pooled_counts(images: Sequence[Image], ch: ChannelId, edges: np.ndarray) -> np.ndarray:
    idx = images[0].channel_ids.index(ch)
    total = np.zeros(len(edges) - 1, dtype=np.int64)
    for img in images:
        total += bin_counts(img.data[idx], edges)
    return total


# -- baseline ------------------------------------------------------------------

def build_baseline(images: Sequence[Image], config: RunConfig, source: str = "") -> dict:
    """Baseline document: one pooled distribution per channel."""
    scheme = config.binning()
    channels = {}
    for ch in _selected(images, config.channels):
        if scheme.mode is BinningMode.QUANTILE:
            idx = images[0].channel_ids.index(ch)
            edges = make_edges(scheme, np.concatenate([im.data[idx].ravel() for im in images]))
        else:
            edges = make_edges(scheme)
        dist = BinnedDistribution(edges, _pooled_counts(images, ch, edges), config.epsilon)
        channels[ch.value] = dist.to_dict()
    return {
        "format": BASELINE_FORMAT,
        "version": BASELINE_VERSION,
        "scheme": scheme.to_dict(),
        "epsilon": config.epsilon,
        "n_channels": images[0].n_channels,
        "channels": channels,
        "provenance": {
            "source": source,
            "inputs": [im.name for im in images],
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "tool_version": __version__,
        },
    }


def save_baseline(doc: dict, path: str | os.PathLike) -> None:
    atomic_write(path, to_json(doc))


def load_baseline(path: str | os.PathLike) -> tuple[dict, dict[str, BinnedDistribution]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BaselineError(f"baseline is not valid JSON: {exc}") from None
    if doc.get("format") != BASELINE_FORMAT:
        raise BaselineError("not a baseline file")
    if doc.get("version") != BASELINE_VERSION:
        raise BaselineError(f"unsupported baseline version {doc.get('version')!r}")
    try:
        dists = {ch: BinnedDistribution.from_dict(d) for ch, d in doc["channels"].items()}
        for ch in dists:
            ChannelId.parse(ch)
    except (KeyError, TypeError, ValueError) as exc:
        raise BaselineError(f"invalid baseline contents: {exc}") from None
    if not dists:
        raise BaselineError("baseline has no channels")
    return doc, dists


def compare_to_baseline(doc: dict, dists: dict[str, BinnedDistribution],
                        images: Sequence[Image], config: RunConfig) -> dict:
    if images[0].n_channels != doc.get("n_channels", images[0].n_channels):
        raise ChannelError(
            f"target has {images[0].n_channels} channel(s), baseline has {doc['n_channels']}")
    wanted = list(dists) if config.channels is None else list(config.channels)
    results = {}
    psi_values = {}
    for name in wanted:
        if name not in dists:
            raise ChannelError(f"channel {name} not in baseline")
        ch = ChannelId.parse(name)
        if ch not in images[0].channel_ids:
            raise ChannelError(f"channel {name} not present in target")
        src = dists[name]
        tgt = BinnedDistribution(src.edges, _pooled_counts(images, ch, src.edges), src.epsilon)
        metrics = {m: divergence(m, src, tgt) for m in config.metrics}
        if "psi" not in metrics:
            metrics = {"psi": divergence("psi", src, tgt), **metrics}
        for m, v in metrics.items():
            if not math.isfinite(v) or v < -1e-12:
                raise InvariantViolation(f"{m} on channel {name} is {v}")
        psi_values[name] = metrics["psi"]
        results[name] = metrics
    v = verdict(psi_values, config.thresholds)
    return {"channels": results, "verdict": v.to_dict(), "target_count": len(images)}


# -- argument parsing ----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _common(p: argparse.ArgumentParser) -> None:
    # defaults are None so values from --config are only overridden when given
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--bins", type=int)
    p.add_argument("--scheme", choices=["fixed", "quantile"])
    p.add_argument("--range", type=_pair, metavar="LO:HI")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--thresholds", type=_pair, metavar="T1:T2")
    p.add_argument("--channels", type=_names, help="r,g,b or gray")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--pattern", help="filename glob for directory inputs")
    p.add_argument("-v", "--verbose", action="store_true")


def _noise_flags(p: argparse.ArgumentParser, list_proportion: bool = False) -> None:
    p.add_argument("--noise", choices=["gaussian", "speckle", "sp"])
    p.add_argument("--mean", type=float)
    p.add_argument("--variance", type=float)
    p.add_argument("--amount", type=float)
    if list_proportion:
        p.add_argument("--proportion", type=_floats, help="comma list (S&P sweep axis)")
    else:
        p.add_argument("--proportion", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="psishift", description="PSI-based distribution shift detection")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("baseline", help="persist reference distributions")
    p.add_argument("input", help="image file or directory")
    _common(p)

    p = sub.add_parser("compare", help="compare targets against a baseline")
    p.add_argument("baseline")
    p.add_argument("target", help="image file or directory")
    p.add_argument("--metrics", type=_names,
                   help="comma list from: " + ",".join(k.value for k in DivergenceKind))
    _common(p)

    p = sub.add_parser("sweep", help="PSI across a noise-intensity grid on one image")
    p.add_argument("image")
    p.add_argument("--grid", type=_floats, help="comma list of variances (or S&P amounts)")
    _noise_flags(p, list_proportion=True)
    _common(p)

    p = sub.add_parser("corpus", help="PSI for every image under one noise setting")
    p.add_argument("directory")
    p.add_argument("--workers", type=int)
    _noise_flags(p)
    _common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    cfg = RunConfig.from_dict(base)
    over = {k: getattr(args, k) for k in ("bins", "scheme", "range", "epsilon", "seed",
                                          "thresholds", "channels", "format", "metrics",
                                          "workers", "pattern")
            if getattr(args, k, None) is not None}
    noise = cfg.noise
    if getattr(args, "noise", None) is not None:
        noise = replace(noise, kind=NoiseKind.parse(args.noise))
    for k in ("mean", "variance", "amount"):
        if getattr(args, k, None) is not None:
            noise = replace(noise, **{k: getattr(args, k)})
    if isinstance(getattr(args, "proportion", None), float):
        noise = replace(noise, proportion=args.proportion)
    if "seed" in over:
        noise = replace(noise, seed=over["seed"])
    over["noise"] = noise
    try:
        return replace(cfg, **over)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# -- commands ------------------------------------------------------------------

def cmd_baseline(args, config: RunConfig) -> int:
    if not args.out:
        raise ConfigError("baseline requires --out PATH")
    images = load_inputs(resolve_inputs(args.input, config.pattern))
    doc = build_baseline(images, config, source=args.input)
    save_baseline(doc, args.out)
    log.info("wrote baseline for %d image(s) to %s", len(images), args.out)
    return EXIT_OK


def cmd_compare(args, config: RunConfig) -> int:
    doc, dists = load_baseline(args.baseline)
    images = load_inputs(resolve_inputs(args.target, config.pattern))
    results = compare_to_baseline(doc, dists, images, config)
    if config.format == "json":
        emit(to_json(report("compare", config, results, shift_type=ShiftType.COVARIATE.value,
                            baseline={"path": args.baseline, "scheme": doc["scheme"],
                                      "epsilon": doc["epsilon"]})), args.out)
    else:
        extra = [m for m in config.metrics if m != "psi"]
        rows = [{"channel": ch, **vals, "label": results["verdict"]["labels"][ch]}
                for ch, vals in results["channels"].items()]
        emit(to_csv(COMPARE_CSV_HEADER + extra, rows), args.out)
    return EXIT_OK


def cmd_sweep(args, config: RunConfig) -> int:
    img = load_image(args.image)
    chans = None if config.channels is None else [ChannelId.parse(c) for c in config.channels]
    kind = config.noise.kind
    res = run_sweep(img, kind, grid=args.grid or DEFAULT_GRID,
                    proportions=args.proportion if kind is NoiseKind.SALT_PEPPER else None,
                    scheme=config.binning(), epsilon=config.epsilon, seed=config.seed,
                    mean=config.noise.mean, channels=chans)
    for ch, vals in res.values.items():
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise InvariantViolation(f"non-finite or negative PSI on channel {ch}")
    if config.format == "json":
        emit(to_json(report("sweep", config, res.rows(), metadata=res.metadata())), args.out)
    else:
        header = SWEEP_CSV_HEADER if res.axis2 is None else SP_SWEEP_CSV_HEADER
        emit(to_csv(header, res.rows()), args.out)
    return EXIT_OK


def cmd_corpus(args, config: RunConfig) -> int:
    paths = list_corpus(args.directory, config.pattern)
    res = run_corpus(paths, config.noise, scheme=config.binning(), epsilon=config.epsilon,
                     base_seed=config.seed, workers=config.workers)
    summary = {ch: s.to_dict() for ch, s in res.stats.items()}
    if config.format == "json":
        emit(to_json(report("corpus", config,
                            {"rows": res.rows(), "summary": summary,
                             "skipped": [{"path": p, "reason": r} for p, r in res.skipped]},
                            metadata=res.metadata())), args.out)
        return EXIT_OK
    rows_csv = to_csv(CORPUS_CSV_HEADER, res.rows())
    summary_rows = [{"channel": ch, **s, "n_outliers": len(s["outliers"])}
                    for ch, s in summary.items()]
    summary_csv = to_csv(CORPUS_SUMMARY_HEADER, summary_rows)
    if args.out:
        out = Path(args.out)
        atomic_write(out, rows_csv)
        atomic_write(summary_path(out), summary_csv)
    else:
        sys.stdout.write(rows_csv + "\n" + summary_csv)
    return EXIT_OK


def summary_path(out: Path) -> Path:
    return out.with_name(out.stem + ".summary" + (out.suffix or ".csv"))


COMMANDS = {"baseline": cmd_baseline, "compare": cmd_compare,
            "sweep": cmd_sweep, "corpus": cmd_corpus}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        return COMMANDS[args.command](args, config)
    except (ConfigError, argparse.ArgumentTypeError) as exc:
        print(f"psishift: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ImageFormatError, ChannelError, BaselineError, NoLoadableInputs) as exc:
        print(f"psishift: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"psishift: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"psishift: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"psishift: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

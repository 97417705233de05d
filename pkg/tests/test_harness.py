import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psishift.distribution import BinningMode, BinningScheme
from psishift.harness import (DEFAULT_GRID, DriftLabel, box_stats, label_for, run_corpus,
                              run_sweep, verdict)
from psishift.imaging import ChannelId, NoLoadableInputs, save_pnm, synthetic_image
from psishift.noise import NoiseKind, NoiseSpec

import oracles


def test_box_stats_worked_example():
    b = box_stats([1, 2, 3, 4, 100])
    assert (b.median, b.q1, b.q3) == (3, 2, 4)
    assert b.upper_fence == 7 and b.lower_fence == -1
    assert (b.whisker_lo, b.whisker_hi) == (1, 4)
    assert b.outliers == (100,)


@pytest.mark.parametrize("values,v", [([0.37], 0.37), ([1, 1, 1, 1], 1)])
def test_box_stats_degenerate(values, v):
    b = box_stats(values)
    assert b.median == b.q1 == b.q3 == b.whisker_lo == b.whisker_hi == v
    assert b.outliers == ()


def test_box_stats_empty():
    with pytest.raises(ValueError):
        box_stats([])


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=100))
def test_box_stats_matches_oracle(values):
    b = box_stats(values)
    o = oracles.box(values)
    assert b.median == o["median"] and b.q1 == o["q1"] and b.q3 == o["q3"]
    assert b.whisker_lo == o["whisker_lo"] and b.whisker_hi == o["whisker_hi"]
    assert list(b.outliers) == o["outliers"]
    assert b.n == len(values)


@pytest.mark.parametrize("value,label", [(0.05, DriftLabel.STABLE), (0.1, DriftLabel.MODERATE),
                                         (0.15, DriftLabel.MODERATE),
                                         (0.25, DriftLabel.SIGNIFICANT),
                                         (3.0, DriftLabel.SIGNIFICANT)])
def test_verdict_labels(value, label):
    v = verdict({"R": value})
    assert v.labels["R"] is label and v.thresholds == (0.1, 0.25) and v.advisory
    assert label_for(value) is label


@pytest.mark.parametrize("t", [(0.25, 0.1), (0.0, 0.1), (0.2, 0.2)])
def test_verdict_bad_thresholds(t):
    with pytest.raises(ValueError):
        verdict({"R": 0.1}, t)


def test_verdict_accepts_channel_ids():
    v = verdict({ChannelId.G: 0.5}, (0.2, 0.4))
    assert v.to_dict()["labels"] == {"G": "significant"}


@pytest.mark.parametrize("kind", [NoiseKind.GAUSSIAN, NoiseKind.SPECKLE])
def test_variance_sweep_shape_and_zero_point(rgb, kind):
    res = run_sweep(rgb, kind, seed=4)
    assert res.axis1 == DEFAULT_GRID and len(res.axis1) == 11
    for ch in ("R", "G", "B"):
        assert res.values[ch].shape == (11,)
        assert res.values[ch][0] == 0.0
        assert np.all(np.isfinite(res.values[ch])) and np.all(res.values[ch] >= 0)
    assert len(res.rows()) == 33
    assert res.rows()[0] == {"noise_level": 0.0, "channel": "R", "psi": 0.0}


def test_sp_sweep_surface(rgb):
    res = run_sweep(rgb, "sp", seed=1)
    for vals in res.values.values():
        assert vals.shape == (11, 11)
        assert np.all(vals[0] == 0.0)
        assert np.all(vals[1:] > 0)
    assert len(res.rows()) == 11 * 11 * 3
    assert set(res.rows()[0]) == {"amount", "proportion", "channel", "psi"}


def test_single_point_sweep(gray):
    res = run_sweep(gray, "gaussian", grid=[0.0])
    assert res.values == {"Gray": pytest.approx(np.array([0.0]))}
    assert res.values["Gray"][0] == 0.0


def test_sweep_is_deterministic_and_seed_sensitive(rgb):
    a = run_sweep(rgb, "speckle", grid=[0.1, 0.5], seed=3)
    b = run_sweep(rgb, "speckle", grid=[0.1, 0.5], seed=3)
    c = run_sweep(rgb, "speckle", grid=[0.1, 0.5], seed=4)
    assert all(np.array_equal(a.values[k], b.values[k]) for k in a.values)
    assert any(not np.array_equal(a.values[k], c.values[k]) for k in a.values)


def test_sweep_quantile_scheme(rgb):
    res = run_sweep(rgb, "gaussian", grid=[0, 0.2], scheme=BinningScheme(BinningMode.QUANTILE, 10))
    assert all(v[0] == 0.0 and v[1] > 0 for v in res.values.values())


def test_sweep_errors(rgb):
    with pytest.raises(ValueError):
        run_sweep(rgb, "gaussian", grid=[])
    with pytest.raises(ValueError):
        run_sweep(rgb, "gaussian", grid=[-0.1])
    with pytest.raises(ValueError):
        run_sweep(rgb, "sp", grid=[0.5], proportions=[])


# -- corpus --------------------------------------------------------------------

def test_corpus_identical_copies_zero(tmp_path, rgb):
    for i in range(4):
        save_pnm(rgb, tmp_path / f"copy{i}.ppm")
    res = run_corpus(sorted(tmp_path.iterdir()), NoiseSpec("gaussian", variance=0.0))
    assert res.image_count == 4 and not res.skipped
    for ch, s in res.stats.items():
        assert s.median == s.q1 == s.q3 == s.whisker_lo == s.whisker_hi == 0.0
    assert all(v == 0.0 for per in res.psi.values() for v in per.values())


def test_corpus_skips_corrupt_and_mismatched(corpus_dir):
    (corpus_dir / "img_99.ppm").write_bytes(b"P6 8 8 255\n\x00")
    save_pnm(synthetic_image(8, 8, 1), corpus_dir / "img_50.ppm")
    paths = sorted(corpus_dir.iterdir())
    res = run_corpus(paths, NoiseSpec("sp", amount=0.5))
    assert res.image_count == 7
    assert len(res.psi) == 5 and len(res.skipped) == 2
    assert {p.rsplit("/", 1)[-1] for p, _ in res.skipped} == {"img_50.ppm", "img_99.ppm"}
    assert all(s.median > 0 for s in res.stats.values())


def test_corpus_all_unloadable(tmp_path):
    (tmp_path / "a.ppm").write_bytes(b"")
    with pytest.raises(NoLoadableInputs):
        run_corpus([tmp_path / "a.ppm"], NoiseSpec("gaussian"))


def test_corpus_order_independent_of_input_order(corpus_dir):
    paths = sorted(corpus_dir.iterdir())
    spec = NoiseSpec("speckle", variance=0.1)
    a = run_corpus(paths, spec, base_seed=9)
    b = run_corpus(list(reversed(paths)), spec, base_seed=9)
    assert a.psi == b.psi and list(a.psi) == list(b.psi)


def test_corpus_parallel_matches_serial(corpus_dir):
    paths = sorted(corpus_dir.iterdir())
    spec = NoiseSpec("gaussian", variance=0.1)
    a = run_corpus(paths, spec, base_seed=1, workers=1)
    b = run_corpus(paths, spec, base_seed=1, workers=3)
    assert a.psi == b.psi and a.stats == b.stats

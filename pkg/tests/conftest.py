import numpy as np
import pytest
from hypothesis import settings

from psishift.imaging import Image, save_pnm, synthetic_image

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def rgb():
    return synthetic_image(32, 24, 3, seed=7)


@pytest.fixture
def gray():
    return synthetic_image(20, 16, 1, seed=11)


@pytest.fixture
def corpus_dir(tmp_path):
    """Five small RGB images written as binary PPM."""
    d = tmp_path / "corpus"
    d.mkdir()
    for i in range(5):
        save_pnm(synthetic_image(16, 16, 3, seed=100 + i), d / f"img_{i:02d}.ppm")
    return d


def constant_image(value, h=256, w=256, channels=1):
    return Image(np.full((channels, h, w), value))


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0][2:])):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{status:4}  {key}: {detail}")

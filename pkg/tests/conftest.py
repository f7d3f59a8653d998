import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def write_png(path, image):
    """Save a [0, 1] grayscale or RGB float image as 8-bit PNG."""
    data = np.clip(np.rint(np.asarray(image) * 255), 0, 255).astype(np.uint8)
    Image.fromarray(data).save(path)
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.pytest_terminal_summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

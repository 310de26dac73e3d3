from pathlib import Path

import numpy as np
import pytest

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_band_field(lat, rng, decay=1.5):
    """Real field with random phases and ``|k|^{-decay}`` amplitudes, Nyquist removed."""
    amp = np.where(lat.kmag > 0, np.maximum(lat.kmag, 1.0) ** (-decay), 0.0)
    coef = amp * (rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape))
    coef[lat.nyquist_mask] = 0.0
    return lat.ifft(coef) * lat.N**lat.d


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record one summary line per acceptance criterion."""
    def record(number, passed, detail, elapsed, budget):
        ok = bool(passed) and elapsed < budget
        ACCEPTANCE_LINES[number] = (f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}  "
                                    f"[{elapsed:.1f} s of {budget:g} s]")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from triwave.grid import make_grid
from triwave.state import TriField

settings.register_profile(
    "triwave", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("triwave")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid1():
    return make_grid(1, 256, 16.0)


def random_smooth(grid, rng, decay=1.0):
    """Random complex triple: Gaussian envelopes times low-mode random phases."""
    comps = []
    for _ in range(3):
        amp = rng.uniform(0.5, 1.5)
        width = rng.uniform(0.8, 1.6) * decay
        k = rng.integers(-3, 4, size=grid.dim) * np.pi / grid.half_width
        shift = rng.uniform(-1, 1, size=grid.dim)
        rs = sum((x - s) ** 2 for x, s in zip(grid.coords(), shift))
        comps.append(amp * np.exp(-rs / (2 * width**2)) * grid.plane_wave(k) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
    return TriField.from_components(grid, *comps)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  [{number:2d}] {title}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)

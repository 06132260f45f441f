import time

import numpy as np
import pytest

from framelab.eulerfields import diagnostics as diag
from framelab.eulerfields import frames, grid, solver


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def rng(request):
    return np.random.default_rng(sum(map(ord, request.node.name)))


class DeskRun:
    """One spectral run with monitors recorded at every step."""

    def __init__(self, field0, dt, n_steps, keep=()):
        self.field0 = field0
        self.series = diag.DiagnosticSeries()
        self.max_divergence = 0.0
        self.snapshots = {}
        step = {"k": 0}

        def callback(f):
            self.max_divergence = max(self.max_divergence, grid.spectral_divergence(f))
            diag.bkm_monitor(self.series, f)
            if step["k"] in keep:
                self.snapshots[step["k"]] = f
            step["k"] += 1

        start = time.perf_counter()
        self.final = solver.evolve(field0, dt, n_steps, callback)
        self.runtime = time.perf_counter() - start

    @property
    def energy_drift(self):
        e0 = grid.energy(self.field0)
        return abs(grid.energy(self.final) - e0) / e0


@pytest.fixture(scope="session")
def tg3d_run():
    return DeskRun(grid.taylor_green_3d(32), 1e-3, 1000, keep=(500,))


@pytest.fixture(scope="session")
def abc_run():
    return DeskRun(grid.abc_field(32), 1e-3, 1000)


@pytest.fixture(scope="session")
def abc32():
    return grid.abc_field(32)


@pytest.fixture(scope="session")
def abc_frame_fields(abc32):
    return frames.frame_fields(abc32)


@pytest.fixture
def report():
    """Print and record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def _report(n: int, text: str, ok: bool):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
        print(line)
        ACCEPTANCE[n] = line
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])

import numpy as np
import pytest

from fscnmf.pipeline import synth_dataset
from fscnmf.synth import SynthConfig


@pytest.fixture(scope="session")
def default_instance():
    """The default synthetic benchmark (n=300, K=3, seed 7) and its tf-idf matrix."""
    return synth_dataset(SynthConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sparse(rng, rows, cols, density):
    mask = rng.random((rows, cols)) < density
    return np.where(mask, rng.uniform(0.1, 2.0, (rows, cols)), 0.0)


_ACCEPTANCE_LINES = {}


@pytest.fixture
def report_criterion():
    """Record the one-line verdict of an acceptance criterion (printed in the terminal summary)."""

    def report(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {name}: {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[number])

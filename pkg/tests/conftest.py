import numpy as np
import pytest

from ratio_cs import numerics as nx
from ratio_cs.model import CoefficientDistribution, ProblemInstance, SparseSignal, random_instance

# 3x4 matrix whose kernel is spanned by (1, 1, 1, -1)
KERNEL4 = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 1.0, -1.0, 0.0], [0.0, 0.0, 1.0, 1.0]])


def make_instance(A, x0, noise_level=0.0):
    A = np.asarray(A, float)
    x0 = np.asarray(x0, float)
    return ProblemInstance(A, A @ x0, SparseSignal(x0), noise_level)


@pytest.fixture
def kernel4_toy():
    return make_instance(KERNEL4, [5.0, 0, 0, 0])


@pytest.fixture
def row4_toy():
    return make_instance([[1.0, 1.0, 1.0, -1.0]], [5.0, 0, 0, 0])


@pytest.fixture
def gaussian_instance():
    def build(seed, m=50, n=250, s=6, dist=None):
        dist = dist or CoefficientDistribution.uniform_annulus()
        return random_instance(nx.seeded_rng(seed), m, n, s, dist)
    return build


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

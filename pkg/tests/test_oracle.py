import numpy as np
import pytest

from ratio_cs import numerics as nx
from ratio_cs import oracle as orc
from ratio_cs import solvers as sv
from ratio_cs.errors import BudgetExceeded, KernelTooLarge
from ratio_cs.model import CoefficientDistribution, ProblemInstance, random_instance

from conftest import make_instance


def test_sparsest_identity():
    inst = ProblemInstance(np.eye(4), [0.0, 2.0, 0.0, -1.0])
    assert orc.sparsest_solution(inst).support == (1, 3)


def test_sparsest_row4(row4_toy):
    np.testing.assert_allclose(orc.sparsest_solution(row4_toy).values, [5, 0, 0, 0])


def test_sparsest_zero_rhs():
    inst = ProblemInstance(np.ones((1, 3)), [0.0])
    assert orc.sparsest_solution(inst).s == 0


def test_sparsest_budget():
    inst = random_instance(nx.seeded_rng(0), 6, 12, 5, CoefficientDistribution.uniform_sym())
    with pytest.raises(BudgetExceeded):
        orc.sparsest_solution(inst, orc.OracleBudget(max_support_enum=10))


def test_global_ratio_min_square():
    inst = ProblemInstance(np.diag([1.0, 2.0]), [3.0, 4.0])
    x, r = orc.global_ratio_min(inst)
    np.testing.assert_allclose(x, [3, 2])
    assert r == pytest.approx(5 / np.sqrt(13))


def test_global_ratio_min_kernel4(kernel4_toy):
    x, r = orc.global_ratio_min(kernel4_toy)
    np.testing.assert_allclose(x, [5, 0, 0, 0], atol=1e-12)
    assert r == pytest.approx(1.0, abs=1e-14)
    assert orc.is_unique_ratio_minimizer(kernel4_toy, [5, 0, 0, 0])


def test_global_ratio_min_dim3_rejected(row4_toy):
    with pytest.raises(KernelTooLarge):
        orc.global_ratio_min(row4_toy)


def _dense_min(inst, pts=1201):
    """Independent route: dense 2-d grid then Nelder-Mead polish from the best cells."""
    from scipy.optimize import minimize
    N = nx.kernel_basis(inst.A)
    xp = np.linalg.lstsq(inst.A, inst.b, rcond=None)[0]
    half = 10 * np.linalg.norm(xp)
    t = np.linspace(-half, half, pts)
    C = np.stack(np.meshgrid(t, t), -1).reshape(-1, 2)
    X = xp + C @ N.T
    R = np.abs(X).sum(1) / np.linalg.norm(X, axis=1)
    best = np.inf
    for i in np.argsort(R)[:5]:
        f = lambda c: np.abs(xp + N @ c).sum() / np.linalg.norm(xp + N @ c)
        best = min(best, minimize(f, C[i], method="Nelder-Mead",
                                  options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000}).fun)
    return best


@pytest.mark.parametrize("seed", range(6))
def test_vertex_oracle_matches_dense_search(seed):
    rng = nx.seeded_rng(seed)
    inst = random_instance(rng, 5, 7, 2, CoefficientDistribution.uniform_annulus())
    land = orc.ratio_landscape(inst)
    dense = _dense_min(inst)
    assert min(land.ratio, land.at_infinity) <= dense + 1e-9
    assert dense <= min(land.ratio, land.at_infinity) + 1e-6
    assert land.grid_ratio >= min(land.ratio, land.at_infinity) - 1e-12
    assert land.ratio >= 1.0


@pytest.mark.parametrize("seed", range(10))
def test_oracle_bounds_solver_outputs(seed):
    rng = nx.seeded_rng(100 + seed)
    n = int(rng.integers(4, 9))
    m = n - int(rng.integers(1, 3))
    inst = random_instance(rng, m, n, int(rng.integers(1, 3)), CoefficientDistribution.uniform_sym())
    _, r = orc.global_ratio_min(inst)
    sparsest = orc.sparsest_solution(inst)
    for method in ("l1", "l1l2", "omp"):
        x = sv.run_method(method, inst).x
        assert r <= sv.l1_l2(x) + 1e-3
        assert sparsest.s <= np.count_nonzero(np.abs(x) > 1e-9)

import numpy as np
import pytest

from ratio_cs import _kernels as K
from ratio_cs import numerics as nx

pytestmark = pytest.mark.skipif(K.nb is None, reason="numba not installed")


def _admm_inputs(seed):
    rng = nx.seeded_rng(seed)
    A = rng.standard_normal((20, 60))
    Q, R = np.linalg.qr(A.T)
    b = rng.standard_normal(20)
    y = np.linalg.solve(R.T, b)
    return (np.ascontiguousarray(Q), y, rng.standard_normal(60), rng.standard_normal(60),
            np.abs(rng.standard_normal(60)) + 0.5)


@pytest.mark.parametrize("box", [np.inf, 1.5])
def test_admm_backends_agree(box):
    Q, y, c, xp, w = _admm_inputs(0)
    outs = []
    for fn in (K.admm_loop_numpy, K.admm_loop_numba):
        z, u = np.zeros(60), np.zeros(60)
        x, it, conv, rp, rd = fn(Q, y, c, xp, w, 0.5, 20.0, box, 1e-9, 1e-9, 500, z, u)
        outs.append((np.asarray(x), it, conv, z.copy(), u.copy()))
    (x1, i1, c1, z1, u1), (x2, i2, c2, z2, u2) = outs
    assert i1 == i2 and c1 == c2
    np.testing.assert_allclose(x1, x2, atol=1e-10)
    np.testing.assert_allclose(z1, z2, atol=1e-10)
    np.testing.assert_allclose(u1, u2, atol=1e-10)


@pytest.mark.parametrize("q", [1.0, 0.5])
def test_nsp_margin_backends_agree(q):
    H = nx.seeded_rng(1).standard_normal((300, 9))
    a = K.nsp_margins_numpy(H, 3, 0.4, q)
    b = K.nsp_margins_numba(H, 3, 0.4, q)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_ratio_grid_backends_agree():
    rng = nx.seeded_rng(2)
    xp = rng.standard_normal(7)
    N = np.linalg.qr(rng.standard_normal((7, 2)))[0]
    t = np.linspace(-3, 3, 101)
    a = K.ratio_grid_min_numpy(xp, np.ascontiguousarray(N), t, t)
    b = K.ratio_grid_min_numba(xp, np.ascontiguousarray(N), t, t)
    assert a[1:] == b[1:]
    assert a[0] == pytest.approx(b[0], abs=1e-13)


def test_backend_flag_matches_selection():
    assert K.BACKEND in ("numba", "numpy")
    assert (K.admm_loop is K.admm_loop_numba) == K.USE_NUMBA

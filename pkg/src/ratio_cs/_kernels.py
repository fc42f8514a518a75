"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is picked once at import time.  Set ``RATIO_CS_NUMBA=0`` to force
the numpy path (also used automatically when numba is not importable).  Both
paths implement the same arithmetic; they agree to rounding error, which
``tests/test_kernels.py`` checks directly.
"""

import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None

_FLAG = os.environ.get("RATIO_CS_NUMBA", "1").strip().lower()
USE_NUMBA = nb is not None and _FLAG not in ("0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# ADMM loop for   min ||z||_w,1 + <c, x> + beta/2 ||x - xp||^2
#                 s.t. A x = b, x = z, |z|_inf <= box
#
# The x-update is the Euclidean projection onto {A x = b}, written with the
# thin QR factor Q of A^T (n x m, orthonormal columns) and y = R^{-T} b:
#     x = v - Q (Q^T v - y).
# z and u (scaled dual) are updated in place so callers can warm start.
# ---------------------------------------------------------------------------

def admm_loop_numpy(Q, y, c, xp, w, beta, rho, box, tol_p, tol_d, max_iter, z, u):
    n = Q.shape[0]
    sqn = np.sqrt(n)
    denom = beta + rho
    thresh = w / rho
    x = np.zeros(n)
    rp = rd = np.inf
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        v = (beta * xp + rho * (z - u) - c) / denom
        x = v - Q @ (Q.T @ v - y)
        a = x + u
        z_new = np.sign(a) * np.maximum(np.abs(a) - thresh, 0.0)
        np.clip(z_new, -box, box, out=z_new)
        rd = rho * np.linalg.norm(z_new - z)
        z[:] = z_new
        d = x - z
        u += d
        rp = np.linalg.norm(d)
        if rp <= tol_p * sqn and rd <= tol_d * sqn:
            converged = True
            break
    return x, it, converged, rp, rd


def nsp_margins_numpy(H, s, c, q):
    """Normalized NSP margin per row, worst index set = s largest entries."""
    P = np.abs(H) ** q
    total = P.sum(axis=1)
    if s <= 0:
        top = np.zeros(H.shape[0])
    elif s >= H.shape[1]:
        top = total.copy()
    else:
        part = np.partition(P, H.shape[1] - s, axis=1)
        top = part[:, H.shape[1] - s:].sum(axis=1)
    rest = total - top
    return (c * rest - top) / total


def ratio_grid_min_numpy(xp, N, t1, t2):
    """Minimum of ||xp + N[:,0] a + N[:,1] b||_1 / ||.||_2 over the grid t1 x t2."""
    best = np.inf
    bi = bj = -1
    n1 = N[:, 0]
    n2 = N[:, 1]
    base = xp[None, :] + t1[:, None] * n1[None, :]
    for j in range(t2.shape[0]):
        X = base + t2[j] * n2[None, :]
        l2 = np.sqrt((X * X).sum(axis=1))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(X).sum(axis=1) / l2
        r[l2 == 0.0] = np.inf
        i = int(np.argmin(r))
        if r[i] < best:
            best, bi, bj = float(r[i]), i, j
    return best, bi, bj


if nb is not None:

    @nb.njit(cache=True)
    def admm_loop_numba(Q, y, c, xp, w, beta, rho, box, tol_p, tol_d, max_iter, z, u):
        n = Q.shape[0]
        sqn = np.sqrt(n)
        denom = beta + rho
        x = np.zeros(n)
        v = np.empty(n)
        rp = np.inf
        rd = np.inf
        it = 0
        converged = False
        for it in range(1, max_iter + 1):
            for i in range(n):
                v[i] = (beta * xp[i] + rho * (z[i] - u[i]) - c[i]) / denom
            t = Q.T @ v - y
            x = v - Q @ t
            sp = 0.0
            sd = 0.0
            for i in range(n):
                a = x[i] + u[i]
                th = w[i] / rho
                if a > th:
                    zn = a - th
                elif a < -th:
                    zn = a + th
                else:
                    zn = 0.0
                if zn > box:
                    zn = box
                elif zn < -box:
                    zn = -box
                sd += (zn - z[i]) ** 2
                z[i] = zn
                d = x[i] - zn
                u[i] += d
                sp += d * d
            rp = np.sqrt(sp)
            rd = rho * np.sqrt(sd)
            if rp <= tol_p * sqn and rd <= tol_d * sqn:
                converged = True
                break
        return x, it, converged, rp, rd

    @nb.njit(cache=True)
    def nsp_margins_numba(H, s, c, q):
        k, n = H.shape
        out = np.empty(k)
        p = np.empty(n)
        s = min(max(s, 0), n)
        for r in range(k):
            total = 0.0
            for i in range(n):
                a = abs(H[r, i])
                p[i] = a if q == 1.0 else a ** q
                total += p[i]
            # partial selection sort: the s largest entries move to the front
            top = 0.0
            for j in range(s):
                best = j
                for i in range(j + 1, n):
                    if p[i] > p[best]:
                        best = i
                p[j], p[best] = p[best], p[j]
                top += p[j]
            out[r] = (c * (total - top) - top) / total
        return out

    @nb.njit(cache=True)
    def ratio_grid_min_numba(xp, N, t1, t2):
        n = xp.shape[0]
        best = np.inf
        bi = -1
        bj = -1
        for i in range(t1.shape[0]):
            for j in range(t2.shape[0]):
                l1 = 0.0
                l2 = 0.0
                for k in range(n):
                    v = xp[k] + t1[i] * N[k, 0] + t2[j] * N[k, 1]
                    l1 += abs(v)
                    l2 += v * v
                if l2 > 0.0:
                    r = l1 / np.sqrt(l2)
                    if r < best:
                        best = r
                        bi = i
                        bj = j
        return best, bi, bj


if USE_NUMBA:
    admm_loop = admm_loop_numba
    nsp_margins = nsp_margins_numba
    ratio_grid_min = ratio_grid_min_numba
else:
    admm_loop = admm_loop_numpy
    nsp_margins = nsp_margins_numpy
    ratio_grid_min = ratio_grid_min_numpy

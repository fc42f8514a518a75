"""Brute-force ground truth for tiny instances.

``sparsest_solution`` enumerates supports.  ``global_ratio_min`` minimizes
``||x||_1/||x||_2`` over ``{A x = b}`` when the kernel has dimension <= 2 by
parametrizing ``x = x_p + N c``.  The hyperplanes ``{c : x_i = 0}`` cut the
coefficient space into cells on which ``||x||_1`` is affine and ``||x||_2``
strictly convex along any line missing the origin, so the ratio is strictly
quasiconcave there: its minimum over the closure of a cell sits at a vertex
(an intersection of k hyperplanes) or is approached at infinity along a cell
edge, where the ratio tends to that of ``N d``.  Both candidate sets are
finite, so the minimum is exact; a dense grid is evaluated as a cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import _kernels
from . import numerics as nx
from .errors import BudgetExceeded, KernelTooLarge
from .model import ProblemInstance, SparseSignal


@dataclass(frozen=True)
class OracleBudget:
    max_support_enum: int = math.comb(30, 5)
    kernel_grid_points: int = 2001
    max_kernel_dim: int = 2


def sparsest_solution(inst: ProblemInstance, budget: OracleBudget = OracleBudget()) -> SparseSignal:
    """Sparsest x with A x = b, by enumerating supports of increasing size.

    Supports of equal size are visited in lexicographic order and the first
    exact fit (residual <= 1e-9 max(1, ||b||)) is returned.
    """
    A, b = inst.A, inst.b
    m, n = A.shape
    tol = 1e-9 * max(1.0, float(np.linalg.norm(b)))
    if np.linalg.norm(b) <= tol:
        return SparseSignal(np.zeros(n))
    visited = 0
    for k in range(1, min(m, n) + 1):
        for S in itertools.combinations(range(n), k):
            visited += 1
            if visited > budget.max_support_enum:
                raise BudgetExceeded(f"more than {budget.max_support_enum} supports visited")
            cols = A[:, S]
            coef, *_ = np.linalg.lstsq(cols, b, rcond=None)
            if np.linalg.norm(cols @ coef - b) <= tol and np.all(coef != 0):
                x = np.zeros(n)
                x[list(S)] = coef
                return SparseSignal(x)
    raise BudgetExceeded("no exact solution found")


@dataclass
class RatioLandscape:
    """Exact minimum of l1/l2 over an affine set of dimension <= 2.

    Attributes
    ----------
    x, ratio : minimizing vertex and its ratio (``x`` is None if the affine set is empty).
    runner_up : smallest ratio at a vertex distinct from ``x``.
    at_infinity : infimum of the ratio along unbounded directions.
    grid_ratio : minimum over the dense grid (never below ``ratio``).
    grid_resolution : grid points per kernel dimension.
    """

    x: np.ndarray
    ratio: float
    runner_up: float
    at_infinity: float
    grid_ratio: float
    grid_resolution: int
    kernel_dim: int

    @property
    def attained(self) -> bool:
        return self.ratio <= self.at_infinity

    def is_unique(self, rtol: float = 1e-9) -> bool:
        """True when x is the strict global minimizer with relative margin rtol."""
        gap = rtol * max(1.0, self.ratio)
        return self.ratio + gap < min(self.runner_up, self.at_infinity)


def _ratio_rows(X: np.ndarray) -> np.ndarray:
    l2 = np.linalg.norm(X, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(l2 > 0, np.abs(X).sum(1) / l2, np.inf)


def ratio_landscape(inst: ProblemInstance, budget: OracleBudget = OracleBudget()) -> RatioLandscape:
    A, b = inst.A, inst.b
    n = inst.n
    aff_Q, aff_R = nx.qr_transpose(A).factors
    xp = aff_Q @ sla.solve_triangular(aff_R, b, trans="T")
    N = nx.kernel_basis(A)
    k = N.shape[1]
    if k > budget.max_kernel_dim:
        raise KernelTooLarge(f"kernel dimension {k} > {budget.max_kernel_dim}")
    if k == 0:
        r = float(_ratio_rows(xp[None, :])[0])
        return RatioLandscape(xp, r, np.inf, np.inf, r, 0, 0)
    scale = 1e-12 * max(1.0, np.abs(N).max())
    verts, dirs = [], []
    if k == 1:
        nz = np.flatnonzero(np.abs(N[:, 0]) > scale)
        verts = [np.array([-xp[i] / N[i, 0]]) for i in nz]
        dirs = [np.array([1.0])]
    else:
        for i, j in itertools.combinations(range(n), 2):
            M = N[[i, j]]
            if abs(np.linalg.det(M)) > scale * np.abs(M).max():
                verts.append(np.linalg.solve(M, -xp[[i, j]]))
        for i in range(n):
            if np.linalg.norm(N[i]) > scale:
                dirs.append(np.array([-N[i, 1], N[i, 0]]))
        if not dirs:
            dirs = [np.array([1.0, 0.0])]
    X = np.array([xp + N @ c for c in verts]) if verts else np.empty((0, n))
    # exact zeros where the defining coordinates vanish
    X[np.abs(X) <= 1e-13 * max(1.0, np.abs(xp).max())] = 0.0
    R = _ratio_rows(X) if len(X) else np.empty(0)
    inf_val = float(_ratio_rows(np.array([N @ d for d in dirs])).min())

    g = budget.kernel_grid_points
    half = 10.0 * max(float(np.linalg.norm(xp)), 1e-300)
    t = np.linspace(-half, half, g)
    if k == 1:
        grid_r = _ratio_rows(xp[None, :] + t[:, None] * N[:, 0][None, :])
        grid_val = float(grid_r.min())
    else:
        grid_val = float(_kernels.ratio_grid_min(np.ascontiguousarray(xp), np.ascontiguousarray(N),
                                                 t, t)[0])

    if len(R) == 0:
        return RatioLandscape(None, inf_val, np.inf, inf_val, grid_val, g, k)
    order = np.argsort(R, kind="stable")
    best = int(order[0])
    xb = X[best]
    runner = np.inf
    tol = 1e-9 * max(1.0, np.linalg.norm(xb))
    for i in order[1:]:
        if np.linalg.norm(X[i] - xb) > tol:
            runner = float(R[i])
            break
    return RatioLandscape(xb, float(R[best]), runner, inf_val, grid_val, g, k)


def global_ratio_min(inst: ProblemInstance,
                     budget: OracleBudget = OracleBudget()) -> tuple[np.ndarray, float]:
    """Global minimizer of ``||x||_1/||x||_2`` on ``{A x = b}`` (kernel dim <= 2).

    Returns the minimizing vertex and its ratio.  If the infimum is only
    approached at infinity the returned ratio is that infimum and the vector
    is the best vertex (see :func:`ratio_landscape` for the details).
    """
    land = ratio_landscape(inst, budget)
    return land.x, min(land.ratio, land.at_infinity)


def is_unique_ratio_minimizer(inst: ProblemInstance, x0, rtol: float = 1e-9,
                              budget: OracleBudget = OracleBudget()) -> bool:
    """True when x0 is, up to 1e-8 relative distance, the strict global l1/l2 minimizer."""
    land = ratio_landscape(inst, budget)
    x0 = nx.as_vector(x0)
    if land.x is None or not land.is_unique(rtol):
        return False
    return bool(np.linalg.norm(land.x - x0) <= 1e-8 * max(1.0, np.linalg.norm(x0)))

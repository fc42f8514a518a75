"""Sparse recovery solvers.

The main method minimizes ``||x||_1 / ||x||_2`` subject to ``A x = b`` (and an
optional box ``||x||_inf <= L``) by a difference-of-convex scheme: every outer
step linearizes the ratio at the current iterate and solves the convex
proximal subproblem with ADMM.  ``solve_l1l2_ss`` restarts the scheme from
single-spike initializers on the support of the l1 solution.  The remaining
solvers are the usual baselines (basis pursuit, reweighted l1, IRLS-lq,
l1 - l2, OMP, CoSaMP).
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

from . import _kernels
from . import numerics as nx
from .errors import RankDeficient, SingularWeightSystem, ZeroIterate
from .model import ProblemInstance, top_k_indices

CONVERGED = "converged"
MAX_ITERS = "max_iters"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"

ZERO_NORM = 1e-12
# relative tolerance of the l1 - l2 inner ADMM and outer loop
L12_RELTOL = 1e-6


@dataclass
class SolverConfig:
    """Parameters shared by all solvers.

    ``rw_iters``, ``irls_max_iter``, ``l1_minus_l2_max_outer``,
    ``inner_schedule`` and ``bp_method`` are additions to the core parameter set.  ``inner_schedule`` > 0 loosens the
    ADMM tolerance of the ratio solver to ``inner_schedule * |alpha change|``
    (capped at 1e-3, floored at ``tol_primal``/``tol_dual``) while the outer
    iteration is still moving; 0 keeps the tolerances fixed.
    """

    beta: float = 0.5
    admm_rho: float = 20.0
    box_bound: float | None = 10.0
    max_outer: int = 200
    max_inner: int = 2000
    tol_alpha: float = 1e-6
    tol_primal: float = 1e-7
    tol_dual: float = 1e-7
    q: float = 0.5
    rw_epsilon: float = 0.1
    lasso_lambda: float = 0.01
    l1l2_admm_rho: float = 100.0
    residual_stop: float = 1e-8
    cosamp_max_iter: int = 100
    cosamp_sparsity: int | None = None
    rw_iters: int = 8
    irls_max_iter: int = 500
    l1_minus_l2_max_outer: int = 10
    inner_schedule: float = 0.1
    bp_method: str = "lp"

    def __post_init__(self):
        for name in ("tol_alpha", "tol_primal", "tol_dual", "residual_stop",
                     "admm_rho", "l1l2_admm_rho", "rw_epsilon", "lasso_lambda"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if not 0 < self.q <= 1:
            raise ValueError("q must lie in (0, 1]")
        if self.box_bound is not None and not self.box_bound > 0:
            raise ValueError("box_bound must be positive")
        if self.inner_schedule < 0:
            raise ValueError("inner_schedule must be nonnegative")
        if self.bp_method not in ("lp", "admm"):
            raise ValueError("bp_method must be 'lp' or 'admm'")
        for name in ("max_outer", "max_inner", "cosamp_max_iter", "rw_iters", "irls_max_iter",
                     "l1_minus_l2_max_outer"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def box(self) -> float:
        return np.inf if self.box_bound is None else float(self.box_bound)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "SolverConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class SolverResult:
    x: np.ndarray
    outer_iters: int
    inner_iters_total: int
    objective_trace: list
    termination: str
    wall_time: float
    method: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self, traces: bool = False) -> dict:
        d = {
            "method": self.method,
            "x": [float(v) for v in self.x],
            "outer_iters": int(self.outer_iters),
            "inner_iters_total": int(self.inner_iters_total),
            "termination": self.termination,
            "wall_time": float(self.wall_time),
        }
        d.update(self.extra)
        if traces:
            d["objective_trace"] = [float(v) for v in self.objective_trace]
        return d


def l1_l2(x) -> float:
    return float(np.abs(x).sum() / np.linalg.norm(x))


class AffineSet:
    """The set {x : A x = b}, with Euclidean projection via the thin QR of A^T."""

    def __init__(self, A, b):
        A = nx.as_matrix(A)
        f = nx.qr_transpose(A)
        self.A = A
        self.b = nx.as_vector(b)
        self.Q, self.R = f.factors
        self.Q = np.ascontiguousarray(self.Q)
        self.y = sla.solve_triangular(self.R, self.b, trans="T")

    def project(self, v: np.ndarray) -> np.ndarray:
        return v - self.Q @ (self.Q.T @ v - self.y)

    def residual(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.A @ x - self.b))

    def least_norm(self) -> np.ndarray:
        return self.Q @ self.y


def _feasible(inst: ProblemInstance, x: np.ndarray) -> bool:
    return np.linalg.norm(inst.A @ x - inst.b) <= 1e-6 * max(1.0, np.linalg.norm(inst.b))


def _polish_box(aff: AffineSet, x: np.ndarray, box: float, sweeps: int = 200) -> np.ndarray:
    """Alternate clipping and affine projection until both hold to rounding."""
    if not np.isfinite(box):
        return x
    for _ in range(sweeps):
        if np.abs(x).max() <= box * (1 + 1e-13):
            break
        x = aff.project(np.clip(x, -box, box))
    return x


@dataclass
class AdmmState:
    """Primal/dual state carried between consecutive ADMM solves (warm start)."""

    z: np.ndarray
    u: np.ndarray


@dataclass
class AdmmOutput:
    x: np.ndarray
    iters: int
    converged: bool
    primal_residual: float
    dual_residual: float
    state: AdmmState


def admm_solve(aff: AffineSet, c, x_prev, beta: float, rho: float, box: float,
               tol_primal: float, tol_dual: float, max_iter: int,
               weights=None, state: AdmmState | None = None) -> AdmmOutput:
    """ADMM on ``min ||z||_{w,1} + <c,x> + beta/2 ||x - x_prev||^2``
    over ``{A x = b, x = z, ||z||_inf <= box}``.

    The returned x is exactly feasible up to rounding and lies in the box
    (after a short alternating-projection polish when the box is active).
    """
    n = aff.A.shape[1]
    c = np.ascontiguousarray(c, dtype=np.float64)
    xp = np.ascontiguousarray(x_prev, dtype=np.float64)
    w = np.ones(n) if weights is None else np.ascontiguousarray(weights, dtype=np.float64)
    if state is None:
        z = np.clip(aff.project(xp), -box, box)
        state = AdmmState(z, np.zeros(n))
    x, it, conv, rp, rd = _kernels.admm_loop(aff.Q, aff.y, c, xp, w, float(beta), float(rho),
                                             float(box), float(tol_primal), float(tol_dual),
                                             int(max_iter), state.z, state.u)
    x = _polish_box(aff, np.asarray(x), box)
    return AdmmOutput(x, int(it), bool(conv), float(rp), float(rd), state)


def admm_subproblem(A, b, linear_term, beta: float, rho: float, box_bound: float | None,
                    tols: tuple = (1e-7, 1e-7), x_prev=None, max_iter: int = 2000,
                    weights=None) -> np.ndarray:
    """Minimizer of ``||x||_1 + <c, x> + beta/2 ||x - x_prev||^2`` on ``{A x = b}``
    intersected with the box.

    Parameters
    ----------
    A, b : array_like
        Full row rank system.
    linear_term : array_like
        The vector c.
    beta, rho : float
        Proximal weight and ADMM penalty.
    box_bound : float or None
        Half-width of the box; None for no box.
    tols : tuple of float
        Primal and dual stopping tolerances (scaled by sqrt(n)).
    x_prev : array_like, optional
        Proximal center; zero if omitted.
    """
    aff = AffineSet(A, b)
    n = aff.A.shape[1]
    xp = np.zeros(n) if x_prev is None else nx.as_vector(x_prev)
    box = np.inf if box_bound is None else float(box_bound)
    return admm_solve(aff, nx.as_vector(linear_term), xp, beta, rho, box,
                      tols[0], tols[1], max_iter, weights).x


def subproblem_kkt_residual(aff: AffineSet, c, x_prev, beta, rho, box, out: AdmmOutput,
                            weights=None) -> float:
    """Distance of 0 to the subdifferential of the split problem at (x, z, rho*u)."""
    x, z, u = out.x, out.state.z, out.state.u
    n = x.shape[0]
    w = np.ones(n) if weights is None else weights
    g = c + beta * (x - x_prev) + rho * u
    stat_x = np.linalg.norm(g - aff.Q @ (aff.Q.T @ g))
    lam = rho * u
    dz = np.empty(n)
    for i in range(n):
        zi = z[i]
        if zi == 0.0:
            dz[i] = max(abs(lam[i]) - w[i], 0.0)
        elif abs(zi) >= box:
            dz[i] = max(w[i] - np.sign(zi) * lam[i], 0.0)
        else:
            dz[i] = abs(lam[i] - w[i] * np.sign(zi))
    return float(stat_x + np.linalg.norm(dz) + np.linalg.norm(x - z))


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.wall_time = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    wrapper.__wrapped__ = fn
    return wrapper


# ---------------------------------------------------------------------------
# basis pursuit and reweighted l1
# ---------------------------------------------------------------------------

def _weighted_l1_lp(A, b, w, box) -> tuple[np.ndarray | None, str]:
    """min sum w|x| s.t. A x = b, |x| <= box, as an LP in (x+, x-)."""
    m, n = A.shape
    ub = None if not np.isfinite(box) else box
    res = linprog(np.concatenate([w, w]), A_eq=np.hstack([A, -A]), b_eq=b,
                  bounds=[(0, ub)] * (2 * n), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        return None, INFEASIBLE
    if res.x is None:
        return None, NUMERICAL_FAILURE
    x = res.x[:n] - res.x[n:]
    # vertex solutions sit on at most m columns; a least-squares correction on
    # that support removes the solver's feasibility slack
    S = np.flatnonzero(np.abs(x) > 1e-12 * max(1.0, np.abs(x).max()))
    r = b - A @ x
    if S.size:
        dx, *_ = np.linalg.lstsq(A[:, S], r, rcond=None)
        xt = x.copy()
        xt[S] += dx
        if np.abs(xt).max() <= box and np.linalg.norm(b - A @ xt) < np.linalg.norm(r):
            x = xt
    return x, CONVERGED if res.status == 0 else MAX_ITERS


@_timed
def solve_l1_bp(inst: ProblemInstance, cfg: SolverConfig | None = None) -> SolverResult:
    """Basis pursuit ``min ||x||_1`` s.t. ``A x = b`` and the box.

    ``cfg.bp_method == "lp"`` (default) uses the HiGHS simplex/IPM through
    scipy; ``"admm"`` uses the same ADMM core as the ratio solver with
    ``beta = 0`` and no linear term.
    """
    cfg = cfg or SolverConfig()
    n = inst.n
    if cfg.bp_method == "lp":
        x, term = _weighted_l1_lp(inst.A, inst.b, np.ones(n), cfg.box)
        if x is None:
            return SolverResult(np.zeros(n), 0, 0, [], term, 0.0, "l1")
        return SolverResult(x, 1, 0, [float(np.abs(x).sum())], term, 0.0, "l1")
    aff = AffineSet(inst.A, inst.b)
    out = admm_solve(aff, np.zeros(n), np.zeros(n), 0.0, cfg.admm_rho, cfg.box,
                     cfg.tol_primal, cfg.tol_dual, cfg.max_inner * 10)
    return SolverResult(out.x, 1, out.iters, [float(np.abs(out.x).sum())],
                        CONVERGED if out.converged else MAX_ITERS, 0.0, "l1")


def _l1_start(inst, cfg, x_l1):
    if x_l1 is not None:
        return nx.as_vector(x_l1)
    return solve_l1_bp(inst, cfg).x


@_timed
def solve_reweighted_l1(inst: ProblemInstance, cfg: SolverConfig | None = None,
                        x_l1=None) -> SolverResult:
    """Iteratively reweighted l1 with weights ``1 / (|x_i| + eps)``."""
    cfg = cfg or SolverConfig()
    x = _l1_start(inst, cfg, x_l1)
    w = 1.0 / (np.abs(x) + cfg.rw_epsilon)
    trace = [float(np.abs(x).sum())]
    term = CONVERGED
    k = 0
    for k in range(1, cfg.rw_iters + 1):
        xn, t = _weighted_l1_lp(inst.A, inst.b, w, cfg.box)
        if xn is None:
            term = t
            break
        x = xn
        trace.append(float(np.abs(x).sum()))
        w_new = 1.0 / (np.abs(x) + cfg.rw_epsilon)
        change = np.abs(w_new - w).max()
        w = w_new
        if change <= 1e-6:
            break
    return SolverResult(x, k, 0, trace, term, 0.0, "rwl1", {"weights_min": float(w.min()),
                                                             "weights_max": float(w.max())})


# ---------------------------------------------------------------------------
# l1/l2 ratio
# ---------------------------------------------------------------------------

def _dca_ratio(cfg: SolverConfig, x_init: np.ndarray, init_feasible: bool,
               admm) -> SolverResult:
    x = nx.as_vector(x_init).copy()
    if np.linalg.norm(x) < ZERO_NORM:
        raise ZeroIterate("initial point is zero")
    alpha = l1_l2(x)
    trace = [alpha]
    best_x, best_r = (x.copy(), alpha) if init_feasible else (None, np.inf)
    state = None
    inner_total = 0
    dalpha = np.inf
    term = MAX_ITERS
    k = 0
    tol_p, tol_d = cfg.tol_primal, cfg.tol_dual
    for k in range(1, cfg.max_outer + 1):
        if cfg.inner_schedule > 0:
            loose = min(max(cfg.inner_schedule * dalpha, 0.0), 1e-3)
            tp, td = max(tol_p, loose), max(tol_d, loose)
        else:
            tp, td = tol_p, tol_d
        c = -alpha * x / np.linalg.norm(x)
        out = admm(c, x, tp, td, state)
        state = out.state
        inner_total += out.iters
        xn = out.x
        if np.linalg.norm(xn) < ZERO_NORM:
            raise ZeroIterate(f"iterate {k} collapsed to zero")
        a_new = l1_l2(xn)
        trace.append(a_new)
        if a_new < best_r:
            best_x, best_r = xn.copy(), a_new
        dalpha = abs(a_new - alpha)
        x, alpha = xn, a_new
        if dalpha <= cfg.tol_alpha and tp <= tol_p and td <= tol_d:
            term = CONVERGED
            break
    return SolverResult(best_x, k, inner_total, trace, term, 0.0, "l1l2",
                        {"ratio": float(best_r)})


@_timed
def solve_l1l2(inst: ProblemInstance, cfg: SolverConfig | None = None, x_init=None,
               x_l1=None, affine: AffineSet | None = None) -> SolverResult:
    """l1/l2 minimization by the linearize-and-prox scheme.

    Each outer step solves
    ``min ||x||_1 - (alpha_k/||x_k||_2) <x, x_k> + beta/2 ||x - x_k||^2``
    over ``{A x = b, ||x||_inf <= L}`` and sets ``alpha_{k+1}`` to the ratio of
    the new iterate.  Stops when ``|alpha_{k+1} - alpha_k| <= tol_alpha``.

    Parameters
    ----------
    x_init : array_like, optional
        Starting point; the l1 minimizer (``x_l1`` or a fresh solve) when omitted.
    affine : AffineSet, optional
        Cached factorization of the constraint, shared across restarts.

    Returns
    -------
    SolverResult
        ``x`` is the feasible iterate of smallest ratio seen (the start point
        included when it is feasible); ``objective_trace`` holds the alpha
        sequence starting with the ratio of ``x_init``.
    """
    cfg = cfg or SolverConfig()
    aff = affine or AffineSet(inst.A, inst.b)
    if x_init is None:
        x_init = _l1_start(inst, cfg, x_l1)
    x_init = nx.as_vector(x_init)
    feas = _feasible(inst, x_init) and np.abs(x_init).max() <= cfg.box

    def admm(c, xp, tp, td, state):
        return admm_solve(aff, c, xp, cfg.beta, cfg.admm_rho, cfg.box, tp, td,
                          cfg.max_inner, None, state)

    return _dca_ratio(cfg, x_init, feas, admm)


def spike_init(inst: ProblemInstance, i: int) -> np.ndarray:
    """Least-squares fit of b by column i alone, embedded in R^n."""
    a = inst.A[:, i]
    x = np.zeros(inst.n)
    x[i] = float(inst.b @ a) / float(a @ a)
    return x


@_timed
def solve_l1l2_ss(inst: ProblemInstance, cfg: SolverConfig | None = None, s: int = 1,
                  x_l1=None, base=None) -> SolverResult:
    """l1/l2 with support-selection restarts.

    The l1 minimizer is truncated to its s largest entries; for every index i
    of that support (ascending) the ratio solver starts from the spike
    ``(<b, a_i>/||a_i||^2) e_i``.  The candidate with the smallest ratio wins,
    ties going to the smaller index.

    Returns
    -------
    SolverResult
        ``extra`` holds ``winning_index`` (a column index), ``candidate_indices``
        and ``candidate_ratios`` (``inf`` for failed restarts).
    """
    cfg = cfg or SolverConfig()
    if not 1 <= s <= inst.m:
        raise ValueError(f"s must lie in [1, m], got {s}")
    base = base or solve_l1l2
    xl1 = _l1_start(inst, cfg, x_l1)
    support = sorted(int(i) for i in top_k_indices(xl1, s))
    aff = AffineSet(inst.A, inst.b)
    ratios, results = [], []
    for i in support:
        try:
            r = base(inst, cfg, x_init=spike_init(inst, i), affine=aff)
            rv = l1_l2(r.x) if r.x is not None else np.inf
        except (ZeroIterate, SingularWeightSystem, RankDeficient):
            r, rv = None, np.inf
        ratios.append(float(rv))
        results.append(r)
    k = int(np.argmin(ratios))
    extra = {"winning_index": support[k], "candidate_indices": support,
             "candidate_ratios": ratios}
    if not np.isfinite(ratios[k]):
        return SolverResult(xl1, 0, 0, [], NUMERICAL_FAILURE, 0.0, "l1l2+ss", extra)
    win = results[k]
    extra["ratio"] = ratios[k]
    return SolverResult(win.x, sum(r.outer_iters for r in results if r),
                        sum(r.inner_iters_total for r in results if r),
                        win.objective_trace, win.termination, 0.0, "l1l2+ss", extra)


class ResidualBall:
    """The set {x : ||A x - b||_2 <= eps} with exact Euclidean projection.

    Projection solves ``x = v - lam A^T (A x - b)`` where ``lam >= 0`` is the
    root of the secular equation ``||A x(lam) - b|| = eps`` in the SVD basis of A.
    """

    def __init__(self, A, b, eps: float):
        self.A = nx.as_matrix(A)
        self.b = nx.as_vector(b)
        self.eps = float(eps)
        U, sig, _ = np.linalg.svd(self.A, full_matrices=False)
        if sig.min() <= nx.RANK_RTOL * sig.max():
            raise RankDeficient("A must have full row rank")
        self.U = U
        self.s2 = sig ** 2
        self._lam = 0.0

    def residual(self, x) -> float:
        return float(np.linalg.norm(self.A @ x - self.b))

    def project(self, v: np.ndarray) -> np.ndarray:
        r = self.U.T @ (self.A @ v - self.b)
        nr = np.linalg.norm(r)
        if nr <= self.eps:
            return v
        if self.eps == 0.0:
            return v - self.A.T @ (self.U @ (r / self.s2))

        def g(lam):
            return np.sqrt(np.sum((r / (1.0 + lam * self.s2)) ** 2))

        lo, hi = 0.0, max(self._lam, 1e-12)
        while g(hi) > self.eps:
            lo, hi = hi, hi * 4.0
        lam = hi
        # Newton on 1/g(lam) - 1/eps, which is concave and increasing in lam
        for _ in range(100):
            d = 1.0 + lam * self.s2
            gl = np.sqrt(np.sum((r / d) ** 2))
            f = 1.0 / gl - 1.0 / self.eps
            if abs(gl - self.eps) <= 1e-13 * self.eps:
                break
            if f < 0:
                lo = lam
            else:
                hi = lam
            dg = -np.sum(r ** 2 * self.s2 / d ** 3) / gl
            step = lam - f / (-dg / gl ** 2)
            lam = step if lo < step < hi else 0.5 * (lo + hi)
        self._lam = lam
        return v - lam * (self.A.T @ (self.U @ (r / (1.0 + lam * self.s2))))


def _admm_ball(ball: ResidualBall, c, xp, beta, rho, box, tol_p, tol_d, max_iter, state):
    n = ball.A.shape[1]
    if state is None:
        state = AdmmState(np.clip(ball.project(xp.copy()), -box, box), np.zeros(n))
    z, u = state.z, state.u
    sqn = np.sqrt(n)
    x = z
    rp = rd = np.inf
    conv = False
    it = 0
    for it in range(1, max_iter + 1):
        x = ball.project((beta * xp + rho * (z - u) - c) / (beta + rho))
        a = x + u
        zn = np.clip(np.sign(a) * np.maximum(np.abs(a) - 1.0 / rho, 0.0), -box, box)
        rd = rho * np.linalg.norm(zn - z)
        z[:] = zn
        u += x - z
        rp = np.linalg.norm(x - z)
        if rp <= tol_p * sqn and rd <= tol_d * sqn:
            conv = True
            break
    if np.isfinite(box):
        for _ in range(200):
            if np.abs(x).max() <= box * (1 + 1e-13):
                break
            x = ball.project(np.clip(x, -box, box))
    return AdmmOutput(x, it, conv, float(rp), float(rd), state)


@_timed
def solve_l1l2_noisy(inst: ProblemInstance, cfg: SolverConfig | None = None, x_init=None,
                     epsilon: float | None = None) -> SolverResult:
    """l1/l2 minimization over ``{||A x - b||_2 <= eps}`` and the box.

    Same outer scheme as :func:`solve_l1l2`; the ADMM x-step projects onto the
    residual ball exactly.  Without ``x_init`` the equality-constrained l1
    minimizer (which lies in the ball) is used.
    """
    cfg = cfg or SolverConfig()
    eps = inst.noise_level if epsilon is None else float(epsilon)
    ball = ResidualBall(inst.A, inst.b, eps)
    if x_init is None:
        x_init = solve_l1_bp(inst, cfg).x
    x_init = nx.as_vector(x_init)
    feas = ball.residual(x_init) <= eps * (1 + 1e-9) + 1e-12 and np.abs(x_init).max() <= cfg.box

    def admm(c, xp, tp, td, state):
        return _admm_ball(ball, c, xp, cfg.beta, cfg.admm_rho, cfg.box, tp, td,
                          cfg.max_inner, state)

    res = _dca_ratio(cfg, x_init, feas, admm)
    res.method = "l1l2-noisy"
    return res


# ---------------------------------------------------------------------------
# IRLS-lq
# ---------------------------------------------------------------------------

@_timed
def solve_irls_lq(inst: ProblemInstance, cfg: SolverConfig | None = None,
                  x_init=None, affine: AffineSet | None = None) -> SolverResult:
    """Iteratively reweighted least squares for the lq quasi-norm.

    ``x_{k+1} = D A^T (A D A^T)^{-1} b`` with
    ``D = diag((x_k^2 + eps_k^2)^{1 - q/2})``, computed as the least-norm
    solution of ``(A D^{1/2}) y = b`` so each iterate is feasible to rounding.
    ``eps_k`` starts at 1 and halves (down to 1e-8) whenever the smoothed
    objective ``sum (x^2 + eps^2)^{q/2}`` decreases by less than 1e-10
    relative.  Without ``x_init`` the least-norm solution of ``A x = b`` starts.
    """
    cfg = cfg or SolverConfig()
    q = cfg.q
    A, b = inst.A, inst.b
    if x_init is None:
        x = (affine or AffineSet(A, b)).least_norm()
    else:
        x = nx.as_vector(x_init).copy()
    eps = 1.0
    floor = 1e-8

    def J(v, e):
        return float(np.sum((v * v + e * e) ** (q / 2)))

    trace = [J(x, eps)]
    term = MAX_ITERS
    k = 0
    for k in range(1, cfg.irls_max_iter + 1):
        dh = (x * x + eps * eps) ** (0.5 - q / 4)
        Qk, Rk = np.linalg.qr((A * dh).T)
        diag = np.abs(np.diag(Rk))
        if diag.min() <= 1e-15 * diag.max():
            raise SingularWeightSystem(f"weighted system singular at iteration {k}")
        xn = dh * (Qk @ sla.solve_triangular(Rk, b, trans="T"))
        j_old, j_new = J(x, eps), J(xn, eps)
        step = np.linalg.norm(xn - x)
        x = xn
        trace.append(j_new)
        if j_old - j_new <= 1e-10 * max(j_old, 1.0):
            if eps <= floor:
                term = CONVERGED
                break
            eps = max(eps / 2.0, floor)
        elif step <= 1e-14 * max(1.0, np.linalg.norm(x)) and eps <= floor:
            term = CONVERGED
            break
    return SolverResult(x, k, 0, trace, term, 0.0, "irls-lq", {"final_epsilon": eps})


# ---------------------------------------------------------------------------
# l1 - l2 (penalized form)
# ---------------------------------------------------------------------------

@_timed
def solve_l1_minus_l2(inst: ProblemInstance, cfg: SolverConfig | None = None,
                      x_l1=None) -> SolverResult:
    """DCA for ``1/2 ||A x - b||^2 + lam (||x||_1 - ||x||_2)`` with the box.

    Each outer step linearizes ``-||x||_2`` and solves the resulting lasso by
    ADMM with penalty ``delta``; the x-step uses the Woodbury identity on a
    Cholesky factor of ``delta I + A A^T``.  Starts from the l1 minimizer.
    Inner stopping uses absolute (``tol_primal``/``tol_dual``) plus relative
    (1e-6) residual tolerances with at most 5n steps; the outer loop stops on
    a relative change below 1e-6 or after ``l1_minus_l2_max_outer`` steps.
    ``objective_trace`` records the penalized objective, which the scheme
    keeps non-increasing; an outer step that would raise it is rejected.
    """
    cfg = cfg or SolverConfig()
    A, b = inst.A, inst.b
    lam, delta, box = cfg.lasso_lambda, cfg.l1l2_admm_rho, cfg.box
    n = inst.n
    L = nx.cholesky_factor(A, delta).factors[0]
    Atb = A.T @ b

    def solve_shifted(r):
        # (A^T A + delta I)^{-1} r
        t = sla.cho_solve((L, True), A @ r)
        return (r - A.T @ t) / delta

    def F(v):
        return 0.5 * float(np.sum((A @ v - b) ** 2)) + lam * (np.abs(v).sum() - np.linalg.norm(v))

    x = np.clip(_l1_start(inst, cfg, x_l1), -box, box)
    trace = [F(x)]
    z, u = x.copy(), np.zeros(n)
    sqn = np.sqrt(n)
    inner_total = 0
    term = MAX_ITERS
    k = 0
    for k in range(1, cfg.l1_minus_l2_max_outer + 1):
        nrm = np.linalg.norm(x)
        v = x / nrm if nrm > ZERO_NORM else np.zeros(n)
        xk = x
        for it in range(1, 5 * n + 1):
            xk = solve_shifted(Atb + lam * v + delta * (z - u))
            a = xk + u
            zn = np.clip(np.sign(a) * np.maximum(np.abs(a) - lam / delta, 0.0), -box, box)
            rd = delta * np.linalg.norm(zn - z)
            z = zn
            u = u + xk - z
            eps_p = sqn * cfg.tol_primal + L12_RELTOL * max(np.linalg.norm(xk), np.linalg.norm(z))
            eps_d = sqn * cfg.tol_dual + L12_RELTOL * delta * np.linalg.norm(u)
            if np.linalg.norm(xk - z) <= eps_p and rd <= eps_d:
                break
        inner_total += it
        xn = z.copy()
        f_new = F(xn)
        if f_new > trace[-1] + 1e-8 * max(1.0, abs(trace[-1])):
            term = CONVERGED
            break
        change = np.linalg.norm(xn - x) / max(np.linalg.norm(x), 1.0)
        x = xn
        trace.append(f_new)
        if change < L12_RELTOL:
            term = CONVERGED
            break
    return SolverResult(x, k, inner_total, trace, term, 0.0, "l1-l2")


# ---------------------------------------------------------------------------
# greedy methods
# ---------------------------------------------------------------------------

def _lstsq_on(A, b, S):
    coef, *_ = np.linalg.lstsq(A[:, S], b, rcond=None)
    return coef


@_timed
def solve_omp(inst: ProblemInstance, cfg: SolverConfig | None = None) -> SolverResult:
    """Orthogonal matching pursuit with normalized column correlations."""
    cfg = cfg or SolverConfig()
    A, b = inst.A, inst.b
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = np.inf
    S: list[int] = []
    x = np.zeros(inst.n)
    r = b.copy()
    trace = [float(np.linalg.norm(r))]
    while np.linalg.norm(r) > cfg.residual_stop and len(S) < inst.m:
        corr = np.abs(A.T @ r) / norms
        corr[S] = -1.0
        S.append(int(np.argmax(corr)))
        x = np.zeros(inst.n)
        x[S] = _lstsq_on(A, b, S)
        r = b - A @ x
        trace.append(float(np.linalg.norm(r)))
    return SolverResult(x, len(S), 0, trace, CONVERGED, 0.0, "omp", {"support": sorted(S)})


@_timed
def solve_cosamp(inst: ProblemInstance, cfg: SolverConfig | None = None,
                 s: int | None = None) -> SolverResult:
    """CoSaMP: merge the 2s largest proxy entries with the current support,
    refit, prune to s."""
    cfg = cfg or SolverConfig()
    s = s if s is not None else cfg.cosamp_sparsity
    if s is None or s < 1:
        raise ValueError("CoSaMP needs a sparsity level (cosamp_sparsity)")
    A, b = inst.A, inst.b
    x = np.zeros(inst.n)
    r = b.copy()
    trace = [float(np.linalg.norm(r))]
    term = MAX_ITERS
    k = 0
    for k in range(1, cfg.cosamp_max_iter + 1):
        omega = top_k_indices(A.T @ r, min(2 * s, inst.n))
        T = np.union1d(omega, np.flatnonzero(x))
        bT = np.zeros(inst.n)
        bT[T] = _lstsq_on(A, b, T)
        xn = np.zeros(inst.n)
        keep = top_k_indices(bT, s)
        xn[keep] = bT[keep]
        r = b - A @ xn
        trace.append(float(np.linalg.norm(r)))
        same = np.array_equal(xn, x)
        x = xn
        if trace[-1] <= cfg.residual_stop or same:
            term = CONVERGED
            break
    return SolverResult(x, k, 0, trace, term, 0.0, "cosamp")


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

METHODS = ("l1", "l1l2", "l1l2+ss", "rwl1", "irls-lq", "l1-l2", "omp", "cosamp")
ALIASES = {"l1l2+l1": "l1l2", "bp": "l1"}
L1_INITIALIZED = ("l1l2", "l1l2+ss", "rwl1", "l1-l2")


def canonical_method(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in METHODS:
        raise KeyError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    return key


def run_method(name: str, inst: ProblemInstance, cfg: SolverConfig | None = None,
               s: int | None = None, x_l1=None) -> SolverResult:
    """Dispatch by method name.

    ``s`` is needed by ``l1l2+ss`` and ``cosamp``.  ``x_l1`` lets callers share
    one l1 solve between the l1-initialized methods; in that case the
    reported wall time excludes the l1 solve.
    """
    cfg = cfg or SolverConfig()
    key = canonical_method(name)
    if key == "l1":
        res = solve_l1_bp(inst, cfg)
    elif key == "l1l2":
        res = solve_l1l2(inst, cfg, x_l1=x_l1)
    elif key == "l1l2+ss":
        if s is None:
            raise ValueError("l1l2+ss needs s")
        res = solve_l1l2_ss(inst, cfg, s, x_l1=x_l1)
    elif key == "rwl1":
        res = solve_reweighted_l1(inst, cfg, x_l1=x_l1)
    elif key == "irls-lq":
        res = solve_irls_lq(inst, cfg)
    elif key == "l1-l2":
        res = solve_l1_minus_l2(inst, cfg, x_l1=x_l1)
    elif key == "omp":
        res = solve_omp(inst, cfg)
    else:
        res = solve_cosamp(inst, cfg, s)
    res.method = key
    return res

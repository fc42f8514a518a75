"""Computable sparsity quantities and the conditions built on them.

Verdicts follow one rule: ``holds``/``fails`` are only issued when the
quantity involved was computed exactly (kernel dimension at most 2, where the
unit circle of the kernel can be searched exhaustively); sampling-based checks
return ``falsified`` with an explicit witness or ``inconclusive``.

Exactness on 2-dimensional kernels
----------------------------------
For ``h = N theta`` with ``N`` an orthonormal kernel basis, the sign pattern
of ``h`` and the ordering of ``|h_i|`` are constant on the cones between the
rays where some ``h_i = 0`` or ``|h_i| = |h_j|``.  On each cone the NSP
margin ``c ||h_{T^c}||_q^q - ||h_T||_q^q`` (worst T) is a fixed combination of
``|n_i . theta|^q`` terms, and ``||h||_q / ||h||_2`` is quasiconcave along the
chord between the bounding rays, so extrema over the circle are attained on
these breakpoint rays.  The dense angular grid is evaluated as well and its
resolution reported.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats
from scipy.optimize import linprog

from . import _kernels
from . import numerics as nx
from .errors import (BetaOutOfRange, EmptyKernel, InvalidSparsity, KernelTooLarge,
                     TrivialSignal, ZeroVector)

HOLDS = "holds"
FAILS = "fails"
FALSIFIED = "falsified"
INCONCLUSIVE = "inconclusive"

GRID_POINTS = 100_000
NSP_TOL = 1e-12


@dataclass
class CertificateReport:
    condition: str
    verdict: str
    quantities: dict = field(default_factory=dict)
    witness: dict | None = None
    grid_resolution: int | None = None
    seed: int | None = None
    notes: str = ""
    inputs_digest: str = ""

    def to_dict(self) -> dict:
        d = {"condition": self.condition, "verdict": self.verdict,
             "quantities": {k: _jsonable(v) for k, v in self.quantities.items()}}
        if self.witness is not None:
            d["witness"] = {k: _jsonable(v) for k, v in self.witness.items()}
        if self.grid_resolution is not None:
            d["grid_resolution"] = int(self.grid_resolution)
        d["seed"] = self.seed
        if self.notes:
            d["notes"] = self.notes
        if self.inputs_digest:
            d["inputs_digest"] = self.inputs_digest
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(t) for t in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(t) for t in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
        h.update(np.asarray(a.shape, dtype=np.int64).tobytes())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# scalar quantities
# ---------------------------------------------------------------------------

def _nonzero(x) -> np.ndarray:
    x = nx.as_vector(x)
    if not np.any(x):
        raise ZeroVector("quantity undefined for the zero vector")
    return x


def l1_l2_ratio(x) -> float:
    """||x||_1 / ||x||_2."""
    x = _nonzero(x)
    return float(np.abs(x).sum() / np.linalg.norm(x))


def dynamic_range(x) -> float:
    """Smallest nonzero magnitude over the largest magnitude."""
    a = np.abs(_nonzero(x))
    return float(a[a > 0].min() / a.max())


def kappa(x) -> float:
    """``||x||_1 ||x||_inf / ||x||_2^2``; lies in [1, (sqrt(s)+1)/2] for s-sparse x."""
    x = _nonzero(x)
    a = np.abs(x)
    return float(a.sum() * a.max() / np.dot(x, x))


def kappa_upper(s: int) -> float:
    return (math.sqrt(s) + 1.0) / 2.0


def kappa_maximizer(s: int) -> np.ndarray:
    """Unit s-vector attaining the largest kappa.

    The leading entry satisfies ``x_1^2 = 1/2 + 1/(2 sqrt(s))``; the other
    s - 1 entries are equal.
    """
    if s < 1:
        raise InvalidSparsity("s must be >= 1")
    if s == 1:
        return np.ones(1)
    x1sq = 0.5 + 0.5 / math.sqrt(s)
    rest = math.sqrt((1.0 - x1sq) / (s - 1))
    return np.concatenate([[math.sqrt(x1sq)], np.full(s - 1, rest)])


@dataclass
class RatioQuantities:
    l1_l2_ratio: float
    rho: float
    kappa: float
    s: int


def ratio_quantities(x) -> RatioQuantities:
    x = _nonzero(x)
    return RatioQuantities(l1_l2_ratio(x), dynamic_range(x), kappa(x), int(np.count_nonzero(x)))


def maximize_kappa(s: int, samples: int, rng: np.random.Generator,
                   batch: int = 20_000) -> tuple[float, float, np.ndarray]:
    """Largest kappa over random unit s-vectors, then refined by local ascent.

    Returns
    -------
    sampled_max : float
        Best value among the random draws.
    ascended_max : float
        Value after bounded quasi-Newton ascent from the best draw.
    x : ndarray
        The ascended maximizer (nonnegative, unit norm).
    """
    best, best_x = -np.inf, None
    left = samples
    while left > 0:
        k = min(batch, left)
        X = rng.standard_normal((k, s))
        a = np.abs(X)
        vals = a.sum(1) * a.max(1) / (X * X).sum(1)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_x = float(vals[i]), a[i].copy()
        left -= k
    sampled = best

    def neg(v):
        v = np.maximum(v, 0.0)
        s1, nn = v.sum(), v @ v
        j = int(np.argmax(v))
        m = v[j]
        val = s1 * m / nn
        g = (m / nn) * np.ones_like(v) - 2.0 * val * v / nn
        g[j] += s1 / nn
        return -val, -g

    x0 = best_x / np.linalg.norm(best_x)
    res = optimize.minimize(neg, x0, jac=True, method="L-BFGS-B",
                            bounds=[(0.0, None)] * s,
                            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 5000})
    x = np.maximum(res.x, 0.0)
    x /= np.linalg.norm(x)
    return sampled, max(sampled, kappa(x)), x


# ---------------------------------------------------------------------------
# kernel ratio
# ---------------------------------------------------------------------------

@dataclass
class KernelRatioEstimate:
    """Best value of ||h||_q/||h||_2 found on ker(A).

    ``exact`` is True when the value is the true infimum (kernel dim <= 2);
    otherwise it is only an upper bound.
    """

    min_ratio_upper_bound: float
    q: float
    argmin_h: np.ndarray
    restarts: int
    exact: bool = False

    @property
    def c_of_A_lower_bound(self) -> float:
        """``1 / ratio^2``: for q = 1 a lower bound on sup ||h||_2^2 / ||h||_1^2."""
        return 1.0 / self.min_ratio_upper_bound ** 2


def _q_ratio(H: np.ndarray, q: float) -> np.ndarray:
    """Row-wise ||h||_q / ||h||_2."""
    a = np.abs(np.atleast_2d(H))
    l2 = np.sqrt((a * a).sum(1))
    lq = a.sum(1) if q == 1 else (a ** q).sum(1) ** (1.0 / q)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(l2 > 0, lq / l2, np.inf)


def _breakpoint_rays(N: np.ndarray, pairs: bool) -> np.ndarray:
    """Unit directions theta (rows) with (N theta)_i = 0, and optionally
    |(N theta)_i| = |(N theta)_j|, for a 2-column N.

    Only one of theta, -theta is listed; all functions searched are even.
    """
    rows = [N]
    if pairs:
        iu, ju = np.triu_indices(N.shape[0], 1)
        rows += [N[iu] - N[ju], N[iu] + N[ju]]
    V = np.vstack(rows)
    nrm = np.linalg.norm(V, axis=1)
    V = V[nrm > 1e-14 * max(1.0, nrm.max(initial=0.0))]
    T = np.column_stack([-V[:, 1], V[:, 0]])
    T /= np.linalg.norm(T, axis=1)[:, None]
    # all breakpoints on one line leaves half-plane cells: add the normal
    return np.vstack([T, np.eye(2), T[:1, ::-1] * np.array([-1.0, 1.0])])


def _chunked_min(rays: np.ndarray, N: np.ndarray, fn, chunk: int = 20_000):
    """min over rows of fn(rays @ N.T), evaluated in chunks; returns (value, h)."""
    best, best_h = np.inf, None
    for i in range(0, rays.shape[0], chunk):
        H = np.ascontiguousarray(rays[i:i + chunk] @ N.T)
        v = fn(H)
        j = int(np.argmin(v))
        if v[j] < best:
            best, best_h = float(v[j]), H[j].copy()
    return best, best_h


def _circle_grid(points: int) -> np.ndarray:
    t = np.pi * np.arange(points) / points
    return np.column_stack([np.cos(t), np.sin(t)])


def _kernel_or_raise(A) -> np.ndarray:
    N = nx.kernel_basis(A)
    if N.shape[1] == 0:
        raise EmptyKernel("ker(A) = {0}")
    return N


def _exact_kernel_ratio(N: np.ndarray, q: float, grid: int) -> tuple[float, np.ndarray]:
    if N.shape[1] == 1:
        h = N[:, 0]
        return float(_q_ratio(h, q)[0]), h
    cand = np.vstack([_breakpoint_rays(N, pairs=False), _circle_grid(grid)])
    return _chunked_min(cand, N, lambda H: _q_ratio(H, q))


def _lp_descent(N: np.ndarray, c0: np.ndarray, max_steps: int = 100) -> tuple[float, np.ndarray]:
    """Monotone descent of ||N c||_1 / ||N c||_2 by repeated LPs
    ``min ||N c||_1  s.t.  <N c, h_k> = ||h_k||_2``."""
    n, k = N.shape
    h = N @ c0
    r = float(_q_ratio(h, 1.0)[0])
    # variables (c, t); minimize sum t with -t <= N c <= t
    cost = np.concatenate([np.zeros(k), np.ones(n)])
    A_ub = np.block([[N, -np.eye(n)], [-N, -np.eye(n)]])
    b_ub = np.zeros(2 * n)
    bounds = [(None, None)] * k + [(0, None)] * n
    for _ in range(max_steps):
        g = h / np.linalg.norm(h)
        A_eq = np.concatenate([N.T @ g, np.zeros(n)])[None, :]
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                      bounds=bounds, method="highs")
        if res.x is None:
            break
        hn = N @ res.x[:k]
        rn = float(_q_ratio(hn, 1.0)[0])
        if not rn < r * (1 - 1e-12):
            break
        h, r = hn, rn
    return r, h


def _smooth_descent(N: np.ndarray, c0: np.ndarray, q: float) -> tuple[float, np.ndarray]:
    """Local minimization of a smoothed ||N c||_q / ||c||_2 with shrinking smoothing."""
    c = c0 / np.linalg.norm(c0)
    scale = np.abs(N @ c).max()
    for mu in scale * np.array([1e-1, 1e-2, 1e-3, 1e-4, 1e-6]):
        def f(v, mu=mu):
            h = N @ v
            p = (h * h + mu * mu) ** (q / 2)
            S = p.sum()
            nv = v @ v
            val = S ** (1 / q) / math.sqrt(nv)
            dS = N.T @ (q * h * (h * h + mu * mu) ** (q / 2 - 1))
            g = (S ** (1 / q - 1) / q) * dS / math.sqrt(nv) - val * v / nv
            return val, g

        res = optimize.minimize(f, c, jac=True, method="L-BFGS-B", options={"maxiter": 500})
        c = res.x / np.linalg.norm(res.x)
    h = N @ c
    return float(_q_ratio(h, q)[0]), h


def kernel_ratio_minimize(A, q: float = 1.0, restarts: int = 10,
                          rng: np.random.Generator | None = None,
                          grid: int = GRID_POINTS) -> KernelRatioEstimate:
    """Smallest ``||h||_q / ||h||_2`` found over nonzero h in ker(A).

    Kernels of dimension 1 or 2 are handled exactly.  Otherwise each restart
    draws a Gaussian coefficient vector and runs a local descent (sequential
    linear programs for q = 1, smoothed quasi-Newton for q < 1); the best value
    over restarts is returned, so the result never increases with more
    restarts.  Restart j always consumes the same random numbers, making a run
    with r restarts a prefix of a run with r + 1.
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    N = _kernel_or_raise(A)
    n, k = N.shape
    if k <= 2:
        val, h = _exact_kernel_ratio(N, q, grid)
        return KernelRatioEstimate(max(val, 1.0), q, h, restarts, exact=True)
    rng = rng if rng is not None else np.random.default_rng(0)
    best, best_h = np.inf, None
    for _ in range(max(restarts, 1)):
        c0 = rng.standard_normal(k)
        r, h = _lp_descent(N, c0) if q == 1 else _smooth_descent(N, c0, q)
        if r < best:
            best, best_h = r, h
    hi = n ** (1 / q - 0.5)
    return KernelRatioEstimate(float(min(max(best, 1.0), hi)), q, best_h, restarts)


def check_uniform_recovery_condition(A, s: int, q: float,
                                     est: KernelRatioEstimate) -> CertificateReport:
    """Compare the kernel ratio with ``3^{1/q} s^{1/q - 1/2}``.

    Strict inequality is required for uniform recovery.  An estimate at or
    below the threshold falsifies it (the estimate's argmin is the witness).
    Above the threshold a sampled estimate cannot decide; an exact one
    (kernel dim <= 2) gives holds.
    """
    thr = 3.0 ** (1 / q) * s ** (1 / q - 0.5)
    val = est.min_ratio_upper_bound
    qty = {"threshold": thr, "estimate": val, "q": q, "s": s, "exact": est.exact}
    if val <= thr:
        verdict = FALSIFIED
        wit = {"h": est.argmin_h, "ratio": val}
    else:
        verdict = HOLDS if est.exact else INCONCLUSIVE
        wit = None
    return CertificateReport("uniform-recovery", verdict, qty, wit,
                             inputs_digest=_digest(A))


# ---------------------------------------------------------------------------
# null space property
# ---------------------------------------------------------------------------

def nsp_margin(h, s: int, c: float, q: float = 1.0) -> float:
    """Normalized margin ``(c ||h_{T^c}||_q^q - ||h_T||_q^q) / ||h||_q^q`` at the worst T."""
    return float(_kernels.nsp_margins_numpy(np.atleast_2d(nx.as_vector(h)), int(s),
                                            float(c), float(q))[0])


def _worst_T(h, s):
    return sorted(int(i) for i in np.argsort(-np.abs(h), kind="stable")[:s])


def check_nsp_exact(A, s: int, c: float, q: float = 1.0,
                    grid: int = GRID_POINTS) -> CertificateReport:
    """Decide the (s, c)-NSP in the q-quasinorm for kernels of dimension <= 2.

    The NSP requires ``||h_T||_q^q < c ||h_{T^c}||_q^q`` for all nonzero h in
    the kernel and all |T| <= s; a margin within 1e-12 of zero counts as a
    failure.
    """
    N = nx.kernel_basis(A)
    n, k = N.shape
    qty = {"s": s, "c": c, "q": q, "kernel_dim": k}
    if k > 2:
        raise KernelTooLarge(f"kernel dimension {k} > 2; use check_nsp_falsify")
    if s <= 0 or k == 0:
        return CertificateReport("nsp", HOLDS, qty, notes="vacuous",
                                 inputs_digest=_digest(A))
    if k == 1:
        rays, res = np.ones((1, 1)), None
    else:
        rays, res = np.vstack([_breakpoint_rays(N, pairs=True), _circle_grid(grid)]), grid
    worst, h = _chunked_min(rays, N, lambda H: _kernels.nsp_margins(H, int(s), float(c),
                                                                     float(q)))
    qty["worst_margin"] = worst
    if worst <= NSP_TOL:
        return CertificateReport("nsp", FAILS, qty,
                                 {"h": h, "T": _worst_T(h, s), "margin": worst},
                                 grid_resolution=res, inputs_digest=_digest(A))
    return CertificateReport("nsp", HOLDS, qty, grid_resolution=res,
                             inputs_digest=_digest(A))


def check_nsp_falsify(A, s: int, c: float, q: float, rng: np.random.Generator,
                      samples: int) -> CertificateReport:
    """Search ker(A) for a vector violating the (s, c)-NSP.

    The first ``min(samples, n)`` candidates are the kernel projections of the
    coordinate vectors, the rest are Gaussian kernel vectors.
    """
    N = nx.kernel_basis(A)
    n, k = N.shape
    qty = {"s": s, "c": c, "q": q, "samples": samples, "kernel_dim": k}
    if samples <= 0 or k == 0 or s <= 0:
        return CertificateReport("nsp", INCONCLUSIVE, qty, inputs_digest=_digest(A))
    n_coord = min(samples, n)
    H = (N @ N.T[:, :n_coord]).T
    if samples > n_coord:
        H = np.vstack([H, rng.standard_normal((samples - n_coord, k)) @ N.T])
    keep = np.linalg.norm(H, axis=1) > 1e-12
    H = np.ascontiguousarray(H[keep])
    if H.shape[0] == 0:
        return CertificateReport("nsp", INCONCLUSIVE, qty, inputs_digest=_digest(A))
    margins = _kernels.nsp_margins(H, int(s), float(c), float(q))
    i = int(np.argmin(margins))
    qty["min_margin"] = float(margins[i])
    if margins[i] <= 0.0:
        h = H[i]
        return CertificateReport("nsp", FALSIFIED, qty,
                                 {"h": h, "T": _worst_T(h, s), "margin": float(margins[i])},
                                 inputs_digest=_digest(A))
    return CertificateReport("nsp", INCONCLUSIVE, qty, inputs_digest=_digest(A))


# ---------------------------------------------------------------------------
# local optimality
# ---------------------------------------------------------------------------

def check_local_optimality(x0, A, est: KernelRatioEstimate | None = None,
                           nsp: CertificateReport | None = None,
                           rng: np.random.Generator | None = None,
                           samples: int = 2000) -> CertificateReport:
    """Sufficient condition for x0 to be a strict local minimizer of l1/l2 on
    ``{A x = A x0}``.

    Conditions: ``rho (kappa + 1) <= 1 / (2 c(A))`` (non-strict, 1e-12 relative
    slack) and the (s, 1/(2 kappa + 1))-NSP with q = 1 (strict).  The local
    radius in l1 is ``delta = rho ||x0||_inf``.  With kernel dimension <= 2
    both are decided exactly; otherwise they can only be falsified, using
    ``est`` (an upper bound on the kernel ratio, i.e. a lower bound on c) and
    ``nsp`` (a falsification report), computed from ``rng`` when omitted.
    When s > 6 the uniform (s, 1/(sqrt(s)+2))-NSP is also tried.
    """
    x0 = _nonzero(x0)
    A = nx.as_matrix(A)
    s = int(np.count_nonzero(x0))
    if s <= 1:
        raise TrivialSignal("needs at least two nonzero entries")
    rho_, kap = dynamic_range(x0), kappa(x0)
    c_nsp = 1.0 / (2 * kap + 1)
    qty = {"s": s, "rho": rho_, "kappa": kap, "radius": rho_ * np.abs(x0).max(),
           "nsp_c": c_nsp, "lhs_ratio_condition": rho_ * (kap + 1)}
    digest = _digest(x0, A)
    k = A.shape[1] - A.shape[0]
    if k <= 2:
        if k == 0:
            qty["c_of_A"] = 0.0
            return CertificateReport("local-opt", HOLDS, qty, notes="trivial kernel",
                                     inputs_digest=digest)
        kr = kernel_ratio_minimize(A, 1.0)
        cA = 1.0 / kr.min_ratio_upper_bound ** 2
        rhs = 1.0 / (2 * cA)
        cond11 = qty["lhs_ratio_condition"] <= rhs * (1 + 1e-12)
        rep12 = check_nsp_exact(A, s, c_nsp, 1.0)
        cond12 = rep12.verdict == HOLDS
        qty.update(c_of_A=cA, rhs_ratio_condition=rhs, ratio_condition=cond11,
                   nsp_condition=cond12)
        ok = cond11 and cond12
        if not ok and s > 6:
            uni = check_uniform_local_optimality(A, s)
            qty["uniform_condition"] = uni.verdict == HOLDS
            ok = uni.verdict == HOLDS
        witness = None if ok or cond12 else rep12.witness
        return CertificateReport("local-opt", HOLDS if ok else FAILS, qty, witness,
                                 grid_resolution=rep12.grid_resolution, inputs_digest=digest)
    rng = rng if rng is not None else np.random.default_rng(0)
    if est is None:
        est = kernel_ratio_minimize(A, 1.0, restarts=5, rng=rng)
    if nsp is None:
        nsp = check_nsp_falsify(A, s, c_nsp, 1.0, rng, samples)
    c_low = est.c_of_A_lower_bound
    rhs_upper = 1.0 / (2 * c_low)
    qty.update(c_of_A_lower_bound=c_low, rhs_ratio_condition_upper=rhs_upper)
    if qty["lhs_ratio_condition"] > rhs_upper * (1 + 1e-12):
        return CertificateReport("local-opt", FALSIFIED, qty,
                                 {"h": est.argmin_h, "condition": "ratio"},
                                 inputs_digest=digest)
    if nsp.verdict in (FALSIFIED, FAILS):
        return CertificateReport("local-opt", FALSIFIED, qty, nsp.witness,
                                 inputs_digest=digest)
    return CertificateReport("local-opt", INCONCLUSIVE, qty, inputs_digest=digest)


def check_uniform_local_optimality(A, s: int, rng: np.random.Generator | None = None,
                                   samples: int = 2000) -> CertificateReport:
    """(s, 1/(sqrt(s)+2))-NSP with s > 6, which makes every s-sparse vector a
    local minimizer of l1/l2."""
    if s <= 6:
        raise InvalidSparsity("the uniform condition needs s > 6")
    c = 1.0 / (math.sqrt(s) + 2)
    A = nx.as_matrix(A)
    if A.shape[1] - A.shape[0] <= 2:
        rep = check_nsp_exact(A, s, c, 1.0)
    else:
        rep = check_nsp_falsify(A, s, c, 1.0, rng or np.random.default_rng(0), samples)
    rep.condition = "uniform-local-opt"
    return rep


# ---------------------------------------------------------------------------
# robustness
# ---------------------------------------------------------------------------

def check_robustness_dichotomy(x0, x_star, A, alpha: float | None = None,
                               slack: float = 1e-9) -> CertificateReport:
    """Check the robustness dichotomy for a noisy l1/l2 solution ``x_star``.

    Split ``x_star - x0 = u + w`` with u the projection onto ker(A) and
    ``beta = 4 sqrt(2 s) ||u||_2 / ||u||_1``.  For ``alpha in (beta, 1)``
    (default ``(1 + beta)/2``):

    * if ``<x0, x*> >= (1 - alpha^2/2)||x0|| ||x*||`` and
      ``||x0|| <= ||x*|| <= (1 + alpha)||x0||``, require
      ``||x* - x0||_2 <= 2 sqrt(alpha) ||x0||_2``;
    * otherwise require ``||x* - x0||_p <= (2 alpha - beta)/(alpha - beta) ||w||_p``
      for p = 1 or p = 2.

    ``x_star == x0`` holds trivially (reported with a note).  The premise
    ``ratio(x*) <= ratio(x0)`` of the argument is reported as a quantity.

    Raises
    ------
    BetaOutOfRange
        If ``beta >= 1`` or alpha is outside ``(beta, 1)``.
    """
    x0 = _nonzero(x0)
    xs = _nonzero(x_star)
    A = nx.as_matrix(A)
    s = int(np.count_nonzero(x0))
    d = xs - x0
    digest = _digest(x0, xs, A)
    if not np.any(d):
        return CertificateReport("robustness", HOLDS, {"s": s, "diff_l2": 0.0},
                                 notes="zero difference", inputs_digest=digest)
    N = nx.kernel_basis(A)
    u = N @ (N.T @ d)
    w = d - u
    nu1, nu2 = np.abs(u).sum(), np.linalg.norm(u)
    beta = 0.0 if nu2 <= 1e-15 * np.linalg.norm(d) else 4 * math.sqrt(2 * s) * nu2 / nu1
    if not beta < 1:
        raise BetaOutOfRange(f"beta = {beta:.4g} >= 1")
    if alpha is None:
        alpha = (1 + beta) / 2
    if not beta < alpha < 1:
        raise BetaOutOfRange(f"alpha = {alpha} not in ({beta:.4g}, 1)")
    n0, ns = np.linalg.norm(x0), np.linalg.norm(xs)
    c16a = float(x0 @ xs) >= (1 - alpha ** 2 / 2) * n0 * ns
    c16b = n0 <= ns <= (1 + alpha) * n0
    qty = {"s": s, "beta": beta, "alpha": alpha, "cond_16a": c16a, "cond_16b": c16b,
           "ratio_x0": l1_l2_ratio(x0), "ratio_xstar": l1_l2_ratio(xs),
           "premise_ratio": l1_l2_ratio(xs) <= l1_l2_ratio(x0) * (1 + slack),
           "diff_l1": float(np.abs(d).sum()), "diff_l2": float(np.linalg.norm(d)),
           "w_l1": float(np.abs(w).sum()), "w_l2": float(np.linalg.norm(w))}
    if c16a and c16b:
        bound = 2 * math.sqrt(alpha) * n0
        ok = qty["diff_l2"] <= bound * (1 + slack)
        qty.update(branch="relative", bound_l2=bound)
    else:
        K = (2 * alpha - beta) / (alpha - beta)
        b1, b2 = K * qty["w_l1"], K * qty["w_l2"]
        ok1 = qty["diff_l1"] <= b1 * (1 + slack)
        ok2 = qty["diff_l2"] <= b2 * (1 + slack)
        ok = ok1 or ok2
        qty.update(branch="kernel", factor=K, bound_l1=b1, bound_l2=b2,
                   holds_p1=ok1, holds_p2=ok2)
    return CertificateReport("robustness", HOLDS if ok else FAILS, qty, inputs_digest=digest)


# ---------------------------------------------------------------------------
# Gaussian width and Monte-Carlo checks
# ---------------------------------------------------------------------------

@dataclass
class WidthEstimate:
    mean: float
    stderr: float
    bound: float
    n: int
    samples: int


def gaussian_width_l1ball(n: int, samples: int, rng: np.random.Generator,
                          batch: int = 1_000_000) -> WidthEstimate:
    """Monte-Carlo estimate of ``E max_i |g_i|`` (the width of the l1 ball),
    with its standard error and the bound ``sqrt(8 log n)``."""
    if n < 2 or samples < 1:
        raise ValueError("need n >= 2 and samples >= 1")
    per = max(1, batch // n)
    vals = np.empty(samples)
    done = 0
    while done < samples:
        k = min(per, samples - done)
        vals[done:done + k] = np.abs(rng.standard_normal((k, n))).max(axis=1)
        done += k
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return WidthEstimate(float(vals.mean()), se, math.sqrt(8 * math.log(n)), n, samples)


def expected_max_abs_gaussian(n: int) -> float:
    """``E max_{i<=n} |g_i|`` by quadrature of the tail ``1 - (2 Phi(t) - 1)^n``."""
    val, _ = integrate.quad(lambda t: 1.0 - (2 * stats.norm.cdf(t) - 1) ** n, 0, np.inf,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def l1_error_bound_experiment(rng: np.random.Generator, m: int, n: int, s: int,
                              trials: int, constant: float = 8.0) -> CertificateReport:
    """Mean relative l1-recovery error against ``sqrt(s log n / m)``.

    Gaussian A and standard-normal nonzeros; basis pursuit without a box.
    The verdict checks ``mean / sqrt(s log n / m) <= constant``; for s = m the
    ratio is reported without a verdict.
    """
    from .model import ProblemInstance, SparseSignal
    from .solvers import SolverConfig, solve_l1_bp

    if not 1 <= s <= m <= n:
        raise InvalidSparsity("need 1 <= s <= m <= n")
    cfg = SolverConfig(box_bound=None)
    errs = []
    for _ in range(trials):
        A = nx.gaussian_matrix(rng, m, n)
        x = np.zeros(n)
        S = rng.choice(n, s, replace=False)
        x[S] = rng.standard_normal(s)
        inst = ProblemInstance(A, A @ x, SparseSignal(x))
        xs = solve_l1_bp(inst, cfg).x
        errs.append(np.linalg.norm(xs - x) / np.linalg.norm(x))
    mean = float(np.mean(errs))
    scale = math.sqrt(s * math.log(n) / m)
    ratio = mean / scale
    qty = {"m": m, "n": n, "s": s, "trials": trials, "mean_rel_error": mean,
           "scale": scale, "ratio": ratio, "constant": constant}
    if s >= m:
        return CertificateReport("l1-error-bound", INCONCLUSIVE, qty,
                                 notes="outside the guarantee range")
    return CertificateReport("l1-error-bound", HOLDS if ratio <= constant else FAILS, qty)


def kappa_concentration_experiment(rng: np.random.Generator, s_list, trials: int,
                                   growth: float = 2.0, level: float = 0.99) -> CertificateReport:
    """Empirical ``level``-quantile of ``kappa / sqrt(log s)`` for Gaussian s-sparse
    vectors; holds when the largest quantile is at most ``growth`` times the one
    at the smallest s."""
    s_list = sorted(int(s) for s in s_list)
    if not s_list or s_list[0] < 2:
        raise InvalidSparsity("every s must be >= 2")
    quant, kmin, kmax = {}, {}, {}
    for s in s_list:
        X = rng.standard_normal((trials, s))
        a = np.abs(X)
        k = a.sum(1) * a.max(1) / (X * X).sum(1)
        quant[s] = float(np.quantile(k / math.sqrt(math.log(s)), level))
        kmin[s], kmax[s] = float(k.min()), float(k.max())
    q0 = quant[s_list[0]]
    ok = max(quant.values()) <= growth * q0
    qty = {"quantiles": {str(s): quant[s] for s in s_list},
           "kappa_min": {str(s): kmin[s] for s in s_list},
           "kappa_max": {str(s): kmax[s] for s in s_list},
           "growth": growth, "level": level, "trials": trials}
    return CertificateReport("kappa-concentration", HOLDS if ok else FAILS, qty)


def subgaussian_sample_bound(m: float, s: float, n: float, F: float, u: float,
                             D: float) -> tuple[bool, float]:
    """Whether ``m / s > D F^4 u log n`` (strict), and the slack ``m/s - D F^4 u log n``."""
    if min(m, s, n, F, u, D) <= 0:
        raise ValueError("all arguments must be positive")
    slack = m / s - D * F ** 4 * u * math.log(n)
    return slack > 0, slack


def kgg_lower_bound(m: int, n: int, s: int, c: float) -> float:
    """``c sqrt(m) / sqrt(1 + log(n/s))`` with a caller-supplied constant c."""
    return c * math.sqrt(m) / math.sqrt(1 + math.log(n / s))

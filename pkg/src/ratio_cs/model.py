"""Problem instances, sparse-signal generators and the recovery criterion."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import numerics as nx
from .errors import InvalidSparsity


@dataclass(frozen=True)
class SparseSignal:
    """Dense vector together with its (sorted) support."""

    values: np.ndarray
    support: tuple = field(default=())

    def __post_init__(self):
        v = nx.as_vector(self.values)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "support", tuple(int(i) for i in np.flatnonzero(v)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def s(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class CoefficientDistribution:
    """Law of the nonzero coefficients.

    ``uniform_sym`` draws from [-L, L]; ``uniform_annulus`` draws a magnitude
    from [a, b] and an independent random sign.
    """

    kind: str
    params: tuple

    @classmethod
    def uniform_sym(cls, L: float = 10.0) -> "CoefficientDistribution":
        if L <= 0:
            raise ValueError("L must be positive")
        return cls("uniform_sym", (float(L),))

    @classmethod
    def uniform_annulus(cls, a: float = 5.0, b: float = 10.0) -> "CoefficientDistribution":
        if not 0 < a < b:
            raise ValueError("need 0 < a < b")
        return cls("uniform_annulus", (float(a), float(b)))

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        if self.kind == "uniform_sym":
            (L,) = self.params
            out = rng.uniform(-L, L, k)
            while np.any(out == 0.0):
                bad = out == 0.0
                out[bad] = rng.uniform(-L, L, int(bad.sum()))
            return out
        if self.kind == "uniform_annulus":
            a, b = self.params
            mag = rng.uniform(a, b, k)
            sign = rng.choice(np.array([-1.0, 1.0]), k)
            return mag * sign
        raise ValueError(f"unknown distribution {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientDistribution":
        return getattr(cls, d["kind"])(*d.get("params", ()))


@dataclass(frozen=True)
class ProblemInstance:
    """Measurements ``b = A x0 + e`` with ``||e||_2 <= noise_level``."""

    A: np.ndarray
    b: np.ndarray
    truth: SparseSignal | None = None
    noise_level: float = 0.0

    def __post_init__(self):
        A = nx.as_matrix(self.A)
        b = nx.as_vector(self.b)
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b has length {b.shape[0]}, A has {A.shape[0]} rows")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.truth is not None:
            if self.truth.n != A.shape[1]:
                raise ValueError("truth has the wrong length")
            res = np.linalg.norm(A @ self.truth.values - b)
            bound = self.noise_level if self.noise_level > 0 else 1e-10 * np.linalg.norm(b)
            if res > bound * (1 + 1e-12) + 1e-300:
                raise ValueError(f"truth residual {res:.3e} exceeds {bound:.3e}")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def noiseless(self) -> bool:
        return self.noise_level == 0.0

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.A.shape, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.A).tobytes())
        h.update(self.b.tobytes())
        return h.hexdigest()[:16]


def generate_signal(rng: np.random.Generator, n: int, s: int,
                    dist: CoefficientDistribution) -> SparseSignal:
    """s-sparse vector with a uniformly random support and i.i.d. nonzeros."""
    if s > n or s < 1:
        raise InvalidSparsity(f"need 1 <= s <= n, got s={s}, n={n}")
    support = np.sort(rng.choice(n, s, replace=False))
    x = np.zeros(n)
    x[support] = dist.sample(rng, s)
    return SparseSignal(x)


def random_instance(rng: np.random.Generator, m: int, n: int, s: int,
                    dist: CoefficientDistribution) -> ProblemInstance:
    """Gaussian A, then x0, then noiseless b = A x0 (all from one stream)."""
    A = nx.gaussian_matrix(rng, m, n)
    x0 = generate_signal(rng, n, s, dist)
    return ProblemInstance(A, A @ x0.values, x0)


def top_k_indices(x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest |x_i|, ties resolved towards lower indices."""
    x = np.asarray(x)
    if not 0 <= k <= x.shape[0]:
        raise InvalidSparsity(f"k={k} outside [0, {x.shape[0]}]")
    return np.argsort(-np.abs(x), kind="stable")[:k]


def best_k_term(x, k: int) -> SparseSignal:
    x = nx.as_vector(x)
    out = np.zeros_like(x)
    idx = top_k_indices(x, k)
    out[idx] = x[idx]
    return SparseSignal(out)


def recovery_success(x, truth: SparseSignal, m: int | None = None) -> bool:
    """True iff supp(truth) lies inside the support of the best m-term approximation of x.

    ``m`` defaults to ``truth.n`` only when no row count is known; callers
    holding an instance should pass ``inst.m``.
    """
    x = nx.as_vector(x)
    if x.shape[0] != truth.n:
        raise ValueError("length mismatch")
    k = truth.n if m is None else min(int(m), truth.n)
    return set(truth.support) <= set(best_k_term(x, k).support)


def refit_on_support(inst: ProblemInstance, support) -> np.ndarray:
    """Least-squares fit of b using only the columns in ``support``."""
    idx = np.asarray(sorted(int(i) for i in support), dtype=np.intp)
    x = np.zeros(inst.n)
    if idx.size:
        x[idx] = nx.least_squares(inst.A[:, idx], inst.b)
    return x


def save_bundle(path, inst: ProblemInstance, meta: dict | None = None) -> None:
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    nx.write_matrix(d / "A.mat", inst.A)
    nx.write_vector(d / "b.vec", inst.b)
    if inst.truth is not None:
        nx.write_vector(d / "truth.vec", inst.truth.values)
    info = {"m": inst.m, "n": inst.n,
            "s": inst.truth.s if inst.truth is not None else None,
            "epsilon": inst.noise_level}
    info.update(meta or {})
    (d / "meta.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")


def load_bundle(path) -> tuple[ProblemInstance, dict]:
    d = Path(path)
    A = nx.read_matrix(d / "A.mat")
    b = nx.read_vector(d / "b.vec")
    meta = json.loads((d / "meta.json").read_text()) if (d / "meta.json").exists() else {}
    truth = SparseSignal(nx.read_vector(d / "truth.vec")) if (d / "truth.vec").exists() else None
    return ProblemInstance(A, b, truth, float(meta.get("epsilon") or 0.0)), meta

"""Dense linear algebra, seeded randomness and the matrix text format.

Matrices are plain 2-D ``float64`` numpy arrays; vectors are 1-D arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .errors import RankDeficient

RANK_RTOL = 1e-10


def as_matrix(A) -> np.ndarray:
    A = np.array(A, dtype=np.float64, ndmin=2)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"matrix dimensions must be positive, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(x) -> np.ndarray:
    x = np.array(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def seeded_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for the stream ``(seed, *stream)``.

    Distinct stream tuples give statistically independent generators; the same
    tuple always reproduces the same sequence.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.PCG64(ss))


def gaussian_matrix(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return rng.standard_normal((m, n))


@dataclass(frozen=True)
class Factorization:
    """Cached factors of a matrix.

    kind is one of ``"qr_transpose"`` (thin QR of A^T: ``A^T = Q R``),
    ``"kkt"`` (LDL^T of the bordered system ``[[d I, A^T], [A, 0]]``) or
    ``"cholesky"`` (``L L^T = A A^T + d I``).
    """

    kind: str
    factors: tuple
    source_shape: tuple

    def reconstruct(self) -> np.ndarray:
        if self.kind == "qr_transpose":
            Q, R = self.factors
            return (Q @ R).T
        if self.kind == "kkt":
            lu, d, _, _ = self.factors
            return lu @ d @ lu.T
        if self.kind == "cholesky":
            (L,) = self.factors
            return L @ L.T
        raise ValueError(self.kind)


def qr_transpose(A) -> Factorization:
    """Thin QR of A^T, checking that A has full row rank."""
    A = as_matrix(A)
    m, n = A.shape
    if m > n:
        raise RankDeficient(f"{m}x{n} matrix cannot have full row rank")
    Q, R = np.linalg.qr(A.T)
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_RTOL * max(diag.max(), np.abs(A).max()):
        raise RankDeficient("numerical rank below row count")
    return Factorization("qr_transpose", (Q, R), (m, n))


def kkt_factor(A, diag_shift: float) -> Factorization:
    """Symmetric indefinite factorization of ``[[d I, A^T], [A, 0]]``."""
    A = as_matrix(A)
    m, n = A.shape
    K = np.zeros((n + m, n + m))
    K[:n, :n] = diag_shift * np.eye(n)
    K[:n, n:] = A.T
    K[n:, :n] = A
    lu, d, perm = sla.ldl(K)
    return Factorization("kkt", (lu, d, perm, K), (m, n))


def cholesky_factor(A, diag_shift: float) -> Factorization:
    """Cholesky factor of ``A A^T + d I`` (the small normal-equations system)."""
    A = as_matrix(A)
    G = A @ A.T + diag_shift * np.eye(A.shape[0])
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(str(exc)) from exc
    return Factorization("cholesky", (L,), A.shape)


def kernel_basis(A) -> np.ndarray:
    """Orthonormal basis (n x (n - m)) of ker(A), from the QR factorization of A^T."""
    A = as_matrix(A)
    m, n = A.shape
    qr_transpose(A)  # rank check
    Q, _ = np.linalg.qr(A.T, mode="complete")
    return np.ascontiguousarray(Q[:, m:])


def least_squares(A, b) -> np.ndarray:
    """argmin ||A x - b||_2 for A with full column rank."""
    A = as_matrix(A)
    b = as_vector(b)
    m, n = A.shape
    if n > m:
        raise RankDeficient(f"{m}x{n} matrix cannot have full column rank")
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_RTOL * max(diag.max(), np.abs(A).max()):
        raise RankDeficient("columns are numerically dependent")
    return sla.solve_triangular(R, Q.T @ b)


def write_matrix(path, A) -> None:
    A = as_matrix(A)
    m, n = A.shape
    lines = [f"{m} {n}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in A]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    tokens = Path(path).read_text().split("\n")
    m, n = (int(t) for t in tokens[0].split())
    rows = [ln.split() for ln in tokens[1:] if ln.strip()]
    if len(rows) != m or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {m} rows of {n} values")
    return as_matrix([[float(v) for v in r] for r in rows])


def write_vector(path, x) -> None:
    x = as_vector(x)
    Path(path).write_text("".join(f"{v:.17g}\n" for v in x))


def read_vector(path) -> np.ndarray:
    return as_vector([float(ln) for ln in Path(path).read_text().split() if ln.strip()])

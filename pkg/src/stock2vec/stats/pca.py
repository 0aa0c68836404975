"""Principal component analysis on top of a cyclic Jacobi eigensolver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput, IndexOutOfRange

OFF_DIAGONAL_TOL = 1e-12


def jacobi_eigh(A, tol=OFF_DIAGONAL_TOL, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps continue until the off-diagonal Frobenius norm drops below
    ``tol`` times ``max(1, ||A||_F)``. Returns ``(eigenvalues, eigenvectors)``
    sorted by descending eigenvalue, eigenvectors as columns.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    threshold = tol * max(1.0, np.linalg.norm(A))
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], V[:, order]


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_variance_ratio: np.ndarray
    mean: np.ndarray

    def transform(self, X, n_components=None) -> np.ndarray:
        W = self.components if n_components is None else self.components[:, :n_components]
        return (np.asarray(X, dtype=float) - self.mean) @ W


def pca(X, center: bool = True) -> PcaResult:
    """Principal components of the rows of ``X`` (sample covariance, divisor n-1).

    Each component's sign is fixed so that its largest-magnitude entry is
    positive.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise ValueError("need an n x p matrix with n >= 2 and p >= 1")
    mean = X.mean(axis=0) if center else np.zeros(X.shape[1])
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    values, vectors = jacobi_eigh(cov)
    values = np.clip(values, 0.0, None)
    total = values.sum()
    if not total > 0:
        raise DegenerateInput("zero total variance: explained-variance ratios are undefined")
    for j in range(vectors.shape[1]):
        if vectors[np.argmax(np.abs(vectors[:, j])), j] < 0:
            vectors[:, j] = -vectors[:, j]
    return PcaResult(vectors, values, values / total, mean)


def cumulative_variance(result: PcaResult, m: int) -> float:
    p = len(result.explained_variance_ratio)
    if not 1 <= m <= p:
        raise IndexOutOfRange(f"m must be in 1..{p}, got {m}")
    return float(np.sum(result.explained_variance_ratio[:m]))

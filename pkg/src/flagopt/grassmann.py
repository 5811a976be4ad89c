"""Grassmannian Gr(k, n) as symmetric orthogonal matrices ``Q`` with
``tr Q = 2k - n``.

A k-dimensional subspace with orthogonal projector ``P`` is stored as
``Q = 2P - I``. Tangent vectors at ``Q`` are symmetric ``X`` with
``XQ + QX = 0``; the metric is ``tr(XY)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BaseMismatch, DimensionError, NotOrthonormal
from .matcore import check_symmetric, skew_exp, sym, sym_eig

POINT_TOL = 1e-8


def signed_identity(k: int, n: int) -> np.ndarray:
    """``I_{k,n-k} = diag(I_k, -I_{n-k})``."""
    return np.diag(np.r_[np.ones(k), -np.ones(n - k)])


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    Q: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def residuals(self) -> dict[str, float]:
        Q = self.Q
        n = self.n
        return {
            "symmetry": float(np.linalg.norm(Q - Q.T)),
            "involution": float(np.linalg.norm(Q @ Q - np.eye(n))),
            "trace": float(abs(np.trace(Q) - (2 * self.k - n))),
        }


@dataclass(frozen=True, eq=False)
class GrTangent:
    X: np.ndarray
    base: GrassmannPoint


def gr_point(Q: np.ndarray, tol: float = POINT_TOL) -> GrassmannPoint:
    """Validate ``Q`` and recover ``k`` from its trace."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    tr = np.trace(Q)
    if abs(tr - round(tr)) > tol:
        raise DimensionError(f"trace {tr} is not an integer")
    k2 = round(tr) + n
    if k2 % 2:
        raise DimensionError(f"trace {tr} has the wrong parity for n={n}")
    p = GrassmannPoint(Q, k2 // 2)
    bad = {name: r for name, r in p.residuals().items() if r > tol}
    if bad:
        raise DimensionError(f"not a Grassmann involution: {bad}")
    return p


def gr_from_basis(V: np.ndarray, tol: float = POINT_TOL) -> GrassmannPoint:
    """Involution ``2 V V^T - I`` of the column span of ``V`` (orthonormal columns)."""
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n, k = V.shape
    if np.linalg.norm(V.T @ V - np.eye(k)) > tol:
        raise NotOrthonormal("columns of V are not orthonormal")
    return GrassmannPoint(2.0 * V @ V.T - np.eye(n), k)


def gr_eigenbasis(p: GrassmannPoint) -> np.ndarray:
    """Orthogonal ``V`` with ``Q = V I_{k,n-k} V^T`` (the +1 eigenvectors first)."""
    U, _ = sym_eig(sym(p.Q))
    return U


def gr_tangent_project(p: GrassmannPoint, S: np.ndarray) -> GrTangent:
    """Orthogonal projection ``(S - QSQ)/2`` of a symmetric matrix onto the tangent space."""
    S = np.asarray(S, dtype=float)
    check_symmetric(S)
    Q = p.Q
    return GrTangent(0.5 * (S - Q @ S @ Q), p)


def _same_base(X: GrTangent, Y: GrTangent) -> None:
    if X.base is not Y.base and not np.allclose(X.base.Q, Y.base.Q, atol=1e-10):
        raise BaseMismatch("tangent vectors live at different points")


def gr_metric(X: GrTangent, Y: GrTangent) -> float:
    _same_base(X, Y)
    return float(np.sum(X.X * Y.X))


def gr_tangent_block(X: GrTangent, V: np.ndarray | None = None) -> np.ndarray:
    """The ``k x (n-k)`` block ``B`` with ``X = V [[0, B], [B^T, 0]] V^T``."""
    if V is None:
        V = gr_eigenbasis(X.base)
    k = X.base.k
    return (V.T @ X.X @ V)[:k, k:]


def _half_rotation(B: np.ndarray, t: float) -> np.ndarray:
    k, r = B.shape
    K = np.zeros((k + r, k + r))
    K[:k, k:] = -B
    K[k:, :k] = B.T
    return skew_exp(0.5 * t * K)


def _check_at(p: GrassmannPoint, X: GrTangent) -> None:
    if X.base is not p and not np.allclose(X.base.Q, p.Q, atol=1e-10):
        raise BaseMismatch("direction is not tangent at this point")


def gr_geodesic(p: GrassmannPoint, X: GrTangent, t: float) -> GrassmannPoint:
    """Geodesic from ``p`` with initial velocity ``X``, evaluated at ``t``."""
    _check_at(p, X)
    V = gr_eigenbasis(p)
    E = _half_rotation(gr_tangent_block(X, V), t)
    W = V @ E
    Q = W @ signed_identity(p.k, p.n) @ W.T
    return GrassmannPoint(sym(Q), p.k)


def gr_transport(p: GrassmannPoint, X: GrTangent, Y: GrTangent, t: float) -> GrTangent:
    """Parallel transport of ``Y`` along the geodesic from ``p`` in direction ``X``."""
    _check_at(p, X)
    _check_at(p, Y)
    V = gr_eigenbasis(p)
    k, n = p.k, p.n
    E = _half_rotation(gr_tangent_block(X, V), t)
    C = gr_tangent_block(Y, V)
    M = np.zeros((n, n))
    M[:k, k:] = C
    M[k:, :k] = C.T
    W = V @ E
    end = GrassmannPoint(sym(W @ signed_identity(k, n) @ W.T), k)
    return GrTangent(sym(W @ M @ W.T), end)


def gr_linear_value(A: np.ndarray, p: GrassmannPoint) -> float:
    return float(np.sum(np.asarray(A) * p.Q))


def gr_linear_grad(A: np.ndarray, p: GrassmannPoint) -> GrTangent:
    """Riemannian gradient of ``Q -> <A, Q>``: ``(A + A^T - QAQ - QA^TQ)/4``."""
    A = np.asarray(A, dtype=float)
    Q = p.Q
    G = 0.25 * (A + A.T - Q @ A @ Q - Q @ A.T @ Q)
    return GrTangent(sym(G), p)


def gr_linear_max(A: np.ndarray, k: int) -> GrassmannPoint:
    """Maximizer ``U I_{k,n-k} U^T`` of ``<A, Q>`` over Gr(k, n).

    ``U`` holds the eigenvectors of ``(A + A^T)/2`` in descending order of
    eigenvalue. With a tie between the k-th and (k+1)-th eigenvalue any
    split is optimal and the factorization's order is kept.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DimensionError("A must be square")
    if not 1 <= k <= n - 1:
        raise DimensionError(f"k={k} must lie in 1..{n - 1}")
    U, _ = sym_eig(sym(A))
    Q = U @ signed_identity(k, n) @ U.T
    return GrassmannPoint(sym(Q), k)


def gr_linear_optimum(A: np.ndarray, k: int) -> float:
    """``sum(lam[:k]) - sum(lam[k:])`` for the descending eigenvalues of ``sym(A)``."""
    _, lam = sym_eig(sym(np.asarray(A, dtype=float)))
    return float(lam[:k].sum() - lam[k:].sum())


__all__ = [
    "GrassmannPoint",
    "GrTangent",
    "gr_eigenbasis",
    "gr_from_basis",
    "gr_geodesic",
    "gr_linear_grad",
    "gr_linear_max",
    "gr_linear_optimum",
    "gr_linear_value",
    "gr_metric",
    "gr_point",
    "gr_tangent_block",
    "gr_tangent_project",
    "gr_transport",
    "signed_identity",
]

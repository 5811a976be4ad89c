"""Closed-form geodesics for both flag metrics."""

from __future__ import annotations

import numpy as np

from ..errors import NotSkew
from ..matcore import (
    TOL_SKEW,
    BlockPartition,
    TimeVaryingMatrix,
    block_diag_mask,
    bordered_skew_exp,
    check_skew,
    skew_exp,
)
from .point import CLASSICAL, MODIFIED, FlagPoint
from .tangent import TangentCoords


def pi_offdiag(A: np.ndarray, P: BlockPartition, tol: float = TOL_SKEW) -> np.ndarray:
    """Zero the diagonal blocks of a skew matrix."""
    A = np.asarray(A, dtype=float)
    if A.shape != (P.n, P.n):
        raise NotSkew(f"expected a {P.n}x{P.n} skew matrix, got {A.shape}")
    check_skew(A, tol)
    out = A.copy()
    out[block_diag_mask(P)] = 0.0
    return out


def _split(xi: TangentCoords) -> tuple[np.ndarray, np.ndarray, int]:
    # leading (n - m_{d+1}) square block and its coupling to the last block
    r = xi.sig.dims[-1]
    return xi.lam[:r, :r], xi.lam[:r, r:], r


def geodesic_classical(p: FlagPoint, xi: TangentCoords, t: float) -> FlagPoint:
    """``V(t) = V exp(t [[2 L0, L1], [-L1^T, 0]]) diag(exp(-t L0), I)``."""
    L0, L1, r = _split(xi)
    E = bordered_skew_exp(2.0 * t * L0, t * L1)
    W = p.V @ E
    W[:, :r] = W[:, :r] @ skew_exp(-t * L0)
    return FlagPoint(W, p.sig)


def geodesic_modified(p: FlagPoint, xi: TangentCoords, t: float) -> FlagPoint:
    """``V(t) = V exp(t Lam)``."""
    L0, L1, _ = _split(xi)
    return FlagPoint(p.V @ bordered_skew_exp(t * L0, t * L1), p.sig)


def geodesic(p: FlagPoint, xi: TangentCoords, t: float, embedding: str) -> FlagPoint:
    if embedding == CLASSICAL:
        return geodesic_classical(p, xi, t)
    if embedding == MODIFIED:
        return geodesic_modified(p, xi, t)
    raise ValueError(f"unknown embedding {embedding!r}")


def classical_velocity(xi: TangentCoords, t: float) -> np.ndarray:
    """Tangent coordinates of the classical geodesic's velocity at time ``t``,
    expressed in the moving frame ``V(t)``.

    The leading block stays fixed and the coupling to the last block rotates:
    ``Lam(t) = [[L0, exp(t L0) L1], [., 0]]``.
    """
    L0, L1, r = _split(xi)
    lam = np.zeros_like(xi.lam)
    lam[:r, :r] = L0
    C = skew_exp(t * L0) @ L1
    lam[:r, r:] = C
    lam[r:, :r] = -C.T
    return lam


def classical_velocity_path(xi: TangentCoords, a: float = 0.0, b: float = 1.0) -> TimeVaryingMatrix:
    n = xi.sig.n
    return TimeVaryingMatrix(lambda s: classical_velocity(xi, s), a, b, n)

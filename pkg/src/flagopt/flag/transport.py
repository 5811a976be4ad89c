"""Parallel transport in tangent coordinates.

Coordinates are taken in the moving frame ``V(t)`` of the curve, with
``V' = V Lam(t)``. A transported field ``X(t)`` then solves

    modified:   X' = pi([X, Lam]) / 2
    classical:  2 X' = pi([X, Lam]) + [[0, X0 L1 + L0 X1], [-(.)^T, 0]]

where ``L0, X0`` are the leading ``n - m_{d+1}`` blocks and ``L1, X1``
their coupling to the last block. Flattening the upper blocks with
:func:`coords_vector` turns either equation into ``x' = Phi(t) x``;
``Phi`` is assembled from Kronecker products and commutation matrices.
"""

from __future__ import annotations

import numpy as np

from ..errors import BaseMismatch, DimensionError
from ..matcore import (
    TimeVaryingMatrix,
    block_diag_mask,
    commutation_matrix,
    peano_baker_solve,
    rk4_solve,
    skew,
    skew_exp,
)
from .geodesic import classical_velocity_path, geodesic_classical, geodesic_modified
from .point import CLASSICAL, MODIFIED, FlagPoint, FlagSignature
from .tangent import TangentCoords, coords_from_vector, coords_vector


def _offsets(sig: FlagSignature) -> dict[tuple[int, int], slice]:
    m = sig.m
    out = {}
    pos = 0
    for j, k in sig.pairs():
        out[(j, k)] = slice(pos, pos + m[j] * m[k])
        pos += m[j] * m[k]
    return out


def transport_generator(lam: np.ndarray, sig: FlagSignature, embedding: str) -> np.ndarray:
    """Matrix ``Phi`` with ``d/dt coords_vector(X) = Phi coords_vector(X)``."""
    if embedding not in (CLASSICAL, MODIFIED):
        raise ValueError(f"unknown embedding {embedding!r}")
    m = sig.m
    b = sig.blocks
    nb = sig.d + 1
    last = nb - 1
    off = _offsets(sig)
    N = sum(m[j] * m[k] for j, k in sig.pairs())
    Phi = np.zeros((N, N))

    def L(j, k):
        return lam[b.slice(j), b.slice(k)]

    def add(row, j, k, C):
        # C acts on vec X(j, k); rewrite through X(k, j)^T when j > k
        if j < k:
            Phi[off[row], off[(j, k)]] += C
        else:
            Phi[off[row], off[(k, j)]] -= C @ commutation_matrix(m[k], m[j])

    for k, q in sig.pairs():
        row = (k, q)
        for s in range(nb):
            if s in (k, q):
                continue
            # X(k,s) Lam(s,q) - Lam(k,s) X(s,q)
            add(row, k, s, np.kron(L(s, q).T, np.eye(m[k])))
            add(row, s, q, -np.kron(np.eye(m[q]), L(k, s)))
        if embedding == CLASSICAL and q == last:
            for s in range(last):
                if s == k:
                    continue
                # X0 L1 + L0 X1 in block (k, last)
                add(row, k, s, np.kron(L(s, last).T, np.eye(m[k])))
                add(row, s, last, np.kron(np.eye(m[last]), L(k, s)))
    return 0.5 * Phi


def transport_rhs(X: np.ndarray, lam: np.ndarray, sig: FlagSignature, embedding: str) -> np.ndarray:
    """Right-hand side of the transport equation in matrix form."""
    mask = block_diag_mask(sig.blocks)
    C = X @ lam - lam @ X
    C[mask] = 0.0
    if embedding == CLASSICAL:
        r = sig.dims[-1]
        E = X[:r, :r] @ lam[:r, r:] + lam[:r, :r] @ X[:r, r:]
        C[:r, r:] += E
        C[r:, :r] -= E.T
    elif embedding != MODIFIED:
        raise ValueError(f"unknown embedding {embedding!r}")
    return 0.5 * C


def _check_base(p: FlagPoint, *vs: TangentCoords) -> None:
    for v in vs:
        if v.base is not p and (v.sig != p.sig or not np.array_equal(v.base.V, p.V)):
            raise BaseMismatch("tangent vector is not based at the curve's start")


def transport_modified(
    p: FlagPoint, A: TangentCoords, Y0: TangentCoords, t: float, method: str = "expm", **kw
) -> TangentCoords:
    """Transport ``Y0`` along ``t -> geodesic_modified(p, A, t)``.

    The generator is constant along the geodesic and skew in plain
    coordinates, so ``x(t) = exp(t Phi) x(0)``. ``method="peano-baker"`` or
    ``"rk4"`` integrate the same system numerically instead.
    """
    _check_base(p, A, Y0)
    sig = p.sig
    q = geodesic_modified(p, A, t)
    if t == 0:
        return TangentCoords(q, Y0.lam.copy())
    Phi = transport_generator(A.lam, sig, MODIFIED)
    x0 = coords_vector(Y0)
    if method == "expm":
        x = skew_exp(skew(t * Phi)) @ x0
    elif method == "peano-baker":
        x = peano_baker_solve(TimeVaryingMatrix.constant(Phi, 0.0, t), x0, t, **kw)
    elif method == "rk4":
        x = rk4_solve(TimeVaryingMatrix.constant(Phi, 0.0, t), x0, t, **kw)
    else:
        raise ValueError(f"unknown method {method!r}")
    return coords_from_vector(q, x)


def _frame(p: FlagPoint, path: TimeVaryingMatrix, t: float, method: str, kw) -> np.ndarray:
    # (V^T)' = -Lam V^T
    neg = TimeVaryingMatrix(lambda s: -path(s), path.a, path.b, path.dim)
    if method == "rk4":
        Vt = rk4_solve(neg, p.V.T, t, **kw)
    else:
        Vt = peano_baker_solve(neg, p.V.T, t, **kw)
    # re-orthogonalize the integrated frame
    U, _, Wt = np.linalg.svd(Vt.T)
    return U @ Wt


def transport_classical(
    p: FlagPoint,
    path: TimeVaryingMatrix,
    Y0: TangentCoords,
    t: float,
    frame=None,
    method: str = "peano-baker",
    **kw,
) -> TangentCoords:
    """Transport ``Y0`` along the curve whose moving-frame velocity is ``path``.

    ``path(s)`` returns the coordinate matrix ``Lam(s)`` (zero diagonal
    blocks). ``frame(t)`` may supply ``V(t)`` directly; otherwise
    ``V' = V Lam`` is integrated from ``p.V``. The vectorized system is
    solved with the Peano-Baker series, or RK4 with ``method="rk4"``.
    """
    _check_base(p, Y0)
    sig = p.sig
    if path.dim != sig.n:
        raise DimensionError(f"path has dimension {path.dim}, expected {sig.n}")
    x0 = coords_vector(Y0)
    N = x0.size
    phi = TimeVaryingMatrix(
        lambda s: transport_generator(path(s), sig, CLASSICAL), path.a, path.b, N
    )
    if method == "peano-baker":
        x = peano_baker_solve(phi, x0, t, **kw)
    elif method == "rk4":
        x = rk4_solve(phi, x0, t, **kw)
    else:
        raise ValueError(f"unknown method {method!r}")
    if frame is None:
        V = _frame(p, path, t, method, kw)
    else:
        V = frame(t)
        V = V.V if isinstance(V, FlagPoint) else np.asarray(V, dtype=float)
    return coords_from_vector(FlagPoint(V, sig), x)


def transport_classical_geodesic(
    p: FlagPoint, xi: TangentCoords, Y0: TangentCoords, t: float, **kw
) -> TangentCoords:
    """Transport ``Y0`` along ``s -> geodesic_classical(p, xi, s)``."""
    _check_base(p, xi)
    path = classical_velocity_path(xi, 0.0, t)
    return transport_classical(p, path, Y0, t, frame=lambda s: geodesic_classical(p, xi, s), **kw)

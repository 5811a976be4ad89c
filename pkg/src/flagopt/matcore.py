"""Dense numerical kernels: vectorization, exponentials, factorizations,
block partitions and a Peano-Baker solver for linear time-varying ODEs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.linalg import expm

from .errors import IndexOutOfRange, NoConvergence, NotSkew, NotSymmetric

TOL_SKEW = 1e-10
TOL_SYM = 1e-10


# ---------------------------------------------------------------------------
# vectorization


def vec(A: np.ndarray) -> np.ndarray:
    """Stack the columns of ``A`` into one vector."""
    A = np.asarray(A)
    return A.reshape(-1, order="F")


def unvec(v: np.ndarray, m: int, n: int) -> np.ndarray:
    return np.asarray(v).reshape((m, n), order="F")


def commutation_matrix(m: int, n: int) -> np.ndarray:
    """Permutation ``K`` with ``K @ vec(A) == vec(A.T)`` for every m x n ``A``."""
    if m < 1 or n < 1:
        raise ValueError("commutation matrix needs positive dimensions")
    K = np.zeros((m * n, m * n))
    # vec(A)[i + j*m] = A[i, j];  vec(A.T)[j + i*n] = A[i, j]
    i, j = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    K[(j + i * n).ravel(), (i + j * m).ravel()] = 1.0
    return K


# ---------------------------------------------------------------------------
# symmetric / skew helpers and factorizations


def sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def skew(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A - A.T)


def check_skew(A: np.ndarray, tol: float = TOL_SKEW) -> None:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSkew(f"expected a square matrix, got shape {A.shape}")
    if np.linalg.norm(A + A.T) > tol:
        raise NotSkew(f"asymmetry {np.linalg.norm(A + A.T):.3e} exceeds {tol:.1e}")


def check_symmetric(S: np.ndarray, tol: float = TOL_SYM) -> None:
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {S.shape}")
    if np.linalg.norm(S - S.T) > tol:
        raise NotSymmetric(f"asymmetry {np.linalg.norm(S - S.T):.3e} exceeds {tol:.1e}")


def skew_exp(A: np.ndarray, tol: float = TOL_SKEW) -> np.ndarray:
    """Matrix exponential of a skew-symmetric matrix.

    The input is validated, exactly skew-symmetrized and handed to
    scaling-and-squaring with a degree-13 Pade approximant.
    """
    A = np.asarray(A, dtype=float)
    check_skew(A, tol)
    return expm(skew(A))


def bordered_skew_exp(L0: np.ndarray, L1: np.ndarray) -> np.ndarray:
    """``exp([[L0, L1], [-L1.T, 0]])`` for skew ``L0`` (p x p) and ``L1`` (p x q).

    When ``q`` is much larger than ``p`` the generator has rank at most ``2p``
    and the exponential is assembled from a ``2p x 2p`` one.
    """
    L0 = np.asarray(L0, dtype=float)
    L1 = np.asarray(L1, dtype=float)
    p, q = L1.shape
    n = p + q
    if q <= p:
        G = np.zeros((n, n))
        G[:p, :p] = L0
        G[:p, p:] = L1
        G[p:, :p] = -L1.T
        return expm(skew(G))
    Qr, R = np.linalg.qr(L1.T)  # q x p, p x p
    S = np.zeros((2 * p, 2 * p))
    S[:p, :p] = L0
    S[:p, p:] = R.T
    S[p:, :p] = -R
    E = expm(skew(S)) - np.eye(2 * p)
    out = np.eye(n)
    out[:p, :p] += E[:p, :p]
    out[:p, p:] += E[:p, p:] @ Qr.T
    out[p:, :p] += Qr @ E[p:, :p]
    out[p:, p:] += Qr @ E[p:, p:] @ Qr.T
    return out


def sym_eig(S: np.ndarray, tol: float = TOL_SYM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``S = U diag(lam) U.T`` with ``lam`` descending."""
    S = np.asarray(S, dtype=float)
    check_symmetric(S, tol)
    lam, U = np.linalg.eigh(sym(S))
    # eigh is ascending; reversing keeps its order among ties
    return U[:, ::-1].copy(), lam[::-1].copy()


def svd(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``A = U diag(s) W.T``; returns ``(U, s, W)``."""
    U, s, Wt = np.linalg.svd(np.asarray(A, dtype=float), full_matrices=True)
    return U, s, Wt.T


# ---------------------------------------------------------------------------
# block partitions


@dataclass(frozen=True)
class BlockPartition:
    """Partition of ``n`` indices into consecutive blocks ``m_1, ..., m_{d+1}``."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        if not sizes or any(m < 1 for m in sizes):
            raise ValueError(f"block sizes must be positive, got {self.sizes}")
        object.__setattr__(self, "sizes", sizes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.sizes)]))

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def nblocks(self) -> int:
        return len(self.sizes)

    def slice(self, j: int) -> slice:
        if not 0 <= j < self.nblocks:
            raise IndexOutOfRange(f"block index {j} outside 0..{self.nblocks - 1}")
        off = self.offsets
        return slice(off[j], off[j + 1])


def block_get(A: np.ndarray, P: BlockPartition, j: int, k: int) -> np.ndarray:
    """Return a copy of block ``(j, k)`` (0-based) of ``A``."""
    return np.array(A[P.slice(j), P.slice(k)])


def block_set(A: np.ndarray, P: BlockPartition, j: int, k: int, B: np.ndarray) -> None:
    """Write ``B`` into block ``(j, k)`` of ``A`` in place."""
    A[P.slice(j), P.slice(k)] = B


def block_diag_mask(P: BlockPartition) -> np.ndarray:
    """Boolean ``n x n`` mask that is True on the diagonal blocks."""
    labels = np.repeat(np.arange(P.nblocks), P.sizes)
    return labels[:, None] == labels[None, :]


# ---------------------------------------------------------------------------
# linear time-varying ODEs


@dataclass(frozen=True)
class TimeVaryingMatrix:
    """A deterministic matrix-valued function ``t -> Phi(t)`` on ``[a, b]``."""

    evaluator: Callable[[float], np.ndarray]
    a: float
    b: float
    dim: int

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.evaluator(t), dtype=float)

    @classmethod
    def constant(cls, A: np.ndarray, a: float = 0.0, b: float = 1.0) -> "TimeVaryingMatrix":
        A = np.array(A, dtype=float)
        return cls(lambda t: A, a, b, A.shape[0])


@lru_cache(maxsize=16)
def _cheb_integration(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Lobatto nodes on [-1, 1] and the matrix mapping node values
    of ``f`` to node values of ``int_{-1}^x f``."""
    deg = npts - 1
    x = -np.cos(np.pi * np.arange(npts) / deg)
    Vinv = np.linalg.inv(cheb.chebvander(x, deg))
    integ = np.empty((npts, npts))
    for i in range(npts):
        c = np.zeros(npts)
        c[i] = 1.0
        integ[:, i] = cheb.chebval(x, cheb.chebint(c, lbnd=-1.0))
    return x, integ @ Vinv


def _picard(nodes_phi, weights, tol, max_iter):
    """Iterate ``M_k = I + int Phi M_{k-1}`` on a fixed node set.

    ``weights[i, j]`` integrates node values up to node ``i``.
    """
    npts, dim, _ = nodes_phi.shape
    eye = np.eye(dim)
    M = np.broadcast_to(eye, (npts, dim, dim)).copy()
    for it in range(1, max_iter + 1):
        F = nodes_phi @ M
        M_new = eye + np.einsum("ij,jab->iab", weights, F)
        delta = np.sqrt(np.max(np.sum((M_new - M) ** 2, axis=(1, 2))))
        M = M_new
        if delta <= tol * max(1.0, np.abs(M).max()):
            return M, it
    raise NoConvergence(f"Peano-Baker iteration did not converge in {max_iter} steps (last change {delta:.2e})")


def peano_baker_transition(
    phi: TimeVaryingMatrix,
    t: float,
    *,
    quadrature: str = "chebyshev",
    nodes: int = 24,
    steps: int = 256,
    tol: float = 1e-12,
    max_iter: int = 100,
    panel_scale: float = 0.5,
) -> np.ndarray:
    """Transition matrix ``M(t)`` of ``x' = Phi(t) x`` from ``phi.a``.

    ``M`` is the limit of the Peano-Baker iterates. With
    ``quadrature="chebyshev"`` the interval is split into panels with
    ``||Phi|| * width <= panel_scale`` and each panel is iterated on
    ``nodes`` Chebyshev-Lobatto points; panel transitions are composed.
    ``quadrature="trapezoid"`` iterates on ``steps`` uniform subintervals
    with the composite trapezoidal rule (second order only).
    """
    a = float(phi.a)
    if not (min(phi.a, phi.b) - 1e-14 <= t <= max(phi.a, phi.b) + 1e-14):
        raise ValueError(f"t={t} outside [{phi.a}, {phi.b}]")
    dim = phi.dim
    if t == a:
        return np.eye(dim)
    span = t - a

    if quadrature == "trapezoid":
        s = a + span * np.arange(steps + 1) / steps
        Phi = np.stack([phi(si) for si in s])
        h = span / steps
        W = np.zeros((steps + 1, steps + 1))
        for i in range(1, steps + 1):
            W[i, :i + 1] = h
            W[i, 0] = W[i, i] = h / 2
        M, _ = _picard(Phi, W, tol, max_iter)
        return M[-1]
    if quadrature != "chebyshev":
        raise ValueError(f"unknown quadrature {quadrature!r}")

    probe = a + span * np.linspace(0.0, 1.0, 17)
    bound = max(np.linalg.norm(phi(si), 2) for si in probe)
    npanels = max(1, math.ceil(abs(span) * bound / panel_scale))
    x, Wref = _cheb_integration(nodes)
    width = span / npanels
    total = np.eye(dim)
    for p in range(npanels):
        lo = a + p * width
        s = lo + (x + 1.0) * (width / 2)
        Phi = np.stack([phi(si) for si in s])
        M, _ = _picard(Phi, Wref * (width / 2), tol, max_iter)
        total = M[-1] @ total
    return total


def peano_baker_solve(phi: TimeVaryingMatrix, u: np.ndarray, t: float, **kw) -> np.ndarray:
    """Solve ``x' = Phi(t) x``, ``x(a) = u`` and return ``x(t)``.

    ``u`` may be a vector or a matrix whose columns are initial values.
    Keyword arguments go to :func:`peano_baker_transition`.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] != phi.dim:
        raise ValueError(f"initial value has {u.shape[0]} rows, system has {phi.dim}")
    return peano_baker_transition(phi, t, **kw) @ u


def rk4_solve(phi: TimeVaryingMatrix, u: np.ndarray, t: float, h: float = 1e-3) -> np.ndarray:
    """Classical fixed-step Runge-Kutta for ``x' = Phi(t) x`` (cross-check integrator)."""
    x = np.array(u, dtype=float)
    a = float(phi.a)
    nsteps = max(1, math.ceil(abs(t - a) / h))
    dt = (t - a) / nsteps
    s = a
    for _ in range(nsteps):
        k1 = phi(s) @ x
        mid = phi(s + dt / 2)
        k2 = mid @ (x + dt / 2 * k1)
        k3 = mid @ (x + dt / 2 * k2)
        k4 = phi(s + dt) @ (x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += dt
    return x


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a Gaussian matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def random_skew(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    G = rng.standard_normal((n, n))
    return scale * (G - G.T) / 2


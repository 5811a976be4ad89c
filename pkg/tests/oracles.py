"""Independent reference computations used by the tests.

Nothing here calls into the flagopt routines under test except for plain
data containers; each oracle recomputes its answer from definitions.
"""

from __future__ import annotations

import numpy as np


def series_expm(A: np.ndarray, terms: int = 30) -> np.ndarray:
    """Taylor series with scaling and squaring."""
    A = np.asarray(A, dtype=float)
    nrm = np.linalg.norm(A, 1)
    s = max(0, int(np.ceil(np.log2(nrm))) + 1) if nrm > 0.5 else 0
    B = A / 2.0**s
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def rot2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def signs(m, k):
    """Diagonal of J_k for block sizes m (0-based k)."""
    return np.concatenate([np.full(mj, 1.0 if j == k else -1.0) for j, mj in enumerate(m)])


def offsets(m):
    return np.concatenate([[0], np.cumsum(m)]).astype(int)


def pairs(m):
    nb = len(m)
    return [(j, k) for j in range(nb) for k in range(j + 1, nb)]


def coord_basis(m):
    """Basis of tangent coordinates: skew E with a single +1 in an upper block."""
    off = offsets(m)
    n = off[-1]
    out = []
    for j, k in pairs(m):
        # column-major inside each block, matching vec
        for c in range(m[k]):
            for r in range(m[j]):
                E = np.zeros((n, n))
                E[off[j] + r, off[k] + c] = 1.0
                E[off[k] + c, off[j] + r] = -1.0
                out.append(E)
    return out


def tangent_design(m, arity):
    """Matrix whose columns are the stacked (Lam J_k - J_k Lam) of the basis."""
    cols = []
    for E in coord_basis(m):
        parts = []
        for k in range(arity):
            s = signs(m, k)
            parts.append((E * (s[None, :] - s[:, None])).ravel())
        cols.append(np.concatenate(parts))
    return np.array(cols).T


def lstsq_tangent_coords(m, arity, mats_rot):
    """Frobenius-closest tangent vector to ambient matrices given in the
    rotated frame (V^T xi_k V), as a coordinate vector."""
    D = tangent_design(m, arity)
    rhs = np.concatenate([M.ravel() for M in mats_rot])
    return np.linalg.lstsq(D, rhs, rcond=None)[0]


def coord_vector_from_lam(m, lam):
    off = offsets(m)
    return np.concatenate(
        [lam[off[j]:off[j + 1], off[k]:off[k + 1]].reshape(-1, order="F") for j, k in pairs(m)]
    )


def lam_from_coord_vector(m, v):
    return sum(c * E for c, E in zip(v, coord_basis(m)))


def transport_rhs_definition(m, arity, lam, X):
    """Tangential derivative condition solved for X'.

    With Y = V (X J_k - J_k X) V^T and V' = V Lam, parallel transport means
    the projection of Y' onto the tangent space vanishes. Y' in the rotated
    frame is (X' J - J X') + [Lam, X J - J X]; X' is the negative
    projection of the second term.
    """
    mats = []
    for k in range(arity):
        s = signs(m, k)
        M = X * (s[None, :] - s[:, None])
        mats.append(lam @ M - M @ lam)
    return -lam_from_coord_vector(m, lstsq_tangent_coords(m, arity, mats))


def commutation(m, n):
    K = np.zeros((m * n, m * n))
    for i in range(m):
        for j in range(n):
            # vec(A)[i + j m] = A[i, j] ; vec(A^T)[j + i n] = A[i, j]
            K[j + i * n, i + j * m] = 1.0
    return K


def worked_d2_classical_generator(m, lam, corrected=True):
    """Block-written d=2 transport system for (U, V, W), Lam = [[0,A,B],[.,0,C],[.,.,0]].

    ``corrected`` uses -(B^T x I) K for the last row, which is what the
    matrix form gives; ``corrected=False`` uses the naive -B x I.
    """
    m1, m2, m3 = m
    off = offsets(m)
    B = lam[off[0]:off[1], off[2]:off[3]]
    C = lam[off[1]:off[2], off[2]:off[3]]
    N = m1 * m2 + m1 * m3 + m2 * m3
    Phi = np.zeros((N, N))
    u = slice(0, m1 * m2)
    v = slice(m1 * m2, m1 * m2 + m1 * m3)
    w = slice(m1 * m2 + m1 * m3, N)
    Phi[u, v] = -0.5 * np.kron(C, np.eye(m1))
    Phi[u, w] = 0.5 * np.kron(np.eye(m2), B) @ commutation(m2, m3)
    Phi[v, u] = np.kron(C.T, np.eye(m1))
    if corrected:
        Phi[w, u] = -np.kron(B.T, np.eye(m2)) @ commutation(m1, m2)
    else:
        Phi[w, u] = -np.kron(B, np.eye(m2))
    return Phi


def grid_gr12_argmax(A: np.ndarray, step: float = 1e-3):
    """Brute-force maximizer of <A, 2uu^T - I> over lines u(th) in R^2."""
    th = np.arange(0.0, np.pi, step)
    c, s = np.cos(th), np.sin(th)
    # <A, 2uu^T - I> = 2 u^T A u - tr A
    vals = 2 * (A[0, 0] * c * c + (A[0, 1] + A[1, 0]) * c * s + A[1, 1] * s * s) - np.trace(A)
    i = int(np.argmax(vals))
    return th[i], vals[i]


def line_angle(u: np.ndarray) -> float:
    """Angle of the line spanned by u, in [0, pi)."""
    return float(np.mod(np.arctan2(u[1], u[0]), np.pi))


def angle_distance(a: float, b: float) -> float:
    d = abs(a - b) % np.pi
    return min(d, np.pi - d)


def rand_sym(n, rng):
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2


def rand_orth(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def rand_orthonormal(n, k, rng):
    return np.linalg.qr(rng.standard_normal((n, k)))[0]


def block_diag_orth(m, rng):
    n = sum(m)
    out = np.zeros((n, n))
    off = offsets(m)
    for j, mj in enumerate(m):
        out[off[j]:off[j + 1], off[j]:off[j + 1]] = rand_orth(mj, rng)
    return out


def random_blocks(n, d, rng, min_size=1):
    """Random block sizes m_1..m_{d+1} summing to n."""
    cuts = np.sort(rng.choice(np.arange(1, n), size=d, replace=False))
    m = np.diff(np.concatenate([[0], cuts, [n]]))
    assert (m >= min_size).all()
    return tuple(int(x) for x in m)


def grid_separation_r2(u1: np.ndarray, u2: np.ndarray, step: float = 1e-3):
    """Brute-force minimizer of ||T1 - tau(w)||^2 + ||T2 - tau(w_perp)||^2 over lines w in R^2."""
    T1 = 2 * np.outer(u1, u1) - np.eye(2)
    T2 = 2 * np.outer(u2, u2) - np.eye(2)
    best = (np.inf, 0.0)
    for th in np.arange(0.0, np.pi, step):
        w = np.array([np.cos(th), np.sin(th)])
        v = np.array([-w[1], w[0]])
        F = np.sum((T1 - (2 * np.outer(w, w) - np.eye(2))) ** 2) + np.sum(
            (T2 - (2 * np.outer(v, v) - np.eye(2))) ** 2
        )
        if F < best[0]:
            best = (F, th)
    return best[1], best[0]

"""Tangent coordinates, ambient tangent tuples, projections, metrics and
Riemannian gradients on flag manifolds.

A tangent vector at ``p = [V]`` is a skew matrix ``Lam`` whose diagonal
blocks vanish. Its ambient image under either embedding is

    X_k = V (Lam J_k - J_k Lam) V^T,   k = 1, ..., arity,

so ``X_j`` carries ``-2 Lam(j,l)`` and ``X_l`` carries ``+2 Lam(j,l)`` in
the ``(j, l)`` block (in the rotated frame). The metric is the pullback of
the ambient trace form, which in coordinates weighs block ``(j, l)`` by
16, except the blocks touching the last subspace in the classical
embedding (only one involution sees them) which get 8.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from ..errors import ArityMismatch, BaseMismatch, DimensionError, NotSkew, NotTangent
from ..matcore import block_diag_mask, skew, vec
from .point import CLASSICAL, MODIFIED, AmbientTuple, FlagPoint, J_diag, FlagSignature

TANGENT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TangentCoords:
    """Tangent vector at ``base`` stored as the full skew matrix ``lam``."""

    base: FlagPoint
    lam: np.ndarray

    @property
    def sig(self) -> FlagSignature:
        return self.base.sig

    def block(self, j: int, k: int) -> np.ndarray:
        b = self.sig.blocks
        return self.lam[b.slice(j), b.slice(k)]

    def blocks(self) -> dict[tuple[int, int], np.ndarray]:
        return {jk: self.block(*jk) for jk in self.sig.pairs()}

    def _like(self, lam: np.ndarray) -> "TangentCoords":
        return TangentCoords(self.base, lam)

    def __add__(self, other: "TangentCoords") -> "TangentCoords":
        _same_base(self, other)
        return self._like(self.lam + other.lam)

    def __sub__(self, other: "TangentCoords") -> "TangentCoords":
        _same_base(self, other)
        return self._like(self.lam - other.lam)

    def __neg__(self) -> "TangentCoords":
        return self._like(-self.lam)

    def __mul__(self, c: float) -> "TangentCoords":
        return self._like(float(c) * self.lam)

    __rmul__ = __mul__

    def restricted(self, pairs: Iterable[tuple[int, int]]) -> "TangentCoords":
        """Keep only the listed ``(j, k)`` blocks."""
        b = self.sig.blocks
        lam = np.zeros_like(self.lam)
        for j, k in pairs:
            sj, sk = b.slice(j), b.slice(k)
            lam[sj, sk] = self.lam[sj, sk]
            lam[sk, sj] = self.lam[sk, sj]
        return self._like(lam)


def _same_base(a: TangentCoords, b: TangentCoords) -> None:
    if a.base is b.base:
        return
    if a.sig != b.sig or not np.array_equal(a.base.V, b.base.V):
        raise BaseMismatch("tangent vectors are based at different points")


def tangent_coords(base: FlagPoint, lam: np.ndarray, tol: float = TANGENT_TOL) -> TangentCoords:
    """Validated constructor: ``lam`` skew with vanishing diagonal blocks."""
    lam = np.array(lam, dtype=float)
    n = base.sig.n
    if lam.shape != (n, n):
        raise DimensionError(f"expected {n}x{n} coordinates, got {lam.shape}")
    scale = max(1.0, np.linalg.norm(lam))
    if np.linalg.norm(lam + lam.T) > tol * scale:
        raise NotSkew("tangent coordinates must be skew")
    mask = block_diag_mask(base.sig.blocks)
    if np.linalg.norm(lam[mask]) > tol * scale:
        raise NotTangent("tangent coordinates have nonzero diagonal blocks")
    lam = skew(lam)
    lam[mask] = 0.0
    return TangentCoords(base, lam)


def zero_tangent(base: FlagPoint) -> TangentCoords:
    return TangentCoords(base, np.zeros((base.sig.n, base.sig.n)))


def tangent_from_blocks(base: FlagPoint, blocks: Mapping[tuple[int, int], np.ndarray]) -> TangentCoords:
    """Build coordinates from upper blocks ``T(j, k)``, ``j < k`` (0-based)."""
    sig = base.sig
    b = sig.blocks
    lam = np.zeros((sig.n, sig.n))
    for (j, k), T in blocks.items():
        if not j < k:
            raise DimensionError(f"block ({j},{k}) is not strictly upper")
        T = np.asarray(T, dtype=float).reshape(sig.m[j], sig.m[k])
        lam[b.slice(j), b.slice(k)] = T
        lam[b.slice(k), b.slice(j)] = -T.T
    return TangentCoords(base, lam)


def random_tangent(base: FlagPoint, rng: np.random.Generator, scale: float = 1.0) -> TangentCoords:
    n = base.sig.n
    G = rng.standard_normal((n, n)) * scale
    lam = G - G.T
    lam[block_diag_mask(base.sig.blocks)] = 0.0
    return TangentCoords(base, lam)


def coords_vector(xi: TangentCoords) -> np.ndarray:
    """Concatenate ``vec(T(j, k))`` over pairs in lexicographic order."""
    return np.concatenate([vec(xi.block(j, k)) for j, k in xi.sig.pairs()])


def coords_from_vector(base: FlagPoint, v: np.ndarray) -> TangentCoords:
    sig = base.sig
    m = sig.m
    blocks = {}
    pos = 0
    for j, k in sig.pairs():
        size = m[j] * m[k]
        blocks[(j, k)] = np.reshape(v[pos:pos + size], (m[j], m[k]), order="F")
        pos += size
    if pos != len(v):
        raise DimensionError(f"vector length {len(v)} does not match {pos} coordinates")
    return tangent_from_blocks(base, blocks)


def coords_dimension(sig: FlagSignature) -> int:
    m = sig.m
    return sum(m[j] * m[k] for j, k in sig.pairs())


# ambient tuples

def _signs(sig: FlagSignature, arity: int) -> list[np.ndarray]:
    return [J_diag(sig, k) for k in range(arity)]


def tangent_to_ambient(xi: TangentCoords, embedding: str) -> AmbientTuple:
    p = xi.base
    V = p.V
    mats = []
    for s in _signs(p.sig, p.sig.arity(embedding)):
        M = xi.lam * (s[None, :] - s[:, None])
        X = V @ M @ V.T
        mats.append(0.5 * (X + X.T))
    return AmbientTuple(tuple(mats), kind="tangent")


def _check_arity(t: AmbientTuple, sig: FlagSignature) -> str:
    for M in t.mats:
        if M.shape != (sig.n, sig.n):
            raise DimensionError(f"ambient entries must be {sig.n}x{sig.n}, got {M.shape}")
    return sig.embedding_of_arity(t.arity)


def ambient_to_tangent(t: AmbientTuple, p: FlagPoint, tol: float = TANGENT_TOL) -> TangentCoords:
    """Invert :func:`tangent_to_ambient` on its image.

    Raises :class:`NotTangent` when ``t`` does not have the tangent block
    pattern at ``p``.
    """
    embedding = _check_arity(t, p.sig)
    sig = p.sig
    b = sig.blocks
    lam = np.zeros((sig.n, sig.n))
    for j, k in sig.pairs():
        # X_j(j,k) = -2 Lam(j,k) in the rotated frame
        T = -0.5 * p.block(j).T @ t[j] @ p.block(k)
        lam[b.slice(j), b.slice(k)] = T
        lam[b.slice(k), b.slice(j)] = -T.T
    xi = TangentCoords(p, lam)
    back = tangent_to_ambient(xi, embedding)
    err = (t - back).norm()
    if err > tol * max(1.0, t.norm()):
        raise NotTangent(f"tuple is not tangent at this point (residual {err:.3e})")
    return xi


def raw_pairing(p: FlagPoint, G: AmbientTuple, pairs=None) -> dict[tuple[int, int], np.ndarray]:
    """Blocks ``R(j, l)`` with ``sum_k <G_k, X_k(xi)> = sum <R(j,l), T(j,l)>``.

    Only the two involutions ``j`` and ``l`` see block ``(j, l)``; the
    second is absent for the classical embedding when ``l`` is the last
    block.
    """
    arity = G.arity
    pairs = p.sig.pairs() if pairs is None else list(pairs)
    out = {}
    for j, l in pairs:
        Vj, Vl = p.block(j), p.block(l)
        # contract with the thinner block first; (G + G^T) W = G W + (W^T G)^T
        W = Vj if Vj.shape[1] <= Vl.shape[1] else Vl
        S = -(G[j] @ W + (W.T @ G[j]).T)
        if l < arity:
            S += G[l] @ W + (W.T @ G[l]).T
        R = S.T @ Vl if W is Vj else Vj.T @ S
        out[(j, l)] = 2.0 * R
    return out


# metric

@dataclass(frozen=True)
class CoordinateMetric:
    """Block weights ``w(j, k)`` of the metric in ``Lam`` coordinates."""

    label: str
    sig: FlagSignature
    weights: Mapping[tuple[int, int], float]

    def weight(self, j: int, k: int) -> float:
        return self.weights[(j, k)]


def classical_metric(sig: FlagSignature) -> CoordinateMetric:
    last = sig.d
    w = {(j, k): (8.0 if k == last else 16.0) for j, k in sig.pairs()}
    return CoordinateMetric(CLASSICAL, sig, w)


def modified_metric(sig: FlagSignature) -> CoordinateMetric:
    return CoordinateMetric(MODIFIED, sig, {jk: 16.0 for jk in sig.pairs()})


def metric_for(sig: FlagSignature, embedding: str) -> CoordinateMetric:
    if embedding == CLASSICAL:
        return classical_metric(sig)
    if embedding == MODIFIED:
        return modified_metric(sig)
    raise ValueError(f"unknown embedding {embedding!r}")


def metric(xi: TangentCoords, eta: TangentCoords, m: CoordinateMetric) -> float:
    _same_base(xi, eta)
    if m.sig != xi.sig:
        raise DimensionError("metric built for another signature")
    total = 0.0
    for (j, k), w in m.weights.items():
        total += w * float(np.sum(xi.block(j, k) * eta.block(j, k)))
    return total


def norm(xi: TangentCoords, m: CoordinateMetric) -> float:
    return float(np.sqrt(max(metric(xi, xi, m), 0.0)))


# projections

def orthogonal_group_part(p: FlagPoint, xi: AmbientTuple) -> AmbientTuple:
    """Project each ``xi_k`` onto the tangent space of O(n) at ``Q_k``.

    ``Q_k skew(Q_k xi_k)``; equals ``(xi - Q xi Q) / 2`` for symmetric input.
    """
    embedding = _check_arity(xi, p.sig)
    sig = p.sig
    V = p.V
    mats = []
    for k, s in enumerate(_signs(sig, sig.arity(embedding))):
        # in the rotated frame Q_k = J_k
        E = V.T @ xi[k] @ V
        W = s[:, None] * skew(s[:, None] * E)
        mats.append(V @ W @ V.T)
    return AmbientTuple(tuple(mats))


def project_tangent(p: FlagPoint, xi: AmbientTuple, embedding: str | None = None) -> TangentCoords:
    """Orthogonal (ambient Frobenius) projection onto the tangent space.

    Arbitrary square matrices are accepted; their component orthogonal to
    the product of orthogonal groups is dropped first, which does not
    change the result since the flag tangent space lies inside it.
    """
    found = _check_arity(xi, p.sig)
    if embedding is not None and embedding != found:
        raise ArityMismatch(f"tuple of arity {xi.arity} is not a {embedding} tuple")
    m = metric_for(p.sig, found)
    R = raw_pairing(p, xi)
    return tangent_from_blocks(p, {jk: R[jk] / m.weight(*jk) for jk in R})


def project_normal(p: FlagPoint, xi: AmbientTuple, embedding: str | None = None) -> AmbientTuple:
    """Normal component inside the orthogonal-group tangent space."""
    found = _check_arity(xi, p.sig)
    tan = tangent_to_ambient(project_tangent(p, xi, embedding), found)
    return orthogonal_group_part(p, xi) - tan


def riemannian_gradient(p: FlagPoint, eg: AmbientTuple, m: CoordinateMetric, pairs=None) -> TangentCoords:
    """Riemannian gradient from Euclidean gradients ``df/dQ_k``.

    Block ``(j, l)`` is the raw directional pairing divided by ``w(j, l)``.
    ``pairs`` limits the computation to a subset of blocks (others zero).
    """
    if eg.arity != p.sig.arity(m.label):
        raise ArityMismatch(f"{m.label} metric needs arity {p.sig.arity(m.label)}, got {eg.arity}")
    R = raw_pairing(p, eg, pairs)
    return tangent_from_blocks(p, {jk: R[jk] / m.weight(*jk) for jk in R})


def classical_from_modified(eg: AmbientTuple) -> AmbientTuple:
    """Rewrite a modified-arity gradient for the classical embedding.

    Uses ``Q_{d+1} = -(d - 1) I - sum_k Q_k``, so ``df/dQ_k`` picks up
    ``-df/dQ_{d+1}``.
    """
    last = eg[eg.arity - 1]
    return AmbientTuple(tuple(G - last for G in eg.mats[:-1]))

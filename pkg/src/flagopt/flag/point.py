"""Flag signatures, points and the two involution embeddings."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..errors import ArityMismatch, BadSignature, NotOrthogonal
from ..matcore import BlockPartition, random_orthogonal

CLASSICAL = "classical"
MODIFIED = "modified"
EMBEDDINGS = (CLASSICAL, MODIFIED)

POINT_TOL = 1e-10


@dataclass(frozen=True)
class FlagSignature:
    """Type ``(n_1 < ... < n_d)`` of flags in R^n and the block sizes
    ``m_1, ..., m_{d+1}`` with ``m_{d+1} = n - n_d``."""

    n: int
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        n = int(self.n)
        if not dims:
            raise BadSignature("a flag needs at least one subspace")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise BadSignature(f"dimensions {dims} are not strictly increasing")
        if dims[0] <= 0 or dims[-1] >= n:
            raise BadSignature(f"dimensions {dims} must lie strictly between 0 and n={n}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "n", n)

    @property
    def d(self) -> int:
        return len(self.dims)

    @cached_property
    def m(self) -> tuple[int, ...]:
        edges = (0,) + self.dims + (self.n,)
        return tuple(b - a for a, b in zip(edges, edges[1:]))

    @cached_property
    def blocks(self) -> BlockPartition:
        return BlockPartition(self.m)

    def arity(self, embedding: str) -> int:
        if embedding == CLASSICAL:
            return self.d
        if embedding == MODIFIED:
            return self.d + 1
        raise ValueError(f"unknown embedding {embedding!r}")

    def embedding_of_arity(self, arity: int) -> str:
        if arity == self.d:
            return CLASSICAL
        if arity == self.d + 1:
            return MODIFIED
        raise ArityMismatch(f"arity {arity} fits neither embedding of d={self.d}")

    def pairs(self) -> list[tuple[int, int]]:
        """Block index pairs ``(j, k)``, ``j < k``, in lexicographic order (0-based)."""
        nb = self.d + 1
        return [(j, k) for j in range(nb) for k in range(j + 1, nb)]

    def header(self) -> str:
        return f"{self.n};" + ",".join(str(x) for x in self.dims)

    @classmethod
    def from_blocks(cls, m: Sequence[int]) -> "FlagSignature":
        m = [int(x) for x in m]
        if len(m) < 2 or any(x < 1 for x in m):
            raise BadSignature(f"block sizes {m} need at least two positive entries")
        return cls(sum(m), tuple(np.cumsum(m[:-1]).tolist()))


def flag_signature(n: int, dims: Sequence[int]) -> FlagSignature:
    return FlagSignature(n, tuple(dims))


def J_diag(sig: FlagSignature, k: int) -> np.ndarray:
    """Diagonal of ``J_k``: +1 on block ``k`` (0-based), -1 elsewhere."""
    labels = np.repeat(np.arange(sig.d + 1), sig.m)
    return np.where(labels == k, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class FlagPoint:
    """A flag given by an orthogonal representative ``V``.

    Column block ``j`` of ``V`` spans ``W_j``; the flag's ``k``-th subspace is
    the span of the first ``n_k`` columns. ``V`` is only defined up to
    right multiplication by block-diagonal orthogonal matrices, so use
    :func:`same_flag` rather than comparing ``V``.
    """

    V: np.ndarray
    sig: FlagSignature

    def block(self, j: int) -> np.ndarray:
        return self.V[:, self.sig.blocks.slice(j)]

    def projector(self, j: int) -> np.ndarray:
        B = self.block(j)
        return B @ B.T


def flag_from_basis(V: np.ndarray, sig: FlagSignature, tol: float = POINT_TOL) -> FlagPoint:
    V = np.array(V, dtype=float)
    n = sig.n
    if V.shape != (n, n):
        raise NotOrthogonal(f"expected a {n}x{n} matrix, got {V.shape}")
    err = np.linalg.norm(V.T @ V - np.eye(n))
    if err > tol * max(1.0, np.sqrt(n)):
        raise NotOrthogonal(f"V^T V - I has norm {err:.3e}")
    return FlagPoint(V, sig)


def random_flag(sig: FlagSignature, rng: np.random.Generator) -> FlagPoint:
    return FlagPoint(random_orthogonal(sig.n, rng), sig)


@dataclass(frozen=True, eq=False)
class AmbientTuple:
    """A tuple of ``n x n`` matrices: ``d`` of them (classical) or ``d + 1`` (modified)."""

    mats: tuple[np.ndarray, ...]
    kind: str = "general"

    def __post_init__(self):
        object.__setattr__(self, "mats", tuple(np.asarray(M, dtype=float) for M in self.mats))

    @property
    def arity(self) -> int:
        return len(self.mats)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.mats[k]

    def __iter__(self):
        return iter(self.mats)

    def __add__(self, other: "AmbientTuple") -> "AmbientTuple":
        return AmbientTuple(tuple(a + b for a, b in zip(self.mats, other.mats)))

    def __sub__(self, other: "AmbientTuple") -> "AmbientTuple":
        return AmbientTuple(tuple(a - b for a, b in zip(self.mats, other.mats)))

    def inner(self, other: "AmbientTuple") -> float:
        """Sum of Frobenius inner products of the entries."""
        if self.arity != other.arity:
            raise ArityMismatch(f"arities {self.arity} and {other.arity} differ")
        return float(sum(np.sum(a * b) for a, b in zip(self.mats, other.mats)))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))


def embed(p: FlagPoint, embedding: str) -> AmbientTuple:
    """``(V J_1 V^T, ..., V J_r V^T)`` with ``r = d`` or ``d + 1``."""
    sig = p.sig
    mats = []
    for k in range(sig.arity(embedding)):
        # V J_k V^T = 2 V_k V_k^T - I
        Vk = p.block(k)
        Q = 2.0 * Vk @ Vk.T - np.eye(sig.n)
        mats.append(0.5 * (Q + Q.T))
    return AmbientTuple(tuple(mats), kind="point")


def embed_classical(p: FlagPoint) -> AmbientTuple:
    return embed(p, CLASSICAL)


def embed_modified(p: FlagPoint) -> AmbientTuple:
    return embed(p, MODIFIED)


@dataclass(frozen=True)
class Diagnosis:
    ok: bool
    constraint: str | None = None
    index: tuple[int, ...] = ()
    residual: float = 0.0

    def __bool__(self) -> bool:
        return self.ok

    def message(self) -> str:
        if self.ok:
            return "ok"
        where = ",".join(str(i + 1) for i in self.index)
        return f"{self.constraint} violated at Q[{where}] (residual {self.residual:.3e})"


def flag_validate(t: AmbientTuple, sig: FlagSignature, tol: float = POINT_TOL) -> Diagnosis:
    """Check the embedding constraints, reporting the first violation.

    Order of checks: symmetry, involution, trace ``2 m_k - n`` and
    pairwise ``(I + Q_j)(I + Q_l) = 0``. Residuals are Frobenius norms,
    compared against ``tol`` scaled by ``sqrt(n)``.
    """
    sig.embedding_of_arity(t.arity)
    n = sig.n
    m = sig.m
    scale = max(1.0, np.sqrt(n))
    eye = np.eye(n)
    for k, Q in enumerate(t.mats):
        if Q.shape != (n, n):
            return Diagnosis(False, "shape", (k,), float("inf"))
        r = np.linalg.norm(Q - Q.T)
        if not r <= tol * scale:
            return Diagnosis(False, "symmetry", (k,), float(r))
    for k, Q in enumerate(t.mats):
        r = np.linalg.norm(Q @ Q - eye)
        if not r <= tol * scale:
            return Diagnosis(False, "involution", (k,), float(r))
    for k, Q in enumerate(t.mats):
        r = abs(np.trace(Q) - (2 * m[k] - n))
        if not r <= tol * scale:
            return Diagnosis(False, "trace", (k,), float(r))
    for j in range(t.arity):
        for l in range(j + 1, t.arity):
            r = np.linalg.norm((eye + t.mats[j]) @ (eye + t.mats[l]))
            if not r <= tol * scale:
                return Diagnosis(False, "pairwise orthogonality", (j, l), float(r))
    return Diagnosis(True)


def same_flag(p: FlagPoint, q: FlagPoint, tol: float = 1e-10) -> bool:
    """Equality of flags through their embedded (modified) tuples."""
    if p.sig != q.sig:
        return False
    a, b = embed_modified(p), embed_modified(q)
    return all(np.linalg.norm(x - y) <= tol * max(1.0, np.sqrt(p.sig.n)) for x, y in zip(a, b))

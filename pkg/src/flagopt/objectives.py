"""Objective functions on flag manifolds.

An objective is evaluated on a :class:`FlagPoint` and supplies Euclidean
gradients with respect to the embedded involutions ``Q_k``. Objectives
whose restriction to a block pair ``(s, t)`` is linear in the pair's
Grassmann involution expose :meth:`Objective.pair_matrix` (or override
:meth:`Objective.restrict`), which coordinate minimization uses for exact
sub-steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ArityMismatch, BadInstance, DimensionError, SubproblemUnavailable
from .flag import (
    CLASSICAL,
    MODIFIED,
    AmbientTuple,
    FlagPoint,
    FlagSignature,
    classical_from_modified,
    geodesic,
    metric,
    metric_for,
    random_tangent,
    riemannian_gradient,
)
from .matcore import sym

ORTHO_TOL = 1e-8


class Objective:
    """Base class. Subclasses implement ``value`` and ``_gradient``.

    ``kind`` is the embedding whose involutions the gradient naturally
    refers to. ``euclidean_gradient(p, embedding)`` converts a modified
    gradient to the classical arity on request.
    """

    kind: str = MODIFIED

    def value(self, p: FlagPoint) -> float:
        raise NotImplementedError

    def _gradient(self, p: FlagPoint) -> AmbientTuple:
        raise NotImplementedError

    def euclidean_gradient(self, p: FlagPoint, embedding: str | None = None) -> AmbientTuple:
        G = self._gradient(p)
        if embedding is None or embedding == self.kind:
            return G
        if self.kind == MODIFIED and embedding == CLASSICAL:
            return classical_from_modified(G)
        raise ArityMismatch(f"a {self.kind} objective has no {embedding} gradient")

    def pair_matrix(self, p: FlagPoint, s: int, t: int) -> np.ndarray:
        """Symmetric ``n x n`` matrix ``M`` whose compression to the pair span
        is :meth:`restrict`, i.e. ``restrict = [V_s, V_t]^T M [V_s, V_t]``."""
        raise SubproblemUnavailable(f"{type(self).__name__} has no exact pair sub-solver")

    def restrict(self, p: FlagPoint, s: int, t: int) -> np.ndarray:
        """Matrix ``A`` with ``f = const - c <A, Q>``, ``c > 0``, on pair ``(s, t)``.

        ``Q`` is the involution of ``W_s`` inside ``span[V_s, V_t]``,
        written in the basis ``[V_s, V_t]``.
        """
        M = self.pair_matrix(p, s, t)
        Vst = np.hstack([p.block(s), p.block(t)])
        return sym(Vst.T @ M @ Vst)

    def __call__(self, p: FlagPoint) -> float:
        return self.value(p)


def _check_points(mats: Sequence[np.ndarray], n: int | None = None) -> list[np.ndarray]:
    out = []
    for A in mats:
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or (n is not None and A.shape[0] != n):
            raise DimensionError(f"expected square {n}x{n} matrices, got {A.shape}")
        out.append(sym(A))
    return out


class TraceObjective(Objective):
    """``f(V) = sum_k tr(V_k^T A_k V_k)`` over the first ``d`` blocks.

    Equivalently ``sum_k <A_k, (I + Q_k)/2>``, so ``df/dQ_k = A_k / 2``. In
    the modified embedding the last involution gets a zero gradient.
    """

    def __init__(self, As: Sequence[np.ndarray], kind: str = MODIFIED):
        self.As = tuple(_check_points(As))
        if kind not in (CLASSICAL, MODIFIED):
            raise ValueError(f"unknown embedding {kind!r}")
        self.kind = kind
        n = self.As[0].shape[0]
        if any(A.shape != (n, n) for A in self.As):
            raise DimensionError("coefficient matrices differ in size")

    def _check(self, p: FlagPoint) -> None:
        if p.sig.d != len(self.As) or p.sig.n != self.As[0].shape[0]:
            raise DimensionError(f"objective needs d={len(self.As)}, n={self.As[0].shape[0]}")

    def value(self, p: FlagPoint) -> float:
        self._check(p)
        return float(sum(np.sum(p.block(k) * (A @ p.block(k))) for k, A in enumerate(self.As)))

    def _gradient(self, p: FlagPoint) -> AmbientTuple:
        self._check(p)
        G = [0.5 * A for A in self.As]
        if self.kind == MODIFIED:
            G.append(np.zeros_like(G[0]))
        return AmbientTuple(tuple(G))

    def pair_matrix(self, p, s, t):
        self._check(p)
        # Q_t = -Q_s on the pair span, so f = const - <A_t - A_s, Q> / 2
        # (the last block carries no coefficient matrix)
        if t < len(self.As):
            return self.As[t] - self.As[s]
        return -self.As[s]


def trace_objective(As: Sequence[np.ndarray], kind: str = MODIFIED) -> TraceObjective:
    return TraceObjective(As, kind)


def projector_involution(U: np.ndarray) -> np.ndarray:
    """``2 P - I`` for the span of the orthonormal columns of ``U``."""
    return 2.0 * U @ U.T - np.eye(U.shape[0])


@dataclass(frozen=True, eq=False)
class SeparationInstance:
    """Target subspaces ``U_0, ..., U_d`` given by orthonormal bases."""

    bases: tuple[np.ndarray, ...]
    targets: tuple[np.ndarray, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(U.shape[1] for U in self.bases)

    @property
    def n(self) -> int:
        return self.bases[0].shape[0]

    @property
    def sig(self) -> FlagSignature:
        return FlagSignature.from_blocks(self.sizes)


def separation_instance(bases: Sequence[np.ndarray], tol: float = ORTHO_TOL) -> SeparationInstance:
    if len(bases) < 2:
        raise BadInstance("need at least two subspaces")
    bs = []
    n = None
    for j, U in enumerate(bases):
        U = np.asarray(U, dtype=float)
        if U.ndim == 1:
            U = U[:, None]
        if n is None:
            n = U.shape[0]
        if U.shape[0] != n or U.shape[1] < 1:
            raise BadInstance(f"basis {j} has shape {U.shape}, expected {n} rows")
        err = np.linalg.norm(U.T @ U - np.eye(U.shape[1]))
        if err > tol:
            raise BadInstance(f"basis {j} is not orthonormal (residual {err:.2e})")
        bs.append(U)
    if sum(U.shape[1] for U in bs) != n:
        raise BadInstance(f"block sizes {[U.shape[1] for U in bs]} do not sum to n={n}")
    return SeparationInstance(tuple(bs), tuple(projector_involution(U) for U in bs))


def random_separation_instance(
    sizes: Sequence[int], rng: np.random.Generator, orthogonal: bool = False
) -> SeparationInstance:
    """Random targets; with ``orthogonal`` they are mutually orthogonal."""
    n = int(sum(sizes))
    if orthogonal:
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        bases = np.split(Q, np.cumsum(sizes)[:-1], axis=1)
    else:
        bases = [np.linalg.qr(rng.standard_normal((n, m)))[0] for m in sizes]
    return separation_instance(bases)


class SeparationObjective(Objective):
    """``F(W) = sum_j ||tau_j(U_j) - tau_j(W_j)||_F^2``, ``tau_j(W) = 2 P_W - I``.

    With ``T_j = tau_j(U_j)`` and ``Q_j = tau_j(W_j)`` the Euclidean
    gradient is ``2 (Q_j - T_j)``. Since ``||Q_j||^2 = n`` on the manifold,
    only the linear part ``-2 T_j`` contributes to Riemannian gradients.
    """

    kind = MODIFIED

    def __init__(self, inst: SeparationInstance):
        self.inst = inst

    def _check(self, p: FlagPoint) -> None:
        if p.sig.m != self.inst.sizes:
            raise DimensionError(f"point has blocks {p.sig.m}, instance {self.inst.sizes}")

    def value(self, p: FlagPoint) -> float:
        self._check(p)
        total = 0.0
        for j, T in enumerate(self.inst.targets):
            total += float(np.sum((T - projector_involution(p.block(j))) ** 2))
        return total

    def _gradient(self, p: FlagPoint) -> AmbientTuple:
        self._check(p)
        return AmbientTuple(
            tuple(2.0 * (projector_involution(p.block(j)) - T) for j, T in enumerate(self.inst.targets))
        )

    def pair_matrix(self, p, s, t):
        self._check(p)
        # F = const - 2 <A_1 - A_2, Q> with A_1, A_2 the restricted targets
        return self.inst.targets[s] - self.inst.targets[t]


def separation_objective(inst: SeparationInstance) -> SeparationObjective:
    return SeparationObjective(inst)


class FunctionObjective(Objective):
    """Wrap user callables ``value(p)`` and ``gradient(p) -> AmbientTuple``."""

    def __init__(
        self,
        value: Callable[[FlagPoint], float],
        gradient: Callable[[FlagPoint], AmbientTuple],
        kind: str = MODIFIED,
        restrict: Callable[[FlagPoint, int, int], np.ndarray] | None = None,
    ):
        self._value = value
        self._grad = gradient
        self._restrict = restrict
        self.kind = kind

    def value(self, p):
        return float(self._value(p))

    def _gradient(self, p):
        G = self._grad(p)
        return G if isinstance(G, AmbientTuple) else AmbientTuple(tuple(G))

    def restrict(self, p, s, t):
        if self._restrict is None:
            return super().restrict(p, s, t)
        return np.asarray(self._restrict(p, s, t), dtype=float)


def zero_objective(sig: FlagSignature) -> FunctionObjective:
    n = sig.n
    return FunctionObjective(
        lambda p: 0.0,
        lambda p: AmbientTuple(tuple(np.zeros((n, n)) for _ in range(sig.d + 1))),
        MODIFIED,
        restrict=lambda p, s, t: np.zeros((sig.m[s] + sig.m[t],) * 2),
    )


def finite_diff_gradient_check(
    o: Objective,
    p: FlagPoint,
    trials: int,
    embedding: str | None = None,
    rng: np.random.Generator | None = None,
    h: float = 1e-5,
) -> float:
    """Largest relative error between ``<grad f, xi>`` and a centered
    difference of ``f`` along the geodesic in direction ``xi``.

    Directions are random unit vectors of the chosen metric.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    embedding = embedding or o.kind
    rng = np.random.default_rng(0) if rng is None else rng
    m = metric_for(p.sig, embedding)
    grad = riemannian_gradient(p, o.euclidean_gradient(p, embedding), m)
    worst = 0.0
    for _ in range(trials):
        xi = random_tangent(p, rng)
        xi = xi * (1.0 / np.sqrt(metric(xi, xi, m)))
        fd = (o.value(geodesic(p, xi, h, embedding)) - o.value(geodesic(p, xi, -h, embedding))) / (2 * h)
        an = metric(grad, xi, m)
        denom = max(abs(an), abs(fd))
        if denom < 1e-12:
            continue
        worst = max(worst, abs(fd - an) / denom)
    return worst

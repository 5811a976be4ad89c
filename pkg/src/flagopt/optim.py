"""First-order and coordinate methods on flag manifolds.

* :func:`gradient_descent` under the classical or the modified metric,
* :func:`coordinate_gradient_descent` over block pairs (modified metric),
* :func:`coordinate_minimization` with exact pair sub-solves, cyclic or
  randomized.

Iterations are counted per step for gradient descent and per sweep over
all block pairs for the coordinate methods. Times come from
``time.perf_counter`` and are measured from the start of the run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ArityMismatch, LineSearchFailed, SubproblemUnavailable
from .flag import (
    MODIFIED,
    CoordinateMetric,
    FlagPoint,
    classical_metric,
    geodesic,
    metric,
    modified_metric,
    raw_pairing,
    riemannian_gradient,
)
from .matcore import bordered_skew_exp, check_symmetric, sym, sym_eig
from .objectives import Objective

CONVERGED = "converged"
MAX_ITERS = "max_iters"
MAX_SECONDS = "max_seconds"


@dataclass(frozen=True)
class StopRule:
    grad_tol: float = 1e-5
    max_iters: int = 10_000
    max_seconds: float | None = None

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class LineSearch:
    """Armijo backtracking.

    With ``warm_start`` each search starts from the previously accepted
    step divided by ``shrink`` (capped at ``max_step``) instead of
    ``initial_step``.
    """

    kind: str = "armijo"
    c: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 50
    warm_start: bool = True
    max_step: float = 1e3

    def __post_init__(self):
        if self.kind != "armijo":
            raise ValueError(f"unsupported line search {self.kind!r}")
        if not 0 < self.c < 1 or not 0 < self.shrink < 1:
            raise ValueError("need 0 < c < 1 and 0 < shrink < 1")
        if not self.initial_step > 0 or self.max_backtracks < 0:
            raise ValueError("bad initial step or backtrack count")


@dataclass(frozen=True)
class IterRecord:
    iter: int
    objective: float
    grad_norm: float
    elapsed_s: float


@dataclass(frozen=True)
class StepRecord:
    """An accepted Armijo step: ``f_after <= f_before - c * step * g2``."""

    step: float
    f_before: float
    f_after: float
    g2: float


@dataclass(frozen=True)
class SubStep:
    """One exact pair update of coordinate minimization.

    ``lemma_grad_sq`` is ``||grad g||^2`` for ``g(Q) = <A, Q>`` on the pair
    Grassmannian with the trace metric, ``A`` the restricted matrix, and
    ``flag_grad_sq`` the modified-metric norm squared of the ``(s, t)``
    block of the flag gradient. Both refer to the point before the update.
    """

    s: int
    t: int
    f_before: float
    f_after: float
    accepted: bool
    lemma_grad_sq: float = float("nan")
    flag_grad_sq: float = float("nan")
    restricted_norm: float = float("nan")

    @property
    def delta(self) -> float:
        return self.f_before - self.f_after


@dataclass
class RunTrace:
    method: str
    records: list[IterRecord] = field(default_factory=list)
    status: str = ""
    steps: list[StepRecord] = field(default_factory=list)
    substeps: list[SubStep] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.records[-1].iter if self.records else 0

    @property
    def final_grad_norm(self) -> float:
        return self.records[-1].grad_norm if self.records else float("nan")

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective if self.records else float("nan")

    @property
    def elapsed_s(self) -> float:
        return self.records[-1].elapsed_s if self.records else 0.0

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


class _Clock:
    def __init__(self):
        self.t0 = time.perf_counter()

    def __call__(self) -> float:
        return time.perf_counter() - self.t0


def _budget_status(stop: StopRule, it: int, elapsed: float) -> str | None:
    if it >= stop.max_iters:
        return MAX_ITERS
    if stop.max_seconds is not None and elapsed >= stop.max_seconds:
        return MAX_SECONDS
    return None


def grad_norm(o: Objective, p: FlagPoint, m: CoordinateMetric) -> float:
    """Riemannian gradient norm; block ``(j, l)`` contributes ``||R(j, l)||^2 / w(j, l)``."""
    eg = o.euclidean_gradient(p, m.label)
    if eg.arity != p.sig.arity(m.label):
        raise ArityMismatch(f"{m.label} metric needs arity {p.sig.arity(m.label)}, got {eg.arity}")
    R = raw_pairing(p, eg)
    g2 = sum(float(np.sum(B * B)) / m.weight(*jk) for jk, B in R.items())
    return float(np.sqrt(g2))


def _armijo(f0, g2, trial, ls: LineSearch, step0: float):
    """Backtrack from ``step0``; ``trial(step)`` returns ``(point, value)``."""
    step = step0
    for _ in range(ls.max_backtracks + 1):
        q, fq = trial(step)
        if fq <= f0 - ls.c * step * g2:
            return step, q, fq
        step *= ls.shrink
    raise LineSearchFailed(f"no sufficient decrease after {ls.max_backtracks} backtracks")


def _next_step(ls: LineSearch, step: float) -> float:
    if not ls.warm_start:
        return ls.initial_step
    return min(step / ls.shrink, ls.max_step)


def gradient_descent(
    o: Objective,
    p0: FlagPoint,
    metric_: CoordinateMetric,
    ls: LineSearch | None = None,
    stop: StopRule | None = None,
    method: str | None = None,
) -> tuple[FlagPoint, RunTrace]:
    """Riemannian gradient descent along geodesics of ``metric_``."""
    ls = ls or LineSearch()
    stop = stop or StopRule()
    emb = metric_.label
    trace = RunTrace(method or f"gd-{emb}")
    clock = _Clock()
    p = p0
    f = o.value(p)
    step0 = ls.initial_step
    it = 0
    while True:
        g = riemannian_gradient(p, o.euclidean_gradient(p, emb), metric_)
        g2 = max(metric(g, g, metric_), 0.0)
        gn = float(np.sqrt(g2))
        elapsed = clock()
        trace.records.append(IterRecord(it, f, gn, elapsed))
        if gn <= stop.grad_tol:
            trace.status = CONVERGED
            break
        if (status := _budget_status(stop, it, elapsed)) is not None:
            trace.status = status
            break
        d = -g
        step, p, f_new = _armijo(f, g2, lambda a: _eval(o, geodesic(p, d, a, emb)), ls, step0)
        trace.steps.append(StepRecord(step, f, f_new, g2))
        f = f_new
        step0 = _next_step(ls, step)
        it += 1
    return p, trace


def _eval(o: Objective, q: FlagPoint):
    return q, o.value(q)


def pair_rotation(p: FlagPoint, s: int, t: int, W: np.ndarray) -> FlagPoint:
    """Replace ``[V_s, V_t]`` by ``[V_s, V_t] W``; other blocks untouched."""
    b = p.sig.blocks
    cols = np.r_[b.slice(s), b.slice(t)]
    V = p.V.copy()
    V[:, cols] = p.V[:, cols] @ W
    return FlagPoint(V, p.sig)


def pair_geodesic(p: FlagPoint, s: int, t: int, T: np.ndarray, step: float) -> FlagPoint:
    """Modified geodesic with only the ``(s, t)`` coordinate block ``T``.

    It stays in the span of ``[V_s, V_t]``, so only those columns move.
    """
    ms, mt = T.shape
    if ms <= mt:
        E = bordered_skew_exp(np.zeros((ms, ms)), step * T)
    else:
        # swap roles so the thin block borders
        E = bordered_skew_exp(np.zeros((mt, mt)), -step * T.T)
        perm = np.r_[mt:ms + mt, 0:mt]
        E = E[np.ix_(perm, perm)]
    return pair_rotation(p, s, t, E)


def coordinate_gradient_descent(
    o: Objective,
    p0: FlagPoint,
    ls: LineSearch | None = None,
    stop: StopRule | None = None,
    method: str = "cgd",
) -> tuple[FlagPoint, RunTrace]:
    """Armijo steps along single block-pair gradients, lexicographic sweeps."""
    ls = ls or LineSearch()
    stop = stop or StopRule()
    sig = p0.sig
    m = modified_metric(sig)
    trace = RunTrace(method)
    clock = _Clock()
    p = p0
    f = o.value(p)
    steps = {jk: ls.initial_step for jk in sig.pairs()}
    it = 0
    while True:
        gn = grad_norm(o, p, m)
        elapsed = clock()
        trace.records.append(IterRecord(it, f, gn, elapsed))
        if gn <= stop.grad_tol:
            trace.status = CONVERGED
            break
        if (status := _budget_status(stop, it, elapsed)) is not None:
            trace.status = status
            break
        for s, t in sig.pairs():
            g = riemannian_gradient(p, o.euclidean_gradient(p, MODIFIED), m, pairs=[(s, t)])
            T = g.block(s, t)
            g2 = m.weight(s, t) * float(np.sum(T * T))
            if g2 == 0.0:
                continue
            base = p
            step, p, f_new = _armijo(
                f, g2, lambda a: _eval(o, pair_geodesic(base, s, t, -T, a)), ls, steps[(s, t)]
            )
            trace.steps.append(StepRecord(step, f, f_new, g2))
            f = f_new
            steps[(s, t)] = _next_step(ls, step)
        it += 1
    return p, trace


def subproblem_linear_solve(A: np.ndarray, m_s: int, m_t: int, partial: bool | None = None) -> np.ndarray:
    """Orthogonal ``W`` such that ``W I_{m_s, m_t} W^T`` maximizes ``<A, Q>``
    over involutions of trace ``m_s - m_t``.

    The first ``m_s`` columns span the top eigenspace of ``A``. By default
    (``partial=None``) small or balanced problems return the full
    descending eigenbasis; when one block is much thinner only its
    eigenvectors are computed and the other block is completed by a
    Householder QR, which is all the optimum depends on.
    """
    A = np.asarray(A, dtype=float)
    k = m_s + m_t
    if A.shape != (k, k):
        raise ValueError(f"restricted matrix has shape {A.shape}, expected {k} square")
    check_symmetric(A, 1e-10 * max(1.0, np.abs(A).max()))
    thin = min(m_s, m_t)
    if partial is None:
        partial = k >= 32 and 4 * thin <= k
    if not partial:
        U, _ = sym_eig(A, tol=np.inf)
        return U
    S = sym(A)
    if m_s <= m_t:
        _, u = scipy.linalg.eigh(S, subset_by_index=[k - m_s, k - 1], driver="evx", check_finite=False)
        return np.linalg.qr(u[:, ::-1], mode="complete")[0]
    _, u = scipy.linalg.eigh(S, subset_by_index=[0, m_t - 1], driver="evx", check_finite=False)
    Q = np.linalg.qr(u, mode="complete")[0]
    return np.hstack([Q[:, m_t:], Q[:, :m_t]])


def _use_deflation(sig, s: int, t: int) -> bool:
    k = sig.m[s] + sig.m[t]
    rest = sig.n - k
    return k >= 32 and 4 * min(sig.m[s], sig.m[t]) <= k and 4 * rest <= k


def pair_solve_ambient(p: FlagPoint, s: int, t: int, M: np.ndarray) -> FlagPoint:
    """Exact pair sub-step from the ambient matrix ``M`` of :meth:`Objective.pair_matrix`.

    Same optimum as ``subproblem_linear_solve`` on ``[V_s, V_t]^T M [V_s, V_t]``,
    computed without forming the compression: with ``U`` the columns of the
    other blocks, ``M`` is compressed to ``U^perp`` and ``U`` is shifted out of
    the wanted end of the spectrum. Only the thinner block's eigenvectors
    are computed; the wider block is completed by a Householder QR. This
    pays off when the pair span is nearly all of ``R^n``.
    """
    sig = p.sig
    b = sig.blocks
    n = sig.n
    ms, mt = sig.m[s], sig.m[t]
    others = [j for j in range(sig.d + 1) if j not in (s, t)]
    cols = np.r_[tuple(b.slice(j) for j in others)] if others else np.zeros(0, dtype=int)
    U = p.V[:, cols]
    M = np.asarray(M, dtype=float)
    k = len(cols)
    top = ms <= mt
    # (I - UU^T) M (I - UU^T) -+ c UU^T  ==  M - U G^T - G U^T  with
    # G = MU - U (U^T M U)/2 +- c U/2; the shift c > ||M|| moves span(U)
    # past the end of the spectrum being computed
    c = 2.0 * np.linalg.norm(M) + 1.0
    MU = M @ U
    G = MU - 0.5 * U @ (U.T @ MU) + (0.5 * c if top else -0.5 * c) * U
    D = M - U @ G.T - G @ U.T
    if top:
        _, u = scipy.linalg.eigh(D, subset_by_index=[n - ms, n - 1], driver="evx", check_finite=False)
        thin, thin_block, wide_block = u[:, ::-1], s, t
    else:
        _, u = scipy.linalg.eigh(D, subset_by_index=[0, mt - 1], driver="evx", check_finite=False)
        thin, thin_block, wide_block = u, t, s
    Q = np.linalg.qr(np.hstack([U, thin]), mode="complete")[0]
    V = p.V.copy()
    V[:, b.slice(thin_block)] = Q[:, k:k + thin.shape[1]]
    V[:, b.slice(wide_block)] = Q[:, k + thin.shape[1]:]
    return FlagPoint(V, sig)


def _pair_order(order: str, pairs, rng):
    if order == "cyclic":
        return list(pairs)
    if order == "printed":
        # (s,t) -> (s+1,t) if s+1 < t else (s,t+1), starting at (1,2)
        nb = max(t for _, t in pairs) + 1
        out = []
        s, t = 0, 1
        while t < nb:
            out.append((s, t))
            s, t = (s + 1, t) if s + 1 < t else (s, t + 1)
        return out
    if order == "randomized":
        idx = rng.integers(len(pairs), size=len(pairs))
        return [pairs[i] for i in idx]
    raise ValueError(f"unknown order {order!r}")


def coordinate_minimization(
    o: Objective,
    p0: FlagPoint,
    stop: StopRule | None = None,
    order: str = "cyclic",
    seed: int | None = None,
    diagnostics: bool = False,
    method: str | None = None,
) -> tuple[FlagPoint, RunTrace]:
    """Exact minimization over one block pair at a time.

    For pair ``(s, t)`` the subspaces ``W_s, W_t`` are re-chosen inside
    their joint span from the eigenvectors of ``o.restrict(p, s, t)``. A
    sub-step that would increase the objective (possible only through
    rounding) is rejected, so the recorded objective never increases.

    ``order`` is ``"cyclic"`` (lexicographic sweeps), ``"randomized"``
    (pairs drawn uniformly, one sweep being as many draws as there are
    pairs) or ``"printed"``.
    """
    stop = stop or StopRule()
    sig = p0.sig
    m = modified_metric(sig)
    trace = RunTrace(method or ("cmin-random" if order == "randomized" else "cmin"))
    rng = np.random.default_rng(seed)
    pairs = sig.pairs()
    try:
        o.pair_matrix(p0, *pairs[0])
        ambient = True
    except SubproblemUnavailable:
        ambient = False
    clock = _Clock()
    p = p0
    f = o.value(p)
    it = 0
    while True:
        gn = grad_norm(o, p, m)
        elapsed = clock()
        trace.records.append(IterRecord(it, f, gn, elapsed))
        if gn <= stop.grad_tol:
            trace.status = CONVERGED
            break
        if (status := _budget_status(stop, it, elapsed)) is not None:
            trace.status = status
            break
        for s, t in _pair_order(order, pairs, rng):
            ms, mt = sig.m[s], sig.m[t]
            A = None
            if ambient and _use_deflation(sig, s, t):
                q = pair_solve_ambient(p, s, t, o.pair_matrix(p, s, t))
            else:
                A = o.restrict(p, s, t)
                q = pair_rotation(p, s, t, subproblem_linear_solve(A, ms, mt))
            fq = o.value(q)
            accepted = fq <= f
            extra = {}
            if diagnostics:
                if A is None:
                    A = o.restrict(p, s, t)
                A12 = A[:ms, ms:]
                g = riemannian_gradient(p, o.euclidean_gradient(p, MODIFIED), m, pairs=[(s, t)])
                T = g.block(s, t)
                extra = dict(
                    lemma_grad_sq=2.0 * float(np.sum(A12 * A12)),
                    flag_grad_sq=m.weight(s, t) * float(np.sum(T * T)),
                    restricted_norm=float(np.linalg.norm(A, 2)),
                )
            trace.substeps.append(SubStep(s, t, f, fq if accepted else f, accepted, **extra))
            if accepted:
                p, f = q, fq
        it += 1
    return p, trace


METHODS = ("gd-classical", "gd-modified", "cgd", "cmin", "cmin-random")


def run_method(
    name: str,
    o: Objective,
    p0: FlagPoint,
    stop: StopRule | None = None,
    ls: LineSearch | None = None,
    seed: int | None = None,
) -> tuple[FlagPoint, RunTrace]:
    """Dispatch by benchmark method name."""
    if name == "gd-classical":
        return gradient_descent(o, p0, classical_metric(p0.sig), ls, stop, method=name)
    if name == "gd-modified":
        return gradient_descent(o, p0, modified_metric(p0.sig), ls, stop, method=name)
    if name == "cgd":
        return coordinate_gradient_descent(o, p0, ls, stop, method=name)
    if name == "cmin":
        return coordinate_minimization(o, p0, stop, order="cyclic", method=name)
    if name == "cmin-random":
        return coordinate_minimization(o, p0, stop, order="randomized", seed=seed, method=name)
    raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flagopt.errors import BaseMismatch, DimensionError, NotOrthonormal, NotSymmetric
from flagopt.grassmann import (
    GrTangent,
    gr_eigenbasis,
    gr_from_basis,
    gr_geodesic,
    gr_linear_grad,
    gr_linear_max,
    gr_linear_optimum,
    gr_linear_value,
    gr_metric,
    gr_point,
    gr_tangent_block,
    gr_tangent_project,
    gr_transport,
    signed_identity,
)

from oracles import rand_orthonormal, rand_sym


def random_point(n, k, rng):
    return gr_from_basis(rand_orthonormal(n, k, rng))


def random_tangent(p, rng, scale=1.0):
    return GrTangent(scale * gr_tangent_project(p, rand_sym(p.n, rng)).X, p)


# points

def test_from_basis_examples():
    assert np.allclose(gr_from_basis(np.array([1.0, 0.0])).Q, np.diag([1, -1]))
    assert np.allclose(gr_from_basis(np.array([1.0, 1.0]) / np.sqrt(2)).Q, [[0, 1], [1, 0]])
    V = np.eye(5)[:, :2]
    assert np.array_equal(gr_from_basis(V).Q, signed_identity(2, 5))


def test_from_basis_rejects_non_orthonormal():
    with pytest.raises(NotOrthonormal):
        gr_from_basis(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_point_validity_many():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 51))
        k = int(rng.integers(1, n))
        p = random_point(n, k, rng)
        assert max(p.residuals().values()) <= 1e-10


def test_gr_point_recovers_k_and_rejects():
    rng = np.random.default_rng(1)
    p = random_point(7, 3, rng)
    assert gr_point(p.Q).k == 3
    with pytest.raises(DimensionError):
        gr_point(p.Q + 0.1 * np.eye(7))


def test_eigenbasis_diagonalizes():
    rng = np.random.default_rng(2)
    p = random_point(6, 2, rng)
    V = gr_eigenbasis(p)
    assert np.allclose(V.T @ p.Q @ V, signed_identity(2, 6), atol=1e-12)


# tangent space

def test_projection_examples():
    Q = gr_from_basis(np.array([1.0, 0.0]))
    assert np.allclose(gr_tangent_project(Q, Q.Q).X, 0)
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(gr_tangent_project(Q, S).X, S)
    assert np.allclose(gr_tangent_project(Q, np.diag([5.0, 7.0])).X, 0)


def test_projection_rejects_asymmetric():
    Q = gr_from_basis(np.array([1.0, 0.0]))
    with pytest.raises(NotSymmetric):
        gr_tangent_project(Q, np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=40)
@given(st.integers(2, 12), st.data())
def test_projection_is_tangent_and_idempotent(n, data):
    k = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    p = random_point(n, k, rng)
    X = gr_tangent_project(p, rand_sym(n, rng))
    assert np.linalg.norm(X.X @ p.Q + p.Q @ X.X) <= 1e-12
    assert abs(np.trace(X.X)) <= 1e-12
    assert np.linalg.norm(gr_tangent_project(p, X.X).X - X.X) <= 1e-12


def test_metric_examples():
    p = gr_from_basis(np.array([1.0, 0.0]))
    Z = GrTangent(np.zeros((2, 2)), p)
    assert gr_metric(Z, Z) == 0
    b, c = 0.7, -1.3
    X = GrTangent(np.array([[0.0, b], [b, 0.0]]), p)
    Y = GrTangent(np.array([[0.0, c], [c, 0.0]]), p)
    assert np.isclose(gr_metric(X, Y), 2 * b * c)


def test_norm_is_sqrt2_block_norm():
    rng = np.random.default_rng(3)
    for _ in range(10):
        p = random_point(7, 3, rng)
        X = random_tangent(p, rng)
        B = gr_tangent_block(X)
        assert np.isclose(np.sqrt(gr_metric(X, X)), np.sqrt(2) * np.linalg.norm(B))


def test_metric_base_mismatch():
    rng = np.random.default_rng(4)
    p, q = random_point(4, 2, rng), random_point(4, 2, rng)
    with pytest.raises(BaseMismatch):
        gr_metric(random_tangent(p, rng), random_tangent(q, rng))


# geodesics

def test_geodesic_examples():
    p = gr_from_basis(np.array([1.0, 0.0]))
    Z = GrTangent(np.zeros((2, 2)), p)
    assert np.allclose(gr_geodesic(p, Z, 0.8).Q, p.Q)
    X = GrTangent(np.array([[0.0, np.pi], [np.pi, 0.0]]), p)
    assert np.allclose(gr_geodesic(p, X, 1.0).Q, np.diag([-1, 1]), atol=1e-12)


def test_geodesic_stays_on_manifold():
    rng = np.random.default_rng(5)
    p = random_point(6, 2, rng)
    X = random_tangent(p, rng)
    for t in (0.1, 0.5, 1.0):
        g = gr_geodesic(p, X, t)
        assert np.linalg.norm(g.Q @ g.Q - np.eye(6)) <= 1e-10


def test_geodesic_initial_velocity():
    rng = np.random.default_rng(6)
    p = random_point(8, 3, rng)
    X = random_tangent(p, rng)
    h = 1e-4
    fd = (gr_geodesic(p, X, h).Q - gr_geodesic(p, X, -h).Q) / (2 * h)
    assert np.linalg.norm(fd - X.X) <= 1e-6 * np.linalg.norm(X.X)


def test_geodesic_acceleration_is_normal():
    rng = np.random.default_rng(7)
    p = random_point(7, 2, rng)
    X = random_tangent(p, rng)
    h = 1e-3
    for t in (0.0, 0.4, 1.1):
        q = gr_geodesic(p, X, t)
        acc = (gr_geodesic(p, X, t + h).Q - 2 * q.Q + gr_geodesic(p, X, t - h).Q) / h**2
        assert np.linalg.norm(gr_tangent_project(q, acc).X) <= 1e-4


def test_geodesic_base_mismatch():
    rng = np.random.default_rng(8)
    p, q = random_point(4, 1, rng), random_point(4, 1, rng)
    with pytest.raises(BaseMismatch):
        gr_geodesic(p, random_tangent(q, rng), 1.0)


# transport

def test_transport_at_zero_is_identity():
    rng = np.random.default_rng(9)
    p = random_point(6, 2, rng)
    X, Y = random_tangent(p, rng), random_tangent(p, rng)
    assert np.allclose(gr_transport(p, X, Y, 0.0).X, Y.X, atol=1e-13)


def test_self_transport_is_velocity():
    rng = np.random.default_rng(10)
    p = random_point(6, 2, rng)
    X = random_tangent(p, rng)
    t, h = 0.7, 1e-5
    vel = (gr_geodesic(p, X, t + h).Q - gr_geodesic(p, X, t - h).Q) / (2 * h)
    Yt = gr_transport(p, X, X, t)
    assert np.linalg.norm(Yt.X - vel) <= 1e-6 * np.linalg.norm(vel)
    assert np.isclose(gr_metric(Yt, Yt), gr_metric(X, X), rtol=1e-12)


def test_transport_isometry_and_tangency():
    rng = np.random.default_rng(11)
    p = random_point(6, 2, rng)
    X, Y, Z = (random_tangent(p, rng) for _ in range(3))
    ref = gr_metric(Y, Z)
    for t in np.linspace(0, 1, 6):
        Yt, Zt = gr_transport(p, X, Y, t), gr_transport(p, X, Z, t)
        assert abs(gr_metric(Yt, Zt) - ref) <= 1e-10
        Q = gr_geodesic(p, X, t).Q
        assert np.allclose(Yt.base.Q, Q, atol=1e-12)
        assert np.linalg.norm(Yt.X @ Q + Q @ Yt.X) <= 1e-10


def test_transport_is_parallel():
    # the tangential part of dY/dt vanishes along the geodesic
    rng = np.random.default_rng(12)
    p = random_point(7, 3, rng)
    X, Y = random_tangent(p, rng), random_tangent(p, rng)
    t, h = 0.5, 1e-5
    dY = (gr_transport(p, X, Y, t + h).X - gr_transport(p, X, Y, t - h).X) / (2 * h)
    q = gr_geodesic(p, X, t)
    assert np.linalg.norm(gr_tangent_project(q, dY).X) <= 1e-6


# linear objective

def test_linear_grad_examples():
    A = np.diag([3.0, 1.0])
    assert np.allclose(gr_linear_grad(A, gr_from_basis(np.array([1.0, 0.0]))).X, 0)
    p = gr_from_basis(np.array([1.0, 1.0]) / np.sqrt(2))
    G = gr_linear_grad(A, p)
    assert np.allclose(G.X, np.diag([1, -1]))
    assert np.isclose(gr_metric(G, G), 2)
    S = np.array([[0.0, 2.0], [-2.0, 0.0]])
    assert np.allclose(gr_linear_grad(S, p).X, 0)


def test_linear_grad_matches_directional_derivative():
    rng = np.random.default_rng(13)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        k = int(rng.integers(1, n))
        p = random_point(n, k, rng)
        A = rng.standard_normal((n, n))
        X = random_tangent(p, rng)
        h = 1e-5
        fd = (gr_linear_value(A, gr_geodesic(p, X, h)) - gr_linear_value(A, gr_geodesic(p, X, -h))) / (2 * h)
        assert abs(fd - gr_metric(gr_linear_grad(A, p), X)) <= 1e-6 * max(1.0, abs(fd))


def test_linear_max_examples():
    A = np.diag([3.0, 1.0])
    Qs = gr_linear_max(A, 1)
    assert np.allclose(Qs.Q, np.diag([1, -1]))
    assert np.isclose(gr_linear_value(A, Qs), 2)
    Q = gr_linear_max(np.eye(5), 2)
    assert np.isclose(gr_linear_value(np.eye(5), Q), 2 * 2 - 5)
    with pytest.raises(DimensionError):
        gr_linear_max(A, 2)


def test_lemma_inequality_worked_point():
    A = np.diag([3.0, 1.0])
    p = gr_from_basis(np.array([1.0, 1.0]) / np.sqrt(2))
    lhs = 2 * 3.0 * (gr_linear_optimum(A, 1) - gr_linear_value(A, p))
    G = gr_linear_grad(A, p)
    assert np.isclose(lhs, 12) and np.isclose(gr_metric(G, G), 2)


@settings(max_examples=50)
@given(st.integers(2, 20), st.data())
def test_lemma_inequality(n, data):
    k = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    A = rng.standard_normal((n, n))
    p = random_point(n, k, rng)
    lam = np.linalg.norm((A + A.T) / 2, 2)
    G = gr_linear_grad(A, p)
    f_star = gr_linear_value(A, gr_linear_max(A, k))
    assert np.isclose(f_star, gr_linear_optimum(A, k))
    assert 2 * lam * (f_star - gr_linear_value(A, p)) - gr_metric(G, G) >= -1e-10

import numpy as np
import pytest
from scipy.linalg import expm

from flagopt.errors import NotSkew
from flagopt.flag import (
    CLASSICAL,
    MODIFIED,
    AmbientTuple,
    classical_velocity,
    embed,
    flag_signature,
    flag_validate,
    geodesic,
    geodesic_classical,
    geodesic_modified,
    metric_for,
    norm,
    pi_offdiag,
    project_tangent,
    random_flag,
    random_tangent,
    same_flag,
    tangent_to_ambient,
    zero_tangent,
)
from flagopt.grassmann import GrTangent, gr_from_basis, gr_geodesic
from flagopt.matcore import BlockPartition

EMBS = (CLASSICAL, MODIFIED)


def setup(n, dims, seed, scale=0.5):
    rng = np.random.default_rng(seed)
    sig = flag_signature(n, dims)
    p = random_flag(sig, rng)
    return p, random_tangent(p, rng, scale)


def ambient(q, emb):
    return np.stack(list(embed(q, emb)))


def test_pi_offdiag_examples():
    P = BlockPartition((1, 2))
    A = np.array([[0.0, 1, 2], [-1, 0, 3], [-2, -3, 0]])
    assert np.array_equal(pi_offdiag(A, P), [[0, 1, 2], [-1, 0, 0], [-2, 0, 0]])
    with pytest.raises(NotSkew):
        pi_offdiag(np.ones((3, 3)), P)
    with pytest.raises(NotSkew):
        pi_offdiag(np.zeros((2, 2)), P)


@pytest.mark.parametrize("emb", EMBS)
def test_zero_velocity_is_constant(emb):
    p, _ = setup(6, (1, 3), 0)
    q = geodesic(p, zero_tangent(p), 0.9, emb)
    assert np.allclose(q.V, p.V, atol=1e-15)


@pytest.mark.parametrize("emb", EMBS)
def test_initial_velocity(emb):
    p, xi = setup(7, (2, 3), 1)
    h = 1e-4
    fd = (ambient(geodesic(p, xi, h, emb), emb) - ambient(geodesic(p, xi, -h, emb), emb)) / (2 * h)
    X = np.stack(list(tangent_to_ambient(xi, emb)))
    assert np.linalg.norm(fd - X) <= 1e-6 * np.linalg.norm(X)
    # frame derivative at zero
    dV = (geodesic(p, xi, h, emb).V - geodesic(p, xi, -h, emb).V) / (2 * h)
    assert np.linalg.norm(dV - p.V @ xi.lam) <= 1e-6 * np.linalg.norm(xi.lam)


@pytest.mark.parametrize(
    "emb,n,dims", [(CLASSICAL, 7, (2, 3)), (MODIFIED, 7, (2, 3)), (CLASSICAL, 5, (1, 2)), (MODIFIED, 8, (1, 3, 6))]
)
def test_acceleration_is_normal(emb, n, dims):
    p, xi = setup(n, dims, 2)
    h = 1e-4
    for t in (0.0, 0.3, 0.7, 1.2, 2.0):
        q = geodesic(p, xi, t, emb)
        acc = (
            ambient(geodesic(p, xi, t + h, emb), emb)
            - 2 * ambient(q, emb)
            + ambient(geodesic(p, xi, t - h, emb), emb)
        ) / h**2
        tang = project_tangent(q, AmbientTuple(tuple(acc)), emb)
        assert np.linalg.norm(tang.lam) <= 1e-6 * max(1.0, np.linalg.norm(acc))


@pytest.mark.parametrize("emb", EMBS)
def test_geodesic_stays_on_flag(emb):
    p, xi = setup(9, (2, 5), 3, scale=1.0)
    for t in (0.5, 3.0):
        q = geodesic(p, xi, t, emb)
        assert flag_validate(embed(q, emb), p.sig, tol=1e-10)


def test_modified_geodesic_reverses_and_has_constant_speed():
    p, xi = setup(8, (1, 3, 6), 4)
    q = geodesic_modified(p, xi, 1.0)
    # the velocity at q is xi's coordinates in the new frame
    back = geodesic_modified(q, type(xi)(q, -xi.lam), 1.0)
    assert np.linalg.norm(back.V - p.V) <= 1e-12
    g = metric_for(p.sig, MODIFIED)
    h = 1e-5
    for t in (0.0, 0.5, 1.5):
        dV = (geodesic_modified(p, xi, t + h).V - geodesic_modified(p, xi, t - h).V) / (2 * h)
        lam_t = geodesic_modified(p, xi, t).V.T @ dV
        assert np.allclose(lam_t, xi.lam, atol=1e-8)
        assert np.isclose(norm(type(xi)(p, lam_t), g), norm(xi, g), rtol=1e-8)


def test_d1_classical_matches_grassmann():
    p, xi = setup(6, (2,), 5, scale=0.8)
    gp = gr_from_basis(p.block(0))
    X = tangent_to_ambient(xi, CLASSICAL)[0]
    for t in (0.3, 1.0, 2.5):
        Q = embed(geodesic_classical(p, xi, t), CLASSICAL)[0]
        assert np.linalg.norm(Q - gr_geodesic(gp, GrTangent(X, gp), t).Q) <= 1e-10


def test_classical_velocity_moving_frame():
    p, xi = setup(8, (2, 5), 6)
    h = 1e-5
    for t in (0.0, 0.4, 1.3):
        dV = (geodesic_classical(p, xi, t + h).V - geodesic_classical(p, xi, t - h).V) / (2 * h)
        lam_t = geodesic_classical(p, xi, t).V.T @ dV
        assert np.allclose(lam_t, classical_velocity(xi, t), atol=1e-8)


def test_d2_block_evolution():
    # A stays fixed and (B; C) rotates by exp(t [[0, A], [-A^T, 0]])
    p, xi = setup(6, (1, 3), 7)
    m1, m2 = 1, 2
    A = xi.lam[:m1, m1:m1 + m2]
    BC0 = xi.lam[: m1 + m2, m1 + m2:]
    G = np.zeros((m1 + m2, m1 + m2))
    G[:m1, m1:] = A
    G[m1:, :m1] = -A.T
    for t in (0.2, 1.0, 2.7):
        lam_t = classical_velocity(xi, t)
        assert np.array_equal(lam_t[:m1, m1:m1 + m2], A)
        assert np.allclose(lam_t[: m1 + m2, m1 + m2:], expm(t * G) @ BC0, atol=1e-12)


def test_classical_and_modified_agree_for_d1_shape():
    # with one proper subspace both geodesics trace the same flag when L0 = 0
    p, xi = setup(5, (2,), 8)
    for t in (0.5, 1.7):
        assert same_flag(geodesic_classical(p, xi, t), geodesic_modified(p, xi, t))


def test_bad_embedding():
    p, xi = setup(4, (1, 2), 9)
    with pytest.raises(ValueError):
        geodesic(p, xi, 1.0, "hyperbolic")

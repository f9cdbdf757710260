import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from implode.kostant import (KostantPoint, grothendieck_mu, matrix_minimal_polynomial_degree,
                             minimal_polynomial_degree, realize_orbit, realize_orbit_quiver, rho, same_fiber,
                             su2_invariants, su2_torus_reduction)
from implode.linalg import is_injective, is_surjective
from implode.quiver import (QuiverError, endomorphism_Xk, moment_level, predicted_eigenvalues,
                            traceless)
from implode.standardization import reduce_to_cartan, standardize_beta

from conftest import cplx, seeds, solution


def random_sl(rng, n):
    while True:
        g = cplx(rng, n, n)
        if np.linalg.cond(g) < 1e3:
            return g / np.linalg.det(g) ** (1 / n)


def test_rho_examples():
    assert not rho(np.zeros((3, 3))).any()
    a = 0.8 + 0.3j
    assert rho(np.diag([a, -a]))[0] == pytest.approx(-a * a)


@given(seeds, st.integers(2, 5))
def test_rho_conjugation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    x = traceless(cplx(rng, n, n))
    g = random_sl(rng, n)
    assert same_fiber(x, g @ x @ np.linalg.inv(g))


def test_same_fiber_examples():
    a = 1.0
    assert not same_fiber(np.diag([a, -a]), np.array([[0, 1], [0, 0]]))
    rng = np.random.default_rng(3)
    g = random_sl(rng, 2)
    y = g @ np.array([[0, 2.0], [0, 0]]) @ np.linalg.inv(g)
    assert same_fiber(np.array([[0, 1], [0, 0]]), y)


def test_rho_matches_predicted_kappas():
    q = solution(8, 3)
    sf = standardize_beta(q)
    pred = predicted_eigenvalues(moment_level(q), q.dims)
    x0 = traceless(sf.X)
    poly = np.poly(np.array(pred.kappa))
    np.testing.assert_allclose(rho(x0), poly[2:], atol=1e-8)


def test_grothendieck_examples():
    x = np.triu(cplx(np.random.default_rng(0), 3, 3))
    np.testing.assert_allclose(grothendieck_mu(np.eye(3), x), x)
    with pytest.raises(QuiverError):
        grothendieck_mu(np.zeros((3, 3)), x)
    with pytest.raises(QuiverError):
        grothendieck_mu(2 * np.eye(3), x)


@given(seeds)
def test_grothendieck_preserves_rho_of_diagonal(seed):
    rng = np.random.default_rng(seed)
    d = traceless(np.diag(cplx(rng, 3)))
    x = d + np.triu(cplx(rng, 3, 3), 1)
    q = random_sl(rng, 3)
    assert same_fiber(grothendieck_mu(q, x), d)


def test_grothendieck_regular_fiber_single_representative():
    rng = np.random.default_rng(5)
    d = np.diag([1.0, 2.0j, -1.0 - 2.0j])
    x = d + np.triu(cplx(rng, 3, 3), 1)
    y = grothendieck_mu(random_sl(rng, 3), x)
    np.testing.assert_allclose(np.sort_complex(np.linalg.eigvals(y)), np.sort_complex(np.diag(d)), atol=1e-9)
    np.testing.assert_allclose(reduce_to_cartan(x).D, d, atol=1e-12)


def test_kostant_point_flags():
    p = KostantPoint.from_matrix(np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex))
    assert p.nilpotent and p.regular and p.multiplicities == (3,)
    p = KostantPoint.from_matrix(np.zeros((2, 2)))
    assert p.nilpotent and not p.regular
    with pytest.raises(QuiverError):
        KostantPoint.from_matrix(np.eye(2))


# ------------------------------------------------------------ realization


def test_realize_zero():
    q = realize_orbit_quiver(np.zeros((3, 3)))
    assert q.r == 1 and q.dims.dims == (3,)


def test_realize_regular_nilpotent_n2():
    y = np.array([[0, 1], [0, 0]], dtype=complex)
    q = realize_orbit_quiver(y)
    assert q.dims.dims == (1, 2)
    np.testing.assert_allclose(q.alpha[0] @ q.beta[0], y, atol=1e-12)


def test_realize_regular_semisimple_n3():
    w = np.exp(2j * np.pi / 3)
    y = 1.3 * np.diag([1, w, w * w])
    real = realize_orbit(y)
    assert real.quiver.dims.dims == (1, 2, 3)
    ev = np.linalg.eigvals(traceless(endomorphism_Xk(real.quiver, 1)))
    np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex(np.diag(y)), atol=1e-9)


@given(seeds, st.integers(1, 5))
def test_realize_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    y = traceless(cplx(rng, n, n))
    q = realize_orbit_quiver(y)
    assert q.dims.strictly_ordered
    assert all(is_injective(a) for a in q.alpha) and all(is_surjective(b) for b in q.beta)
    assert moment_level(q).residual_c < 1e-9 * max(1.0, q.norm() ** 2)
    if q.r > 1:
        np.testing.assert_allclose(traceless(endomorphism_Xk(q, 1)), y, atol=1e-9 * max(1.0, np.linalg.norm(y)))


@given(seeds)
def test_realized_eigenvalues_match_predictions(seed):
    rng = np.random.default_rng(seed)
    y = traceless(cplx(rng, 4, 4))
    q = realize_orbit_quiver(y)
    pred = predicted_eigenvalues(moment_level(q), q.dims)
    ev = np.linalg.eigvals(y)
    for k in pred.kappa:
        assert np.min(np.abs(ev - k)) < 1e-7 * max(1.0, np.linalg.norm(y))


# ------------------------------------------------------------ minimal polynomial


def test_minpoly_su2():
    assert minimal_polynomial_degree(solution(2, 2)) == 2


def test_minpoly_regular_nilpotent():
    q = solution(4, 3, lam=[0, 0])
    assert minimal_polynomial_degree(q) == 3
    x = endomorphism_Xk(q, 1)
    assert matrix_minimal_polynomial_degree(x) == 3


def test_minpoly_subregular():
    y = np.zeros((3, 3), dtype=complex)
    y[0, 2] = 1.0
    q = realize_orbit_quiver(y)
    assert q.dims.dims == (1, 3)
    assert minimal_polynomial_degree(q) == 2


def test_minpoly_inconsistent_ranks():
    from implode.quiver import QuiverRep

    with pytest.raises(QuiverError):
        minimal_polynomial_degree(QuiverRep.zero((1, 2, 3)))


# ------------------------------------------------------------ SU(2) invariants


def test_su2_identity_examples():
    q11, q21, a, y1, y2, res = su2_invariants(np.eye(2), 1, 0)
    assert (q11, q21, a, y1, y2) == (1, 0, 1, 2, 0) and res == 0
    _, _, _, y1, y2, res = su2_invariants(np.eye(2), 0, 1)
    assert (y1, y2, res) == (0, -1, 0)
    w, y, z, res = su2_torus_reduction(1, 0, 2, 0, 1)
    assert (w, y, z, res) == (2, 0, 0, 0)


def test_su2_rejects_bad_det():
    with pytest.raises(QuiverError):
        su2_invariants(2 * np.eye(2), 1, 0)


@given(seeds)
def test_su2_unipotent_invariance(seed):
    rng = np.random.default_rng(seed)
    g = random_sl(rng, 2)
    a, b = cplx(rng, 2)
    t = complex(cplx(rng, 1)[0])
    n = np.array([[1, -t], [0, 1]])
    before = su2_invariants(g, a, b)[:5]
    after = su2_invariants(g @ n, a, b - 2 * a * t)[:5]
    np.testing.assert_allclose(before, after, atol=1e-10 * max(1.0, abs(t)) ** 2 * max(1, abs(a), abs(b)) ** 2)


@given(seeds)
def test_su2_identities_hold_everywhere(seed):
    rng = np.random.default_rng(seed)
    g = random_sl(rng, 2)
    a, b = cplx(rng, 2)
    q11, q21, a, y1, y2, res = su2_invariants(g, a, b)
    scale = max(1.0, np.linalg.norm(g), abs(a), abs(b))
    assert res < 1e-10 * scale ** 2
    assert su2_torus_reduction(q11, q21, y1, y2, a)[3] < 1e-9 * scale ** 6
    assert su2_torus_reduction(q11, q21, y1, y2, 0)[3] >= 0
    _, _, _, y1, y2, _ = su2_invariants(g, 0, b)
    assert su2_torus_reduction(q11, q21, y1, y2, 0)[3] < 1e-9 * scale ** 6

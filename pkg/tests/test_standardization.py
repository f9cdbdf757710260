import numpy as np
import pytest
from hypothesis import given

from implode.quiver import DimensionVector, QuiverError, QuiverRep, endomorphism_Xk, moment_level
from implode.standardization import (ParabolicFlag, chi_character, diagonal_pattern, reconstruct_from_X,
                                     reduce_to_cartan, standard_beta, standardize_beta)

from conftest import cplx, seeds, solution


def test_standard_input_has_identity_gauge():
    q = solution(0, 3)
    std = standardize_beta(q).quiver
    again = standardize_beta(std)
    for g in again.gauge:
        np.testing.assert_allclose(g, np.eye(g.shape[0]), atol=1e-10)


def test_su2_standardization():
    q = QuiverRep(DimensionVector((1, 2)), (np.array([[1.0], [2.0]]),), (np.array([[3.0, -1.0]]),))
    sf = standardize_beta(q)
    np.testing.assert_array_equal(sf.quiver.beta[0], [[0, 1]])
    assert abs(sf.X[1, 0]) < 1e-12 and abs(sf.X[0, 0]) < 1e-12
    assert sf.lambda_c[0] == pytest.approx(moment_level(q).lambda_c[0])


@given(seeds)
def test_standardize_then_reconstruct(seed):
    q = solution(seed)
    sf = standardize_beta(q)
    for b, i in zip(sf.quiver.beta, range(q.r - 1)):
        np.testing.assert_array_equal(b, standard_beta(q.dims.dims, i))
    back = reconstruct_from_X(sf.X, q.dims)
    scale = max(1.0, sf.quiver.norm())
    assert back.allclose(sf.quiver, atol=1e-8 * scale)
    lv = moment_level(back)
    assert lv.residual_c < 1e-9 * scale ** 2


@given(seeds)
def test_diagonal_is_partial_sums(seed):
    q = solution(seed)
    sf = standardize_beta(q)
    expected = diagonal_pattern(q.dims.dims, sf.lambda_c)
    np.testing.assert_allclose(np.diag(sf.X), expected, atol=1e-8 * max(1.0, np.linalg.norm(sf.X)))


def test_reconstruct_zero_n2():
    q = reconstruct_from_X(np.zeros((2, 2)), (1, 2))
    assert not q.alpha[0].any()
    np.testing.assert_array_equal(q.beta[0], [[0, 1]])


def test_reconstruct_nilpotent_su2():
    t = 2.5 - 1j
    q = reconstruct_from_X(np.array([[0, t], [0, 0]]), (1, 2))
    np.testing.assert_allclose(q.alpha[0], [[t], [0]])
    np.testing.assert_allclose(endomorphism_Xk(q, 1), [[0, t], [0, 0]])


def test_reconstruct_reads_level():
    lam = 0.4 + 0.9j
    q = reconstruct_from_X(np.array([[0, 1.7], [0, -lam]]), (1, 2))
    assert moment_level(q).lambda_c[0] == pytest.approx(lam)


def test_reconstruct_rejects_bad_diagonal():
    with pytest.raises(QuiverError):
        reconstruct_from_X(np.array([[0, 1, 0], [0, 1, 0], [0, 0, 5]]), (1, 3))


def test_zero_levels_give_nondecreasing_blocks():
    q = solution(11, 4, lam=[0, 0, 0])
    sf = standardize_beta(q)
    k = ParabolicFlag.from_dims(q.dims).k
    assert list(k) == sorted(k)
    assert np.allclose(np.diag(sf.X), 0, atol=1e-9)


def test_standardize_requires_surjective_beta():
    with pytest.raises(QuiverError):
        standardize_beta(QuiverRep.zero((1, 2)))


# ------------------------------------------------------------ Cartan reduction


def test_cartan_diagonal_input():
    red = reduce_to_cartan(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(red.N, np.eye(3))
    assert red.regular


def test_cartan_su3_regular():
    a, d, f, b, e, c = 1.0, -0.5j, 2.0, 0.7, -1.3, 0.25 + 1j
    x = np.array([[a, b, c], [0, d, e], [0, 0, f]])
    red = reduce_to_cartan(x)
    np.testing.assert_allclose(red.D, np.diag([a, d, f]), atol=1e-12)
    np.testing.assert_allclose(np.linalg.inv(red.N) @ red.D @ red.N, x, atol=1e-12)
    # N upper unitriangular
    np.testing.assert_allclose(np.tril(red.N), np.eye(3), atol=0)


def test_cartan_su3_repeated_root():
    a, f, b = 1.0, -2.0, 0.6
    x = np.array([[a, b, 0.4], [0, a, 0.9], [0, 0, f]])
    red = reduce_to_cartan(x)
    assert not red.regular
    assert red.D[0, 1] == pytest.approx(b)
    assert abs(red.D[0, 2]) < 1e-12 and abs(red.D[1, 2]) < 1e-12


@given(seeds)
def test_cartan_conjugation_property(seed):
    rng = np.random.default_rng(seed)
    x = np.triu(cplx(rng, 4, 4))
    red = reduce_to_cartan(x)
    back = np.linalg.inv(red.N) @ red.D @ red.N
    assert np.linalg.norm(back - x) < 1e-8 * max(1.0, np.linalg.norm(x)) * np.linalg.cond(red.N)


def test_cartan_rejects_lower():
    with pytest.raises(QuiverError):
        reduce_to_cartan(np.array([[0, 0], [1, 0]]))


# ------------------------------------------------------------ chi


def test_chi_identity():
    flag = ParabolicFlag.from_dims((1, 2, 3))
    np.testing.assert_allclose(chi_character(np.eye(3), flag), [1, 1])


def test_chi_torus_n2():
    s = 1.5 - 0.5j
    out = chi_character(np.diag([1 / s, s]), ParabolicFlag.from_dims((1, 2)))
    assert out[0] == pytest.approx(s)


def test_chi_block_scalar():
    c = np.exp(0.3j)
    c2 = c ** (-2)
    p = np.diag([c, c, c2])
    out = chi_character(p, ParabolicFlag.from_dims((1, 3)))
    assert out[0] == pytest.approx(c2)


@given(seeds)
def test_chi_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    flag = ParabolicFlag.from_dims((1, 3, 4))

    def sample():
        p = cplx(rng, 4, 4)
        p[1:, 0] = 0  # bottom-right 3 block
        p[3:, :3] = 0  # bottom-right 1 block
        return p

    p, q = sample(), sample()
    lhs = chi_character(p @ q, flag)
    rhs = chi_character(p, flag) * chi_character(q, flag)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


def test_chi_rejects_non_parabolic():
    with pytest.raises(QuiverError):
        chi_character(np.ones((2, 2)), ParabolicFlag.from_dims((1, 2)))


def test_flag_dimensions():
    full = ParabolicFlag.from_dims((1, 2, 3))
    assert full.dim_P == 5 and full.dim_PP == 3 and full.dim_annihilator == 5
    trivial = ParabolicFlag.from_dims((3,))
    assert trivial.dim_P == 8 and trivial.dim_annihilator == 0

import numpy as np
import pytest
from hypothesis import given, settings

from implode.decomposition import (DecompositionError, contract_edge, eigenspace_split, expand_edge,
                                   gl_decompose, is_lambda_regular, lambda_relation)
from implode.quiver import (DimensionVector, QuiverError, QuiverRep, endomorphism_Xk, moment_level,
                            random_moment_solution)
from implode.stability import stabilizer_is_trivial
from implode.stratification import StratumLabel, enumerate_strata, random_stratum_member

from conftest import cplx, seeds, solution


def scalar_chain(m, avals, bvals):
    p = len(avals) + 1
    alphas = tuple(a * np.eye(m, dtype=complex) for a in avals)
    betas = tuple(b * np.eye(m, dtype=complex) for b in bvals)
    return QuiverRep(DimensionVector((m,) * p), alphas, betas)


# ------------------------------------------------------------ eigenspaces


def test_nilpotent_single_block():
    q = solution(0, 3, lam=[0, 0])
    split = eigenspace_split(q)
    assert len(split.blocks) == 1
    assert split.blocks[0].quiver.dims == q.dims


def test_su2_two_blocks():
    q = QuiverRep(DimensionVector((1, 2)), (np.array([[1.0], [2.0]]),), (np.array([[3.0, 1.0]]),))
    split = eigenspace_split(q)
    sizes = sorted(b.quiver.dims.dims for b in split.blocks)
    assert sizes == [(0, 1), (1, 1)]
    taus = sorted(abs(b.taus[1]) for b in split.blocks)
    assert taus[0] < 1e-12 and taus[1] == pytest.approx(5)


def test_stable_plus_scalar_two_blocks():
    rng = np.random.default_rng(2)
    label = StratumLabel({(2, 2)}, ((2, 1),), 3)
    q = random_stratum_member(label, rng)
    split = eigenspace_split(q)
    assert sum(b.quiver.dims.dims[0] for b in split.blocks) == 1
    for i in range(3):
        assert sum(b.quiver.dims.dims[i] for b in split.blocks) == i + 1


@given(seeds)
def test_split_reassembles(seed):
    q = solution(seed)
    split = eigenspace_split(q)
    for i in range(q.r):
        assert sum(b.quiver.dims[i] for b in split.blocks) == q.dims[i]
    for i in range(q.r - 1):
        t0, t1 = split.transforms[i], split.transforms[i + 1]
        blocks_a = np.linalg.inv(t1) @ q.alpha[i] @ t0
        rebuilt = t1 @ blocks_a @ np.linalg.inv(t0)
        scale = max(1.0, q.norm()) * np.linalg.cond(t0) * np.linalg.cond(t1)
        assert np.linalg.norm(rebuilt - q.alpha[i]) < 1e-8 * scale
    assert split.leakage < 1e-8 * max(1.0, q.norm())


def test_split_rejects_non_solutions():
    rng = np.random.default_rng(0)
    q = QuiverRep(DimensionVector((1, 2, 3)), (cplx(rng, 2, 1), cplx(rng, 3, 2)), (cplx(rng, 1, 2), cplx(rng, 2, 3)))
    with pytest.raises(DecompositionError):
        eigenspace_split(q)


# ------------------------------------------------------------ contraction


def test_contract_scalar_chain_to_single_node():
    q = scalar_chain(2, [1.5, -0.5j], [0.3, 2.0])
    out = contract_edge(contract_edge(q, 1), 1)
    assert out.dims.dims == (2,) and out.r == 1


def test_contract_merges_levels():
    q = QuiverRep(DimensionVector((2, 2, 3)), (cplx(np.random.default_rng(1), 2, 2), cplx(np.random.default_rng(2), 3, 2)),
                  (cplx(np.random.default_rng(3), 2, 2), cplx(np.random.default_rng(4), 2, 3)))
    out = contract_edge(q, 1)
    assert out.dims.dims == (2, 3)
    np.testing.assert_allclose(out.alpha[0], q.alpha[1] @ q.alpha[0])
    np.testing.assert_allclose(out.beta[0], np.linalg.inv(q.alpha[0]) @ q.beta[1])


@given(seeds)
def test_contract_then_expand(seed):
    rng = np.random.default_rng(seed)
    lam = cplx(rng, 2)
    # level 1 -> 2 is an isomorphism of C^2; a solution over (2, 2, 3)
    q = random_moment_solution((2, 2, 3), lam, rng)
    if np.linalg.cond(q.alpha[0]) > 1e6:
        return
    contracted = contract_edge(q, 1)
    back = expand_edge(contracted, 1, q.alpha[0], lam[1])
    scale = max(1.0, q.norm()) * np.linalg.cond(q.alpha[0])
    assert back.allclose(q, atol=1e-9 * scale)


@given(seeds)
def test_contract_right_end_keeps_traceless_X(seed):
    rng = np.random.default_rng(seed)
    lam = cplx(rng, 2)
    q = random_moment_solution((1, 3, 3), lam, rng)
    if np.linalg.cond(q.alpha[1]) > 1e6:
        return
    out = contract_edge(q, 2)
    x, x2 = endomorphism_Xk(q, 1), endomorphism_Xk(out, 1)
    tol = 1e-8 * max(1.0, np.linalg.norm(x)) * np.linalg.cond(q.alpha[1])
    np.testing.assert_allclose(x2 - x, lam[1] * np.eye(3), atol=tol)


def test_contract_level_sum():
    rng = np.random.default_rng(7)
    lam = [0.5 + 1j, -0.2j]
    q = random_moment_solution((2, 2, 3), lam, rng)
    out = contract_edge(q, 1)
    assert moment_level(out).lambda_c[0] == pytest.approx(sum(lam))


def test_contract_requires_invertible():
    q = QuiverRep.zero((1, 2, 3))
    with pytest.raises(QuiverError):
        contract_edge(q, 1)
    with pytest.raises(QuiverError):
        contract_edge(QuiverRep.zero((2, 2)), 1)


@given(seeds)
def test_vanishing_partial_sum_identity(seed):
    rng = np.random.default_rng(seed)
    c = complex(*rng.standard_normal(2))
    q = random_moment_solution((1, 2, 3, 4), [complex(*rng.standard_normal(2)), c, -c], rng)
    a, b = q.alpha, q.beta
    lhs = a[0] @ b[0] @ b[1]
    rhs = b[1] @ b[2] @ a[2]
    assert np.linalg.norm(lhs - rhs) < 1e-9 * max(1.0, q.norm()) ** 3


# ------------------------------------------------------------ lambda relation


def test_relation_all_zero():
    assert lambda_relation([(0, 0)] * 3) == {(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)}


def test_relation_cancelling_pair():
    assert lambda_relation([(0, 1), (0, -1)]) == {(1, 2)}


@given(seeds)
def test_relation_generic_is_empty(seed):
    rng = np.random.default_rng(seed)
    triples = [(float(rng.standard_normal()), complex(*rng.standard_normal(2))) for _ in range(4)]
    assert lambda_relation(triples) == set()
    assert is_lambda_regular(triples)


def test_regularity_detects_real_obstruction():
    assert not is_lambda_regular([(1.0, 0j)])
    assert is_lambda_regular([(0.0, 0j)])


# ------------------------------------------------------------ gl-decomposition


def test_gl_stable_input():
    rng = np.random.default_rng(1)
    q = random_stratum_member(StratumLabel(set(), (), 3), rng)
    dec = gl_decompose(q)
    assert dec.stable_part.dims == q.dims and dec.scalars == ()


def test_gl_zero_n2():
    dec = gl_decompose(QuiverRep.zero((1, 2)))
    assert dec.stable_part.dims.dims == (0, 2)
    assert [(s.m, s.p, s.start) for s in dec.scalars] == [(1, 1, 1)]


@pytest.mark.parametrize("label", enumerate_strata(3), ids=str)
def test_gl_recovers_constructed_parts(label):
    rng = np.random.default_rng(11)
    q = random_stratum_member(label, rng)
    dec = gl_decompose(q)
    assert dec.stable_part.dims.dims == label.m
    got = sorted((s.start, s.end, s.m) for s in dec.scalars)
    assert got == sorted(label.chains())
    assert stabilizer_is_trivial(dec.stable_part)
    lv = moment_level(rotate_back(q, dec))
    for s in dec.scalars:
        for t, (a, b) in enumerate(zip(s.a, s.b)):
            assert abs(a * b - sum(lv.lambda_c[s.start + t:s.end])) < 1e-9 * max(1.0, q.norm() ** 2)


def rotate_back(q, dec):
    from implode.quiver import rotate

    return rotate(q, dec.rotation_used)


@settings(max_examples=10)
@given(seeds)
def test_gl_chain_scalars_match_levels(seed):
    rng = np.random.default_rng(seed)
    label = StratumLabel({(1, 2)}, ((1, 1),), 3)
    q = random_stratum_member(label, rng)
    dec = gl_decompose(q)
    assert [(s.start, s.end) for s in dec.scalars] == [(1, 2)]


def test_gl_rejects_non_solution():
    rng = np.random.default_rng(0)
    q = QuiverRep(DimensionVector((2, 3)), (cplx(rng, 3, 2),), (cplx(rng, 2, 3),))
    with pytest.raises(QuiverError):
        gl_decompose(q)

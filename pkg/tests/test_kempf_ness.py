import numpy as np
import pytest
from hypothesis import given, settings

from implode.kempf_ness import FlowConfig, flow_to_real_zero, polystable_probe, rho_drift
from implode.kostant import rho
from implode.quiver import DimensionVector, QuiverError, QuiverRep, endomorphism_Xk, moment_level, traceless
from implode.stability import Verdict, closed_orbit_tilde
from implode.stratification import Relation

from conftest import cplx, seeds, solution


def su2(alpha, beta):
    return QuiverRep(DimensionVector((1, 2)), (np.array(alpha, dtype=complex).reshape(2, 1),),
                     (np.array(beta, dtype=complex).reshape(1, 2),))


def test_config_validation():
    with pytest.raises(QuiverError):
        FlowConfig(group="G")
    with pytest.raises(QuiverError):
        FlowConfig(shrink=1.5)
    with pytest.raises(QuiverError):
        FlowConfig(step=0)


def test_solution_is_fixed():
    q = flow_to_real_zero(solution(0, 3)).quiver
    res = flow_to_real_zero(q)
    assert res.iterations == 0 and res.converged
    for g in res.gauge:
        np.testing.assert_array_equal(g, np.eye(g.shape[0]))


def test_su2_trivial_group_is_noop():
    q = su2([2, 0], [0, 1])
    res = flow_to_real_zero(q)
    assert res.iterations == 0 and res.quiver.allclose(q, atol=0)


@pytest.mark.parametrize("level", [0.5, -1.0, 0.0, 3.0])
def test_su2_htilde_closed_form(level):
    q = su2([2, 0], [0, 1])
    res = flow_to_real_zero(q, FlowConfig(group="Htilde", level=(level,)))
    assert res.converged
    a2 = abs(res.quiver.alpha[0][0, 0]) ** 2
    b2 = abs(res.quiver.beta[0][0, 1]) ** 2
    # scaling t keeps |alpha| |beta| = 2; the level fixes |beta|^2 - |alpha|^2
    assert b2 == pytest.approx((level + np.sqrt(level ** 2 + 16)) / 2, rel=1e-9)
    assert a2 * b2 == pytest.approx(4, rel=1e-9)
    assert moment_level(res.quiver).lambda_r[0] == pytest.approx(level, abs=1e-9)


def test_symplectic_balanced():
    rng = np.random.default_rng(3)
    q = QuiverRep(DimensionVector((1, 2, 3)), (cplx(rng, 2, 1), cplx(rng, 3, 2)),
                  (np.zeros((1, 2)), np.zeros((2, 3))))
    res = flow_to_real_zero(q)
    assert res.converged
    a = res.quiver.alpha
    balance = traceless(a[0] @ a[0].conj().T - a[1].conj().T @ a[1])
    assert np.linalg.norm(balance) < 1e-9


@settings(max_examples=20)
@given(seeds)
def test_flow_properties(seed):
    q = solution(seed)
    res = flow_to_real_zero(q)
    assert res.converged and res.residual < 1e-10
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    again = q.gauge(res.gauge)
    assert again.allclose(res.quiver, atol=1e-8 * max(1.0, q.norm()))
    assert rho_drift(q, res) < 1e-8 * max(1.0, np.linalg.norm(endomorphism_Xk(q, 1))) ** q.n
    assert moment_level(res.quiver).residual_c < 1e-8 * max(1.0, res.quiver.norm() ** 2)


@settings(max_examples=10)
@given(seeds)
def test_hs_flow_keeps_levels_on_relation(seed):
    rng = np.random.default_rng(seed)
    lam = cplx(rng, 2)
    q = solution(seed, 3, lam=lam)
    rel = Relation(frozenset({(1, 2)}))
    res = flow_to_real_zero(q, FlowConfig(group="HS", relation=rel))
    assert res.converged
    lr = moment_level(res.quiver).lambda_r
    assert abs(lr[0] + lr[1]) < 1e-9


def test_x_invariants_fixed_under_h():
    q = solution(9, 3)
    res = flow_to_real_zero(q)
    np.testing.assert_allclose(rho(traceless(endomorphism_Xk(res.quiver, 1))),
                               rho(traceless(endomorphism_Xk(q, 1))), atol=1e-8)


def test_nonconvergence_is_flagged():
    q = solution(2, 3)
    res = flow_to_real_zero(q, FlowConfig(max_iters=1))
    assert not res.converged and res.iterations == 1


# ------------------------------------------------------------ probe


def test_probe_zero():
    assert polystable_probe(QuiverRep.zero((1, 2))).verdict is Verdict.POLYSTABLE


def test_probe_surjective_beta():
    q = su2([0, 0], [1, 0])
    # SL(1) is trivial, so under H the quiver is already a zero
    assert polystable_probe(q).verdict is Verdict.POLYSTABLE
    # GL(1) scales beta to 0 at level 0: not closed, and the algebra agrees
    assert closed_orbit_tilde(q).verdict is Verdict.NOT_POLYSTABLE
    assert polystable_probe(q, FlowConfig(group="Htilde")).verdict is Verdict.NOT_POLYSTABLE


def test_probe_detects_divergence():
    # rank-one alpha on C^2 -> C^2 with beta = 0: not closed under GL(2)
    q = QuiverRep(DimensionVector((2, 2)), (np.array([[1, 0], [0, 0]], dtype=complex),),
                  (np.zeros((2, 2), dtype=complex),))
    assert closed_orbit_tilde(q).verdict is Verdict.NOT_POLYSTABLE
    v = polystable_probe(q, FlowConfig(group="Htilde"))
    assert v.verdict in (Verdict.NOT_POLYSTABLE, Verdict.INCONCLUSIVE)
    assert v.verdict is not Verdict.POLYSTABLE


@pytest.mark.parametrize("seed", range(12))
def test_probe_agrees_with_algebra(seed):
    rng = np.random.default_rng(seed)
    n1 = int(rng.integers(1, 3))
    k = int(rng.integers(0, n1 + 1))
    a = cplx(rng, n1 + 1, k) @ cplx(rng, k, n1) if k else np.zeros((n1 + 1, n1), dtype=complex)
    q = QuiverRep(DimensionVector((n1, n1 + 1)), (a,), (np.zeros((n1, n1 + 1), dtype=complex),))
    alg = closed_orbit_tilde(q).verdict
    probe = polystable_probe(q, FlowConfig(group="Htilde")).verdict
    if probe is not Verdict.INCONCLUSIVE:
        assert probe is alg

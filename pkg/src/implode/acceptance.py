"""The ten acceptance checks, shared by ``implode selftest`` and the test suite.

Each check returns a ``Criterion`` with a pass flag, a one-line detail and
its wall time.  Randomized checks are seeded, so reruns are identical.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .kempf_ness import FlowConfig, flow_to_real_zero, polystable_probe, rho_drift
from .kostant import (matrix_minimal_polynomial_degree, minimal_polynomial_degree, realize_orbit,
                      realize_orbit_quiver, su2_invariants, su2_torus_reduction)
from .quiver import (QJ, DimensionVector, QuiverRep, annihilating_poly_roots, annihilating_product,
                     endomorphism_Xk, moment_level, predicted_eigenvalues, random_moment_solution,
                     rotate, traceless)
from .stability import Verdict, closed_orbit_tilde
from .standardization import reconstruct_from_X, standardize_beta
from .stratification import (Relation, StratumLabel, classify, enumerate_strata, random_stratum_member,
                             symplectic_labels)
from .symplectic import symplectic_strata


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": round(self.seconds, 3)}


def _cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _label(pairs, deltas, n):
    return StratumLabel(Relation(frozenset(pairs)), tuple(deltas), n)


N3_LABELS = [
    _label([], [], 3),
    _label([(1, 1)], [(1, 1)], 3),
    _label([(2, 2)], [(2, 1)], 3),
    _label([(1, 2)], [(1, 1)], 3),
    _label([(1, 1), (2, 2)], [(1, 1), (2, 1)], 3),
    _label([(1, 1), (2, 2)], [(1, 1), (2, 2)], 3),
]
N2_LABELS = [_label([], [], 2), _label([(1, 1)], [(1, 1)], 2)]


def random_traceless(rng: np.random.Generator, n: int) -> np.ndarray:
    """Generic traceless matrix, or a semisimple one with a repeated eigenvalue."""
    if n > 2 and rng.random() < 0.3:
        ev = _cplx(rng, n)
        ev[1] = ev[0]
        p = _cplx(rng, n, n)
        y = p @ np.diag(ev) @ np.linalg.inv(p)
    else:
        y = _cplx(rng, n, n)
    return traceless(y)


# ------------------------------------------------------------ criteria


def strata_enumeration() -> tuple[bool, str]:
    two, three = enumerate_strata(2), enumerate_strata(3)
    ok = set(two) == set(N2_LABELS) and len(two) == 2 and set(three) == set(N3_LABELS) and len(three) == 6
    return ok, f"n=2: {len(two)} labels, n=3: {len(three)} labels " + ", ".join(map(str, three))


def symplectic_count() -> tuple[bool, str]:
    counts = {n: (len(symplectic_strata(n)), len(symplectic_labels(n))) for n in range(2, 7)}
    ok = all(a == b == 2 ** (n - 1) for n, (a, b) in counts.items())
    return ok, "counts " + str({n: a for n, (a, _) in counts.items()})


def _realized_family(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 6))
        y = random_traceless(rng, n)
        yield y, realize_orbit(y)


def annihilating_polynomial() -> tuple[bool, str]:
    worst = 0.0
    for _, real in _realized_family(200, 3):
        q = real.quiver
        x = endomorphism_Xk(q, 1)
        nus = annihilating_poly_roots(moment_level(q))
        err = np.linalg.norm(annihilating_product(x, nus)) / np.linalg.norm(x) ** q.r
        worst = max(worst, err)
    return worst < 1e-8, f"max relative residual {worst:.2e} (tol 1e-8)"


def eigenvalue_formula() -> tuple[bool, str]:
    worst_ev = worst_diff = 0.0
    for _, real in _realized_family(200, 3):
        q = real.quiver
        pred = predicted_eigenvalues(moment_level(q), q.dims)
        expected = np.repeat(np.array(pred.kappa), pred.multiplicity)
        actual = np.linalg.eigvals(traceless(endomorphism_Xk(q, 1)))
        rows, cols = linear_sum_assignment(np.abs(expected[:, None] - actual[None, :]))
        worst_ev = max(worst_ev, float(np.max(np.abs(expected[rows] - actual[cols]))))
        for diff, partial in pred.differences.values():
            worst_diff = max(worst_diff, abs(diff - partial))
    ok = worst_ev < 1e-7 and worst_diff < 1e-9
    return ok, f"eigenvalue error {worst_ev:.2e} (tol 1e-7), difference error {worst_diff:.2e} (tol 1e-9)"


def su2_oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(5)
    worst_lin = worst_surf = worst_nil = 0.0
    for t in range(1000):
        g = _cplx(rng, 2, 2)
        g = g / np.sqrt(np.linalg.det(g))
        a, b = complex(_cplx(rng, 1)[0]), complex(_cplx(rng, 1)[0])
        if t % 10 == 0:
            a = 0j
        q11, q21, a, y1, y2, res = su2_invariants(g, a, b)
        _, _, _, surf = su2_torus_reduction(q11, q21, y1, y2, a)
        worst_lin = max(worst_lin, res)
        if a == 0:
            worst_nil = max(worst_nil, surf)
        else:
            worst_surf = max(worst_surf, surf)
    ok = worst_lin < 1e-9 and worst_surf < 1e-9 and worst_nil < 1e-10
    return ok, (f"linear {worst_lin:.1e}, W(W-2a)=YZ {worst_surf:.1e} (tol 1e-9), "
                f"W^2=YZ {worst_nil:.1e} (tol 1e-10)")


def round_trips() -> tuple[bool, str]:
    rng = np.random.default_rng(6)
    worst_std = 0.0
    for _ in range(100):
        q = realize_orbit_quiver(random_traceless(rng, int(rng.integers(2, 6))))
        std = standardize_beta(q)
        back = reconstruct_from_X(std.X, q.dims, std.lambda_c)
        worst_std = max(worst_std, max(float(np.max(np.abs(a - b), initial=0.0))
                                       for a, b in zip(back.alpha + back.beta, std.quiver.alpha + std.quiver.beta)))
    misses = 0
    for label in N3_LABELS:
        for seed in range(20):
            q = random_stratum_member(label, np.random.default_rng(seed))
            misses += classify(q) != label
    worst_y = 0.0
    for y, real in _realized_family(500, 7):
        x = traceless(endomorphism_Xk(real.quiver, 1))
        worst_y = max(worst_y, float(np.max(np.abs(x - y))))
    ok = worst_std < 1e-10 and misses == 0 and worst_y < 1e-9
    return ok, (f"standardize/reconstruct {worst_std:.1e} (tol 1e-10), classify∘augment misses {misses}/120, "
                f"realize error {worst_y:.1e} (tol 1e-9)")


def kempf_ness_flow() -> tuple[bool, str]:
    failures, worst_drift, max_it = 0, 0.0, 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 4))
        q = random_moment_solution(DimensionVector.full_flag(n), _cplx(rng, n - 1), rng)
        res = flow_to_real_zero(q, FlowConfig(max_iters=5000, target=1e-10))
        drift = rho_drift(q, res)
        monotone = all(b <= a for a, b in zip(res.trace, res.trace[1:]))
        worst_drift = max(worst_drift, drift)
        max_it = max(max_it, res.iterations)
        failures += not (res.converged and monotone and drift < 1e-8)
    return failures == 0, f"{failures} failures, max iterations {max_it}, max rho drift {worst_drift:.1e}"


def _zero_level_instance(rng: np.random.Generator) -> QuiverRep:
    """lambda^C = 0 quivers, n <= 3: generic, beta = 0 chains, or direct sums with zero blocks."""
    n = int(rng.integers(2, 4))
    dims = DimensionVector.full_flag(n)
    kind = rng.integers(3)
    if kind == 0:
        return random_moment_solution(dims, np.zeros(n - 1), rng)
    if kind == 1:
        alphas = []
        for i in range(n - 1):
            k = int(rng.integers(0, dims[i] + 1))
            alphas.append(_cplx(rng, dims[i + 1], k) @ _cplx(rng, k, dims[i]))
        betas = [np.zeros((dims[i], dims[i + 1])) for i in range(n - 1)]
        q = QuiverRep(dims, tuple(alphas), tuple(betas))
        return rotate(q, QJ) if rng.random() < 0.5 else q
    # generic zero-level piece on smaller ordered dims, padded with zero blocks
    sub = [int(rng.integers(0, d + 1)) for d in dims.dims[:-1]]
    sub = tuple(int(v) for v in np.minimum.accumulate(sub[::-1])[::-1]) + (n,)
    piece = random_moment_solution(sub, np.zeros(n - 1), rng)
    alphas, betas = [], []
    for i in range(n - 1):
        a = np.zeros((dims[i + 1], dims[i]), dtype=complex)
        b = np.zeros((dims[i], dims[i + 1]), dtype=complex)
        a[:sub[i + 1], :sub[i]] = piece.alpha[i]
        b[:sub[i], :sub[i + 1]] = piece.beta[i]
        alphas.append(a)
        betas.append(b)
    return QuiverRep(dims, tuple(alphas), tuple(betas))


def stability_consistency() -> tuple[bool, str]:
    tally = Counter()
    disagree = 0
    cfg = FlowConfig(group="Htilde")
    for seed in range(200):
        q = _zero_level_instance(np.random.default_rng(seed))
        alg = closed_orbit_tilde(q).verdict
        probe = polystable_probe(q, cfg).verdict
        tally[(alg.value, probe.value)] += 1
        if probe is not Verdict.INCONCLUSIVE and probe is not alg:
            disagree += 1
    summary = ", ".join(f"{a}/{p}: {c}" for (a, p), c in sorted(tally.items()))
    return disagree == 0, f"{disagree} disagreements; {summary}"


def density_proxy() -> tuple[bool, str]:
    stable = 0
    total = 1000
    empty = _label([], [], 2)
    for seed in range(total):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        q = random_moment_solution(DimensionVector.full_flag(n), _cplx(rng, n - 1), rng)
        res = flow_to_real_zero(q)
        if res.converged and classify(res.quiver) == StratumLabel(empty.S, (), n):
            stable += 1
    frac = stable / total
    return frac >= 0.99, f"{stable}/{total} classified (∅,∅) ({frac:.1%}, need 99%)"


def minimal_polynomials() -> tuple[bool, str]:
    e12, e23 = np.zeros((3, 3)), np.zeros((3, 3))
    e12[0, 1] = e23[1, 2] = 1.0
    got = {
        "regular": minimal_polynomial_degree(realize_orbit_quiver(e12 + e23)),
        "subregular": minimal_polynomial_degree(realize_orbit_quiver(e12)),
        "zero": minimal_polynomial_degree(realize_orbit_quiver(np.zeros((3, 3)))),
    }
    direct = [matrix_minimal_polynomial_degree(m) for m in (e12 + e23, e12, np.zeros((3, 3)))]
    ok = (got["regular"], got["subregular"], got["zero"]) == (3, 2, 1) and direct == [3, 2, 1]
    return ok, f"degrees {got}"


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]], float | None]] = [
    (1, "strata enumeration", strata_enumeration, 1.0),
    (2, "symplectic strata count", symplectic_count, 1.0),
    (3, "annihilating polynomial", annihilating_polynomial, 10.0),
    (4, "eigenvalue formula", eigenvalue_formula, None),
    (5, "SU(2) invariants", su2_oracle, 1.0),
    (6, "round trips", round_trips, None),
    (7, "Kempf-Ness flow", kempf_ness_flow, None),
    (8, "stability consistency", stability_consistency, None),
    (9, "density proxy", density_proxy, None),
    (10, "minimal polynomial degrees", minimal_polynomials, None),
]


def run_criterion(number: int) -> Criterion:
    num, name, fn, limit = CRITERIA[number - 1]
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed > limit:
        ok = False
        detail += f"; exceeded time limit {limit:.0f}s"
    return Criterion(num, name, ok, detail, elapsed)


def run_all() -> list[Criterion]:
    return [run_criterion(k) for k in range(1, len(CRITERIA) + 1)]

"""Closed-orbit and stability tests built from rank and subspace checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import direct_sum, image, is_injective, is_surjective, null_space, rank
from .quiver import (Quaternion, QuiverRep, default_tol, moment_level, rotate,
                     sample_rotations)


class Verdict(str, enum.Enum):
    POLYSTABLE = "Polystable"
    NOT_POLYSTABLE = "NotPolystable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    witness: str | None
    method: str

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "witness": self.witness, "method": self.method}


def _zero(a: np.ndarray) -> bool:
    return a.size == 0 or float(np.linalg.norm(a)) < 1e-12


def length2_orbit_closed(alpha: np.ndarray) -> StabilityVerdict:
    alpha = np.asarray(alpha, dtype=complex)
    if _zero(alpha):
        return StabilityVerdict(Verdict.POLYSTABLE, "alpha = 0", "length2")
    if is_injective(alpha):
        return StabilityVerdict(Verdict.POLYSTABLE, "alpha injective", "length2")
    k = alpha.shape[1] - rank(alpha)
    return StabilityVerdict(Verdict.NOT_POLYSTABLE,
                            f"kernel of dimension {k} and nonzero complement; a diagonal one-parameter "
                            "subgroup scaling the complement down drives the orbit to 0", "length2")


def double_quiver_orbit_closed(alpha: np.ndarray, beta: np.ndarray) -> StabilityVerdict:
    """V --alpha--> W --beta--> V under SL(V)."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    dim_v = alpha.shape[1]
    if is_injective(alpha):
        return StabilityVerdict(Verdict.POLYSTABLE, "alpha injective", "double")
    if dim_v == 0 or is_surjective(beta):
        return StabilityVerdict(Verdict.POLYSTABLE, "beta surjective", "double")
    ker, im = null_space(alpha), image(beta)
    if direct_sum(ker, im, dim_v):
        return StabilityVerdict(Verdict.POLYSTABLE,
                                f"V = ker alpha ({ker.shape[1]}) + im beta ({im.shape[1]})", "double")
    return StabilityVerdict(Verdict.NOT_POLYSTABLE,
                            f"dim ker alpha = {ker.shape[1]}, rank beta = {im.shape[1]}, dim V = {dim_v}; "
                            "not a direct sum", "double")


def symplectic_polystable_necessary(alphas: list[np.ndarray]) -> StabilityVerdict:
    """Stage-wise test on V_1 -> V_2 -> ... -> V_r (beta absent)."""
    for i, a in enumerate(alphas):
        a = np.asarray(a, dtype=complex)
        prev = np.asarray(alphas[i - 1], dtype=complex) if i > 0 else np.zeros((a.shape[1], 0))
        v = double_quiver_orbit_closed(a, prev)
        if v.verdict is Verdict.NOT_POLYSTABLE:
            return StabilityVerdict(Verdict.NOT_POLYSTABLE,
                                    f"stage {i + 1}: alpha_{i + 1} not injective, alpha_{i} not surjective, "
                                    f"and im alpha_{i} + ker alpha_{i + 1} is not a direct sum", "symplectic")
    return StabilityVerdict(Verdict.POLYSTABLE, "every stage satisfies one of the three clauses", "symplectic")


def _ranks_maximal(q: QuiverRep) -> bool:
    return all(is_injective(a) for a in q.alpha) and all(is_surjective(b) for b in q.beta)


def find_hk_rotation(q: QuiverRep, samples: int = 32, seed: int = 0) -> Quaternion | None:
    """First tested rotation making every alpha injective and beta surjective."""
    for u in sample_rotations(samples, seed):
        if _ranks_maximal(rotate(q, u)):
            return u
    return None


def is_hk_stable(q: QuiverRep, samples: int = 32, seed: int = 0) -> bool:
    """``False`` means no witness was found, not a proof of instability."""
    return find_hk_rotation(q, samples, seed) is not None


def stabilizer_dimension(q: QuiverRep) -> int:
    """Dimension of {g in prod gl(n_i), g_r = 0} fixing q infinitesimally."""
    d = q.dims.dims
    sizes = [d[i] * d[i] for i in range(q.r - 1)]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    total = int(offsets[-1])
    if total == 0:
        return 0
    rows = []
    # row-major vec: vec(A X B) = kron(A, B^T) vec(X)
    for i in range(q.r - 1):
        a, b = q.alpha[i], q.beta[i]
        src, dst = d[i], d[i + 1]
        eq_a = np.zeros((dst * src, total), dtype=complex)
        eq_b = np.zeros((src * dst, total), dtype=complex)
        eq_a[:, offsets[i]:offsets[i + 1]] -= np.kron(a, np.eye(src))
        eq_b[:, offsets[i]:offsets[i + 1]] += np.kron(np.eye(src), b.T)
        if i + 1 < q.r - 1:
            eq_a[:, offsets[i + 1]:offsets[i + 2]] += np.kron(np.eye(dst), a.T)
            eq_b[:, offsets[i + 1]:offsets[i + 2]] -= np.kron(b, np.eye(dst))
        rows += [eq_a, eq_b]
    system = np.vstack(rows)
    return total - rank(system) if system.size else total


def stabilizer_is_trivial(q: QuiverRep) -> bool:
    if all(is_injective(a) or is_surjective(b) for a, b in zip(q.alpha, q.beta)):
        return True
    return stabilizer_dimension(q) == 0


def closed_orbit_tilde(q: QuiverRep, tol: float | None = None) -> StabilityVerdict:
    """Closed orbit under prod GL(n_i) for quivers with all lambda^C = 0."""
    tol = default_tol() if tol is None else tol
    level = moment_level(q)
    scale = max(1.0, q.norm() ** 2)
    if level.residual_c > tol * scale or any(abs(l) > tol * scale for l in level.lambda_c):
        return StabilityVerdict(Verdict.INCONCLUSIVE, "complex levels are not all zero", "kobs")
    splits = []
    for i in range(q.r - 1):
        ker, im = null_space(q.alpha[i]), image(q.beta[i])
        if not direct_sum(ker, im, q.dims[i]):
            return StabilityVerdict(Verdict.NOT_POLYSTABLE,
                                    f"level {i + 1}: ker alpha ({ker.shape[1]}) and im beta ({im.shape[1]}) "
                                    f"do not split V_{i + 1} (dim {q.dims[i]})", "kobs")
        splits.append(f"V_{i + 1} = ker({ker.shape[1]}) + im({im.shape[1]})")
    return StabilityVerdict(Verdict.POLYSTABLE, "; ".join(splits) or "no levels", "kobs")

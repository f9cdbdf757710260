"""Quivers with all beta = 0: stratum data, the exterior-power embedding,
and the C* action that scales beta."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import is_injective
from .quiver import DimensionVector, QuiverError, QuiverRep


def symplectic_quiver(alphas) -> QuiverRep:
    """Full-flag quiver with the given alpha maps and beta = 0."""
    alphas = [np.asarray(a, dtype=complex) for a in alphas]
    dims = [a.shape[1] for a in alphas] + [alphas[-1].shape[0] if alphas else 1]
    betas = [np.zeros((a.shape[1], a.shape[0]), dtype=complex) for a in alphas]
    return QuiverRep(DimensionVector(tuple(dims)), tuple(alphas), tuple(betas))


def _require_symplectic(q: QuiverRep) -> None:
    if q.dims.dims != tuple(range(1, q.n + 1)):
        raise QuiverError("full-flag dims (1, 2, ..., n) required")
    if any(np.linalg.norm(b) > 0 for b in q.beta):
        raise QuiverError("beta must vanish")


@dataclass(frozen=True)
class SymplecticStratum:
    m: tuple[int, ...]  # m_1..m_{n-1}
    sequence: tuple[int, ...]  # strictly increasing, ends with n
    partition: tuple[int, ...]  # consecutive differences, sums to n

    def to_json(self) -> dict:
        return {"m": list(self.m), "sequence": list(self.sequence), "partition": list(self.partition)}


def stratum_from_pattern(injective: tuple[bool, ...]) -> SymplecticStratum:
    """m_i = i when alpha_i is injective, m_i = m_{i-1} otherwise (m_0 = 0)."""
    n = len(injective) + 1
    m, prev = [], 0
    for i, inj in enumerate(injective, start=1):
        prev = i if inj else prev
        m.append(prev)
    seq = tuple(sorted({v for v in m if v > 0} | {n}))
    parts = tuple(b - a for a, b in zip((0,) + seq, seq))
    return SymplecticStratum(tuple(m), seq, parts)


def symplectic_stratum(q: QuiverRep) -> SymplecticStratum:
    _require_symplectic(q)
    return stratum_from_pattern(tuple(is_injective(a) for a in q.alpha))


def symplectic_strata(n: int) -> list[SymplecticStratum]:
    """All strata for full-flag quivers of size n, one per injectivity pattern class."""
    if n < 1:
        raise QuiverError("n must be positive")
    seen = {}
    for pattern in itertools.product((False, True), repeat=n - 1):
        s = stratum_from_pattern(pattern)
        seen.setdefault(s.sequence, s)
    return [seen[k] for k in sorted(seen)]


def _minors(c: np.ndarray, j: int) -> np.ndarray:
    """All j x j minors of the n x j matrix c, rows in lexicographic order."""
    return np.array([np.linalg.det(c[list(rows), :]) for rows in itertools.combinations(range(c.shape[0]), j)],
                    dtype=complex)


def symplectic_embed(q: QuiverRep) -> list[np.ndarray]:
    """Component j is the wedge^j of alpha_{n-1} ... alpha_j applied to vol_j,
    written in the basis e_I, I ranging over j-subsets of {1..n} in lex order."""
    _require_symplectic(q)
    out = []
    for j in range(1, q.n):
        comp = np.eye(j, dtype=complex)
        for a in q.alpha[j - 1:]:
            comp = a @ comp
        out.append(_minors(comp, j))
    return out


def to_sparse(vec: np.ndarray, n: int, j: int, tol: float = 1e-12) -> dict[tuple[int, ...], complex]:
    """Nonzero coordinates of a wedge^j C^n vector keyed by 1-based index sets."""
    keys = list(itertools.combinations(range(1, n + 1), j))
    if len(keys) != len(vec):
        raise QuiverError(f"vector of length {len(vec)} is not in wedge^{j} C^{n}")
    scale = max(1.0, float(np.max(np.abs(vec), initial=0.0)))
    return {k: complex(v) for k, v in zip(keys, vec) if abs(v) > tol * scale}


def embedding_pattern(components: list[np.ndarray], tol: float = 1e-10) -> tuple[bool, ...]:
    """Which components are nonzero; equals the injectivity pattern of alpha."""
    return tuple(bool(np.linalg.norm(c) > tol) for c in components)


def cstar_scale(q: QuiverRep, tau: complex) -> QuiverRep:
    """beta_i -> tau beta_i with alpha fixed; X and lambda^C scale by tau."""
    if tau == 0:
        raise QuiverError("tau must be nonzero")
    return q.replace(beta=tuple(tau * b for b in q.beta))

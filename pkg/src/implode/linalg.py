"""Small numerical helpers shared by every module.

Ranks use the threshold ``sigma_max * max(rows, cols) * 1e-10``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import subspace_angles

RANK_RTOL = 1e-10
ANGLE_TOL = 1e-8


def _threshold(s: np.ndarray, shape: tuple[int, int]) -> float:
    if s.size == 0:
        return 0.0
    return float(s[0]) * max(shape) * RANK_RTOL


def rank(a: np.ndarray) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return _rank_of(np.linalg.svd(a, compute_uv=False), a.shape)


def _rank_of(s: np.ndarray, shape: tuple[int, int]) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > _threshold(s, shape)))


def is_injective(a: np.ndarray) -> bool:
    return rank(a) == a.shape[1]


def is_surjective(a: np.ndarray) -> bool:
    return rank(a) == a.shape[0]


def null_space(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of ker a."""
    a = np.asarray(a, dtype=complex)
    ncols = a.shape[1]
    if a.shape[0] == 0 or a.size == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    return vh[_rank_of(s, a.shape):].conj().T


def image(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of im a."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a)
    return u[:, : _rank_of(s, a.shape)]


def intersect(bases: list[np.ndarray], dim: int) -> np.ndarray:
    """Orthonormal basis of the intersection of column spans in C^dim."""
    if dim == 0:
        return np.zeros((0, 0), dtype=complex)
    rows = [np.eye(dim) - b @ b.conj().T for b in bases if b.shape[1] < dim]
    if not rows:
        return np.eye(dim, dtype=complex)
    stacked = np.vstack(rows)
    _, s, vh = np.linalg.svd(stacked)
    # projector complements have singular values in [0, 1]; use an absolute cut
    k = int(np.sum(s > 1e-7))
    return vh[k:].conj().T


def direct_sum(first: np.ndarray, second: np.ndarray, dim: int) -> bool:
    """True if span(first) + span(second) = C^dim and they meet only in 0."""
    if first.shape[1] + second.shape[1] != dim:
        return False
    if first.shape[1] == 0 or second.shape[1] == 0:
        return True
    return float(np.min(subspace_angles(first, second))) > ANGLE_TOL


def herm_exp(h: np.ndarray, s: float) -> np.ndarray:
    """exp(s * h) for Hermitian h."""
    if h.size == 0:
        return h.copy()
    w, v = np.linalg.eigh(h)
    return (v * np.exp(s * w)) @ v.conj().T


def cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of complex numbers at distance ``tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])

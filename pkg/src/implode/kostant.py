"""Invariants of sl(n,C) elements and the quivers that realize them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import cluster, rank
from .quiver import (DimensionVector, QuiverError, QuiverRep, endomorphism_Xk)


def rho(x: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients c_2..c_n of x^n + c_1 x^{n-1} + ... .

    Faddeev-LeVerrier recursion; exact in the entries up to round-off.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    m = np.zeros_like(x)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = x @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(x @ m) / k
    return coeffs[2:]


def same_fiber(x: np.ndarray, y: np.ndarray, tol: float = 1e-9) -> bool:
    cx, cy = rho(x), rho(y)
    scale = max(1.0, np.linalg.norm(x), np.linalg.norm(y))
    bounds = tol * scale ** np.arange(2, len(cx) + 2)
    return bool(np.all(np.abs(cx - cy) < bounds))


def grothendieck_mu(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=complex)
    det = np.linalg.det(q)
    if abs(det) < 1e-12:
        raise QuiverError("Q is singular")
    if abs(det - 1) > 1e-8:
        raise QuiverError(f"det Q = {det}, expected 1")
    return q @ x @ np.linalg.inv(q)


@dataclass(frozen=True)
class KostantPoint:
    X: np.ndarray
    chi: np.ndarray
    eigenvalues: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    regular: bool
    nilpotent: bool

    @classmethod
    def from_matrix(cls, x: np.ndarray) -> "KostantPoint":
        x = np.asarray(x, dtype=complex)
        n = x.shape[0]
        if abs(np.trace(x)) > 1e-10 * max(1.0, np.linalg.norm(x)):
            raise QuiverError("X is not trace-free")
        ev = np.linalg.eigvals(x)
        scale = max(1.0, np.linalg.norm(x))
        # defective clusters spread like eps^(1/k); cluster loosely
        groups = cluster(ev, 1e-5 * scale)
        centers = [complex(np.mean(ev[g])) for g in groups]
        mults = [len(g) for g in groups]
        regular = all(rank(x - c * np.eye(n)) == n - 1 for c in centers)
        nilpotent = bool(np.all(np.abs(rho(x)) < 1e-9 * scale ** np.arange(2, n + 1)))
        return cls(x, rho(x), tuple(centers), tuple(mults), regular, nilpotent)


@dataclass(frozen=True)
class Realization:
    quiver: QuiverRep
    lambda_c: tuple[complex, ...]
    shift: complex


def _smallest_eigenvalue(x: np.ndarray) -> complex:
    ev = np.linalg.eigvals(x)
    return complex(ev[np.argmin(np.abs(ev))])


def realize_orbit(y: np.ndarray) -> Realization:
    """Quiver with alpha injective, beta surjective and traceless(X) = y.

    Shift y by an eigenvalue so it becomes singular, factor through its
    image by SVD, and repeat on beta alpha.
    """
    y = np.asarray(y, dtype=complex)
    n = y.shape[0]
    if n == 0:
        raise QuiverError("empty matrix")
    shift = _smallest_eigenvalue(y)
    x = y - shift * np.eye(n)
    alphas: list[np.ndarray] = []
    betas: list[np.ndarray] = []
    levels: list[complex] = []
    dims = [n]
    while True:
        u, s, vh = np.linalg.svd(x)
        # x is singular by construction; round-off may hide that from rank()
        k = min(rank(x), x.shape[0] - 1)
        if k == 0:
            break
        a = u[:, :k] * s[:k]
        b = vh[:k]
        alphas.append(a)
        betas.append(b)
        dims.append(k)
        inner = b @ a
        mu = _smallest_eigenvalue(inner)
        levels.append(-mu)
        x = inner - mu * np.eye(k)
    # built top-down; flip to bottom-up order
    dims.reverse()
    alphas.reverse()
    betas.reverse()
    levels.reverse()
    q = QuiverRep(DimensionVector(tuple(dims)), tuple(alphas), tuple(betas))
    return Realization(q, tuple(levels), shift)


def realize_orbit_quiver(y: np.ndarray) -> QuiverRep:
    return realize_orbit(y).quiver


def matrix_minimal_polynomial_degree(x: np.ndarray, tol: float = 1e-8) -> int:
    """Degree of the minimal polynomial via a Krylov sequence of powers."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    norm = np.linalg.norm(x, 2)
    if norm == 0:
        return 1
    xs = x / norm
    basis: list[np.ndarray] = [np.eye(n).ravel() / np.sqrt(n)]
    power = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        power = power @ xs
        v = power.ravel().copy()
        size = max(1.0, np.linalg.norm(v))
        for b in basis:
            v = v - np.vdot(b, v) * b
        for b in basis:  # second pass for stability
            v = v - np.vdot(b, v) * b
        if np.linalg.norm(v) < tol * size:
            return k
        basis.append(v / np.linalg.norm(v))
    return n


def minimal_polynomial_degree(q: QuiverRep) -> int:
    if not q.dims.strictly_ordered and q.r > 1:
        raise QuiverError("dims must be strictly ordered")
    deg = matrix_minimal_polynomial_degree(endomorphism_Xk(q, 1))
    if deg != q.r:
        raise QuiverError(f"minimal polynomial degree {deg} differs from r = {q.r}; rank assumptions fail")
    return deg


def su2_invariants(g: np.ndarray, a: complex, b: complex) -> tuple[complex, complex, complex, complex, complex, float]:
    g = np.asarray(g, dtype=complex)
    if abs(np.linalg.det(g) - 1) > 1e-10:
        raise QuiverError("g must have determinant 1")
    (q11, q12), (q21, q22) = g
    y1 = 2 * q22 * a - q21 * b
    y2 = 2 * q12 * a - q11 * b
    residual = abs(q11 * y1 - q21 * y2 - 2 * a)
    return q11, q21, a, y1, y2, float(residual)


def su2_torus_reduction(q11, q21, y1, y2, a) -> tuple[complex, complex, complex, float]:
    w, y, z = q11 * y1, q11 * y2, q21 * y1
    return w, y, z, float(abs(w * (w - 2 * a) - y * z))


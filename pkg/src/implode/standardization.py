"""Standard forms for quivers with surjective beta, reconstruction from X,
reduction of Borel elements into the Cartan, and the parabolic character."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import is_surjective
from .quiver import (DimensionVector, QuiverError, QuiverRep, default_tol,
                     endomorphism_Xk, moment_level)

ROOT_TOL = 1e-8
STRUCTURE_TOL = 1e-8


@dataclass(frozen=True)
class ParabolicFlag:
    """Flag C^{n_1} <= ... <= C^n, block sizes k_i = n_{i+1} - n_i (n_0 = 0)."""

    k: tuple[int, ...]

    @classmethod
    def from_dims(cls, dims: DimensionVector | tuple[int, ...]) -> "ParabolicFlag":
        d = (0,) + tuple(dims)
        return cls(tuple(d[i + 1] - d[i] for i in range(len(d) - 1)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.cumsum(self.k))

    @property
    def n(self) -> int:
        return int(sum(self.k))

    @property
    def blocks(self) -> tuple[int, ...]:
        """Nonzero diagonal block sizes from the top-left: k_{r-1}, ..., k_0."""
        return tuple(b for b in reversed(self.k) if b > 0)

    @property
    def dim_P(self) -> int:
        """Dimension of P inside SL(n)."""
        return (self.n ** 2 + sum(b * b for b in self.blocks)) // 2 - 1

    @property
    def dim_PP(self) -> int:
        return self.dim_P - (len(self.blocks) - 1)

    @property
    def dim_annihilator(self) -> int:
        """dim [p,p]° inside sl(n)*."""
        return self.n ** 2 - 1 - self.dim_PP

    def character_image(self) -> np.ndarray:
        """Basis (rows) of d chi(p) inside C^{r-1}, chi_i = det of bottom-right n_i block."""
        n, dims = self.n, self.dims[:-1]
        sizes = list(reversed(self.k))
        starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        gens = []
        nonzero = [t for t, s in enumerate(sizes) if s > 0]
        # trace-zero block scalars: e_t / s_t - e_last / s_last
        last = nonzero[-1]
        for t in nonzero[:-1]:
            diag = np.zeros(n)
            diag[starts[t]:starts[t + 1]] = 1.0 / sizes[t]
            diag[starts[last]:starts[last + 1]] -= 1.0 / sizes[last]
            gens.append([diag[n - m:].sum() if m else 0.0 for m in dims])
        return np.array(gens).reshape(len(gens), len(dims))


@dataclass(frozen=True)
class StandardForm:
    quiver: QuiverRep
    gauge: tuple[np.ndarray, ...]  # g_1..g_r, q_std = g . q
    X: np.ndarray
    lambda_c: tuple[complex, ...]


def standard_beta(dims: tuple[int, ...], i: int) -> np.ndarray:
    src, dst = dims[i], dims[i + 1]
    return np.hstack([np.zeros((src, dst - src)), np.eye(src)])


def _unit_det(e: np.ndarray, k: int) -> np.ndarray:
    """Rescale the first kernel column so det(e) = 1, when there is one."""
    if k == 0 or e.shape[0] == 0:
        return e
    det = np.linalg.det(e)
    e = e.copy()
    e[:, 0] /= det
    return e


def standardize_beta(q: QuiverRep, tol: float | None = None) -> StandardForm:
    tol = default_tol() if tol is None else tol
    if not q.dims.ordered:
        raise QuiverError("dims must be ordered")
    for i, b in enumerate(q.beta):
        if not is_surjective(b):
            raise QuiverError(f"beta_{i + 1} is not surjective")
    level = moment_level(q)
    if level.residual_c > tol * max(1.0, q.norm() ** 2):
        raise QuiverError(f"complex residual {level.residual_c:.3e} too large")
    d = q.dims.dims
    # bases[i] has the new basis vectors of V_{i+1} as columns
    bases = [np.eye(d[0], dtype=complex)]
    for i, b in enumerate(q.beta):
        k = d[i + 1] - d[i]
        # column-pivoted QR of b* gives an orthonormal kernel basis
        qmat, _, _ = scipy.linalg.qr(b.conj().T, pivoting=True)
        kernel = qmat[:, d[i]:]
        if k:
            # align with the leading coordinate vectors so standard input is fixed
            u, _ = scipy.linalg.polar(kernel[:k].conj().T)
            kernel = kernel @ u
        pre = np.linalg.lstsq(b, bases[i], rcond=None)[0]
        bases.append(_unit_det(np.hstack([kernel, pre]), k))
    g = [np.linalg.inv(e) for e in bases]
    std = q.gauge(g[:-1]) if q.r > 1 else q
    # top level acts by conjugation too
    alpha = list(std.alpha)
    beta = list(std.beta)
    if q.r > 1:
        alpha[-1] = g[-1] @ alpha[-1]
        beta[-1] = beta[-1] @ bases[-1]
    for i in range(q.r - 1):
        beta[i] = standard_beta(d, i)
    std = QuiverRep(q.dims, tuple(alpha), tuple(beta))
    x = endomorphism_Xk(std, 1)
    lam = moment_level(std).lambda_c
    _check_structure(x, d, lam, max(1.0, np.linalg.norm(x)))
    return StandardForm(std, tuple(g), x, lam)


def diagonal_pattern(dims: tuple[int, ...], lambda_c) -> np.ndarray:
    """Diagonal of a standardized X: 0 (k_{r-1} times), -lambda_{r-1} (k_{r-2} times), ..."""
    r = len(dims)
    k = ParabolicFlag.from_dims(dims).k
    out = []
    acc = 0.0
    for t in range(r):
        out += [acc] * k[r - 1 - t]
        if t < r - 1:
            acc = acc - lambda_c[r - 2 - t]
    return np.array(out, dtype=complex)


def _check_structure(x: np.ndarray, dims, lam, scale: float) -> None:
    flag = ParabolicFlag.from_dims(dims)
    sizes = list(reversed(flag.k))
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    expected = np.diag(diagonal_pattern(dims, lam))
    for t in range(len(sizes)):
        s0, s1 = starts[t], starts[t + 1]
        if np.linalg.norm(x[s1:, s0:s1]) > STRUCTURE_TOL * scale:
            raise QuiverError("X is not block upper triangular")
        if np.linalg.norm(x[s0:s1, s0:s1] - expected[s0:s1, s0:s1]) > STRUCTURE_TOL * scale:
            raise QuiverError("diagonal block of X is not the predicted scalar")


def reconstruct_from_X(x: np.ndarray, dims: DimensionVector | tuple[int, ...],
                       lambda_c=None) -> QuiverRep:
    """Peel off alpha_{r-1}, ..., alpha_1 from a standardized X.

    The levels are read from the diagonal; when some k_i = 0 the matching
    level cannot be read and must be passed as ``lambda_c``.
    """
    dv = dims if isinstance(dims, DimensionVector) else DimensionVector(tuple(dims))
    d = dv.dims
    r = dv.r
    x = np.asarray(x, dtype=complex)
    if not dv.ordered:
        raise QuiverError("dims must be ordered")
    if x.shape != (dv.n, dv.n):
        raise QuiverError("X has the wrong size")
    scale = max(1.0, np.linalg.norm(x))
    k = ParabolicFlag.from_dims(d).k
    if lambda_c is None:
        if any(v == 0 for v in k[1:]):
            raise QuiverError("some k_i = 0; pass lambda_c explicitly")
        diag = np.diag(x)
        pos = 0
        values = []
        for t in range(r):
            size = k[r - 1 - t]
            block = diag[pos:pos + size]
            if np.ptp(block.real) + np.ptp(block.imag) > STRUCTURE_TOL * scale:
                raise QuiverError("diagonal block is not scalar")
            values.append(complex(block.mean()))
            pos += size
        # values[t] = -(lambda_{r-1} + ... + lambda_{r-t})
        lambda_c = [0j] * (r - 1)
        for t in range(1, r):
            lambda_c[r - 1 - t] = values[t - 1] - values[t]
    _check_structure(x, d, lambda_c, scale)
    alphas: list[np.ndarray] = [None] * (r - 1)
    current = x
    for i in range(r - 2, -1, -1):
        kk = d[i + 1] - d[i]
        if np.linalg.norm(current[:, :kk]) > STRUCTURE_TOL * scale:
            raise QuiverError(f"level {i + 2} block does not vanish on ker beta")
        alphas[i] = current[:, kk:]
        current = alphas[i][kk:, :] + lambda_c[i] * np.eye(d[i])
    if np.linalg.norm(current) > STRUCTURE_TOL * scale:
        raise QuiverError("bottom level does not close up")
    betas = [standard_beta(d, i) for i in range(r - 1)]
    return QuiverRep(dv, tuple(alphas), tuple(betas))


@dataclass(frozen=True)
class CartanReduction:
    D: np.ndarray
    N: np.ndarray  # D = N X N^{-1}
    removable: np.ndarray  # bool mask of positive roots eliminated
    regular: bool


def reduce_to_cartan(x: np.ndarray) -> CartanReduction:
    """Eliminate root-space entries lowest height first by N-conjugation.

    Entry (i, j) is removable when X_ii != X_jj; the others are kept.
    """
    x = np.array(x, dtype=complex)
    n = x.shape[0]
    scale = max(1.0, np.linalg.norm(x))
    if np.linalg.norm(np.tril(x, -1)) > 1e-12 * scale:
        raise QuiverError("X is not upper triangular")
    x = np.triu(x)
    nmat = np.eye(n, dtype=complex)
    removable = np.zeros((n, n), dtype=bool)
    for h in range(1, n):
        for i in range(n - h):
            j = i + h
            gap = x[j, j] - x[i, i]
            if abs(gap) < ROOT_TOL * scale:
                continue
            removable[i, j] = True
            c = -x[i, j] / gap
            # (I + c E_ij) X (I - c E_ij)
            x[i, :] += c * x[j, :]
            x[:, j] -= c * x[:, i]
            x[i, j] = 0.0
            nmat[i, :] += c * nmat[j, :]
    regular = bool(removable[np.triu_indices(n, 1)].all()) if n > 1 else True
    return CartanReduction(x, nmat, removable, regular)


def chi_character(p: np.ndarray, flag: ParabolicFlag) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    n = flag.n
    scale = max(1.0, np.linalg.norm(p))
    out = []
    for m in flag.dims[:-1]:
        if np.linalg.norm(p[n - m:, : n - m]) > 1e-10 * scale:
            raise QuiverError("p is not block upper triangular for this flag")
        out.append(np.linalg.det(p[n - m:, n - m:]) if m else 1.0 + 0j)
    return np.array(out, dtype=complex)

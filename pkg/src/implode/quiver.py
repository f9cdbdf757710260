"""Quiver representations, moment maps, the endomorphisms X_k and the
quaternionic rotation action.

A quiver over dims ``(n_1, ..., n_r)`` stores ``alpha[i]`` of shape
``n_{i+1} x n_i`` and ``beta[i]`` of shape ``n_i x n_{i+1}`` for the
``r - 1`` edges (0-based list index ``i`` is edge ``i + 1``).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .linalg import null_space

DEFAULT_TOL = 1e-9


def default_tol() -> float:
    """Moment residual tolerance; ``IMPLODE_TOL`` overrides it."""
    raw = os.environ.get("IMPLODE_TOL")
    return float(raw) if raw else DEFAULT_TOL


class QuiverError(ValueError):
    """Structural or precondition failure on quiver data."""


@dataclass(frozen=True)
class DimensionVector:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise QuiverError("dimension vector needs at least one entry")
        if any(d < 0 for d in dims):
            raise QuiverError(f"negative dimension in {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return self.dims[-1]

    @property
    def r(self) -> int:
        return len(self.dims)

    @property
    def ordered(self) -> bool:
        return all(a <= b for a, b in zip(self.dims, self.dims[1:]))

    @property
    def strictly_ordered(self) -> bool:
        return self.dims[0] > 0 and all(a < b for a, b in zip(self.dims, self.dims[1:]))

    @classmethod
    def full_flag(cls, n: int) -> "DimensionVector":
        return cls(tuple(range(1, n + 1)))

    def __getitem__(self, i: int) -> int:
        return self.dims[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.dims)


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuiverRep:
    dims: DimensionVector
    alpha: tuple[np.ndarray, ...]
    beta: tuple[np.ndarray, ...]

    def __post_init__(self):
        dims = self.dims if isinstance(self.dims, DimensionVector) else DimensionVector(tuple(self.dims))
        object.__setattr__(self, "dims", dims)
        alpha = tuple(_frozen(a) for a in self.alpha)
        beta = tuple(_frozen(b) for b in self.beta)
        if len(alpha) != dims.r - 1 or len(beta) != dims.r - 1:
            raise QuiverError(f"expected {dims.r - 1} edges, got {len(alpha)} alpha / {len(beta)} beta")
        for i, (a, b) in enumerate(zip(alpha, beta)):
            src, dst = dims[i], dims[i + 1]
            if a.shape != (dst, src):
                raise QuiverError(f"alpha[{i + 1}] has shape {a.shape}, expected {(dst, src)}")
            if b.shape != (src, dst):
                raise QuiverError(f"beta[{i + 1}] has shape {b.shape}, expected {(src, dst)}")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise QuiverError(f"non-finite entries on edge {i + 1}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def r(self) -> int:
        return self.dims.r

    @property
    def n(self) -> int:
        return self.dims.n

    @classmethod
    def zero(cls, dims: Sequence[int] | DimensionVector) -> "QuiverRep":
        dv = dims if isinstance(dims, DimensionVector) else DimensionVector(tuple(dims))
        d = dv.dims
        return cls(dv, tuple(np.zeros((d[i + 1], d[i])) for i in range(dv.r - 1)),
                   tuple(np.zeros((d[i], d[i + 1])) for i in range(dv.r - 1)))

    def norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(a) ** 2 for a in self.alpha)
                             + sum(np.linalg.norm(b) ** 2 for b in self.beta)))

    def replace(self, alpha=None, beta=None) -> "QuiverRep":
        return QuiverRep(self.dims, self.alpha if alpha is None else tuple(alpha),
                         self.beta if beta is None else tuple(beta))

    def scaled(self, c: float) -> "QuiverRep":
        return QuiverRep(self.dims, tuple(c * a for a in self.alpha), tuple(c * b for b in self.beta))

    def gauge(self, g: Sequence[np.ndarray]) -> "QuiverRep":
        """Act by ``g = (g_1, ..., g_{r-1})`` with ``g_r = I``:
        alpha_i -> g_{i+1} alpha_i g_i^{-1}, beta_i -> g_i beta_i g_{i+1}^{-1}."""
        full = list(g) + [np.eye(self.n)]
        inv = [np.linalg.inv(x) if x.size else x for x in full]
        alpha = [full[i + 1] @ a @ inv[i] for i, a in enumerate(self.alpha)]
        beta = [full[i] @ b @ inv[i + 1] for i, b in enumerate(self.beta)]
        return self.replace(alpha, beta)

    def allclose(self, other: "QuiverRep", atol: float = 1e-10) -> bool:
        if self.dims != other.dims:
            return False
        return all(np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.alpha + self.beta, other.alpha + other.beta))


@dataclass(frozen=True)
class MomentLevel:
    lambda_c: tuple[complex, ...]
    lambda_r: tuple[float, ...]
    residual_c: float
    residual_r: float
    # per-level matrices kept for callers that need the full defect
    complex_parts: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)
    real_parts: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)


def complex_moment(q: QuiverRep) -> list[np.ndarray]:
    """alpha_{i-1} beta_{i-1} - beta_i alpha_i at levels 1..r-1."""
    out = []
    for i in range(q.r - 1):
        m = -q.beta[i] @ q.alpha[i]
        if i > 0:
            m = m + q.alpha[i - 1] @ q.beta[i - 1]
        out.append(m)
    return out


def real_moment(q: QuiverRep) -> list[np.ndarray]:
    """alpha a* - beta* beta (incoming) + beta beta* - alpha* alpha (outgoing)."""
    out = []
    for i in range(q.r - 1):
        a, b = q.alpha[i], q.beta[i]
        m = b @ b.conj().T - a.conj().T @ a
        if i > 0:
            ap, bp = q.alpha[i - 1], q.beta[i - 1]
            m = m + ap @ ap.conj().T - bp.conj().T @ bp
        out.append(m)
    return out


def _scalar_and_defect(m: np.ndarray) -> tuple[complex, float]:
    k = m.shape[0]
    if k == 0:
        return 0.0, 0.0
    lam = np.trace(m) / k
    return lam, float(np.linalg.norm(m - lam * np.eye(k)))


def moment_level(q: QuiverRep) -> MomentLevel:
    cparts = complex_moment(q)
    rparts = real_moment(q)
    lc, lr, dc, dr = [], [], [], []
    for mc, mr in zip(cparts, rparts):
        a, da = _scalar_and_defect(mc)
        b, db = _scalar_and_defect(mr)
        lc.append(complex(a))
        lr.append(float(np.real(b)))
        dc.append(da)
        dr.append(db)
    return MomentLevel(tuple(lc), tuple(lr), float(np.linalg.norm(dc)), float(np.linalg.norm(dr)),
                       tuple(cparts), tuple(rparts))


def traceless(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    if n == 0:
        return x
    return x - np.trace(x) / n * np.eye(n)


def endomorphism_Xk(q: QuiverRep, k: int = 1) -> np.ndarray:
    """alpha_{r-1} ... alpha_{r-k} beta_{r-k} ... beta_{r-1}."""
    r = q.r
    if r == 1 and k == 1:
        return np.zeros((q.n, q.n), dtype=complex)
    if not 1 <= k <= r - 1:
        raise QuiverError(f"k = {k} outside 1..{r - 1}")
    top = np.eye(q.n, dtype=complex)
    down = np.eye(q.n, dtype=complex)
    for i in range(r - 2, r - 2 - k, -1):
        top = top @ q.alpha[i]
        down = q.beta[i] @ down
    return top @ down


def annihilating_poly_roots(level: MomentLevel) -> list[complex]:
    """nu_i = sum_{j >= i} lambda_j^C; X prod_i (X + nu_i) = 0."""
    lc = list(level.lambda_c)
    return [complex(sum(lc[i:])) for i in range(len(lc))]


def annihilating_product(x: np.ndarray, nus: Sequence[complex]) -> np.ndarray:
    out = x.copy()
    eye = np.eye(x.shape[0])
    for nu in nus:
        out = out @ (x + nu * eye)
    return out


@dataclass(frozen=True)
class EigenPrediction:
    kappa: tuple[complex, ...]
    multiplicity: tuple[int, ...]
    # differences[(i, j)] = kappa_{j+1} - kappa_i, paired with the lambda partial sum
    differences: dict = field(repr=False)


def predicted_eigenvalues(level: MomentLevel, dims: DimensionVector) -> EigenPrediction:
    if not dims.strictly_ordered:
        raise QuiverError(f"dims {dims.dims} are not strictly ordered")
    r, n = dims.r, dims.n
    d = dims.dims
    lam = list(level.lambda_c)
    kappa = []
    for j in range(1, r + 1):
        below = sum(d[i - 1] * lam[i - 1] for i in range(1, j))
        above = sum((n - d[i - 1]) * lam[i - 1] for i in range(j, r))
        kappa.append((below - above) / n)
    mult = [d[0]] + [d[j] - d[j - 1] for j in range(1, r)]
    diffs = {}
    for i in range(1, r):
        for j in range(i, r):
            diffs[(i, j)] = (kappa[j] - kappa[i - 1], sum(lam[i - 1:j]))
    return EigenPrediction(tuple(kappa), tuple(mult), diffs)


# ---------------------------------------------------------------- rotations


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if abs(self.norm() - 1.0) > 1e-12:
            raise QuiverError(f"quaternion {self.as_tuple()} is not a unit quaternion")

    def norm(self) -> float:
        return float(np.sqrt(self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    @classmethod
    def normalized(cls, w, x, y, z) -> "Quaternion":
        v = np.array([w, x, y, z], dtype=float)
        v = v / np.linalg.norm(v)
        return cls(*map(float, v))

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        a1, b1, c1, d1 = self.as_tuple()
        a2, b2, c2, d2 = other.as_tuple()
        return Quaternion.normalized(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def su2(self) -> np.ndarray:
        """Matrix acting on (alpha, beta*) pairs; see ``rotate``."""
        w, x, y, z = self.as_tuple()
        return np.array([[w + 1j * x, -(y + 1j * z)], [y - 1j * z, w - 1j * x]])


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
QI = Quaternion(0.0, 1.0, 0.0, 0.0)
QJ = Quaternion(0.0, 0.0, 1.0, 0.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)


def sample_rotations(samples: int = 32, seed: int = 0) -> list[Quaternion]:
    """Identity, j, k, then ``samples`` seeded random unit quaternions."""
    rng = np.random.default_rng(seed)
    out = [ONE, QJ, QK]
    for v in rng.standard_normal((samples, 4)):
        out.append(Quaternion.normalized(*v))
    return out


def rotate_pair(alpha: np.ndarray, beta: np.ndarray, u: Quaternion) -> tuple[np.ndarray, np.ndarray]:
    # Work in (A, B) = (alpha, beta*). i acts as (iA, -iB), j as (A, B) -> (-B, A),
    # and k as the product i.j, so u -> action is multiplicative and j gives
    # (alpha, beta) -> (-beta*, alpha*).
    m = u.su2()
    A, B = alpha, beta.conj().T
    A2 = m[0, 0] * A + m[0, 1] * B
    B2 = m[1, 0] * A + m[1, 1] * B
    return A2, B2.conj().T


def rotate(q: QuiverRep, u: Quaternion) -> QuiverRep:
    pairs = [rotate_pair(a, b, u) for a, b in zip(q.alpha, q.beta)]
    return q.replace([p[0] for p in pairs], [p[1] for p in pairs])


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def rotation_matrix(u: Quaternion) -> np.ndarray:
    """SO(3) matrix acting on the Pauli vector of the moment triple."""
    m = u.su2()
    return np.array([[0.5 * np.trace(sb @ m.conj().T @ sa @ m).real for sb in _PAULI] for sa in _PAULI])


def rotate_moment_triple(lambda_r: float, lambda_c: complex, u: Quaternion) -> tuple[float, complex]:
    """Image of one level's (lambda^R, lambda^C) under rotation by ``u``."""
    s = np.array([-2 * lambda_c.real, 2 * lambda_c.imag, -lambda_r])
    t = rotation_matrix(u) @ s
    return float(-t[2]), complex(-(t[0] - 1j * t[1]) / 2)


# ---------------------------------------------------------------- generators


def random_moment_solution(dims: Sequence[int] | DimensionVector, lambda_c: Sequence[complex],
                           rng: np.random.Generator) -> QuiverRep:
    """Random solution of the complex equations with the given levels.

    Each beta_i is a random full-row-rank matrix and alpha_i solves
    beta_i alpha_i = alpha_{i-1} beta_{i-1} - lambda_i I plus a random
    component in ker beta_i.  Needs ordered dims.
    """
    dv = dims if isinstance(dims, DimensionVector) else DimensionVector(tuple(dims))
    if not dv.ordered:
        raise QuiverError("random_moment_solution needs ordered dims")
    d = dv.dims
    alpha, beta = [], []
    prev = np.zeros((d[0], d[0]), dtype=complex)
    for i in range(dv.r - 1):
        src, dst = d[i], d[i + 1]
        b = (rng.standard_normal((src, dst)) + 1j * rng.standard_normal((src, dst))) / np.sqrt(2 * max(dst, 1))
        rhs = prev - lambda_c[i] * np.eye(src)
        a = np.linalg.pinv(b) @ rhs if src else np.zeros((dst, 0), dtype=complex)
        if src:
            ker = null_space(b)
            if ker.shape[1]:
                z = rng.standard_normal((ker.shape[1], src)) + 1j * rng.standard_normal((ker.shape[1], src))
                a = a + ker @ z / np.sqrt(2)
        alpha.append(a)
        beta.append(b)
        prev = a @ b
    return QuiverRep(dv, tuple(alpha), tuple(beta))


# ---------------------------------------------------------------- JSON


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(obj, shape: tuple[int, int] | None = None) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.size == 0:
        return np.zeros(shape if shape else (0, 0), dtype=complex)
    if arr.shape[-1] != 2:
        raise QuiverError("complex entries must be [re, im] pairs")
    vals = arr[..., 0] + 1j * arr[..., 1]
    if vals.ndim == 1:
        if shape is None:
            raise QuiverError("flat matrix needs a known shape")
        vals = vals.reshape(shape)
    elif shape is not None and vals.shape != shape:
        raise QuiverError(f"matrix shape {vals.shape} does not match {shape}")
    return vals


def quiver_to_json(q: QuiverRep) -> dict:
    return {"dims": list(q.dims.dims), "alpha": [matrix_to_json(a) for a in q.alpha],
            "beta": [matrix_to_json(b) for b in q.beta]}


def quiver_from_json(obj: dict | str) -> QuiverRep:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        dims = DimensionVector(tuple(obj["dims"]))
        d = dims.dims
        alpha = [matrix_from_json(m, (d[i + 1], d[i])) for i, m in enumerate(obj.get("alpha", []))]
        beta = [matrix_from_json(m, (d[i], d[i + 1])) for i, m in enumerate(obj.get("beta", []))]
    except (KeyError, TypeError) as exc:
        raise QuiverError(f"malformed quiver JSON: {exc}") from exc
    return QuiverRep(dims, tuple(alpha), tuple(beta))

"""Strata labels (S, delta), augmentation by zero blocks and scalar chains,
and classification of full-flag moment-map solutions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import rank
from .quiver import (DimensionVector, Quaternion, QuiverError, QuiverRep, default_tol,
                     moment_level, random_moment_solution, rotate_pair, sample_rotations, rotate)
from .standardization import ParabolicFlag

MAX_N = 8


@dataclass(frozen=True)
class Relation:
    pairs: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(i), int(j)) for i, j in self.pairs))

    @property
    def injective(self) -> bool:
        firsts = [i for i, _ in self.pairs]
        seconds = [j for _, j in self.pairs]
        return len(set(firsts)) == len(firsts) and len(set(seconds)) == len(seconds)

    @property
    def subrelation_of_leq(self) -> bool:
        return all(i <= j for i, j in self.pairs)

    def sorted(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)

    def target(self, i: int) -> int:
        return next(j for a, j in self.pairs if a == i)


@dataclass(frozen=True)
class StratumLabel:
    S: Relation
    delta: tuple[tuple[int, int], ...]  # sorted (i, delta(i)) pairs
    n: int

    def __post_init__(self):
        if not isinstance(self.S, Relation):
            object.__setattr__(self, "S", Relation(frozenset(map(tuple, self.S))))
        object.__setattr__(self, "delta", tuple(sorted((int(i), int(d)) for i, d in dict(self.delta).items())))
        if not (self.S.injective and self.S.subrelation_of_leq):
            raise QuiverError(f"S = {self.S.sorted()} is not an injective subrelation of <=")
        if {i for i, _ in self.S.pairs} != {i for i, _ in self.delta}:
            raise QuiverError("delta must be defined exactly on dom S")
        if any(d <= 0 for _, d in self.delta):
            raise QuiverError("delta values must be positive")
        if any(j >= self.n or i < 1 for i, j in self.S.pairs):
            raise QuiverError("relation indices must lie in 1..n-1")
        m = self.m
        if any(v < 0 for v in m) or any(a > b for a, b in zip(m, m[1:])):
            raise QuiverError(f"m = {m} is not ordered")

    @property
    def delta_map(self) -> dict[int, int]:
        return dict(self.delta)

    @property
    def d(self) -> tuple[int, ...]:
        out = [0] * self.n
        dm = self.delta_map
        for i, j in self.S.pairs:
            for k in range(i, j + 1):
                out[k - 1] += dm[i]
        return tuple(out)

    @property
    def m(self) -> tuple[int, ...]:
        return tuple(k + 1 - dk for k, dk in enumerate(self.d))

    @property
    def ell(self) -> int:
        """Number of chain edges, one quaternion each."""
        return sum(j - i for i, j in self.S.pairs)

    def chains(self) -> list[tuple[int, int, int]]:
        dm = self.delta_map
        return [(i, j, dm[i]) for i, j in self.S.sorted()]

    def to_json(self) -> dict:
        return {"S": [list(p) for p in self.S.sorted()], "delta": {str(i): d for i, d in self.delta},
                "m": list(self.m)}

    @classmethod
    def from_json(cls, obj: dict, n: int | None = None) -> "StratumLabel":
        m = obj.get("m")
        n = n if n is not None else (m[-1] if m else None)
        if n is None:
            raise QuiverError("label JSON needs m or an explicit n")
        return cls(Relation(frozenset(tuple(p) for p in obj.get("S", []))),
                   tuple((int(i), int(d)) for i, d in obj.get("delta", {}).items()), n)

    def __str__(self) -> str:
        s = ",".join(f"({i},{j})" for i, j in self.S.sorted())
        dd = ",".join(str(d) for _, d in self.delta)
        return f"({{{s}}}, ({dd}))"


def _injective_relations(levels: int):
    """All injective subrelations of <= on {1..levels}."""
    def rec(i: int, used: frozenset, acc: list):
        if i > levels:
            yield list(acc)
            return
        yield from rec(i + 1, used, acc)
        for j in range(i, levels + 1):
            if j not in used:
                acc.append((i, j))
                yield from rec(i + 1, used | {j}, acc)
                acc.pop()
    yield from rec(1, frozenset(), [])


def enumerate_strata(n: int) -> list[StratumLabel]:
    if not 1 <= n <= MAX_N:
        raise QuiverError(f"n = {n} outside 1..{MAX_N}")
    out = []
    for pairs in _injective_relations(n - 1):
        for values in _delta_choices(pairs, n):
            out.append(StratumLabel(Relation(frozenset(pairs)), tuple(zip((i for i, _ in pairs), values)), n))
    out.sort(key=lambda l: (l.S.sorted(), l.delta))
    return out


def _delta_choices(pairs: list[tuple[int, int]], n: int):
    """delta values making m = n - d ordered; prunes on d_k <= k."""
    d = [0] * n

    def rec(t: int, acc: list):
        if t == len(pairs):
            m = [k + 1 - d[k] for k in range(n)]
            if all(a <= b for a, b in zip(m, m[1:])):
                yield tuple(acc)
            return
        i, j = pairs[t]
        for value in range(1, n + 1):
            if any(d[k - 1] + value > k for k in range(i, j + 1)):
                break
            for k in range(i, j + 1):
                d[k - 1] += value
            acc.append(value)
            yield from rec(t + 1, acc)
            acc.pop()
            for k in range(i, j + 1):
                d[k - 1] -= value

    yield from rec(0, [])


def symplectic_pattern_ok(m: tuple[int, ...]) -> bool:
    prev = 0
    for i, v in enumerate(m[:-1], start=1):
        if v not in (i, prev):
            return False
        prev = v
    return True


def symplectic_labels(n: int) -> list[StratumLabel]:
    """Diagonal-S labels whose m follows m_i in {i, m_{i-1}}."""
    return [l for l in enumerate_strata(n)
            if all(i == j for i, j in l.S.pairs) and symplectic_pattern_ok(l.m)]


# ------------------------------------------------------------ augmentation


def augment(q: QuiverRep, label: StratumLabel, scalars: dict | None = None) -> QuiverRep:
    """Direct sum of q with zero blocks and scalar chains.

    ``scalars[(i, j)]`` lists j - i pairs (a, b), one per chain edge.
    """
    scalars = scalars or {}
    m, n = label.m, label.n
    if tuple(q.dims.dims) != m:
        raise QuiverError(f"quiver dims {q.dims.dims} differ from m = {m}")
    chains = label.chains()
    for i, j, _ in chains:
        if j > i and len(scalars.get((i, j), ())) != j - i:
            raise QuiverError(f"chain ({i},{j}) needs {j - i} scalar pairs")
    dims = [k + 1 for k in range(n)]
    # offsets of each chain inside V_k, after the stable block
    offsets = []
    for k in range(1, n + 1):
        pos, off = m[k - 1], {}
        for i, j, dl in chains:
            if i <= k <= j:
                off[(i, j)] = pos
                pos += dl
        if pos != dims[k - 1]:
            raise QuiverError(f"dimension bookkeeping fails at level {k}")
        offsets.append(off)
    alpha, beta = [], []
    for k in range(1, n):
        a = np.zeros((dims[k], dims[k - 1]), dtype=complex)
        b = np.zeros((dims[k - 1], dims[k]), dtype=complex)
        a[:m[k], :m[k - 1]] = q.alpha[k - 1]
        b[:m[k - 1], :m[k]] = q.beta[k - 1]
        for i, j, dl in chains:
            if i <= k < j:
                av, bv = scalars[(i, j)][k - i]
                src, dst = offsets[k - 1][(i, j)], offsets[k][(i, j)]
                a[dst:dst + dl, src:src + dl] = av * np.eye(dl)
                b[src:src + dl, dst:dst + dl] = bv * np.eye(dl)
        alpha.append(a)
        beta.append(b)
    return QuiverRep(DimensionVector(tuple(dims)), tuple(alpha), tuple(beta))


def rotate_scalars(scalars: dict, u: Quaternion) -> dict:
    out = {}
    for key, pairs in scalars.items():
        rot = []
        for a, b in pairs:
            a2, b2 = rotate_pair(np.array([[a]], dtype=complex), np.array([[b]], dtype=complex), u)
            rot.append((complex(a2[0, 0]), complex(b2[0, 0])))
        out[key] = rot
    return out


def chain_scalars(label: StratumLabel, lambda_r, lambda_c) -> dict:
    """Pairs (a, b) with a b and |a|^2 - |b|^2 equal to the partial level sums."""
    out = {}
    for i, j, _ in label.chains():
        pairs = []
        for t in range(1, j - i + 1):
            c = complex(sum(lambda_c[i + t - 1:j]))
            rho = float(sum(lambda_r[i + t - 1:j]))
            x = (rho + np.sqrt(rho * rho + 4 * abs(c) ** 2)) / 2
            if x <= 0:
                raise QuiverError(f"chain ({i},{j}) edge {t} has vanishing quaternion")
            a = np.sqrt(x)
            pairs.append((complex(a), c / a))
        if j > i:
            out[(i, j)] = pairs
    return out


# ------------------------------------------------------------ dimension data


@dataclass(frozen=True)
class StratumData:
    m: tuple[int, ...]
    ell: int
    flag: ParabolicFlag
    dim_P: int
    dim_PP: int
    dim_T_S: int
    dim_P_S: int
    dim_annihilator: int
    stratum_dim: int
    torus_basis: tuple[tuple[int, ...], ...]


def torus_basis(label: StratumLabel) -> list[tuple[int, ...]]:
    out = []
    for i, j in label.S.sorted():
        out.append(tuple(1 if i <= k <= j else 0 for k in range(1, label.n)))
    return out


def _span_dim(rows) -> int:
    rows = [np.asarray(r, dtype=float) for r in rows]
    if not rows:
        return 0
    return rank(np.vstack(rows))


def stratum_dimension_data(label: StratumLabel) -> StratumData:
    flag = ParabolicFlag.from_dims(label.m)
    basis = torus_basis(label)
    char_image = list(flag.character_image())
    dim_t = _span_dim(basis)
    dim_img = _span_dim(char_image)
    # dim(img ∩ t_S) = dim img + dim t_S - dim(img + t_S)
    inter = dim_img + dim_t - _span_dim(char_image + basis)
    dim_ps = flag.dim_PP + inter
    sl = label.n ** 2 - 1
    return StratumData(label.m, label.ell, flag, flag.dim_P, flag.dim_PP, dim_t, dim_ps,
                       flag.dim_annihilator, 2 * (sl - dim_ps), tuple(basis))


# ------------------------------------------------------------ H_S data


def central_directions(dims: tuple[int, ...], relation: Relation | None) -> np.ndarray:
    """Basis (rows, over levels 1..r-1) of t_S restricted to levels with n_k > 0."""
    levels = len(dims) - 1
    if relation is None or not relation.pairs:
        return np.zeros((0, levels))
    gens = np.array([[1.0 if i <= k <= j else 0.0 for k in range(1, levels + 1)]
                     for i, j in sorted(relation.pairs)])
    dead = [k for k in range(levels) if dims[k] == 0]
    if dead:
        sub = gens[:, dead].T
        _, s, vh = np.linalg.svd(sub)
        kr = int(np.sum(s > 1e-10))
        combos = vh[kr:]
        gens = combos @ gens
    if gens.shape[0] == 0:
        return gens
    _, s, vh = np.linalg.svd(gens)
    return vh[: int(np.sum(s > 1e-10))]


class EmptyStratumError(QuiverError):
    """No hk-stable stable part could be produced for a label."""


def random_stratum_member(label: StratumLabel, rng: np.random.Generator, flow_cfg=None,
                          attempts: int = 3) -> QuiverRep:
    """Random full-flag moment-map solution lying in the stratum of ``label``.

    The stable part is a random complex solution over m with levels obeying
    the S constraints, flowed to the real equations for H_S; chains get the
    quaternions forced by the levels.  Some labels admit no hk-stable part
    at all (forced zero levels clash with the ranks); after ``attempts``
    failures ``EmptyStratumError`` is raised.
    """
    for _ in range(attempts):
        q = _try_stratum_member(label, rng, flow_cfg)
        if q is not None:
            return q
    raise EmptyStratumError(f"no hk-stable member found for {label} (m = {label.m}); "
                            "the stratum is most likely empty")


def _try_stratum_member(label: StratumLabel, rng: np.random.Generator, flow_cfg) -> QuiverRep | None:
    from .kempf_ness import FlowConfig, flow_to_real_zero
    from .stability import is_hk_stable

    m, levels = label.m, label.n - 1
    gens = [np.array([1.0 if i <= k <= j else 0.0 for k in range(1, levels + 1)]) for i, j in label.S.sorted()]
    alive = np.array([m[k] > 0 for k in range(levels)])
    # complex levels on alive coordinates must be orthogonal to the restricted t_S
    cdir = central_directions(m, label.S)
    lam = rng.standard_normal(levels) + 1j * rng.standard_normal(levels)
    if cdir.shape[0]:
        lam = lam - cdir.T @ (cdir @ lam)
    lam[~alive] = 0
    stable = random_moment_solution(m, lam, rng)
    cfg = flow_cfg or FlowConfig(group="HS", relation=label.S)
    res = flow_to_real_zero(stable, cfg)
    if not res.converged or not is_hk_stable(res.quiver):
        return None
    stable = res.quiver
    lv = moment_level(stable)
    lc, lr = np.array(lv.lambda_c), np.array(lv.lambda_r)
    dead = np.where(~alive)[0]
    if dead.size:
        for vec in (lc, lr):
            rhs = np.array([-vec[alive] @ g[alive] for g in gens])
            mat = np.array([g[dead] for g in gens])
            sol = np.linalg.lstsq(mat, rhs, rcond=None)[0]
            if np.linalg.norm(mat @ sol - rhs) > 1e-8:
                raise QuiverError("dead-level constraints are inconsistent")
            vec[dead] = sol
    return augment(stable, label, chain_scalars(label, lr, lc))


# ------------------------------------------------------------ classification


def _beta_rank_table(q: QuiverRep) -> dict[tuple[int, int], int]:
    """rank(beta_k ... beta_{j-1}) for 1 <= k < j <= r (1-based levels)."""
    r = q.r
    out = {}
    for j in range(2, r + 1):
        comp = np.eye(q.dims[j - 1], dtype=complex)
        for k in range(j - 1, 0, -1):
            comp = q.beta[k - 1] @ comp
            out[(k, j)] = rank(comp)
    return out


def rank_profile(q: QuiverRep, samples: int = 32, seed: int = 0) -> tuple[dict, Quaternion]:
    best, best_u, best_total = None, None, -1
    for u in sample_rotations(samples, seed):
        table = _beta_rank_table(rotate(q, u))
        total = sum(table.values())
        if total > best_total:
            best, best_u, best_total = table, u, total
    return best, best_u


def label_from_ranks(table: dict, n: int) -> StratumLabel:
    r = n
    dims = list(range(1, n + 1))
    m = [table.get((i, r), dims[i - 1]) if i < r else n for i in range(1, r + 1)]
    found: list[tuple[int, int, int]] = []
    mprime = list(m)
    while True:
        js = [j for j in range(1, r) if mprime[j - 1] < dims[j - 1]]
        if not js:
            break
        j = max(js)
        delta = dims[j - 1] - mprime[j - 1]
        start = None
        for k in range(1, j + 1):
            total = dims[j - 1] if k == j else table[(k, j)]
            known = sum(dl for s, e, dl in found if s <= k and e >= j)
            if total - m[k - 1] - known >= delta:
                start = k
                break
        if start is None:
            raise QuiverError(f"rank profile {table} has no chain ending at {j}")
        found.append((start, j, delta))
        for k in range(start, j + 1):
            mprime[k - 1] += delta
    return StratumLabel(Relation(frozenset((s, e) for s, e, _ in found)),
                        tuple((s, dl) for s, _, dl in found), n)


def classify(q: QuiverRep, samples: int = 32, seed: int = 0, tol: float | None = None) -> StratumLabel:
    tol = default_tol() if tol is None else tol
    if q.dims.dims != tuple(range(1, q.n + 1)):
        raise QuiverError("classify needs full-flag dims")
    lv = moment_level(q)
    scale = max(1.0, q.norm() ** 2)
    if lv.residual_c > tol * scale or lv.residual_r > tol * scale:
        raise QuiverError(f"moment residuals ({lv.residual_c:.2e}, {lv.residual_r:.2e}) too large")
    if q.n == 1:
        return StratumLabel(Relation(frozenset()), (), 1)
    table, _ = rank_profile(q, samples, seed)
    try:
        return label_from_ranks(table, q.n)
    except QuiverError as exc:
        raise QuiverError(f"rank profile inconsistent with any stratum: {table}") from exc

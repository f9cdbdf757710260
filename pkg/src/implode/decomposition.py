"""Generalized-eigenspace splitting, edge contraction and the decomposition
into an injective/surjective part plus scalar chains."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import cluster, direct_sum, image, intersect, is_injective, is_surjective, null_space
from .quiver import (DimensionVector, Quaternion, QuiverError, QuiverRep, default_tol,
                     moment_level, rotate, sample_rotations)

CLUSTER_TOL = 1e-7
LEAK_TOL = 1e-8
DEFECT_EPS = 1e-13


class DecompositionError(QuiverError):
    pass


# ------------------------------------------------------------ eigenspaces


@dataclass(frozen=True)
class Block:
    label: complex  # tau_i - nu_i, constant along the trail
    taus: tuple[complex | None, ...]  # eigenvalue of alpha_{i-1} beta_{i-1} per level
    quiver: QuiverRep
    bases: tuple[np.ndarray, ...]  # columns embed the block into each V_i


@dataclass(frozen=True)
class SubquiverSplit:
    blocks: tuple[Block, ...]
    transforms: tuple[np.ndarray, ...]  # per level, columns = all block bases side by side
    leakage: float


def _defective_clusters(ev: np.ndarray, tol: float) -> list[list[int]]:
    """Cluster eigenvalues, allowing a k-fold one to spread by DEFECT_EPS^(1/k).

    Larger multiplicities are tried first; a group found at radius
    DEFECT_EPS^(1/k) is kept only when it has at least k members.
    """
    left = list(range(len(ev)))
    out: list[list[int]] = []
    for k in range(len(ev), 1, -1):
        radius = DEFECT_EPS ** (1.0 / k)
        if radius <= tol or len(left) < k:
            continue
        keep = []
        for g in cluster(ev[left], radius):
            members = [left[t] for t in g]
            if len(members) >= k:
                out.append(members)
            else:
                keep.extend(members)
        left = sorted(keep)
    out += [[left[t] for t in g] for g in cluster(ev[left], tol)] if left else []
    return sorted((sorted(g) for g in out), key=lambda g: g[0])


def _gen_eigenspaces(a: np.ndarray, tol: float) -> list[tuple[complex, np.ndarray]]:
    n = a.shape[0]
    if n == 0:
        return []
    ev = np.linalg.eigvals(a)
    groups = _defective_clusters(ev, tol)
    centers = [complex(np.mean(ev[g])) for g in groups]
    for x in range(len(centers)):
        for y in range(x + 1, len(centers)):
            if abs(centers[x] - centers[y]) < 10 * tol:
                raise DecompositionError(
                    f"eigenvalue clusters {centers[x]:.3g} and {centers[y]:.3g} are too close; adjust the tolerance")
    out = []
    for c, g in zip(centers, groups):
        m = len(g)
        shifted = np.linalg.matrix_power(a - c * np.eye(n), m)
        _, _, vh = np.linalg.svd(shifted)
        out.append((c, vh[n - m:].conj().T))
    return out


def eigenspace_split(q: QuiverRep, tol: float | None = None) -> SubquiverSplit:
    tol = default_tol() if tol is None else tol
    level = moment_level(q)
    scale = max(1.0, q.norm() ** 2)
    if level.residual_c > tol * scale:
        raise DecompositionError(f"complex residual {level.residual_c:.3e} too large")
    d = q.dims.dims
    r = q.r
    lam = list(level.lambda_c)
    nu = [sum(lam[i:]) for i in range(r - 1)] + [0.0]
    # per level: list of (trail label, tau, basis)
    per_level = []
    for i in range(r):
        a = q.alpha[i - 1] @ q.beta[i - 1] if i > 0 else np.zeros((d[0], d[0]), dtype=complex)
        spaces = _gen_eigenspaces(a / scale, CLUSTER_TOL)
        per_level.append([(tau * scale - nu[i], tau * scale, basis) for tau, basis in spaces])
    labels: list[complex] = []
    for entries in per_level:
        for lab, _, _ in entries:
            if not any(abs(lab - l) < CLUSTER_TOL * scale for l in labels):
                labels.append(lab)
    transforms = []
    order = []
    for i, entries in enumerate(per_level):
        cols, idx = [], []
        for b, lab in enumerate(labels):
            for l2, tau, basis in entries:
                if abs(l2 - lab) < CLUSTER_TOL * scale:
                    cols.append(basis)
                    idx.append((b, tau, basis.shape[1]))
        transforms.append(np.hstack(cols) if cols else np.zeros((d[i], 0), dtype=complex))
        order.append(idx)
    inv = [np.linalg.inv(t) if t.size else t for t in transforms]
    alpha = [inv[i + 1] @ q.alpha[i] @ transforms[i] for i in range(r - 1)]
    beta = [inv[i] @ q.beta[i] @ transforms[i + 1] for i in range(r - 1)]

    def slices(i):
        out, pos = {}, 0
        for b, _, size in order[i]:
            out[b] = slice(pos, pos + size)
            pos += size
        return out

    sl = [slices(i) for i in range(r)]
    leak = 0.0
    blocks = []
    for b, lab in enumerate(labels):
        bd = [sl[i][b].stop - sl[i][b].start if b in sl[i] else 0 for i in range(r)]
        taus = tuple(next((t for bb, t, _ in order[i] if bb == b), None) for i in range(r))
        ba, bb_ = [], []
        for i in range(r - 1):
            rs = sl[i + 1].get(b, slice(0, 0))
            cs = sl[i].get(b, slice(0, 0))
            ba.append(alpha[i][rs, cs])
            bb_.append(beta[i][cs, rs])
        bases = tuple(transforms[i][:, sl[i][b]] if b in sl[i] else np.zeros((d[i], 0)) for i in range(r))
        blocks.append(Block(complex(lab), taus, QuiverRep(DimensionVector(tuple(bd)), tuple(ba), tuple(bb_)), bases))
    for i in range(r - 1):
        mask_a = np.ones(alpha[i].shape, dtype=bool)
        mask_b = np.ones(beta[i].shape, dtype=bool)
        for b in range(len(labels)):
            if b in sl[i] and b in sl[i + 1]:
                mask_a[sl[i + 1][b], sl[i][b]] = False
                mask_b[sl[i][b], sl[i + 1][b]] = False
        leak = max(leak, float(np.linalg.norm(alpha[i][mask_a])), float(np.linalg.norm(beta[i][mask_b])))
    if leak > LEAK_TOL * max(1.0, q.norm()):
        raise DecompositionError(f"off-block leakage {leak:.3e} exceeds tolerance")
    return SubquiverSplit(tuple(blocks), tuple(transforms), leak)


# ------------------------------------------------------------ contraction


def contract_edge(q: QuiverRep, i: int) -> QuiverRep:
    """Remove the node at the head of edge ``i`` (1-based) when alpha_i is invertible.

    Interior edges give the merged edge (alpha_{i+1} alpha_i, alpha_i^{-1} beta_{i+1});
    the last edge gives (alpha_{r-1} alpha_{r-2}, beta_{r-2} alpha_{r-1}^{-1}).
    """
    r = q.r
    if not 1 <= i <= r - 1:
        raise QuiverError(f"edge {i} outside 1..{r - 1}")
    a = q.alpha[i - 1]
    if a.shape[0] != a.shape[1] or np.linalg.cond(a) > 1e8:
        raise QuiverError(f"alpha_{i} is not invertible")
    ainv = np.linalg.inv(a)
    alpha, beta = list(q.alpha), list(q.beta)
    dims = list(q.dims.dims)
    if i < r - 1:
        new_a = alpha[i] @ a
        new_b = ainv @ beta[i]
        alpha[i - 1:i + 1] = [new_a]
        beta[i - 1:i + 1] = [new_b]
        del dims[i]
    else:
        if r >= 3:
            alpha[i - 2] = a @ alpha[i - 2]
            beta[i - 2] = beta[i - 2] @ ainv
        del alpha[i - 1], beta[i - 1]
        del dims[i - 1]
    return QuiverRep(DimensionVector(tuple(dims)), tuple(alpha), tuple(beta))


def expand_edge(q: QuiverRep, i: int, alpha_i: np.ndarray, lambda_next: complex) -> QuiverRep:
    """Undo an interior contraction at edge ``i`` given alpha_i and lambda_{i+1}."""
    alpha_i = np.asarray(alpha_i, dtype=complex)
    ainv = np.linalg.inv(alpha_i)
    merged_a, merged_b = q.alpha[i - 1], q.beta[i - 1]
    a_next = merged_a @ ainv
    b_next = alpha_i @ merged_b
    b_i = ainv @ (lambda_next * np.eye(alpha_i.shape[0]) + b_next @ a_next)
    alpha = list(q.alpha[:i - 1]) + [alpha_i, a_next] + list(q.alpha[i:])
    beta = list(q.beta[:i - 1]) + [b_i, b_next] + list(q.beta[i:])
    dims = list(q.dims.dims)
    dims.insert(i, alpha_i.shape[0])
    return QuiverRep(DimensionVector(tuple(dims)), tuple(alpha), tuple(beta))


# ------------------------------------------------------------ lambda relation


def _triple(lr: float, lc: complex) -> np.ndarray:
    return np.array([lr, lc.real, lc.imag])


def lambda_relation(lambda_triples, tol: float = 1e-7) -> set[tuple[int, int]]:
    """Pairs (i, j), i <= j, whose partial sum of triples vanishes (1-based)."""
    t = [_triple(lr, lc) for lr, lc in lambda_triples]
    out = set()
    for i in range(len(t)):
        acc = np.zeros(3)
        for j in range(i, len(t)):
            acc = acc + t[j]
            if np.linalg.norm(acc) < tol:
                out.add((i + 1, j + 1))
    return out


def is_lambda_regular(lambda_triples, tol: float = 1e-7) -> bool:
    """Vanishing complex partial sums coincide with vanishing triple sums (with margin)."""
    for i in range(len(lambda_triples)):
        acc_t = np.zeros(3)
        acc_c = 0j
        for j in range(i, len(lambda_triples)):
            lr, lc = lambda_triples[j]
            acc_t = acc_t + _triple(lr, lc)
            acc_c += lc
            if np.linalg.norm(acc_t) >= tol and abs(acc_c) <= 10 * tol:
                return False
    return True


# ------------------------------------------------------------ gl-decomposition


@dataclass(frozen=True)
class ScalarQuiver:
    m: int
    p: int  # number of nodes
    a: tuple[complex, ...]
    b: tuple[complex, ...]
    start: int  # 1-based level of the first node

    @property
    def end(self) -> int:
        return self.start + self.p - 1


@dataclass(frozen=True)
class GLDecomposition:
    stable_part: QuiverRep
    scalars: tuple[ScalarQuiver, ...]
    rotation_used: Quaternion
    stable_bases: tuple[np.ndarray, ...] = field(repr=False)


def _composites(q: QuiverRep):
    """B_i = beta_i ... beta_{r-1} (V_r -> V_i) and A_i = alpha_{r-1} ... alpha_i."""
    r, n = q.r, q.n
    bcomp = [None] * r
    acomp = [None] * r
    bcomp[r - 1] = np.eye(n, dtype=complex)
    acomp[r - 1] = np.eye(n, dtype=complex)
    for i in range(r - 2, -1, -1):
        bcomp[i] = q.beta[i] @ bcomp[i + 1]
        acomp[i] = acomp[i + 1] @ q.alpha[i]
    return acomp, bcomp


def _chain_spaces(alpha, beta, dims, s, e, k):
    """Subspace of level k (all 1-based) carrying chains that start at s and end at e."""
    dk = dims[k - 1]
    pieces = []
    # starts >= s: killed by beta_{s-1} ... beta_{k-1}
    if s > 1:
        m = np.eye(dk, dtype=complex)
        for t in range(k - 1, s - 2, -1):
            m = beta[t - 1] @ m
        pieces.append(null_space(m))
    # starts <= s: image of alpha_{k-1} ... alpha_s
    m = np.eye(dims[s - 1], dtype=complex)
    for t in range(s, k):
        m = alpha[t - 1] @ m
    pieces.append(image(m) if k > s else np.eye(dk, dtype=complex))
    # ends <= e: killed by alpha_e ... alpha_k
    m = np.eye(dk, dtype=complex)
    for t in range(k, e + 1):
        m = alpha[t - 1] @ m
    pieces.append(null_space(m))
    # ends >= e: image of beta_k ... beta_{e-1}
    if e > k:
        m = np.eye(dims[e - 1], dtype=complex)
        for t in range(e - 1, k - 1, -1):
            m = beta[t - 1] @ m
        pieces.append(image(m))
    return intersect(pieces, dk)


def _split_rotated(q: QuiverRep, u: Quaternion, scale: float) -> GLDecomposition:
    r, d = q.r, q.dims.dims
    acomp, bcomp = _composites(q)
    stable_b, chain_b, frames = [], [], []
    for i in range(r):
        if i == r - 1:
            s, c = np.eye(d[i], dtype=complex), np.zeros((d[i], 0), dtype=complex)
        else:
            s, c = image(bcomp[i]), null_space(acomp[i])
            if not direct_sum(s, c, d[i]):
                raise DecompositionError(f"level {i + 1} does not split into stable and chain parts")
        stable_b.append(s)
        chain_b.append(c)
        frames.append(np.hstack([s, c]))
    inv = [np.linalg.inv(f) if f.size else f for f in frames]
    m = [s.shape[1] for s in stable_b]
    alpha = [inv[i + 1] @ q.alpha[i] @ frames[i] for i in range(r - 1)]
    beta = [inv[i] @ q.beta[i] @ frames[i + 1] for i in range(r - 1)]
    leak = 0.0
    for i in range(r - 1):
        leak = max(leak, np.linalg.norm(alpha[i][m[i + 1]:, :m[i]]), np.linalg.norm(alpha[i][:m[i + 1], m[i]:]),
                   np.linalg.norm(beta[i][m[i]:, :m[i + 1]]), np.linalg.norm(beta[i][:m[i], m[i + 1]:]))
    if leak > LEAK_TOL * np.sqrt(scale):
        raise DecompositionError(f"stable/chain leakage {leak:.3e}")
    sa = [alpha[i][:m[i + 1], :m[i]] for i in range(r - 1)]
    sb = [beta[i][:m[i], :m[i + 1]] for i in range(r - 1)]
    if not (all(is_injective(a) for a in sa) and all(is_surjective(b) for b in sb)):
        raise DecompositionError("stable part is not injective/surjective at this rotation")
    stable = QuiverRep(DimensionVector(tuple(m)), tuple(sa), tuple(sb))
    cd = [d[i] - m[i] for i in range(r)]
    ca = [alpha[i][m[i + 1]:, m[i]:] for i in range(r - 1)]
    cb = [beta[i][m[i]:, m[i + 1]:] for i in range(r - 1)]
    lam = moment_level(q).lambda_c
    scalars = []
    used = [0] * r
    for s in range(1, r):
        for e in range(s, r):
            if cd[s - 1] == 0:
                continue
            base = _chain_spaces(ca, cb, cd, s, e, s)
            delta = base.shape[1]
            if delta == 0:
                continue
            bases = [base]
            a_vals, b_vals = [], []
            for k in range(s, e):
                nxt = ca[k - 1] @ bases[-1]
                back = cb[k - 1] @ nxt
                bval = np.trace(np.linalg.lstsq(bases[-1], back, rcond=None)[0]) / delta
                if np.linalg.norm(back - bval * bases[-1]) > 1e-6 * max(1.0, np.linalg.norm(back)):
                    raise DecompositionError(f"chain ({s},{e}) is not scalar")
                a_vals.append(1.0 + 0j)
                b_vals.append(complex(bval))
                bases.append(nxt)
            for k in range(s, e + 1):
                used[k - 1] += delta
            for t, (av, bv) in enumerate(zip(a_vals, b_vals)):
                target = sum(lam[s + t:e])
                if abs(av * bv - target) > 1e-6 * scale:
                    raise DecompositionError(f"chain ({s},{e}) violates a b = partial lambda sum")
            scalars.append(ScalarQuiver(delta, e - s + 1, tuple(a_vals), tuple(b_vals), s))
    if used != cd:
        raise DecompositionError(f"chain dimensions {used} do not fill the complement {cd}")
    return GLDecomposition(stable, tuple(scalars), u, tuple(stable_b))


def gl_decompose(q: QuiverRep, u: Quaternion | str = "auto", samples: int = 32, seed: int = 0,
                 tol: float | None = None) -> GLDecomposition:
    tol = default_tol() if tol is None else tol
    if not q.dims.ordered:
        raise QuiverError("dims must be ordered")
    scale = max(1.0, q.norm() ** 2)
    level = moment_level(q)
    if level.residual_c > tol * scale or level.residual_r > tol * scale:
        raise QuiverError("quiver does not solve the moment equations")
    candidates = sample_rotations(samples, seed) if u == "auto" else [u]
    last = "no rotation tried"
    for cand in candidates:
        qr = rotate(q, cand)
        lv = moment_level(qr)
        triples = list(zip(lv.lambda_r, lv.lambda_c))
        if not is_lambda_regular(triples, CLUSTER_TOL * scale):
            last = "lambda-regularity fails"
            continue
        try:
            return _split_rotated(qr, cand, scale)
        except DecompositionError as exc:
            last = str(exc)
    raise DecompositionError(f"no tested rotation decomposes the quiver ({last})")

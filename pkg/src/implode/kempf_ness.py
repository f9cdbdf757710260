"""Gradient flow inside a complexified orbit toward a zero of the real
moment map, and a polystability probe built on it.

The step multiplies level k by exp(-s D_k) where D is the real moment
defect projected onto the Lie algebra of the chosen group:

* ``H``      trace-free parts only,
* ``HS``     trace-free parts plus the central directions of t_S,
* ``Htilde`` the full defect against a target level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import herm_exp
from .quiver import QuiverError, QuiverRep, endomorphism_Xk, real_moment, traceless
from .stability import StabilityVerdict, Verdict


@dataclass(frozen=True)
class FlowConfig:
    max_iters: int = 5000
    step: float = 0.5
    shrink: float = 0.5
    grow: float = 1.5
    target: float = 1e-10
    group: str = "H"
    relation: object = None  # stratification.Relation for HS
    level: tuple[float, ...] | None = None  # target real levels (Htilde / HS)
    armijo: float = 1e-4
    max_gauge: float | None = None  # stop once the gauge log-norm exceeds this
    stall_window: int = 200  # stop when the residual fails to halve over this many steps

    def __post_init__(self):
        if self.group not in ("H", "HS", "Htilde"):
            raise QuiverError(f"unknown group {self.group!r}")
        if min(self.max_iters, self.step, self.shrink, self.grow, self.target) <= 0 or self.shrink >= 1:
            raise QuiverError("flow parameters must be positive with shrink < 1")


@dataclass
class FlowResult:
    quiver: QuiverRep
    gauge: list[np.ndarray]  # output = input.gauge(gauge)
    trace: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    @property
    def residual(self) -> float:
        return self.trace[-1]

    def gauge_lognorm(self) -> float:
        return _lognorm(self.gauge)


def _lognorm(gauge: list[np.ndarray]) -> float:
    vals = [np.max(np.abs(np.log(np.linalg.svd(g, compute_uv=False)))) for g in gauge if g.size]
    return float(max(vals, default=0.0))


class _Projector:
    def __init__(self, q: QuiverRep, cfg: FlowConfig):
        self.dims = q.dims.dims
        self.group = cfg.group
        levels = q.r - 1
        self.level = np.zeros(levels) if cfg.level is None else np.asarray(cfg.level, dtype=float)
        self.central = None
        if cfg.group == "HS":
            from .stratification import central_directions

            dirs = central_directions(self.dims, cfg.relation)
            # orthonormalize against <c, c'> = sum c_k c'_k / n_k on live levels
            w = np.array([1.0 / d if d else 0.0 for d in self.dims[:-1]])
            if dirs.shape[0]:
                gram = (dirs * w) @ dirs.T
                l = np.linalg.cholesky(gram)
                dirs = np.linalg.solve(l, dirs)
            self.central = (dirs, w)

    def __call__(self, mu: list[np.ndarray], linear: bool = False) -> list[np.ndarray]:
        """Project mu - level; with ``linear`` the level is dropped (for derivatives)."""
        level = 0.0 * self.level if linear else self.level
        out = []
        if self.group == "Htilde":
            for k, m in enumerate(mu):
                out.append(m - level[k] * np.eye(m.shape[0]))
            return out
        for m in mu:
            out.append(traceless(m))
        if self.group == "HS" and self.central[0].shape[0]:
            dirs, w = self.central
            traces = np.array([np.trace(m).real - level[k] * m.shape[0] for k, m in enumerate(mu)])
            # coordinates c_k of the projection; as a matrix, c_k / n_k * I
            coeff = dirs @ (traces * w)
            c = dirs.T @ coeff
            for k, m in enumerate(out):
                if m.shape[0]:
                    out[k] = m + c[k] / m.shape[0] * np.eye(m.shape[0])
        return out


def _norm(parts: list[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.linalg.norm(p) ** 2 for p in parts)))


def _dmu(q: QuiverRep, xi: list[np.ndarray]) -> list[np.ndarray]:
    """Derivative of the real moment map along the Hermitian direction xi."""
    r = q.r
    full = list(xi) + [np.zeros((q.n, q.n))]
    da = [full[i + 1] @ q.alpha[i] - q.alpha[i] @ full[i] for i in range(r - 1)]
    db = [full[i] @ q.beta[i] - q.beta[i] @ full[i + 1] for i in range(r - 1)]
    out = []
    for i in range(r - 1):
        a, b = q.alpha[i], q.beta[i]
        t = da[i].conj().T @ a
        s = db[i] @ b.conj().T
        m = (s + s.conj().T) - (t + t.conj().T)
        if i > 0:
            ap, bp = q.alpha[i - 1], q.beta[i - 1]
            u = da[i - 1] @ ap.conj().T
            v = db[i - 1].conj().T @ bp
            m = m + (u + u.conj().T) - (v + v.conj().T)
        out.append(m)
    return out


def _inner(x: list[np.ndarray], y: list[np.ndarray]) -> float:
    return float(sum(np.vdot(a, b).real for a, b in zip(x, y)))


def flow_to_real_zero(q: QuiverRep, cfg: FlowConfig | None = None) -> FlowResult:
    cfg = cfg or FlowConfig()
    proj = _Projector(q, cfg)
    gauge = [np.eye(d, dtype=complex) for d in q.dims.dims[:-1]]
    cur = q
    direction = proj(real_moment(cur))
    res = _norm(direction)
    trace = [res]
    step = cfg.step
    it = 0
    while res >= cfg.target and it < cfg.max_iters:
        it += 1
        slope = _inner(direction, proj(_dmu(cur, direction), linear=True))
        accepted = False
        # trust region: keep every exponent within [-2, 2]
        spread = max((np.linalg.norm(d, 2) for d in direction if d.size), default=0.0)
        if spread > 0:
            step = min(step, 2.0 / spread)
        while step > 1e-14:
            g = [herm_exp(d, -step) for d in direction]
            cand = cur.gauge(g)
            cdir = proj(real_moment(cand))
            cres = _norm(cdir)
            if np.isfinite(cres) and 0.5 * cres ** 2 <= 0.5 * res ** 2 - cfg.armijo * step * slope and cres <= res:
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            break
        cur, direction, res = cand, cdir, cres
        gauge = [gi @ ga for gi, ga in zip(g, gauge)]
        trace.append(res)
        step *= cfg.grow
        if cfg.max_gauge is not None and it % 10 == 0 and _lognorm(gauge) > cfg.max_gauge:
            break
        if it >= cfg.stall_window and res > 0.5 * trace[-cfg.stall_window]:
            break
    return FlowResult(cur, gauge, trace, res < cfg.target, it)


def rho_drift(q: QuiverRep, result: FlowResult) -> float:
    from .kostant import rho

    if q.r == 1:
        return 0.0
    before = rho(traceless(endomorphism_Xk(q, 1)))
    after = rho(traceless(endomorphism_Xk(result.quiver, 1)))
    return float(np.max(np.abs(before - after), initial=0.0))


def polystable_probe(q: QuiverRep, cfg: FlowConfig | None = None, divergence: float = 2.0,
                     settle: float = 0.5) -> StabilityVerdict:
    """Flow to 1e-6, then to the target, and compare gauge growth.

    A bounded gauge on convergence is evidence of a closed orbit.  Growth
    of roughly half the log of the residual ratio signals a limit outside
    the orbit.
    """
    cfg = cfg or FlowConfig()
    scale = q.norm()
    if scale == 0:
        return StabilityVerdict(Verdict.POLYSTABLE, "zero quiver already solves the equations", "probe")
    unit = q.scaled(1.0 / scale)
    coarse_cfg = FlowConfig(**{**cfg.__dict__, "target": max(cfg.target, 1e-6)})
    coarse = flow_to_real_zero(unit, coarse_cfg)
    fine = flow_to_real_zero(coarse.quiver, FlowConfig(**{**cfg.__dict__, "max_gauge": 2 * divergence}))
    growth = fine.gauge_lognorm()
    total = FlowResult(fine.quiver, [a @ b for a, b in zip(fine.gauge, coarse.gauge)])
    detail = (f"residual {fine.trace[-1]:.2e}, gauge log-norm {total.gauge_lognorm():.2f}, "
              f"late growth {growth:.2f}")
    if fine.converged and growth < settle:
        return StabilityVerdict(Verdict.POLYSTABLE, detail, "probe")
    if growth > divergence:
        return StabilityVerdict(Verdict.NOT_POLYSTABLE, "gauge diverging: " + detail, "probe")
    return StabilityVerdict(Verdict.INCONCLUSIVE, detail, "probe")

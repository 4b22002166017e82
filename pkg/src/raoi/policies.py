"""Schedulers: stationary randomized (SRP), drift-plus-penalty (DPP), periodic round-robin (PRR).

A scheduling *cell* is one (user, k, P) triple.  Cells are flattened in
lexicographic (user, k index, P index) order with k and P grids ascending;
every tie-break in this module follows that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .phy import PacketOutcome
from .tables import DistortionModel, ErrorTable, distortion

DEFAULT_D_BAR = 2.0 ** -0.1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class UserConfig:
    table: ErrorTable
    weight: float = 1.0
    d_bar: float = DEFAULT_D_BAR
    distortion: DistortionModel = DistortionModel()
    beta: float = 100.0
    n: int | None = None
    k_values: tuple[int, ...] | None = None
    p_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n is None:
            object.__setattr__(self, "n", self.table.n)
        ks = tuple(sorted(int(k) for k in (self.k_values or self.table.k_values)))
        ps = tuple(sorted(float(p) for p in (self.p_values or self.table.p_values)))
        object.__setattr__(self, "k_values", ks)
        object.__setattr__(self, "p_values", ps)
        missing_k = set(ks) - set(self.table.k_values)
        missing_p = set(ps) - set(self.table.p_values)
        if missing_k or missing_p:
            raise ConfigError(f"table does not cover k={sorted(missing_k)} P={sorted(missing_p)}")
        if not (self.weight > 0 and self.d_bar > 0 and self.beta > 0):
            raise ConfigError("weight, d_bar and beta must be positive")


@dataclass(frozen=True)
class SystemConfig:
    users: tuple[UserConfig, ...]
    N: int = 15
    P_bar: float = 2.0
    V1: float = 1.0
    V2: float = 1.0
    detection: str | None = None    # "crc" | "genie" | None (follow each table's tag)
    allow_idle: bool = False        # synthetic zero-power, zero-success SRP cell

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if not self.users:
            raise ConfigError("need at least one user")
        if self.detection not in (None, "crc", "genie"):
            raise ConfigError(f"unknown detection mode {self.detection!r}")
        if not (self.P_bar > 0 and self.V1 > 0 and self.V2 > 0):
            raise ConfigError("P_bar, V1 and V2 must be positive")
        for i, u in enumerate(self.users):
            if u.n > self.N:
                raise ConfigError(f"user {i}: n={u.n} exceeds slot capacity N={self.N}")

    @property
    def M(self) -> int:
        return len(self.users)

    def detection_for(self, i: int) -> str:
        if self.detection is not None:
            return self.detection
        return "crc" if self.users[i].table.detection == "crc" else "genie"

    def with_bounds(self, P_bar: float | None = None, d_bar: float | None = None) -> "SystemConfig":
        users = self.users if d_bar is None else tuple(replace(u, d_bar=d_bar) for u in self.users)
        return replace(self, users=users, P_bar=self.P_bar if P_bar is None else P_bar)

    @cached_property
    def cells(self) -> "Cells":
        return Cells.build(self)


@dataclass(frozen=True, eq=False)
class Cells:
    """Flattened per-cell arrays.  ``eps`` is the success probability the
    policies use; ``eps_genie`` is the true-success probability."""

    user: np.ndarray
    k: np.ndarray
    P: np.ndarray
    eps: np.ndarray
    eps_genie: np.ndarray
    dist: np.ndarray
    idle_cell: int | None = None

    @classmethod
    def build(cls, cfg: SystemConfig) -> "Cells":
        rows = []
        for i, u in enumerate(cfg.users):
            t = u.table
            col = t.reported_success if cfg.detection_for(i) == "crc" else t.genie_success
            for k in u.k_values:
                ki = t.k_values.index(k)
                d = distortion(u.distortion, k)
                for P in u.p_values:
                    pi = t.p_values.index(P)
                    rows.append((i, k, P, col[ki, pi], t.genie_success[ki, pi], d))
        idle = None
        if cfg.allow_idle:
            idle = len(rows)
            rows.append((-1, 0, 0.0, 0.0, 0.0, 0.0))
        user, k, P, eps, gen, dist = (np.array(c) for c in zip(*rows))
        return cls(user.astype(np.int64), k.astype(np.int64), P.astype(float), eps.astype(float),
                   gen.astype(float), dist.astype(float), idle)

    def __len__(self):
        return self.user.size

    def success_matrix(self, M: int) -> np.ndarray:
        """(M, C) matrix A with (A @ mu)[i] = p_i."""
        A = np.zeros((M, len(self)))
        for i in range(M):
            A[i, self.user == i] = self.eps[self.user == i]
        return A

    def distortion_matrix(self, M: int) -> np.ndarray:
        B = np.zeros((M, len(self)))
        for i in range(M):
            m = self.user == i
            B[i, m] = self.eps[m] * self.dist[m]
        return B


# ---------------------------------------------------------------------------
# SRP


@dataclass(frozen=True, eq=False)
class SrpSolution:
    mu: np.ndarray
    analytic_raoi: float
    success_rate: np.ndarray
    lower_bound: float
    dual_power: float
    dual_distortion: np.ndarray
    feasible: bool
    status: str
    kkt_residual: float = math.nan
    certificate: np.ndarray | None = None
    cells: Cells | None = field(default=None, repr=False)

    def mu_by_user(self, cfg: SystemConfig) -> list[np.ndarray]:
        out = []
        for i, u in enumerate(cfg.users):
            out.append(self.mu[self.cells.user == i].reshape(len(u.k_values), len(u.p_values)))
        return out


def success_rates(mu, cfg: SystemConfig) -> np.ndarray:
    return cfg.cells.success_matrix(cfg.M) @ np.asarray(mu, dtype=float)


def analytic_srp_raoi(mu, cfg: SystemConfig) -> float:
    """Long-run weighted RAoI of the SRP with probabilities ``mu`` (renewal formula).

    Returns ``inf`` when some user never succeeds.
    """
    p = success_rates(mu, cfg)
    total = 0.0
    for i, u in enumerate(cfg.users):
        if p[i] <= 0:
            return math.inf
        total += u.weight * (1.0 / p[i] + u.n / cfg.N - 1.0)
    return total / cfg.M


def lower_bound_value(p, cfg: SystemConfig) -> float:
    if np.any(np.asarray(p) <= 0):
        return math.inf
    return sum(u.weight * (1.0 / p[i] + u.n / cfg.N) for i, u in enumerate(cfg.users)) / (2 * cfg.M)


def lower_bound(srp: SrpSolution, cfg: SystemConfig) -> float:
    return lower_bound_value(srp.success_rate, cfg)


def _constraint_data(cfg: SystemConfig):
    cells = cfg.cells
    M = cfg.M
    A = cells.success_matrix(M)
    B = cells.distortion_matrix(M)
    G = np.vstack([cells.P[None, :], B])
    h = np.concatenate([[cfg.P_bar], [u.d_bar for u in cfg.users]])
    w = np.array([u.weight for u in cfg.users])
    return A, G, h, w


def _linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
                   options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})


def _infeasibility_certificate(G, h, C):
    """Minimise the common violation r of G x <= h over the simplex.

    Returns (r*, y) where y >= 0 (normalised) satisfies min_j (G^T y)_j > y.h
    whenever r* > 0, a Farkas-type proof that no distribution meets the bounds.
    """
    m = G.shape[0]
    c = np.zeros(C + 1)
    c[-1] = 1.0
    A_ub = np.hstack([G, -np.ones((m, 1))])
    A_eq = np.hstack([np.ones((1, C)), np.zeros((1, 1))])
    res = _linprog(c, A_ub, h, A_eq, [1.0], bounds=[(0, None)] * (C + 1))
    y = -res.ineqlin.marginals
    y = np.maximum(y, 0)
    if y.sum() > 0:
        y = y / y.sum()
    return res.fun, y


def _interior_point(G_rows, h_rows, A_eq, b_eq, C):
    """Maximise the smallest slack s of G_rows x <= h_rows subject to A_eq x = b_eq."""
    m = G_rows.shape[0]
    c = np.zeros(C + 1)
    c[-1] = -1.0
    A_ub = np.hstack([G_rows, np.ones((m, 1))])
    A_eq2 = np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])
    res = _linprog(c, A_ub, h_rows, A_eq2, b_eq, bounds=[(None, None)] * C + [(None, 1.0)])
    if res.status != 0:
        return None, -math.inf
    return res.x[:C], res.x[-1]


_SLACK_TOL = 1e-9


def solve_srp(cfg: SystemConfig, *, method: str = "barrier", tol: float = 1e-10,
              max_iter: int = 100_000) -> SrpSolution:
    """Optimal stationary randomized policy.

    ``method="barrier"`` (default) is a log-barrier Newton method and reaches
    KKT residuals far below 1e-6.  ``method="mirror"`` runs entropic mirror
    descent with dual subgradient ascent; it is slow and kept as a cross-check.
    """
    cells = cfg.cells
    C = len(cells)
    M = cfg.M
    A, G, h, w = _constraint_data(cfg)

    r_star, y = _infeasibility_certificate(G, h, C)
    if r_star > _SLACK_TOL:
        return _failed(cfg, "infeasible", certificate=y)

    if method == "mirror":
        return _solve_mirror(cfg, A, G, h, w, max_iter)
    if method != "barrier":
        raise ValueError(f"unknown SRP method {method!r}")

    # Inequality rows: G x <= h, -x <= 0, -A x <= 0 (p_i > 0 lives in the objective domain).
    all_rows = np.vstack([G, -np.eye(C), -A])
    all_h = np.concatenate([h, np.zeros(C), np.zeros(M)])
    ones = np.ones((1, C))
    x0, s = _interior_point(all_rows, all_h, ones, [1.0], C)
    if x0 is None:
        return _failed(cfg, "infeasible", certificate=y)

    tight = np.zeros(all_rows.shape[0], dtype=bool)
    if s <= _SLACK_TOL:
        # Some inequalities hold with equality at every feasible point: find them.
        for r in range(all_rows.shape[0]):
            res = _linprog(all_rows[r], G, h, ones, [1.0], bounds=[(0, None)] * C)
            if res.status == 0 and all_h[r] - res.fun <= _SLACK_TOL:
                tight[r] = True
        if np.any(tight[G.shape[0] + C:]):
            return _failed(cfg, "zero_success")

    free = ~tight[G.shape[0]:G.shape[0] + C]       # cells not forced to zero
    g_tight = tight[:G.shape[0]]
    Gf = G[:, free]
    Af = A[:, free]
    Eq, beq = _independent_rows(np.vstack([np.ones((1, free.sum())), Gf[g_tight]]),
                                np.concatenate([[1.0], h[g_tight]]))
    Gin = Gf[~g_tight]
    hin = h[~g_tight]
    Cf = int(free.sum())
    if s <= _SLACK_TOL:
        rows = np.vstack([Gin, -np.eye(Cf), -Af])
        rhs = np.concatenate([hin, np.zeros(Cf), np.zeros(M)])
        x0, s = _interior_point(rows, rhs, Eq, beq, Cf)
        if x0 is None or s <= 0:
            return _failed(cfg, "degenerate")
    else:
        x0 = x0[free]

    xf, t = _barrier(Af, w, Gin, hin, Eq, beq, x0, tol)
    x = np.zeros(C)
    x[free] = xf
    kkt, duals = kkt_residual(x, cfg)

    # Active-set polish: cells sitting at the central-path floor (x_j below its
    # barrier dual 1/(t x_j)) belong at zero.  Nearly degenerate cells park
    # there at ~1e-7, which blurs the KKT certificate; re-solve without them and
    # keep whichever point certifies better.
    drop = free & (x < 1.0 / math.sqrt(t)) if math.isfinite(t) else np.zeros(C, dtype=bool)
    if drop.any() and (free & ~drop).any():
        keep = free & ~drop
        Gk, Ak = G[:, keep], A[:, keep]
        Eqk, beqk = _independent_rows(np.vstack([np.ones((1, keep.sum())), Gk[g_tight]]),
                                      np.concatenate([[1.0], h[g_tight]]))
        Gink = Gk[~g_tight]
        Ck = int(keep.sum())
        rows = np.vstack([Gink, -np.eye(Ck), -Ak])
        rhs = np.concatenate([hin, np.zeros(Ck), np.zeros(M)])
        xk0, sk = _interior_point(rows, rhs, Eqk, beqk, Ck)
        if xk0 is not None and sk > _SLACK_TOL:
            xk, _ = _barrier(Ak, w, Gink, hin, Eqk, beqk, xk0, tol)
            xp = np.zeros(C)
            xp[keep] = xk
            kkt_p, duals_p = kkt_residual(xp, cfg)
            if kkt_p < kkt:
                x, kkt, duals = xp, kkt_p, duals_p
    return _solution(cfg, x, duals, kkt, "optimal")


def _independent_rows(E, b):
    keep = []
    for r in range(E.shape[0]):
        if np.linalg.matrix_rank(E[keep + [r]], tol=1e-10) > len(keep):
            keep.append(r)
    return E[keep], np.asarray(b, dtype=float)[keep]


def kkt_residual(mu, cfg: SystemConfig, active_tol: float = 1e-7) -> tuple[float, np.ndarray]:
    """KKT residual of ``mu`` for the SRP program, with fitted multipliers.

    Multipliers for the power/distortion rows with slack <= ``active_tol`` (the
    others are held at zero) and for the simplex row are chosen by a small LP
    that minimises the worst stationarity / dual-feasibility violation.
    Returns (residual relative to the gradient scale, [power dual, distortion duals...]).
    """
    A, G, h, w = _constraint_data(cfg)
    mu = np.asarray(mu, dtype=float)
    p = A @ mu
    if np.any(p <= 0):
        return math.inf, np.full(G.shape[0], math.nan)
    grad = -(A.T @ (w / p ** 2))
    scale = max(1.0, float(np.max(np.abs(grad))))
    slack = h - G @ mu
    act = np.flatnonzero(slack <= active_tol * np.maximum(1.0, np.abs(h)))
    pos = mu > active_tol
    na = act.size
    # variables: lambda_act (>= 0), gamma (free), tau (>= 0); minimise tau
    C = mu.size
    Ga = G[act].T                    # (C, na)
    rows, rhs = [], []
    for j in range(C):
        base = np.concatenate([Ga[j], [1.0]])
        rows.append(np.concatenate([-base, [-1.0]]))        # -(grad + ...) <= tau
        rhs.append(grad[j])
        if pos[j]:
            rows.append(np.concatenate([base, [-1.0]]))     # (grad + ...) <= tau
            rhs.append(-grad[j])
    c = np.zeros(na + 2)
    c[-1] = 1.0
    bounds = [(0, None)] * na + [(None, None), (0, None)]
    res = _linprog(c, np.array(rows), np.array(rhs), bounds=bounds)
    lam = np.zeros(G.shape[0])
    lam[act] = res.x[:na]
    reduced = grad + G.T @ lam + res.x[na]
    comp = float(np.max(np.abs(reduced[~pos] * mu[~pos]))) if (~pos).any() else 0.0
    resid = max(float(res.fun), comp, float(np.max(lam * np.maximum(slack, 0.0)))) / scale
    feas = max(float(max(0.0, -slack.min())), abs(float(mu.sum()) - 1.0), float(max(0.0, -mu.min())))
    return max(resid, feas), lam


def _barrier(A, w, Gin, hin, Eq, beq, x, tol):
    """Log-barrier path following for min sum_i w_i / (A x)_i with Gin x <= hin, x >= 0, Eq x = beq.

    Newton steps live in the null space of ``Eq``, so the equality rows hold to
    rounding no matter how ill-conditioned the barrier Hessian becomes.
    """
    Z = null_space(Eq)
    m_ineq = Gin.shape[0] + x.size
    if Z.shape[1] == 0:
        return x, math.inf

    def phi(xx, t):
        pp = A @ xx
        ss = hin - Gin @ xx
        if np.any(xx <= 0) or np.any(ss <= 0) or np.any(pp <= 0):
            return math.inf
        return t * float(np.sum(w / pp)) - float(np.sum(np.log(ss))) - float(np.sum(np.log(xx)))

    t = 1.0
    while True:
        for _ in range(100):
            p = A @ x
            s = hin - Gin @ x
            g = t * -(A.T @ (w / p ** 2)) + Gin.T @ (1.0 / s) - 1.0 / x
            H = t * (A.T * (2 * w / p ** 3)) @ A + (Gin.T / s ** 2) @ Gin + np.diag(1.0 / x ** 2)
            gz = Z.T @ g
            Hz = Z.T @ H @ Z
            dz = np.linalg.lstsq(Hz, -gz, rcond=1e-15)[0]
            dx = Z @ dz
            dec = float(-gz @ dz)
            if dec / 2 <= 1e-12:
                break
            step, f0, slope = 1.0, phi(x, t), float(g @ dx)
            while step > 1e-16 and phi(x + step * dx, t) > f0 + 0.25 * step * slope:
                step *= 0.5
            if step <= 1e-16:
                break
            x = x + step * dx
        fval = float(np.sum(w / (A @ x)))
        if m_ineq / t < tol * max(1.0, fval):
            return x, t
        t *= 20.0


def _solve_mirror(cfg, A, G, h, w, max_iter):
    C = A.shape[1]
    x = np.full(C, 1.0 / C)
    lam = np.zeros(G.shape[0])
    avg = np.zeros(C)
    wsum = 0.0
    for it in range(1, max_iter + 1):
        p = np.maximum(A @ x, 1e-300)
        gl = -(A.T @ (w / p ** 2)) + G.T @ lam
        eta = 1.0 / (np.sqrt(it) * max(np.max(np.abs(gl)), 1e-12))
        y = np.log(x) - eta * gl
        y -= y.max()
        x = np.exp(y)
        x /= x.sum()
        x = np.maximum(x, 1e-300)
        lam = np.maximum(0.0, lam + (G @ x - h) / np.sqrt(it))
        step = 1.0 / np.sqrt(it)
        avg += step * x
        wsum += step
    x = avg / wsum
    return _solution(cfg, x, lam, math.nan, "mirror")


def _failed(cfg, status, certificate=None):
    C = len(cfg.cells)
    return SrpSolution(mu=np.zeros(C), analytic_raoi=math.inf, success_rate=np.zeros(cfg.M),
                       lower_bound=math.inf, dual_power=math.nan,
                       dual_distortion=np.full(cfg.M, math.nan), feasible=False, status=status,
                       certificate=certificate, cells=cfg.cells)


def _solution(cfg, x, duals, kkt, status):
    x = np.maximum(x, 0.0)
    p = success_rates(x, cfg)
    return SrpSolution(mu=x, analytic_raoi=analytic_srp_raoi(x, cfg), success_rate=p,
                       lower_bound=lower_bound_value(p, cfg), dual_power=float(duals[0]),
                       dual_distortion=np.asarray(duals[1:], dtype=float), feasible=True,
                       status=status, kkt_residual=kkt, cells=cfg.cells)


def srp_constraint_violation(mu, cfg: SystemConfig) -> float:
    """Largest violation of the simplex, power and distortion constraints."""
    _, G, h, _ = _constraint_data(cfg)
    mu = np.asarray(mu, dtype=float)
    return float(max(abs(mu.sum() - 1.0), max(0.0, -mu.min()), max(0.0, np.max(G @ mu - h))))


# ---------------------------------------------------------------------------
# DPP


@dataclass(frozen=True)
class SlotAction:
    user: int | None = None
    k: int | None = None
    P: float | None = None
    cell: int | None = None

    @property
    def is_idle(self) -> bool:
        return self.user is None


IDLE = SlotAction()


@dataclass(frozen=True)
class DppState:
    Q1: float
    Q2: tuple[float, ...]
    reported_age: tuple[float, ...]
    genie_age: tuple[float, ...]
    t: int = 0

    @classmethod
    def initial(cls, cfg: SystemConfig) -> "DppState":
        ages = tuple(u.n / cfg.N for u in cfg.users)
        return cls(0.0, (0.0,) * cfg.M, ages, ages, 0)


def action_for_cell(cfg: SystemConfig, c: int | None) -> SlotAction:
    cells = cfg.cells
    if c is None or cells.user[c] < 0:
        return IDLE
    return SlotAction(int(cells.user[c]), int(cells.k[c]), float(cells.P[c]), int(c))


def dpp_scores(state: DppState, cfg: SystemConfig) -> np.ndarray:
    """Per-cell score; transmitting in a cell beats idling iff its score is negative."""
    cells = cfg.cells
    u = cells.user
    real = u >= 0
    ui = np.where(real, u, 0)
    Q2 = np.asarray(state.Q2)[ui]
    age = np.asarray(state.reported_age)[ui]
    beta = np.array([x.beta for x in cfg.users])[ui]
    score = cfg.V1 * state.Q1 * cells.P + cfg.V2 * Q2 * cells.eps * cells.dist - beta * cells.eps * age
    return np.where(real, score, 0.0)


def dpp_step(state: DppState, cfg: SystemConfig) -> SlotAction:
    scores = dpp_scores(state, cfg)
    c = int(np.argmin(scores))
    # idle wins ties (idle scores exactly 0)
    if not scores[c] < 0.0:
        return IDLE
    return action_for_cell(cfg, c)


def verdicts(outcome: PacketOutcome, detection: str) -> tuple[bool, bool]:
    """(v, genie): the receiver's verdict under the detection mode and the true outcome."""
    genie = outcome.genie_success
    v = outcome.reported_success if detection == "crc" else genie
    return v, genie


def dpp_update(state: DppState, action: SlotAction, outcome: PacketOutcome | None,
               cfg: SystemConfig, *, update_queues: bool = True) -> DppState:
    if not action.is_idle and outcome is None:
        raise ValueError("a transmit action needs a packet outcome")
    rep = [a + 1.0 for a in state.reported_age]
    gen = [a + 1.0 for a in state.genie_age]
    Q1, Q2 = state.Q1, list(state.Q2)
    if update_queues:
        Q1 = max(Q1 - cfg.P_bar, 0.0)
        Q2 = [max(q - u.d_bar, 0.0) for q, u in zip(Q2, cfg.users)]
    if not action.is_idle:
        i = action.user
        u = cfg.users[i]
        v, g = verdicts(outcome, cfg.detection_for(i))
        if update_queues:
            Q1 += action.P
            if v:
                Q2[i] += distortion(u.distortion, action.k)
        if v:
            rep[i] = u.n / cfg.N
        if g:
            gen[i] = u.n / cfg.N
    return DppState(Q1, tuple(Q2), tuple(rep), tuple(gen), state.t + 1)


# ---------------------------------------------------------------------------
# PRR


@dataclass(frozen=True)
class PrrParams:
    period: int = 2
    fixed_k: int = 10
    power_cycle: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    cycle_per: str = "slot"     # "slot" | "transmission"

    def __post_init__(self):
        object.__setattr__(self, "power_cycle", tuple(float(p) for p in self.power_cycle))
        if self.period < 1 or not self.power_cycle:
            raise ConfigError("PRR needs period >= 1 and a nonempty power cycle")
        if self.cycle_per not in ("slot", "transmission"):
            raise ConfigError(f"unknown PRR cycle mode {self.cycle_per!r}")


def prr_validate(cfg: SystemConfig, prm: PrrParams):
    if prm.period < cfg.M:
        raise ConfigError(f"PRR period {prm.period} is shorter than the user count {cfg.M}")
    for i, u in enumerate(cfg.users):
        if prm.fixed_k not in u.k_values:
            raise ConfigError(f"user {i}: PRR k={prm.fixed_k} not in the k grid")
        if any(P not in u.p_values for P in prm.power_cycle):
            raise ConfigError(f"user {i}: PRR power cycle not within the P grid")


def prr_action(t: int, cfg: SystemConfig, prm: PrrParams) -> SlotAction:
    """Slot ``t`` (1-based): user i is served when (t - 1 - i) is a multiple of the period."""
    i = (t - 1) % prm.period
    if i >= cfg.M:
        return IDLE
    L = len(prm.power_cycle)
    if prm.cycle_per == "slot":
        P = prm.power_cycle[(t - 1) % L]
    else:
        P = prm.power_cycle[((t - 1 - i) // prm.period) % L]
    u = cfg.users[i]
    cells = cfg.cells
    c = np.flatnonzero((cells.user == i) & (cells.k == prm.fixed_k) & (cells.P == P))
    return SlotAction(i, prm.fixed_k, P, int(c[0]) if c.size else None)


# ---------------------------------------------------------------------------
# Bounds


def drift_constants(cfg: SystemConfig) -> tuple[float, float]:
    M = cfg.M
    p_max = max(max(u.p_values) for u in cfg.users)
    B1 = cfg.V1 / (2 * M) * (cfg.P_bar ** 2 + p_max ** 2)
    B2 = cfg.V2 / (2 * M) * sum(u.d_bar ** 2 + distortion(u.distortion, min(u.k_values)) ** 2
                               for u in cfg.users)
    return B1, B2


def dpp_ratio_bound(cfg: SystemConfig, srp: SrpSolution) -> float:
    """Upper bound on A_DPP / A_opt from the drift analysis (diagnostic only)."""
    B1, B2 = drift_constants(cfg)
    L = lower_bound(srp, cfg)
    if not math.isfinite(L):
        return math.inf
    wn = sum(u.weight * u.n for u in cfg.users) / (cfg.M * cfg.N)
    return 2.0 + (2.0 * (B1 + B2) - wn) / L

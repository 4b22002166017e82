"""Slot-level episodes for the SRP, DPP and PRR schedulers.

Two outcome modes: ``"fast"`` draws (reported, genie) verdicts from the
success tables with a monotone coupling (one uniform u per transmission,
genie success iff u < genie prob, reported iff u < reported prob); ``"phy"``
pushes every packet through the CRC / cyclic code / BPSK / AWGN pipeline.

The fast mode runs in a numba kernel.  ``run_episode_reference`` is the same
recursion written against the public policy functions; tests hold the two to
identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .gf2codes import build_code
from .phy import PacketOutcome, RngStream, transmit_packet
from .policies import (
    IDLE,
    ConfigError,
    DppState,
    PrrParams,
    SrpSolution,
    SystemConfig,
    action_for_cell,
    dpp_step,
    dpp_update,
    prr_action,
    prr_validate,
    solve_srp,
)
from .tables import distortion

POLICIES = ("srp", "dpp", "prr")
MODES = ("fast", "phy")
CHUNK = 1 << 18

# stream ids under the episode seed
_ACTION_STREAM = 0
_OUTCOME_STREAM = 1
_PHY_STREAM = 2


@dataclass(frozen=True, eq=False)
class Metrics:
    avg_reported_raoi: float
    avg_genie_aoi: float
    per_user_reported: np.ndarray
    per_user_genie: np.ndarray
    avg_power: float
    avg_distortion: np.ndarray
    success_count: int
    genie_success_count: int
    undetected_count: int
    transmissions: int
    slot_count: int
    max_Q1: float
    max_Q2: np.ndarray
    # rows of window means: t_end, reported ages (M), Q1, Q2 (M)
    time_series: np.ndarray | None = None

    @property
    def undetected_rate(self) -> float:
        return self.undetected_count / self.transmissions if self.transmissions else 0.0

    def same_as(self, other: "Metrics") -> bool:
        """Bit-exact equality of every field."""
        for name in self.__dataclass_fields__:
            a, b = getattr(self, name), getattr(other, name)
            if a is None or b is None:
                if a is not b:
                    return False
            elif not np.array_equal(np.asarray(a), np.asarray(b)):
                return False
        return True


# ---------------------------------------------------------------------------
# numba kernel

_SRP, _DPP, _PRR = 0, 1, 2


@numba.njit(cache=True, nogil=True)
def _kernel(policy, t0, n_slots, u_act, u_out,
            c_user, c_k_dist, c_P, c_eps, c_thr_v, c_thr_g,
            beta, V1, V2, P_bar, d_bar, reset, cum_mu,
            prr_period, prr_cells, prr_per_slot,
            Q1, Q2, rep, gen,
            acc_rep, acc_gen, acc_pow, acc_dist, counts, qmax,
            win, win_acc, series, series_len):
    M = rep.size
    C = c_user.size
    L = prr_cells.shape[1]
    for s in range(n_slots):
        t = t0 + s + 1
        c = -1
        if policy == 0:
            c = np.searchsorted(cum_mu, u_act[s], side="right")
            if c >= C:
                c = C - 1
            if c_user[c] < 0:
                c = -1
        elif policy == 1:
            best = 0.0
            for j in range(C):
                i = c_user[j]
                if i < 0:
                    continue
                sc = V1 * Q1[0] * c_P[j] + V2 * Q2[i] * c_eps[j] * c_k_dist[j] - beta[i] * c_eps[j] * rep[i]
                if sc < best:
                    best = sc
                    c = j
        else:
            i = (t - 1) % prr_period
            if i < M:
                if prr_per_slot:
                    pos = (t - 1) % L
                else:
                    pos = ((t - 1 - i) // prr_period) % L
                c = prr_cells[i, pos]

        for i in range(M):
            rep[i] += 1.0
            gen[i] += 1.0
        if policy == 1:
            Q1[0] = max(Q1[0] - P_bar, 0.0)
            for i in range(M):
                Q2[i] = max(Q2[i] - d_bar[i], 0.0)
        if c >= 0:
            i = c_user[c]
            u = u_out[s]
            g = u < c_thr_g[c]
            v = u < c_thr_v[c]
            acc_pow[0] += c_P[c]
            counts[0] += 1
            if policy == 1:
                Q1[0] += c_P[c]
            if v:
                rep[i] = reset[i]
                acc_dist[i] += c_k_dist[c]
                counts[1] += 1
                if policy == 1:
                    Q2[i] += c_k_dist[c]
                if not g:
                    counts[3] += 1
            if g:
                gen[i] = reset[i]
                counts[2] += 1
        for i in range(M):
            acc_rep[i] += rep[i]
            acc_gen[i] += gen[i]
        if Q1[0] > qmax[0]:
            qmax[0] = Q1[0]
        for i in range(M):
            if Q2[i] > qmax[1 + i]:
                qmax[1 + i] = Q2[i]
        # window means for the time series
        for i in range(M):
            win_acc[1 + i] += rep[i]
            win_acc[1 + M + 1 + i] += Q2[i]
        win_acc[1 + M] += Q1[0]
        win_acc[0] += 1.0
        if win_acc[0] >= win and series_len[0] < series.shape[0]:
            r = series_len[0]
            series[r, 0] = t
            for j in range(1, series.shape[1]):
                series[r, j] = win_acc[j] / win_acc[0]
            series_len[0] += 1
            for j in range(win_acc.size):
                win_acc[j] = 0.0


# ---------------------------------------------------------------------------
# helpers


def _streams(seed: int):
    root = RngStream(seed)
    return root.child(_ACTION_STREAM).generator(), root.child(_OUTCOME_STREAM).generator()


def _srp_cum(srp: SrpSolution) -> np.ndarray:
    mu = np.maximum(srp.mu, 0.0)
    cum = np.cumsum(mu)
    return cum / cum[-1]


def _prr_cells(cfg: SystemConfig, prm: PrrParams) -> np.ndarray:
    cells = cfg.cells
    out = np.full((cfg.M, len(prm.power_cycle)), -1, dtype=np.int64)
    for i in range(cfg.M):
        for j, P in enumerate(prm.power_cycle):
            idx = np.flatnonzero((cells.user == i) & (cells.k == prm.fixed_k) & (cells.P == P))
            out[i, j] = idx[0]
    return out


def _prepare(policy, cfg, srp, prr):
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    if policy == "srp":
        srp = srp if srp is not None else solve_srp(cfg)
        if not srp.feasible:
            raise ConfigError(f"SRP is not feasible for this config ({srp.status})")
    if policy == "prr":
        prr = prr or PrrParams()
        prr_validate(cfg, prr)
    return srp, prr


def run_episode(policy: str, cfg: SystemConfig, T: int, mode: str = "fast", seed: int = 0, *,
                srp: SrpSolution | None = None, prr: PrrParams | None = None,
                series_points: int = 1000) -> Metrics:
    """Simulate ``T`` slots and return long-run averages.

    Ages start at n_i/N and virtual queues at 0; queues evolve only under DPP.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    srp, prr = _prepare(policy, cfg, srp, prr)
    if mode == "phy":
        for i, u in enumerate(cfg.users):
            if u.table.code_family != "cyclic":
                raise ConfigError(f"user {i}: phy mode needs a cyclic-code table, got {u.table.code_family!r}")
        return run_episode_reference(policy, cfg, T, seed, srp=srp, prr=prr, outcomes="phy",
                                     series_points=series_points)

    cells = cfg.cells
    M = cfg.M
    users = cfg.users
    c_user = cells.user
    thr_g = cells.eps_genie
    thr_v = cells.eps
    beta = np.array([u.beta for u in users])
    d_bar = np.array([u.d_bar for u in users])
    reset = np.array([u.n / cfg.N for u in users])
    cum_mu = _srp_cum(srp) if policy == "srp" else np.ones(1)
    prr_cells = _prr_cells(cfg, prr) if policy == "prr" else np.zeros((1, 1), dtype=np.int64)
    code = {"srp": _SRP, "dpp": _DPP, "prr": _PRR}[policy]

    Q1 = np.zeros(1)
    Q2 = np.zeros(M)
    rep = reset.copy()
    gen = reset.copy()
    acc_rep = np.zeros(M)
    acc_gen = np.zeros(M)
    acc_pow = np.zeros(1)
    acc_dist = np.zeros(M)
    counts = np.zeros(4, dtype=np.int64)   # transmissions, reported, genie, undetected
    qmax = np.zeros(1 + M)
    win = max(1, T // max(1, series_points))
    win_acc = np.zeros(2 + 2 * M)
    series = np.zeros((series_points, 2 + 2 * M))
    series_len = np.zeros(1, dtype=np.int64)

    g_act, g_out = _streams(seed)
    for t0 in range(0, T, CHUNK):
        n = min(CHUNK, T - t0)
        u_act = g_act.random(n)
        u_out = g_out.random(n)
        _kernel(code, t0, n, u_act, u_out, c_user, cells.dist, cells.P, cells.eps, thr_v, thr_g,
                beta, cfg.V1, cfg.V2, cfg.P_bar, d_bar, reset, cum_mu,
                prr.period if prr else 1, prr_cells, bool(prr is None or prr.cycle_per == "slot"),
                Q1, Q2, rep, gen, acc_rep, acc_gen, acc_pow, acc_dist, counts, qmax,
                win, win_acc, series, series_len)
    return _metrics(cfg, T, acc_rep, acc_gen, acc_pow[0], acc_dist, counts, qmax,
                    series[:series_len[0]].copy())


def _metrics(cfg, T, acc_rep, acc_gen, acc_pow, acc_dist, counts, qmax, series):
    w = np.array([u.weight for u in cfg.users])
    per_rep = acc_rep / T
    per_gen = acc_gen / T
    return Metrics(
        avg_reported_raoi=float(np.dot(w, per_rep) / cfg.M),
        avg_genie_aoi=float(np.dot(w, per_gen) / cfg.M),
        per_user_reported=per_rep,
        per_user_genie=per_gen,
        avg_power=float(acc_pow / T),
        avg_distortion=acc_dist / T,
        success_count=int(counts[1]),
        genie_success_count=int(counts[2]),
        undetected_count=int(counts[3]),
        transmissions=int(counts[0]),
        slot_count=int(T),
        max_Q1=float(qmax[0]),
        max_Q2=np.asarray(qmax[1:], dtype=float),
        time_series=series,
    )


# ---------------------------------------------------------------------------
# reference loop (also the phy-mode engine)


def run_episode_reference(policy: str, cfg: SystemConfig, T: int, seed: int = 0, *,
                          srp: SrpSolution | None = None, prr: PrrParams | None = None,
                          outcomes: str = "fast", series_points: int = 1000) -> Metrics:
    srp, prr = _prepare(policy, cfg, srp, prr)
    cells = cfg.cells
    M = cfg.M
    cum_mu = _srp_cum(srp) if policy == "srp" else None
    g_act, g_out = _streams(seed)
    u_act = g_act.random(T) if policy == "srp" else None
    u_out = g_out.random(T) if outcomes == "fast" else None
    phy_root = RngStream(seed).child(_PHY_STREAM)
    crcs = [u.table.crc for u in cfg.users]

    state = DppState.initial(cfg)
    acc_rep = np.zeros(M)
    acc_gen = np.zeros(M)
    acc_pow = 0.0
    acc_dist = np.zeros(M)
    counts = np.zeros(4, dtype=np.int64)
    qmax = np.zeros(1 + M)
    win = max(1, T // max(1, series_points))
    win_acc = np.zeros(2 + 2 * M)
    series = []

    for s in range(T):
        t = s + 1
        if policy == "srp":
            c = min(int(np.searchsorted(cum_mu, u_act[s], side="right")), len(cells) - 1)
            action = action_for_cell(cfg, c)
        elif policy == "dpp":
            action = dpp_step(state, cfg)
        else:
            action = prr_action(t, cfg, prr)

        outcome = None
        if not action.is_idle:
            c = action.cell
            if outcomes == "fast":
                u = u_out[s]
                g = bool(u < cells.eps_genie[c])
                r = bool(u < cells.eps[c]) if cfg.detection_for(action.user) == "crc" else g
                outcome = PacketOutcome(r, g, action.P)
            else:
                user = cfg.users[action.user]
                crc = crcs[action.user]
                code = build_code(user.n, action.k + crc.c)
                stream = phy_root.child(action.user, t)
                msg = stream.child(0).generator().integers(0, 2, action.k, dtype=np.uint8)
                outcome = transmit_packet(msg, crc, code, action.P, stream.child(1))
        new = dpp_update(state, action, outcome, cfg, update_queues=(policy == "dpp"))

        if not action.is_idle:
            i = action.user
            counts[0] += 1
            acc_pow += action.P
            v = outcome.reported_success if cfg.detection_for(i) == "crc" else outcome.genie_success
            if v:
                counts[1] += 1
                acc_dist[i] += distortion(cfg.users[i].distortion, action.k)
                if not outcome.genie_success:
                    counts[3] += 1
            if outcome.genie_success:
                counts[2] += 1
        state = new
        acc_rep += state.reported_age
        acc_gen += state.genie_age
        qmax[0] = max(qmax[0], state.Q1)
        qmax[1:] = np.maximum(qmax[1:], state.Q2)
        win_acc[1:1 + M] += state.reported_age
        win_acc[1 + M] += state.Q1
        win_acc[2 + M:] += state.Q2
        win_acc[0] += 1
        if win_acc[0] >= win and len(series) < series_points:
            series.append(np.concatenate([[t], win_acc[1:] / win_acc[0]]))
            win_acc[:] = 0.0

    series = np.array(series) if series else np.zeros((0, 2 + 2 * M))
    return _metrics(cfg, T, acc_rep, acc_gen, acc_pow, acc_dist, counts, qmax, series)


# ---------------------------------------------------------------------------
# checks


def _geometric_moments(p: float):
    q = 1.0 - p
    return (1.0 / p, (1 + q) / p ** 2, (1 + 4 * q + q * q) / p ** 3,
            (1 + 11 * q + 11 * q * q + q ** 3) / p ** 4)


def renewal_std_error(p: float, reset: float, T: int) -> float:
    """Std. error of the T-slot time-average age when deliveries are i.i.d.
    Bernoulli(p) per slot and the age drops to ``reset`` on delivery.

    Renewal-reward CLT: cycles of length X ~ Geom(p) earn X*reset + X(X-1)/2.
    """
    if p <= 0:
        return math.inf
    A = 1.0 / p + reset - 1.0
    c = reset - A - 0.5
    _, m2, m3, m4 = _geometric_moments(p)
    var_cycle = c * c * m2 + c * m3 + m4 / 4.0
    return math.sqrt(max(var_cycle, 0.0) * p / T)


@dataclass(frozen=True)
class SrpCheck:
    analytic: float
    simulated: float
    gap: float
    sigma: float
    ok: bool


def simulated_vs_analytic_srp(cfg: SystemConfig, T: int, seed: int = 0,
                              srp: SrpSolution | None = None) -> SrpCheck:
    """Compare a simulated SRP episode with the renewal formula (3 sigma)."""
    srp = srp if srp is not None else solve_srp(cfg)
    m = run_episode("srp", cfg, T, "fast", seed, srp=srp)
    # users are dependent through the shared slot draw; summing per-user std
    # errors bounds the std error of the weighted mean from above
    sigma = sum(u.weight * renewal_std_error(srp.success_rate[i], u.n / cfg.N, T)
                for i, u in enumerate(cfg.users)) / cfg.M
    gap = abs(m.avg_reported_raoi - srp.analytic_raoi)
    tol = 3.0 * sigma if sigma > 0 else 1e-9
    return SrpCheck(float(srp.analytic_raoi), m.avg_reported_raoi, float(gap), float(sigma), bool(gap <= tol))


@dataclass(frozen=True)
class AuditReport:
    avg_power: float
    P_bar: float
    avg_distortion: tuple[float, ...]
    d_bar: tuple[float, ...]
    power_ok: bool
    distortion_ok: bool
    max_Q1: float
    max_Q2: tuple[float, ...]
    queue_growth: tuple[float, ...]   # final-decile mean / middle-decile mean, Q1 then Q2_i
    queues_stable: bool

    @property
    def ok(self) -> bool:
        return self.power_ok and self.distortion_ok and self.queues_stable

    def summary(self) -> str:
        lines = [f"power      {self.avg_power:.6g} <= {self.P_bar:.6g}*1.01 : {'ok' if self.power_ok else 'VIOLATED'}"]
        for i, (d, db) in enumerate(zip(self.avg_distortion, self.d_bar)):
            flag = "ok" if d <= db * 1.01 else "VIOLATED"
            lines.append(f"distortion[{i}] {d:.6g} <= {db:.6g}*1.01 : {flag}")
        lines.append(f"queue growth {', '.join(f'{g:.3g}' for g in self.queue_growth)} : "
                     f"{'stable' if self.queues_stable else 'DIVERGING'}")
        return "\n".join(lines)


def constraint_audit(m: Metrics, cfg: SystemConfig, slack: float = 0.01) -> AuditReport:
    """Check time-average power / distortion against their bounds and look for queue growth."""
    power_ok = m.avg_power <= cfg.P_bar * (1 + slack)
    d_bar = tuple(u.d_bar for u in cfg.users)
    distortion_ok = all(d <= db * (1 + slack) for d, db in zip(m.avg_distortion, d_bar))
    growth = []
    stable = True
    ts = m.time_series
    M = cfg.M
    if ts is not None and len(ts) >= 10:
        n = len(ts)
        dec = n // 10
        final = ts[n - dec:]
        middle = ts[n // 2 - dec // 2: n // 2 - dec // 2 + dec]
        for col in range(1 + M, 2 + 2 * M):
            f, mid = final[:, col].mean(), middle[:, col].mean()
            growth.append(f / mid if mid > 0 else (1.0 if f == 0 else math.inf))
            if f > 2.0 * mid:
                stable = False
    return AuditReport(m.avg_power, cfg.P_bar, tuple(float(x) for x in m.avg_distortion), d_bar,
                       power_ok, distortion_ok, m.max_Q1, tuple(float(x) for x in m.max_Q2),
                       tuple(growth), stable)


def batch_means_stderr(m: Metrics, cfg: SystemConfig) -> float:
    """Std. error of ``avg_reported_raoi`` from the window means in the time series."""
    ts = m.time_series
    if ts is None or len(ts) < 2:
        return math.inf
    w = np.array([u.weight for u in cfg.users])
    batches = ts[:, 1:1 + cfg.M] @ w / cfg.M
    return float(batches.std(ddof=1) / math.sqrt(len(batches)))


def srp_table_stderr(srp: SrpSolution, cfg: SystemConfig) -> float:
    """First-order std. error of the analytic SRP value caused by Monte Carlo
    noise in the success tables (zero for closed-form tables)."""
    cells = srp.cells
    total = 0.0
    for i, u in enumerate(cfg.users):
        trials = u.table.trials
        if not trials:
            continue
        m = cells.user == i
        eps = cells.eps[m]
        var_p = float(np.sum(srp.mu[m] ** 2 * eps * (1 - eps)) / trials)
        p = srp.success_rate[i]
        total += u.weight / (cfg.M * p * p) * math.sqrt(var_p)
    return total

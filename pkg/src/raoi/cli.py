"""Command-line experiment runner.

Subcommands ``table``, ``run``, ``sweep`` and ``repro-table2``.  Every CSV
row carries the seed and a hash of the resolved experiment config; rows are
written in grid order with 6 significant digits, so re-running a command
reproduces its CSV except for the ``timestamp`` column.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import jsonschema

from .gf2codes import NO_CRC, CrcSpec
from .policies import (
    DEFAULT_D_BAR,
    ConfigError,
    PrrParams,
    SystemConfig,
    UserConfig,
    solve_srp,
)
from .sim import (
    batch_means_stderr,
    constraint_audit,
    run_episode,
    srp_table_stderr,
)
from .tables import TableError, estimate_table, load_table, ppv_table, save_table

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_ACCEPTANCE = 0, 2, 3, 4

_num = {"type": "number"}
_num_or_list = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}]}
_table_src = {"type": "string", "minLength": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "M": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 2},
        "N": {"type": "integer", "minimum": 1},
        "k_values": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "p_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "weights": _num_or_list,
        "beta": _num_or_list,
        "P_bar": _num,
        "d_bar": _num_or_list,
        "V1": _num,
        "V2": _num,
        "detection": {"enum": [None, "crc", "genie"]},
        "allow_idle": {"type": "boolean"},
        "table": {"oneOf": [_table_src, {"type": "array", "items": _table_src, "minItems": 1}]},
        "T": {"type": "integer", "minimum": 1},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "mode": {"enum": ["fast", "phy"]},
        "policies": {"type": "array", "items": {"enum": ["srp", "dpp", "prr"]}},
        "prr": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "period": {"type": "integer", "minimum": 1},
                "fixed_k": {"type": "integer", "minimum": 1},
                "power_cycle": {"type": "array", "items": _num, "minItems": 1},
                "cycle_per": {"enum": ["slot", "transmission"]},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "P_bar": {"type": "array", "items": _num},
                "d_bar": {"type": "array", "items": _num},
            },
        },
        "out": {"type": ["string", "null"]},
    },
}


@dataclass
class ExperimentConfig:
    """Everything needed to rebuild a run.

    ``table`` is a source string per user (or one shared): ``"ppv"``,
    ``"cyclic:<crc hex>"`` (Monte Carlo, ``trials`` per cell) or a path to a
    saved table file.
    """

    M: int = 2
    n: int = 15
    N: int = 15
    k_values: list = field(default_factory=lambda: list(range(4, 12)))
    p_values: list = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0])
    weights: float | list = 1.0
    beta: float | list = 100.0
    P_bar: float = 2.0
    d_bar: float | list = DEFAULT_D_BAR
    V1: float = 1.0
    V2: float = 1.0
    detection: str | None = None
    allow_idle: bool = False
    table: str | list = "ppv"
    T: int = 1_000_000
    trials: int = 100_000
    seed: int = 0
    mode: str = "fast"
    policies: list = field(default_factory=lambda: ["prr", "srp", "dpp"])
    prr: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    out: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(doc, CONFIG_SCHEMA)
        except jsonschema.ValidationError as e:
            raise ConfigError(f"config: {e.message} at {'/'.join(map(str, e.absolute_path)) or '<root>'}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}")
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        doc = self.to_dict()
        doc.pop("out", None)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def per_user(self, name: str) -> list:
        v = getattr(self, name)
        if isinstance(v, list):
            if len(v) != self.M:
                raise ConfigError(f"{name} has {len(v)} entries for M={self.M} users")
            return list(v)
        return [v] * self.M

    def prr_params(self) -> PrrParams:
        return PrrParams(**self.prr)

    def system(self, threads: int = 1) -> SystemConfig:
        cache: dict[str, object] = {}
        users = []
        for i, (src, w, b, db) in enumerate(zip(self.per_user("table"), self.per_user("weights"),
                                                self.per_user("beta"), self.per_user("d_bar"))):
            if src not in cache:
                cache[src] = resolve_table(src, self, threads)
            users.append(UserConfig(cache[src], weight=w, d_bar=db, beta=b, n=self.n,
                                    k_values=tuple(self.k_values), p_values=tuple(self.p_values)))
        return SystemConfig(tuple(users), N=self.N, P_bar=self.P_bar, V1=self.V1, V2=self.V2,
                            detection=self.detection, allow_idle=self.allow_idle)


def resolve_table(src: str, cfg: ExperimentConfig, threads: int = 1):
    if src == "ppv":
        return ppv_table(cfg.n, cfg.k_values, cfg.p_values, N=cfg.N)
    if src.startswith("cyclic:"):
        crc = parse_crc(src.split(":", 1)[1])
        check_k_fits(cfg.n, cfg.k_values, crc)
        return estimate_table(cfg.n, cfg.k_values, cfg.p_values, crc, cfg.trials, cfg.seed,
                              N=cfg.N, threads=threads)
    return load_table(src)


def parse_crc(text: str) -> CrcSpec:
    text = text.strip().lower()
    if text in ("", "0", "none"):
        return NO_CRC
    try:
        return CrcSpec.from_hex(text)
    except ValueError as e:
        raise ConfigError(f"bad CRC polynomial {text!r}: {e}")


def check_k_fits(n: int, k_values, crc: CrcSpec):
    for k in k_values:
        if k + crc.c >= n:
            raise ConfigError(f"k + c = {k} + {crc.c} must be below n = {n}")


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_grid(text: str, cast=float) -> list:
    """``"1,2,3"``, ``"4:11"`` (inclusive) or ``"1:10:0.5"``."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0:
            raise ConfigError(f"range step must be positive in {text!r}")
        out, j = [], 0
        while lo + j * step <= hi + 1e-9 * step:
            out.append(cast(round(lo + j * step, 12)))
            j += 1
        return out
    return [cast(x) for x in text.split(",") if x.strip()]


def resolve_seed(cli_seed: int | None, cfg_seed: int) -> int:
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get("RAOI_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"RAOI_SEED={env!r} is not an integer")
    return cfg_seed


def resolve_threads(n: int) -> int:
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.6g}"
    return str(x)


def write_csv(rows: list[dict], columns: list[str], out: str | None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# shared evaluation


def metric_columns(M: int) -> list[str]:
    return (["policy", "code_family", "detection", "avg_reported_raoi", "avg_genie_aoi", "avg_power"]
            + [f"avg_distortion_{i + 1}" for i in range(M)]
            + ["undetected_rate", "seed", "T"])


def _detection_label(sys_cfg: SystemConfig) -> str:
    labels = {sys_cfg.detection_for(i) for i in range(sys_cfg.M)}
    return labels.pop() if len(labels) == 1 else "mixed"


def _family_label(sys_cfg: SystemConfig) -> str:
    fams = {u.table.code_family for u in sys_cfg.users}
    return fams.pop() if len(fams) == 1 else "mixed"


def evaluate(policy: str, sys_cfg: SystemConfig, cfg: ExperimentConfig, seed: int,
             simulate_srp: bool = False) -> dict:
    """One result row.  SRP is reported analytically unless ``simulate_srp``."""
    row = {"policy": policy, "code_family": _family_label(sys_cfg), "detection": _detection_label(sys_cfg),
           "seed": seed, "status": "ok"}
    M = sys_cfg.M
    if policy == "srp":
        sol = solve_srp(sys_cfg)
        if not sol.feasible:
            row.update(status=sol.status, T=0, avg_reported_raoi=math.nan, avg_genie_aoi=math.nan,
                       avg_power=math.nan, undetected_rate=math.nan,
                       **{f"avg_distortion_{i + 1}": math.nan for i in range(M)})
            return row
        row["stderr"] = srp_table_stderr(sol, sys_cfg)
        if not simulate_srp:
            cells = sol.cells
            mu = sol.mu
            genie_p = [float(mu[cells.user == i] @ cells.eps_genie[cells.user == i]) for i in range(M)]
            w = [u.weight for u in sys_cfg.users]
            genie = sum(wi * (1 / p + u.n / sys_cfg.N - 1) if p > 0 else math.inf
                        for wi, p, u in zip(w, genie_p, sys_cfg.users)) / M
            sent = float(mu[cells.user >= 0].sum())
            und = float(mu @ (cells.eps - cells.eps_genie)) / sent if sent > 0 else 0.0
            row.update(T=0, avg_reported_raoi=float(sol.analytic_raoi), avg_genie_aoi=genie,
                       avg_power=float(mu @ cells.P), undetected_rate=und)
            for i in range(M):
                m = cells.user == i
                row[f"avg_distortion_{i + 1}"] = float(mu[m] @ (cells.eps[m] * cells.dist[m]))
            return row
        m = run_episode("srp", sys_cfg, cfg.T, cfg.mode, seed, srp=sol)
    else:
        m = run_episode(policy, sys_cfg, cfg.T, cfg.mode, seed,
                        prr=cfg.prr_params() if policy == "prr" else None)
        row["stderr"] = batch_means_stderr(m, sys_cfg)
        if policy == "dpp":
            audit = constraint_audit(m, sys_cfg)
            if not audit.ok:
                row["status"] = "constraint_violated"
    row.update(T=cfg.T, avg_reported_raoi=m.avg_reported_raoi, avg_genie_aoi=m.avg_genie_aoi,
               avg_power=m.avg_power, undetected_rate=m.undetected_rate)
    for i in range(M):
        row[f"avg_distortion_{i + 1}"] = float(m.avg_distortion[i])
    return row


# ---------------------------------------------------------------------------
# subcommands


def cmd_table(args, cfg: ExperimentConfig) -> int:
    cfg.n = args.n if args.n is not None else cfg.n
    cfg.N = args.N if args.N is not None else cfg.N
    if args.k:
        cfg.k_values = parse_grid(args.k, int)
    if args.p:
        cfg.p_values = parse_grid(args.p, float)
    if args.trials is not None:
        cfg.trials = args.trials
    out = args.output or cfg.out
    if not out:
        raise ConfigError("table needs an output path (-o)")
    if args.family == "ppv":
        table = ppv_table(cfg.n, cfg.k_values, cfg.p_values, N=cfg.N)
    else:
        crc = parse_crc(args.crc)
        check_k_fits(cfg.n, cfg.k_values, crc)
        table = estimate_table(cfg.n, cfg.k_values, cfg.p_values, crc, cfg.trials, cfg.seed,
                               N=cfg.N, detection=args.detection, threads=args.threads)
    save_table(table, out)
    print(f"wrote {out}: family={table.code_family} detection={table.detection} "
          f"n={table.n} crc={table.crc.poly_hex} trials={table.trials} seed={table.seed}")
    print("success (rows k, columns P=" + ",".join(fmt(p) for p in table.p_values) + ")")
    for k, row in zip(table.k_values, table.success):
        print(f"  k={k:<3d} " + " ".join(f"{x:.4f}" for x in row))
    return EXIT_OK


def _apply_run_flags(args, cfg: ExperimentConfig):
    if getattr(args, "table", None):
        cfg.table = args.table if len(args.table) > 1 else args.table[0]
    for flag, name in (("T", "T"), ("P_bar", "P_bar"), ("V1", "V1"), ("V2", "V2"), ("mode", "mode"),
                       ("detection", "detection")):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "d_bar", None) is not None:
        cfg.d_bar = args.d_bar
    if getattr(args, "beta", None) is not None:
        cfg.beta = args.beta
    prr = dict(cfg.prr)
    if getattr(args, "period", None) is not None:
        prr["period"] = args.period
    if getattr(args, "fixed_k", None) is not None:
        prr["fixed_k"] = args.fixed_k
    if getattr(args, "power_cycle", None):
        prr["power_cycle"] = parse_grid(args.power_cycle)
    if getattr(args, "cycle_per", None):
        prr["cycle_per"] = args.cycle_per
    cfg.prr = prr


def cmd_run(args, cfg: ExperimentConfig) -> int:
    _apply_run_flags(args, cfg)
    sys_cfg = cfg.system(args.threads)
    row = evaluate(args.policy, sys_cfg, cfg, cfg.seed, simulate_srp=args.simulate)
    row.update(config_hash=cfg.config_hash(), timestamp=timestamp())
    write_csv([row], metric_columns(sys_cfg.M) + ["config_hash", "timestamp"], args.output or cfg.out)
    if row["status"] == "constraint_violated":
        print("warning: episode violates the power/distortion bounds", file=sys.stderr)
    if row["status"] not in ("ok", "constraint_violated"):
        print(f"error: configuration is {row['status']}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args, cfg: ExperimentConfig) -> int:
    _apply_run_flags(args, cfg)
    if args.P_grid is not None:
        cfg.sweep = {**cfg.sweep, "P_bar": parse_grid(args.P_grid)}
    if args.d_grid is not None:
        cfg.sweep = {**cfg.sweep, "d_bar": parse_grid(args.d_grid)}
    if args.policies:
        cfg.policies = args.policies.split(",")
    P_grid = cfg.sweep.get("P_bar", [cfg.P_bar])
    d_grid = cfg.sweep.get("d_bar", [None])
    if not P_grid or not d_grid or not cfg.policies:
        raise ConfigError("empty sweep grid; pass e.g. --P-grid 1:10 and/or --d-grid 0.5,0.7,0.9")
    if "P_bar" not in cfg.sweep and "d_bar" not in cfg.sweep:
        raise ConfigError("sweep needs a grid; pass --P-grid and/or --d-grid")
    base = cfg.system(args.threads)
    points = [(P, d, pol) for P in P_grid for d in d_grid for pol in cfg.policies]

    def one(pt):
        P, d, pol = pt
        sc = base.with_bounds(P_bar=P, d_bar=d)
        row = evaluate(pol, sc, cfg, cfg.seed, simulate_srp=args.simulate)
        row["P_bar"] = P
        row["d_bar"] = sc.users[0].d_bar if d is None else d
        return row

    with ThreadPoolExecutor(resolve_threads(args.threads)) as ex:
        rows = list(ex.map(one, points))
    h, ts = cfg.config_hash(), timestamp()
    for r in rows:
        r.update(config_hash=h, timestamp=ts)
    cols = ["P_bar", "d_bar"] + metric_columns(base.M) + ["status", "config_hash", "timestamp"]
    write_csv(rows, cols, args.output or cfg.out)
    return EXIT_OK


# reference values and tolerances for the repro report
REFERENCE_VALUES = {
    "Cyclic code (genie)": (2.46, 2.14, 1.605),
    "Cyclic code (CRC-1)": (1.92, 2.07, 1.555),
    "DL code (genie)": (2.74, 2.03, 1.529),
    "DL code (CRC-1)": (1.96, 2.02, 1.516),
    "PPV error expression": (1.84, 2.0, 1.506),
}
PPV_TOLERANCE = {"prr": 0.10, "srp": 0.05, "dpp": 0.05}


def comparison_rows(cfg: ExperimentConfig, threads: int, dl_table: str | None = None):
    """(label, SystemConfig) pairs, plus (reported label, genie label) pairs to order-check."""
    crc1 = resolve_table("cyclic:0x3", cfg, threads)
    plain = resolve_table("cyclic:0", cfg, threads)
    ppv = resolve_table("ppv", cfg, threads)

    def system(table, detection):
        c = dataclasses.replace(cfg, table="ppv")
        sc = c.system()
        users = tuple(dataclasses.replace(u, table=table) for u in sc.users)
        return dataclasses.replace(sc, users=users, detection=detection)

    rows = [("Cyclic code (genie)", system(crc1, "genie")),
            ("Cyclic code (CRC-1)", system(crc1, "crc"))]
    pairs = [("Cyclic code (CRC-1)", "Cyclic code (genie)")]
    if dl_table:
        dl = load_table(dl_table)
        rows += [("DL code (genie)", system(dl, "genie")), ("DL code (CRC-1)", system(dl, "crc"))]
        pairs.append(("DL code (CRC-1)", "DL code (genie)"))
    rows += [("PPV error expression", system(ppv, None)),
             ("Cyclic code, no CRC (genie)", system(plain, "genie"))]
    return rows, pairs


def cmd_repro(args, cfg: ExperimentConfig) -> int:
    if args.T is not None:
        cfg.T = args.T
    if args.trials is not None:
        cfg.trials = args.trials
    threads = resolve_threads(args.threads)
    rows, pairs = comparison_rows(cfg, threads, args.dl_table)
    jobs = [(label, sc, pol) for label, sc in rows for pol in ("prr", "srp", "dpp")]
    with ThreadPoolExecutor(threads) as ex:
        results = list(ex.map(lambda j: evaluate(j[2], j[1], cfg, cfg.seed), jobs))
    res = {(j[0], j[2]): r for j, r in zip(jobs, results)}

    out = [f"{'code':<30s} {'PRR':>16s} {'SRP':>16s} {'DPP':>16s}"]
    for label, _ in rows:
        ref = REFERENCE_VALUES.get(label)
        cells = []
        for j, pol in enumerate(("prr", "srp", "dpp")):
            v = res[(label, pol)]["avg_reported_raoi"]
            cells.append(f"{v:.4f}" + (f" ({ref[j]:g})" if ref else ""))
        out.append(f"{label:<30s} " + " ".join(f"{c:>16s}" for c in cells))
    out.append("(reference values in parentheses)")

    checks = []
    ppv_ref = REFERENCE_VALUES["PPV error expression"]
    for j, pol in enumerate(("prr", "srp", "dpp")):
        v = res[("PPV error expression", pol)]["avg_reported_raoi"]
        checks.append((f"PPV {pol.upper()} = {v:.4f} within {ppv_ref[j]} +/- {PPV_TOLERANCE[pol]}",
                       abs(v - ppv_ref[j]) <= PPV_TOLERANCE[pol]))
    for label, _ in rows:
        d, s = res[(label, "dpp")], res[(label, "srp")]
        slack = 3 * math.hypot(d.get("stderr", 0.0), s.get("stderr", 0.0))
        checks.append((f"{label}: DPP {d['avg_reported_raoi']:.4f} < SRP {s['avg_reported_raoi']:.4f}",
                       d["avg_reported_raoi"] < s["avg_reported_raoi"] + slack))
    for rep, gen in pairs:
        a, b = res[(rep, "srp")], res[(gen, "srp")]
        slack = 3 * math.hypot(a.get("stderr", 0.0), b.get("stderr", 0.0))
        checks.append((f"SRP {rep} {a['avg_reported_raoi']:.4f} <= {gen} {b['avg_reported_raoi']:.4f}",
                       a["avg_reported_raoi"] <= b["avg_reported_raoi"] + slack))
    for text, ok in checks:
        out.append(f"[{'PASS' if ok else 'FAIL'}] {text}")
    print("\n".join(out))

    if args.output or cfg.out:
        h, ts = cfg.config_hash(), timestamp()
        flat = []
        for (label, pol), r in res.items():
            flat.append({**r, "row": label, "config_hash": h, "timestamp": ts})
        write_csv(flat, ["row"] + metric_columns(cfg.M) + ["config_hash", "timestamp"], args.output or cfg.out)
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_ACCEPTANCE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies must not overwrite values given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--config", default=d(None), help="experiment config JSON")
        g.add_argument("--seed", type=int, default=d(None),
                       help="root seed (overrides RAOI_SEED and the config)")
        g.add_argument("--out", "-o", dest="output", default=d(None), help="output path (default stdout)")
        g.add_argument("--threads", type=int, default=d(1), help="worker threads, 0 = all cores")
        return g

    common = global_flags(True)
    p = argparse.ArgumentParser(prog="raoi", description="Reported-AoI scheduling experiments",
                                parents=[global_flags(False)])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", parents=[common], help="build a success-probability table")
    t.add_argument("--family", choices=["ppv", "cyclic"], required=True)
    t.add_argument("--n", type=int)
    t.add_argument("--N", type=int)
    t.add_argument("--k", help="k grid, e.g. 4:11")
    t.add_argument("--p", help="power grid, e.g. 1,2,3,4")
    t.add_argument("--crc", default="0", help="CRC generator in hex (0 = none)")
    t.add_argument("--trials", type=int)
    t.add_argument("--detection", choices=["crc", "genie", "genie_crc_overhead"])
    t.set_defaults(func=cmd_table)

    run_flags = argparse.ArgumentParser(add_help=False)
    run_flags.add_argument("--table", nargs="+", help="table source(s): ppv, cyclic:<hex>, or a file")
    run_flags.add_argument("--T", type=int, help="episode length in slots")
    run_flags.add_argument("--mode", choices=["fast", "phy"])
    run_flags.add_argument("--P-bar", dest="P_bar", type=float)
    run_flags.add_argument("--d-bar", dest="d_bar", type=float)
    run_flags.add_argument("--beta", type=float)
    run_flags.add_argument("--V1", type=float)
    run_flags.add_argument("--V2", type=float)
    run_flags.add_argument("--detection", choices=["crc", "genie"])
    run_flags.add_argument("--period", type=int)
    run_flags.add_argument("--fixed-k", dest="fixed_k", type=int)
    run_flags.add_argument("--power-cycle", dest="power_cycle")
    run_flags.add_argument("--cycle-per", dest="cycle_per", choices=["slot", "transmission"])
    run_flags.add_argument("--simulate", action="store_true", help="simulate SRP instead of the closed form")

    r = sub.add_parser("run", parents=[common, run_flags], help="evaluate one policy")
    r.add_argument("--policy", choices=["srp", "dpp", "prr"], required=True)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", parents=[common, run_flags], help="sweep the power / distortion bounds")
    s.add_argument("--policies", help="comma-separated subset of srp,dpp,prr")
    s.add_argument("--P-grid", dest="P_grid", help="P_bar grid, e.g. 1:10 or 1,2,4")
    s.add_argument("--d-grid", dest="d_grid", help="d_bar grid, e.g. 0.5:0.95:0.05")
    s.set_defaults(func=cmd_sweep)

    x = sub.add_parser("repro-table2", parents=[common], help="policy comparison across codes")
    x.add_argument("--T", type=int)
    x.add_argument("--trials", type=int)
    x.add_argument("--dl-table", help="external table file for the DL code rows")
    x.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        cfg.seed = resolve_seed(args.seed, cfg.seed)
        return args.func(args, cfg)
    except (ConfigError, TableError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

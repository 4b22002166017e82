"""Success-probability tables eps(k, P): Monte Carlo for cyclic+CRC links, the
normal-approximation (PPV) builder, JSON persistence, and the distortion model.

All tables store SUCCESS probabilities.  Rows index message length k, columns
index power P.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .gf2codes import NO_CRC, CrcSpec, NoCyclicCodeError, build_code
from .phy import RngStream, transmit_batch

SCHEMA_ID = "raoi-table/1"
CODE_FAMILIES = ("cyclic", "ppv", "external")
DETECTIONS = ("crc", "genie", "genie_crc_overhead")

# Monte Carlo trials are drawn in fixed-size blocks, each with its own stream,
# so results never depend on how work is split across threads.
TRIAL_BLOCK = 16384


class TableError(Exception):
    code = "table"


class TableSchemaError(TableError):
    code = "schema"


class TableInvariantError(TableError):
    code = "invariant"


class TableFileMissingError(TableError, FileNotFoundError):
    code = "missing"


TABLE_SCHEMA = {
    "type": "object",
    "required": ["schema", "n", "N", "k_values", "p_values", "crc", "code_family", "detection",
                 "trials", "seed", "reported_success", "genie_success", "undetected"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "n": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "k_values": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "p_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "crc": {
            "type": "object",
            "required": ["c", "poly_hex"],
            "additionalProperties": False,
            "properties": {"c": {"type": "integer", "minimum": 0, "maximum": 16},
                           "poly_hex": {"type": "string", "pattern": "^0[xX][0-9a-fA-F]+$"}},
        },
        "code_family": {"enum": list(CODE_FAMILIES)},
        "detection": {"enum": list(DETECTIONS)},
        "trials": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "reported_success": {"$ref": "#/$defs/matrix"},
        "genie_success": {"$ref": "#/$defs/matrix"},
        "undetected": {"$ref": "#/$defs/matrix"},
    },
    "$defs": {"matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}},
}


@dataclass(frozen=True, eq=False)
class ErrorTable:
    n: int
    N: int
    k_values: tuple[int, ...]
    p_values: tuple[float, ...]
    crc: CrcSpec
    code_family: str
    detection: str
    reported_success: np.ndarray = field(repr=False)
    genie_success: np.ndarray = field(repr=False)
    undetected: np.ndarray = field(repr=False)
    trials: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        for name in ("reported_success", "genie_success", "undetected"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self.validate()

    def validate(self):
        if self.code_family not in CODE_FAMILIES:
            raise TableSchemaError(f"unknown code_family {self.code_family!r}")
        if self.detection not in DETECTIONS:
            raise TableSchemaError(f"unknown detection {self.detection!r}")
        shape = (len(self.k_values), len(self.p_values))
        for name in ("reported_success", "genie_success", "undetected"):
            if getattr(self, name).shape != shape:
                raise TableSchemaError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.n > self.N:
            raise TableInvariantError(f"blocklength n={self.n} exceeds slot capacity N={self.N}")
        bad_k = [k for k in self.k_values if k + self.crc.c > self.n]
        if bad_k:
            raise TableInvariantError(f"k + c > n for k in {bad_k}")
        rep, gen, und = self.reported_success, self.genie_success, self.undetected
        for name, arr in (("reported_success", rep), ("genie_success", gen), ("undetected", und)):
            if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1:
                raise TableInvariantError(f"{name} has entries outside [0, 1]")
        if np.any(gen > rep):
            i, j = np.argwhere(gen > rep)[0]
            raise TableInvariantError(
                f"genie_success > reported_success at k={self.k_values[i]}, P={self.p_values[j]}")
        if np.max(np.abs(und - (rep - gen))) > 1e-12:
            raise TableInvariantError("undetected != reported_success - genie_success")

    @property
    def success(self) -> np.ndarray:
        """Success probabilities the schedulers optimise against for this table's detection tag."""
        return self.reported_success if self.detection == "crc" else self.genie_success

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_ID,
            "n": self.n,
            "N": self.N,
            "k_values": list(self.k_values),
            "p_values": list(self.p_values),
            "crc": {"c": self.crc.c, "poly_hex": self.crc.poly_hex},
            "code_family": self.code_family,
            "detection": self.detection,
            "trials": self.trials,
            "seed": self.seed,
            "reported_success": self.reported_success.tolist(),
            "genie_success": self.genie_success.tolist(),
            "undetected": self.undetected.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ErrorTable":
        try:
            jsonschema.validate(doc, TABLE_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise TableSchemaError(f"table schema mismatch: {exc.message}") from None
        try:
            crc = CrcSpec.from_hex(doc["crc"]["poly_hex"])
        except ValueError as exc:
            raise TableSchemaError(f"bad CRC polynomial: {exc}") from None
        if crc.c != doc["crc"]["c"]:
            raise TableSchemaError(f"CRC length {doc['crc']['c']} does not match {doc['crc']['poly_hex']}")
        return cls(
            n=doc["n"], N=doc["N"], k_values=doc["k_values"], p_values=doc["p_values"], crc=crc,
            code_family=doc["code_family"], detection=doc["detection"],
            reported_success=doc["reported_success"], genie_success=doc["genie_success"],
            undetected=doc["undetected"], trials=doc["trials"], seed=doc["seed"],
        )

    def __eq__(self, other):
        if not isinstance(other, ErrorTable):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def save_table(table: ErrorTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(table.to_dict(), indent=1) + "\n")


def load_table(path) -> ErrorTable:
    path = Path(path)
    if not path.exists():
        raise TableFileMissingError(f"table file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise TableSchemaError(f"{path}: not valid JSON ({exc})") from None
    return ErrorTable.from_dict(doc)


# ---------------------------------------------------------------------------
# Builders


def _estimate_cell(n, k, crc, P, trials, stream: RngStream) -> tuple[int, int]:
    code = build_code(n, k + crc.c)
    n_rep = n_gen = 0
    for b, start in enumerate(range(0, trials, TRIAL_BLOCK)):
        size = min(TRIAL_BLOCK, trials - start)
        rep, gen = transmit_batch(k, crc, code, P, size, stream.child(b).generator())
        n_rep += int(rep.sum())
        n_gen += int(gen.sum())
    return n_rep, n_gen


def estimate_table(n: int, k_values, p_values, crc: CrcSpec = NO_CRC, trials: int = 100_000,
                   seed: int = 0, *, N: int | None = None, detection: str | None = None,
                   threads: int = 1) -> ErrorTable:
    """Monte Carlo success table for the (n, k + c) cyclic code with the given CRC.

    ``detection`` defaults to ``"crc"`` when a CRC is present and ``"genie"``
    otherwise.  For the genie tags the receiver's verdict is the genie verdict,
    so the reported column equals the genie column.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    detection = detection or ("crc" if crc.c > 0 else "genie")
    if detection not in DETECTIONS:
        raise ValueError(f"unknown detection {detection!r}")
    k_values = tuple(int(k) for k in k_values)
    p_values = tuple(float(p) for p in p_values)
    for k in k_values:
        try:
            build_code(n, k + crc.c)
        except (ValueError, NoCyclicCodeError) as exc:
            raise ValueError(f"cell k={k}: cannot build ({n}, {k + crc.c}) cyclic code: {exc}") from None

    root = RngStream(seed)
    jobs = [(ki, pi) for ki in range(len(k_values)) for pi in range(len(p_values))]

    def run(job):
        ki, pi = job
        return _estimate_cell(n, k_values[ki], crc, p_values[pi], trials, root.child(ki, pi))

    if threads == 1:
        counts = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            counts = list(pool.map(run, jobs))

    shape = (len(k_values), len(p_values))
    rep = np.array([c[0] for c in counts], dtype=float).reshape(shape) / trials
    gen = np.array([c[1] for c in counts], dtype=float).reshape(shape) / trials
    if detection != "crc":
        rep = gen.copy()
    return ErrorTable(n=n, N=N or n, k_values=k_values, p_values=p_values, crc=crc,
                      code_family="cyclic", detection=detection, reported_success=rep,
                      genie_success=gen, undetected=rep - gen, trials=trials, seed=seed)


def q_function(x: float) -> float:
    """Standard normal upper tail."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def awgn_capacity(P: float) -> float:
    """Real AWGN capacity in bits per channel use."""
    return 0.5 * math.log2(1.0 + P)


def awgn_dispersion(P: float) -> float:
    """Real AWGN channel dispersion in bits^2 per channel use."""
    return math.log2(math.e) ** 2 * P * (P + 2) / (2 * (P + 1) ** 2)


def ppv_error(n: int, k: int, P: float) -> float:
    if not P > 0:
        raise ValueError(f"power must be positive, got {P}")
    arg = (n * awgn_capacity(P) - k + 0.5 * math.log2(n)) / math.sqrt(n * awgn_dispersion(P))
    return q_function(arg)


def ppv_table(n: int, k_values, p_values, *, N: int | None = None) -> ErrorTable:
    """Normal-approximation table with perfect (genie) error detection and no CRC."""
    k_values = tuple(int(k) for k in k_values)
    p_values = tuple(float(p) for p in p_values)
    succ = np.array([[min(max(1.0 - ppv_error(n, k, P), 0.0), 1.0) for P in p_values] for k in k_values])
    return ErrorTable(n=n, N=N or n, k_values=k_values, p_values=p_values, crc=NO_CRC,
                      code_family="ppv", detection="genie", reported_success=succ,
                      genie_success=succ.copy(), undetected=np.zeros_like(succ), trials=0, seed=0)


# ---------------------------------------------------------------------------
# Distortion


@dataclass(frozen=True)
class DistortionModel:
    """Distortion d(k) of sending k source bits: ``2**(-k/alpha)`` or an explicit table."""

    alpha: float = 100.0
    values: tuple[tuple[int, float], ...] | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.values is not None:
            pairs = sorted((int(k), float(d)) for k, d in dict(self.values).items()) \
                if isinstance(self.values, dict) else sorted((int(k), float(d)) for k, d in self.values)
            object.__setattr__(self, "values", tuple(pairs))
            ds = [d for _, d in pairs]
            if any(not 0 < d <= 1 for d in ds):
                raise ValueError("distortion values must lie in (0, 1]")
            if any(b >= a for a, b in zip(ds, ds[1:])):
                raise ValueError("distortion values must be strictly decreasing in k")
            if any(ds[i - 1] - 2 * ds[i] + ds[i + 1] < -1e-12 for i in range(1, len(ds) - 1)):
                raise ValueError("distortion values must be convex in k")

    @property
    def form(self) -> str:
        return "exp2" if self.values is None else "table"


def distortion(model: DistortionModel, k: int) -> float:
    if model.values is None:
        return 2.0 ** (-k / model.alpha)
    table = dict(model.values)
    if k not in table:
        raise KeyError(f"distortion table has no entry for k={k}")
    return table[k]

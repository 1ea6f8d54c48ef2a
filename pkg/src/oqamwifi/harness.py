"""Monte-Carlo sweep runner, scenario files and report emission."""
from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import pipelines, sync_est
from .analysis import spectral_efficiency
from .channel import PROFILES, apply_channel, draw_channel
from .params import ConfigError, Scheme, SystemConfig, parse_rate

CSV_HEADER = ("scheme", "M", "R", "snr_db", "n_frames", "n_bits", "bit_errors", "ber",
              "frame_errors", "fer", "cfo_rmse", "eta", "eta_hat")


@dataclass(frozen=True)
class Scenario:
    schemes: tuple = (Scheme.CP_OFDM, Scheme.OQAM_OFDM)
    orders: tuple = (4,)
    rates: tuple = (Fraction(1, 2),)
    payload_bytes: int = 500
    snr_db: tuple = (10.0, 20.0, 30.0)
    n_frames: int = 200
    profile: str = "hiperlan_a"
    cfo_range: tuple = (-0.1, 0.1)
    timing_window: tuple = (0, 64)
    master_seed: int = 0
    genie_sync: bool = False
    genie_csi: bool = False
    measure: str = "full"           # "full" runs the whole receiver, "sync" only coarse sync
    out_dir: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in _as_tuple(self.schemes)))
        object.__setattr__(self, "orders", tuple(int(m) for m in _as_tuple(self.orders)))
        object.__setattr__(self, "rates", tuple(parse_rate(r) for r in _as_tuple(self.rates)))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in _as_tuple(self.snr_db)))
        object.__setattr__(self, "cfo_range", tuple(float(c) for c in self.cfo_range))
        object.__setattr__(self, "timing_window", tuple(int(t) for t in self.timing_window))
        if self.n_frames < 1:
            raise ConfigError("n_frames must be >= 1")
        if not self.snr_db:
            raise ConfigError("snr_db list is empty")
        if not (self.schemes and self.orders and self.rates):
            raise ConfigError("need at least one scheme, order and rate")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown channel profile {self.profile!r}")
        if self.measure not in ("full", "sync"):
            raise ConfigError("measure must be 'full' or 'sync'")
        if self.timing_window[0] < 0 or self.timing_window[1] < self.timing_window[0]:
            raise ConfigError("timing_window must be 0 <= lo <= hi")
        for M in self.orders:
            for R in self.rates:
                self.config(self.schemes[0], M, R)

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def config(self, scheme, M, R) -> SystemConfig:
        return SystemConfig(scheme=scheme, modulation_order=M, code_rate=R,
                            payload_bytes=self.payload_bytes, cfo_range=self.cfo_range)

    def points(self) -> list[tuple]:
        """(scheme, M, R, snr index) in sweep order; the list index is the point index."""
        return list(itertools.product(self.schemes, self.orders, self.rates, range(len(self.snr_db))))

    def echo(self) -> dict:
        d = asdict(self)
        d["schemes"] = [s.value for s in self.schemes]
        d["rates"] = [str(r) for r in self.rates]
        return d


def _as_tuple(value) -> tuple:
    if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
        return (value,)
    return tuple(value)


# --------------------------------------------------------------------------
# Scenario files: flat "key = value" lines, '#' comments, lists comma-separated.

def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_snr(text: str) -> tuple:
    # "0:2:30" is an inclusive range, otherwise a comma list
    if ":" in text:
        lo, step, hi = (float(t) for t in text.split(":"))
        return tuple(float(v) for v in np.round(np.arange(lo, hi + step / 2, step), 10))
    return tuple(float(t) for t in _parse_list(text))


_PARSERS = {
    "schemes": _parse_list,
    "orders": lambda t: tuple(int(v) for v in _parse_list(t)),
    "rates": _parse_list,
    "payload_bytes": int,
    "snr_db": _parse_snr,
    "n_frames": int,
    "profile": str.strip,
    "cfo_range": lambda t: tuple(float(v) for v in _parse_list(t)),
    "timing_window": lambda t: tuple(int(v) for v in _parse_list(t)),
    "master_seed": int,
    "genie_sync": _parse_bool,
    "genie_csi": _parse_bool,
    "measure": str.strip,
    "out_dir": str.strip,
}
_ALIASES = {"scheme": "schemes", "M": "orders", "R": "rates", "seed": "master_seed",
            "snr": "snr_db", "frames": "n_frames"}


def parse_scenario_text(text: str, base: Scenario | None = None) -> Scenario:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return replace(base or Scenario(), **values)


def load_scenario(path, base: Scenario | None = None) -> Scenario:
    return parse_scenario_text(Path(path).read_text(), base)


# --------------------------------------------------------------------------
# Trials

@dataclass(frozen=True)
class TrialResult:
    point: int
    trial: int
    n_bits: int
    bit_errors: int
    frame_error: bool
    cfo_error: float
    sync_ok: bool


def trial_rng(master_seed: int, snr_index: int, trial: int) -> np.random.Generator:
    """Generator for one trial.

    The key omits scheme, M and R on purpose: every configuration at a given
    SNR sees the same channel, CFO and payload for the same trial index.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(snr_index, trial)))


def run_trial(scenario: Scenario, point: int, trial: int) -> TrialResult:
    scheme, M, R, si = scenario.points()[point]
    cfg = scenario.config(scheme, M, R)
    rng = trial_rng(scenario.master_seed, si, trial)
    ch = draw_channel(rng, scenario.profile, cfo_range=scenario.cfo_range,
                      timing_window=scenario.timing_window, snr_db=scenario.snr_db[si])
    payload = rng.integers(0, 2, cfg.payload_bits, dtype=np.uint8)
    noise_rng = np.random.default_rng(rng.bit_generator.random_raw())
    try:
        tx = pipelines.transmit(payload, cfg)
        rx_stream = apply_channel(tx.stream, ch, noise_rng, cfg.n_subcarriers)
        if scenario.measure == "sync":
            res = sync_est.coarse_sync(rx_stream, cfg, max_lag=pipelines.SEARCH_LAGS)
            return TrialResult(point, trial, 0, 0, not res.ok, res.delta_f_hat - ch.cfo, res.ok)
        rx = pipelines.receive(rx_stream, cfg, genie=ch, genie_sync=scenario.genie_sync,
                               genie_csi=scenario.genie_csi)
    except Exception:  # a broken trial is a lost frame, never a crashed sweep
        return TrialResult(point, trial, cfg.payload_bits, cfg.payload_bits // 2, True, math.nan, False)
    errors = int(np.count_nonzero(rx.payload_bits != payload))
    return TrialResult(point, trial, cfg.payload_bits, errors, errors > 0 or not rx.sync_ok,
                       rx.delta_f_hat - ch.cfo, rx.sync_ok)


def _run_block(args) -> list[TrialResult]:
    scenario, point, trials = args
    return [run_trial(scenario, point, t) for t in trials]


@dataclass(frozen=True)
class SweepRecord:
    scheme: str
    M: int
    R: str
    snr_db: float
    n_frames: int
    n_bits: int
    bit_errors: int
    ber: float
    frame_errors: int
    fer: float
    cfo_rmse: float
    eta: float
    eta_hat: float


def aggregate(scenario: Scenario, point: int, results: list[TrialResult]) -> SweepRecord:
    scheme, M, R, si = scenario.points()[point]
    results = sorted(results, key=lambda r: r.trial)
    n_bits = sum(r.n_bits for r in results)
    bit_errors = sum(r.bit_errors for r in results)
    frame_errors = sum(int(r.frame_error) for r in results)
    sq = [r.cfo_error ** 2 for r in results if math.isfinite(r.cfo_error)]
    cfo_rmse = math.sqrt(math.fsum(sq) / len(sq)) if sq else math.nan
    n = len(results)
    fer = frame_errors / n
    eta = spectral_efficiency(scenario.config(scheme, M, R)).eta
    return SweepRecord(scheme.value, M, str(R), scenario.snr_db[si], n, n_bits, bit_errors,
                       bit_errors / n_bits if n_bits else math.nan, frame_errors, fer,
                       cfo_rmse, eta, eta * (1 - fer))


def run_sweep(scenario: Scenario, workers: int = 1, block: int = 25) -> list[SweepRecord]:
    """All points x n_frames trials; output is independent of ``workers``."""
    tasks = []
    for point in range(len(scenario.points())):
        for lo in range(0, scenario.n_frames, block):
            tasks.append((scenario, point, range(lo, min(lo + block, scenario.n_frames))))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_block, tasks))
    else:
        blocks = [_run_block(t) for t in tasks]
    per_point: dict[int, list[TrialResult]] = {}
    for res in blocks:
        for r in res:
            per_point.setdefault(r.point, []).append(r)
    return [aggregate(scenario, p, per_point[p]) for p in sorted(per_point)]


# --------------------------------------------------------------------------
# Reports

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_csv(records) -> str:
    lines = [",".join(CSV_HEADER)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, h)) for h in CSV_HEADER))
    return "\n".join(lines) + "\n"


def read_records(path) -> list[SweepRecord]:
    types = {f.name: f.type for f in fields(SweepRecord)}
    conv = {"int": int, "float": float, "str": str}
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(SweepRecord(**{k: conv[types[k]](v) for k, v in row.items()}))
    return out


def emit_report(records, out_dir, scenario: Scenario | None = None, stem: str = "sweep") -> list[Path]:
    """CSV of all records, JSON with the scenario echo, and one CSV per curve."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    path = out / f"{stem}.csv"
    path.write_text(records_csv(records))
    written.append(path)
    path = out / f"{stem}.json"
    payload = {"scenario": scenario.echo() if scenario else None,
               "records": [asdict(r) for r in records]}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")
    written.append(path)
    curves: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        curves.setdefault((rec.scheme, rec.M, rec.R), []).append(rec)
    for (scheme, M, R), recs in curves.items():
        path = out / f"{stem}_{scheme}_M{M}_R{R.replace('/', '-')}.csv"
        lines = ["snr_db,ber,fer,cfo_rmse,eta_hat"]
        for r in sorted(recs, key=lambda r: r.snr_db):
            lines.append(",".join(_fmt(v) for v in (r.snr_db, r.ber, r.fer, r.cfo_rmse, r.eta_hat)))
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def snr_for_ebn0(ebn0_db: float, M: int, R=1, K: int = 64, n_used: int = 52) -> float:
    """Per-sample SNR (dB) giving ``ebn0_db`` on the data carriers.

    With unitary transforms the per-carrier Es/N0 equals the per-sample SNR
    times K/n_used, and Es = ld(M) * R * Eb.
    """
    bits = math.log2(M) * float(parse_rate(R))
    return ebn0_db + 10 * math.log10(bits) - 10 * math.log10(K / n_used)

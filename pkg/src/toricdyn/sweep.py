"""Parameter sweeps over the initial perturbation strength, with persistence.

A sweep evaluates, for every beta0 on a grid: the echo series, time-averaged
genuine multipartite entanglement, time-averaged block log-negativity, the
minimum echo, and echo-zero spacings; then finite-difference derivatives
over beta0 and the location of the derivative peak.  Results go to a CSV
(one row per beta0) plus a JSON sidecar with full metadata.
"""

from __future__ import annotations

import json
import logging
import subprocess
import time as _time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .entanglement import (
    TimeSeries,
    batched_ggm,
    block_log_negativity_series,
    time_average,
)
from .errors import ConfigError, NumericalError
from .groundstate import BETA_CRITICAL, GroundStateSpec, ground_state
from .lattice import build_lattice, equal_block_bipartition
from .lindblad import BathParams, IntegratorConfig, noisy_ln_series
from .quench import ECHO_FLOOR, EchoSeries, QuenchSpectrum

logger = logging.getLogger("toricdyn")

_STATE_CHUNK = 256


@dataclass
class SweepConfig:
    """Grids, pipeline selection and output destination for one sweep."""

    lx: int = 2
    ly: int = 7
    beta0_min: float = 0.05
    beta0_max: float = 1.0
    beta0_step: float = 0.01
    t_initial: float = 0.0
    t_final: float = 10.0
    dt: float = 0.01
    pipeline: str = "closed"
    bath_k: float = 0.05
    bath_ratio: float = 10.0
    ode_dt: float = 1e-3
    output: str | None = None
    workers: int = 1
    dump_series: bool = False
    echo_zero_threshold: float = 1e-4
    use_second_derivative: bool = False

    def __post_init__(self):
        if self.pipeline not in ("closed", "open"):
            raise ConfigError(f"pipeline must be 'closed' or 'open', got {self.pipeline!r}")
        if self.beta0_step <= 0 or self.beta0_max < self.beta0_min:
            raise ConfigError("beta0 grid requires step > 0 and max >= min")
        if self.dt <= 0 or self.t_final <= self.t_initial:
            raise ConfigError("time grid requires dt > 0 and t_final > t_initial")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def beta_grid(self) -> np.ndarray:
        n = int(round((self.beta0_max - self.beta0_min) / self.beta0_step))
        return np.round(self.beta0_min + self.beta0_step * np.arange(n + 1), 12)

    def time_grid(self) -> np.ndarray:
        n = int(round((self.t_final - self.t_initial) / self.dt))
        return self.t_initial + self.dt * np.arange(n + 1)

    @staticmethod
    def from_dict(raw: dict) -> "SweepConfig":
        kw = {}
        lattice = raw.get("lattice", {})
        kw["lx"] = lattice.get("lx", 2)
        kw["ly"] = lattice.get("ly", 7)
        beta0 = raw.get("beta0", {})
        kw["beta0_min"] = beta0.get("min", 0.05)
        kw["beta0_max"] = beta0.get("max", 1.0)
        kw["beta0_step"] = beta0.get("step", 0.01)
        tgrid = raw.get("time", {})
        kw["t_initial"] = tgrid.get("ti", 0.0)
        kw["t_final"] = tgrid.get("tf", 10.0)
        kw["dt"] = tgrid.get("dt", 0.01)
        kw["pipeline"] = raw.get("pipeline", "closed")
        bath = raw.get("bath", {})
        kw["bath_k"] = bath.get("k", 0.05)
        kw["bath_ratio"] = bath.get("ratio", 10.0)
        kw["ode_dt"] = raw.get("ode_dt", 1e-3)
        kw["output"] = raw.get("output")
        kw["workers"] = raw.get("workers", 1)
        kw["dump_series"] = raw.get("dump_series", False)
        try:
            return SweepConfig(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @staticmethod
    def from_json(path: str | Path) -> "SweepConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return SweepConfig.from_dict(raw)


@dataclass
class SweepResult:
    """Per-beta0 records plus derivative arrays and detected peak locations."""

    betas: np.ndarray
    avg_ggm: np.ndarray
    avg_ln: np.ndarray
    min_echo: np.ndarray
    zero_spacings: list
    d_avg_ggm: np.ndarray | None
    d_avg_ln: np.ndarray | None
    beta_star_ggm: float | None
    beta_star_ln: float | None
    metadata: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


def derivative_scan(values: np.ndarray, step: float) -> np.ndarray:
    """Central differences (v[i+1] - v[i-1]) / (2 step) at interior points."""
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        raise ConfigError("derivative needs at least 3 grid points")
    return (values[2:] - values[:-2]) / (2.0 * step)


def second_difference(values: np.ndarray, step: float) -> np.ndarray:
    """(v[i+1] - 2 v[i] + v[i-1]) / step^2 at interior points."""
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        raise ConfigError("second difference needs at least 3 grid points")
    return (values[2:] - 2.0 * values[1:-1] + values[:-2]) / step**2


def locate_peak(derivs: np.ndarray, beta_grid: np.ndarray) -> float:
    """beta at the maximum |derivative|; ties resolve toward smaller beta.

    A peak sitting on the grid boundary (as happens for monotone derivative
    arrays) is flagged with a warning since it marks a window problem rather
    than an interior feature.
    """
    derivs = np.asarray(derivs)
    if len(derivs) == 0 or len(derivs) != len(beta_grid):
        raise ConfigError("derivs and beta_grid must be non-empty and equal length")
    i = int(np.argmax(np.abs(derivs)))
    if i in (0, len(derivs) - 1):
        warnings.warn(f"derivative peak sits on the grid boundary at beta0={beta_grid[i]}")
    return float(beta_grid[i])


def echo_zero_spacings(series: EchoSeries, threshold: float = 1e-4) -> np.ndarray:
    """Consecutive gaps between local echo minima that dip below `threshold`."""
    if threshold <= 0:
        raise ConfigError("threshold must be positive")
    e = series.echo
    interior = np.arange(1, len(e) - 1)
    is_min = (e[interior] < e[interior - 1]) & (e[interior] <= e[interior + 1])
    zeros = interior[is_min & (e[interior] < threshold)]
    return np.diff(series.times[zeros])


def _closed_point(lat, bip, beta0: float, times: np.ndarray, threshold: float,
                  keep_series: bool) -> dict:
    """Everything the sweep records for one beta0 (closed pipeline)."""
    psi0 = ground_state(GroundStateSpec(beta0, lat))
    spectrum = QuenchSpectrum(psi0, lat)
    echo = spectrum.echo(times)
    rate = np.log(np.maximum(echo, ECHO_FLOOR)) / lat.N
    ggm_series = np.empty(len(times))
    ln_series = np.empty(len(times))
    for lo in range(0, len(times), _STATE_CHUNK):
        hi = min(lo + _STATE_CHUNK, len(times))
        states = spectrum.states(times[lo:hi])
        ggm_series[lo:hi] = batched_ggm(states, lat)
        ln_series[lo:hi] = block_log_negativity_series(states, lat, bip)
    for name, arr in (("echo", echo), ("ggm", ggm_series), ("ln", ln_series)):
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"non-finite {name} series at beta0={beta0}")
    echo_series = EchoSeries(times=times, echo=echo, rate=rate)
    record = {
        "beta0": beta0,
        "avg_ggm": time_average(TimeSeries(times, ggm_series)),
        "avg_ln": time_average(TimeSeries(times, ln_series)),
        "min_echo": float(np.min(echo)),
        "zero_spacings": echo_zero_spacings(echo_series, threshold),
    }
    if keep_series:
        record["series"] = {
            "t": times, "echo": echo, "rate": rate, "ggm": ggm_series, "ln": ln_series,
        }
    return record


def _closed_point_task(args) -> dict:
    lx, ly, beta0, times, threshold, keep = args
    lat = build_lattice(lx, ly)
    return _closed_point(lat, equal_block_bipartition(lat), beta0, times, threshold, keep)


def _open_point_task(args) -> dict:
    lx, ly, beta0, times, bath_k, bath_ratio, ode_dt, keep = args
    lat = build_lattice(lx, ly)
    bip = equal_block_bipartition(lat)
    bath = BathParams(k=bath_k, B=bath_ratio, T_E=1.0)
    cfg = IntegratorConfig(dt_ode=ode_dt)
    series, info = noisy_ln_series(beta0, bath, cfg, lat, bip, times)
    record = {
        "beta0": beta0,
        "avg_ggm": float("nan"),
        "avg_ln": time_average(series),
        "min_echo": float("nan"),
        "zero_spacings": np.array([]),
        "diagnostics": info,
    }
    if keep:
        nan = np.full(len(times), np.nan)
        record["series"] = {"t": times, "echo": nan, "rate": nan, "ggm": nan, "ln": series.values}
    return record


def _run_points(tasks, task_fn, workers: int):
    records, failures = [], []

    def handle(beta0, call):
        try:
            records.append(call())
        except NumericalError as exc:
            logger.warning("beta0 point aborted: %s", exc)
            failures.append({"beta0": beta0, "error": str(exc)})

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(args[2], pool.submit(task_fn, args)) for args in tasks]
            for beta0, fut in futures:
                handle(beta0, fut.result)
    else:
        for args in tasks:
            handle(args[2], lambda a=args: task_fn(a))
    return records, failures


def _assemble(cfg: SweepConfig, records: list, failures: list, runtime: float) -> SweepResult:
    records.sort(key=lambda r: r["beta0"])
    betas = np.array([r["beta0"] for r in records])
    avg_ggm = np.array([r["avg_ggm"] for r in records])
    avg_ln = np.array([r["avg_ln"] for r in records])
    min_echo = np.array([r["min_echo"] for r in records])
    spacings = [r["zero_spacings"] for r in records]
    series = {r["beta0"]: r["series"] for r in records if "series" in r}

    complete = not failures and len(betas) >= 3
    d_ggm = d_ln = None
    beta_star_ggm = beta_star_ln = None
    metadata = {
        "config": asdict(cfg),
        "git_hash": _git_hash(),
        "kernel_backend": _kernels.backend(),
        "beta_critical": BETA_CRITICAL,
        "echo_zero_threshold": cfg.echo_zero_threshold,
        "runtime_seconds": runtime,
        "failures": failures,
    }
    if complete:
        interior = betas[1:-1]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if cfg.pipeline == "closed":
                d_ggm = derivative_scan(avg_ggm, cfg.beta0_step)
                beta_star_ggm = locate_peak(d_ggm, interior)
                d2_ggm = second_difference(avg_ggm, cfg.beta0_step)
                metadata["beta_star_ggm_second_derivative"] = locate_peak(d2_ggm, interior)
            d_ln = derivative_scan(avg_ln, cfg.beta0_step)
            beta_star_ln = locate_peak(d_ln, interior)
            d2_ln = second_difference(avg_ln, cfg.beta0_step)
            metadata["beta_star_ln_second_derivative"] = locate_peak(d2_ln, interior)
        metadata["boundary_warnings"] = [str(w.message) for w in caught]
        if cfg.use_second_derivative:
            beta_star_ggm = metadata.get("beta_star_ggm_second_derivative")
            beta_star_ln = metadata.get("beta_star_ln_second_derivative")
        if cfg.pipeline == "closed":
            steps_up = np.flatnonzero(np.diff(avg_ggm) > 1e-3)
            if len(steps_up):
                logger.warning("avg GGM increases at %d grid steps", len(steps_up))
            metadata["ggm_monotone_violations"] = [float(betas[i]) for i in steps_up]
            metadata["ggm_curvature_sign_changes"] = _sign_changes(avg_ggm, betas, cfg.beta0_step)
        metadata["ln_curvature_sign_changes"] = _sign_changes(avg_ln, betas, cfg.beta0_step)
    metadata["beta_star_ggm"] = beta_star_ggm
    metadata["beta_star_ln"] = beta_star_ln
    return SweepResult(
        betas=betas, avg_ggm=avg_ggm, avg_ln=avg_ln, min_echo=min_echo,
        zero_spacings=spacings, d_avg_ggm=d_ggm, d_avg_ln=d_ln,
        beta_star_ggm=beta_star_ggm, beta_star_ln=beta_star_ln,
        metadata=metadata, series=series, failures=failures,
    )


def _sign_changes(values: np.ndarray, betas: np.ndarray, step: float) -> list:
    """Midpoints of the beta intervals where the second difference flips sign."""
    d2 = second_difference(values, step)
    interior = betas[1:-1]
    sgn = np.sign(d2)
    out = []
    for i in range(len(sgn) - 1):
        if sgn[i] != 0 and sgn[i + 1] != 0 and sgn[i] != sgn[i + 1]:
            out.append(float(0.5 * (interior[i] + interior[i + 1])))
    return out


def run_closed_sweep(cfg: SweepConfig) -> SweepResult:
    """Unitary pipeline: echo, GGM and block negativity per beta0."""
    if cfg.pipeline != "closed":
        raise ConfigError("run_closed_sweep requires pipeline='closed'")
    build_lattice(cfg.lx, cfg.ly)  # fail fast on the memory guard
    times = cfg.time_grid()
    tasks = [(cfg.lx, cfg.ly, float(b), times, cfg.echo_zero_threshold, cfg.dump_series)
             for b in cfg.beta_grid()]
    start = _time.perf_counter()
    records, failures = _run_points(tasks, _closed_point_task, cfg.workers)
    return _assemble(cfg, records, failures, _time.perf_counter() - start)


def run_open_sweep(cfg: SweepConfig) -> SweepResult:
    """Dissipative pipeline: noisy block negativity per beta0."""
    if cfg.pipeline != "open":
        raise ConfigError("run_open_sweep requires pipeline='open'")
    build_lattice(cfg.lx, cfg.ly)
    times = cfg.time_grid()
    tasks = [(cfg.lx, cfg.ly, float(b), times, cfg.bath_k, cfg.bath_ratio, cfg.ode_dt,
              cfg.dump_series) for b in cfg.beta_grid()]
    start = _time.perf_counter()
    records, failures = _run_points(tasks, _open_point_task, cfg.workers)
    result = _assemble(cfg, records, failures, _time.perf_counter() - start)
    diagnostics = [r.get("diagnostics") for r in records if r.get("diagnostics")]
    if diagnostics:
        result.metadata["max_trace_drift"] = max(d["max_trace_drift"] for d in diagnostics)
        eigs = [d["min_eigenvalue"] for d in diagnostics if d["min_eigenvalue"] is not None]
        if eigs:
            result.metadata["min_eigenvalue"] = min(eigs)
    return result


def run_sweep(cfg: SweepConfig) -> SweepResult:
    return run_closed_sweep(cfg) if cfg.pipeline == "closed" else run_open_sweep(cfg)


def _git_hash() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_outputs(result: SweepResult, cfg: SweepConfig) -> list[Path]:
    """Write the per-beta0 CSV, metadata JSON sidecar and optional series dumps."""
    if not cfg.output:
        raise ConfigError("no output path configured")
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    n = len(result.betas)
    d_ggm = np.full(n, np.nan)
    d_ln = np.full(n, np.nan)
    if result.d_avg_ggm is not None:
        d_ggm[1:-1] = result.d_avg_ggm
    if result.d_avg_ln is not None:
        d_ln[1:-1] = result.d_avg_ln
    lines = ["beta0,avg_ggm,avg_ln,min_echo,d_avg_ggm,d_avg_ln"]
    for i in range(n):
        lines.append(",".join(_fmt(v) for v in (
            result.betas[i], result.avg_ggm[i], result.avg_ln[i],
            result.min_echo[i], d_ggm[i], d_ln[i],
        )))
    out.write_text("\n".join(lines) + "\n")
    written = [out]

    sidecar = out.with_suffix(out.suffix + ".meta.json") if out.suffix != ".json" else out
    meta = dict(result.metadata)
    meta["zero_spacings"] = {
        _fmt(b): [float(x) for x in s] for b, s in zip(result.betas, result.zero_spacings)
    }
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(sidecar)

    for beta0, series in result.series.items():
        path = out.parent / f"series_{beta0:g}.csv"
        rows = ["t,echo,rate,ggm,ln"]
        for j in range(len(series["t"])):
            rows.append(",".join(_fmt(series[k][j]) for k in ("t", "echo", "rate", "ggm", "ln")))
        path.write_text("\n".join(rows) + "\n")
        written.append(path)
    return written

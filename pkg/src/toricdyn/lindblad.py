"""Open-system evolution under a local repeated-interaction thermal bath.

Every spin couples to its own bath qubit (field B, temperature T_E) through
an exchange interaction; in the Markovian limit this yields, per site, the
two jump operators eta^0 = |0><1| and eta^1 = |1><0| with weights

    p_l = exp((-1)^l B / T_E) / (exp(B/T_E) + exp(-B/T_E)),

entering as  D(rho) = 2k sum_i sum_l p_l [2 eta_i^{l+1} rho eta_i^l
- {eta_i^l eta_i^{l+1}, rho}]  (superscripts mod 2, hbar = 1).  Note the
weight pairing: the l-th term carries the jump eta^{l+1}, so p_0 drives
0 -> 1 flips and the single-site stationary state is diag(p_1, p_0) -- the
bath's own thermal state, which the exchange coupling drags the system onto.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import LindbladRHS
from .entanglement import TimeSeries, log_negativity_mixed
from .errors import ConfigError, NumericalError, ResourceLimitError
from .groundstate import GroundStateSpec, ground_state
from .lattice import Bipartition, TorusLattice
from .oracle import MAX_DENSE_SPINS, embed_loop_state, hamiltonian_diagonal

TRACE_ABORT = 1e-6


@dataclass(frozen=True)
class BathParams:
    """Coupling strength k, bath field B and temperature T_E (hbar = 1)."""

    k: float = 0.05
    B: float = 10.0
    T_E: float = 1.0

    def __post_init__(self):
        if self.k < 0 or self.T_E <= 0:
            raise ConfigError("bath requires k >= 0 and T_E > 0")

    @property
    def p0(self) -> float:
        r = self.B / self.T_E
        return float(np.exp(r) / (np.exp(r) + np.exp(-r)))

    @property
    def p1(self) -> float:
        r = self.B / self.T_E
        return float(np.exp(-r) / (np.exp(r) + np.exp(-r)))


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step fourth-order Runge-Kutta settings."""

    dt_ode: float = 1e-3
    resymmetrize_every: int = 100
    monitor_positivity: bool = True

    def __post_init__(self):
        if self.dt_ode <= 0:
            raise ConfigError("dt_ode must be positive")


def dissipator_fixed_point_qubit(bath: BathParams) -> np.ndarray:
    """Single-site stationary state diag(p1, p0) of the thermal map."""
    return np.diag([bath.p1, bath.p0]).astype(np.complex128)


def dissipator(rho: np.ndarray, bath: BathParams, lat: TorusLattice) -> np.ndarray:
    """Dissipative part of the master equation, summed over all N sites.

    Straightforward block-index implementation; the fused integrator kernel
    is validated against this in the test suite.
    """
    if lat.N > MAX_DENSE_SPINS:
        raise ResourceLimitError(f"open-system runs limited to {MAX_DENSE_SPINS} spins")
    dim = 1 << lat.N
    if rho.shape != (dim, dim):
        raise ConfigError(f"rho must be {dim} x {dim}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise NumericalError("dissipator input is not Hermitian within 1e-8")
    p0, p1 = bath.p0, bath.p1
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros_like(rho, dtype=np.complex128)
    for b in range(lat.N):
        bit = 1 << b
        i0 = idx[(idx & bit) == 0]
        i1 = i0 + bit
        # jump eta^1 (0 -> 1) at weight p0, jump eta^0 (1 -> 0) at weight p1
        out[np.ix_(i1, i1)] += 2.0 * p0 * rho[np.ix_(i0, i0)]
        out[np.ix_(i0, i0)] += 2.0 * p1 * rho[np.ix_(i1, i1)]
        # anticommutators with the projectors eta^0 eta^1 = P0, eta^1 eta^0 = P1
        out[i0, :] -= p0 * rho[i0, :]
        out[:, i0] -= p0 * rho[:, i0]
        out[i1, :] -= p1 * rho[i1, :]
        out[:, i1] -= p1 * rho[:, i1]
    return 2.0 * bath.k * out


@dataclass
class LindbladResult:
    """Grid-time observables plus integrator diagnostics."""

    times: np.ndarray
    observables: dict
    states: list | None
    final_state: np.ndarray
    max_trace_drift: float
    min_eigenvalue: float | None


def lindblad_evolve(
    rho0: np.ndarray,
    lat: TorusLattice,
    bath: BathParams,
    cfg: IntegratorConfig,
    times: np.ndarray,
    beta1: float = 0.0,
    observables: dict | None = None,
    store_states: bool = False,
) -> LindbladResult:
    """Integrate drho/dt = -i[H(beta1), rho] + D(rho) over a time grid.

    `times` must start at 0 and every grid interval must be a whole number
    of dt_ode steps.  Observables are evaluated at each grid time; trace
    drift beyond 1e-6 aborts with a step-size diagnostic.
    """
    if lat.N > MAX_DENSE_SPINS:
        raise ResourceLimitError(f"open-system runs limited to {MAX_DENSE_SPINS} spins")
    times = np.asarray(times, dtype=float)
    if len(times) == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ConfigError("time grid must start at 0 and increase strictly")
    observables = observables or {}
    rhs = LindbladRHS(
        np.asarray(lat.star_masks, dtype=np.int64),
        hamiltonian_diagonal(beta1, lat),
        lat.N,
        2.0 * bath.k,
        bath.p0,
        bath.p1,
    )
    rho = np.array(rho0, dtype=np.complex128, copy=True)
    dim = rho.shape[0]
    k1, k2, k3, k4 = (np.empty_like(rho) for _ in range(4))
    stage = np.empty_like(rho)
    dt = cfg.dt_ode

    values = {name: [] for name in observables}
    states = [] if store_states else None
    max_drift = 0.0
    min_eig = np.inf if cfg.monitor_positivity else None
    steps_done = 0

    def record(t):
        nonlocal max_drift, min_eig
        drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        max_drift = max(max_drift, drift)
        if drift > TRACE_ABORT:
            raise NumericalError(
                f"trace drift {drift:.2e} at t={t:.3f}; reduce dt_ode below {dt}"
            )
        if cfg.monitor_positivity:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(rho)[0]))
        for name, fn in observables.items():
            values[name].append(fn(rho))
        if store_states:
            states.append(rho.copy())

    record(times[0])
    for t_prev, t_next in zip(times[:-1], times[1:]):
        span = t_next - t_prev
        n_steps = int(round(span / dt))
        if n_steps < 1 or abs(n_steps * dt - span) > 1e-9:
            raise ConfigError(
                f"grid interval {span} is not a multiple of dt_ode={dt}"
            )
        for _ in range(n_steps):
            rhs(rho, k1)
            np.multiply(k1, 0.5 * dt, out=stage)
            stage += rho
            rhs(stage, k2)
            np.multiply(k2, 0.5 * dt, out=stage)
            stage += rho
            rhs(stage, k3)
            np.multiply(k3, dt, out=stage)
            stage += rho
            rhs(stage, k4)
            k2 += k3
            k1 += k4
            k1 += 2.0 * k2
            k1 *= dt / 6.0
            rho += k1
            steps_done += 1
            if steps_done % cfg.resymmetrize_every == 0:
                np.conjugate(rho.T, out=stage)
                rho += stage
                rho *= 0.5
        record(t_next)

    return LindbladResult(
        times=times,
        observables={k: np.asarray(v) for k, v in values.items()},
        states=states,
        final_state=rho,
        max_trace_drift=max_drift,
        min_eigenvalue=None if min_eig is None else float(min_eig),
    )


def noisy_ln_series(
    beta0: float,
    bath: BathParams,
    cfg: IntegratorConfig,
    lat: TorusLattice,
    bip: Bipartition,
    times: np.ndarray,
) -> tuple[TimeSeries, dict]:
    """Block log-negativity of the dissipative trajectory started from GS(beta0)."""
    psi0 = embed_loop_state(ground_state(GroundStateSpec(beta0, lat)), lat)
    rho0 = np.outer(psi0, psi0.conj())
    result = lindblad_evolve(
        rho0, lat, bath, cfg, times,
        observables={"ln": lambda rho: log_negativity_mixed(rho, bip)},
    )
    info = {
        "max_trace_drift": result.max_trace_drift,
        "min_eigenvalue": result.min_eigenvalue,
    }
    return TimeSeries(times=result.times, values=result.observables["ln"]), info

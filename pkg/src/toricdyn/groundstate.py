"""Exact ground states of the perturbed code in the loop basis.

The normalized ground state at perturbation strength beta carries amplitude
exp((beta/2) * M(g)) / sqrt(Z(beta)) on group element g, where M(g) is the
magnetization of its flip pattern and Z(beta) = sum_g exp(beta * M(g)).
Amplitude exponent beta/2 against normalizer exponent beta is the only
self-consistent pairing (the squared amplitudes must sum to Z/Z = 1); it is
confirmed against dense diagonalization by `verify_ground_state`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import TorusLattice
from .loopgroup import magnetization_table

# critical perturbation strength of the equilibrium transition,
# 0.5 * ln(1 + sqrt(2)) = 0.4406867935...
BETA_CRITICAL = 0.5 * np.log(np.sqrt(2.0) + 1.0)


@dataclass(frozen=True)
class GroundStateSpec:
    """Perturbation strength plus the lattice it lives on."""

    beta: float
    lattice: TorusLattice

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ConfigError(f"beta must be finite and >= 0, got {self.beta}")


def ground_state(spec: GroundStateSpec) -> np.ndarray:
    """Normalized loop-basis ground state amplitudes (real positive).

    The maximum magnetization is factored out before exponentiating, so
    large beta (fully magnetized limit) stays overflow free.
    """
    mag = magnetization_table(spec.lattice)
    w = np.exp(0.5 * spec.beta * (mag - mag.max()))
    amps = w / np.linalg.norm(w)
    return amps.astype(np.complex128)


def log_partition_function(spec: GroundStateSpec) -> float:
    """log Z(beta) via log-sum-exp."""
    mag = magnetization_table(spec.lattice)
    mmax = float(mag.max())
    return spec.beta * mmax + float(np.log(np.sum(np.exp(spec.beta * (mag - mmax)))))


def partition_function(spec: GroundStateSpec) -> float:
    """Z(beta) = sum_g exp(beta * M(g)); inf if it exceeds float64 range."""
    logz = log_partition_function(spec)
    with np.errstate(over="ignore"):
        return float(np.exp(logz))


def verify_ground_state(spec: GroundStateSpec, tol: float = 1e-10) -> dict:
    """Check the loop-basis ground state against the dense eigensolver.

    Returns a report dict with the fidelity against the lowest eigenvector
    (projected onto the degenerate ground space when the gap closes), both
    energies, and a pass flag.  A fidelity below threshold would signal an
    amplitude-exponent convention error.
    """
    from . import oracle  # local import: oracle pulls in scipy.sparse

    lat = spec.lattice
    if lat.N > oracle.MAX_DENSE_SPINS:
        raise ConfigError(f"oracle limited to {oracle.MAX_DENSE_SPINS} spins, lattice has {lat.N}")
    psi_loop = oracle.embed_loop_state(ground_state(spec), lat)
    dense, info = oracle.dense_ground_state(spec.beta, lat, return_info=True)
    fidelity = float(abs(np.vdot(dense, psi_loop)) ** 2)
    loop_energy = float(np.real(np.vdot(psi_loop, oracle.apply_hamiltonian(spec.beta, lat, psi_loop))))
    report = {
        "beta": spec.beta,
        "fidelity": fidelity,
        "dense_energy": info["energy"],
        "loop_energy": loop_energy,
        "degeneracy": info["degeneracy"],
        "passed": fidelity > 1.0 - tol,
    }
    return report

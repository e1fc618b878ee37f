"""Entanglement of loop-basis pure states and dense mixed states.

Genuine multipartite entanglement is evaluated from single-site reduced
density matrices, which are diagonal for every state in the loop sector
(no two distinct loop configurations differ on fewer than four edges, so
one- and two-site coherences vanish identically).  Block entanglement goes
through the Schmidt spectrum of the amplitude matrix obtained by splitting
each flip pattern into its block-A and block-B halves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NumericalError, ResourceLimitError
from .lattice import Bipartition, TorusLattice
from .loopgroup import flip_pattern_table

# budgets for materializing amplitude/Gram matrices in block_schmidt
_DENSE_ENTRIES = 1 << 22
_UP_TABLE_ENTRIES = 1 << 22


@dataclass(frozen=True)
class TimeSeries:
    """Scalar observable sampled on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ConfigError("times and values must have equal length")
        if len(self.times) == 0:
            raise ConfigError("series must be non-empty")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("times must be strictly increasing")


@lru_cache(maxsize=8)
def _up_indicator(lat: TorusLattice):
    """Group-size x N indicator of 'edge i unflipped', or None above budget."""
    patterns = flip_pattern_table(lat)
    if len(patterns) * lat.N > _UP_TABLE_ENTRIES:
        return None
    bits = (patterns[:, None] >> np.arange(lat.N)[None, :]) & 1
    table = (1 - bits).astype(np.float64)
    table.setflags(write=False)
    return table


def single_site_probabilities(psi: np.ndarray, lat: TorusLattice) -> np.ndarray:
    """p[i] = probability that edge i is unflipped; the single-site reduced
    density matrix of a loop-sector state is diag(p_i, 1 - p_i)."""
    return batched_site_probabilities(psi[None, :], lat)[0]


def batched_site_probabilities(states: np.ndarray, lat: TorusLattice) -> np.ndarray:
    """single_site_probabilities for a stack of states (rows)."""
    w = np.abs(states) ** 2
    table = _up_indicator(lat)
    if table is not None:
        return w @ table
    patterns = flip_pattern_table(lat)
    p = np.empty((states.shape[0], lat.N))
    for i in range(lat.N):
        up = ((patterns >> i) & 1) == 0
        p[:, i] = w[:, up].sum(axis=1)
    return p


def ggm(psi: np.ndarray, lat: TorusLattice) -> float:
    """Genuine multipartite entanglement, 1 - max_i max(p_i, 1 - p_i) in [0, 1/2]."""
    p = single_site_probabilities(psi, lat)
    return float(1.0 - np.max(np.maximum(p, 1.0 - p)))


def batched_ggm(states: np.ndarray, lat: TorusLattice) -> np.ndarray:
    p = batched_site_probabilities(states, lat)
    return 1.0 - np.max(np.maximum(p, 1.0 - p), axis=1)


@lru_cache(maxsize=8)
def _schmidt_plan(lat: TorusLattice, bip: Bipartition):
    """Row/column compression of the loop basis for one bipartition.

    Splitting every flip pattern into its block-A / block-B restrictions
    gives each group element one cell of the amplitude matrix; the plan
    records the compressed row/column index of every element.  When both
    restriction maps are injective the matrix has one entry per row and per
    column (monomial), and the Schmidt values are just the moduli of the
    amplitudes.
    """
    patterns = flip_pattern_table(lat)
    rows, r_idx = np.unique(patterns & bip.mask_a, return_inverse=True)
    cols, c_idx = np.unique(patterns & bip.mask_b, return_inverse=True)
    monomial = len(rows) == len(patterns) and len(cols) == len(patterns)
    return r_idx, c_idx, len(rows), len(cols), monomial


def block_schmidt(psi: np.ndarray, lat: TorusLattice, bip: Bipartition) -> np.ndarray:
    """Schmidt coefficients (descending singular values) across the bipartition."""
    r_idx, c_idx, n_rows, n_cols, monomial = _schmidt_plan(lat, bip)
    if monomial:
        return np.sort(np.abs(psi))[::-1]
    if n_rows * n_cols <= _DENSE_ENTRIES:
        m = np.zeros((n_rows, n_cols), dtype=np.complex128)
        m[r_idx, c_idx] = psi
        return np.linalg.svd(m, compute_uv=False)
    if min(n_rows, n_cols) ** 2 <= _DENSE_ENTRIES:
        # Gram matrix of the smaller side, accumulated column group by group
        if n_rows > n_cols:
            r_idx, c_idx, n_rows, n_cols = c_idx, r_idx, n_cols, n_rows
        gram = np.zeros((n_rows, n_rows), dtype=np.complex128)
        order = np.argsort(c_idx, kind="stable")
        bounds = np.searchsorted(c_idx[order], np.arange(n_cols + 1))
        for k in range(n_cols):
            sel = order[bounds[k]:bounds[k + 1]]
            v = psi[sel]
            gram[np.ix_(r_idx[sel], r_idx[sel])] += np.outer(v, v.conj())
        eig = np.linalg.eigvalsh(gram)[::-1]
        return np.sqrt(np.clip(eig, 0.0, None))
    raise ResourceLimitError(
        f"amplitude matrix {n_rows} x {n_cols} exceeds the dense budget"
    )


def log_negativity_pure(schmidt: np.ndarray) -> float:
    """2 * log2(sum of Schmidt coefficients), the pure-state block negativity."""
    return float(2.0 * np.log2(np.sum(schmidt)))


def block_log_negativity_series(states: np.ndarray, lat: TorusLattice, bip: Bipartition) -> np.ndarray:
    """Pure-state block log-negativity for a stack of loop-basis states."""
    *_, monomial = _schmidt_plan(lat, bip)
    if monomial:
        return 2.0 * np.log2(np.sum(np.abs(states), axis=1))
    return np.array([log_negativity_pure(block_schmidt(s, lat, bip)) for s in states])


@lru_cache(maxsize=8)
def _block_permutation(bip: Bipartition, n_edges: int):
    """Basis permutation grouping block-A bits ahead of block-B bits."""
    na, nb = len(bip.block_a), len(bip.block_b)
    amap = np.zeros(1 << na, dtype=np.int64)
    for j, e in enumerate(bip.block_a):
        amap |= ((np.arange(1 << na) >> j) & 1) << e
    bmap = np.zeros(1 << nb, dtype=np.int64)
    for j, e in enumerate(bip.block_b):
        bmap |= ((np.arange(1 << nb) >> j) & 1) << e
    return (amap[:, None] | bmap[None, :]).reshape(-1)


def log_negativity_mixed(rho: np.ndarray, bip: Bipartition) -> float:
    """log2 of the trace norm of the partial transpose over block A."""
    dim = rho.shape[0]
    n_edges = len(bip.block_a) + len(bip.block_b)
    if dim != (1 << n_edges):
        raise ConfigError(f"density matrix dimension {dim} does not match {n_edges} edges")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise NumericalError("density matrix is not Hermitian within 1e-8")
    perm = _block_permutation(bip, n_edges)
    da, db = 1 << len(bip.block_a), 1 << len(bip.block_b)
    grouped = rho[np.ix_(perm, perm)].reshape(da, db, da, db)
    pt = np.ascontiguousarray(grouped.transpose(2, 1, 0, 3)).reshape(dim, dim)
    eig = np.linalg.eigvalsh(pt)
    value = float(np.log2(np.sum(np.abs(eig))))
    if value < 0.0:
        if value < -1e-9:
            warnings.warn(f"negativity clamped to 0 from {value:.3e}")
        value = 0.0
    return value


def time_average(series: TimeSeries) -> float:
    """Unweighted mean over the (inclusive) time grid."""
    return float(np.mean(series.values))

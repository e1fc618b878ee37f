"""Brute-force full-Hilbert-space reference (N <= 12 spins).

Everything here works on dense/sparse 2^N objects and is deliberately
independent of the loop-basis fast paths: states are validated by embedding
them into the full space and comparing against direct linear algebra.
Computational-basis convention: bit i of a basis index is 1 iff spin i is
flipped relative to the all-up state.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, ResourceLimitError
from .lattice import TorusLattice

MAX_DENSE_SPINS = 12
DEGENERACY_TOL = 1e-10


def _check_size(lat: TorusLattice) -> None:
    if lat.N > MAX_DENSE_SPINS:
        raise ResourceLimitError(f"dense oracle limited to {MAX_DENSE_SPINS} spins, got {lat.N}")


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def pauli_x_string(mask: int, n_spins: int) -> sp.csr_matrix:
    """Product of sigma^x over the edges in `mask` (a basis permutation)."""
    dim = 1 << n_spins
    idx = np.arange(dim, dtype=np.int64)
    return sp.csr_matrix((np.ones(dim), (idx ^ mask, idx)), shape=(dim, dim))


def pauli_z_string(mask: int, n_spins: int) -> sp.csr_matrix:
    """Product of sigma^z over the edges in `mask` (diagonal signs)."""
    dim = 1 << n_spins
    idx = np.arange(dim, dtype=np.int64)
    return sp.csr_matrix((((-1.0) ** _popcount(idx & mask)), (idx, idx)), shape=(dim, dim))


def hamiltonian_diagonal(beta: float, lat: TorusLattice) -> np.ndarray:
    """Diagonal part: plaquette terms plus the vertex-exponential perturbation."""
    dim = 1 << lat.N
    idx = np.arange(dim, dtype=np.int64)
    diag = np.zeros(dim)
    for pmask in lat.plaquette_masks:
        diag -= (-1.0) ** _popcount(idx & pmask)
    for smask in lat.star_masks:
        n_in_star = int(smask).bit_count()
        diag += np.exp(-beta * (n_in_star - 2.0 * _popcount(idx & smask)))
    return diag


def build_hamiltonian(beta: float, lat: TorusLattice) -> sp.csr_matrix:
    """Sparse Hermitian H = -sum_v A_v - sum_p B_p + sum_v exp(-beta S_v)."""
    _check_size(lat)
    dim = 1 << lat.N
    idx = np.arange(dim, dtype=np.int64)
    rows = [idx]
    cols = [idx]
    vals = [hamiltonian_diagonal(beta, lat)]
    for smask in lat.star_masks:
        rows.append(idx ^ smask)
        cols.append(idx)
        vals.append(np.full(dim, -1.0))
    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return h.tocsr()


def apply_hamiltonian(beta: float, lat: TorusLattice, psi: np.ndarray) -> np.ndarray:
    return build_hamiltonian(beta, lat) @ psi


@lru_cache(maxsize=8)
def loop_sector_indices(lat: TorusLattice) -> np.ndarray:
    """Basis indices reachable from the all-up state by star flips (BFS closure).

    This is pure geometry (no amplitude formula involved), so it stays an
    independent reference for the loop-basis construction.
    """
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for state in frontier:
            for smask in lat.star_masks:
                other = state ^ smask
                if other not in seen:
                    seen.add(other)
                    nxt.append(other)
        frontier = nxt
    out = np.array(sorted(seen), dtype=np.int64)
    out.setflags(write=False)
    return out


def sector_hamiltonian(beta: float, lat: TorusLattice) -> np.ndarray:
    """Dense H restricted to the loop sector (basis: sorted sector indices)."""
    _check_size(lat)
    sector = loop_sector_indices(lat)
    h = build_hamiltonian(beta, lat)
    return h[sector][:, sector].toarray()


def embed_loop_state(amps: np.ndarray, lat: TorusLattice) -> np.ndarray:
    """Scatter loop-basis amplitudes into the full 2^N space."""
    from .loopgroup import flip_pattern_table

    psi = np.zeros(1 << lat.N, dtype=np.complex128)
    psi[flip_pattern_table(lat)] = amps
    return psi


def restrict_to_loop_basis(psi: np.ndarray, lat: TorusLattice) -> np.ndarray:
    """Inverse of embed_loop_state (gather at the flip-pattern indices)."""
    from .loopgroup import flip_pattern_table

    return psi[flip_pattern_table(lat)]


def dense_ground_state(beta: float, lat: TorusLattice, return_info: bool = False):
    """Lowest eigenvector, resolved to the loop sector containing all-up.

    The ground level is degenerate across topological sectors (one copy per
    winding class), so the eigenproblem is solved inside the sector and the
    global minimum is cross-checked against a sparse eigensolve of the full
    H.  The phase is fixed by making the largest-magnitude entry real
    positive.
    """
    _check_size(lat)
    sector = loop_sector_indices(lat)
    hs = sector_hamiltonian(beta, lat)
    evals, evecs = np.linalg.eigh(hs)
    vec = evecs[:, 0]
    k = vec[np.argmax(np.abs(vec))]
    vec = vec * (abs(k) / k)
    psi = np.zeros(1 << lat.N, dtype=np.complex128)
    psi[sector] = vec
    if not return_info:
        return psi
    h = build_hamiltonian(beta, lat)
    n_eigs = min(8, h.shape[0] - 2)
    # shift-invert anchored below the sector minimum: the k nearest
    # eigenvalues to sigma are then the k lowest of the full spectrum,
    # which keeps ARPACK stable on the degenerate ground level
    low = np.sort(spla.eigsh(h.tocsc(), k=n_eigs, sigma=float(evals[0]) - 1.0,
                             which="LM", return_eigenvectors=False))
    degeneracy = int(np.sum(low < low[0] + DEGENERACY_TOL))
    if low[0] < evals[0] - 1e-9:
        raise ConfigError(
            f"global ground energy {low[0]:.12f} lies below the loop sector ({evals[0]:.12f})"
        )
    info = {"energy": float(evals[0]), "degeneracy": degeneracy, "global_min": float(low[0])}
    return psi, info


@lru_cache(maxsize=4)
def _eigensystem(beta: float, lat: TorusLattice):
    h = build_hamiltonian(beta, lat).toarray()
    return np.linalg.eigh(h)


def dense_evolve(psi: np.ndarray, beta1: float, t: float, lat: TorusLattice) -> np.ndarray:
    """exp(-i H(beta1) t) |psi> via the cached eigendecomposition."""
    _check_size(lat)
    evals, evecs = _eigensystem(beta1, lat)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi))


@lru_cache(maxsize=4)
def _bit_table(n_spins: int) -> np.ndarray:
    idx = np.arange(1 << n_spins, dtype=np.int64)
    table = np.stack([(idx >> i) & 1 for i in range(n_spins)])
    table.setflags(write=False)
    return table


def _split_indices(subset, n_spins: int):
    subset = sorted(subset)
    rest = [i for i in range(n_spins) if i not in set(subset)]
    bits = _bit_table(n_spins)
    rows = np.zeros(1 << n_spins, dtype=np.int64)
    for j, e in enumerate(subset):
        rows |= bits[e] << j
    cols = np.zeros(1 << n_spins, dtype=np.int64)
    for j, e in enumerate(rest):
        cols |= bits[e] << j
    return rows, cols, len(subset), len(rest)


def state_matrix(psi: np.ndarray, subset, n_spins: int) -> np.ndarray:
    """Reshape |psi> into a (2^|subset|, 2^|rest|) amplitude matrix."""
    rows, cols, k, r = _split_indices(tuple(subset), n_spins)
    m = np.zeros((1 << k, 1 << r), dtype=np.complex128)
    m[rows, cols] = psi
    return m


def reduced_density_matrix(psi: np.ndarray, subset, n_spins: int) -> np.ndarray:
    """Partial trace of |psi><psi| over the complement of `subset`."""
    if n_spins > MAX_DENSE_SPINS:
        raise ResourceLimitError(f"dense oracle limited to {MAX_DENSE_SPINS} spins")
    m = state_matrix(psi, subset, n_spins)
    return m @ m.conj().T


def largest_rdm_eigenvalue(psi: np.ndarray, subset, n_spins: int) -> float:
    """Largest eigenvalue of the reduced state, via the smaller reshaping side."""
    subset = tuple(subset)
    if 2 * len(subset) > n_spins:
        subset = tuple(i for i in range(n_spins) if i not in set(subset))
    sv = np.linalg.svd(state_matrix(psi, subset, n_spins), compute_uv=False)
    return float(sv[0] ** 2)


def ggm_all_bipartitions(psi: np.ndarray, n_spins: int) -> float:
    """1 - max over every bipartition of the largest reduced eigenvalue.

    All 2^(N-1) - 1 unordered bipartitions are enumerated (as the side not
    containing the last spin); each eigenproblem runs on the smaller side.
    """
    if n_spins > MAX_DENSE_SPINS:
        raise ResourceLimitError(f"exhaustive bipartition scan limited to {MAX_DENSE_SPINS} spins")
    lam = 0.0
    for smask in range(1, 1 << (n_spins - 1)):
        subset = tuple(i for i in range(n_spins - 1) if (smask >> i) & 1)
        lam = max(lam, largest_rdm_eigenvalue(psi, subset, n_spins))
    return 1.0 - lam

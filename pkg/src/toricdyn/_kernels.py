"""Hot numeric kernels: Walsh-Hadamard butterflies and the Lindblad right-hand side.

Each kernel has a numba @njit implementation and a pure-numpy fallback.
Set TORICDYN_DISABLE_NUMBA=1 to force the numpy path (the numba path is
selected automatically when numba imports cleanly).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("TORICDYN_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

if not _DISABLED:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False


def backend() -> str:
    """Active kernel backend, 'numba' or 'numpy'."""
    return "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Walsh-Hadamard transform (unnormalized in-place butterflies)
# ---------------------------------------------------------------------------

def _wht_inplace_numpy(a: np.ndarray) -> None:
    n = a.shape[-1]
    h = 1
    while h < n:
        view = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x = view[..., 0, :].copy()
        y = view[..., 1, :]
        view[..., 0, :] = x + y
        view[..., 1, :] = x - y
        h *= 2


if HAVE_NUMBA:

    @njit(cache=True)
    def _wht_inplace_1d(a):  # pragma: no cover - exercised via wht_inplace
        n = a.shape[0]
        h = 1
        while h < n:
            for i in range(0, n, 2 * h):
                for j in range(i, i + h):
                    x = a[j]
                    y = a[j + h]
                    a[j] = x + y
                    a[j + h] = x - y
            h *= 2

    def _wht_inplace_numba(a: np.ndarray) -> None:
        if a.ndim == 1:
            _wht_inplace_1d(a)
        else:
            for row in a:
                _wht_inplace_1d(row)

    wht_inplace = _wht_inplace_numba
else:
    wht_inplace = _wht_inplace_numpy


# ---------------------------------------------------------------------------
# Lindblad right-hand side
#
# drho/dt = -i[H, rho] + D(rho) for H = -sum_v X(star_v) + diag(d) and a
# per-site thermal dissipator with jump weights p0 (raise the bit) and
# p1 (clear the bit).  All index arithmetic is bitmask based: basis index
# bit i set <=> spin i flipped.
# ---------------------------------------------------------------------------

def _lindblad_rhs_numpy(rho, out, masks, diag, decay, perms, ix0, ix1, p0g, p1g):
    acc = (diag[:, None] - diag[None, :]) * rho
    for perm in perms:
        acc -= rho[perm, :]
        acc += rho[:, perm]
    acc *= -1j
    acc -= (decay[:, None] + decay[None, :]) * rho
    for i0, i1 in zip(ix0, ix1):
        acc[np.ix_(i1, i1)] += p0g * rho[np.ix_(i0, i0)]
        acc[np.ix_(i0, i0)] += p1g * rho[np.ix_(i1, i1)]
    out[:] = acc


if HAVE_NUMBA:

    @njit(cache=True)
    def _lindblad_rhs_numba(rho, out, masks, diag, decay, n_sites, p0g, p1g):  # pragma: no cover
        # Hermitian input => Hermitian derivative, so only the upper
        # triangle is computed and the lower is mirrored.
        dim = rho.shape[0]
        nm = masks.shape[0]
        for m in range(dim):
            dm = diag[m]
            am = decay[m]
            for n in range(m, dim):
                acc = (dm - diag[n]) * rho[m, n]
                for k in range(nm):
                    acc -= rho[m ^ masks[k], n]
                    acc += rho[m, n ^ masks[k]]
                acc = -1j * acc
                acc -= (am + decay[n]) * rho[m, n]
                for b in range(n_sites):
                    bit = 1 << b
                    if m & bit:
                        if n & bit:
                            acc += p0g * rho[m ^ bit, n ^ bit]
                    elif not (n & bit):
                        acc += p1g * rho[m ^ bit, n ^ bit]
                out[m, n] = acc
                out[n, m] = acc.conjugate()


class LindbladRHS:
    """Precomputed right-hand-side evaluator for one (lattice, bath) pair.

    Parameters are raw arrays so the evaluator stays decoupled from the
    domain types: `star_masks` are the X-string bitmasks of the Hamiltonian,
    `diag` its diagonal part, `n_sites` the qubit count, `two_k` the overall
    dissipator rate 2k, and (p0, p1) the thermal weights.
    """

    def __init__(self, star_masks, diag, n_sites: int, two_k: float, p0: float, p1: float):
        dim = diag.shape[0]
        self.masks = np.asarray(star_masks, dtype=np.int64)
        self.diag = np.asarray(diag, dtype=np.float64)
        self.n_sites = int(n_sites)
        self.p0g = 2.0 * two_k * p0
        self.p1g = 2.0 * two_k * p1
        # per-index anticommutator coefficient: sum_i k-weighted bit populations
        pc = np.bitwise_count(np.arange(dim, dtype=np.int64)).astype(np.float64)
        self.decay = two_k * (p0 * (n_sites - pc) + p1 * pc)
        if not HAVE_NUMBA:
            idx = np.arange(dim, dtype=np.int64)
            self._perms = [idx ^ int(m) for m in self.masks]
            self._ix0 = []
            self._ix1 = []
            for b in range(n_sites):
                bit = 1 << b
                i0 = idx[(idx & bit) == 0]
                self._ix0.append(i0)
                self._ix1.append(i0 + bit)

    def __call__(self, rho: np.ndarray, out: np.ndarray) -> np.ndarray:
        if HAVE_NUMBA:
            _lindblad_rhs_numba(rho, out, self.masks, self.diag, self.decay,
                                self.n_sites, self.p0g, self.p1g)
        else:
            _lindblad_rhs_numpy(rho, out, self.masks, self.diag, self.decay,
                                self._perms, self._ix0, self._ix1, self.p0g, self.p1g)
        return out

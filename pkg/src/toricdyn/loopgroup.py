"""The abelian group of contractible loops and its character (Walsh) transform.

Conventions used throughout the package:

* A group element is a bitmask over the Nv-1 canonical star generators
  (the star of the last vertex is excluded; it equals the product of all
  others, so the group is literally Z_2^(Nv-1) and the group law is XOR).
* A spin configuration is a bitmask over the N edges; bit set means the
  spin is flipped relative to the all-up reference state.
* A loop-basis state is a complex array of length 2^(Nv-1) indexed by the
  generator mask.
* A character is a bitmask chi over the Nv-1 generators with
  chi_v = (-1)^bit(v); the excluded vertex carries the product of all
  other signs, as forced by the torus constraint prod_v A_v = 1.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._kernels import wht_inplace
from .errors import ConfigError
from .lattice import TorusLattice


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


@lru_cache(maxsize=16)
def flip_pattern_table(lat: TorusLattice) -> np.ndarray:
    """Edge-flip bitmask for every group element, indexed by generator mask.

    Built by the doubling recursion table[g | 1<<v] = table[g] ^ star_mask[v];
    linearity of the table (closure under XOR) is what makes the recursion
    valid.  Read-only.
    """
    m = lat.Nv - 1
    table = np.zeros(1 << m, dtype=np.int64)
    for v in range(m):
        s = 1 << v
        table[s:2 * s] = table[:s] ^ lat.star_masks[v]
    table.setflags(write=False)
    return table


def flip_pattern(g: int, lat: TorusLattice) -> int:
    """Spin-flip pattern (edge bitmask) induced by the group element g."""
    return int(flip_pattern_table(lat)[g])


def magnetization(edge_mask: int, n_edges: int) -> int:
    """Total z-magnetization N - 2*popcount of a spin configuration."""
    return n_edges - 2 * int(edge_mask).bit_count()


@lru_cache(maxsize=16)
def magnetization_table(lat: TorusLattice) -> np.ndarray:
    """Magnetization of every group element's flip pattern."""
    table = lat.N - 2 * _popcount(flip_pattern_table(lat))
    table.setflags(write=False)
    return table


def walsh_transform(vec: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Orthonormal Walsh-Hadamard transform over Z_2^m.

    out[chi] = 2^(-m/2) * sum_g (-1)^popcount(chi & g) * vec[g].  The
    orthonormal convention makes the transform its own inverse, so the
    `inverse` flag only serves call-site clarity.
    """
    n = vec.shape[-1]
    if n & (n - 1) or n == 0:
        raise ConfigError(f"transform length must be a power of two, got {n}")
    out = np.array(vec, dtype=np.complex128, copy=True)
    wht_inplace(out)
    out *= 1.0 / np.sqrt(n)
    return out


def character_signs(chi: int, lat: TorusLattice) -> np.ndarray:
    """All Nv character values; the last one is the product of the others."""
    m = lat.Nv - 1
    signs = np.array([-1 if (chi >> v) & 1 else 1 for v in range(m)], dtype=np.int64)
    return np.append(signs, signs.prod())


def character_energy(chi: int, lat: TorusLattice) -> float:
    """Energy of a character sector under the star sum, constants excluded.

    Within the loop sector the quench Hamiltonian acts as the sum of
    generator translations; a character chi diagonalizes it with eigenvalue
    -(sum_v chi_v + prod_v chi_v).  The constant -Np from the plaquettes and
    +Nv from the zero-strength perturbation term cancel against each other
    on a torus (Np = Nv) and would only contribute a global phase anyway.
    """
    m = lat.Nv - 1
    pc = int(chi).bit_count()
    return float(-((m - 2 * pc) + (-1.0) ** pc))


@lru_cache(maxsize=16)
def character_energy_table(lat: TorusLattice) -> np.ndarray:
    """character_energy evaluated for every chi, indexed by chi mask."""
    m = lat.Nv - 1
    pc = _popcount(np.arange(1 << m, dtype=np.int64))
    table = -((m - 2 * pc) + (-1.0) ** pc)
    table.setflags(write=False)
    return table

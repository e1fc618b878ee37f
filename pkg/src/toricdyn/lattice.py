"""Torus geometry: spins on edges, star/plaquette support sets, block bipartitions.

Edge indexing is deterministic and cache friendly: cell (x, y) owns the
horizontal edge 2*(y*Lx + x) (pointing to cell (x+1, y)) and the vertical
edge 2*(y*Lx + x) + 1 (pointing to cell (x, y+1)), with periodic wrap-around
in both directions.  Vertices are indexed y*Lx + x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, ResourceLimitError

DEFAULT_MAX_GROUP_DIM = 1 << 24


def _odd_incidence(edges: list[int]) -> tuple[int, ...]:
    """Edges hit an odd number of times; repeated incidences cancel (sigma^2 = 1)."""
    return tuple(sorted(e for e in set(edges) if edges.count(e) % 2 == 1))


@dataclass(frozen=True)
class TorusLattice:
    """Immutable Lx x Ly periodic square lattice with spins on the edges."""

    Lx: int
    Ly: int
    N: int
    Nv: int
    Np: int
    star_support: tuple[tuple[int, ...], ...]
    plaquette_support: tuple[tuple[int, ...], ...]
    edge_endpoints: tuple[tuple[int, int], ...]
    star_masks: tuple[int, ...] = field(repr=False)
    plaquette_masks: tuple[int, ...] = field(repr=False)

    @property
    def group_dim(self) -> int:
        """Order of the contractible-loop group, 2^(Nv - 1)."""
        return 1 << (self.Nv - 1)


@dataclass(frozen=True)
class Bipartition:
    """Disjoint, exhaustive split of the edge set into two blocks."""

    block_a: tuple[int, ...]
    block_b: tuple[int, ...]
    mask_a: int = field(repr=False)
    mask_b: int = field(repr=False)

    @staticmethod
    def from_block(block_a, n_edges: int) -> "Bipartition":
        a = tuple(sorted(block_a))
        if len(set(a)) != len(a) or any(e < 0 or e >= n_edges for e in a):
            raise ConfigError("block_a must be a set of valid edge indices")
        b = tuple(e for e in range(n_edges) if e not in set(a))
        mask_a = sum(1 << e for e in a)
        return Bipartition(a, b, mask_a, ((1 << n_edges) - 1) ^ mask_a)


def build_lattice(Lx: int, Ly: int, *, max_group_dim: int = DEFAULT_MAX_GROUP_DIM) -> TorusLattice:
    """Construct the torus geometry for an Lx x Ly lattice (N = 2*Lx*Ly spins).

    Rejects lattices whose loop-group dimension 2^(Lx*Ly - 1) exceeds
    `max_group_dim`: such lattices are too large for the exact loop-basis
    method.  On degenerate tori (Lx or Ly equal to 1) wrap-around makes some
    of the four incidences of a star or plaquette coincide; coinciding pairs
    cancel and the stored support is the odd-incidence set.
    """
    if Lx < 1 or Ly < 1:
        raise ConfigError(f"lattice sides must be >= 1, got {Lx}x{Ly}")
    nv = Lx * Ly
    if nv >= 1 and (1 << (nv - 1)) > max_group_dim:
        raise ResourceLimitError(
            f"lattice too large for exact method: loop basis needs 2^{nv - 1} "
            f"amplitudes, budget is {max_group_dim}"
        )
    n = 2 * nv

    def h(x: int, y: int) -> int:
        return 2 * ((y % Ly) * Lx + (x % Lx))

    def v(x: int, y: int) -> int:
        return 2 * ((y % Ly) * Lx + (x % Lx)) + 1

    def vertex(x: int, y: int) -> int:
        return (y % Ly) * Lx + (x % Lx)

    stars = []
    plaqs = []
    for y in range(Ly):
        for x in range(Lx):
            stars.append(_odd_incidence([h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)]))
            plaqs.append(_odd_incidence([h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)]))

    endpoints = []
    for y in range(Ly):
        for x in range(Lx):
            endpoints.append((vertex(x, y), vertex(x + 1, y)))  # horizontal edge
            endpoints.append((vertex(x, y), vertex(x, y + 1)))  # vertical edge
    # endpoints list is per cell; reorder to edge index order
    ordered = [None] * n
    i = 0
    for y in range(Ly):
        for x in range(Lx):
            ordered[h(x, y)] = endpoints[i]
            ordered[v(x, y)] = endpoints[i + 1]
            i += 2

    return TorusLattice(
        Lx=Lx,
        Ly=Ly,
        N=n,
        Nv=nv,
        Np=nv,
        star_support=tuple(stars),
        plaquette_support=tuple(plaqs),
        edge_endpoints=tuple(ordered),
        star_masks=tuple(sum(1 << e for e in s) for s in stars),
        plaquette_masks=tuple(sum(1 << e for e in p) for p in plaqs),
    )


def equal_block_bipartition(lat: TorusLattice) -> Bipartition:
    """Split the N edges into two equal blocks of N/2.

    For even Lx, block A is the contiguous left half of the columns (all
    edges owned by cells with x < Lx/2).  For odd Lx the split falls back to
    the first N/2 edges in index order.
    """
    if lat.Lx % 2 == 0:
        block_a = []
        for y in range(lat.Ly):
            for x in range(lat.Lx // 2):
                cell = 2 * (y * lat.Lx + x)
                block_a.extend((cell, cell + 1))
    else:
        block_a = list(range(lat.N // 2))
    return Bipartition.from_block(block_a, lat.N)

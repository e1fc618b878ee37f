import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricdyn import (
    ConfigError,
    build_lattice,
    character_energy,
    character_energy_table,
    character_signs,
    flip_pattern,
    flip_pattern_table,
    magnetization,
    magnetization_table,
    walsh_transform,
)
from toricdyn.oracle import sector_hamiltonian

from conftest import random_loop_state


def test_flip_pattern_basics(lat22):
    assert flip_pattern(0, lat22) == 0
    single = flip_pattern(0b001, lat22)
    assert bin(single).count("1") == 4
    assert single == lat22.star_masks[0]
    # vertices 1 and 2 sit diagonally on the 2x2 torus: disjoint supports
    two = flip_pattern(0b110, lat22)
    assert bin(two).count("1") == 8


@given(g=st.integers(0, 31), h=st.integers(0, 31))
def test_group_closure(g, h):
    lat = build_lattice(2, 3)
    table = flip_pattern_table(lat)
    assert table[g ^ h] == table[g] ^ table[h]


@pytest.mark.parametrize("lx,ly", [(2, 2), (2, 3), (3, 3)])
def test_flip_pattern_vs_incidence(lx, ly):
    # independent route: an edge flips iff an odd number of its endpoint
    # vertices are active (the excluded last generator never turns on)
    lat = build_lattice(lx, ly)
    table = flip_pattern_table(lat)
    rng = np.random.default_rng(7)
    for g in rng.integers(0, lat.group_dim, size=20):
        expected = 0
        for e, (a, b) in enumerate(lat.edge_endpoints):
            active = sum(1 for v in (a, b) if v < lat.Nv - 1 and (int(g) >> v) & 1)
            if active % 2:
                expected |= 1 << e
        assert table[g] == expected


@pytest.mark.parametrize("lx,ly", [(2, 2), (2, 3)])
def test_no_two_patterns_differ_by_one_edge(lx, ly):
    # by linearity it is enough that no nonzero element flips a single edge
    lat = build_lattice(lx, ly)
    table = flip_pattern_table(lat)
    weights = np.bitwise_count(table[1:])
    assert weights.min() >= 2
    assert weights.min() == 4  # the lightest loop is a single star


def test_magnetization_examples(lat22):
    assert magnetization(0, 8) == 8
    assert magnetization(flip_pattern(0b001, lat22), 8) == 0
    assert magnetization(flip_pattern(0b110, lat22), 8) == -8
    mags = sorted(magnetization_table(lat22).tolist())
    assert mags == [-8, 0, 0, 0, 0, 0, 0, 8]


@given(mask=st.integers(0, 255))
def test_magnetization_range_parity(mask):
    m = magnetization(mask, 8)
    assert -8 <= m <= 8 and m % 2 == 0


def test_walsh_delta_uniform():
    delta = np.zeros(8, dtype=complex)
    delta[0] = 1.0
    out = walsh_transform(delta)
    assert np.allclose(out, np.full(8, 8 ** -0.5), atol=1e-14)
    back = walsh_transform(out, inverse=True)
    assert np.allclose(back, delta, atol=1e-14)


def test_walsh_roundtrip_and_parseval(rng):
    for n in (8, 1 << 13):
        v = random_loop_state(rng, n)
        w = walsh_transform(v)
        assert abs(np.linalg.norm(w) - 1.0) < 1e-12
        assert np.max(np.abs(walsh_transform(w, inverse=True) - v)) < 1e-12


def test_walsh_rejects_bad_length():
    with pytest.raises(ConfigError):
        walsh_transform(np.ones(6, dtype=complex))


def test_walsh_matches_direct_sum(rng):
    v = random_loop_state(rng, 16)
    w = walsh_transform(v)
    chi, g = np.arange(16)[:, None], np.arange(16)[None, :]
    direct = ((-1.0) ** np.bitwise_count(chi & g)) @ v / 4.0
    assert np.max(np.abs(w - direct)) < 1e-12


def test_character_energy_examples(lat22):
    assert character_energy(0, lat22) == -4.0
    assert character_energy(0b001, lat22) == 0.0
    assert character_energy(0b111, lat22) == 4.0
    table = character_energy_table(lat22)
    assert [table[c] for c in range(8)] == [character_energy(c, lat22) for c in range(8)]


def test_character_signs(lat22):
    signs = character_signs(0b101, lat22)
    assert signs.tolist() == [-1, 1, -1, 1]
    assert signs[-1] == signs[:-1].prod()


@pytest.mark.parametrize("lx,ly", [(2, 2), (2, 3)])
def test_spectrum_matches_oracle_sector(lx, ly):
    # multiset of character energies == spectrum of the sector-restricted H;
    # the -Np and +Nv constants cancel on a torus
    lat = build_lattice(lx, ly)
    sector = np.sort(np.linalg.eigvalsh(sector_hamiltonian(0.0, lat)))
    fast = np.sort(character_energy_table(lat))
    assert np.max(np.abs(sector - fast)) < 1e-10

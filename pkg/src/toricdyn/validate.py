"""Cross-check battery: every fast path against the dense brute-force oracle.

Each check returns (name, passed, detail); the CLI `validate` subcommand
prints them as a table.  Runtime is a couple of minutes on a laptop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from ._kernels import LindbladRHS
from .entanglement import (
    block_schmidt,
    ggm,
    log_negativity_mixed,
    log_negativity_pure,
    single_site_probabilities,
)
from .groundstate import GroundStateSpec, ground_state, verify_ground_state
from .lattice import Bipartition, build_lattice, equal_block_bipartition
from .lindblad import BathParams, IntegratorConfig, dissipator, dissipator_fixed_point_qubit, lindblad_evolve
from .loopgroup import character_energy_table, flip_pattern_table
from .quench import QuenchSpectrum, evolve, loschmidt_echo


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _evolved(lat, beta0: float, t: float) -> np.ndarray:
    return evolve(ground_state(GroundStateSpec(beta0, lat)), t, lat)


def run_validation(seed: int = 20260810) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks: list[Check] = []
    lat22 = build_lattice(2, 2)
    lat23 = build_lattice(2, 3)

    def add(name, passed, detail=""):
        checks.append(Check(name, bool(passed), detail))

    # lattice invariants
    for lat in (lat22, lat23):
        ok = all(len(s) == 4 for s in lat.star_support)
        ok &= all(len(p) == 4 for p in lat.plaquette_support)
        counts = np.zeros(lat.N, int)
        for s in lat.star_support:
            counts[list(s)] += 1
        ok &= bool(np.all(counts == 2))
        xor_all = 0
        for m in lat.star_masks:
            xor_all ^= m
        ok &= xor_all == 0
        ok &= all(
            len(set(s) & set(p)) % 2 == 0
            for s in lat.star_support for p in lat.plaquette_support
        )
        add(f"lattice invariants {lat.Lx}x{lat.Ly}", ok)

    # operator algebra: stars and plaquettes commute exactly
    comm_max = 0.0
    for sm in lat22.star_masks:
        a = oracle.pauli_x_string(sm, lat22.N)
        for pm in lat22.plaquette_masks:
            b = oracle.pauli_z_string(pm, lat22.N)
            comm_max = max(comm_max, abs(a @ b - b @ a).max())
    add("[A_v, B_p] = 0", comm_max == 0.0, f"max |comm| = {comm_max}")

    # loop-sector spectrum equals character energies
    for lat in (lat22, lat23):
        sec = np.sort(np.linalg.eigvalsh(oracle.sector_hamiltonian(0.0, lat)))
        fast = np.sort(character_energy_table(lat))
        err = float(np.max(np.abs(sec - fast)))
        add(f"sector spectrum vs characters {lat.Lx}x{lat.Ly}", err < 1e-10, f"max err {err:.2e}")

    # ground-state fidelity and energy
    for lat in (lat22, lat23):
        worst = 1.0
        for beta in (0.0, 0.2, 0.4407, 0.8, 1.5):
            rep = verify_ground_state(GroundStateSpec(beta, lat))
            worst = min(worst, rep["fidelity"])
            if beta == 0.0:
                add(
                    f"ground energy -Np at beta=0 {lat.Lx}x{lat.Ly}",
                    abs(rep["dense_energy"] + lat.Np) < 1e-10,
                    f"E0 = {rep['dense_energy']:.12f}",
                )
        add(f"ground-state fidelity {lat.Lx}x{lat.Ly}", worst > 1 - 1e-10, f"worst {worst:.2e}")

    # loop evolution vs dense evolution
    worst = 0.0
    for _ in range(3):
        beta0, t = rng.uniform(0, 1.5), rng.uniform(0, 10)
        psi_fast = oracle.embed_loop_state(_evolved(lat22, beta0, t), lat22)
        psi_dense = oracle.dense_evolve(
            oracle.embed_loop_state(ground_state(GroundStateSpec(beta0, lat22)), lat22),
            0.0, t, lat22,
        )
        worst = max(worst, float(np.linalg.norm(psi_fast - psi_dense)))
    add("loop evolve vs dense evolve (2x2)", worst < 1e-10, f"max |diff| {worst:.2e}")

    # spectral echo vs direct dense overlap
    worst = 0.0
    for _ in range(3):
        beta0, t = rng.uniform(0, 1.5), rng.uniform(0, 10)
        psi0 = ground_state(GroundStateSpec(beta0, lat22))
        dense0 = oracle.embed_loop_state(psi0, lat22)
        direct = abs(np.vdot(oracle.dense_evolve(dense0, 0.0, t, lat22), dense0)) ** 2
        worst = max(worst, abs(loschmidt_echo(psi0, t, lat22) - direct))
    add("spectral echo vs dense overlap (2x2)", worst < 1e-10, f"max err {worst:.2e}")

    # single-site probabilities vs dense reduced density matrices
    worst = 0.0
    amps = _evolved(lat22, 0.7, 3.3)
    psi = oracle.embed_loop_state(amps, lat22)
    p = single_site_probabilities(amps, lat22)
    for i in range(lat22.N):
        rdm = oracle.reduced_density_matrix(psi, (i,), lat22.N)
        worst = max(worst, abs(rdm[0, 0].real - p[i]), float(abs(rdm[0, 1])))
    add("single-site RDMs diagonal & match", worst < 1e-12, f"max err {worst:.2e}")

    # GGM shortcut vs exhaustive bipartition scan (2x3)
    worst = 0.0
    for _ in range(3):
        beta0, t = rng.uniform(0, 1.5), rng.uniform(0, 10)
        amps = _evolved(lat23, beta0, t)
        full = oracle.ggm_all_bipartitions(oracle.embed_loop_state(amps, lat23), lat23.N)
        worst = max(worst, abs(ggm(amps, lat23) - full))
    add("GGM vs exhaustive bipartitions (2x3)", worst < 1e-10, f"max err {worst:.2e}")

    # block Schmidt vs oracle SVD (monomial and dense compression paths)
    worst = 0.0
    for lat, bip in (
        (lat22, equal_block_bipartition(lat22)),
        (lat23, equal_block_bipartition(lat23)),
        (lat22, Bipartition.from_block((0, 1, 2, 5), lat22.N)),  # non-monomial split
    ):
        amps = _evolved(lat, 0.9, rng.uniform(0, 10))
        sv_fast = block_schmidt(amps, lat, bip)
        sv_dense = np.linalg.svd(
            oracle.state_matrix(oracle.embed_loop_state(amps, lat), bip.block_a, lat.N),
            compute_uv=False,
        )
        k = min(len(sv_fast), len(sv_dense))
        worst = max(worst, float(np.max(np.abs(sv_fast[:k] - sv_dense[:k]))))
        worst = max(worst, abs(float(np.sum(sv_fast**2)) - 1.0))
    add("block Schmidt vs oracle SVD", worst < 1e-9, f"max err {worst:.2e}")

    # pure/mixed negativity consistency
    amps = _evolved(lat22, 0.5, 2.2)
    bip = equal_block_bipartition(lat22)
    psi = oracle.embed_loop_state(amps, lat22)
    ln_pure = log_negativity_pure(block_schmidt(amps, lat22, bip))
    ln_mixed = log_negativity_mixed(np.outer(psi, psi.conj()), bip)
    add("pure vs mixed negativity", abs(ln_pure - ln_mixed) < 1e-9,
        f"|diff| = {abs(ln_pure - ln_mixed):.2e}")

    # two-site RDMs of evolved loop states are diagonal
    worst = 0.0
    psi = oracle.embed_loop_state(_evolved(lat23, 0.8, 4.1), lat23)
    for _ in range(10):
        i, j = rng.choice(lat23.N, size=2, replace=False)
        rdm = oracle.reduced_density_matrix(psi, (int(i), int(j)), lat23.N)
        worst = max(worst, float(np.max(np.abs(rdm - np.diag(np.diag(rdm))))))
    add("1- and 2-site RDMs diagonal", worst < 1e-12, f"max offdiag {worst:.2e}")

    # dissipator: Hermitian, traceless, correct thermal kernel
    bath = BathParams(k=0.05, B=10.0, T_E=1.0)
    rho = _random_density(rng, 1 << lat22.N)
    drho = dissipator(rho, bath, lat22)
    herm = float(np.max(np.abs(drho - drho.conj().T)))
    tr = abs(complex(np.trace(drho)))
    add("dissipator Hermitian+traceless", herm < 1e-10 and tr < 1e-10,
        f"herm {herm:.2e}, trace {tr:.2e}")
    fix = dissipator_fixed_point_qubit(bath)
    rho_fix = fix
    for _ in range(lat22.N - 1):
        rho_fix = np.kron(rho_fix, fix)
    resid = float(np.max(np.abs(dissipator(rho_fix, bath, lat22))))
    add("thermal product state annihilated", resid < 1e-10, f"max |D(rho)| {resid:.2e}")

    # fused integrator RHS vs commutator + dissipator composition
    rhs = LindbladRHS(np.asarray(lat22.star_masks, dtype=np.int64),
                      oracle.hamiltonian_diagonal(0.0, lat22), lat22.N,
                      2 * bath.k, bath.p0, bath.p1)
    out = np.empty_like(rho)
    rhs(rho, out)
    h = oracle.build_hamiltonian(0.0, lat22).toarray()
    ref = -1j * (h @ rho - rho @ h) + dissipator(rho, bath, lat22)
    err = float(np.max(np.abs(out - ref)))
    add("fused RHS vs reference RHS", err < 1e-10, f"max err {err:.2e}")

    # zero-coupling integrator reproduces unitary evolution
    psi0 = oracle.embed_loop_state(ground_state(GroundStateSpec(0.6, lat22)), lat22)
    res = lindblad_evolve(
        np.outer(psi0, psi0.conj()), lat22, BathParams(k=0.0), IntegratorConfig(),
        np.array([0.0, 1.0]),
    )
    target = oracle.dense_evolve(psi0, 0.0, 1.0, lat22)
    fid = float(np.real(np.vdot(target, res.final_state @ target)))
    add("k=0 integrator vs dense evolve", fid > 1 - 1e-8,
        f"fidelity deficit {1 - fid:.2e}, trace drift {res.max_trace_drift:.2e}")

    return checks


def _random_density(rng, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{c.name:<{width}}  {status}  {c.detail}")
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines)

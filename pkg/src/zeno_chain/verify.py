"""Built-in invariant suite run by ``zeno-chain verify``.

Each check draws its parameters from a fixed seed and returns
``(passed, detail)``.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import analytic
from .analytic import PhaseSchedule
from .core import annihilation_operator, enumerate_capped, enumerate_sector, hopping_matrix, number_operator
from .model import A1, A2, B, ChainParams, build_atomic_hamiltonian, build_chain_hamiltonian, \
    derived_mode_params, mode_rotation_unitary
from .simulate import EvolutionConfig, kraus_set, run_atomic, run_postselected, unitary_step, \
    vacuum_projected_step

CheckResult = tuple[bool, str]


def _random_params(rng: np.random.Generator, detuned: bool = True) -> ChainParams:
    k1, k2 = rng.uniform(0.1, 2.0, 2)
    delta = rng.uniform(-5, 5) if detuned else 0.0
    return ChainParams(float(k1), float(k2), float(delta))


def check_excitation_conservation() -> CheckResult:
    rng = np.random.default_rng(1)
    basis = enumerate_capped(3, 3)
    Ntot = sum(number_operator(basis, m) for m in range(3))
    worst = 0.0
    for _ in range(10):
        H = build_chain_hamiltonian(_random_params(rng), basis)
        worst = max(worst, np.abs(H @ Ntot - Ntot @ H).max(), np.abs(H - H.conj().T).max())
    return worst < 1e-12, f"max |[H, N]|, |H - H^†| = {worst:.2e}"


def check_atomic_sector() -> CheckResult:
    rng = np.random.default_rng(2)
    basis = enumerate_sector(3, 1)
    worst = 0.0
    for _ in range(10):
        p = _random_params(rng)
        worst = max(worst, np.abs(build_chain_hamiltonian(p, basis) - build_atomic_hamiltonian(p)).max())
    return worst == 0.0, f"max entry difference {worst:.2e}"


def check_rotated_form() -> CheckResult:
    rng = np.random.default_rng(3)
    basis = enumerate_capped(3, 2)
    worst = 0.0
    for _ in range(5):
        p = _random_params(rng)
        dm = derived_mode_params(p)
        U = mode_rotation_unitary(dm.theta, basis, modes=(A1, A2))
        # in rotated coordinates mode A1 plays the bright mode A
        hop = hopping_matrix(basis, A1, B)
        target = dm.kappa * (hop + hop.T) - p.delta * number_operator(basis, B)
        worst = max(worst, np.abs(U @ build_chain_hamiltonian(p, basis) @ U.conj().T - target).max())
    return worst < 1e-12, f"max deviation from single-coupling form {worst:.2e}"


def check_heisenberg() -> CheckResult:
    rng = np.random.default_rng(4)
    basis = enumerate_capped(3, 2)
    worst = 0.0
    for _ in range(20):
        p = _random_params(rng)
        dt = float(rng.uniform(0.01, 3.0))
        dm = derived_mode_params(p)
        sf = analytic.step_factor(dm.kappa, p.delta, dt)
        a = math.cos(dm.theta) * annihilation_operator(basis, A1) + math.sin(dm.theta) * annihilation_operator(basis, A2)
        b = annihilation_operator(basis, B)
        U = unitary_step(build_chain_hamiltonian(p, basis), dt)
        lhs = U @ a @ U.conj().T
        rhs = np.exp(-0.5j * p.delta * dt) * (np.conj(sf.mu) * a + np.conj(sf.nu) * b)
        worst = max(worst, np.abs(lhs - rhs).max())
    return worst < 1e-10, f"max deviation {worst:.2e}"


def check_kraus_completeness() -> CheckResult:
    rng = np.random.default_rng(5)
    worst = 0.0
    for N in (1, 2):
        basis = enumerate_capped(3, N)
        for _ in range(5):
            p = _random_params(rng)
            Ks = kraus_set(build_chain_hamiltonian(p, basis), basis, float(rng.uniform(0.05, 2.0)), N)
            total = sum(K.conj().T @ K for K in Ks)
            worst = max(worst, np.abs(total - np.eye(len(total))).max())
    return worst < 1e-10, f"max |sum K^†K - I| = {worst:.2e}"


def check_operator_form() -> CheckResult:
    rng = np.random.default_rng(6)
    worst = 0.0
    for N in (1, 2, 3):
        basis = enumerate_sector(3, N)
        for _ in range(3):
            p = _random_params(rng)
            dt = float(rng.uniform(0.05, 1.5))
            dm = derived_mode_params(p)
            V = vacuum_projected_step(build_chain_hamiltonian(p, basis), basis, dt)
            sl = enumerate_sector(2, N)
            R = mode_rotation_unitary(dm.theta, sl)
            chi = analytic.step_factor(dm.kappa, p.delta, dt).chi_step
            expect = np.diag(chi ** sl.occupations()[:, 0])
            worst = max(worst, np.abs(R @ V @ R.conj().T - expect).max())
    return worst < 1e-10, f"max deviation from chi^(a^† a) {worst:.2e}"


def check_analytic_equivalence() -> CheckResult:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        p = _random_params(rng)
        n = int(rng.integers(1, 201))
        t = float(rng.uniform(0.1, 5.0))
        phases = PhaseSchedule.deterministic(rng.uniform(-math.pi, math.pi, n))
        traj = run_postselected(EvolutionConfig(p, t, n, phases), track=False)
        dm = derived_mode_params(p)
        z = analytic.zeta_pair(analytic.chi_total(dm.kappa, p.delta, t, n, phases), dm.theta)
        amps = traj.final_state.amplitudes
        worst = max(worst, abs(amps[0] - z.zeta1), abs(amps[1] - z.zeta2))
    return worst < 1e-9, f"max amplitude deviation {worst:.2e}"


def check_monotone_success() -> CheckResult:
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        p = _random_params(rng)
        n = 100
        traj = run_postselected(EvolutionConfig(p, 2.0, n, PhaseSchedule.deterministic(rng.uniform(0, 6, n))))
        worst = max(worst, float(np.max(np.diff(traj.success))))
    return worst <= 1e-15, f"largest increase of P_j {worst:.2e}"


def check_atomic_equivalence() -> CheckResult:
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(10):
        p = _random_params(rng)
        n = 200
        phases = PhaseSchedule.deterministic(rng.uniform(0, 1, n))
        traj = run_postselected(EvolutionConfig(p, 3.0, n, phases), track=False)
        atomic = run_atomic(p, 3.0, n, phases)
        worst = max(worst, float(np.abs(atomic[-1] - traj.final_state.amplitudes).max()))
    return worst < 1e-12, f"max amplitude discrepancy {worst:.2e}"


def check_step_unimodularity() -> CheckResult:
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(200):
        k, d, dt = rng.uniform(-3, 3), rng.uniform(-50, 50), rng.uniform(0, 5)
        sf = analytic.step_factor(k, d, dt)
        worst = max(worst, abs(abs(sf.mu) ** 2 + abs(sf.nu) ** 2 - 1))
    return worst < 1e-12, f"max ||mu|^2 + |nu|^2 - 1| = {worst:.2e}"


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "excitation conservation / hermiticity": check_excitation_conservation,
    "atomic matrix = one-excitation sector": check_atomic_sector,
    "rotation gives single-coupling form": check_rotated_form,
    "Heisenberg step identity": check_heisenberg,
    "Kraus completeness": check_kraus_completeness,
    "projected step = chi^(a^† a)": check_operator_form,
    "analytic vs numeric amplitudes": check_analytic_equivalence,
    "success probability nonincreasing": check_monotone_success,
    "three-level equivalence": check_atomic_equivalence,
    "|mu|^2 + |nu|^2 = 1": check_step_unimodularity,
}


def run_checks() -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results

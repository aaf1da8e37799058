"""
Brute-force evolution of the monitored chain.

The full (A1, B, A2) Hamiltonian is exponentiated numerically, compressed to
the B-vacuum (post-selection) or expanded into its Kraus set (non-referring
measurement), and iterated with the measurement phase kicks. Nothing here uses
the closed forms of :mod:`zeno_chain.analytic`; the two are meant to be
checked against each other.

Post-selected states are carried unnormalized, so ``norm2`` is the
probability that every observation found B empty.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import PhaseSchedule
from .core import (
    DensityOperator,
    FockBasis,
    StateVector,
    coherent_amplitudes,
    entanglement_entropy,
    enumerate_capped,
    enumerate_sector,
    enumerate_truncated,
    expm_hermitian,
)
from .model import ChainParams, build_atomic_hamiltonian, build_chain_hamiltonian, derived_mode_params, \
    mode_rotation_unitary

HERMITIAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NumberState:
    """|N>_1 |0>_2; ``NumberState(1)`` is the single-photon case."""

    N: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("number state needs N >= 1")

    @property
    def reference_photons(self) -> float:
        return float(self.N)


@dataclass(frozen=True)
class CoherentState:
    """|alpha>_1 |0>_2, truncated at ``cutoff`` photons (default grows with |alpha|)."""

    alpha: complex
    cutoff: int | None = None

    @property
    def effective_cutoff(self) -> int:
        if self.cutoff is not None:
            return self.cutoff
        a = abs(self.alpha)
        return max(12, math.ceil(a * a + 6 * a + 4))

    @property
    def reference_photons(self) -> float:
        return abs(self.alpha) ** 2


ONE_PHOTON = NumberState(1)


@dataclass(frozen=True)
class EvolutionConfig:
    params: ChainParams
    t: float
    n: int
    phases: PhaseSchedule | None = None
    initial: NumberState | CoherentState = ONE_PHOTON
    step_durations: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.phases is None:
            object.__setattr__(self, "phases", PhaseSchedule.zero(self.n))
        if self.step_durations is not None:
            durs = tuple(float(d) for d in self.step_durations)
            if len(durs) != self.n or any(d < 0 for d in durs):
                raise ValueError("step_durations must hold n nonnegative entries")
            if not math.isclose(sum(durs), self.t, rel_tol=1e-12, abs_tol=1e-12):
                raise ValueError("step_durations must add up to t")
            object.__setattr__(self, "step_durations", durs)
        if not self.params.coupled and (self.phases.is_random or any(self.phases.values)):
            raise ValueError("phase kicks need a bright mode, i.e. a nonzero coupling")

    @property
    def theta(self) -> float:
        # with both couplings zero every kick is trivial and any angle will do
        return derived_mode_params(self.params).theta if self.params.coupled else 0.0

    def durations(self) -> tuple[float, ...]:
        return self.step_durations or (self.t / self.n,) * self.n


@dataclass
class Trajectory:
    """Per-step record of a post-selected run; index 0 is the initial state."""

    success: np.ndarray
    transfer: np.ndarray
    entropy: np.ndarray
    final_state: StateVector
    states: list[StateVector] = field(default_factory=list)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.success))

    @property
    def P(self) -> float:
        return float(self.success[-1])

    @property
    def p(self) -> float:
        return float(self.transfer[-1])


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

def chain_basis(initial: NumberState | CoherentState, closed: bool = False) -> FockBasis:
    """Three-mode basis holding every state the evolution can reach.

    Number states only need their own excitation sector. ``closed=True`` asks for
    all lower sectors too, which the non-referring channel populates.
    """
    if isinstance(initial, CoherentState):
        return enumerate_capped(3, initial.effective_cutoff)
    if closed:
        return enumerate_capped(3, initial.N)
    return enumerate_sector(3, initial.N)


def vacuum_slice(basis3: FockBasis) -> FockBasis:
    """The (A1, A2) basis of tuples ``(n1, n2)`` with ``(n1, 0, n2)`` in ``basis3``."""
    if basis3.kind == "sector":
        return enumerate_sector(2, basis3.total)
    if basis3.kind == "capped":
        return enumerate_capped(2, basis3.total)
    c1, _, c2 = basis3.cutoffs
    return enumerate_truncated((c1, c2))


def a_space(basis3: FockBasis) -> FockBasis:
    """(A1, A2) basis holding every Kraus image of the B-vacuum slice."""
    if basis3.kind == "sector":
        return enumerate_capped(2, basis3.total)
    return vacuum_slice(basis3)


def initial_state(initial: NumberState | CoherentState, basis2: FockBasis) -> StateVector:
    amps = np.zeros(basis2.dim, dtype=complex)
    if isinstance(initial, CoherentState):
        coh = coherent_amplitudes(initial.alpha, initial.effective_cutoff)
        for k, a in enumerate(coh.amplitudes):
            amps[basis2.index((k, 0))] = a
    else:
        amps[basis2.index((initial.N, 0))] = 1.0
    return StateVector(basis2, amps)


# ---------------------------------------------------------------------------
# step operators
# ---------------------------------------------------------------------------

def unitary_step(H: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) via Hermitian eigendecomposition."""
    H = np.asarray(H)
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix")
    err = np.max(np.abs(H - H.conj().T), initial=0.0)
    if err > HERMITIAN_TOL:
        raise ValueError(f"H is not Hermitian (max deviation {err:.3g})")
    return expm_hermitian(H, dt)


def _b_block(U: np.ndarray, basis3: FockBasis, rows2: FockBasis, cols2: FockBasis, b_out: int) -> np.ndarray:
    """Matrix of <b_out|_B U |0>_B with rows/cols labelled by (n1, n2)."""
    out = np.zeros((rows2.dim, cols2.dim), dtype=complex)
    r3, r2 = [], []
    for i, (n1, n2) in enumerate(rows2.states):
        j = basis3._index.get((n1, b_out, n2))
        if j is not None:
            r3.append(j)
            r2.append(i)
    c3, c2 = [], []
    for i, (n1, n2) in enumerate(cols2.states):
        j = basis3._index.get((n1, 0, n2))
        if j is not None:
            c3.append(j)
            c2.append(i)
    out[np.ix_(r2, c2)] = U[np.ix_(r3, c3)]
    return out


def vacuum_projected_step(H: np.ndarray, basis3: FockBasis, dt: float) -> np.ndarray:
    """<0|_B exp(-i H dt) |0>_B as a matrix on :func:`vacuum_slice` of ``basis3``."""
    U = unitary_step(H, dt)
    sl = vacuum_slice(basis3)
    return _b_block(U, basis3, sl, sl, 0)


def kraus_set(H: np.ndarray, basis3: FockBasis, dt: float, b_cutoff: int) -> list[np.ndarray]:
    """Kraus operators K_n = <n|_B exp(-i H dt) |0>_B for n = 0..b_cutoff,
    each a square matrix on :func:`a_space` of ``basis3``."""
    U = unitary_step(H, dt)
    space = a_space(basis3)
    return [_b_block(U, basis3, space, space, k) for k in range(b_cutoff + 1)]


def dephasing_unitary(phi_j: float, theta: float, basis2: FockBasis) -> np.ndarray:
    """exp(i phi_j a^† a) for the bright mode a = cos a1 + sin a2."""
    R = mode_rotation_unitary(theta, basis2)
    n_a = basis2.occupations()[:, 0]
    return R.conj().T @ (np.exp(1j * phi_j * n_a)[:, None] * R)


def apply_dephasing(state: StateVector, phi_j: float, theta: float) -> StateVector:
    return StateVector(state.basis, dephasing_unitary(phi_j, theta, state.basis) @ state.amplitudes)


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

class _Stepper:
    """Precomputed operators for one configuration; applies steps to a batch of
    column vectors."""

    def __init__(self, config: EvolutionConfig):
        self.config = config
        self.basis3 = chain_basis(config.initial)
        self.basis2 = vacuum_slice(self.basis3)
        self.H = build_chain_hamiltonian(config.params, self.basis3)
        self.R = mode_rotation_unitary(config.theta, self.basis2)
        self.Rh = self.R.conj().T
        self.n_a = self.basis2.occupations()[:, 0].astype(float)
        self.n2 = self.basis2.occupations()[:, 1].astype(float)
        self._V: dict[float, np.ndarray] = {}
        self.psi0 = initial_state(config.initial, self.basis2)

    def V(self, dt: float) -> np.ndarray:
        if dt not in self._V:
            self._V[dt] = vacuum_projected_step(self.H, self.basis3, dt)
        return self._V[dt]

    def step(self, psi: np.ndarray, dt: float, phi: np.ndarray | float) -> np.ndarray:
        psi = self.V(dt) @ psi
        # written as a correction so a zero phase leaves psi untouched bit-for-bit
        kick = np.expm1(1j * np.multiply.outer(self.n_a, phi))
        if psi.ndim == 1:
            kick = kick.reshape(-1)
        return psi + self.Rh @ (kick * (self.R @ psi))

    def transfer(self, psi: np.ndarray) -> np.ndarray:
        w = np.abs(psi) ** 2
        return (self.n2 @ w) / w.sum(axis=0) / self.config.initial.reference_photons


def run_postselected(config: EvolutionConfig, *, trial: int = 0, track: bool = True,
                     keep_states: bool = False) -> Trajectory:
    """Iterate projection onto B-vacuum followed by the phase kick, on the
    unnormalized (A1, A2) state.

    ``transfer`` is <n_2>/N_ref of the normalized state, which for one photon is
    the probability of finding it in A2. With ``track=False`` only the final
    step is recorded.
    """
    st = _Stepper(config)
    phases = config.phases.materialize(config.n, trial)
    psi = st.psi0.amplitudes.copy()

    success, transfer, entropy, states = [], [], [], []

    def record(vec):
        sv = StateVector(st.basis2, vec)
        n2 = sv.norm2()
        success.append(n2)
        transfer.append(float(st.transfer(vec)) if n2 > 0 else math.nan)
        entropy.append(entanglement_entropy(sv, (0,)) if n2 > 0 else math.nan)
        if keep_states:
            states.append(sv)
        return sv

    if track:
        record(psi)
    for dt, phi in zip(config.durations(), phases):
        psi = st.step(psi, dt, phi)
        if track:
            record(psi)
    final = StateVector(st.basis2, psi)
    if not track:
        record(psi)
    return Trajectory(np.array(success), np.array(transfer), np.array(entropy), final, states)


def _random_phase_chunk(config: EvolutionConfig, trials: range) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    st = _Stepper(config)
    table = np.stack([config.phases.materialize(config.n, k) for k in trials], axis=1)
    psi = np.repeat(st.psi0.amplitudes[:, None], len(trials), axis=1)
    for j, dt in enumerate(config.durations()):
        psi = st.step(psi, dt, table[j])
    ent = np.array([entanglement_entropy(StateVector(st.basis2, col), (0,)) for col in psi.T])
    return st.transfer(psi), ent, np.sum(np.abs(psi) ** 2, axis=0)


def random_phase_batch(config: EvolutionConfig, trials: int,
                       jobs: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Final transfer statistic, A1|A2 entropy and success probability of
    ``trials`` post-selected runs,
    each with its own random phase draw. Results do not depend on ``jobs``."""
    if not config.phases.is_random:
        raise ValueError("random-phase sampling needs a PhaseSchedule.uniform_random schedule")
    if jobs <= 1 or trials < 2 * jobs:
        return _random_phase_chunk(config, range(trials))
    bounds = np.linspace(0, trials, jobs + 1).astype(int)
    chunks = [range(bounds[k], bounds[k + 1]) for k in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_random_phase_chunk, [config] * jobs, chunks))
    return tuple(np.concatenate(col) for col in zip(*parts))


def monte_carlo_random_phases(config: EvolutionConfig, trials: int, jobs: int = 1) -> tuple[float, float]:
    """Sample mean of the final transfer probability and its standard error."""
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    p, _, _ = random_phase_batch(config, trials, jobs)
    return float(p.mean()), float(p.std(ddof=1) / math.sqrt(trials))


def run_nonreferring(config: EvolutionConfig, b_cutoff: int | None = None) -> list[DensityOperator]:
    """Density operators rho_0..rho_n on (A1, A2) when the B outcomes are discarded.

    Each step applies the Kraus set, then the phase kick. The basis keeps every
    lower excitation sector, because photons absorbed by B leave the A modes.
    """
    if config.phases.is_random:
        raise ValueError("non-referring evolution takes a deterministic phase schedule")
    basis3 = chain_basis(config.initial, closed=True)
    space = a_space(basis3)
    H = build_chain_hamiltonian(config.params, basis3)
    if b_cutoff is None:
        b_cutoff = int(basis3.totals().max())
    R = mode_rotation_unitary(config.theta, space)
    n_a = space.occupations()[:, 0]
    psi0 = initial_state(config.initial, space).amplitudes
    rho = np.outer(psi0, psi0.conj())
    out = [DensityOperator(space, rho)]
    cache: dict[float, list[np.ndarray]] = {}
    for dt, phi in zip(config.durations(), config.phases.materialize(config.n)):
        if dt not in cache:
            cache[dt] = kraus_set(H, basis3, dt, b_cutoff)
        rho = sum(K @ rho @ K.conj().T for K in cache[dt])
        D = R.conj().T @ (np.exp(1j * phi * n_a)[:, None] * R)
        rho = D @ rho @ D.conj().T
        out.append(DensityOperator(space, rho))
    return out


def run_atomic(params: ChainParams, t: float, n: int, phases: PhaseSchedule | None = None) -> np.ndarray:
    """Three-level counterpart: evolve |A1> under the 3x3 Hamiltonian, discard
    the |B> component after each interval, and kick the bright state
    cos|A1> + sin|A2> by exp(i phi_j).

    Returns the (A1, A2) amplitudes after each step, shape ``(n + 1, 2)``.
    """
    phases = PhaseSchedule.zero(n) if phases is None else phases
    theta = derived_mode_params(params).theta if params.coupled else 0.0
    U = unitary_step(build_atomic_hamiltonian(params), t / n)
    keep = np.diag([1.0, 0.0, 1.0])
    bright = np.array([math.cos(theta), 0.0, math.sin(theta)])
    proj = np.outer(bright, bright)
    psi = np.array([1.0, 0.0, 0.0], dtype=complex)
    out = [psi[[0, 2]].copy()]
    for phi in phases.materialize(n):
        psi = keep @ (U @ psi)
        psi = psi + (np.exp(1j * phi) - 1.0) * (proj @ psi)
        out.append(psi[[0, 2]].copy())
    return np.array(out)

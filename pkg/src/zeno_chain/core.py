"""
Fock-space substrate: occupation-number bases, state containers and
bipartite entanglement measures.

Three basis kinds are provided:

- ``sector``: all occupation tuples with a fixed total excitation number,
  ordered descending-lexicographically (so the one-excitation sector of three
  modes reads ``(1,0,0), (0,1,0), (0,0,1)``).
- ``capped``: all tuples with total excitation ``<= max_total``, ordered by
  total first and descending-lexicographically inside each total.
- ``truncated``: all tuples with ``n_k <= cutoff_k``, ascending lexicographic
  (row-major tensor-product order, vacuum first).

Everything is dense; the spaces here never exceed a few hundred states.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-9
EIG_FLOOR = 1e-12

Occupation = tuple[int, ...]


@dataclass(frozen=True)
class FockBasis:
    """Enumerated occupation-number basis of a multimode bosonic space."""

    mode_count: int
    kind: str
    states: tuple[Occupation, ...]
    total: int | None = None
    cutoffs: tuple[int, ...] | None = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, occupations) -> bool:
        return tuple(occupations) in self._index

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, occupations: Sequence[int]) -> int:
        try:
            return self._index[tuple(occupations)]
        except KeyError:
            raise KeyError(f"occupation {tuple(occupations)} is not in this {self.kind} basis") from None

    def state(self, index: int) -> Occupation:
        return self.states[index]

    def occupations(self) -> np.ndarray:
        """Integer array of shape ``(dim, mode_count)``."""
        return np.array(self.states, dtype=int).reshape(len(self.states), self.mode_count)

    def totals(self) -> np.ndarray:
        return self.occupations().sum(axis=1)


def _compositions(total: int, parts: int) -> Iterable[Occupation]:
    """Descending-lexicographic tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_sector(mode_count: int, total_excitations: int) -> FockBasis:
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    if total_excitations < 0:
        raise ValueError("total_excitations must be >= 0")
    states = tuple(_compositions(total_excitations, mode_count))
    return FockBasis(mode_count, "sector", states, total=total_excitations)


def enumerate_capped(mode_count: int, max_total: int) -> FockBasis:
    """Union of the sectors ``0..max_total``; closed under annihilation."""
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    if max_total < 0:
        raise ValueError("max_total must be >= 0")
    states = tuple(s for n in range(max_total + 1) for s in _compositions(n, mode_count))
    return FockBasis(mode_count, "capped", states, total=max_total)


def enumerate_truncated(cutoffs: Sequence[int]) -> FockBasis:
    cutoffs = tuple(int(c) for c in cutoffs)
    if not cutoffs or any(c < 0 for c in cutoffs):
        raise ValueError("cutoffs must be a nonempty sequence of nonnegative ints")
    states = tuple(itertools.product(*(range(c + 1) for c in cutoffs)))
    return FockBasis(len(cutoffs), "truncated", states, cutoffs=cutoffs)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over a basis. May be unnormalized: for post-selected
    evolution the squared norm is the cumulative success probability."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "StateVector":
        n2 = self.norm2()
        if n2 <= 0.0:
            raise ValueError("cannot normalize a zero-norm state")
        return StateVector(self.basis, self.amplitudes / math.sqrt(n2))

    def amplitude(self, occupations: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.basis.index(occupations)])

    def mean_occupation(self, mode: int) -> float:
        """<n_mode> of the normalized state."""
        probs = np.abs(self.amplitudes) ** 2
        return float(probs @ self.basis.occupations()[:, mode] / probs.sum())

    def occupation_variance(self, mode: int) -> float:
        probs = np.abs(self.amplitudes) ** 2
        probs = probs / probs.sum()
        n = self.basis.occupations()[:, mode]
        mean = probs @ n
        return float(probs @ (n - mean) ** 2)

    def projector(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.basis, np.outer(a, a.conj()))


@dataclass(frozen=True)
class DensityOperator:
    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"expected a {self.basis.dim}x{self.basis.dim} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) < tol)

    def is_psd(self, tol: float = 1e-10) -> bool:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return bool(np.linalg.eigvalsh(herm).min(initial=0.0) > -tol)


def fock_state(basis: FockBasis, occupations: Sequence[int]) -> StateVector:
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index(occupations)] = 1.0
    return StateVector(basis, amps)


def coherent_amplitudes(alpha: complex, cutoff: int) -> StateVector:
    """Single-mode Glauber state truncated at ``n = cutoff`` (not renormalized)."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    basis = enumerate_truncated((cutoff,))
    amps = np.empty(cutoff + 1, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    # recursion avoids overflowing n! for large cutoffs
    for n in range(1, cutoff + 1):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return StateVector(basis, amps)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def hopping_matrix(basis: FockBasis, dest: int, src: int) -> np.ndarray:
    """Matrix of ``a_dest^† a_src``; transitions leaving the basis are dropped."""
    out = np.zeros((basis.dim, basis.dim))
    for col, s in enumerate(basis.states):
        if s[src] == 0:
            continue
        t = list(s)
        coef = math.sqrt(t[src])
        t[src] -= 1
        coef *= math.sqrt(t[dest] + 1)
        t[dest] += 1
        row = basis._index.get(tuple(t))
        if row is not None:
            out[row, col] += coef
    return out


def number_operator(basis: FockBasis, mode: int) -> np.ndarray:
    return np.diag(basis.occupations()[:, mode].astype(float))


def annihilation_operator(basis: FockBasis, mode: int) -> np.ndarray:
    """Matrix of ``a_mode`` within ``basis``. Exact on capped and truncated bases
    (both closed under lowering); on a sector basis every image leaves the basis."""
    out = np.zeros((basis.dim, basis.dim))
    for col, s in enumerate(basis.states):
        if s[mode] == 0:
            continue
        t = list(s)
        t[mode] -= 1
        row = basis._index.get(tuple(t))
        if row is not None:
            out[row, col] = math.sqrt(s[mode])
    return out


def hermitian_blocks(H: np.ndarray, tol: float = 0.0) -> list[np.ndarray]:
    """Index sets of the connected components of the sparsity graph of ``H``."""
    from scipy.sparse.csgraph import connected_components

    ncomp, labels = connected_components(np.abs(H) > tol, directed=False)
    return [np.flatnonzero(labels == k) for k in range(ncomp)]


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian ``H`` by eigendecomposition, block by block.

    Number-conserving Hamiltonians split into many small blocks, so this stays
    cheap even on a few thousand states.
    """
    H = np.asarray(H)
    out = np.zeros(H.shape, dtype=complex)
    for idx in hermitian_blocks(H):
        block = H[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(block)
        out[np.ix_(idx, idx)] = (v * np.exp(-1j * w * t)) @ v.conj().T
    return out


# ---------------------------------------------------------------------------
# bipartite measures
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _bipartition(basis: FockBasis, group: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    modes = range(basis.mode_count)
    if not group or any(g not in modes for g in group) or len(set(group)) != len(group):
        raise ValueError(f"invalid mode group {group}")
    rest = tuple(m for m in modes if m not in group)
    rows: dict = {}
    cols: dict = {}
    r_idx, c_idx = [], []
    for s in basis.states:
        r_idx.append(rows.setdefault(tuple(s[m] for m in group), len(rows)))
        c_idx.append(cols.setdefault(tuple(s[m] for m in rest), len(cols)))
    return np.array(r_idx), np.array(c_idx), (len(rows), len(cols))


def _bipartite_matrix(state: StateVector, group: Sequence[int]) -> np.ndarray:
    """Amplitudes reshaped to (first-group configs) x (rest configs)."""
    r_idx, c_idx, shape = _bipartition(state.basis, tuple(group))
    mat = np.zeros(shape, dtype=complex)
    mat[r_idx, c_idx] = state.amplitudes
    return mat


def reduced_density(state: StateVector, group: Sequence[int]) -> np.ndarray:
    """Reduced operator of ``group`` for the normalized state."""
    n2 = state.norm2()
    if n2 <= 0.0:
        raise ValueError("zero-norm state has no reduced operator")
    m = _bipartite_matrix(state, group)
    return (m @ m.conj().T) / n2


def entanglement_entropy(state: StateVector, group: Sequence[int] = (0,)) -> float:
    """Von Neumann entropy (nats) of the reduced operator of ``group``."""
    evals = np.linalg.eigvalsh(reduced_density(state, group))
    evals = evals[evals > EIG_FLOOR]
    return float(max(0.0, -np.sum(evals * np.log(evals))))


def reduced_purity(state: StateVector, group: Sequence[int]) -> float:
    rho = reduced_density(state, group)
    return float(np.real(np.trace(rho @ rho)))

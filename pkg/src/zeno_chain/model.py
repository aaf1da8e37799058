"""Hamiltonians of the A1-B-A2 oscillator chain and of the equivalent V-type atom.

Mode order is always (A1, B, A2), so the one-excitation sector matrix is the
atomic 3x3 matrix verbatim.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FockBasis, expm_hermitian, hopping_matrix, number_operator

A1, B, A2 = 0, 1, 2


@dataclass(frozen=True)
class ChainParams:
    kappa1: float
    kappa2: float
    delta: float = 0.0

    @property
    def coupled(self) -> bool:
        """False when both couplings vanish and the bright mode is undefined."""
        return self.kappa1 != 0.0 or self.kappa2 != 0.0

    @classmethod
    def from_theta(cls, kappa: float, theta: float, delta: float = 0.0) -> "ChainParams":
        """Couplings whose mixing angle is ``theta`` and total strength ``kappa``."""
        return cls(kappa * math.cos(theta), kappa * math.sin(theta), delta)


@dataclass(frozen=True)
class DerivedModeParams:
    theta: float
    kappa: float


def derived_mode_params(params: ChainParams) -> DerivedModeParams:
    """Mixing angle and effective coupling of the bright mode ``a = cos a1 + sin a2``."""
    kappa = math.hypot(params.kappa1, params.kappa2)
    if kappa == 0.0:
        raise ValueError("both couplings are zero")
    return DerivedModeParams(theta=math.atan2(params.kappa2, params.kappa1), kappa=kappa)


def build_chain_hamiltonian(params: ChainParams, basis: FockBasis) -> np.ndarray:
    """H = k1 (a1^† b + h.c.) + k2 (a2^† b + h.c.) - Delta b^† b on a 3-mode basis."""
    if basis.mode_count != 3:
        raise ValueError("chain Hamiltonian needs a basis over modes (A1, B, A2)")
    h1 = hopping_matrix(basis, A1, B)
    h2 = hopping_matrix(basis, A2, B)
    H = params.kappa1 * (h1 + h1.T) + params.kappa2 * (h2 + h2.T) - params.delta * number_operator(basis, B)
    return H.astype(complex)


def build_atomic_hamiltonian(params: ChainParams) -> np.ndarray:
    """3x3 V-configuration Hamiltonian in the level basis (|A1>, |B>, |A2>)."""
    k1, k2, d = params.kappa1, params.kappa2, params.delta
    return np.array([[0.0, k1, 0.0], [k1, -d, k2], [0.0, k2, 0.0]], dtype=complex)


def rotation_generator(basis: FockBasis, modes: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Real antisymmetric ``a_i^† a_j - a_j^† a_i`` for the mode pair (i, j)."""
    i, j = modes
    g = hopping_matrix(basis, i, j)
    return g - g.T


def mode_rotation_unitary(theta: float, basis: FockBasis, modes: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Unitary taking amplitudes in the (A1, A2) number basis to amplitudes in the
    rotated (A, C) number basis, with a = cos(theta) a1 + sin(theta) a2 and
    c = -sin(theta) a1 + cos(theta) a2.

    ``modes`` selects which two modes of ``basis`` play A1 and A2; other modes are
    left alone. On a single excitation this is ((cos, sin), (-sin, cos)).
    """
    gen = rotation_generator(basis, modes)
    # exp(theta G) == exp(-i X) with X = i theta G Hermitian
    return expm_hermitian(1j * theta * gen, 1.0)

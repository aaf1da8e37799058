"""
Closed-form post-selected dynamics.

Everything observable in the post-selected branch is a function of a single
complex number ``chi``, the eigenvalue ratio by which the accumulated
non-unitary evolution multiplies the bright-mode creation operator. Two
families of functions live here:

- exact, finite-``n`` results (:func:`step_factor`, :func:`chi_total`,
  :func:`chi_product`, :func:`zeta_pair`, :func:`probabilities`, and the
  multi-photon statistics);
- asymptotic limits of frequent monitoring (:func:`chi_limit`,
  :func:`limit_transfer_prob`, :func:`random_phase_average`,
  :func:`effective_beam_splitter_phase`). The strong-detuning limits are only
  meaningful when ``|delta| >> kappa`` *and* the accumulated leakage
  ``n (2 kappa / delta)^2 sin^2(gamma dt)`` stays small.
"""
from __future__ import annotations

import math
import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StepFactor:
    gamma: float
    mu: complex
    nu: complex
    chi_step: complex


@dataclass(frozen=True)
class ZetaPair:
    """Amplitudes of the photon left in A1 (``zeta1``) and moved to A2 (``zeta2``)."""

    zeta1: complex
    zeta2: complex

    @property
    def weights(self) -> tuple[float, float]:
        return abs(self.zeta1) ** 2, abs(self.zeta2) ** 2


@dataclass(frozen=True)
class PhaseSchedule:
    """Per-step measurement phases, either an explicit list or uniform random
    draws on [0, 2pi) from a seeded generator.

    Random schedules are materialized per trial from ``(seed, trial)`` so that
    trials are independent of execution order.
    """

    values: tuple[float, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if (self.values is None) == (self.seed is None):
            raise ValueError("a PhaseSchedule is either deterministic (values) or random (seed)")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def deterministic(cls, values: Sequence[float]) -> "PhaseSchedule":
        return cls(values=tuple(values))

    @classmethod
    def spread(cls, total_phase: float, n: int) -> "PhaseSchedule":
        """``n`` equal steps adding up to ``total_phase``."""
        return cls(values=(total_phase / n,) * n)

    @classmethod
    def zero(cls, n: int) -> "PhaseSchedule":
        return cls(values=(0.0,) * n)

    @classmethod
    def uniform_random(cls, seed: int) -> "PhaseSchedule":
        return cls(seed=int(seed))

    @property
    def is_random(self) -> bool:
        return self.seed is not None

    def materialize(self, n: int, trial: int = 0) -> np.ndarray:
        if self.values is not None:
            if len(self.values) != n:
                raise ValueError(f"phase schedule has {len(self.values)} entries but {n} steps were requested")
            return np.array(self.values)
        rng = np.random.default_rng([self.seed, trial])
        return rng.uniform(0.0, TWO_PI, n)


def step_factor(kappa: float, delta: float, dt: float, phi_j: float = 0.0) -> StepFactor:
    """Per-interval factors of the two-mode (bright mode, B) problem."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    gamma = math.sqrt(kappa * kappa + delta * delta / 4.0)
    if gamma == 0.0:
        mu, nu = 1.0 + 0j, 0j
    else:
        s = math.sin(gamma * dt)
        mu = complex(math.cos(gamma * dt), -delta / (2.0 * gamma) * s)
        nu = complex(0.0, -kappa / gamma * s)
    chi = cmath.exp(1j * (phi_j + delta * dt / 2.0)) * mu
    return StepFactor(gamma, mu, nu, chi)


def chi_product(kappa: float, delta: float, durations: Sequence[float], phases: Sequence[float]) -> complex:
    """Product of step factors for arbitrary (possibly non-uniform) intervals."""
    if len(durations) != len(phases):
        raise ValueError("durations and phases differ in length")
    chi = 1.0 + 0j
    for dt, phi in zip(durations, phases):
        chi *= step_factor(kappa, delta, dt, phi).chi_step
    return chi


def chi_total(kappa: float, delta: float, t: float, n: int, phases: PhaseSchedule | None = None,
              trial: int = 0) -> complex:
    """Exact accumulated factor after ``n`` equal intervals covering time ``t``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if t < 0:
        raise ValueError("t must be nonnegative")
    phi = 0.0 if phases is None else float(np.sum(phases.materialize(n, trial)))
    base = step_factor(kappa, delta, t / n, 0.0).chi_step
    return cmath.exp(1j * phi) * base ** n


def chi_limit(phi: float, kappa: float = 0.0, t: float = 0.0, delta: float | None = None) -> complex:
    """Frequent-monitoring limit of ``chi``: exp(i phi) without detuning,
    exp(i (phi - kappa^2 t / delta)) under strong detuning."""
    return cmath.exp(1j * effective_phase(phi, kappa, t, delta))


def effective_phase(phi: float, kappa: float, t: float, delta: float | None) -> float:
    if delta is None or delta == 0:
        return phi
    return phi - kappa * kappa * t / delta


def zeta_pair(chi: complex, theta: float) -> ZetaPair:
    c, s = math.cos(theta), math.sin(theta)
    return ZetaPair(chi * c * c + s * s, (chi - 1.0) * c * s)


def probabilities(z: ZetaPair) -> tuple[float, float]:
    """Success probability ``P`` and conditional transfer probability ``p``."""
    w1, w2 = z.weights
    P = w1 + w2
    if P == 0.0:
        raise ValueError("zero success probability: conditional probability undefined")
    return P, w2 / P


def limit_transfer_prob(theta: float, phi: float, kappa: float = 0.0, t: float = 0.0,
                        delta: float | None = None) -> float:
    """Asymptotic transfer probability 2 cos^2 sin^2 (1 - cos phi_eff).

    ``delta=None`` (or 0) is the resonant case; otherwise the strong-detuning
    form with phi_eff = kappa^2 t / delta - phi applies.
    """
    phi_eff = effective_phase(phi, kappa, t, delta)
    if phi_eff == 0.0:
        return 0.0
    c, s = math.cos(theta), math.sin(theta)
    return 2.0 * c * c * s * s * (1.0 - math.cos(phi_eff))


def random_phase_average(kappa1: float, kappa2: float) -> float:
    k2 = kappa1 * kappa1 + kappa2 * kappa2
    if k2 == 0.0:
        raise ValueError("both couplings are zero")
    return 2.0 * kappa1 * kappa1 * kappa2 * kappa2 / (k2 * k2)


def number_state_stats(N: int, z: ZetaPair) -> tuple[float, float, float]:
    """(P, mean photons in A2, variance of photons in A2) for |N>_1 |0>_2."""
    if N < 1:
        raise ValueError("N must be >= 1")
    w1, w2 = z.weights
    tot = w1 + w2
    if tot == 0.0:
        raise ValueError("zero success probability")
    mean2 = N * w2 / tot
    mean1 = N * w1 / tot
    return tot ** N, mean2, mean1 * mean2 / N


def coherent_state_stats(alpha: complex, z: ZetaPair) -> tuple[float, float, float, tuple[complex, complex]]:
    """(P, mean photons in A2, variance, output coherent amplitudes) for |alpha>_1 |0>_2.

    The post-selected state stays a product of coherent states, so the A2
    statistics are Poissonian.
    """
    w1, w2 = z.weights
    n0 = abs(alpha) ** 2
    P = math.exp(-n0 * (1.0 - w1 - w2))
    mean2 = n0 * w2
    return P, mean2, mean2, (alpha * z.zeta1, alpha * z.zeta2)


def effective_beam_splitter_phase(phi: float, kappa: float, t: float, delta: float) -> float:
    """Phase of the limiting unitary exp(i x a^† a) on the bright mode."""
    if delta == 0:
        raise ValueError("the effective beam-splitter limit needs nonzero detuning")
    return phi - kappa * kappa * t / delta

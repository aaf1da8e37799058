"""Measurement-modified dynamics of a monitored three-oscillator chain."""

from .analytic import (
    PhaseSchedule,
    StepFactor,
    ZetaPair,
    chi_limit,
    chi_product,
    chi_total,
    coherent_state_stats,
    effective_beam_splitter_phase,
    limit_transfer_prob,
    number_state_stats,
    probabilities,
    random_phase_average,
    step_factor,
    zeta_pair,
)
from .core import (
    DensityOperator,
    FockBasis,
    StateVector,
    coherent_amplitudes,
    entanglement_entropy,
    enumerate_capped,
    enumerate_sector,
    enumerate_truncated,
    fock_state,
)
from .model import (
    ChainParams,
    DerivedModeParams,
    build_atomic_hamiltonian,
    build_chain_hamiltonian,
    derived_mode_params,
    mode_rotation_unitary,
)
from .simulate import (
    CoherentState,
    EvolutionConfig,
    NumberState,
    Trajectory,
    apply_dephasing,
    kraus_set,
    monte_carlo_random_phases,
    run_atomic,
    run_nonreferring,
    run_postselected,
    unitary_step,
    vacuum_projected_step,
)

__version__ = "0.1.0"

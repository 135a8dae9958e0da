"""Spectral-gap analysis of Markov chains driven by ramped quantum proposals."""

from .models import (
    DEFAULT_MAX_SITES,
    BoltzmannTarget,
    ClassicalHamiltonian,
    DisorderSpec,
    IsingChain,
    RampSchedule,
    SKInstance,
    SpinConfiguration,
    ThreeSpinInstance,
    boltzmann,
    energy,
    energy_table,
    index_from_spins,
    ramp_value,
    sample_3spin,
    sample_sk,
    spins_from_index,
)
from .evolution import (
    PlateauSpectrum,
    ProposalMatrix,
    RampPropagator,
    diagonalize_plateau,
    plateau_hamiltonian,
    proposal_finite_kappa,
    proposal_quench,
    proposal_time_averaged,
    ramp_propagator,
)
from .chain import (
    GapResult,
    TransitionMatrix,
    metropolis_transition,
    mixing_time_bounds,
    spectral_gap,
)
from .bottleneck import (
    SubsetSelector,
    energy_manifold,
    equilibrium_flow,
    lambda_bound,
    ramped_lambda_from_overlaps,
)
from .freefermion import (
    IsingGapBound,
    ModeResult,
    MomentumSector,
    ising_bound,
    ising_bound_detail,
    ising_bound_large_n,
    lz_eta_approx,
    mode_eta,
    mode_transition,
    momentum_sectors,
)
from .analysis import (
    GapCurve,
    KappaScan,
    PeakResult,
    ScalingFit,
    alpha_equals_n_scan,
    disorder_scan,
    find_peak,
    fit_scaling,
    instance_gaps,
    kappa_scan,
)

__version__ = "0.1.0"

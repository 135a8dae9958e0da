"""Metropolis-Hastings chains over proposal matrices and their spectral gaps."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .evolution import ProposalMatrix, symmetry_residual
from .models import BoltzmannTarget

logger = logging.getLogger(__name__)

PROPOSAL_SYMMETRY_TOL = 1e-6
REVERSIBILITY_TOL = 1e-8
UNIT_EIGENVALUE_TOL = 1e-8
DIAGONAL_CLAMP_ERROR = 1e-6


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic transition matrix P(y, x) with its stationary target."""

    matrix: np.ndarray
    target: BoltzmannTarget


def detailed_balance_residual(p: TransitionMatrix) -> float:
    """max_{x,y} |pi(x) P(x,y) - pi(y) P(y,x)|."""
    flux = p.target.probabilities[:, None] * p.matrix
    return float(np.abs(flux - flux.T).max())


def stationarity_residual(p: TransitionMatrix) -> float:
    """Infinity norm of pi P - pi."""
    pi = p.target.probabilities
    return float(np.abs(pi @ p.matrix - pi).max())


def metropolis_transition(
    proposal: ProposalMatrix | np.ndarray, target: BoltzmannTarget
) -> TransitionMatrix:
    """Metropolis-Hastings chain from a symmetric proposal.

    With a symmetric proposal the proposal-ratio factor of the acceptance rule
    is identically one and is omitted; asymmetric proposals are rejected since
    the ratio would have to be tracked per move. Off-diagonal entries are
    P(y, x) = Q(x|y) min(1, pi(x)/pi(y)); the diagonal absorbs rejected mass.
    """
    q = proposal.matrix if isinstance(proposal, ProposalMatrix) else np.asarray(proposal)
    if q.shape[0] != q.shape[1] or q.shape[0] != target.n_states:
        raise ValueError(
            f"proposal shape {q.shape} does not match target with {target.n_states} states"
        )
    asym = symmetry_residual(q)
    if asym > PROPOSAL_SYMMETRY_TOL:
        raise ValueError(
            f"proposal symmetry residual {asym:.3e} exceeds {PROPOSAL_SYMMETRY_TOL:.0e}; "
            "Metropolis acceptance here assumes a symmetric proposal"
        )
    # Exact symmetry below makes detailed balance structural.
    q = 0.5 * (q + q.T)
    log_pi = target.log_probabilities
    accept = np.exp(np.minimum(0.0, log_pi[None, :] - log_pi[:, None]))
    p = q * accept
    off_sum = p.sum(axis=1) - np.diag(p)
    diag = 1.0 - off_sum
    worst = diag.min()
    if worst < -DIAGONAL_CLAMP_ERROR:
        raise ValueError(
            f"rejected-mass diagonal came out {worst:.3e}; proposal rows are not stochastic"
        )
    if worst < -1e-12:
        logger.warning("clamping negative chain diagonal (worst %.3e) to zero", worst)
    np.fill_diagonal(p, np.maximum(diag, 0.0))
    return TransitionMatrix(matrix=p, target=target)


@dataclass(frozen=True, eq=False)
class GapResult:
    """Spectral gap delta = 1 - |lambda_2| and the diagnostics behind it."""

    delta: float
    lambda2: float
    stationarity_residual: float
    detailed_balance_residual: float
    eigenvalues: np.ndarray | None = None


def spectral_gap(p: TransitionMatrix, keep_spectrum: bool = False) -> GapResult:
    """Gap of a reversible chain via its symmetrized form.

    Reversibility is required (and checked): conjugating by sqrt(pi) then
    turns P into the symmetric S with S_xy = sqrt(P_xy P_yx), whose real
    spectrum equals that of P. The unit eigenvalue must sit within 1e-8 of 1;
    the gap is one minus the largest remaining magnitude.
    """
    db = detailed_balance_residual(p)
    if db > REVERSIBILITY_TOL:
        raise ValueError(
            f"detailed-balance residual {db:.3e} exceeds {REVERSIBILITY_TOL:.0e}; "
            "the symmetric eigensolver route needs a reversible chain"
        )
    s = np.sqrt(p.matrix * p.matrix.T)
    eigenvalues = np.linalg.eigvalsh(s)
    unit_index = int(np.argmin(np.abs(eigenvalues - 1.0)))
    unit_error = abs(eigenvalues[unit_index] - 1.0)
    if unit_error > UNIT_EIGENVALUE_TOL:
        raise ValueError(
            f"no eigenvalue within {UNIT_EIGENVALUE_TOL:.0e} of 1 (closest off by {unit_error:.3e})"
        )
    others = np.abs(np.delete(eigenvalues, unit_index))
    lambda2 = float(others.max()) if len(others) else 0.0
    return GapResult(
        delta=1.0 - lambda2,
        lambda2=lambda2,
        stationarity_residual=stationarity_residual(p),
        detailed_balance_residual=db,
        eigenvalues=eigenvalues if keep_spectrum else None,
    )


def mixing_time_bounds(delta: float, pi_min: float, epsilon: float) -> tuple[float, float]:
    """Two-sided mixing-time estimate from the spectral gap.

    lower = (1/delta - 1) ln(1/(2 eps)), upper = (1/delta) ln(1/(eps pi_min)).
    """
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must be in (0, 1/2), got {epsilon}")
    if not 0 < pi_min <= 1:
        raise ValueError(f"pi_min must be in (0, 1], got {pi_min}")
    lower = (1.0 / delta - 1.0) * math.log(1.0 / (2.0 * epsilon))
    upper = (1.0 / delta) * math.log(1.0 / (epsilon * pi_min))
    return lower, upper

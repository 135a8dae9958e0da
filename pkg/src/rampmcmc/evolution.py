"""Driven evolution in the full state space and the proposal matrices it yields.

The instantaneous Hamiltonian is the classical energy on the diagonal plus a
uniform transverse coupling h, switched by the schedule amplitude gamma(t).
All times are dimensionless (hbar = 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import (
    DEFAULT_MAX_SITES,
    ClassicalHamiltonian,
    RampSchedule,
    energy_table,
    ramp_up_value,
)

try:  # optional compiled kernel; the numpy path below is the reference
    import numba
except ImportError:  # pragma: no cover - exercised on minimal installs
    numba = None

DEFAULT_STEPS_PER_UNIT_TIME = 64

HERMITICITY_TOL = 1e-9
DEGENERACY_WARN_TOL = 1e-9


class DegenerateSpectrumWarning(UserWarning):
    """Hold-segment spectrum has (near-)degenerate levels.

    The dephased proposal is then convention-dependent within each degenerate
    block; the package fixes the convention to the eigenbasis returned by the
    solver. Symmetry-broken disordered instances are generically nondegenerate.
    """


def plateau_hamiltonian(
    hamiltonian: ClassicalHamiltonian,
    h: float,
    table: np.ndarray | None = None,
    max_sites: int = DEFAULT_MAX_SITES,
) -> np.ndarray:
    """Dense Hamiltonian at full drive: diag(energies) + h on single-bit flips."""
    if table is None:
        table = energy_table(hamiltonian, max_sites=max_sites)
    dim = len(table)
    n = hamiltonian.n_sites
    matrix = np.zeros((dim, dim), dtype=np.float64)
    idx = np.arange(dim)
    for b in range(n):
        matrix[idx, idx ^ (1 << b)] = h
    matrix[idx, idx] = table
    return matrix


@dataclass(frozen=True, eq=False)
class PlateauSpectrum:
    """Full spectrum of the hold-segment Hamiltonian.

    `states[:, n]` is the n-th eigenvector in the configuration basis,
    `energies` ascending.
    """

    energies: np.ndarray
    states: np.ndarray


def diagonalize_plateau(matrix: np.ndarray) -> PlateauSpectrum:
    """Diagonalize a (real-)symmetric drive Hamiltonian.

    Raises if the Hermiticity residual exceeds 1e-9. Warns when adjacent
    levels are closer than 1e-9, since the dephased proposal then depends on
    the returned basis.
    """
    residual = np.abs(matrix - matrix.conj().T).max()
    if residual > HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian: residual {residual:.3e}")
    energies, states = np.linalg.eigh(matrix)
    gaps = np.diff(energies)
    if len(gaps) and gaps.min() < DEGENERACY_WARN_TOL:
        warnings.warn(
            f"spectrum has levels closer than {DEGENERACY_WARN_TOL:.0e}; "
            "dephased proposals use the eigenbasis as returned",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    return PlateauSpectrum(energies=energies, states=states)


@dataclass(frozen=True, eq=False)
class RampPropagator:
    """Unitary for the ramp-up segment, plus the step count that produced it."""

    matrix: np.ndarray
    n_steps: int
    schedule: RampSchedule
    h: float


if numba is not None:

    @numba.njit(cache=True)
    def _rotate_bits_compiled(psi, n_sites, cos, msin):  # pragma: no cover - jitted
        dim, m = psi.shape
        for b in range(n_sites):
            stride = 1 << b
            for base in range(0, dim, 2 * stride):
                for offset in range(stride):
                    i = base + offset
                    j = i + stride
                    for c in range(m):
                        lo = psi[i, c]
                        hi = psi[j, c]
                        psi[i, c] = cos * lo + msin * hi
                        psi[j, c] = cos * hi + msin * lo


def _rotate_bits_numpy(psi: np.ndarray, n_sites: int, cos: float, msin: complex,
                       scratch: np.ndarray | None = None) -> None:
    m = psi.shape[1]
    if scratch is None:
        scratch = np.empty((psi.shape[0] // 2) * m, dtype=np.complex128)
    view = psi.reshape((2,) * n_sites + (m,))
    for b in range(n_sites):
        axis = n_sites - 1 - b
        sel0 = tuple(0 if a == axis else slice(None) for a in range(n_sites))
        sel1 = tuple(1 if a == axis else slice(None) for a in range(n_sites))
        lo = view[sel0]
        hi = view[sel1]
        tmp = scratch[: lo.size].reshape(lo.shape)
        np.multiply(lo, cos, out=tmp)
        tmp += msin * hi
        hi *= cos
        hi += msin * lo
        lo[...] = tmp


def _apply_transverse_rotation(
    psi: np.ndarray, n_sites: int, angle: float, scratch: np.ndarray | None = None
) -> None:
    """Apply exp(-i * angle * sum_b sigma_x(b)) in place to the state columns.

    `psi` has shape (2^N, m); the rotation factorizes into one amplitude mix
    per bit. The compiled kernel performs the same per-pair float operations
    as the numpy path, so the two produce identical bits.
    """
    cos = math.cos(angle)
    msin = -1j * math.sin(angle)
    if numba is not None and psi.flags.c_contiguous:
        _rotate_bits_compiled(psi, n_sites, cos, msin)
    else:
        _rotate_bits_numpy(psi, n_sites, cos, msin, scratch)


def _split_step_evolve(
    table: np.ndarray,
    n_sites: int,
    h: float,
    gamma_at: Callable[[float], float],
    duration: float,
    n_steps: int,
    psi: np.ndarray,
) -> np.ndarray:
    """Strang-split evolution of the state columns in `psi` over `duration`.

    Each step applies a half diagonal phase, the transverse rotation at the
    midpoint amplitude, and another half phase; adjacent half phases are
    merged. Every factor is unitary, so the product is unitary to rounding.
    """
    dt = duration / n_steps
    half_phase = np.exp(-0.5j * dt * table)
    full_phase = half_phase * half_phase
    scratch = np.empty((psi.shape[0] // 2) * psi.shape[1], dtype=np.complex128)
    psi *= half_phase[:, None]
    for step in range(n_steps):
        t_mid = (step + 0.5) * dt
        _apply_transverse_rotation(psi, n_sites, dt * h * gamma_at(t_mid), scratch)
        psi *= (half_phase if step == n_steps - 1 else full_phase)[:, None]
    return psi


def ramp_propagator(
    hamiltonian: ClassicalHamiltonian,
    h: float,
    schedule: RampSchedule,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
    table: np.ndarray | None = None,
    max_sites: int = DEFAULT_MAX_SITES,
) -> RampPropagator:
    """Unitary for the ramp-up segment of the schedule.

    Second-order split stepping: the diagonal part advances in exact phases,
    the transverse part in exact single-bit rotations, with the schedule
    amplitude sampled at step midpoints. alpha = 0 returns the identity.
    """
    if steps_per_unit_time < 1:
        raise ValueError(f"steps_per_unit_time must be >= 1, got {steps_per_unit_time}")
    if table is None:
        table = energy_table(hamiltonian, max_sites=max_sites)
    dim = len(table)
    alpha = schedule.alpha
    if alpha == 0:
        return RampPropagator(
            matrix=np.eye(dim, dtype=np.complex128), n_steps=0, schedule=schedule, h=h
        )
    n_steps = max(1, round(steps_per_unit_time * alpha))
    psi = np.eye(dim, dtype=np.complex128)
    _split_step_evolve(
        table,
        hamiltonian.n_sites,
        h,
        lambda t: ramp_up_value(schedule, t),
        alpha,
        n_steps,
        psi,
    )
    return RampPropagator(matrix=psi, n_steps=n_steps, schedule=schedule, h=h)


@dataclass(frozen=True, eq=False)
class ProposalMatrix:
    """Row-stochastic symmetric proposal Q(x|y) with its provenance."""

    matrix: np.ndarray
    kind: str  # "quench" | "finite-kappa" | "time-averaged"
    parameter: float | None = None

    @property
    def n_states(self) -> int:
        return len(self.matrix)


def symmetry_residual(q: np.ndarray) -> float:
    return float(np.abs(q - q.T).max())


def row_sum_residual(q: np.ndarray) -> float:
    return float(np.abs(q.sum(axis=1) - 1.0).max())


def unitarity_residual(u: np.ndarray) -> float:
    return float(np.abs(u.conj().T @ u - np.eye(len(u))).max())


def _overlap_weights(propagator: RampPropagator, spectrum: PlateauSpectrum) -> np.ndarray:
    """M[n, x] = |<n| U1 |x>|^2; columns sum to 1 by unitarity."""
    if propagator.matrix.shape != spectrum.states.shape:
        raise ValueError(
            f"propagator dimension {propagator.matrix.shape} does not match "
            f"spectrum dimension {spectrum.states.shape}"
        )
    amplitudes = spectrum.states.T @ propagator.matrix
    return np.abs(amplitudes) ** 2


def proposal_time_averaged(
    propagator: RampPropagator, spectrum: PlateauSpectrum
) -> ProposalMatrix:
    """Dephased long-hold proposal Q(x|y) = sum_n |<n|U1|x>|^2 |<n|U1|y>|^2.

    Symmetric by construction; rows sum to one by completeness of the
    eigenbasis.
    """
    weights = _overlap_weights(propagator, spectrum)
    return ProposalMatrix(matrix=weights.T @ weights, kind="time-averaged")


def proposal_finite_kappa(
    propagator: RampPropagator, spectrum: PlateauSpectrum, kappa: float
) -> ProposalMatrix:
    """Proposal for a finite hold of duration kappa.

    The ramp-down unitary is the transpose of the ramp-up one: the
    instantaneous Hamiltonians are real-symmetric and traversed in reverse
    order, so the full protocol is U1^T exp(-i E kappa) U1 in the eigenbasis.
    That form is symmetric, hence so is Q.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    w = spectrum.states.T @ propagator.matrix
    full = w.T @ (np.exp(-1j * spectrum.energies * kappa)[:, None] * w)
    return ProposalMatrix(matrix=np.abs(full) ** 2, kind="finite-kappa", parameter=float(kappa))


def proposal_quench(
    hamiltonian: ClassicalHamiltonian,
    h: float,
    t: float,
    spectrum: PlateauSpectrum | None = None,
    table: np.ndarray | None = None,
) -> ProposalMatrix:
    """Proposal from evolving under the full-drive Hamiltonian for a time t."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if spectrum is None:
        spectrum = diagonalize_plateau(plateau_hamiltonian(hamiltonian, h, table=table))
    v = spectrum.states
    u = (v * np.exp(-1j * spectrum.energies * t)) @ v.T
    return ProposalMatrix(matrix=np.abs(u) ** 2, kind="quench", parameter=float(t))

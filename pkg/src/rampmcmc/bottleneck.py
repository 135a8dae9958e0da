"""Bottleneck (conductance-style) upper bounds on the spectral gap."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .chain import TransitionMatrix
from .evolution import PlateauSpectrum, RampPropagator, _overlap_weights
from .models import LEVEL_TOL, BoltzmannTarget, ClassicalHamiltonian, energy_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SubsetSelector:
    """A set of configuration indices, materialized and sorted once."""

    indices: np.ndarray
    label: str = ""

    @classmethod
    def from_indices(cls, indices: Sequence[int], label: str = "") -> "SubsetSelector":
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        return cls(indices=idx, label=label)

    @classmethod
    def from_predicate(
        cls, n_states: int, predicate: Callable[[int], bool], label: str = ""
    ) -> "SubsetSelector":
        idx = np.fromiter((x for x in range(n_states) if predicate(x)), dtype=np.int64)
        return cls(indices=idx, label=label)

    def complement(self, n_states: int) -> np.ndarray:
        mask = np.ones(n_states, dtype=bool)
        mask[self.indices] = False
        return np.nonzero(mask)[0]

    def check_proper(self, n_states: int) -> None:
        if len(self.indices) == 0 or len(self.indices) >= n_states:
            raise ValueError(
                f"subset {self.label!r} must be nonempty and proper "
                f"(has {len(self.indices)} of {n_states} states)"
            )


def equilibrium_flow(p: TransitionMatrix, subset: SubsetSelector) -> float:
    """Stationary probability flow out of the subset: sum pi(x) P(x, y)."""
    n = p.target.n_states
    subset.check_proper(n)
    inside = subset.indices
    outside = subset.complement(n)
    pi = p.target.probabilities
    return float(pi[inside] @ p.matrix[np.ix_(inside, outside)].sum(axis=1))


def lambda_bound(p: TransitionMatrix, subset: SubsetSelector) -> float:
    """Flow bound E(B, B^c) / (pi(B) pi(B^c)), an upper bound on the gap.

    If the subset carries more than half the stationary mass the bound is
    evaluated on its complement, which leaves the value's meaning unchanged.
    """
    n = p.target.n_states
    subset.check_proper(n)
    pi = p.target.probabilities
    mass = float(pi[subset.indices].sum())
    if mass > 0.5:
        logger.info(
            "subset %r holds stationary mass %.3f > 1/2; bounding on its complement",
            subset.label,
            mass,
        )
        subset = SubsetSelector(indices=subset.complement(n), label=f"~{subset.label}")
        mass = 1.0 - mass
    flow = equilibrium_flow(p, subset)
    return flow / (mass * (1.0 - mass))


def group_energy_levels(table: np.ndarray, tol: float = LEVEL_TOL) -> list[np.ndarray]:
    """Partition configuration indices into ascending energy manifolds.

    Levels are merged when adjacent sorted energies differ by at most `tol`.
    """
    order = np.argsort(table, kind="stable")
    sorted_energies = table[order]
    boundaries = np.nonzero(np.diff(sorted_energies) > tol)[0] + 1
    return [np.sort(chunk) for chunk in np.split(order, boundaries)]


def energy_manifold(
    hamiltonian: ClassicalHamiltonian,
    k: int,
    table: np.ndarray | None = None,
    tol: float = LEVEL_TOL,
) -> SubsetSelector:
    """Selector for the k-th distinct classical energy level (ascending)."""
    if table is None:
        table = energy_table(hamiltonian)
    levels = group_energy_levels(table, tol=tol)
    if not 0 <= k < len(levels):
        raise ValueError(f"level {k} out of range; model has {len(levels)} distinct levels")
    return SubsetSelector(indices=levels[k], label=f"energy manifold {k}")


def ramped_lambda_from_overlaps(
    propagator: RampPropagator,
    spectrum: PlateauSpectrum,
    target: BoltzmannTarget,
    subset: SubsetSelector,
    complement: SubsetSelector | None = None,
) -> float:
    """Flow bound for the dephased proposal, straight from ramp overlaps.

    Evaluates sum_{n, x in B, y in B^c} pi(x) |<n|U1|x>|^2 |<n|U1|y>|^2
    normalized by pi(B) pi(B^c), without assembling the chain. This equals
    lambda_bound on the Metropolis chain of the dephased proposal exactly when
    every move from B into B^c runs downhill in energy (acceptance one), the
    regime the bound is meant for; otherwise it is a proposal-flow diagnostic
    rather than a gap bound.

    A `complement` restricted to part of B^c turns the numerator into the
    proposal flow from B into just that part.
    """
    n = target.n_states
    subset.check_proper(n)
    inside = subset.indices
    outside = complement.indices if complement is not None else subset.complement(n)
    weights = _overlap_weights(propagator, spectrum)
    pi = target.probabilities
    flow_in = weights[:, inside] @ pi[inside]
    flow_out = weights[:, outside].sum(axis=1)
    mass = float(pi[inside].sum())
    return float(flow_in @ flow_out) / (mass * (1.0 - mass))

"""Classical spin models, Boltzmann targets, ramp schedules, and disorder ensembles.

Configuration encoding used throughout the package: a classical state of N
binary spins is an integer index in [0, 2^N), where bit b of the index holds
the spin of site b with bit value 0 meaning spin +1 and bit value 1 meaning
spin -1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

# Full-Hilbert-space code paths allocate vectors/matrices of size 2^N; the
# momentum-mode fast path in freefermion.py is exempt from this cap.
DEFAULT_MAX_SITES = 20

# Absolute tolerance used when grouping energies into degenerate manifolds.
LEVEL_TOL = 1e-9


def spins_from_index(index: int, n_sites: int) -> np.ndarray:
    """Decode a configuration index into a +/-1 spin vector (site b = bit b)."""
    bits = (index >> np.arange(n_sites)) & 1
    return (1 - 2 * bits).astype(np.int8)


def index_from_spins(spins: np.ndarray) -> int:
    """Encode a +/-1 spin vector back into its configuration index."""
    spins = np.asarray(spins)
    bits = (1 - spins) // 2
    return int(np.sum(bits.astype(np.int64) << np.arange(len(spins))))


@dataclass(frozen=True)
class SpinConfiguration:
    """A classical N-spin state, stored as an index into the 2^N state space."""

    index: int
    n_sites: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < 2**self.n_sites:
            raise ValueError(
                f"index {self.index} out of range for {self.n_sites} sites"
            )

    @property
    def spins(self) -> np.ndarray:
        return spins_from_index(self.index, self.n_sites)


def _pair_indices(n_sites: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n_sites), 2)), dtype=np.int64).reshape(-1, 2)


def _triple_indices(n_sites: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n_sites), 3)), dtype=np.int64).reshape(-1, 3)


@dataclass(frozen=True, eq=False)
class IsingChain:
    """Periodic chain with energy -sum_i s_i s_{i+1} (bond N -> 1 included)."""

    n_sites: int

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ValueError(f"need at least one site, got {self.n_sites}")


@dataclass(frozen=True, eq=False)
class SKInstance:
    """Fully connected pair couplings plus local fields.

    `couplings[m]` belongs to the m-th pair (i, j), i < j, in lexicographic
    order; `fields[i]` multiplies s_i.
    """

    n_sites: int
    couplings: np.ndarray
    fields: np.ndarray

    def __post_init__(self) -> None:
        n_pairs = self.n_sites * (self.n_sites - 1) // 2
        if len(self.couplings) != n_pairs:
            raise ValueError(
                f"expected {n_pairs} pair couplings for {self.n_sites} sites, "
                f"got {len(self.couplings)}"
            )
        if len(self.fields) != self.n_sites:
            raise ValueError(
                f"expected {self.n_sites} fields, got {len(self.fields)}"
            )

    @property
    def pairs(self) -> np.ndarray:
        return _pair_indices(self.n_sites)


@dataclass(frozen=True, eq=False)
class ThreeSpinInstance:
    """All-to-all three-spin couplings, lexicographic over triples i < j < k."""

    n_sites: int
    couplings: np.ndarray

    def __post_init__(self) -> None:
        n_triples = math.comb(self.n_sites, 3)
        if len(self.couplings) != n_triples:
            raise ValueError(
                f"expected {n_triples} triple couplings for {self.n_sites} sites, "
                f"got {len(self.couplings)}"
            )

    @property
    def triples(self) -> np.ndarray:
        return _triple_indices(self.n_sites)


ClassicalHamiltonian = Union[IsingChain, SKInstance, ThreeSpinInstance]


def energy(hamiltonian: ClassicalHamiltonian, x: SpinConfiguration) -> float:
    """Classical energy of configuration `x` under the given model."""
    if x.n_sites != hamiltonian.n_sites:
        raise ValueError(
            f"configuration has {x.n_sites} sites, model has {hamiltonian.n_sites}"
        )
    s = x.spins.astype(np.float64)
    if isinstance(hamiltonian, IsingChain):
        return float(-np.sum(s * np.roll(s, -1)))
    if isinstance(hamiltonian, SKInstance):
        i, j = hamiltonian.pairs.T
        return float(np.sum(hamiltonian.couplings * s[i] * s[j]) + np.sum(hamiltonian.fields * s))
    if isinstance(hamiltonian, ThreeSpinInstance):
        i, j, k = hamiltonian.triples.T
        return float(np.sum(hamiltonian.couplings * s[i] * s[j] * s[k]))
    raise TypeError(f"unknown Hamiltonian type {type(hamiltonian).__name__}")


def energy_table(
    hamiltonian: ClassicalHamiltonian, max_sites: int = DEFAULT_MAX_SITES
) -> np.ndarray:
    """Vector of classical energies for all 2^N configurations.

    Entry x equals energy(hamiltonian, x) for the shared bit encoding.
    """
    n = hamiltonian.n_sites
    if n > max_sites:
        raise ValueError(
            f"{n} sites exceeds the full-state-space cap of {max_sites}"
        )
    idx = np.arange(2**n, dtype=np.int64)
    # signs[:, i] = spin of site i as +/-1
    signs = 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)
    table = np.zeros(2**n, dtype=np.float64)
    if isinstance(hamiltonian, IsingChain):
        for i in range(n):
            table -= signs[:, i] * signs[:, (i + 1) % n]
        return table
    if isinstance(hamiltonian, SKInstance):
        for (i, j), coupling in zip(hamiltonian.pairs, hamiltonian.couplings):
            table += coupling * signs[:, i] * signs[:, j]
        table += signs @ hamiltonian.fields
        return table
    if isinstance(hamiltonian, ThreeSpinInstance):
        for (i, j, k), coupling in zip(hamiltonian.triples, hamiltonian.couplings):
            table += coupling * signs[:, i] * signs[:, j] * signs[:, k]
        return table
    raise TypeError(f"unknown Hamiltonian type {type(hamiltonian).__name__}")


@dataclass(frozen=True, eq=False)
class BoltzmannTarget:
    """Normalized stationary distribution pi(x) ~ exp(-beta * E(x))."""

    probabilities: np.ndarray
    log_probabilities: np.ndarray
    beta: float
    log_partition: float

    @property
    def n_states(self) -> int:
        return len(self.probabilities)

    @property
    def pi_min(self) -> float:
        return float(self.probabilities.min())


def boltzmann(
    hamiltonian: ClassicalHamiltonian,
    beta: float,
    table: np.ndarray | None = None,
) -> BoltzmannTarget:
    """Boltzmann target at inverse temperature beta.

    Stabilized by shifting energies to the ground level before exponentiating,
    so entries stay strictly positive in double precision. An already computed
    energy table may be passed to skip recomputation.
    """
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and nonnegative, got {beta}")
    if table is None:
        table = energy_table(hamiltonian)
    shifted = -beta * (table - table.min())
    weights = np.exp(shifted)
    total = weights.sum()
    log_probs = shifted - math.log(total)
    log_z = math.log(total) - beta * table.min()
    return BoltzmannTarget(
        probabilities=weights / total,
        log_probabilities=log_probs,
        beta=float(beta),
        log_partition=log_z,
    )


RAMP_KINDS = ("sin2", "linear", "quench")


@dataclass(frozen=True)
class RampSchedule:
    """Three-stage drive profile: ramp up over alpha, hold, mirror ramp down.

    `kappa = math.inf` marks the dephased long-hold limit, in which only the
    ramp-up segment is ever evaluated.
    """

    kind: str
    alpha: float
    kappa: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in RAMP_KINDS:
            raise ValueError(f"kind must be one of {RAMP_KINDS}, got {self.kind!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if self.kind == "quench" and self.alpha != 0:
            raise ValueError("quench means alpha = 0 exactly")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")

    @classmethod
    def sin2(cls, alpha: float, kappa: float = math.inf) -> "RampSchedule":
        return cls("sin2", alpha, kappa)

    @classmethod
    def linear(cls, alpha: float, kappa: float = math.inf) -> "RampSchedule":
        return cls("linear", alpha, kappa)

    @classmethod
    def quench(cls, kappa: float = math.inf) -> "RampSchedule":
        return cls("quench", 0.0, kappa)

    @property
    def total_time(self) -> float:
        return 2 * self.alpha + self.kappa


def ramp_up_value(schedule: RampSchedule, t: float) -> float:
    """Drive amplitude on the ramp-up segment, t in [0, alpha]."""
    alpha = schedule.alpha
    if not 0 <= t <= alpha:
        raise ValueError(f"t={t} outside ramp-up segment [0, {alpha}]")
    if alpha == 0:
        return 1.0
    if schedule.kind == "linear":
        return t / alpha
    return math.sin(0.5 * math.pi * math.sin(0.5 * math.pi * t / alpha) ** 2) ** 2


def ramp_value(schedule: RampSchedule, t: float) -> float:
    """Drive amplitude gamma(t) over the full protocol window [0, 2*alpha + kappa].

    The ramp-down is evaluated by reflecting t about the protocol midpoint, so
    gamma(t) == gamma(2*alpha + kappa - t) holds exactly. For the infinite-kappa
    marker, t is interpreted within the ramp-up segment only.
    """
    alpha = schedule.alpha
    if math.isinf(schedule.kappa):
        return ramp_up_value(schedule, t)
    total = schedule.total_time
    if not 0 <= t <= total:
        raise ValueError(f"t={t} outside protocol window [0, {total}]")
    if t > alpha + schedule.kappa:
        t = total - t
    if t >= alpha:
        return 1.0
    return ramp_up_value(schedule, t)


def _instance_seed(master_seed: int, instance: int) -> int:
    """Stable 64-bit per-instance seed split off a master seed."""
    state = np.random.SeedSequence(master_seed, spawn_key=(instance,)).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def sample_sk(n_sites: int, seed: int) -> SKInstance:
    """Draw pair couplings ~ N(0, 1/N) and fields ~ U(-0.25, 0.25).

    The fields break the global spin-flip symmetry. Couplings are drawn
    before fields from a PCG64 stream, so (n_sites, seed) pins the instance
    bit for bit.
    """
    if n_sites < 2:
        raise ValueError(f"need at least 2 sites, got {n_sites}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_pairs = n_sites * (n_sites - 1) // 2
    couplings = rng.standard_normal(n_pairs) / math.sqrt(n_sites)
    fields = rng.uniform(-0.25, 0.25, n_sites)
    return SKInstance(n_sites=n_sites, couplings=couplings, fields=fields)


def sample_3spin(n_sites: int, seed: int) -> ThreeSpinInstance:
    """Draw triple couplings ~ N(0, 3/N^2), deterministic in (n_sites, seed)."""
    if n_sites < 3:
        raise ValueError(f"need at least 3 sites, got {n_sites}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_triples = math.comb(n_sites, 3)
    couplings = rng.standard_normal(n_triples) * math.sqrt(3.0) / n_sites
    return ThreeSpinInstance(n_sites=n_sites, couplings=couplings)


def instance_to_json(
    hamiltonian: ClassicalHamiltonian, seed: int | None = None
) -> dict:
    """JSON-ready record of an instance: couplings flattened with site lists."""
    record: dict = {"N": hamiltonian.n_sites}
    if seed is not None:
        record["seed"] = seed
    if isinstance(hamiltonian, IsingChain):
        record["model"] = "ising"
        return record
    if isinstance(hamiltonian, SKInstance):
        record["model"] = "sk"
        record["couplings"] = {
            "sites": hamiltonian.pairs.tolist(),
            "values": hamiltonian.couplings.tolist(),
        }
        record["fields"] = hamiltonian.fields.tolist()
        return record
    if isinstance(hamiltonian, ThreeSpinInstance):
        record["model"] = "3spin"
        record["couplings"] = {
            "sites": hamiltonian.triples.tolist(),
            "values": hamiltonian.couplings.tolist(),
        }
        return record
    raise TypeError(f"unknown Hamiltonian type {type(hamiltonian).__name__}")


def _ordered_coupling_values(record: dict, n_sites: int, arity: int) -> np.ndarray:
    """Coupling values rearranged into lexicographic site order."""
    sites = record["sites"]
    values = record["values"]
    if len(sites) != len(values):
        raise ValueError("couplings: 'sites' and 'values' lengths differ")
    expected = list(itertools.combinations(range(n_sites), arity))
    ordered = np.zeros(len(expected))
    index_of = {combo: m for m, combo in enumerate(expected)}
    seen = set()
    for combo, value in zip(sites, values):
        key = tuple(sorted(int(i) for i in combo))
        if key not in index_of:
            raise ValueError(f"coupling sites {combo} invalid for {n_sites} sites")
        if key in seen:
            raise ValueError(f"duplicate coupling for sites {combo}")
        seen.add(key)
        ordered[index_of[key]] = value
    if len(seen) != len(expected):
        raise ValueError(
            f"expected {len(expected)} couplings over {n_sites} sites, got {len(seen)}"
        )
    return ordered


def instance_from_json(record: dict) -> ClassicalHamiltonian:
    """Rebuild an instance from its JSON record."""
    model = record.get("model")
    n_sites = int(record["N"])
    if model == "ising":
        return IsingChain(n_sites)
    if model == "sk":
        couplings = _ordered_coupling_values(record["couplings"], n_sites, 2)
        fields = np.asarray(record["fields"], dtype=np.float64)
        return SKInstance(n_sites=n_sites, couplings=couplings, fields=fields)
    if model == "3spin":
        couplings = _ordered_coupling_values(record["couplings"], n_sites, 3)
        return ThreeSpinInstance(n_sites=n_sites, couplings=couplings)
    raise ValueError(f"unknown model tag {model!r}")


DISORDER_MODELS = ("sk", "3spin")


@dataclass(frozen=True)
class DisorderSpec:
    """Reproducible ensemble of disordered instances.

    Instance i is generated from a seed split deterministically off the master
    seed, so the same (model, n_sites, seed) regenerates identical couplings.
    """

    model: str
    n_sites: int
    seed: int
    n_instances: int

    def __post_init__(self) -> None:
        if self.model not in DISORDER_MODELS:
            raise ValueError(f"model must be one of {DISORDER_MODELS}, got {self.model!r}")
        if self.n_instances < 1:
            raise ValueError(f"need at least one instance, got {self.n_instances}")

    def instance_seed(self, instance: int) -> int:
        return _instance_seed(self.seed, instance)

    def instance(self, instance: int) -> ClassicalHamiltonian:
        seed = self.instance_seed(instance)
        if self.model == "sk":
            return sample_sk(self.n_sites, seed)
        return sample_3spin(self.n_sites, seed)

    def instances(self) -> Iterator[ClassicalHamiltonian]:
        for i in range(self.n_instances):
            yield self.instance(i)

"""Disorder averages, hold-duration scans, peak finding, and scaling fits."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chain import metropolis_transition, spectral_gap
from .evolution import (
    DEFAULT_STEPS_PER_UNIT_TIME,
    diagonalize_plateau,
    plateau_hamiltonian,
    proposal_finite_kappa,
    proposal_time_averaged,
    ramp_propagator,
)
from .models import (
    BoltzmannTarget,
    ClassicalHamiltonian,
    DisorderSpec,
    RampSchedule,
    boltzmann,
    energy_table,
)

logger = logging.getLogger(__name__)

WORKERS_ENV_VAR = "RAMPMCMC_WORKERS"

DEFAULT_KAPPA_GRID_SIZE = 64
DEFAULT_KAPPA_INTERVAL = (1e2, 1e5)


def default_workers() -> int:
    """Worker count from the environment, defaulting to serial execution."""
    value = os.environ.get(WORKERS_ENV_VAR, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _gap_for_proposal(proposal, target: BoltzmannTarget) -> float:
    return spectral_gap(metropolis_transition(proposal, target)).delta


def instance_gap_results(
    hamiltonian: ClassicalHamiltonian,
    beta: float,
    h: float,
    alphas: "np.ndarray | list[float]",
    schedule_kind: str = "sin2",
    kappa: float = math.inf,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
) -> list:
    """Full gap diagnostics of one instance across a grid of ramp durations.

    kappa = inf selects the dephased long-hold proposal; a finite kappa uses
    the explicit three-stage protocol. The hold-segment spectrum is
    diagonalized once and reused across the grid.
    """
    table = energy_table(hamiltonian)
    target = boltzmann(hamiltonian, beta, table=table)
    spectrum = diagonalize_plateau(plateau_hamiltonian(hamiltonian, h, table=table))
    results = []
    for alpha in alphas:
        schedule = RampSchedule(schedule_kind, float(alpha), kappa)
        propagator = ramp_propagator(
            hamiltonian, h, schedule, steps_per_unit_time, table=table
        )
        if math.isinf(kappa):
            proposal = proposal_time_averaged(propagator, spectrum)
        else:
            proposal = proposal_finite_kappa(propagator, spectrum, kappa)
        results.append(spectral_gap(metropolis_transition(proposal, target)))
    return results


def instance_gaps(
    hamiltonian: ClassicalHamiltonian,
    beta: float,
    h: float,
    alphas: "np.ndarray | list[float]",
    schedule_kind: str = "sin2",
    kappa: float = math.inf,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
) -> np.ndarray:
    """Spectral gap of one instance across a grid of ramp durations."""
    results = instance_gap_results(
        hamiltonian, beta, h, alphas,
        schedule_kind=schedule_kind, kappa=kappa,
        steps_per_unit_time=steps_per_unit_time,
    )
    return np.array([result.delta for result in results])


def _instance_work_unit(args: tuple) -> tuple[int, np.ndarray | None, str]:
    """Gap curve for one disorder instance; exceptions become a failure record."""
    index, spec, beta, h, alphas, schedule_kind, kappa, steps = args
    try:
        hamiltonian = spec.instance(index)
        gaps = instance_gaps(
            hamiltonian, beta, h, alphas,
            schedule_kind=schedule_kind, kappa=kappa, steps_per_unit_time=steps,
        )
        return index, gaps, ""
    except Exception as exc:  # noqa: BLE001 - failed instances are excluded, not fatal
        return index, None, f"{type(exc).__name__}: {exc}"


@dataclass(frozen=True, eq=False)
class GapCurve:
    """Disorder-averaged gap against ramp duration, with per-instance records."""

    model: str
    n_sites: int
    beta: float
    h: float
    schedule_kind: str
    kappa: float
    alphas: np.ndarray
    mean_gaps: np.ndarray
    std_errs: np.ndarray
    counts: np.ndarray
    instance_seeds: np.ndarray
    instance_gaps: np.ndarray  # (instances, alphas); NaN rows mark failures


def aggregate_instance_gaps(per_instance: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean, standard error, and effective count per grid point."""
    counts = np.sum(~np.isnan(per_instance), axis=0)
    with np.errstate(invalid="ignore"):
        means = np.nanmean(per_instance, axis=0)
        spreads = np.nanstd(per_instance, axis=0, ddof=1)
    errs = np.where(counts > 1, spreads / np.sqrt(np.maximum(counts, 1)), 0.0)
    return means, errs, counts


def disorder_scan(
    spec: DisorderSpec,
    beta: float,
    h: float,
    alphas: "np.ndarray | list[float]",
    schedule_kind: str = "sin2",
    kappa: float = math.inf,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
    n_workers: int | None = None,
) -> GapCurve:
    """Average the instance gap curves of a disorder ensemble.

    Instances are independent work units and may run in a process pool;
    results are merged by instance index, so the curve does not depend on
    scheduling. An instance whose pipeline raises is excluded with a logged
    record, and the per-point counts reflect that.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    if len(alphas) == 0:
        raise ValueError("alpha grid must be nonempty")
    if np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha grid must be strictly increasing")
    if n_workers is None:
        n_workers = default_workers()
    units = [
        (i, spec, beta, h, alphas, schedule_kind, kappa, steps_per_unit_time)
        for i in range(spec.n_instances)
    ]
    if n_workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_instance_work_unit, units))
    else:
        results = [_instance_work_unit(unit) for unit in units]
    per_instance = np.full((spec.n_instances, len(alphas)), np.nan)
    for index, gaps, message in sorted(results):
        if gaps is None:
            logger.warning(
                "instance %d (seed %d) excluded: %s",
                index, spec.instance_seed(index), message,
            )
        else:
            per_instance[index] = gaps
    means, errs, counts = aggregate_instance_gaps(per_instance)
    return GapCurve(
        model=spec.model,
        n_sites=spec.n_sites,
        beta=beta,
        h=h,
        schedule_kind=schedule_kind,
        kappa=kappa,
        alphas=alphas,
        mean_gaps=means,
        std_errs=errs,
        counts=counts,
        instance_seeds=np.array([spec.instance_seed(i) for i in range(spec.n_instances)]),
        instance_gaps=per_instance,
    )


def default_kappa_grid(
    size: int = DEFAULT_KAPPA_GRID_SIZE,
    interval: tuple[float, float] = DEFAULT_KAPPA_INTERVAL,
) -> np.ndarray:
    """Log-uniform hold durations on the standard averaging interval."""
    return np.logspace(math.log10(interval[0]), math.log10(interval[1]), size)


@dataclass(frozen=True, eq=False)
class KappaScan:
    """Gap against hold duration, its grid mean, and the dephased-limit gap."""

    kappas: np.ndarray
    gaps: np.ndarray
    mean_gap: float
    mean_std_err: float
    dephased_gap: float


def kappa_scan(
    hamiltonian: ClassicalHamiltonian,
    beta: float,
    h: float,
    alpha: float,
    kappas: np.ndarray | None = None,
    schedule_kind: str = "sin2",
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
) -> KappaScan:
    """Gap at each hold duration plus the grid mean and the dephased limit."""
    if kappas is None:
        kappas = default_kappa_grid()
    kappas = np.asarray(kappas, dtype=np.float64)
    if np.any(kappas <= 0):
        raise ValueError("hold durations must be positive")
    table = energy_table(hamiltonian)
    target = boltzmann(hamiltonian, beta, table=table)
    spectrum = diagonalize_plateau(plateau_hamiltonian(hamiltonian, h, table=table))
    schedule = RampSchedule(schedule_kind, float(alpha))
    propagator = ramp_propagator(hamiltonian, h, schedule, steps_per_unit_time, table=table)
    gaps = np.array([
        _gap_for_proposal(proposal_finite_kappa(propagator, spectrum, kappa), target)
        for kappa in kappas
    ])
    dephased = _gap_for_proposal(proposal_time_averaged(propagator, spectrum), target)
    return KappaScan(
        kappas=kappas,
        gaps=gaps,
        mean_gap=float(gaps.mean()),
        mean_std_err=float(gaps.std(ddof=1) / math.sqrt(len(gaps))) if len(gaps) > 1 else 0.0,
        dephased_gap=dephased,
    )


@dataclass(frozen=True)
class PeakResult:
    """Grid argmax of a gap curve; flags a peak sitting on the grid edge."""

    alpha: float
    delta: float
    at_boundary: bool


def find_peak(curve: GapCurve) -> PeakResult:
    """Largest mean gap on the grid, ties broken toward smaller ramp time."""
    if len(curve.alphas) == 0:
        raise ValueError("gap curve is empty")
    index = int(np.argmax(curve.mean_gaps))
    return PeakResult(
        alpha=float(curve.alphas[index]),
        delta=float(curve.mean_gaps[index]),
        at_boundary=index in (0, len(curve.alphas) - 1),
    )


FIT_KINDS = ("exponential", "power")


@dataclass(frozen=True)
class ScalingFit:
    """Weighted least-squares decay exponent with uncertainty and fit quality.

    exponent is the positive decay constant: gap ~ 2^(-exponent N) for the
    exponential kind, gap ~ N^(-exponent) for the power kind.
    """

    kind: str
    exponent: float
    exponent_err: float
    chi2_nu: float
    n_points: int


def fit_scaling(
    sizes: np.ndarray,
    gaps: np.ndarray,
    errors: np.ndarray,
    kind: str = "exponential",
) -> ScalingFit:
    """Fit the size scaling of positive gap data with known uncertainties.

    Linear weighted least squares on log2(gap) vs N (exponential) or
    log(gap) vs log(N) (power), with the log-domain sigma propagated from the
    given errors. The reported exponent is the negated slope.
    """
    if kind not in FIT_KINDS:
        raise ValueError(f"kind must be one of {FIT_KINDS}, got {kind!r}")
    sizes = np.asarray(sizes, dtype=np.float64)
    gaps = np.asarray(gaps, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if len(sizes) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(sizes)}")
    if np.any(gaps <= 0) or np.any(errors <= 0):
        raise ValueError("gaps and errors must be positive")
    if np.unique(sizes).size < 2:
        raise ValueError("all sizes identical; the design matrix is degenerate")
    if kind == "exponential":
        x = sizes
        y = np.log2(gaps)
        sigma = errors / (gaps * math.log(2.0))
    else:
        x = np.log(sizes)
        y = np.log(gaps)
        sigma = errors / gaps
    weights = 1.0 / sigma**2
    design = np.column_stack([np.ones_like(x), x])
    normal = design.T @ (weights[:, None] * design)
    rhs = design.T @ (weights * y)
    covariance = np.linalg.inv(normal)
    coeffs = covariance @ rhs
    residual = y - design @ coeffs
    chi2 = float(np.sum(weights * residual**2))
    return ScalingFit(
        kind=kind,
        exponent=float(-coeffs[1]),
        exponent_err=float(math.sqrt(covariance[1, 1])),
        chi2_nu=chi2 / (len(sizes) - 2),
        n_points=len(sizes),
    )


def alpha_equals_n_scan(
    model: str,
    n_values: "np.ndarray | list[int]",
    beta: float,
    h: float,
    n_instances: int,
    seed: int,
    schedule_kind: str = "sin2",
    kappa: float = math.inf,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
    n_workers: int | None = None,
) -> ScalingFit:
    """Exponential fit of the mean gap evaluated at the single point alpha = N.

    A tuning-free ramp-time prescription: no per-size peak search, one gap per
    system size.
    """
    sizes, means, errs = [], [], []
    for n in n_values:
        spec = DisorderSpec(model=model, n_sites=int(n), seed=seed, n_instances=n_instances)
        curve = disorder_scan(
            spec, beta, h, [float(n)],
            schedule_kind=schedule_kind, kappa=kappa,
            steps_per_unit_time=steps_per_unit_time, n_workers=n_workers,
        )
        sizes.append(n)
        means.append(curve.mean_gaps[0])
        errs.append(curve.std_errs[0])
    return fit_scaling(np.array(sizes), np.array(means), np.array(errs), kind="exponential")

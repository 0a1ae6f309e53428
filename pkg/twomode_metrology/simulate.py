# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2026 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""This module contains the Monte Carlo phase-estimation experiments."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Hashable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from aea.helpers.logging import setup_logger
from scipy.optimize import minimize_scalar

from twomode_metrology.exceptions import (
    ConfigurationError,
    EmptySampleError,
    InvalidParametersError,
    UnknownSectorError,
)
from twomode_metrology.fockspace import State, has_number_coherences, make_named_state
from twomode_metrology.measurement import (
    DistributionLikelihood,
    OutcomeDistribution,
    PhaseLikelihood,
    Povm,
    load_povm,
)
from twomode_metrology.models import get_params
from twomode_metrology.spinops import Direction


FLAT_TOLERANCE = 1e-12
MAX_SEED = 2**64
CHUNKS_PER_WORKER = 4

_logger = setup_logger("twomode_metrology.simulate")

Signature = Tuple[Tuple[int, int], ...]


class SamplingMode(Enum):
    """How the source particle number is drawn."""

    PER_SHOT = "per_shot"
    PER_TRIAL = "per_trial"


class EstimatorKind(Enum):
    """Phase estimators available to the experiments."""

    ML_GRID = "ml_grid"
    BIASED_DEMO = "biased_demo"


@dataclass(frozen=True)
class EstimatorSpec:
    """
    Estimator settings.

    `domain` is the interval on which the likelihood is identifiable; `p` is the
    weight of the NOON sector used by the biased demonstration estimator.
    """

    kind: EstimatorKind = EstimatorKind.ML_GRID
    domain: Tuple[float, float] = (0.0, math.pi)
    resolution: Optional[int] = None
    refine_tolerance: Optional[float] = None
    p: float = 1.0

    def __post_init__(self) -> None:
        """Check the settings."""
        low, high = self.domain
        enforce(low < high, f"empty estimation domain {self.domain}", InvalidParametersError)
        enforce(
            self.resolution is None or self.resolution >= 3,
            "grid resolution must be at least 3",
            InvalidParametersError,
        )
        enforce(0.0 < self.p <= 1.0, f"p must lie in (0, 1], got {self.p}", InvalidParametersError)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """One Monte Carlo experiment: `trials` repetitions of m shots at a true phase."""

    state: State
    direction: Direction
    theta: float
    povm: Povm
    m: int
    trials: int
    seed: int
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    phi0: float = 0.0
    sampling: SamplingMode = SamplingMode.PER_SHOT
    theta_grid: Optional[Tuple[float, float]] = None
    estimate_bias_derivative: bool = True

    def __post_init__(self) -> None:
        """Check the configuration."""
        enforce(self.m >= 1, f"m must be at least 1, got {self.m}", InvalidParametersError)
        enforce(self.trials >= 1, f"trials must be at least 1, got {self.trials}", InvalidParametersError)
        enforce(
            0 <= self.seed < MAX_SEED,
            "the seed must be a nonnegative 64-bit integer",
            InvalidParametersError,
        )
        if self.theta_grid is not None:
            low, high = self.theta_grid
            enforce(low < high, "theta_grid must be increasing", InvalidParametersError)


@dataclass(frozen=True)
class MlEstimate:
    """A maximum-likelihood estimate; `flat` marks an uninformative likelihood."""

    value: float
    flat: bool = False

    def __float__(self) -> float:
        """Return the value."""
        return self.value


def trial_rng(seed: int, trial: int, point: int = 0) -> np.random.Generator:
    """Return the random stream of one trial, independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(point, trial)))


def _normalized(probabilities: np.ndarray) -> np.ndarray:
    probabilities = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    return probabilities / probabilities.sum()


def sample_outcomes(
    distribution: OutcomeDistribution, m: int, rng: np.random.Generator
) -> List[Hashable]:
    """Draw m independent outcomes from a distribution."""
    enforce(m >= 0, "cannot draw a negative number of outcomes", InvalidParametersError)
    labels = distribution.labels
    drawn = rng.choice(len(labels), size=m, p=_normalized(distribution.probabilities))
    return [labels[int(k)] for k in drawn]


class LikelihoodTable:
    """Log-likelihoods of every outcome on a phase grid, refined by bounded search."""

    def __init__(
        self,
        probabilities: Callable[[np.ndarray], np.ndarray],
        domain: Tuple[float, float],
        resolution: Optional[int] = None,
        refine_tolerance: Optional[float] = None,
    ) -> None:
        """Tabulate log P(eps|theta) on an evenly spaced grid over the domain."""
        params = get_params()
        self._probabilities = probabilities
        self.domain = domain
        self.refine_tolerance = refine_tolerance or params.ml_refine_tolerance
        self.grid = np.linspace(domain[0], domain[1], resolution or params.ml_grid_resolution)
        with np.errstate(divide="ignore"):
            self.log_probabilities = np.log(np.clip(probabilities(self.grid), 0.0, None))

    def _negative_log_likelihood(self, theta: float, counts: np.ndarray, observed: np.ndarray) -> float:
        probabilities = self._probabilities(np.array([theta]))[0][observed]
        if np.any(probabilities <= 0.0):
            return math.inf
        return -float(np.dot(counts[observed], np.log(probabilities)))

    def estimate(self, counts: np.ndarray) -> MlEstimate:
        """
        Return the maximum-likelihood phase for outcome counts.

        The first grid maximum is refined on its neighbouring grid interval; ties go to
        the smallest phase.

        :param counts: occurrences of every outcome, in label order.
        :return: the estimate.
        """
        counts = np.asarray(counts, dtype=float)
        enforce(counts.sum() > 0, "the maximum-likelihood estimate needs outcomes", EmptySampleError)
        observed = counts > 0
        log_likelihood = self.log_probabilities[:, observed] @ counts[observed]
        finite = np.isfinite(log_likelihood)
        if not finite.any() or (
            finite.all()
            and np.ptp(log_likelihood) <= FLAT_TOLERANCE * max(1.0, float(np.max(np.abs(log_likelihood))))
        ):
            return MlEstimate(float(np.mean(self.domain)), flat=True)
        best = int(np.argmax(log_likelihood))
        low = self.grid[max(best - 1, 0)]
        high = self.grid[min(best + 1, self.grid.size - 1)]
        result = minimize_scalar(
            self._negative_log_likelihood,
            bounds=(low, high),
            args=(counts, observed),
            method="bounded",
            options={"xatol": self.refine_tolerance},
        )
        if math.isfinite(result.fun) and result.fun < -log_likelihood[best]:
            return MlEstimate(float(result.x))
        return MlEstimate(float(self.grid[best]))


def ml_estimate(
    outcomes: Sequence[Hashable],
    labels: Sequence[Hashable],
    probabilities: Callable[[np.ndarray], np.ndarray],
    domain: Tuple[float, float],
    resolution: Optional[int] = None,
) -> MlEstimate:
    """
    Return argmax_theta sum log P(eps_i|theta) over the domain.

    :param outcomes: the observed outcome labels.
    :param labels: the labels of the likelihood model, in column order.
    :param probabilities: the model, mapping phases to an array (phases, outcomes).
    :param domain: the identifiable phase interval.
    :param resolution: the grid size, from the configuration when omitted.
    :return: the estimate.
    """
    enforce(len(outcomes) > 0, "the maximum-likelihood estimate needs outcomes", EmptySampleError)
    position = {label: k for k, label in enumerate(labels)}
    counts = np.zeros(len(labels))
    for outcome in outcomes:
        enforce(outcome in position, f"unknown outcome {outcome!r}", InvalidParametersError)
        counts[position[outcome]] += 1
    estimate = LikelihoodTable(probabilities, domain, resolution).estimate(counts)
    if estimate.flat:
        _logger.warning("flat likelihood: returning the midpoint of the domain")
    return estimate


def biased_demo_estimator(
    total: int, counts: np.ndarray, p: float, tables: Mapping[int, LikelihoodTable]
) -> float:
    """Return 0 for the empty sector and the sector estimate divided by p otherwise."""
    if total == 0:
        return 0.0
    enforce(total in tables, f"no estimator for sector N={total}", UnknownSectorError)
    return tables[total].estimate(counts).value / p


@dataclass(frozen=True)
class SectorStats:
    """Estimates of the trials sharing one sector signature."""

    count: int
    mean: float
    variance: float


@dataclass(frozen=True, eq=False)
class EstimateStats:  # pylint: disable=too-many-instance-attributes
    """Statistics of the estimates over all trials (population variances)."""

    theta: float
    m: int
    trials: int
    mean_estimate: float
    bias: float
    variance: float
    bias_derivative: Optional[float]
    per_sector: Optional[Dict[Signature, SectorStats]]
    estimates: np.ndarray
    flat_trials: int = 0

    @property
    def standard_error(self) -> float:
        """Monte Carlo standard error of the mean estimate."""
        return math.sqrt(self.variance / self.trials)


class VarianceDecomposition(NamedTuple):
    """Between-sector and within-sector parts of the estimator variance."""

    between: float
    within: float


def variance_decomposition(stats: EstimateStats) -> VarianceDecomposition:
    """Split the variance as sum Q_s (mean_s - mean)^2 + sum Q_s var_s over sector signatures."""
    enforce(
        stats.per_sector is not None,
        "the experiment did not record sector signatures",
        InvalidParametersError,
    )
    between = within = 0.0
    for sector in stats.per_sector.values():
        weight = sector.count / stats.trials
        between += weight * (sector.mean - stats.mean_estimate) ** 2
        within += weight * sector.variance
    return VarianceDecomposition(between, within)


class _Experiment:
    """Likelihood tables and samplers shared by every trial of a configuration."""

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.decomposable = config.povm.diagonal_flag or not has_number_coherences(config.state)
        estimator = config.estimator
        if self.decomposable:
            self.model: Any = PhaseLikelihood(config.state, config.direction, config.povm)
            self.sectors = np.array(self.model.sectors)
            self.weights = _normalized([self.model.weights[n] for n in self.model.sectors])
        else:
            self.model = DistributionLikelihood(
                config.state, config.direction, config.povm, config.phi0
            )
            enforce(
                config.sampling is SamplingMode.PER_SHOT
                and estimator.kind is EstimatorKind.ML_GRID,
                "states and POVMs that both carry number coherences support only per-shot ML",
                ConfigurationError,
            )
        self.tables: Dict[int, LikelihoodTable] = {}
        if estimator.kind is EstimatorKind.BIASED_DEMO or config.sampling is SamplingMode.PER_TRIAL:
            for total in self.model.sectors:
                if estimator.kind is EstimatorKind.BIASED_DEMO and total == 0:
                    continue
                self.tables[total] = LikelihoodTable(
                    lambda thetas, n=total: self.model.sector_probabilities(n, thetas),
                    estimator.domain,
                    estimator.resolution,
                    estimator.refine_tolerance,
                )
            self.mixture_table = None
        else:
            self.mixture_table = LikelihoodTable(
                self.model.probabilities,
                estimator.domain,
                estimator.resolution,
                estimator.refine_tolerance,
            )

    def conditionals(self, theta: float) -> Dict[int, np.ndarray]:
        """P(eps|N, theta) of every sector, or the full distribution under key -1."""
        if not self.decomposable:
            return {-1: _normalized(self.model.probabilities(theta)[0])}
        return {
            int(total): _normalized(self.model.sector_probabilities(int(total), theta)[0])
            for total in self.sectors
        }

    def trial(
        self, point: int, trial: int, conditionals: Mapping[int, np.ndarray]
    ) -> Tuple[float, Optional[Signature], bool]:
        config = self.config
        rng = trial_rng(config.seed, trial, point)
        if not self.decomposable:
            counts = rng.multinomial(config.m, conditionals[-1])
            estimate = self.mixture_table.estimate(counts)
            return estimate.value, None, estimate.flat
        if config.sampling is SamplingMode.PER_TRIAL:
            total = int(rng.choice(self.sectors, p=self.weights))
            counts = rng.multinomial(config.m, conditionals[total])
            signature: Signature = ((total, config.m),)
            if config.estimator.kind is EstimatorKind.BIASED_DEMO:
                value = biased_demo_estimator(total, counts, config.estimator.p, self.tables)
                return value, signature, False
            estimate = self.tables[total].estimate(counts)
            return estimate.value, signature, estimate.flat
        sector_counts = rng.multinomial(config.m, self.weights)
        counts = np.zeros(len(self.model.labels), dtype=np.int64)
        for total, count in zip(self.sectors, sector_counts):
            if count:
                counts += rng.multinomial(int(count), conditionals[int(total)])
        signature = tuple(
            (int(total), int(count)) for total, count in zip(self.sectors, sector_counts) if count
        )
        if config.estimator.kind is EstimatorKind.BIASED_DEMO:
            enforce(
                len(signature) == 1,
                "the biased demonstration estimator needs a single sector per trial",
                ConfigurationError,
            )
            value = biased_demo_estimator(signature[0][0], counts, config.estimator.p, self.tables)
            return value, signature, False
        estimate = self.mixture_table.estimate(counts)
        return estimate.value, signature, estimate.flat


def _run_point(
    experiment: _Experiment, point: int, theta: float, workers: int
) -> Tuple[np.ndarray, List[Optional[Signature]], int]:
    """Run every trial at one true phase, merging chunks in trial order."""
    conditionals = experiment.conditionals(theta)
    trials = experiment.config.trials
    size = max(1, math.ceil(trials / (workers * CHUNKS_PER_WORKER)))
    chunks = [range(start, min(start + size, trials)) for start in range(0, trials, size)]

    def run_chunk(indices: range) -> List[Tuple[float, Optional[Signature], bool]]:
        return [experiment.trial(point, trial, conditionals) for trial in indices]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_chunk, chunk) for chunk in chunks]
        results = [row for future in futures for row in future.result()]
    estimates = np.array([row[0] for row in results])
    signatures = [row[1] for row in results]
    return estimates, signatures, sum(1 for row in results if row[2])


def _per_sector(
    estimates: np.ndarray, signatures: List[Optional[Signature]]
) -> Optional[Dict[Signature, SectorStats]]:
    if any(signature is None for signature in signatures):
        return None
    groups: Dict[Signature, List[float]] = {}
    for estimate, signature in zip(estimates, signatures):
        groups.setdefault(signature, []).append(float(estimate))
    return {
        signature: SectorStats(len(values), float(np.mean(values)), float(np.var(values)))
        for signature, values in sorted(groups.items())
    }


def _bias_grid(config: ExperimentConfig, sigma: float) -> Optional[Tuple[float, float]]:
    """Phases theta +- delta, delta = 5 sigma kept 3 sigma inside the domain."""
    if config.theta_grid is not None:
        return config.theta_grid
    low, high = config.estimator.domain
    delta = min(5.0 * sigma, config.theta - low - 3.0 * sigma, high - 3.0 * sigma - config.theta)
    if sigma <= 0.0 or delta <= sigma:
        _logger.warning("no room for a bias derivative inside the estimation domain")
        return None
    return config.theta - delta, config.theta + delta


def run_trials(config: ExperimentConfig, workers: Optional[int] = None) -> EstimateStats:
    """
    Run the experiment and summarize the estimates.

    The bias derivative b is the central difference of the mean estimate at two
    phases around the true one, each run with its own random streams.

    :param config: the experiment.
    :param workers: number of worker threads, from the configuration when omitted.
    :return: the statistics.
    """
    workers = workers or get_params().workers
    _logger.info(
        f"running {config.trials} trials of m={config.m} at theta={config.theta} on {workers} workers"
    )
    experiment = _Experiment(config)
    estimates, signatures, flat = _run_point(experiment, 0, config.theta, workers)
    if flat:
        _logger.warning(f"{flat} trials had a flat likelihood")
    mean = float(np.mean(estimates))
    variance = float(np.var(estimates))
    bias_derivative = None
    if config.estimate_bias_derivative:
        grid = _bias_grid(config, math.sqrt(variance))
        if grid is not None:
            means = [
                float(np.mean(_run_point(experiment, point, theta, workers)[0]))
                for point, theta in enumerate(grid, start=1)
            ]
            bias_derivative = (means[1] - means[0]) / (grid[1] - grid[0])
    stats = EstimateStats(
        theta=config.theta,
        m=config.m,
        trials=config.trials,
        mean_estimate=mean,
        bias=mean - config.theta,
        variance=variance,
        bias_derivative=bias_derivative,
        per_sector=_per_sector(estimates, signatures),
        estimates=estimates,
        flat_trials=flat,
    )
    _logger.info(f"mean={stats.mean_estimate:.6g} variance={stats.variance:.6g}")
    return stats


def load_experiment(spec: Mapping[str, Any], seed: int) -> ExperimentConfig:
    """
    Build an experiment from its JSON description.

    The description reads {"state": {...}, "povm": {...}, "transform": {"axis": ...,
    "theta": ..., "phi0": ...}, "m": ..., "trials": ..., "sampling": "per_shot",
    "estimator": {"kind": "ml_grid", "domain": [lo, hi], "resolution": ..., "p": ...},
    "theta_grid": [lo, hi]}.

    :param spec: the description.
    :param seed: the random seed.
    :return: the configuration.
    """
    try:
        state = make_named_state(spec["state"])
        povm = load_povm(spec["povm"], state.cutoff)
        transform = spec["transform"]
        estimator = dict(spec.get("estimator", {}))
        kind = EstimatorKind(estimator.pop("kind", EstimatorKind.ML_GRID.value))
        if "domain" in estimator:
            estimator["domain"] = tuple(float(x) for x in estimator["domain"])
        theta_grid = spec.get("theta_grid")
        return ExperimentConfig(
            state=state,
            direction=Direction.parse(transform.get("axis", "z")),
            theta=float(transform["theta"]),
            povm=povm,
            m=int(spec["m"]),
            trials=int(spec["trials"]),
            seed=int(seed),
            estimator=EstimatorSpec(kind=kind, **estimator),
            phi0=float(transform.get("phi0", 0.0)),
            sampling=SamplingMode(spec.get("sampling", SamplingMode.PER_SHOT.value)),
            theta_grid=None if theta_grid is None else (float(theta_grid[0]), float(theta_grid[1])),
            estimate_bias_derivative=bool(spec.get("bias_derivative", True)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"invalid experiment description: {e}") from e

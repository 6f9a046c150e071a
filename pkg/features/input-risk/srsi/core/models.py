"""
Data models for sequential risk set inference.
"""

from dataclasses import dataclass, field, asdict
from typing import Optional, Dict, Any, List, Tuple
import math

import numpy as np

from .exceptions import ValidationError, InputModelError

SIMPLEX_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# Input model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservationSet:
    """Real-world observations of one input source, aggregated on distinct values."""
    source_index: int
    raw_observations: np.ndarray      # (m, dim)
    distinct_support: np.ndarray      # (u, dim)
    counts: np.ndarray                # (u,)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or len(counts) != len(self.distinct_support):
            raise InputModelError("counts must align with distinct_support", self.source_index)
        if np.any(counts <= 0):
            raise InputModelError("counts must be positive", self.source_index)
        if len(self.raw_observations) and int(counts.sum()) != len(self.raw_observations):
            raise InputModelError(
                f"counts sum to {int(counts.sum())} but {len(self.raw_observations)} observations given",
                self.source_index,
            )
        keys = {tuple(row) for row in np.atleast_2d(self.distinct_support).tolist()}
        if len(keys) != len(self.distinct_support):
            raise InputModelError("distinct_support has duplicate entries", self.source_index)

    @property
    def sample_size(self) -> int:
        return int(np.sum(self.counts))

    @property
    def support_size(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class DirichletPosterior:
    """Dirichlet posterior over the weights of one source's support."""
    concentrations: np.ndarray
    prior_kappa: np.ndarray

    def __post_init__(self):
        if len(self.concentrations) != len(self.prior_kappa):
            raise InputModelError("concentrations and prior_kappa differ in length")
        if np.any(np.asarray(self.concentrations) <= 0):
            raise InputModelError("every concentration must be positive")


@dataclass(frozen=True)
class ProbabilitySimplex:
    """Weight vector over the distinct support of one source."""
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or len(weights) == 0:
            raise ValidationError("weights must be a nonempty vector", "weights")
        if np.any(weights < 0):
            raise ValidationError("weights must be nonnegative", "weights")
        if abs(weights.sum() - 1.0) > SIMPLEX_TOLERANCE * max(1, len(weights)):
            raise ValidationError(f"weights sum to {weights.sum()!r}, not 1", "weights", weights.sum())

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class JointInputModel:
    """One joint input model: a simplex per input source."""
    per_source: Tuple[ProbabilitySimplex, ...]

    def __len__(self) -> int:
        return len(self.per_source)

    def __getitem__(self, index: int) -> ProbabilitySimplex:
        return self.per_source[index]


# ---------------------------------------------------------------------------
# Kernel / GP
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairIndex:
    """A (solution, joint input model) pair."""
    solution_index: int
    model_index: int

    def flat(self, n_models: int) -> int:
        return self.solution_index * n_models + self.model_index


@dataclass
class KernelParams:
    """Hyperparameters of the composite kernel."""
    tau_sq: float
    lambda_: np.ndarray
    vartheta: np.ndarray
    divergence_kind: str = "sq_hellinger"
    parametric_flags: Tuple[bool, ...] = ()

    def __post_init__(self):
        self.lambda_ = np.atleast_1d(np.asarray(self.lambda_, dtype=float))
        self.vartheta = np.atleast_1d(np.asarray(self.vartheta, dtype=float))
        if not self.parametric_flags:
            self.parametric_flags = tuple(False for _ in self.vartheta)
        if not (self.tau_sq > 0 and np.isfinite(self.tau_sq)):
            raise ValidationError("tau_sq must be positive", "tau_sq", self.tau_sq)
        if np.any(self.lambda_ <= 0):
            raise ValidationError("every lambda must be positive", "lambda", self.lambda_.tolist())
        if np.any(self.vartheta <= 0):
            raise ValidationError("every vartheta must be positive", "vartheta", self.vartheta.tolist())
        if len(self.parametric_flags) != len(self.vartheta):
            raise ValidationError("one parametric flag per source", "parametric_flags")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tau_sq': float(self.tau_sq),
            'lambda': self.lambda_.tolist(),
            'vartheta': self.vartheta.tolist(),
            'divergence_kind': self.divergence_kind,
            'parametric_flags': list(self.parametric_flags),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'KernelParams':
        return cls(
            tau_sq=float(data['tau_sq']),
            lambda_=np.asarray(data['lambda'], dtype=float),
            vartheta=np.asarray(data['vartheta'], dtype=float),
            divergence_kind=data.get('divergence_kind', 'sq_hellinger'),
            parametric_flags=tuple(data.get('parametric_flags', ())),
        )


@dataclass
class PairRecord:
    """Running statistics of the replications made at one pair."""
    mean: float
    variance: float
    count: int

    @classmethod
    def from_outputs(cls, outputs: np.ndarray) -> 'PairRecord':
        outputs = np.asarray(outputs, dtype=float)
        if len(outputs) < 2:
            raise ValidationError("at least two replications are needed", "replications", len(outputs))
        return cls(float(outputs.mean()), float(outputs.var(ddof=1)), len(outputs))

    def merge(self, other: 'PairRecord') -> 'PairRecord':
        """Combine two batches with the pairwise (Chan) update."""
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = (self.variance * (self.count - 1) + other.variance * (other.count - 1)
              + delta * delta * self.count * other.count / n)
        return PairRecord(mean, m2 / (n - 1), n)


@dataclass
class SimulationLog:
    """Simulated pairs with merged sample statistics."""
    records: Dict[Tuple[int, int], PairRecord] = field(default_factory=dict)
    iteration: int = 0

    @property
    def n_distinct(self) -> int:
        return len(self.records)

    @property
    def total_replications(self) -> int:
        return sum(record.count for record in self.records.values())

    def add_batch(self, pair: PairIndex, outputs: np.ndarray) -> PairRecord:
        """Merge a batch of outputs into the record for ``pair`` and return the batch statistics."""
        batch = PairRecord.from_outputs(outputs)
        key = (pair.solution_index, pair.model_index)
        existing = self.records.get(key)
        self.records[key] = batch if existing is None else existing.merge(batch)
        return batch

    def pairs(self) -> List[PairIndex]:
        return [PairIndex(x, b) for x, b in self.records]

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (pairs (n,2), means, variances, counts) in insertion order."""
        if not self.records:
            empty = np.zeros(0)
            return np.zeros((0, 2), dtype=int), empty, empty, np.zeros(0, dtype=int)
        keys = np.array(list(self.records.keys()), dtype=int)
        values = list(self.records.values())
        return (
            keys,
            np.array([v.mean for v in values]),
            np.array([v.variance for v in values]),
            np.array([v.count for v in values], dtype=int),
        )


@dataclass
class GpState:
    """Posterior mean and covariance over every (solution, model) pair."""
    mu: np.ndarray
    V: np.ndarray
    beta0: float
    params: KernelParams
    noise: np.ndarray
    n_solutions: int
    n_models: int

    def index(self, solution: int, model: int) -> int:
        return solution * self.n_models + model

    def mean_grid(self) -> np.ndarray:
        """Posterior means reshaped to (|X|, B)."""
        return self.mu.reshape(self.n_solutions, self.n_models)

    def variance_grid(self) -> np.ndarray:
        return np.diag(self.V).reshape(self.n_solutions, self.n_models)


# ---------------------------------------------------------------------------
# Risk set / acquisition
# ---------------------------------------------------------------------------

@dataclass
class RiskSetEstimate:
    """Classification of every solution relative to the candidate xhat."""
    included: np.ndarray
    prob_estimate: np.ndarray
    alpha: float
    delta: float
    xhat: int

    @property
    def members(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.included)]

    def __len__(self) -> int:
        return int(np.count_nonzero(self.included))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'alpha': float(self.alpha),
            'delta': float(self.delta),
            'xhat': int(self.xhat),
            'solutions': [
                {'solution': i, 'prob': float(p), 'included': bool(inc)}
                for i, (p, inc) in enumerate(zip(self.prob_estimate, self.included))
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RiskSetEstimate':
        rows = sorted(data['solutions'], key=lambda row: row['solution'])
        return cls(
            included=np.array([row['included'] for row in rows], dtype=bool),
            prob_estimate=np.array([row['prob'] for row in rows], dtype=float),
            alpha=float(data['alpha']),
            delta=float(data['delta']),
            xhat=int(data['xhat']),
        )


@dataclass
class AcquisitionDecision:
    """The pair(s) to simulate next and the criterion values behind the choice."""
    mode: str                 # 'single' or 'pairwise'
    solution: int
    model: int
    criterion_value: float
    xhat: int
    table: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ('single', 'pairwise'):
            raise ValidationError(f"Unknown mode: {self.mode}", "mode", self.mode)
        if self.mode == 'pairwise' and self.solution == self.xhat:
            raise ValidationError("pairwise sampling needs a solution other than xhat", "solution", self.solution)
        if not math.isfinite(self.criterion_value):
            raise ValidationError("criterion value must be finite", "criterion_value", self.criterion_value)

    @property
    def pairs(self) -> List[PairIndex]:
        if self.mode == 'pairwise':
            return [PairIndex(self.xhat, self.model), PairIndex(self.solution, self.model)]
        return [PairIndex(self.solution, self.model)]


# ---------------------------------------------------------------------------
# Problems and runs
# ---------------------------------------------------------------------------

@dataclass
class Mm1kConfig:
    """M/M/1/k capacity problem."""
    capacities: List[int] = field(default_factory=lambda: list(range(1, 51)))
    waiting_cost: float = 1.0
    revenue: float = 200.0
    customers: int = 2000
    arrival_mean: float = 1.0
    service_mean: float = 1.1
    resample_support: bool = False

    def __post_init__(self):
        if not self.capacities or min(self.capacities) < 1:
            raise ValidationError("capacities must be >= 1", "capacities", self.capacities)
        if self.waiting_cost <= 0 or self.revenue <= 0:
            raise ValidationError("waiting cost and revenue must be positive", "waiting_cost")
        if self.customers < 1:
            raise ValidationError("customers must be >= 1", "customers", self.customers)


@dataclass
class AmbulanceConfig:
    """Single dispatching-center ambulance problem on a square grid."""
    grid_side: int = 6
    ambulances: int = 8
    call_rate: float = 1.0              # calls per hour
    erlang_scale_minutes: float = 7.2
    warmup_hours: float = 1000.0
    window_hours: float = 50.0
    calls: int = 331
    frequency_map: Optional[str] = None

    def __post_init__(self):
        if self.grid_side < 1:
            raise ValidationError("grid side must be >= 1", "grid_side", self.grid_side)
        if self.ambulances < 1:
            raise ValidationError("ambulances must be >= 1", "ambulances", self.ambulances)
        if self.call_rate <= 0 or self.erlang_scale_minutes <= 0:
            raise ValidationError("rates and scales must be positive", "call_rate")

    @property
    def neighborhoods(self) -> int:
        return self.grid_side * self.grid_side


VARIANTS = ('srsi', 'srsi-m', 'srsi-v', 'nmc')


@dataclass
class RunConfig:
    """Settings of one procedure run."""
    B: int = 101
    n0: int = 100
    r: int = 30
    replications: List[int] = field(default_factory=lambda: [30])
    alpha: float = 0.2
    delta: float = 1.0
    xhat: Any = 'map-optimum'
    xhat_replications: int = 30
    budget: Optional[int] = 15000
    max_iterations: Optional[int] = None
    seed: int = 1
    variant: str = 'srsi'
    kappa: float = 1.0
    sample_size: int = 100

    def __post_init__(self):
        if self.B < 1:
            raise ValidationError("B must be >= 1", "B", self.B)
        if self.n0 < 2:
            raise ValidationError("n0 must be >= 2", "n0", self.n0)
        if self.r < 2:
            raise ValidationError("r must be >= 2", "r", self.r)
        if not self.replications or min(self.replications) < 2:
            raise ValidationError("every R_t must be >= 2", "replications", self.replications)
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)", "alpha", self.alpha)
        if self.delta < 0:
            raise ValidationError("delta must be >= 0", "delta", self.delta)
        if self.variant not in VARIANTS:
            raise ValidationError(f"Unknown variant: {self.variant}", "variant", self.variant)
        if self.budget is None and self.max_iterations is None:
            raise ValidationError("either budget or max_iterations is required", "budget")
        if self.kappa <= 0:
            raise ValidationError("kappa must be positive", "kappa", self.kappa)
        if not (self.xhat == 'map-optimum' or isinstance(self.xhat, int)):
            raise ValidationError("xhat must be 'map-optimum' or an index", "xhat", self.xhat)

    def replications_at(self, iteration: int) -> int:
        """R_t for a 1-based iteration; the last schedule entry repeats."""
        schedule = self.replications
        return int(schedule[min(iteration - 1, len(schedule) - 1)])

    def alpha_on_grid(self) -> bool:
        """True when alpha is an integer multiple of 1/B."""
        scaled = self.alpha * self.B
        return abs(scaled - round(scaled)) < 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TraceRecord:
    """One iteration of a sequential run."""
    iteration: int
    solution: int
    model: int
    mode: str
    criterion: float
    set_size: int
    replications: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunResult:
    """Result of one procedure run."""
    success: bool
    variant: str = 'srsi'
    seed: int = 0
    xhat: int = 0
    estimate: Optional[RiskSetEstimate] = None
    trace: List[TraceRecord] = field(default_factory=list)
    frequency: Optional[np.ndarray] = None
    replications_used: int = 0
    iterations: int = 0
    state: Optional[GpState] = None
    log: Optional[SimulationLog] = None
    models: List[JointInputModel] = field(default_factory=list)
    config: Optional[RunConfig] = None
    checkpoint_path: Optional[str] = None
    error: Optional[str] = None
    warnings: List[str] = field(default_factory=list)
    processing_time: float = 0.0

    def add_warning(self, warning: str):
        """Add a warning message."""
        self.warnings.append(warning)

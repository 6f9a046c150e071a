"""
Sequential risk set inference procedure and its baselines.
"""

import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from ..config.settings import ACQUISITION_CONFIG, GP_CONFIG
from ..core.exceptions import DegeneratePosteriorError, SimulationError, SrsiError, ValidationError
from ..core.interfaces import ProcedureInterface, SimulationProblemInterface
from ..core.models import (
    DirichletPosterior, JointInputModel, PairIndex, ProbabilitySimplex, RiskSetEstimate,
    RunConfig, RunResult, SimulationLog, TraceRecord,
)
from ..core.streams import stream
from ..gp.kernels import KernelContext, build_context
from ..gp.mle import fit_mle
from ..gp.surrogate import SurrogateModel
from ..inputs.dirichlet import build_posterior, map_joint, sample_joint
from ..writers.checkpoint_writer import save_checkpoint
from .acquisition_service import AcquisitionService
from .riskset_service import estimate_risk_set, refine_risk_set, risk_set_from_means

logger = logging.getLogger(__name__)


def _replicate(problem: SimulationProblemInterface, model: JointInputModel,
               seed: int, solution: int, model_index: int, replication: int) -> float:
    rng = stream(seed, 'replications', solution, model_index, replication)
    return float(problem.simulate(solution, model, rng))


def initial_design(n_solutions: int, n_models: int, n0: int, rng: np.random.Generator) -> List[PairIndex]:
    """
    Stratified-random design of n0 pairs.

    Every solution receives floor(n0 / |X|) pairs and the remainder goes to
    solutions drawn without replacement; models are drawn without
    replacement within each solution while possible.
    """
    per_solution = np.full(n_solutions, n0 // n_solutions)
    extra = rng.choice(n_solutions, size=n0 % n_solutions, replace=False)
    per_solution[extra] += 1
    design = []
    for x in range(n_solutions):
        count = int(per_solution[x])
        models = rng.choice(n_models, size=count, replace=count > n_models)
        design.extend(PairIndex(x, int(b)) for b in models)
    return design


def posterior_mean_joint(posteriors: Sequence[DirichletPosterior]) -> JointInputModel:
    return JointInputModel(tuple(
        ProbabilitySimplex(post.concentrations / post.concentrations.sum()) for post in posteriors
    ))


class SrsiProcedure(ProcedureInterface):
    """
    Runs SRSI, its model-selection ablations, and the equal-allocation baseline.

    Every random quantity comes from a stream keyed by the run seed, so two
    variants run with the same seed share their candidate models, initial
    design and hyperparameters, and any replication's output is the same
    whichever variant or worker asks for it.
    """

    def __init__(self, gp_config: Optional[Dict[str, Any]] = None,
                 acquisition_config: Optional[Dict[str, Any]] = None,
                 workers: int = 1, checkpoint_dir: Optional[Path] = None):
        """
        Initialize the procedure.

        Args:
            gp_config: GP settings merged over GP_CONFIG
            acquisition_config: Acquisition settings merged over ACQUISITION_CONFIG
            workers: Parallel workers for the replications of one decision
            checkpoint_dir: Where to save the posterior when a simulation fails
        """
        self.gp_config = dict(GP_CONFIG, **(gp_config or {}))
        self.acquisition_config = dict(ACQUISITION_CONFIG, **(acquisition_config or {}))
        self.workers = int(workers)
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None

    def run(self, config: RunConfig, problem: SimulationProblemInterface) -> RunResult:
        """Run the variant named by ``config.variant``."""
        if config.variant == 'nmc':
            return self.run_nmc(config, problem)
        if config.variant == 'srsi':
            return self.run_srsi(config, problem)
        return self.run_variant(config, problem)

    # ------------------------------------------------------------------
    # Shared setup
    # ------------------------------------------------------------------

    def posteriors(self, config: RunConfig, problem: SimulationProblemInterface) -> List[DirichletPosterior]:
        return [build_posterior(data, config.kappa) for data in problem.data]

    def candidate_models(self, config: RunConfig, problem: SimulationProblemInterface) -> List[JointInputModel]:
        """The B joint input models of a run."""
        return sample_joint(self.posteriors(config, problem), config.B, stream(config.seed, 'models'))

    def select_xhat(self, config: RunConfig, problem: SimulationProblemInterface) -> int:
        """
        Candidate solution of the run.

        With the 'map-optimum' rule every solution is simulated under the MAP
        joint model and the lowest sample mean wins; ties go to the lowest index.
        """
        if config.xhat != 'map-optimum':
            if not 0 <= config.xhat < problem.n_solutions:
                raise ValidationError("xhat index out of range", 'xhat', config.xhat)
            return int(config.xhat)

        posteriors = self.posteriors(config, problem)
        try:
            model = map_joint(posteriors)
        except DegeneratePosteriorError:
            logger.warning("MAP input model undefined; using the posterior mean model for xhat")
            model = posterior_mean_joint(posteriors)

        means = np.empty(problem.n_solutions)
        for x in range(problem.n_solutions):
            outputs = [problem.simulate(x, model, stream(config.seed, 'xhat', x, i))
                       for i in range(config.xhat_replications)]
            means[x] = np.mean(outputs)
        xhat = int(np.argmin(means))
        logger.info(f"MAP-conditional optimum: solution {xhat} (sample mean {means[xhat]:.4g})")
        return xhat

    def parametric_flags(self, problem: SimulationProblemInterface) -> List[bool]:
        return [i in self.gp_config['parametric_sources'] for i in range(len(problem.data))]

    def model_parameters(self, problem: SimulationProblemInterface, models: Sequence[JointInputModel],
                         flags: Sequence[bool]) -> Optional[List[Optional[np.ndarray]]]:
        """Stacked (B, p) parameter summaries for the flagged sources."""
        if not any(flags):
            return None
        summaries = [problem.parameters(model) for model in models]
        return [np.vstack([s[source] for s in summaries]) if flag else None
                for source, flag in enumerate(flags)]

    def kernel_context(self, problem: SimulationProblemInterface,
                       models: Sequence[JointInputModel]) -> KernelContext:
        flags = self.parametric_flags(problem)
        parameters = self.model_parameters(problem, models, flags)
        return build_context(problem.solutions, models, self.gp_config['divergence'], flags, parameters)

    def simulate_batch(self, problem: SimulationProblemInterface, models: Sequence[JointInputModel],
                       seed: int, pair: PairIndex, count: int, start: int = 0) -> np.ndarray:
        """``count`` replications at a pair, replication indices start..start+count-1."""
        x, b = pair.solution_index, pair.model_index
        indices = range(start, start + count)
        try:
            if self.workers > 1:
                outputs = Parallel(n_jobs=self.workers)(
                    delayed(_replicate)(problem, models[b], seed, x, b, i) for i in indices
                )
            else:
                outputs = [_replicate(problem, models[b], seed, x, b, i) for i in indices]
        except SimulationError as e:
            if e.pair is None:
                e.pair = (x, b)
            raise
        except Exception as e:
            raise SimulationError(f"Simulation failed at pair ({x}, {b}): {e}", problem.name, (x, b), original_error=e)
        return np.asarray(outputs, dtype=float)

    def _simulate_into(self, log: SimulationLog, problem: SimulationProblemInterface,
                       models: Sequence[JointInputModel], seed: int, pair: PairIndex, count: int) -> np.ndarray:
        """Next ``count`` replications at a pair, continuing its replication indices."""
        record = log.records.get((pair.solution_index, pair.model_index))
        start = record.count if record is not None else 0
        return self.simulate_batch(problem, models, seed, pair, count, start)

    def _save_failure(self, error: SimulationError, surrogate: Optional[SurrogateModel],
                      config: RunConfig, xhat: int):
        if self.checkpoint_dir is None or surrogate is None or surrogate.state is None:
            return
        path = self.checkpoint_dir / f"{config.variant}_seed{config.seed}_failed.srsi"
        save_checkpoint(path, surrogate.state, surrogate.log, xhat,
                        {'seed': config.seed, 'variant': config.variant,
                         'alpha': config.alpha, 'delta': config.delta,
                         'noise_floor': self.gp_config['noise_floor']})
        error.checkpoint_path = str(path)

    # ------------------------------------------------------------------
    # Sequential variants
    # ------------------------------------------------------------------

    def run_srsi(self, config: RunConfig, problem: SimulationProblemInterface) -> RunResult:
        """
        Sequential risk set inference.

        Args:
            config: Run settings
            problem: Simulation problem

        Returns:
            RunResult with the final estimate, trace, frequency histogram and posterior

        Raises:
            SimulationError: A replication failed; the posterior is checkpointed when possible
        """
        return self._run_sequential(config, problem, AcquisitionService('srsi', self.acquisition_config))

    def run_variant(self, config: RunConfig, problem: SimulationProblemInterface) -> RunResult:
        """The srsi-m and srsi-v ablations: same loop, different model selection scores."""
        if config.variant not in ('srsi-m', 'srsi-v'):
            raise ValidationError(f"run_variant needs srsi-m or srsi-v, got {config.variant}",
                                  'variant', config.variant)
        return self._run_sequential(config, problem, AcquisitionService(config.variant, self.acquisition_config))

    def _run_sequential(self, config: RunConfig, problem: SimulationProblemInterface,
                        acquisition: AcquisitionService) -> RunResult:
        start_time = time.time()
        design_cost = config.n0 * config.r
        if config.budget is not None and config.budget < design_cost:
            raise ValidationError(f"budget {config.budget} is below the initial design cost {design_cost}",
                                  'budget', config.budget)
        result = RunResult(success=False, variant=config.variant, seed=config.seed, config=config)
        if config.alpha_on_grid():
            message = (f"alpha * B = {config.alpha * config.B:g} is an integer; "
                       f"set membership may be unstable at the boundary")
            logger.warning(message)
            result.add_warning(message)

        logger.info(f"Starting {config.variant} (seed {config.seed}) on {problem.name}: "
                    f"|X|={problem.n_solutions}, B={config.B}, n0={config.n0}, r={config.r}")
        models = self.candidate_models(config, problem)
        xhat = self.select_xhat(config, problem)
        context = self.kernel_context(problem, models)

        design_log = SimulationLog()
        for pair in initial_design(problem.n_solutions, config.B, config.n0, stream(config.seed, 'design')):
            outputs = self._simulate_into(design_log, problem, models, config.seed, pair, config.r)
            design_log.add_batch(pair, outputs)
        beta0, params = fit_mle(design_log, context, stream(config.seed, 'mle'), self.gp_config)

        surrogate = SurrogateModel(context, params, beta0, design_log, self.gp_config)
        state = surrogate.refresh()
        used = design_cost
        iteration = 0
        refit_interval = int(self.gp_config['refit_interval'])
        log_every = max(int(self.acquisition_config['log_every']), 1)

        try:
            while ((config.budget is None or used < config.budget)
                   and (config.max_iterations is None or iteration < config.max_iterations)):
                iteration += 1
                surrogate.log.iteration = iteration
                R = config.replications_at(iteration)
                current = estimate_risk_set(state, xhat, config.alpha, config.delta)
                decision = acquisition.decide(state, xhat, R, current)

                for pair in decision.pairs:
                    outputs = self._simulate_into(surrogate.log, problem, models, config.seed, pair, R)
                    state = surrogate.observe(pair, outputs)
                    used += R

                result.trace.append(TraceRecord(
                    iteration=iteration, solution=decision.solution, model=decision.model,
                    mode=decision.mode, criterion=decision.criterion_value,
                    set_size=len(current), replications=R * len(decision.pairs),
                ))
                if iteration % log_every == 0:
                    logger.info(f"Iteration {iteration}: {used} replications, |S|={len(current)}, "
                                f"last decision x={decision.solution} ({decision.mode})")
                if refit_interval and iteration % refit_interval == 0:
                    state = surrogate.refit(stream(config.seed, 'mle', iteration))
        except SimulationError as e:
            self._save_failure(e, surrogate, config, xhat)
            logger.error(f"Run stopped at iteration {iteration}: {e}")
            raise

        state = surrogate.refresh()
        estimate = estimate_risk_set(state, xhat, config.alpha, config.delta)
        pairs, _, _, counts = surrogate.log.arrays()

        result.success = True
        result.xhat = xhat
        result.estimate = estimate
        result.frequency = np.bincount(pairs[:, 0], weights=counts, minlength=problem.n_solutions).astype(int)
        result.replications_used = used
        result.iterations = iteration
        result.state = state
        result.log = surrogate.log
        result.models = models
        result.processing_time = time.time() - start_time
        logger.info(f"{config.variant} finished: {iteration} iterations, {used} replications, "
                    f"risk set {estimate.members}")
        return result

    # ------------------------------------------------------------------
    # Baseline
    # ------------------------------------------------------------------

    def run_nmc(self, config: RunConfig, problem: SimulationProblemInterface) -> RunResult:
        """
        Equal allocation: N = floor(budget / (|X| B)) replications at every pair,
        risk set from the indicator estimator on the sample means.

        Raises:
            ValidationError: When the budget gives fewer than 2 replications per pair
        """
        start_time = time.time()
        size = problem.n_solutions * config.B
        if config.budget is None or config.budget // size < 2:
            raise ValidationError(f"nmc needs a budget of at least {2 * size} replications",
                                  'budget', config.budget)
        N = config.budget // size
        result = RunResult(success=False, variant='nmc', seed=config.seed, config=config)
        logger.info(f"Starting nmc (seed {config.seed}) on {problem.name}: {N} replications at {size} pairs")

        models = self.candidate_models(config, problem)
        xhat = self.select_xhat(config, problem)
        log = SimulationLog()
        for x in range(problem.n_solutions):
            for b in range(config.B):
                pair = PairIndex(x, b)
                log.add_batch(pair, self.simulate_batch(problem, models, config.seed, pair, N))
        pairs, means, _, _ = log.arrays()
        grid = np.empty((problem.n_solutions, config.B))
        grid[pairs[:, 0], pairs[:, 1]] = means

        result.success = True
        result.xhat = xhat
        result.estimate = risk_set_from_means(grid, xhat, config.alpha, config.delta)
        result.frequency = np.full(problem.n_solutions, N * config.B, dtype=int)
        result.replications_used = N * size
        result.log = log
        result.models = models
        result.processing_time = time.time() - start_time
        logger.info(f"nmc finished: {N * size} replications, risk set {result.estimate.members}")
        return result

    # ------------------------------------------------------------------
    # Post-run
    # ------------------------------------------------------------------

    def refine(self, result: RunResult, problem: SimulationProblemInterface, count: int,
               alpha: Optional[float] = None, delta: Optional[float] = None) -> RiskSetEstimate:
        """
        Reclassify a finished sequential run over ``count`` freshly drawn models.

        Args:
            result: Sequential run with its posterior, log and models
            problem: Problem of the run
            count: Number of new models
            alpha: Risk level; the run's when None
            delta: Indifference margin; the run's when None
        """
        if result.state is None or result.log is None or result.config is None:
            raise SrsiError("refinement needs a sequential run with its posterior")
        config = result.config
        new_models = sample_joint(self.posteriors(config, problem), count, stream(config.seed, 'refine'))
        context = self.kernel_context(problem, result.models)
        surrogate = SurrogateModel(context, result.state.params, result.state.beta0, result.log, self.gp_config)
        parameters = self.model_parameters(problem, list(result.models) + list(new_models),
                                           result.state.params.parametric_flags)
        return refine_risk_set(
            surrogate, result.models, new_models, result.xhat,
            config.alpha if alpha is None else alpha, config.delta if delta is None else delta,
            parameters,
        )


def run_srsi(config: RunConfig, problem: SimulationProblemInterface, **options) -> RunResult:
    return SrsiProcedure(**options).run_srsi(config, problem)


def run_variant(config: RunConfig, problem: SimulationProblemInterface, **options) -> RunResult:
    return SrsiProcedure(**options).run_variant(config, problem)


def run_nmc(config: RunConfig, problem: SimulationProblemInterface, **options) -> RunResult:
    return SrsiProcedure(**options).run_nmc(config, problem)

"""
Accuracy of estimated risk sets against the oracle set.
"""

import logging
from collections import defaultdict
from typing import Dict, List, Sequence, Union

import numpy as np

from ..core.exceptions import ValidationError
from ..core.interfaces import SimulationProblemInterface
from ..core.models import RiskSetEstimate, RunResult
from .riskset_service import oracle_risk_set

logger = logging.getLogger(__name__)


def _members(estimate: RiskSetEstimate) -> set:
    return set(estimate.members)


class EvaluationService:
    """Inclusion, identification and misclassification metrics over macro-runs."""

    def oracle_for(self, result: RunResult, problem: SimulationProblemInterface) -> RiskSetEstimate:
        """Oracle set over the run's own candidate models, using exact conditional means."""
        if not problem.has_oracle:
            raise ValidationError(f"{problem.name} has no analytic mean", 'problem', problem.name)
        estimate = result.estimate
        return oracle_risk_set(problem.true_mean, result.xhat, estimate.alpha, estimate.delta,
                               result.models, problem.n_solutions)

    def evaluate(self, results: Sequence[RunResult],
                 oracle: Union[RiskSetEstimate, Sequence[RiskSetEstimate]]) -> Dict[str, float]:
        """
        Compare each run's final set with the oracle.

        Args:
            results: Finished runs
            oracle: One oracle set for every run, or one per run

        Returns:
            Dictionary with inclusion (estimate contains the oracle), identification
            (equality) probabilities, mean misclassification count, and runs
        """
        oracles = [oracle] * len(results) if isinstance(oracle, RiskSetEstimate) else list(oracle)
        if len(oracles) != len(results):
            raise ValidationError("one oracle per run is required", 'oracle', len(oracles))
        if not results:
            return {'inclusion': float('nan'), 'identification': float('nan'),
                    'misclassification': float('nan'), 'runs': 0}

        inclusion, identification, misclassification = [], [], []
        for result, truth in zip(results, oracles):
            estimated, expected = _members(result.estimate), _members(truth)
            inclusion.append(expected <= estimated)
            identification.append(expected == estimated)
            misclassification.append(len(estimated ^ expected))
        return {
            'inclusion': float(np.mean(inclusion)),
            'identification': float(np.mean(identification)),
            'misclassification': float(np.mean(misclassification)),
            'runs': len(results),
        }

    def curves(self, runs: Sequence[Dict]) -> List[Dict]:
        """
        Metric rows per (variant, budget).

        Args:
            runs: Items with keys 'variant', 'budget', 'result' and 'oracle'

        Returns:
            Rows sorted by variant then budget
        """
        grouped = defaultdict(list)
        for run in runs:
            grouped[(run['variant'], run['budget'])].append(run)
        rows = []
        for (variant, budget), items in sorted(grouped.items()):
            metrics = self.evaluate([item['result'] for item in items], [item['oracle'] for item in items])
            rows.append({'variant': variant, 'budget': budget, **metrics})
            logger.info(f"{variant} @ {budget}: inclusion={metrics['inclusion']:.3f}, "
                        f"identification={metrics['identification']:.3f}, "
                        f"misclassification={metrics['misclassification']:.3f}")
        return rows


def evaluate(results: Sequence[RunResult], oracle) -> Dict[str, float]:
    return EvaluationService().evaluate(results, oracle)

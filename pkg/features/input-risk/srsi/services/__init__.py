"""
Services for risk set inference.
"""

from .riskset_service import (
    exceedance_terms, risk_set_from_posterior, estimate_risk_set, risk_set_from_means,
    oracle_risk_set, reclassify, quantile_risk_set, difference_histogram, refine_risk_set,
)
from .acquisition_service import (
    AcquisitionService, expected_change, expected_change_single, expected_change_pairwise,
    select_model_for_xhat, score_h1, score_h2, score_mean_gap, score_sigma,
    folded_normal_mean, limit_cdf,
)
from .procedure_service import SrsiProcedure, initial_design, run_srsi, run_variant, run_nmc
from .evaluation_service import EvaluationService, evaluate

__all__ = [
    'exceedance_terms', 'risk_set_from_posterior', 'estimate_risk_set', 'risk_set_from_means',
    'oracle_risk_set', 'reclassify', 'quantile_risk_set', 'difference_histogram', 'refine_risk_set',
    'AcquisitionService', 'expected_change', 'expected_change_single', 'expected_change_pairwise',
    'select_model_for_xhat', 'score_h1', 'score_h2', 'score_mean_gap', 'score_sigma',
    'folded_normal_mean', 'limit_cdf',
    'SrsiProcedure', 'initial_design', 'run_srsi', 'run_variant', 'run_nmc',
    'EvaluationService', 'evaluate',
]

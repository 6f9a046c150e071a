"""
Configuration settings for risk set inference runs.
"""

from typing import Dict, Any

# M/M/1/k capacity problem
MM1K_CONFIG = {
    'capacities': [1, 50],        # inclusive range of the capacity k
    'waiting_cost': 1.0,          # c, per unit of waiting time
    'revenue': 200.0,             # r, per served customer
    'customers': 2000,            # arrivals per replication
    'arrival_mean': 1.0,          # true mean interarrival time
    'service_mean': 1.1,          # true mean service time
    'resample_support': False,    # draw times from the support instead of Exp(mean)
}

# Ambulance dispatching-center problem
AMBULANCE_CONFIG = {
    'grid_side': 6,
    'ambulances': 8,
    'call_rate': 1.0,             # calls per hour
    'erlang_scale_minutes': 7.2,
    'warmup_hours': 1000.0,
    'window_hours': 50.0,
    'calls': 331,                 # size of the real-world call sample
    'frequency_map': None,        # optional 36-entry CSV
}

# Synthetic call-frequency map anchors (1-based neighborhood: calls)
AMBULANCE_FREQUENCY_ANCHORS = {30: 40, 6: 1, 11: 1, 15: 1}
AMBULANCE_FREQUENCY_SEED = 20200331
AMBULANCE_FREQUENCY_DECAY = 2.0

# Run settings for the M/M/1/k problem
RUN_CONFIG = {
    'B': 101,
    'n0': 100,
    'r': 30,
    'replications': [30],
    'alpha': 0.2,
    'delta': 1.0,
    'xhat': 'map-optimum',
    'xhat_replications': 30,
    'budget': 15000,
    'max_iterations': None,
    'seed': 1,
    'variant': 'srsi',
    'kappa': 1.0,
    'sample_size': 100,
}

# Run settings for the ambulance problem
AMBULANCE_RUN_CONFIG = {
    'B': 150,
    'n0': 108,
    'r': 2,
    'replications': [2],
    'alpha': 0.1,
    'delta': 1.0,
    'xhat': 'map-optimum',
    'xhat_replications': 10,
    'budget': None,
    'max_iterations': 100,
    'seed': 1,
    'variant': 'srsi',
    'kappa': 1.0,
    'sample_size': 331,
}

# Gaussian process settings
GP_CONFIG = {
    'divergence': 'sq_hellinger',
    'shared_lambda': True,
    'parametric_sources': [],
    'mle_restarts': 5,
    'mle_tolerance': 1e-8,
    'lambda_bounds': [1e-4, 1e4],
    'vartheta_bounds': [1e-4, 1e4],
    'tau_sq_bounds': [1e-6, 1e3],   # multiples of var(Y0)
    'jitter': 1e-8,                 # multiple of tau^2
    'refresh_interval': 500,
    'refit_interval': 0,            # 0 keeps MLE hyperparameters frozen
    'drift_tolerance': 1e-6,
    'noise_floor': 1e-10,
}

# Acquisition settings
ACQUISITION_CONFIG = {
    'pairwise_discount': 0.5,
    'log_every': 10,
}

# Macro-run benchmark settings
BENCHMARK_CONFIG = {
    'variants': ['srsi', 'nmc', 'srsi-m', 'srsi-v'],
    'seeds': [1, 20],
    'budgets': [3000, 6000, 12000],
    'workers': 1,
}

# Output settings
OUTPUT_CONFIG = {
    'directory': 'results',
    'alphas': [0.05, 0.1, 0.15, 0.2, 0.25],
    'deltas': [0.0, 0.5, 1.0, 1.5],
    'checkpoint_name': 'checkpoint.srsi',
}

PROBLEMS = ('mm1k', 'ambulance')


def get_config() -> Dict[str, Any]:
    """Get complete configuration dictionary."""
    return {
        'problem': {
            'name': 'mm1k',
            'data_files': None,
            'mm1k': dict(MM1K_CONFIG),
            'ambulance': dict(AMBULANCE_CONFIG),
        },
        'run': dict(RUN_CONFIG),
        'gp': dict(GP_CONFIG),
        'acquisition': dict(ACQUISITION_CONFIG),
        'benchmark': dict(BENCHMARK_CONFIG),
        'output': dict(OUTPUT_CONFIG),
    }

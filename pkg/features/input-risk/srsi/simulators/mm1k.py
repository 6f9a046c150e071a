"""
M/M/1/k capacity problem.

Customers arriving to a full system (k in system) balk. The net cost per
customer is the waiting cost of admitted customers minus the revenue of
served ones: c * E[wait] - r * (1 - Pr{balk}).
"""

import logging
from typing import Optional, Sequence

import numba
import numpy as np

from ..core.exceptions import SimulationError, ValidationError
from ..core.models import JointInputModel, Mm1kConfig
from ..inputs.dirichlet import draw_from_simplex, simplex_mean

logger = logging.getLogger(__name__)

RHO_TOLERANCE = 1e-12


def _check_rates(k: int, theta1: float, theta2: float):
    if k < 1:
        raise ValidationError("capacity must be >= 1", 'k', k)
    if theta1 <= 0 or theta2 <= 0:
        raise ValidationError("mean interarrival and service times must be positive", 'theta', (theta1, theta2))


def balk_probability(k: int, theta1: float, theta2: float) -> float:
    """Probability an arrival finds the system full."""
    _check_rates(k, theta1, theta2)
    rho = theta2 / theta1
    if abs(rho - 1.0) < RHO_TOLERANCE:
        return 1.0 / (k + 1)
    return (1.0 - rho) * rho ** k / (1.0 - rho ** (k + 1))


def expected_wait(k: int, theta1: float, theta2: float) -> float:
    """Expected time in queue of an admitted customer."""
    _check_rates(k, theta1, theta2)
    rho = theta2 / theta1
    if abs(rho - 1.0) < RHO_TOLERANCE:
        # L_q / lambda_eff at unit load; excludes the service time, so k = 1 waits 0
        return theta2 * (k - 1) / 2.0
    ratio = (1.0 - (k + 1) * rho ** k + k * rho ** (k + 1)) / ((1.0 - rho) * (1.0 - rho ** k))
    return theta2 * (ratio - 1.0)


def mm1k_analytic_cost(k: int, theta1: float, theta2: float, c: float = 1.0, r: float = 200.0) -> float:
    """Exact long-run net cost per customer."""
    return c * expected_wait(k, theta1, theta2) - r * (1.0 - balk_probability(k, theta1, theta2))


def steady_state_distribution(k: int, rho: float) -> np.ndarray:
    """Number-in-system pmf on 0..k, proportional to rho^n."""
    n = np.arange(k + 1)
    if rho <= 0:
        pmf = np.zeros(k + 1)
        pmf[0] = 1.0
        return pmf
    log_weights = n * np.log(rho)
    weights = np.exp(log_weights - log_weights.max())
    return weights / weights.sum()


@numba.njit(cache=True)
def _capacity_lindley(arrivals, services, initial_departures, capacity):
    n_initial = initial_departures.shape[0]
    departures = np.empty(n_initial + arrivals.shape[0])
    departures[:n_initial] = initial_departures
    count = n_initial
    head = 0
    last = initial_departures[n_initial - 1] if n_initial > 0 else 0.0
    wait_total = 0.0
    admitted = 0
    for i in range(arrivals.shape[0]):
        a = arrivals[i]
        while head < count and departures[head] <= a:
            head += 1
        if count - head >= capacity:
            continue
        start = a if a > last else last
        wait_total += start - a
        last = start + services[i]
        departures[count] = last
        count += 1
        admitted += 1
    return wait_total, admitted


def simulate_queue(k: int, interarrivals: np.ndarray, services: np.ndarray,
                   initial_services: np.ndarray, c: float, r: float) -> float:
    """
    Average net cost of one replication from pre-drawn times.

    Args:
        k: Capacity
        interarrivals: Interarrival time of each arriving customer
        services: Service time of each arriving customer
        initial_services: Service times of customers present at time 0, in queue order
        c: Waiting cost per unit time
        r: Revenue per served customer
    """
    arrivals = np.cumsum(interarrivals)
    initial_departures = np.cumsum(initial_services)
    wait_total, admitted = _capacity_lindley(arrivals, services, initial_departures, k)
    mean_wait = wait_total / admitted if admitted else 0.0
    return c * mean_wait - r * admitted / len(arrivals)


def mm1k_replicate_rates(k: int, theta1: float, theta2: float, customers: int,
                         rng: np.random.Generator, c: float = 1.0, r: float = 200.0) -> float:
    """One replication with exponential interarrival and service times of the given means."""
    if theta1 <= 0:
        raise SimulationError(f"mean interarrival time must be positive, got {theta1}", 'mm1k')
    initial = rng.choice(k + 1, p=steady_state_distribution(k, theta2 / theta1))
    interarrivals = rng.exponential(theta1, customers)
    services = rng.exponential(theta2, customers)
    initial_services = rng.exponential(theta2, initial) if theta2 > 0 else np.zeros(initial)
    return simulate_queue(k, interarrivals, services, initial_services, c, r)


def mm1k_replicate(k: int, model: JointInputModel, supports: Sequence[np.ndarray],
                   rng: np.random.Generator, config: Optional[Mm1kConfig] = None) -> float:
    """
    One replication at capacity k under a joint input model.

    By default interarrival and service times are exponential with the means
    of the model's two simplices; ``config.resample_support`` draws them from
    the support points instead.
    """
    config = config or Mm1kConfig()
    theta1 = float(simplex_mean(model[0], supports[0])[0])
    theta2 = float(simplex_mean(model[1], supports[1])[0])
    if not config.resample_support:
        return mm1k_replicate_rates(k, theta1, theta2, config.customers, rng,
                                    config.waiting_cost, config.revenue)

    initial = rng.choice(k + 1, p=steady_state_distribution(k, theta2 / theta1))
    interarrivals = draw_from_simplex(model[0], supports[0], config.customers, rng)[:, 0]
    services = draw_from_simplex(model[1], supports[1], config.customers, rng)[:, 0]
    initial_services = draw_from_simplex(model[1], supports[1], initial, rng)[:, 0]
    return simulate_queue(k, interarrivals, services, initial_services,
                          config.waiting_cost, config.revenue)

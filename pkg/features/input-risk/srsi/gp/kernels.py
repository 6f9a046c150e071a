"""
Composite covariance kernel over (solution, joint input model) pairs.

k(x, P; x', P') = tau^2 * gamma_X(x, x') * gamma_M(P, P'), with a squared
exponential gamma_X and gamma_M = exp(-sum_l D^2(P_l, P'_l) / vartheta_l).
Divergences between the fixed candidate models are computed once into a
B x B table per source.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as spla

from ..core.exceptions import FactorizationError, KernelError
from ..core.models import JointInputModel, KernelParams, PairIndex
from ..inputs.divergence import DivergenceKind, divergence, divergence_table

logger = logging.getLogger(__name__)


@dataclass
class KernelContext:
    """Solutions and precomputed per-source distance tables for one run."""
    solutions: np.ndarray          # (|X|, d)
    distances: np.ndarray          # (L, B, B)

    def __post_init__(self):
        self.solutions = np.asarray(self.solutions, dtype=float)
        if self.solutions.ndim == 1:
            self.solutions = self.solutions[:, None]
        self.distances = np.asarray(self.distances, dtype=float)

    @property
    def n_solutions(self) -> int:
        return len(self.solutions)

    @property
    def n_models(self) -> int:
        return self.distances.shape[1]

    @property
    def n_sources(self) -> int:
        return self.distances.shape[0]

    @property
    def dimension(self) -> int:
        return self.solutions.shape[1]

    @property
    def size(self) -> int:
        return self.n_solutions * self.n_models

    def correlation_x(self, lambda_: np.ndarray) -> np.ndarray:
        """gamma_X over all solution pairs, shape (|X|, |X|)."""
        lambda_ = _expand_lambda(lambda_, self.dimension)
        diff = self.solutions[:, None, :] - self.solutions[None, :, :]
        return np.exp(-np.sum(diff ** 2 / lambda_, axis=-1))

    def correlation_m(self, vartheta: np.ndarray) -> np.ndarray:
        """gamma_M over all candidate model pairs, shape (B, B)."""
        vartheta = np.asarray(vartheta, dtype=float)
        if len(vartheta) != self.n_sources:
            raise KernelError(f"expected {self.n_sources} vartheta values, got {len(vartheta)}", 'vartheta')
        return np.exp(-np.tensordot(1.0 / vartheta, self.distances, axes=1))

    def pair_arrays(self, indices: Sequence) -> Tuple[np.ndarray, np.ndarray]:
        """Split PairIndex values (or an (n, 2) array) into solution and model index arrays."""
        if isinstance(indices, np.ndarray) and indices.ndim == 2:
            return indices[:, 0].astype(int), indices[:, 1].astype(int)
        xs = np.array([p.solution_index for p in indices], dtype=int)
        bs = np.array([p.model_index for p in indices], dtype=int)
        if len(xs) and (xs.min() < 0 or xs.max() >= self.n_solutions
                        or bs.min() < 0 or bs.max() >= self.n_models):
            raise KernelError("pair index out of range")
        return xs, bs


def build_context(solutions: np.ndarray, models: Sequence[JointInputModel],
                  kind: DivergenceKind = 'sq_hellinger',
                  parametric_flags: Optional[Sequence[bool]] = None,
                  parameters: Optional[List[np.ndarray]] = None) -> KernelContext:
    """
    Precompute the per-source distance tables.

    Args:
        solutions: Solution coordinates, shape (|X|, d) or (|X|,)
        models: Candidate joint input models
        kind: Divergence used for nonparametric sources
        parametric_flags: Per-source switch to squared Euclidean distance
        parameters: Per-source (B, p) parameter arrays, required for flagged sources

    Returns:
        KernelContext
    """
    n_sources = len(models[0])
    flags = list(parametric_flags) if parametric_flags else [False] * n_sources
    tables = []
    for source in range(n_sources):
        if flags[source]:
            if parameters is None or parameters[source] is None:
                raise KernelError(f"source {source} is parametric but has no parameters", 'parametric_flags')
            theta = np.asarray(parameters[source], dtype=float).reshape(len(models), -1)
            tables.append(np.sum((theta[:, None, :] - theta[None, :, :]) ** 2, axis=-1))
        else:
            tables.append(divergence_table([m[source] for m in models], kind))
    logger.debug(f"Built distance tables for {n_sources} sources over {len(models)} models")
    return KernelContext(solutions, np.stack(tables))


def pair_to_flat(pair: PairIndex, n_models: int) -> int:
    """Flat position of a pair: x * B + b."""
    return pair.flat(n_models)


def flat_to_pair(index: int, n_models: int) -> PairIndex:
    solution, model = divmod(int(index), n_models)
    return PairIndex(solution, model)


def _expand_lambda(lambda_: np.ndarray, dimension: int) -> np.ndarray:
    lambda_ = np.atleast_1d(np.asarray(lambda_, dtype=float))
    if len(lambda_) == 1 and dimension > 1:
        return np.repeat(lambda_, dimension)
    if len(lambda_) != dimension:
        raise KernelError(f"expected {dimension} length-scales, got {len(lambda_)}", 'lambda')
    return lambda_


def gamma_x(x, x_prime, lambda_) -> float:
    """Squared exponential correlation between two solutions."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape:
        raise KernelError(f"dimension mismatch: {x.shape} vs {x_prime.shape}")
    lambda_ = _expand_lambda(lambda_, len(x))
    return float(np.exp(-np.sum((x - x_prime) ** 2 / lambda_)))


def gamma_m(P: JointInputModel, P_prime: JointInputModel, vartheta,
            kind: DivergenceKind = 'sq_hellinger',
            parametric_flags: Optional[Sequence[bool]] = None,
            parameters: Optional[Sequence[Tuple[np.ndarray, np.ndarray]]] = None) -> float:
    """
    Correlation between two joint input models.

    A source flagged parametric contributes (theta - theta')^2 / vartheta,
    taking (theta, theta') from ``parameters[source]``.
    """
    if len(P) != len(P_prime):
        raise KernelError(f"models have {len(P)} and {len(P_prime)} sources")
    vartheta = np.atleast_1d(np.asarray(vartheta, dtype=float))
    flags = list(parametric_flags) if parametric_flags else [False] * len(P)
    exponent = 0.0
    for source in range(len(P)):
        if flags[source]:
            theta, theta_prime = parameters[source]
            distance = float(np.sum((np.asarray(theta) - np.asarray(theta_prime)) ** 2))
        else:
            distance = divergence(P[source], P_prime[source], kind)
        exponent += distance / vartheta[source]
    return float(np.exp(-exponent))


def kernel(a: PairIndex, b: PairIndex, params: KernelParams, context: KernelContext) -> float:
    """Covariance between two pairs."""
    xa, xb = context.solutions[a.solution_index], context.solutions[b.solution_index]
    lam = _expand_lambda(params.lambda_, context.dimension)
    cx = np.exp(-np.sum((xa - xb) ** 2 / lam))
    cm = np.exp(-np.sum(context.distances[:, a.model_index, b.model_index] / params.vartheta))
    return float(params.tau_sq * cx * cm)


def gram(indices: Sequence, params: KernelParams, context: KernelContext) -> np.ndarray:
    """Gram matrix of the kernel over ``indices``."""
    return cross_gram(indices, indices, params, context)


def cross_gram(rows: Sequence, cols: Sequence, params: KernelParams,
               context: KernelContext) -> np.ndarray:
    """Kernel values between two index lists, shape (len(rows), len(cols))."""
    cx = context.correlation_x(params.lambda_)
    cm = context.correlation_m(params.vartheta)
    xr, br = context.pair_arrays(rows)
    xc, bc = context.pair_arrays(cols)
    return params.tau_sq * cx[np.ix_(xr, xc)] * cm[np.ix_(br, bc)]


def prior_covariance(params: KernelParams, context: KernelContext) -> np.ndarray:
    """Prior covariance over every pair, flattened as x * B + b."""
    return params.tau_sq * np.kron(context.correlation_x(params.lambda_),
                                   context.correlation_m(params.vartheta))


def check_positive_definite(K: np.ndarray, tau_sq: float, tol: float = 1e-8) -> bool:
    """True when K is symmetric and its smallest eigenvalue is at least -tol * tau_sq."""
    K = np.asarray(K, dtype=float)
    scale = max(float(np.max(np.abs(K))), 1e-300)
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-12 * scale):
        return False
    return bool(np.linalg.eigvalsh(K).min() >= -tol * tau_sq)


def cholesky_with_jitter(K: np.ndarray, tau_sq: float, jitter: float = 1e-8):
    """
    Lower Cholesky factor of K.

    On failure, ``jitter * tau_sq`` is added to the diagonal once and the
    factorization retried.

    Returns:
        (factor, jitter_added) where factor is a cho_factor tuple

    Raises:
        FactorizationError: When the jittered matrix still fails
    """
    try:
        return spla.cho_factor(K, lower=True), 0.0
    except (np.linalg.LinAlgError, ValueError):
        added = jitter * tau_sq
        logger.warning(f"Cholesky failed; adding jitter {added:.3e} to the diagonal")
        try:
            return spla.cho_factor(K + added * np.eye(len(K)), lower=True), added
        except (np.linalg.LinAlgError, ValueError) as e:
            raise FactorizationError("Covariance not positive definite after jitter", added, e)

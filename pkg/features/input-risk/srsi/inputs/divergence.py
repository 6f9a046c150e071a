"""
f-divergences between simplices on a shared support.
"""

from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import rel_entr

from ..core.exceptions import InputModelError
from ..core.models import ProbabilitySimplex

DIVERGENCE_KINDS = ('total_variation', 'sq_hellinger', 'jensen_shannon')

DivergenceKind = Union[str, Callable[[np.ndarray, np.ndarray], float]]


def _weights(p) -> np.ndarray:
    return np.asarray(p.weights if isinstance(p, ProbabilitySimplex) else p, dtype=float)


def _pairwise(P: np.ndarray, Q: np.ndarray, kind: str) -> np.ndarray:
    # P, Q broadcast over leading axes; the support is the last axis
    if kind == 'total_variation':
        return 0.5 * np.abs(P - Q).sum(axis=-1)
    if kind == 'sq_hellinger':
        return 0.25 * ((np.sqrt(P) - np.sqrt(Q)) ** 2).sum(axis=-1)
    if kind == 'jensen_shannon':
        M = 0.5 * (P + Q)
        return 0.5 * (rel_entr(P, M) + rel_entr(Q, M)).sum(axis=-1)
    raise InputModelError(f"Unknown divergence kind: {kind}")


def divergence(p, q, kind: DivergenceKind = 'sq_hellinger') -> float:
    """
    Squared divergence D^2(p, q).

    Args:
        p: ProbabilitySimplex or weight vector
        q: ProbabilitySimplex or weight vector on the same support
        kind: 'total_variation', 'sq_hellinger', 'jensen_shannon', or a callable

    Returns:
        Nonnegative divergence
    """
    p, q = _weights(p), _weights(q)
    if p.shape != q.shape:
        raise InputModelError(f"support mismatch: {p.shape} vs {q.shape}")
    if callable(kind):
        return float(kind(p, q))
    return float(max(_pairwise(p, q, kind), 0.0))


def divergence_table(simplices: Sequence, kind: DivergenceKind = 'sq_hellinger') -> np.ndarray:
    """B x B table of divergences between candidate simplices of one source."""
    W = np.array([_weights(s) for s in simplices])
    if callable(kind):
        n = len(W)
        table = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                table[i, j] = kind(W[i], W[j])
        return table
    table = _pairwise(W[:, None, :], W[None, :, :], kind)
    np.fill_diagonal(table, 0.0)
    return np.maximum(table, 0.0)


def cross_divergence_table(left: Sequence, right: Sequence,
                           kind: DivergenceKind = 'sq_hellinger') -> np.ndarray:
    """Divergences between two candidate lists, shape (len(left), len(right))."""
    A = np.array([_weights(s) for s in left])
    C = np.array([_weights(s) for s in right])
    if callable(kind):
        return np.array([[kind(a, c) for c in C] for a in A])
    return np.maximum(_pairwise(A[:, None, :], C[None, :, :], kind), 0.0)

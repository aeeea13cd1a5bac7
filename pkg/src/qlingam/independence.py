"""Empirical NOCCO dependence score between two scalar series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import IllConditioned, ValidationError
from .kernels import FeatureMapConfig, scoring_gram

_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class NoccoConfig:
    epsilon: float = 1e-3

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be > 0")


def regularized_contraction(G, epsilon):
    """``R = G (G + n*eps*I)^{-1}`` for a centered Gram ``G``.

    G and (G + n eps I) commute, so R equals (G + n eps I)^{-1} G and is
    obtained from one Cholesky solve.
    """
    G = G.entries if hasattr(G, "entries") else np.asarray(G, dtype=float)
    if not epsilon > 0:
        raise ValidationError("epsilon must be > 0")
    n = G.shape[0]
    A = G + n * epsilon * np.eye(n)
    try:
        R = cho_solve(cho_factor(A, lower=True), G)
    except LinAlgError as exc:
        raise IllConditioned(f"G + n*eps*I is not positive definite (eps={epsilon:g})") from exc
    resid = np.linalg.norm(A @ R - G) / max(1.0, np.linalg.norm(G))
    if not resid <= _RESIDUAL_TOL:
        raise IllConditioned(f"linear solve residual {resid:.3g} exceeds {_RESIDUAL_TOL:g}; increase epsilon")
    return 0.5 * (R + R.T)


def nocco_from_contractions(Rx, Ry):
    # Tr[Ry Rx] for symmetric matrices is the elementwise inner product
    return max(float(np.sum(Ry * Rx)), 0.0)


def nocco(x, y, kernel, fmap=FeatureMapConfig(), cfg=NoccoConfig(), seed_x=0, seed_y=0):
    """``Tr[R_Y R_X]`` from the centered Gram matrices of ``x`` and ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValidationError(f"series lengths differ: {x.size} vs {y.size}")
    Rx = regularized_contraction(scoring_gram(x, kernel, fmap, seed_x), cfg.epsilon)
    Ry = regularized_contraction(scoring_gram(y, kernel, fmap, seed_y), cfg.epsilon)
    return nocco_from_contractions(Rx, Ry)

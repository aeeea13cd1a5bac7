"""DirectLiNGAM with a kernel NOCCO independence score.

Each round regresses every remaining variable on each candidate, scores
the candidate by the summed NOCCO between it and those residuals, and
takes the least dependent candidate as the next exogenous variable. The
remaining variables are then replaced by their residuals on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import DataMatrix, is_degenerate
from .errors import (
    ConstantRegressor,
    ConstantSeries,
    DataError,
    DimensionMismatch,
    NumericalError,
    SingularDesign,
    ValidationError,
)
from .independence import NoccoConfig, nocco_from_contractions, regularized_contraction
from .kernels import FeatureMapConfig, KernelConfig, scoring_gram
from ._rng import check_seed, derive_seed


@dataclass
class DiscoveryConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    fmap: FeatureMapConfig = field(default_factory=FeatureMapConfig)
    nocco: NoccoConfig = field(default_factory=NoccoConfig)
    prune_threshold: float = 0.1
    master_seed: int = 0

    def __post_init__(self):
        if not self.prune_threshold >= 0:
            raise ValidationError("prune threshold must be >= 0")
        self.master_seed = check_seed(self.master_seed)

    def to_dict(self):
        return {
            "kernel": self.kernel.to_dict(),
            "feature_scale": self.fmap.scale,
            "epsilon": self.nocco.epsilon,
            "prune_threshold": self.prune_threshold,
            "master_seed": self.master_seed,
        }


@dataclass
class CausalModel:
    variables: list
    ordering: list
    B: np.ndarray
    B_standardized: np.ndarray
    adjacency: np.ndarray
    trace: list
    config: dict = field(default_factory=dict)

    def edges(self):
        """Directed edges as (cause, effect) index pairs, sorted."""
        effect, cause = np.nonzero(self.adjacency)
        return sorted(zip(cause.tolist(), effect.tolist()))

    def to_dict(self):
        return {
            "variables": list(self.variables),
            "ordering": [int(k) for k in self.ordering],
            "B": self.B.tolist(),
            "B_standardized": self.B_standardized.tolist(),
            "adjacency": self.adjacency.astype(bool).tolist(),
            "edges": [
                {"from": self.variables[c], "to": self.variables[e], "strength": float(self.B[e, c])}
                for c, e in self.edges()
            ],
            "trace": self.trace,
            "config": self.config,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_dot(self):
        lines = ["digraph causal_model {"]
        for name in self.variables:
            lines.append(f'  "{name}";')
        for c, e in self.edges():
            lines.append(
                f'  "{self.variables[c]}" -> "{self.variables[e]}" [label="{self.B[e, c]:.2f}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def _values(data):
    return data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)


def regress_residual(target, regressor):
    """Residual of the simple regression of ``target`` on ``regressor`` (population moments)."""
    target = np.asarray(target, dtype=float)
    regressor = np.asarray(regressor, dtype=float)
    if is_degenerate(regressor):
        raise ConstantRegressor("regressor has zero variance")
    xc = regressor - regressor.mean()
    slope = np.mean((target - target.mean()) * xc) / np.mean(xc**2)
    return target - slope * regressor


class _Scorer:
    """Caches the contraction matrix of each candidate within one round."""

    def __init__(self, cfg, round_index):
        self.cfg = cfg
        self.round_index = round_index

    def contraction(self, series, j, i):
        seed = derive_seed(self.cfg.master_seed, self.round_index, j, i)
        G = scoring_gram(series, self.cfg.kernel, self.cfg.fmap, seed)
        return regularized_contraction(G, self.cfg.nocco.epsilon)

    def score(self, X, j, active):
        Rj = self.contraction(X[j], j, j)
        total = 0.0
        for i in active:
            if i == j:
                continue
            r = regress_residual(X[i], X[j])
            total += nocco_from_contractions(Rj, self.contraction(r, j, i))
        return total


def total_independence_score(j, active, data, cfg, round_index=0):
    """Sum over ``i`` in ``active`` (``i != j``) of NOCCO(x_j, residual of x_i on x_j)."""
    active = sorted(int(a) for a in active)
    if j not in active or len(active) < 2:
        raise ValidationError("j must be active and at least two variables must be active")
    return _Scorer(cfg, round_index).score(_values(data), j, active)


def _causal_order(X, cfg):
    X = np.array(X, dtype=float, copy=True)
    p = X.shape[0]
    order, trace = [], []
    for rnd in range(p - 1):
        active = [v for v in range(p) if v not in order]
        scorer = _Scorer(cfg, rnd)
        scores = [(j, scorer.score(X, j, active)) for j in active]
        # strict < keeps the lowest index on ties
        best, best_score = scores[0]
        for j, s in scores[1:]:
            if s < best_score:
                best, best_score = j, s
        order.append(best)
        trace.append({
            "round": rnd,
            "candidates": [{"index": j, "score": s} for j, s in scores],
            "selected": best,
        })
        for i in active:
            if i != best:
                X[i] = regress_residual(X[i], X[best])
    order.extend(v for v in range(p) if v not in order)
    return order, trace


def causal_order(data, cfg):
    """Causal ordering ``K`` (list of variable indices, causes first)."""
    return _causal_order(_values(data), cfg)[0]


def estimate_strengths(data, ordering):
    """OLS of each variable on all of its predecessors in ``ordering``.

    Returns ``B`` with ``B[i, j]`` the effect of variable ``j`` on ``i``.
    """
    X = _values(data)
    p = X.shape[0]
    if sorted(ordering) != list(range(p)):
        raise ValidationError(f"ordering {ordering} is not a permutation of 0..{p - 1}")
    Xc = X - X.mean(axis=1, keepdims=True)
    B = np.zeros((p, p))
    for pos, target in enumerate(ordering):
        preds = list(ordering[:pos])
        if not preds:
            continue
        P = Xc[preds]
        normal = P @ P.T
        if np.linalg.cond(normal) > 1e12:
            raise SingularDesign(
                f"predecessors {preds} of variable {target} are collinear"
            )
        B[target, preds] = np.linalg.solve(normal, P @ Xc[target])
    return B


def standardized_strengths(B, data):
    sd = _values(data).std(axis=1)
    return B * sd[None, :] / sd[:, None]


def prune(B, data, threshold):
    """Keep edge j -> i iff its standardized magnitude ``|B[i,j] sd_j / sd_i|`` reaches ``threshold``."""
    if not threshold >= 0:
        raise ValidationError("prune threshold must be >= 0")
    Bs = standardized_strengths(B, data)
    return (np.abs(Bs) >= threshold) & (B != 0)


def _with_context(step, exc):
    exc.args = (f"{step}: {exc.args[0] if exc.args else exc}",) + tuple(exc.args[1:])
    return exc


def discover(data, cfg=None):
    """Run ordering, strength estimation and pruning end to end."""
    cfg = cfg or DiscoveryConfig()
    if not isinstance(data, DataMatrix):
        data = DataMatrix([f"x{k}" for k in range(len(data))], data)
    if data.p < 2:
        raise ValidationError("discovery needs at least two variables")
    if data.n < 2:
        raise ValidationError("discovery needs at least two samples")
    for name, row in zip(data.names, data.values):
        if is_degenerate(row):
            raise ConstantSeries(f"variable {name!r} is constant")
    try:
        ordering, trace = _causal_order(data.values, cfg)
    except (DataError, NumericalError) as exc:
        raise _with_context("causal ordering", exc)
    try:
        B = estimate_strengths(data, ordering)
    except (DataError, NumericalError) as exc:
        raise _with_context("strength estimation", exc)
    return CausalModel(
        variables=list(data.names),
        ordering=ordering,
        B=B,
        B_standardized=standardized_strengths(B, data),
        adjacency=prune(B, data, cfg.prune_threshold),
        trace=trace,
        config=cfg.to_dict(),
    )


def structure_equal(model, reference):
    """True iff the pruned adjacency matches ``reference`` edge for edge, directions included."""
    adj = model.adjacency if isinstance(model, CausalModel) else np.asarray(model)
    reference = np.asarray(reference, dtype=bool)
    if adj.shape != reference.shape:
        raise DimensionMismatch(f"adjacency {adj.shape} vs reference {reference.shape}")
    return bool(np.array_equal(adj.astype(bool), reference))


def ordering_consistent(ordering, reference):
    """True iff every reference edge j -> i has j before i in ``ordering``."""
    pos = {v: k for k, v in enumerate(ordering)}
    effect, cause = np.nonzero(np.asarray(reference, dtype=bool))
    return all(pos[c] < pos[e] for c, e in zip(cause, effect))

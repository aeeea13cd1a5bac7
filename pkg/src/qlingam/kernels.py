"""Gram matrices for scalar series: IQP quantum kernel or Gaussian RBF."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed
from .dataset import is_degenerate, standardize
from .errors import ValidationError
from .quantum import (
    DEFAULT_SHOTS,
    CalibrationMatrix,
    IqpCircuitSpec,
    ReadoutNoiseModel,
    build_calibration_matrix,
    kernel_exact_batch,
    kernel_shots_batch,
)

KINDS = ("quantum", "gaussian")
MODES = ("exact", "shots")

# pair batches are evaluated in slices of this many rows to bound memory
_PAIR_CHUNK = 16384


@dataclass(frozen=True)
class FeatureMapConfig:
    scale: float = 2.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValidationError("feature-map scale must be > 0")


@dataclass
class KernelConfig:
    """Which kernel to build and how.

    Only the fields belonging to ``kind`` are consulted: ``bandwidth`` for
    the Gaussian kernel; ``circuit``, ``mode``, ``shots``, ``noise`` and
    ``calibration`` for the quantum one.
    """

    kind: str = "quantum"
    circuit: IqpCircuitSpec = field(default_factory=IqpCircuitSpec)
    bandwidth: object = "median"
    mode: str = "exact"
    shots: int = DEFAULT_SHOTS
    noise: ReadoutNoiseModel | None = None
    calibration: CalibrationMatrix | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kernel kind must be one of {KINDS}, got {self.kind!r}")
        if self.mode not in MODES:
            raise ValidationError(f"kernel mode must be one of {MODES}, got {self.mode!r}")
        if self.bandwidth != "median":
            try:
                bw = float(self.bandwidth)
            except (TypeError, ValueError):
                raise ValidationError(f"bandwidth must be 'median' or a number, got {self.bandwidth!r}") from None
            if not bw > 0:
                raise ValidationError("bandwidth must be > 0")
            self.bandwidth = bw
        if int(self.shots) < 1:
            raise ValidationError("shots must be >= 1")

    def with_calibration(self, shots_per_state, seed):
        """Copy of this config carrying a freshly simulated calibration matrix."""
        noise = self.noise or ReadoutNoiseModel()
        cal = build_calibration_matrix(self.circuit.q, noise, shots_per_state, seed)
        return KernelConfig(self.kind, self.circuit, self.bandwidth, self.mode, self.shots, self.noise, cal)

    def to_dict(self):
        if self.kind == "gaussian":
            return {"kind": "gaussian", "bandwidth": self.bandwidth}
        out = {
            "kind": "quantum",
            "qubits": self.circuit.q,
            "depth": self.circuit.depth,
            "mode": self.mode,
        }
        if self.mode == "shots":
            out["shots"] = int(self.shots)
            out["noise"] = None if self.noise is None else {"p01": self.noise.p01, "p10": self.noise.p10}
            out["mitigated"] = self.calibration is not None
        return out


@dataclass
class GramMatrix:
    entries: np.ndarray
    centered: bool = False

    @property
    def n(self):
        return self.entries.shape[0]

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.entries)[0])


def tanh_shrink(x):
    return x - np.tanh(x)


def feature_map(value, cfg=FeatureMapConfig()):
    """Gate phase for a standardized value: ``tanh_shrink(scale * value)``."""
    return tanh_shrink(cfg.scale * np.asarray(value, dtype=float))


def median_heuristic(series):
    """Median pairwise distance, falling back to 1.0 when it is zero."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise ValidationError("median heuristic needs at least two samples")
    i, j = np.triu_indices(x.size, k=1)
    med = float(np.median(np.abs(x[i] - x[j])))
    return med if med > 0 else 1.0


def gaussian_gram(z, bandwidth):
    d = z[:, None] - z[None, :]
    return np.exp(-(d**2) / (2.0 * bandwidth**2))


def _quantum_pairs(angles, kcfg, seed, histograms):
    n = angles.size
    iu, ju = np.triu_indices(n)
    values = np.empty(iu.size)
    hists = [] if histograms else None
    for start in range(0, iu.size, _PAIR_CHUNK):
        sl = slice(start, start + _PAIR_CHUNK)
        ai, aj = angles[iu[sl]], angles[ju[sl]]
        if kcfg.mode == "exact":
            values[sl] = kernel_exact_batch(ai, aj, kcfg.circuit)
        else:
            seeds = [derive_seed(seed, i, j) for i, j in zip(iu[sl], ju[sl])]
            res = kernel_shots_batch(ai, aj, kcfg.circuit, kcfg.shots, seeds, kcfg.noise,
                                     kcfg.calibration, return_histograms=histograms)
            if histograms:
                values[sl], h = res
                hists.append(h)
            else:
                values[sl] = res
    K = np.empty((n, n))
    K[iu, ju] = values
    K[ju, iu] = values
    if histograms:
        return K, (iu, ju, np.concatenate(hists))
    return K


def gram(series, kcfg, fcfg=FeatureMapConfig(), seed=0, histograms=False):
    """Raw Gram matrix of a scalar series.

    The series is standardized first (both kinds). A constant series has no
    spread to standardize; every pair of points coincides, so its Gram is
    the all-ones matrix. In shot mode pair ``(i, j)``, ``i <= j``, draws from
    a stream seeded by ``derive_seed(seed, i, j)`` and the upper triangle is
    mirrored, so the result is exactly symmetric and schedule independent.

    With ``histograms=True`` (shot mode) also returns ``(i, j, counts)``
    for every sampled pair.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        raise ValidationError("gram needs at least two samples")
    if is_degenerate(x):
        K = np.ones((n, n))
        return (GramMatrix(K), None) if histograms else GramMatrix(K)
    z = standardize(x)
    hist = None
    if kcfg.kind == "gaussian":
        bw = median_heuristic(z) if kcfg.bandwidth == "median" else kcfg.bandwidth
        K = gaussian_gram(z, bw)
    else:
        angles = feature_map(z, fcfg)
        if histograms and kcfg.mode == "shots":
            K, hist = _quantum_pairs(angles, kcfg, seed, True)
        else:
            K = _quantum_pairs(angles, kcfg, seed, False)
    return (GramMatrix(K), hist) if histograms else GramMatrix(K)


def nearest_psd(K):
    """Clip negative eigenvalues; sampled Grams are symmetric but not always PSD."""
    entries = K.entries if isinstance(K, GramMatrix) else np.asarray(K, dtype=float)
    w, V = np.linalg.eigh(entries)
    if w[0] >= 0:
        return GramMatrix(entries.copy())
    P = (V * np.clip(w, 0.0, None)) @ V.T
    return GramMatrix(0.5 * (P + P.T))


def scoring_gram(series, kcfg, fcfg=FeatureMapConfig(), seed=0):
    """Centered Gram used by the dependence score.

    Shot-mode quantum Grams are projected onto the PSD cone first so the
    regularized solve stays well posed at low shot counts.
    """
    K = gram(series, kcfg, fcfg, seed)
    if kcfg.kind == "quantum" and kcfg.mode == "shots":
        K = nearest_psd(K)
    return center_gram(K)


def center_gram(K):
    """``H K H`` with ``H = I - J / n``."""
    entries = K.entries if isinstance(K, GramMatrix) else np.asarray(K, dtype=float)
    row = entries.mean(axis=1, keepdims=True)
    col = entries.mean(axis=0, keepdims=True)
    G = entries - row - col + entries.mean()
    G = 0.5 * (G + G.T)
    return GramMatrix(G, centered=True)

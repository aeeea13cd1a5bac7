"""Tabular data preparation and the three-variable Laplace benchmark."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from ._rng import check_seed, make_rng
from .errors import (
    ConstantSeries,
    DataError,
    HeaderMissing,
    KTooLarge,
    NoRowsRemaining,
    UnknownVariable,
    ValidationError,
)

# A series whose spread is below this fraction of its magnitude is treated as
# constant: exact-collinearity residuals land here instead of being rescaled
# from round-off noise.
DEGENERATE_RTOL = 1e-12

# Edge set of the benchmark structure: x0 -> x1, x1 -> x2, x0 -> x2.
SYNTHETIC_EDGES = ((0, 1), (1, 2), (0, 2))

UCI_HEART_COLUMNS = [
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
    "thalach", "exang", "oldpeak", "slope", "ca", "thal", "num",
]


@dataclass
class DataMatrix:
    """``p`` named variables observed on ``n`` samples, stored as a (p, n) array."""

    names: list
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValidationError("values must be a 2-D (variables x samples) array")
        if len(self.names) != self.values.shape[0]:
            raise ValidationError(
                f"{len(self.names)} names for {self.values.shape[0]} variables"
            )
        if len(set(self.names)) != len(self.names):
            raise ValidationError("variable names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise DataError("data contains non-finite values")

    @property
    def p(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(name) from None

    def column(self, name):
        return self.values[self.index(name)]

    def select(self, names):
        rows = [self.index(name) for name in names]
        return DataMatrix(list(names), self.values[rows].copy(), self.source)

    def take(self, sample_idx):
        return DataMatrix(list(self.names), self.values[:, sample_idx].copy(), self.source)

    def to_csv(self, path):
        """Write header plus one row per sample, floats in shortest round-trip form."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.names)
            for row in self.values.T:
                writer.writerow([repr(float(v)) for v in row])


@dataclass
class MissingPolicy:
    missing_tokens: list = field(default_factory=lambda: ["?"])
    zero_as_missing_columns: list = field(default_factory=list)


@dataclass
class SyntheticSpec:
    n: int
    seed: int = 0
    b10: float = 0.3
    b21: float = 0.3
    b20: float = 0.3
    laplace_mu: float = 0.0
    laplace_lambda: float = 1.0

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValidationError("n must be >= 1")
        if not self.laplace_lambda > 0:
            raise ValidationError("laplace_lambda must be > 0")
        self.n = int(self.n)
        self.seed = check_seed(self.seed)


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _resolve(name, header):
    """Exact header match, else the unique case-insensitive one."""
    if name in header:
        return name
    folded = [h for h in header if h.lower() == name.lower()]
    if len(folded) == 1:
        return folded[0]
    raise UnknownVariable(name)


def load_csv(path, policy=None, selected=None, column_names=None):
    """Read a comma-separated file and drop every record with a missing value.

    A record is dropped when *any* of its cells (selected or not) is empty or
    equals one of ``policy.missing_tokens``, or when a column listed in
    ``policy.zero_as_missing_columns`` holds 0. Only ``selected`` columns are
    returned (all columns when ``selected`` is None).

    ``column_names`` supplies names for a header-less file; without it the
    first row must be a header. Variable names match the header exactly or,
    failing that, case-insensitively.
    """
    policy = policy or MissingPolicy()
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise HeaderMissing(f"{path}: file is empty")

    if column_names is not None:
        header = list(column_names)
        body = rows
    else:
        header = [c.strip() for c in rows[0]]
        if all(_is_number(c) for c in header):
            raise HeaderMissing(f"{path}: first row is numeric, expected a header")
        body = rows[1:]

    selected = [_resolve(name, header) for name in selected] if selected else header
    zero_cols = [header.index(_resolve(c, header)) for c in policy.zero_as_missing_columns]
    tokens = {t.strip() for t in policy.missing_tokens}

    kept = []
    for lineno, row in enumerate(body, start=2 if column_names is None else 1):
        cells = [c.strip() for c in row]
        if len(cells) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        if any(c == "" or c in tokens for c in cells):
            continue
        if any(_is_number(cells[k]) and float(cells[k]) == 0.0 for k in zero_cols):
            continue
        record = []
        for name in selected:
            cell = cells[header.index(name)]
            try:
                record.append(float(cell))
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value {cell!r} in {name!r}") from None
        kept.append(record)

    if not kept:
        raise NoRowsRemaining(f"{path}: no rows left after dropping missing values")
    return DataMatrix(selected, np.array(kept, dtype=float).T, source=str(path))


def subsample_indices(n, k, seed):
    if not 1 <= k <= n:
        raise KTooLarge(f"cannot draw {k} of {n} samples")
    idx = make_rng(seed).choice(n, size=k, replace=False)
    return np.sort(idx)


def subsample(dm, k, seed):
    """Draw ``k`` samples uniformly without replacement, keeping their original order."""
    return dm.take(subsample_indices(dm.n, int(k), seed))


def is_degenerate(series):
    series = np.asarray(series, dtype=float)
    scale = np.max(np.abs(series)) if series.size else 0.0
    return float(np.std(series)) <= DEGENERATE_RTOL * scale


def standardize(series):
    """Shift to mean 0 and scale to population variance 1 (divisor ``n``)."""
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        raise ValidationError("standardize needs at least two samples")
    if is_degenerate(series):
        raise ConstantSeries("series has zero variance")
    centered = series - series.mean()
    return centered / np.sqrt(np.mean(centered**2))


def laplace_inverse_cdf(u, mu=0.0, lam=1.0):
    """Map uniforms in (0, 1) to Laplace(mu, lam) draws."""
    d = u - 0.5
    return mu - lam * np.sign(d) * np.log1p(-2.0 * np.abs(d))


def gen_synthetic(spec):
    """Sample the three-variable linear SEM with Laplace errors.

    The error columns are drawn in order e0, e1, e2, each as ``n`` consecutive
    uniforms from one PCG64 stream seeded with ``spec.seed``.
    """
    rng = make_rng(spec.seed)
    # random() yields k / 2**53; the half-step offset keeps u inside (0, 1)
    u = rng.random((3, spec.n)) + 2.0**-54
    e = laplace_inverse_cdf(u, spec.laplace_mu, spec.laplace_lambda)
    x0 = e[0]
    x1 = spec.b10 * x0 + e[1]
    x2 = spec.b21 * x1 + spec.b20 * x0 + e[2]
    return DataMatrix(["x0", "x1", "x2"], np.vstack([x0, x1, x2]), source=f"synthetic(seed={spec.seed})")


def synthetic_adjacency():
    adj = np.zeros((3, 3), dtype=bool)
    for cause, effect in SYNTHETIC_EDGES:
        adj[effect, cause] = True
    return adj

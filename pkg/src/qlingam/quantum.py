"""Dense statevector simulation of IQP feature-map circuits.

Qubit ``k`` is bit ``k`` of a basis-state index (qubit 0 is the least
significant bit). All state arrays may carry leading batch axes; the last
axis always holds the ``2**q`` amplitudes.

The circuit for a scalar angle ``a`` at depth ``d`` is::

    H^q  D(a)  H^q  ...  D(a)  H^q        (d diagonal layers, d + 1 H walls)

read right to left, where ``D(a)`` is U1(a) on every qubit followed by
CU1(a) on each neighbouring pair (0, 1), (1, 2), ..., (q - 2, q - 1).
Kernel values come from the inversion test: run the circuit for ``a_i``,
then its adjoint for ``a_j``, and read the probability of ``|0...0>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._rng import make_rng, derive_seed
from .errors import DimensionMismatch, SingularCalibration, ValidationError, ZeroShots

DEFAULT_SHOTS = 8192

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class IqpCircuitSpec:
    q: int = 5
    depth: int = 2

    def __post_init__(self):
        if int(self.q) < 1 or int(self.depth) < 1:
            raise ValidationError("qubit count and depth must both be >= 1")

    @property
    def dim(self):
        return 2**self.q


NOISY_DEFAULT = IqpCircuitSpec(q=4, depth=1)


@dataclass(frozen=True)
class ReadoutNoiseModel:
    """Independent per-qubit readout flips: ``p01`` = P(read 1 | 0), ``p10`` = P(read 0 | 1)."""

    p01: float = 0.0
    p10: float = 0.0

    def __post_init__(self):
        for p in (self.p01, self.p10):
            if not 0.0 <= p <= 0.5:
                raise ValidationError(f"readout flip probability {p} outside [0, 0.5]")

    def confusion(self):
        """Single-qubit response matrix, entry [read][true]."""
        return np.array([[1.0 - self.p01, self.p10], [self.p01, 1.0 - self.p10]])

    @property
    def is_trivial(self):
        return self.p01 == 0.0 and self.p10 == 0.0


class Statevector:
    """Amplitudes of a ``q``-qubit pure state."""

    def __init__(self, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        q = int(round(np.log2(amps.shape[-1]))) if amps.ndim == 1 and amps.size else -1
        if q < 0 or 2**q != amps.size:
            raise ValidationError("statevector length must be a power of two")
        self.amplitudes = amps
        self.q = q

    @classmethod
    def zero(cls, q):
        amps = np.zeros(2**q, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, q, index):
        amps = np.zeros(2**q, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return _probabilities(self.amplitudes)

    def copy(self):
        return Statevector(self.amplitudes.copy())

    def __repr__(self):
        return f"Statevector(q={self.q})"


# -- gate primitives --------------------------------------------------------

def _bit(q, k):
    return (np.arange(2**q) >> k) & 1


def apply_hadamard(amps, qubit, q):
    """Hadamard on one qubit of a (possibly batched) amplitude array."""
    shape = amps.shape
    view = amps.reshape(shape[:-1] + (2 ** (q - qubit - 1), 2, 2**qubit))
    a0 = view[..., 0, :]
    a1 = view[..., 1, :]
    out = np.stack(((a0 + a1) * _INV_SQRT2, (a0 - a1) * _INV_SQRT2), axis=-2)
    return out.reshape(shape)


# up to this many qubits the H wall is one matmul with the dense 2^q x 2^q matrix
_DENSE_WALL_MAX_Q = 10


@lru_cache(maxsize=None)
def _walsh_hadamard(q):
    bits = np.arange(2**q)
    parity = np.zeros((2**q, 2**q), dtype=np.int64)
    overlap = bits[:, None] & bits[None, :]
    for k in range(q):
        parity += (overlap >> k) & 1
    return np.where(parity % 2 == 0, 1.0, -1.0) / np.sqrt(2.0**q)


def hadamard_wall(amps, q):
    """Hadamard on every qubit."""
    if q <= _DENSE_WALL_MAX_Q:
        return amps @ _walsh_hadamard(q)
    for k in range(q):
        amps = apply_hadamard(amps, k, q)
    return amps


def apply_u1(amps, qubit, angle, q):
    """U1(angle) = diag(1, e^{i angle}) on ``qubit``."""
    mask = _bit(q, qubit).astype(bool)
    out = np.array(amps, dtype=complex, copy=True)
    out[..., mask] *= np.exp(1j * angle)
    return out


def apply_cu1(amps, control, target, angle, q):
    """Controlled-U1: phases only the basis states where both qubits are 1."""
    mask = (_bit(q, control) & _bit(q, target)).astype(bool)
    out = np.array(amps, dtype=complex, copy=True)
    out[..., mask] *= np.exp(1j * angle)
    return out


def diagonal_layer_weights(q):
    """Phase multiplicity of each basis state under one diagonal layer.

    A layer multiplies basis state ``z`` by ``exp(i * angle * w[z])`` where
    ``w[z]`` counts its set bits plus its adjacent ``11`` pairs.
    """
    w = np.zeros(2**q, dtype=np.int64)
    for k in range(q):
        w += _bit(q, k)
    for k in range(q - 1):
        w += _bit(q, k) & _bit(q, k + 1)
    return w


def apply_diagonal_layer(state, angle):
    """U1(angle) on every qubit, then CU1(angle) on each neighbouring pair."""
    q = state.q
    amps = state.amplitudes
    for k in range(q):
        amps = apply_u1(amps, k, angle, q)
    for k in range(q - 1):
        amps = apply_cu1(amps, k, k + 1, angle, q)
    return Statevector(amps)


# -- circuits ---------------------------------------------------------------

def _iqp_apply(amps, angles, spec, weights=None):
    """Apply the depth-``d`` IQP circuit row-wise; ``angles`` broadcasts over the batch."""
    if weights is None:
        weights = diagonal_layer_weights(spec.q)
    phase = np.exp(1j * np.multiply.outer(np.asarray(angles, dtype=float), weights))
    amps = hadamard_wall(amps, spec.q)
    for _ in range(spec.depth):
        amps = hadamard_wall(amps * phase, spec.q)
    return amps


def _zero_batch(batch, q):
    amps = np.zeros((batch, 2**q), dtype=complex)
    amps[:, 0] = 1.0
    return amps


def _probabilities(amps):
    probs = np.abs(amps) ** 2
    return probs / probs.sum(axis=-1, keepdims=True)


def build_iqp_state(angle, spec):
    """Prepare ``U(angle)|0...0>``."""
    amps = Statevector.zero(spec.q).amplitudes
    amps = hadamard_wall(amps, spec.q)
    state = Statevector(amps)
    for _ in range(spec.depth):
        state = apply_diagonal_layer(state, angle)
        state = Statevector(hadamard_wall(state.amplitudes, spec.q))
    return state


def inversion_amplitudes(angles_i, angles_j, spec):
    """Final states of ``U(a_j)^dagger U(a_i)|0>`` for each pair in the batch.

    The adjoint has the same H / diagonal pattern with negated angles, since
    the Hadamard wall is self-inverse and the layers are palindromic.
    """
    angles_i = np.atleast_1d(np.asarray(angles_i, dtype=float))
    angles_j = np.atleast_1d(np.asarray(angles_j, dtype=float))
    angles_i, angles_j = np.broadcast_arrays(angles_i, angles_j)
    w = diagonal_layer_weights(spec.q)
    amps = _iqp_apply(_zero_batch(angles_i.size, spec.q), angles_i.ravel(), spec, w)
    return _iqp_apply(amps, -angles_j.ravel(), spec, w)


def kernel_exact_batch(angles_i, angles_j, spec):
    amps = inversion_amplitudes(angles_i, angles_j, spec)
    return np.abs(amps[:, 0]) ** 2


def kernel_exact(angle_i, angle_j, spec):
    """``|<0|U(a_j)^dagger U(a_i)|0>|^2`` from the simulated inversion test."""
    return float(kernel_exact_batch(angle_i, angle_j, spec)[0])


def kernel_inner_product(angle_i, angle_j, spec):
    """Fidelity of the two prepared states, ``|<phi(a_j)|phi(a_i)>|^2``."""
    phi_i = build_iqp_state(angle_i, spec).amplitudes
    phi_j = build_iqp_state(angle_j, spec).amplitudes
    return float(np.abs(np.vdot(phi_j, phi_i)) ** 2)


# -- measurement, noise, mitigation -----------------------------------------

def apply_readout_noise(probs, noise, q):
    """Push an outcome distribution through independent per-qubit readout flips."""
    if noise is None or noise.is_trivial:
        return probs
    m = noise.confusion()
    shape = probs.shape
    out = probs
    for k in range(q):
        view = out.reshape(shape[:-1] + (2 ** (q - k - 1), 2, 2**k))
        out = np.einsum("rt,...atb->...arb", m, view).reshape(shape)
    return out


def _check_shots(shots):
    shots = int(shots)
    if shots < 1:
        raise ZeroShots("shots must be >= 1")
    return shots


def _sample(probs, shots, seed, noise, q):
    probs = apply_readout_noise(probs, noise, q)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    return make_rng(seed).multinomial(shots, probs)


def sample_measurement(state, shots, seed, noise=None):
    """Histogram of ``shots`` computational-basis readouts of ``state``.

    Readout flips act independently on every bit of every shot; sampling the
    multinomial of the flipped distribution is equivalent in law and costs
    O(q 2^q) instead of O(shots q).
    """
    shots = _check_shots(shots)
    return _sample(state.probabilities(), shots, seed, noise, state.q)


def sample_histograms(probs, shots, seeds, noise=None, q=None):
    """One histogram per row of ``probs``, row ``r`` seeded by ``seeds[r]``."""
    shots = _check_shots(shots)
    probs = np.atleast_2d(probs)
    q = q if q is not None else int(round(np.log2(probs.shape[-1])))
    noisy = apply_readout_noise(probs, noise, q)
    noisy = np.clip(noisy, 0.0, None)
    noisy = noisy / noisy.sum(axis=-1, keepdims=True)
    return np.stack([make_rng(s).multinomial(shots, row) for s, row in zip(seeds, noisy)])


class CalibrationMatrix:
    """Readout response: ``entries[i, j]`` = P(read ``i`` | prepared basis state ``j``)."""

    def __init__(self, entries):
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError("calibration matrix must be square")
        if not np.allclose(entries.sum(axis=0), 1.0, atol=1e-9, rtol=0):
            raise ValidationError("calibration columns must sum to 1")
        if entries.min() < 0 or entries.max() > 1:
            raise ValidationError("calibration entries must lie in [0, 1]")
        self.entries = entries

    @property
    def dim(self):
        return self.entries.shape[0]

    def pseudo_inverse(self):
        s = np.linalg.svd(self.entries, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            raise SingularCalibration(
                f"calibration matrix is rank deficient (condition {s[0] / max(s[-1], 1e-300):.3g})"
            )
        return np.linalg.pinv(self.entries)


def build_calibration_matrix(q, noise, shots_per_state, seed):
    """Estimate the readout response by preparing and measuring each basis state."""
    shots = _check_shots(shots_per_state)
    dim = 2**q
    cols = np.empty((dim, dim))
    for j in range(dim):
        hist = sample_measurement(Statevector.basis(q, j), shots, derive_seed(seed, j), noise)
        cols[:, j] = hist / shots
    return CalibrationMatrix(cols)


def _mitigate_rows(freqs, pinv):
    corrected = np.clip(freqs @ pinv.T, 0.0, None)
    totals = corrected.sum(axis=-1, keepdims=True)
    if np.any(totals <= 0):
        raise SingularCalibration("mitigation removed all probability mass")
    return corrected / totals


def mitigate(freqs, cal):
    """Invert the readout response: pseudo-inverse, clip negatives, renormalize."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.shape[-1] != cal.dim:
        raise DimensionMismatch(f"{freqs.shape[-1]} outcomes vs {cal.dim}x{cal.dim} calibration")
    if abs(freqs.sum() - 1.0) > 1e-6:
        raise ValidationError("frequencies must sum to 1")
    return _mitigate_rows(freqs, cal.pseudo_inverse())


def _check_calibration(calibration, spec):
    if calibration is not None and calibration.dim != spec.dim:
        raise DimensionMismatch(
            f"calibration is {calibration.dim}x{calibration.dim}, circuit has {spec.dim} outcomes"
        )


def kernel_shots_batch(angles_i, angles_j, spec, shots, seeds, noise=None, calibration=None,
                       return_histograms=False):
    """Shot-based kernel estimates for a batch of pairs (pair ``r`` uses ``seeds[r]``)."""
    shots = _check_shots(shots)
    _check_calibration(calibration, spec)
    probs = _probabilities(inversion_amplitudes(angles_i, angles_j, spec))
    hists = sample_histograms(probs, shots, seeds, noise, spec.q)
    freqs = hists / shots
    if calibration is not None:
        freqs = _mitigate_rows(freqs, calibration.pseudo_inverse())
    est = np.clip(freqs[:, 0], 0.0, 1.0)
    return (est, hists) if return_histograms else est


def kernel_shots(angle_i, angle_j, spec, shots=DEFAULT_SHOTS, seed=0, noise=None, calibration=None):
    """Frequency of ``0...0`` in a sampled inversion test, optionally readout-mitigated."""
    return float(kernel_shots_batch(angle_i, angle_j, spec, shots, [seed], noise, calibration)[0])

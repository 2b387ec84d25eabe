"""Steering vectors, LoS channels, calibration errors and training sweeps.

Geometry convention: element ``n`` (``n = 0 .. N-1``) sits at axis coordinate
``u_n = ((N-1)/2 - n) d`` relative to the array centre, and a ``PolarPoint``
is measured from that centre. With this orientation the exact spherical
steering vector

    b_n(theta, r) = exp(-j k (r_n - r)) / sqrt(N),
    r_n = sqrt(r^2 + u_n^2 - 2 r u_n sin(theta)),

tends to the planar ``a_n(theta) = exp(-j k d n sin(theta)) / sqrt(N)`` (up to
a global phase) as ``r`` grows, so DFT beams and near-field beams agree on the
sign of the angle. Shifting the index origin of ``a`` only changes a global
phase, which leaves every ``|.|^2`` quantity untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from nfbeam.geometry import ArrayConfig, PolarPoint, path_loss_amplitude


def element_positions(cfg: ArrayConfig) -> np.ndarray:
    n = np.arange(cfg.n_elements)
    return ((cfg.n_elements - 1) / 2 - n) * cfg.element_spacing


def ff_steering(cfg: ArrayConfig, theta) -> np.ndarray:
    """Planar-wavefront steering vector ``a(theta)``.

    ``theta`` may be an array, in which case the result has shape
    ``(N, len(theta))`` (one column per angle).
    """
    n = np.arange(cfg.n_elements)
    sin_t = np.sin(np.asarray(theta, dtype=float))
    phase = -cfg.wavenumber * cfg.element_spacing * np.multiply.outer(n, sin_t)
    return np.exp(1j * phase) / math.sqrt(cfg.n_elements)


def nf_steering(cfg: ArrayConfig, p: PolarPoint) -> np.ndarray:
    """Exact spherical-wavefront steering vector ``b(theta, r)`` (no Fresnel expansion)."""
    return nf_steering_many(cfg, np.array([p.angle]), np.array([p.range]))[:, 0]


def nf_steering_many(cfg: ArrayConfig, theta, r) -> np.ndarray:
    """Columns ``b(theta_i, r_i)`` for paired angle/range arrays, shape ``(N, M)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    u = element_positions(cfg)[:, None]
    rn = np.sqrt(r**2 + u**2 - 2 * r * u * np.sin(theta))
    return np.exp(-1j * cfg.wavenumber * (rn - r)) / math.sqrt(cfg.n_elements)


@dataclass(frozen=True)
class ChannelRealization:
    """Single-path LoS channel ``h = g sqrt(N) b(theta, r)``."""

    vector: np.ndarray
    location: PolarPoint
    complex_gain: complex
    includes_path_loss: bool


def los_channel(cfg: ArrayConfig, p: PolarPoint, include_path_loss: bool = False) -> ChannelRealization:
    """Deterministic LoS channel at ``p``.

    The complex gain is ``e^{-j k r}``, times ``lambda / (4 pi r)`` when
    ``include_path_loss`` is set.
    """
    g = complex(np.exp(-1j * cfg.wavenumber * p.range))
    if include_path_loss:
        g *= path_loss_amplitude(cfg, p.range)
    h = g * math.sqrt(cfg.n_elements) * nf_steering(cfg, p)
    return ChannelRealization(h, p, g, include_path_loss)


class Granularity(str, Enum):
    ELEMENT = "element"
    SUBARRAY = "subarray"


@dataclass(frozen=True)
class CalibrationError:
    """Per-element (or per-subarray) gain/phase mismatch of the array.

    Phases are drawn from U[0, phase_bound], amplitudes from
    U[amplitude_low, amplitude_high].
    """

    phase_bound: float = math.pi / 8
    amplitude_low: float = 0.0
    amplitude_high: float = 1.0
    granularity: Granularity = Granularity.ELEMENT
    subarray_size: int = 1

    def __post_init__(self):
        if not 0 <= self.phase_bound <= math.pi:
            raise ValueError("phase_bound must lie in [0, pi]")
        if not 0 <= self.amplitude_low <= self.amplitude_high:
            raise ValueError("need 0 <= amplitude_low <= amplitude_high")
        if self.subarray_size < 1:
            raise ValueError("subarray_size must be >= 1")
        object.__setattr__(self, "granularity", Granularity(self.granularity))

    def draw(self, n_elements: int, rng: np.random.Generator) -> np.ndarray:
        """One realization of the per-element multipliers ``alpha e^{j phi}``."""
        block = self.subarray_size if self.granularity is Granularity.SUBARRAY else 1
        n_blocks = -(-n_elements // block)
        phi = rng.uniform(0.0, self.phase_bound, n_blocks)
        alpha = rng.uniform(self.amplitude_low, self.amplitude_high, n_blocks)
        return np.repeat(alpha * np.exp(1j * phi), block)[:n_elements]


def apply_calibration_errors(w, err: CalibrationError, rng: np.random.Generator) -> np.ndarray:
    """Multiply each element of ``w`` by a fresh ``alpha e^{j phi}`` draw.

    For a whole codebook sharing one array realization, draw once with
    ``err.draw`` and multiply the codebook matrix row-wise instead.
    """
    w = np.asarray(w)
    return w * err.draw(w.shape[0], rng)


@dataclass(frozen=True)
class GainProfile:
    """Per-beam received power, aligned with a codebook's order."""

    power: np.ndarray
    measurements: np.ndarray | None = None
    source: str = "analytic"

    def __post_init__(self):
        if np.any(self.power < 0):
            raise ValueError("powers must be nonnegative")

    def __len__(self) -> int:
        return len(self.power)


def receive_beam_profile(
    h: ChannelRealization,
    book,
    noise_variance: float,
    rng: np.random.Generator | None = None,
    *,
    weights: np.ndarray | None = None,
) -> GainProfile:
    """Sweep ``book`` against ``h``: ``y_p = w_p^H h + w_p^H n`` with unit pilots.

    ``weights`` holds per-element calibration multipliers: shape ``(N,)``
    distorts every codeword alike, shape ``(N, P)`` gives each codeword its
    own realization. Noise is the scalar ``w_p^H n`` with variance
    ``noise_variance * ||w_p||^2``; draws are consumed in pilot order, so two
    sweeps of equal length seeded alike see the same noise per pilot.
    """
    W = book.matrix if hasattr(book, "matrix") else np.asarray(book)
    if W.shape[0] != h.vector.shape[0]:
        raise ValueError(f"codeword length {W.shape[0]} != channel length {h.vector.shape[0]}")
    if weights is not None:
        weights = np.asarray(weights)
        W = W * (weights if weights.ndim == 2 else weights[:, None])
    y = W.conj().T @ h.vector
    if noise_variance > 0:
        if rng is None:
            raise ValueError("noisy sweep needs an rng")
        z = (rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y))) / math.sqrt(2)
        y = y + z * np.sqrt(noise_variance) * np.linalg.norm(W, axis=0)
    return GainProfile(np.abs(y) ** 2, y, source="simulated")

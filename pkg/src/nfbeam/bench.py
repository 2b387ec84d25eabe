"""Beam-training schemes, achievable rate and pilot accounting.

Every search picks its beam from *measured* sweep power, so noise hits the
baselines and CI-DFT the same way. Calibration errors are a property of the
array: one realization (per-element ``weights``) distorts every beam the
array forms during a trial, i.e. the training sweep and the data beam. The
distorted data beam is rescaled to unit norm so the transmit power stays
``P_t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from nfbeam.channel import CalibrationError, los_channel, nf_steering, receive_beam_profile
from nfbeam.cidft import SpreadLookupTable, run_cidft
from nfbeam.codebook import (
    Cell,
    Codebook,
    Codeword,
    CodewordKind,
    hierarchy_root,
    tile_codebook,
)
from nfbeam.geometry import ArrayConfig, PolarPoint, path_loss_amplitude


class Scheme(str, Enum):
    PERFECT_CSI = "PerfectCSI"
    EXHAUSTIVE = "Exhaustive"
    HIERARCHICAL = "Hierarchical"
    FAR_FIELD = "FarField"
    CIDFT = "CIDFT"


OVERHEAD_FORMULA = {
    Scheme.PERFECT_CSI: "0",
    Scheme.EXHAUSTIVE: "psi*S",
    Scheme.HIERARCHICAL: "Nx*Ny*K",
    Scheme.FAR_FIELD: "psi",
    Scheme.CIDFT: "psi",
}


def overhead(scheme: Scheme, psi: int = 0, S: int = 0, nx: int = 0, ny: int = 0, K: int = 0) -> int:
    """Training pilots per scheme.

    The hierarchical count is ``Nx * Ny * K`` (625 codewords per level,
    two levels -> 1250).
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.EXHAUSTIVE:
        return psi * S
    if scheme in (Scheme.FAR_FIELD, Scheme.CIDFT):
        return psi
    if scheme is Scheme.HIERARCHICAL:
        return nx * ny * K
    return 0


@dataclass(frozen=True)
class SchemeResult:
    scheme: Scheme
    chosen: Codeword
    rate: float
    pilots: int
    gain: float = math.nan
    d_sin_err: float = math.nan
    d_range_err: float = math.nan


def rate(
    cfg: ArrayConfig,
    ue: PolarPoint,
    w,
    tx_power: float,
    noise_variance: float,
    include_path_loss: bool = False,
) -> float:
    """``log2(1 + P_t N |b^H(ue) w|^2 / sigma^2)`` with the exact steering vector.

    With ``include_path_loss`` the gain is scaled by the free-space amplitude
    ``(lambda / 4 pi r)^2``; by default the normalized channel is used.
    A noiseless link (``noise_variance == 0``) has infinite rate.
    """
    if tx_power == 0:
        return 0.0
    gain = beam_gain(cfg, ue, w)
    if include_path_loss:
        gain *= path_loss_amplitude(cfg, ue.range) ** 2
    if noise_variance == 0:
        return math.inf if gain > 0 else 0.0
    return math.log2(1 + tx_power * cfg.n_elements * gain / noise_variance)


def beam_gain(cfg: ArrayConfig, ue: PolarPoint, w) -> float:
    """``|b^H(ue) w|^2`` with the exact steering vector."""
    vec = w.vector if isinstance(w, Codeword) else np.asarray(w)
    return float(abs(np.vdot(nf_steering(cfg, ue), vec)) ** 2)


def radiated_beam(w, weights: np.ndarray | None = None) -> np.ndarray:
    """Beam actually formed by a miscalibrated array, rescaled to unit norm."""
    vec = w.vector if isinstance(w, Codeword) else np.asarray(w)
    if weights is None:
        return vec
    out = vec * weights
    norm = np.linalg.norm(out)
    if norm == 0:
        return out
    return out / norm


def _errors(ue: PolarPoint, word: Codeword) -> tuple[float, float]:
    d_sin = abs(math.sin(word.beam_angle) - ue.sin)
    if word.kind is CodewordKind.FAR_FIELD_DFT:
        return d_sin, math.nan
    return d_sin, abs(word.focus_range - ue.range)


def _sweep_argmax(cfg, ue, book: Codebook, noise_variance, tx_power, rng, weights) -> int:
    h = los_channel(cfg, ue)
    profile = receive_beam_profile(h, book, noise_variance / tx_power, rng, weights=weights)
    return int(np.argmax(profile.power))


def _result(scheme, cfg, ue, word, pilots, tx_power, noise_variance, weights=None) -> SchemeResult:
    d_sin, d_r = _errors(ue, word)
    beam = radiated_beam(word, weights)
    r = rate(cfg, ue, beam, tx_power, noise_variance)
    return SchemeResult(scheme, word, r, pilots, beam_gain(cfg, ue, beam), d_sin, d_r)


def perfect_csi(
    cfg: ArrayConfig,
    ue: PolarPoint,
    noise_variance: float,
    tx_power: float = 1.0,
    weights: np.ndarray | None = None,
) -> SchemeResult:
    """Genie beam ``b(ue)``; no training."""
    word = Codeword(nf_steering(cfg, ue), CodewordKind.NEAR_FIELD_POLAR, ue.angle, ue.range)
    return _result(Scheme.PERFECT_CSI, cfg, ue, word, 0, tx_power, noise_variance, weights)


def polar_book_dims(book: Codebook) -> tuple[int, int]:
    """(psi, S): number of angles and the largest per-angle range count."""
    counts = np.bincount(book.column)
    return len(counts), int(counts.max())


def exhaustive_search(
    cfg: ArrayConfig,
    ue: PolarPoint,
    polar_book: Codebook,
    noise_variance: float,
    rng: np.random.Generator | None = None,
    tx_power: float = 1.0,
    weights: np.ndarray | None = None,
) -> SchemeResult:
    """Sweep the whole polar codebook and keep the strongest beam."""
    k = _sweep_argmax(cfg, ue, polar_book, noise_variance, tx_power, rng, weights)
    psi, S = polar_book_dims(polar_book)
    return _result(Scheme.EXHAUSTIVE, cfg, ue, polar_book[k], overhead(Scheme.EXHAUSTIVE, psi, S), tx_power, noise_variance, weights)


def farfield_search(
    cfg: ArrayConfig,
    ue: PolarPoint,
    dft_book: Codebook,
    noise_variance: float,
    rng: np.random.Generator | None = None,
    tx_power: float = 1.0,
    weights: np.ndarray | None = None,
) -> SchemeResult:
    """Sweep the DFT codebook and keep the strongest (unfocused) beam."""
    k = _sweep_argmax(cfg, ue, dft_book, noise_variance, tx_power, rng, weights)
    return _result(
        Scheme.FAR_FIELD, cfg, ue, dft_book[k], overhead(Scheme.FAR_FIELD, len(dft_book)), tx_power, noise_variance, weights
    )


@dataclass
class HierarchicalTrace:
    cells: list[Cell]
    picks: list[int]


def hierarchical_search(
    cfg: ArrayConfig,
    ue: PolarPoint,
    levels: int,
    nx: int,
    ny: int,
    noise_variance: float,
    rng: np.random.Generator | None = None,
    tx_power: float = 1.0,
    weights: np.ndarray | None = None,
    root: Cell | None = None,
    first_level: Codebook | None = None,
    trace: HierarchicalTrace | None = None,
) -> SchemeResult:
    """Greedy coarse-to-fine search over a Cartesian grid codebook.

    Each level sweeps ``nx * ny`` focused beams over the current cell and
    descends into the winner. ``first_level`` lets callers reuse the
    (user-independent) level-1 book across trials.
    """
    cell = root or hierarchy_root(cfg)
    book = first_level if first_level is not None else tile_codebook(cfg, cell, nx, ny)
    k = 0
    for level in range(levels):
        if level > 0:
            book = tile_codebook(cfg, cell, nx, ny)
        k = _sweep_argmax(cfg, ue, book, noise_variance, tx_power, rng, weights)
        cell = book.cells[k]
        if trace is not None:
            trace.cells.append(cell)
            trace.picks.append(k)
    return _result(
        Scheme.HIERARCHICAL, cfg, ue, book[k], overhead(Scheme.HIERARCHICAL, nx=nx, ny=ny, K=levels), tx_power, noise_variance, weights
    )


def cidft_scheme(
    cfg: ArrayConfig,
    ue: PolarPoint,
    table: SpreadLookupTable,
    noise_variance: float,
    calibration: CalibrationError | None = None,
    rng: np.random.Generator | None = None,
    tx_power: float = 1.0,
    weights: np.ndarray | None = None,
) -> SchemeResult:
    """DFT sweep, spread lookup, then the focused beam at the estimated cell.

    A ``calibration`` model without explicit ``weights`` is realized from
    ``rng`` before the sweep.
    """
    if weights is None and calibration is not None:
        if rng is None:
            raise ValueError("calibration errors need an rng")
        weights = calibration.draw(cfg.n_elements, rng)
    est = run_cidft(cfg, ue, table, noise_variance / tx_power, rng=rng, weights=weights)
    return _result(
        Scheme.CIDFT, cfg, ue, est.chosen_codeword, overhead(Scheme.CIDFT, len(table.book)), tx_power, noise_variance, weights
    )

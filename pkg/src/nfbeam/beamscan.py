"""DFT beam gain seen by a near-field user, and angular-spread extraction."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from nfbeam.channel import GainProfile, ff_steering, nf_steering
from nfbeam.codebook import BookKind, Codebook
from nfbeam.geometry import ArrayConfig, PolarPoint
from nfbeam.numerics import fresnel

__all__ = [
    "GainProfile",
    "NoSignalError",
    "SpreadMeasure",
    "angular_spread",
    "dft_profile",
    "fresnel_gammas",
    "gain_exact",
    "gain_fresnel",
    "write_profile_csv",
]


class NoSignalError(ValueError):
    pass


def gain_exact(cfg: ArrayConfig, ue: PolarPoint, theta_n):
    """``|b^H(ue) a(theta_n)|^2`` with the exact spherical steering vector."""
    b = nf_steering(cfg, ue)
    g = np.abs(b.conj() @ ff_steering(cfg, theta_n)) ** 2
    return float(g) if np.ndim(g) == 0 else g


def fresnel_gammas(cfg: ArrayConfig, ue: PolarPoint, theta_n):
    """Arguments ``(gamma_1, gamma_2)`` of the Fresnel-form gain."""
    d = cfg.element_spacing
    cos2 = math.cos(ue.angle) ** 2
    g1 = np.sqrt(ue.range / (d * cos2)) * (np.sin(theta_n) - math.sin(ue.angle))
    g2 = cfg.n_elements / 2 * math.sqrt(d * cos2 / ue.range)
    return g1, g2


def gain_fresnel(cfg: ArrayConfig, ue: PolarPoint, theta_n):
    """Closed-form DFT beam gain ``|(C_bar + j S_bar) / (2 gamma_2)|^2``.

    ``C_bar = C(g1 + g2) - C(g1 - g2)``, likewise ``S_bar``. Valid for
    half-wavelength spacing only; the quadratic (Fresnel) phase expansion
    drops third-order terms, so it degrades close to the array off boresight.
    """
    g = gain_fresnel_column(cfg, ue.angle, np.array([ue.range]), theta_n)[0]
    return float(g) if np.ndim(g) == 0 else g


def gain_fresnel_column(cfg: ArrayConfig, theta_u: float, ranges, theta_n) -> np.ndarray:
    """Fresnel-form gain for several ranges at one user angle, shape ``(len(ranges), *theta_n.shape)``."""
    if not cfg.half_wavelength:
        raise ValueError("Fresnel-form gain requires lambda/2 element spacing")
    d = cfg.element_spacing
    cos2 = math.cos(theta_u) ** 2
    r = np.asarray(ranges, dtype=float).reshape((-1,) + (1,) * np.ndim(theta_n))
    g1 = np.sqrt(r / (d * cos2)) * (np.sin(theta_n) - math.sin(theta_u))
    g2 = cfg.n_elements / 2 * np.sqrt(d * cos2 / r)
    cp, sp = fresnel(g1 + g2)
    cm, sm = fresnel(g1 - g2)
    return ((cp - cm) ** 2 + (sp - sm) ** 2) / (2 * g2) ** 2


def dft_profile(cfg: ArrayConfig, ue: PolarPoint, book: Codebook, mode: str = "exact") -> GainProfile:
    """Noiseless per-beam gain over a DFT codebook."""
    if book.kind is not BookKind.DFT:
        raise ValueError(f"dft_profile needs a DFT codebook, got {book.kind.value}")
    if mode == "exact":
        power = np.abs(nf_steering(cfg, ue).conj() @ book.matrix) ** 2
    elif mode == "fresnel":
        power = gain_fresnel(cfg, ue, book.angles)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return GainProfile(np.atleast_1d(power), source="analytic")


@dataclass(frozen=True)
class SpreadMeasure:
    """3 dB angular spread of one sweep.

    ``first``/``last`` bound the above-half-peak beams (interior dips
    included); ``width_sin`` spans them in sin(theta) plus one beam spacing,
    so a lone beam has width 2/N. ``median_sin`` is the power-weighted
    median direction over that extent: by stationary phase each beam's power
    is proportional to the stretch of aperture steering into it, so the
    weighted median tracks the direction seen from the array centre even
    when the spread is skewed close to the array.
    """

    first: int
    last: int
    n_members: int
    width_sin: float
    median_sin: float
    peak_power: float

    @property
    def member_indices(self) -> range:
        return range(self.first, self.last + 1)

    @property
    def n_beams(self) -> int:
        return self.last - self.first + 1


def angular_spread(profile: GainProfile, book: Codebook, max_gap: int | None = None) -> SpreadMeasure:
    """3 dB angular spread of ``profile``: every beam above half the measured peak.

    The near-field plateau ripples, so beams inside the spread can dip under
    the threshold; the spread is therefore the extent of the above-threshold
    set. With ``max_gap`` set, only the cluster around the peak whose
    internal gaps are at most ``max_gap`` beams is kept, which sheds
    isolated noise spikes far from the plateau.
    """
    p = np.asarray(profile.power)
    if p.size == 0:
        raise NoSignalError("empty profile")
    if len(p) != len(book):
        raise ValueError("profile and codebook lengths differ")
    k = int(np.argmax(p))
    peak = float(p[k])
    if not peak > 0:
        raise NoSignalError("profile carries no power")
    members = np.flatnonzero(p > 0.5 * peak)
    if max_gap is not None:
        gaps = np.flatnonzero(np.diff(members) > max_gap + 1)
        starts = np.r_[0, gaps + 1]
        ends = np.r_[gaps, len(members) - 1]
        pos = int(np.searchsorted(members, k))
        c = int(np.searchsorted(ends, pos))
        members = members[starts[c] : ends[c] + 1]
    lo, hi = int(members[0]), int(members[-1])
    s = np.sin(book.angles)
    spacing = 2 / book.matrix.shape[0]
    return SpreadMeasure(
        first=lo,
        last=hi,
        n_members=len(members),
        width_sin=float(s[hi] - s[lo] + spacing),
        median_sin=_weighted_median(s[lo : hi + 1], p[lo : hi + 1]),
        peak_power=peak,
    )


def _weighted_median(x: np.ndarray, w: np.ndarray) -> float:
    c = np.cumsum(w) / np.sum(w)
    i = int(np.searchsorted(c, 0.5 - 1e-12))
    if i + 1 < len(x) and abs(c[i] - 0.5) <= 1e-9:
        # cumulative weight splits exactly between two beams
        return float((x[i] + x[i + 1]) / 2)
    return float(x[i])


def write_profile_csv(path, profile: GainProfile, book: Codebook) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["beam_index", "sin_theta", "power"])
        for i, (s, p) in enumerate(zip(np.sin(book.angles), profile.power)):
            w.writerow([i, repr(float(s)), repr(float(p))])

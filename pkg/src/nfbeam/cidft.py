"""Angular-spread lookup table and correlative-interferometry location estimate.

The table is built offline from the closed-form (Fresnel) DFT gain on a polar
grid: the angles of the DFT codebook, and beamdepth-spaced ranges from 2D out
to the EBRD. Online, the user measures the 3 dB spread of the real (noisy)
sweep and matches it against the table: the spread's median picks the angle
column, and the spread's width picks the range within that column.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nfbeam.beamscan import SpreadMeasure, angular_spread, gain_fresnel_column
from nfbeam.channel import CalibrationError, GainProfile, los_channel, nf_steering, receive_beam_profile
from nfbeam.codebook import Codebook, Codeword, CodewordKind, dft_codebook, range_samples
from nfbeam.geometry import ArrayConfig, PolarPoint


class FingerprintMismatch(ValueError):
    pass


def _fingerprint(cfg: ArrayConfig, sin_min: float, sin_max: float) -> dict:
    fp = cfg.fingerprint()
    fp.update(sin_min=sin_min, sin_max=sin_max)
    return fp


def _same_fingerprint(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    return all(math.isclose(float(a[k]), float(b[k]), rel_tol=1e-9, abs_tol=1e-12) for k in a)


@dataclass(frozen=True)
class SpreadLookupTable:
    """Flat storage of table cells; ``column[j]`` is the angle index of cell ``j``.

    Cells are ordered by angle index, then by increasing range.
    """

    angle_sin: np.ndarray
    column: np.ndarray
    range_index: np.ndarray
    range_m: np.ndarray
    width_sin: np.ndarray
    median_sin: np.ndarray
    degenerate: frozenset
    fingerprint: dict
    book: Codebook = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.range_m)

    @property
    def angles(self) -> np.ndarray:
        return np.arcsin(self.angle_sin)

    def column_cells(self, i: int) -> np.ndarray:
        lo, hi = np.searchsorted(self.column, [i, i + 1])
        return np.arange(lo, hi)

    def cell_location(self, j: int) -> PolarPoint:
        return PolarPoint(float(np.arcsin(self.angle_sin[self.column[j]])), float(self.range_m[j]))

    def save(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            fh.write("# fingerprint: " + json.dumps(self.fingerprint, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["angle_index", "sin_theta", "range_index", "range_m", "width_sin", "median_sin"])
            for j in range(len(self)):
                i = int(self.column[j])
                w.writerow(
                    [
                        i,
                        repr(float(self.angle_sin[i])),
                        int(self.range_index[j]),
                        repr(float(self.range_m[j])),
                        repr(float(self.width_sin[j])),
                        repr(float(self.median_sin[j])),
                    ]
                )

    @classmethod
    def load(cls, path, cfg: ArrayConfig) -> "SpreadLookupTable":
        with Path(path).open() as fh:
            head = fh.readline()
            if not head.startswith("# fingerprint: "):
                raise ValueError(f"{path}: missing fingerprint header")
            fp = json.loads(head[len("# fingerprint: ") :])
            rows = list(csv.DictReader(fh))
        expected = _fingerprint(cfg, fp.get("sin_min", -1.0), fp.get("sin_max", 1.0))
        if not _same_fingerprint(fp, expected):
            raise FingerprintMismatch(f"{path} was built for {fp}, not {expected}")
        book = dft_codebook(cfg, fp["sin_min"], fp["sin_max"])
        column = np.array([int(r["angle_index"]) for r in rows])
        ridx = np.array([int(r["range_index"]) for r in rows])
        counts = np.bincount(column, minlength=len(book))
        degenerate = frozenset(i for i in range(len(book)) if counts[i] == 1 and range_samples(cfg, book.angles[i])[1])
        return cls(
            angle_sin=np.sin(book.angles),
            column=column,
            range_index=ridx,
            range_m=np.array([float(r["range_m"]) for r in rows]),
            width_sin=np.array([float(r["width_sin"]) for r in rows]),
            median_sin=np.array([float(r["median_sin"]) for r in rows]),
            degenerate=degenerate,
            fingerprint=fp,
            book=book,
        )


def build_lookup_table(cfg: ArrayConfig, sin_min: float = -1.0, sin_max: float = 1.0) -> SpreadLookupTable:
    """Tabulate the analytic 3 dB spread over the DFT angle grid and beamdepth ranges.

    The spread of each cell is taken from the Fresnel-form profile over the
    same DFT codebook the online sweep uses, so coverage-edge truncation is
    reproduced in the table.
    """
    if not cfg.half_wavelength:
        raise ValueError("lookup table requires lambda/2 element spacing")
    book = dft_codebook(cfg, sin_min, sin_max)
    column, ridx, ranges, widths, medians = [], [], [], [], []
    degenerate = set()
    for i, theta in enumerate(book.angles):
        rs, deg = range_samples(cfg, float(theta))
        if deg:
            degenerate.add(i)
        gains = gain_fresnel_column(cfg, float(theta), rs, book.angles)
        for s, r in enumerate(rs):
            sm = angular_spread(GainProfile(gains[s]), book)
            column.append(i)
            ridx.append(s)
            ranges.append(r)
            widths.append(sm.width_sin)
            medians.append(sm.median_sin)
    return SpreadLookupTable(
        angle_sin=np.sin(book.angles),
        column=np.array(column),
        range_index=np.array(ridx),
        range_m=np.array(ranges),
        width_sin=np.array(widths),
        median_sin=np.array(medians),
        degenerate=frozenset(degenerate),
        fingerprint=_fingerprint(cfg, sin_min, sin_max),
        book=book,
    )


def load_or_build_table(cfg: ArrayConfig, sin_min: float, sin_max: float, cache_dir=None) -> SpreadLookupTable:
    """Reuse a table saved under ``cache_dir`` when its fingerprint matches."""
    if cache_dir is None:
        return build_lookup_table(cfg, sin_min, sin_max)
    cache_dir = Path(cache_dir)
    name = f"lut_f{cfg.carrier_frequency:.6g}_n{cfg.n_elements}_d{cfg.element_spacing / cfg.wavelength:.6g}_{sin_min:.6f}_{sin_max:.6f}.csv"
    path = cache_dir / name
    if path.exists():
        try:
            return SpreadLookupTable.load(path, cfg)
        except (FingerprintMismatch, ValueError, KeyError):
            pass
    table = build_lookup_table(cfg, sin_min, sin_max)
    cache_dir.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


@dataclass(frozen=True)
class LocationEstimate:
    theta_hat: float
    r_hat: float
    matched_cell: tuple[int, int]
    chosen_codeword: Codeword
    measured: SpreadMeasure | None = None
    pilots: int = 0


def estimate_location(
    measured: SpreadMeasure,
    table: SpreadLookupTable,
    cfg: ArrayConfig | None = None,
) -> LocationEstimate:
    """Match a measured spread against the table.

    Angle: the column whose grid angle is nearest the spread median. Range:
    the cell in that column maximizing ``cos(width - K)``; all widths lie in
    [0, 2] so this is the cell with the nearest width, ties going to the
    smaller range.
    """
    if measured is None or measured.n_beams < 1:
        raise ValueError("empty measurement")
    if cfg is not None and not _same_fingerprint(
        table.fingerprint, _fingerprint(cfg, table.fingerprint["sin_min"], table.fingerprint["sin_max"])
    ):
        raise FingerprintMismatch("table was built for a different array")
    i = int(np.argmin(np.abs(table.angle_sin - measured.median_sin)))
    cells = table.column_cells(i)
    score = np.cos(measured.width_sin - table.width_sin[cells])
    # argmax returns the first maximum, i.e. the smallest range on ties
    j = int(cells[np.argmax(score)])
    loc = table.cell_location(j)
    n = table.book.matrix.shape[0]
    if cfg is None:
        cfg = ArrayConfig(
            carrier_frequency=table.fingerprint["frequency_hz"],
            n_elements=n,
        )
    word = Codeword(nf_steering(cfg, loc), CodewordKind.NEAR_FIELD_POLAR, loc.angle, loc.range)
    return LocationEstimate(loc.angle, loc.range, (i, int(table.range_index[j])), word, measured)


def run_cidft(
    cfg: ArrayConfig,
    ue: PolarPoint,
    table: SpreadLookupTable,
    noise_variance: float = 0.0,
    calibration: CalibrationError | None = None,
    rng: np.random.Generator | None = None,
    *,
    cal_rng: np.random.Generator | None = None,
    weights: np.ndarray | None = None,
) -> LocationEstimate:
    """Full CI-DFT training round for a user at ``ue``.

    Sweeps the table's DFT codebook (optionally through a calibration-error
    realization drawn from ``cal_rng``, falling back to ``rng``), measures
    the spread and looks it up. A ready-made realization can be passed as
    ``weights`` instead. Costs one pilot per DFT beam.
    """
    h = los_channel(cfg, ue)
    if weights is None and calibration is not None:
        weights = calibration.draw(cfg.n_elements, cal_rng if cal_rng is not None else rng)
    profile = receive_beam_profile(h, table.book, noise_variance, rng, weights=weights)
    measured = angular_spread(profile, table.book)
    est = estimate_location(measured, table, cfg)
    return LocationEstimate(est.theta_hat, est.r_hat, est.matched_cell, est.chosen_codeword, measured, len(table.book))

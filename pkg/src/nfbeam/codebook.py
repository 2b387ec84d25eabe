"""DFT, polar and hierarchical (stand-in) codebooks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from nfbeam.channel import ff_steering, nf_steering_many
from nfbeam.geometry import UNBOUNDED, ArrayConfig, PolarPoint, beamdepth, ebrd

PAPER_SIN_MAX = math.sqrt(3) / 2


class CodewordKind(str, Enum):
    FAR_FIELD_DFT = "dft"
    NEAR_FIELD_POLAR = "polar"


class BookKind(str, Enum):
    DFT = "dft"
    POLAR = "polar"
    HIERARCHICAL = "hierarchical"


@dataclass(frozen=True)
class Codeword:
    vector: np.ndarray
    kind: CodewordKind
    beam_angle: float
    focus_range: object  # float metres, or UNBOUNDED for DFT beams

    @property
    def location(self) -> PolarPoint:
        if self.focus_range is UNBOUNDED:
            raise ValueError("DFT codeword has no focus point")
        return PolarPoint(self.beam_angle, self.focus_range)


@dataclass(frozen=True)
class Cell:
    """Axis-aligned rectangle in (x along array, y broadside), metres."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2

    def contains(self, x: float, y: float, tol: float = 1e-12) -> bool:
        return (self.x_min - tol <= x <= self.x_max + tol) and (self.y_min - tol <= y <= self.y_max + tol)

    def split(self, nx: int, ny: int) -> list["Cell"]:
        xs = np.linspace(self.x_min, self.x_max, nx + 1)
        ys = np.linspace(self.y_min, self.y_max, ny + 1)
        return [Cell(xs[i], xs[i + 1], ys[j], ys[j + 1]) for j in range(ny) for i in range(nx)]


@dataclass(frozen=True)
class Codebook:
    """Codewords stored column-wise in ``matrix`` (shape ``(N, P)``).

    ``ranges`` holds ``inf`` for unfocused DFT beams. For polar books
    ``column`` gives the angle-group index of each codeword.
    """

    matrix: np.ndarray
    angles: np.ndarray
    ranges: np.ndarray
    kind: BookKind
    column: np.ndarray | None = None
    cells: tuple[Cell, ...] | None = None
    degenerate: frozenset = field(default_factory=frozenset)

    def __len__(self) -> int:
        return self.matrix.shape[1]

    def __getitem__(self, i: int) -> Codeword:
        r = self.ranges[i]
        if np.isinf(r):
            return Codeword(self.matrix[:, i], CodewordKind.FAR_FIELD_DFT, float(self.angles[i]), UNBOUNDED)
        return Codeword(self.matrix[:, i], CodewordKind.NEAR_FIELD_POLAR, float(self.angles[i]), float(r))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def sin_grid(self) -> np.ndarray:
        """Sorted distinct beam directions in sin(theta)."""
        return np.unique(np.round(np.sin(self.angles), 12))

    @property
    def beamwidth(self) -> np.ndarray:
        """3 dB beamwidth ``2 / (N cos theta)`` of each codeword (descriptive only)."""
        n = self.matrix.shape[0]
        return 2 / (n * np.cos(self.angles))

    def to_csv(self, path, dump_path=None) -> None:
        """Write codeword metadata to ``path`` and the complex entries to ``dump_path``.

        The dump has one row per codeword holding interleaved ``re,im`` pairs.
        """
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "kind", "beam_angle_rad", "sin_theta", "focus_range_m"])
            for i in range(len(self)):
                kind = "dft" if np.isinf(self.ranges[i]) else "polar"
                rng = "inf" if np.isinf(self.ranges[i]) else repr(float(self.ranges[i]))
                w.writerow([i, kind, repr(float(self.angles[i])), repr(float(np.sin(self.angles[i]))), rng])
        if dump_path is not None:
            inter = np.empty((len(self), 2 * self.matrix.shape[0]))
            inter[:, 0::2] = self.matrix.T.real
            inter[:, 1::2] = self.matrix.T.imag
            np.savetxt(dump_path, inter, delimiter=",", fmt="%.17g")


def beam_count(n_elements: int, sin_min: float, sin_max: float) -> int:
    """Number of 2/N-wide beams needed to tile ``[sin_min, sin_max]``.

    Rounded up so the beams cover the whole interval; an exact multiple
    (e.g. the full range, N beams) is not bumped by float noise.
    """
    span = abs(sin_max - sin_min) / (2 / n_elements)
    return max(1, math.ceil(span - 1e-9))


def dft_sin_grid(n_elements: int, sin_min: float, sin_max: float) -> np.ndarray:
    """Beam centres ``sin_min + (n + 1/2) 2/N`` for ``n < psi``."""
    if not (-1 <= sin_min < sin_max <= 1):
        raise ValueError(f"invalid coverage interval [{sin_min}, {sin_max}]")
    psi = beam_count(n_elements, sin_min, sin_max)
    grid = sin_min + (np.arange(psi) + 0.5) * (2 / n_elements)
    return np.clip(grid, -1 + 1e-15, 1 - 1e-15)


def dft_codebook(cfg: ArrayConfig, sin_min: float = -1.0, sin_max: float = 1.0) -> Codebook:
    """DFT beams spaced 2/N in sin(theta), the first half a spacing above ``sin_min``.

    With the count rounded up the last beam can sit slightly past
    ``sin_max`` (0.8644 vs 0.8660 for the 222-beam sector at N = 256).
    """
    angles = np.arcsin(dft_sin_grid(cfg.n_elements, sin_min, sin_max))
    return Codebook(
        matrix=ff_steering(cfg, angles),
        angles=angles,
        ranges=np.full(len(angles), np.inf),
        kind=BookKind.DFT,
    )


def range_samples(cfg: ArrayConfig, theta: float) -> tuple[list[float], bool]:
    """Beamdepth-spaced focus ranges for one angle, starting at 2D.

    Emit the current range, then advance by its beamdepth; stop once the
    next range passes the EBRD or the beamdepth is unbounded. Returns the
    ranges and a flag marking angles whose EBRD lies inside 2D (a single
    sample at 2D is kept for those).
    """
    r = 2 * cfg.aperture
    limit = ebrd(cfg, theta)
    if r > limit:
        return [r], True
    out = []
    while r <= limit:
        out.append(r)
        depth = beamdepth(cfg, theta, r)
        if depth is UNBOUNDED or depth <= 0:
            break
        r = r + depth
    return out, False


def polar_codebook(cfg: ArrayConfig, sin_min: float = -1.0, sin_max: float = 1.0) -> Codebook:
    """Near-field codebook on the DFT angle grid with beamdepth range sampling."""
    grid = np.arcsin(dft_sin_grid(cfg.n_elements, sin_min, sin_max))
    angles, ranges, column, degenerate = [], [], [], set()
    for i, theta in enumerate(grid):
        rs, deg = range_samples(cfg, theta)
        if deg:
            degenerate.add(i)
        angles += [theta] * len(rs)
        ranges += rs
        column += [i] * len(rs)
    angles = np.array(angles)
    ranges = np.array(ranges)
    return Codebook(
        matrix=nf_steering_many(cfg, angles, ranges),
        angles=angles,
        ranges=ranges,
        kind=BookKind.POLAR,
        column=np.array(column),
        degenerate=frozenset(degenerate),
    )


def hierarchy_root(cfg: ArrayConfig, sin_max: float = PAPER_SIN_MAX) -> Cell:
    """Cartesian box covering the near-field sector: |x| <= EBRD(0) sin_max, y in [2D, EBRD(0)]."""
    far = ebrd(cfg, 0.0)
    half = far * sin_max
    return Cell(-half, half, 2 * cfg.aperture, far)


def tile_codebook(cfg: ArrayConfig, cell: Cell, nx: int, ny: int) -> Codebook:
    """One focused beam at the centre of each of the ``nx * ny`` sub-cells of ``cell``."""
    if nx < 1 or ny < 1:
        raise ValueError("grid must have at least one cell per axis")
    if not (cell.x_max > cell.x_min and cell.y_max > cell.y_min and cell.y_min > 0):
        raise ValueError(f"degenerate cell {cell}")
    cells = cell.split(nx, ny)
    pts = [PolarPoint.from_xy(*c.center) for c in cells]
    angles = np.array([p.angle for p in pts])
    ranges = np.array([p.range for p in pts])
    return Codebook(
        matrix=nf_steering_many(cfg, angles, ranges),
        angles=angles,
        ranges=ranges,
        kind=BookKind.HIERARCHICAL,
        cells=tuple(cells),
    )


def hierarchical_codebook(
    cfg: ArrayConfig,
    levels: int,
    nx: int,
    ny: int,
    choices: list[int] | None = None,
    root: Cell | None = None,
) -> list[Codebook]:
    """Multi-level Cartesian grid codebook.

    Level 1 tiles ``root``; level k+1 re-tiles the level-k cell picked by
    ``choices[k-1]`` (middle cell when not given). A search normally builds
    levels one at a time with ``tile_codebook`` as winners are found.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    cell = root or hierarchy_root(cfg)
    books = []
    for k in range(levels):
        book = tile_codebook(cfg, cell, nx, ny)
        books.append(book)
        pick = choices[k] if choices is not None and k < len(choices) else len(book) // 2
        cell = book.cells[pick]
    return books

"""Monte-Carlo experiment runner: config ingestion, rate sweeps and CSV reports.

Config files are TOML::

    seed = 1
    snr_db = 10.0
    schemes = ["PerfectCSI", "Exhaustive", "Hierarchical", "FarField", "CIDFT"]

    [array]
    frequency_hz = 28e9
    n_antennas = 256
    spacing_over_lambda = 0.5

    [sweep]
    kind = "distance"          # or "snr"
    points = [3, 5, 10, 20, 35]
    trials = 200

    [calibration]              # optional
    phase_max_rad = 0.3927
    amp_low = 1.0
    amp_high = 1.0

Command-line flags override the file, which overrides the defaults.

Output CSV schemas:

- ``trials.csv``: sweep_value, scheme, trial, rate_bps_hz, pilots, d_sin_err, d_range_err_m
- ``aggregate.csv``: sweep_value, scheme, mean_rate, stderr, pilots
- ``overhead.csv``: scheme, formula, value
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from nfbeam import bench
from nfbeam.bench import Scheme
from nfbeam.channel import CalibrationError, Granularity
from nfbeam.cidft import load_or_build_table
from nfbeam.codebook import PAPER_SIN_MAX, hierarchy_root, polar_codebook, tile_codebook
from nfbeam.geometry import ArrayConfig, PolarPoint, ebrd

log = logging.getLogger("nfbeam")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SCHEME_ORDER = list(Scheme)
TABLE1_ORDER = [Scheme.EXHAUSTIVE, Scheme.HIERARCHICAL, Scheme.FAR_FIELD, Scheme.CIDFT]


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ArraySection:
    frequency_hz: float = 28e9
    n_antennas: int = 256
    spacing_over_lambda: float = 0.5

    def build(self) -> ArrayConfig:
        lam = 299_792_458.0 / self.frequency_hz
        return ArrayConfig(self.frequency_hz, self.n_antennas, self.spacing_over_lambda * lam)


@dataclass(frozen=True)
class CoverageSection:
    sin_min: float = -PAPER_SIN_MAX
    sin_max: float = PAPER_SIN_MAX


DEFAULT_POINTS = {
    "distance": (3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0),
    "snr": (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0),
}


@dataclass(frozen=True)
class SweepSection:
    """Sweep kind and grid; ``points`` left unset picks the kind's default grid."""

    kind: str = "distance"
    points: tuple[float, ...] | None = None
    trials: int = 200

    @property
    def values(self) -> tuple[float, ...]:
        return self.points if self.points is not None else DEFAULT_POINTS.get(self.kind, ())


@dataclass(frozen=True)
class UESection:
    range_min_m: float = 3.0
    range_max_m: float = 35.0
    sin_min: float = -PAPER_SIN_MAX
    sin_max: float = PAPER_SIN_MAX


@dataclass(frozen=True)
class HierarchySection:
    nx: int = 25
    ny: int = 25
    levels: int = 2


@dataclass(frozen=True)
class CalibrationSection:
    phase_max_rad: float = math.pi / 8
    amp_low: float = 0.0
    amp_high: float = 1.0
    granularity: str = "element"
    subarray_size: int = 1

    def build(self) -> CalibrationError:
        return CalibrationError(self.phase_max_rad, self.amp_low, self.amp_high, Granularity(self.granularity), self.subarray_size)


@dataclass(frozen=True)
class ExperimentConfig:
    array: ArraySection = field(default_factory=ArraySection)
    coverage: CoverageSection = field(default_factory=CoverageSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    ue: UESection = field(default_factory=UESection)
    hierarchy: HierarchySection = field(default_factory=HierarchySection)
    calibration: CalibrationSection | None = None
    snr_db: float = 10.0
    tx_power: float = 1.0
    schemes: tuple[str, ...] = tuple(s.value for s in SCHEME_ORDER)
    seed: int = 1
    workers: int = 1
    table_cache: str | None = None

    @property
    def noise_variance(self) -> float:
        return self.tx_power * 10 ** (-self.snr_db / 10)

    def validate(self) -> "ExperimentConfig":
        try:
            return self._validate()
        except TypeError as e:
            raise ConfigError(f"wrong value type: {e}") from None

    def _validate(self) -> "ExperimentConfig":
        if self.sweep.trials < 1:
            raise ConfigError("sweep.trials must be >= 1")
        if self.sweep.kind not in ("distance", "snr"):
            raise ConfigError(f"sweep.kind must be 'distance' or 'snr', got {self.sweep.kind!r}")
        if not self.sweep.values:
            raise ConfigError("sweep.points must not be empty")
        if not self.schemes:
            raise ConfigError("schemes must not be empty")
        for s in self.schemes:
            try:
                Scheme(s)
            except ValueError:
                raise ConfigError(f"schemes: unknown scheme {s!r}") from None
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.tx_power <= 0:
            raise ConfigError("tx_power must be positive")
        try:
            cfg = self.array.build()
        except ValueError as e:
            raise ConfigError(f"array: {e}") from None
        if not (-1 <= self.coverage.sin_min < self.coverage.sin_max <= 1):
            raise ConfigError("coverage: need -1 <= sin_min < sin_max <= 1")
        if not (-1 < self.ue.sin_min <= self.ue.sin_max < 1):
            raise ConfigError("ue: need -1 < sin_min <= sin_max < 1")
        if not (0 < self.ue.range_min_m <= self.ue.range_max_m):
            raise ConfigError("ue: need 0 < range_min_m <= range_max_m")
        if self.sweep.kind == "distance":
            limit = ebrd(cfg, 0.0)
            for r in self.sweep.values:
                if not (0 < r <= limit * (1 + 1e-9)):
                    raise ConfigError(f"sweep.points: distance {r} outside (0, {limit:.3f}] m")
        elif self.ue.range_max_m > ebrd(cfg, 0.0) * (1 + 1e-9):
            log.warning("ue.range_max_m exceeds the boresight EBRD; lookup ranges stop there")
        if self.calibration is not None:
            try:
                self.calibration.build()
            except ValueError as e:
                raise ConfigError(f"calibration: {e}") from None
        return self


_SECTIONS = {
    "array": ArraySection,
    "coverage": CoverageSection,
    "sweep": SweepSection,
    "ue": UESection,
    "hierarchy": HierarchySection,
    "calibration": CalibrationSection,
}


def _section(name: str, cls, raw) -> object:
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a table")
    known = {f.name for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown key")
    vals = dict(raw)
    if "points" in vals:
        vals["points"] = tuple(float(p) for p in vals["points"])
    return cls(**vals)


def config_from_dict(raw: dict) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    kwargs = {}
    for key, val in raw.items():
        if key not in known:
            raise ConfigError(f"{key}: unknown key")
        if key in _SECTIONS:
            kwargs[key] = _section(key, _SECTIONS[key], val)
        elif key == "schemes":
            kwargs[key] = tuple(val)
        else:
            kwargs[key] = val
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return config_from_dict(raw)


@dataclass(frozen=True)
class TrialRecord:
    sweep_value: float
    scheme: Scheme
    trial: int
    rate: float
    pilots: int
    d_sin_err: float = math.nan
    d_range_err: float = math.nan

    def sort_key(self):
        return (self.sweep_value, SCHEME_ORDER.index(self.scheme), self.trial)


class _Context:
    """Codebooks and lookup table shared (read-only) by every trial."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.cfg = config.array.build()
        cov = config.coverage
        self.schemes = [Scheme(s) for s in config.schemes]
        self.table = load_or_build_table(self.cfg, cov.sin_min, cov.sin_max, config.table_cache)
        self.dft_book = self.table.book
        self.polar_book = polar_codebook(self.cfg, cov.sin_min, cov.sin_max) if Scheme.EXHAUSTIVE in self.schemes else None
        h = config.hierarchy
        self.root = hierarchy_root(self.cfg, max(abs(cov.sin_min), abs(cov.sin_max)))
        self.first_level = tile_codebook(self.cfg, self.root, h.nx, h.ny) if Scheme.HIERARCHICAL in self.schemes else None
        self.calibration = config.calibration.build() if config.calibration is not None else None

    def run_trial(self, point_index: int, trial: int) -> list[TrialRecord]:
        c = self.config
        value = c.sweep.values[point_index]
        ue_seq, noise_seq, cal_seq = np.random.SeedSequence(c.seed, spawn_key=(point_index, trial)).spawn(3)
        g = np.random.default_rng(ue_seq)
        sin_t = g.uniform(c.ue.sin_min, c.ue.sin_max)
        if c.sweep.kind == "distance":
            r, snr_db = value, c.snr_db
        else:
            r, snr_db = g.uniform(c.ue.range_min_m, c.ue.range_max_m), value
        ue = PolarPoint.from_sin(sin_t, r)
        sigma2 = c.tx_power * 10 ** (-snr_db / 10)
        weights = self.calibration.draw(self.cfg.n_elements, np.random.default_rng(cal_seq)) if self.calibration else None
        out = []
        for s in self.schemes:
            # common random numbers: every scheme restarts the same noise stream
            rng = np.random.default_rng(noise_seq)
            res = self._run_scheme(s, ue, sigma2, rng, weights)
            if not math.isfinite(res.rate):
                raise NumericalFailure(f"non-finite rate for {s.value} at point {value}, trial {trial}")
            out.append(TrialRecord(value, s, trial, res.rate, res.pilots, res.d_sin_err, res.d_range_err))
        return out

    def _run_scheme(self, s, ue, sigma2, rng, weights):
        cfg, pt = self.cfg, self.config.tx_power
        if s is Scheme.PERFECT_CSI:
            return bench.perfect_csi(cfg, ue, sigma2, pt, weights)
        if s is Scheme.EXHAUSTIVE:
            return bench.exhaustive_search(cfg, ue, self.polar_book, sigma2, rng, pt, weights)
        if s is Scheme.FAR_FIELD:
            return bench.farfield_search(cfg, ue, self.dft_book, sigma2, rng, pt, weights)
        if s is Scheme.HIERARCHICAL:
            h = self.config.hierarchy
            return bench.hierarchical_search(
                cfg, ue, h.levels, h.nx, h.ny, sigma2, rng, pt, weights, root=self.root, first_level=self.first_level
            )
        return bench.cidft_scheme(cfg, ue, self.table, sigma2, rng=rng, tx_power=pt, weights=weights)

    def overhead_rows(self) -> list[tuple[str, str, int]]:
        psi = len(self.dft_book)
        S = max(len(self.table.column_cells(i)) for i in range(psi))
        h = self.config.hierarchy
        return [
            (s.value, bench.OVERHEAD_FORMULA[s], bench.overhead(s, psi, S, h.nx, h.ny, h.levels)) for s in TABLE1_ORDER
        ]


_WORKER_CTX: _Context | None = None


def _worker_init(config: ExperimentConfig) -> None:
    global _WORKER_CTX
    _WORKER_CTX = _Context(config)


def _worker_point(point_index: int) -> list[TrialRecord]:
    ctx = _WORKER_CTX
    return [rec for t in range(ctx.config.sweep.trials) for rec in ctx.run_trial(point_index, t)]


def _run(config: ExperimentConfig, kind: str, ctx: _Context | None = None) -> list[TrialRecord]:
    config.validate()
    if config.sweep.kind != kind:
        raise ConfigError(f"sweep.kind is {config.sweep.kind!r}, expected {kind!r}")
    points = range(len(config.sweep.values))
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers, initializer=_worker_init, initargs=(config,)) as pool:
            chunks = list(pool.map(_worker_point, points))
        records = [r for chunk in chunks for r in chunk]
    else:
        ctx = ctx if ctx is not None else _Context(config)
        records = [rec for i in points for t in range(config.sweep.trials) for rec in ctx.run_trial(i, t)]
    return sorted(records, key=TrialRecord.sort_key)


def run_distance_sweep(config: ExperimentConfig) -> list[TrialRecord]:
    """Rate vs UE range: each point fixes the range and draws the angle per trial."""
    return _run(config, "distance")


def run_snr_sweep(config: ExperimentConfig) -> list[TrialRecord]:
    """Rate vs SNR (dB): each trial draws range and angle uniformly."""
    return _run(config, "snr")


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def aggregate(records: list[TrialRecord]) -> list[tuple[float, Scheme, float, float, int]]:
    """(sweep_value, scheme, mean_rate, stderr, pilots) per group, canonical order."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in sorted(records, key=TrialRecord.sort_key):
        groups.setdefault((rec.sweep_value, rec.scheme), []).append(rec)
    rows = []
    for (value, scheme), recs in groups.items():
        rates = np.array([r.rate for r in recs])
        se = float(rates.std(ddof=1) / math.sqrt(len(rates))) if len(rates) > 1 else math.nan
        rows.append((value, scheme, float(rates.mean()), se, recs[0].pilots))
    return rows


def emit_report(records: list[TrialRecord], out_dir, overhead_rows=None) -> dict[str, Path]:
    """Write ``trials.csv``, ``aggregate.csv`` and ``overhead.csv`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / f"{name}.csv" for name in ("trials", "aggregate", "overhead")}
    with paths["trials"].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep_value", "scheme", "trial", "rate_bps_hz", "pilots", "d_sin_err", "d_range_err_m"])
        for r in sorted(records, key=TrialRecord.sort_key):
            w.writerow([_fmt(r.sweep_value), r.scheme.value, r.trial, _fmt(r.rate), r.pilots, _fmt(r.d_sin_err), _fmt(r.d_range_err)])
    with paths["aggregate"].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep_value", "scheme", "mean_rate", "stderr", "pilots"])
        for value, scheme, mean, se, pilots in aggregate(records):
            w.writerow([_fmt(value), scheme.value, _fmt(mean), _fmt(se), pilots])
    with paths["overhead"].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "formula", "value"])
        for row in overhead_rows or []:
            w.writerow(row)
    return paths


def table1_overhead(config: ExperimentConfig | None = None) -> list[tuple[str, str, int]]:
    """Overhead rows for a configuration without running any trials."""
    config = config or ExperimentConfig()
    cfg = config.array.build()
    cov = config.coverage
    book = polar_codebook(cfg, cov.sin_min, cov.sin_max)
    psi, S = bench.polar_book_dims(book)
    h = config.hierarchy
    return [(s.value, bench.OVERHEAD_FORMULA[s], bench.overhead(s, psi, S, h.nx, h.ny, h.levels)) for s in TABLE1_ORDER]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nfbeam", description="Near-field beam-training Monte-Carlo sweeps.")
    p.add_argument("--config", type=Path, help="TOML experiment file")
    p.add_argument("--seed", type=int, help="master seed (non-negative)")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--sweep", choices=["distance", "snr"])
    p.add_argument("--trials", type=int)
    p.add_argument("--schemes", help="comma-separated subset, e.g. Exhaustive,CIDFT")
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then command-line overrides."""
    config = load_config(args.config) if args.config else ExperimentConfig()
    sweep = config.sweep
    if args.sweep:
        sweep = dataclasses.replace(sweep, kind=args.sweep)
    if args.trials is not None:
        sweep = dataclasses.replace(sweep, trials=args.trials)
    changes = {"sweep": sweep}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        changes["seed"] = args.seed
    if args.schemes:
        changes["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    if args.workers is not None:
        changes["workers"] = args.workers
    return dataclasses.replace(config, **changes).validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        ctx = _Context(config)
        log.info("running %s sweep: %d points x %d trials", config.sweep.kind, len(config.sweep.values), config.sweep.trials)
        records = _run(config, config.sweep.kind, ctx)
        paths = emit_report(records, args.out, ctx.overhead_rows())
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, path in paths.items():
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

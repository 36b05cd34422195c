"""Scenario configuration, SNR sweeps and CSV output.

All powers are linear with ``noise_power`` as the unit, so the received SNR
of a scheme is its received power divided by ``noise_power``.  Sweep values
given in dB (``delta2_db``, ``sigma2_db``) are converted with
``10 ** ((value - power_offset_db) / 10)``; ``power_offset_db`` is the
calibration constant relating the axis label to the linear channel unit.
SNRs are averaged over channel realizations in the linear domain and then
converted to dB.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import SamplingGrid, build_channel_map, channel_at_positions, free_space_reference_gain, synthesize_paths
from .errors import InvalidParameterError
from .outage import simulate_outage
from .placement import fpa_positions, fpa_with_as, optimize_placement_dp
from .robust import bernstein_r0, mrt, worst_case_power

__all__ = [
    "SWEEP_AXES",
    "WORST_CASE_SCHEMES",
    "OUTAGE_SCHEMES",
    "ExperimentConfig",
    "SweepRow",
    "load_config",
    "dump_config",
    "realization_channels",
    "run_worst_case_sweep",
    "run_outage_sweep",
    "run_sweep",
    "emit_csv",
    "parse_csv",
    "to_db",
]

SWEEP_AXES = {"delta2": "delta2_db", "rho": "rho", "sigma2": "sigma2_db"}

MA_ROBUST = "ma_robust"
MA_PERFECT = "ma_perfect"
FPA_NOAS_IMPERFECT = "fpa_noas_imperfect"
FPA_NOAS_PERFECT = "fpa_noas_perfect"
FPA_AS_IMPERFECT = "fpa_as_imperfect"
MA_BERNSTEIN = "ma_bernstein"

WORST_CASE_SCHEMES = (MA_ROBUST, MA_PERFECT, FPA_NOAS_IMPERFECT, FPA_NOAS_PERFECT, FPA_AS_IMPERFECT)
OUTAGE_SCHEMES = WORST_CASE_SCHEMES + (MA_BERNSTEIN,)
ALL_SCHEMES = OUTAGE_SCHEMES

# stream identifiers mixed into per-realization seeds
_CHANNEL_STREAM = 0
_ERROR_STREAM = 1
_SCHEME_STREAM = {"ma": 0, "fpa_noas": 1, "fpa_as": 2}


def to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    wavelength: float = 0.06
    N: int = 8
    L: float = 0.36
    d_min: float | None = None  # defaults to wavelength / 2
    M: int = 120
    paths: int = 3
    distance: float = 100.0
    pathloss_exponent: float = 2.8
    reference_gain: float | None = None  # defaults to (wavelength / (4 pi))**2
    transmit_snr_db: float = 100.0
    noise_power: float = 1.0
    power_offset_db: float = 0.0
    channel_realizations: int = 100
    error_trials: int = 500
    base_seed: int = 0
    workers: int = 1
    trial_workers: int = 1
    sweep: str = "delta2"
    delta2_db: tuple[float, ...] = (-115.0, -112.0, -109.0, -106.0, -103.0, -100.0, -97.0)
    rho: tuple[float, ...] = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3)
    sigma2_db: tuple[float, ...] = (-125.0, -120.0, -115.0, -110.0, -105.0)
    fixed_rho: float = 0.05
    fixed_sigma2_db: float = -115.0

    def __post_init__(self):
        for name in ("delta2_db", "rho", "sigma2_db"):
            object.__setattr__(self, name, _floats(getattr(self, name)))
        if self.d_min is None:
            object.__setattr__(self, "d_min", self.wavelength / 2)
        if self.reference_gain is None:
            object.__setattr__(self, "reference_gain", free_space_reference_gain(self.wavelength))
        self.validate()

    def validate(self) -> None:
        if self.sweep not in SWEEP_AXES:
            raise InvalidParameterError(f"sweep must be one of {sorted(SWEEP_AXES)}, got {self.sweep!r}")
        for name in ("N", "M", "paths", "channel_realizations", "error_trials", "workers",
                     "trial_workers"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {value!r}")
        for name in ("wavelength", "L", "d_min", "distance", "reference_gain", "noise_power"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.base_seed < 0:
            raise InvalidParameterError(f"base_seed must be nonnegative, got {self.base_seed!r}")
        for r in self.rho + (self.fixed_rho,):
            if not 0.0 < r < 1.0:
                raise InvalidParameterError(f"rho values must lie in (0, 1), got {r!r}")
        if not self.sweep_values:
            raise InvalidParameterError(f"sweep axis {self.sweep!r} has no values")

    @property
    def p_max(self) -> float:
        return self.noise_power * 10.0 ** (self.transmit_snr_db / 10.0)

    @property
    def grid(self) -> SamplingGrid:
        return SamplingGrid(self.M, self.L, self.d_min)

    @property
    def axis_name(self) -> str:
        return SWEEP_AXES[self.sweep]

    @property
    def sweep_values(self) -> tuple[float, ...]:
        return getattr(self, self.axis_name)

    def db_to_linear(self, value_db: float) -> float:
        return 10.0 ** ((value_db - self.power_offset_db) / 10.0)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SweepRow:
    """Averaged SNRs (dB) of every scheme at one sweep value.

    ``flags`` counts, per scheme, the realizations whose value was nulled
    (worst-case power zero) or, for the Bernstein curve, negative before
    clamping.
    """

    axis: str
    value: float
    metrics: dict[str, float]
    realizations: int
    seed: int
    flags: dict[str, int] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

_SECTIONS = {
    "scenario": ("wavelength", "N", "L", "d_min", "M", "paths", "distance", "pathloss_exponent",
                 "reference_gain", "transmit_snr_db", "noise_power", "power_offset_db"),
    "simulation": ("channel_realizations", "error_trials", "base_seed", "workers", "trial_workers"),
    "sweep": ("sweep", "delta2_db", "rho", "sigma2_db", "fixed_rho", "fixed_sigma2_db"),
}
_INT_FIELDS = {"N", "M", "paths", "channel_realizations", "error_trials", "base_seed", "workers", "trial_workers"}
_LIST_FIELDS = {"delta2_db", "rho", "sigma2_db"}


def _parse_value(name: str, text: str):
    text = text.strip()
    if name == "sweep":
        return text
    if name in _LIST_FIELDS:
        return tuple(float(t) for t in text.replace(",", " ").split())
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def load_config(path: str | os.PathLike, **overrides) -> ExperimentConfig:
    """Read an INI-style config (``[scenario]``, ``[simulation]``, ``[sweep]``).

    Keyword ``overrides`` take precedence over file values; ``None`` values
    are ignored so CLI flags can be passed through unconditionally.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {os.fspath(path)!r}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise InvalidParameterError(f"unknown config section [{section}] in {os.fspath(path)!r}")
        for key, text in parser.items(section):
            if key not in _SECTIONS[section]:
                raise InvalidParameterError(f"unknown key {key!r} in section [{section}]")
            try:
                values[key] = _parse_value(key, text)
            except ValueError as exc:
                raise InvalidParameterError(f"bad value for {key!r}: {text!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def dump_config(config: ExperimentConfig) -> str:
    lines = []
    for section, names in _SECTIONS.items():
        lines.append(f"[{section}]")
        for name in names:
            value = getattr(config, name)
            if isinstance(value, tuple):
                value = ", ".join(repr(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{name} = {value}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealizationChannels:
    """Estimated channel vectors of the three antenna schemes for one realization."""

    index: int
    ma: np.ndarray
    fpa_noas: np.ndarray
    fpa_as: np.ndarray


def realization_channels(config: ExperimentConfig, index: int) -> RealizationChannels:
    paths = synthesize_paths(
        (config.base_seed, _CHANNEL_STREAM, index),
        config.paths,
        config.wavelength,
        config.distance,
        config.pathloss_exponent,
        config.reference_gain,
    )
    ma = optimize_placement_dp(build_channel_map(paths, config.grid), config.N)
    noas = channel_at_positions(paths, fpa_positions(config.N, config.L, config.d_min), config.L)
    with_as = fpa_with_as(paths, config.N, config.L, config.d_min)
    return RealizationChannels(index, ma.channel_subvector, noas, with_as.channel_subvector)


def _map_realizations(config: ExperimentConfig, fn) -> list:
    indices = range(config.channel_realizations)
    if config.workers <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        # map preserves input order, so the merge is deterministic
        return list(pool.map(fn, indices))


def _rows(config: ExperimentConfig, per_realization: list, schemes: Sequence[str]) -> list[SweepRow]:
    """Average per-realization ``(snr, flagged)`` tables into sweep rows."""
    rows = []
    for j, value in enumerate(config.sweep_values):
        metrics, flags = {}, {}
        for scheme in schemes:
            snrs = np.array([table[j][scheme][0] for table in per_realization])
            flagged = sum(bool(table[j][scheme][1]) for table in per_realization)
            metrics[scheme] = to_db(float(np.mean(snrs)))
            if flagged:
                flags[scheme] = flagged
        rows.append(SweepRow(config.axis_name, value, metrics, config.channel_realizations, config.base_seed, flags))
    return rows


def run_worst_case_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Worst-case received SNR versus the error bound ``delta**2``."""
    if config.sweep != "delta2":
        raise InvalidParameterError(f"worst-case sweep needs sweep = delta2, got {config.sweep!r}")
    p_max, noise = config.p_max, config.noise_power

    def one(index):
        ch = realization_channels(config, index)
        table = []
        for value in config.delta2_db:
            delta = math.sqrt(config.db_to_linear(value))
            entry = {}
            for scheme, h, d in (
                (MA_ROBUST, ch.ma, delta),
                (MA_PERFECT, ch.ma, 0.0),
                (FPA_NOAS_IMPERFECT, ch.fpa_noas, delta),
                (FPA_NOAS_PERFECT, ch.fpa_noas, 0.0),
                (FPA_AS_IMPERFECT, ch.fpa_as, delta),
            ):
                res = worst_case_power(h, d, p_max)
                entry[scheme] = (res.power / noise, res.nulled)
            table.append(entry)
        return table

    return _rows(config, _map_realizations(config, one), WORST_CASE_SCHEMES)


def run_outage_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Empirical non-outage SNR versus ``rho`` or ``sigma2``, plus the Bernstein bound.

    Each scheme transmits MRT on its own estimated channel.  Error draws are
    shared across sweep points of one realization (common random numbers),
    and the perfect-CSI curves rerun the same estimator with ``sigma2 = 0``.
    """
    if config.sweep not in ("rho", "sigma2"):
        raise InvalidParameterError(f"outage sweep needs sweep = rho or sigma2, got {config.sweep!r}")
    p_max, noise, trials = config.p_max, config.noise_power, config.error_trials

    if config.sweep == "rho":
        points = [(r, config.db_to_linear(config.fixed_sigma2_db)) for r in config.rho]
    else:
        points = [(config.fixed_rho, config.db_to_linear(v)) for v in config.sigma2_db]

    def one(index):
        ch = realization_channels(config, index)
        setups = {
            name: (h, mrt(h, p_max), (config.base_seed, _ERROR_STREAM, index, _SCHEME_STREAM[name]))
            for name, h in (("ma", ch.ma), ("fpa_noas", ch.fpa_noas), ("fpa_as", ch.fpa_as))
        }

        def empirical(name, sigma2, rho):
            h, w, seed = setups[name]
            est = simulate_outage(h, w, sigma2, rho, trials, seed, workers=config.trial_workers)
            return est.empirical_r / noise

        table = []
        for rho, sigma2 in points:
            bound = bernstein_r0(ch.ma, sigma2, p_max, rho)
            table.append({
                MA_ROBUST: (empirical("ma", sigma2, rho), False),
                MA_PERFECT: (empirical("ma", 0.0, rho), False),
                FPA_NOAS_IMPERFECT: (empirical("fpa_noas", sigma2, rho), False),
                FPA_NOAS_PERFECT: (empirical("fpa_noas", 0.0, rho), False),
                FPA_AS_IMPERFECT: (empirical("fpa_as", sigma2, rho), False),
                MA_BERNSTEIN: (bound.r0_clamped / noise, bound.r0 < 0),
            })
        return table

    return _rows(config, _map_realizations(config, one), OUTAGE_SCHEMES)


def run_sweep(config: ExperimentConfig) -> list[SweepRow]:
    if config.sweep == "delta2":
        return run_worst_case_sweep(config)
    return run_outage_sweep(config)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    return repr(float(x))


def _format_flags(flags: dict[str, int]) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(flags.items()))


def _parse_flags(text: str) -> dict[str, int]:
    if not text:
        return {}
    return {k: int(v) for k, v in (item.split("=") for item in text.split(";"))}


def emit_csv(rows: Iterable[SweepRow], path: str | os.PathLike, axis: str | None = None,
             schemes: Sequence[str] | None = None) -> None:
    """Write sweep rows with a header naming the axis and schemes.

    ``axis`` and ``schemes`` are only needed to label an empty file; floats are
    written with ``repr`` so the output round-trips exactly.
    """
    rows = list(rows)
    if rows:
        axis = rows[0].axis
        schemes = [s for s in ALL_SCHEMES if s in rows[0].metrics]
    axis = axis or "value"
    schemes = list(schemes or ())
    header = [axis, *schemes, "realizations", "seed", "flags"]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                if row.axis != axis or set(row.metrics) != set(schemes):
                    raise InvalidParameterError("all rows must share one axis and scheme set")
                writer.writerow([
                    _format_float(row.value),
                    *(_format_float(row.metrics[s]) for s in schemes),
                    row.realizations,
                    row.seed,
                    _format_flags(row.flags),
                ])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {os.fspath(path)!r}: {exc}") from exc


def parse_csv(path: str | os.PathLike) -> list[SweepRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        axis, schemes = header[0], header[1:-3]
        rows = []
        for rec in reader:
            metrics = {s: float(v) for s, v in zip(schemes, rec[1:-3])}
            rows.append(SweepRow(axis, float(rec[0]), metrics, int(rec[-3]), int(rec[-2]), _parse_flags(rec[-1])))
    return rows

"""Field-response channel synthesis over a discretized linear transmit region.

The transmit region of length ``L`` is sampled at ``M`` points
``s_m = m * L / M`` (``m = 1..M``).  The channel from a transmit position
``s`` to the single-antenna receiver follows the 1-D field-response form

    h(s) = sum_k b_k * exp(j * 2*pi/lambda * s * cos(theta_k))

with ``K`` paths of complex gain ``b_k`` and angle of departure ``theta_k``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import InvalidParameterError

Seed = Union[int, Sequence[int]]

__all__ = [
    "Seed",
    "SamplingGrid",
    "PathSet",
    "ChannelMap",
    "free_space_reference_gain",
    "synthesize_paths",
    "field_response",
    "build_channel_map",
    "channel_at_positions",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def free_space_reference_gain(wavelength: float) -> float:
    """Free-space power gain at 1 m, ``(lambda / (4 pi))**2``."""
    return (wavelength / (4.0 * math.pi)) ** 2


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform sampling of a linear region of length ``L`` into ``M`` points.

    ``a_min`` is the minimum index gap between two selected points, derived
    from the physical minimum spacing ``d_min``.
    """

    M: int
    L: float
    d_min: float
    a_min: int = field(init=False)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParameterError(f"M must be a positive integer, got {self.M!r}")
        if not self.L > 0:
            raise InvalidParameterError(f"L must be positive, got {self.L!r}")
        if not self.d_min > 0:
            raise InvalidParameterError(f"d_min must be positive, got {self.d_min!r}")
        object.__setattr__(self, "M", int(self.M))
        a_min = int(round(self.d_min / self.delta_s))
        if a_min < 1:
            raise InvalidParameterError(
                f"d_min={self.d_min} is below half the grid spacing {self.delta_s}"
            )
        object.__setattr__(self, "a_min", a_min)

    @property
    def delta_s(self) -> float:
        return self.L / self.M

    def position(self, m) -> np.ndarray | float:
        """Position in meters of 1-based grid index ``m`` (scalar or array)."""
        return m * self.L / self.M

    @property
    def positions(self) -> np.ndarray:
        return np.arange(1, self.M + 1) * self.L / self.M


@dataclass(frozen=True)
class PathSet:
    aods: np.ndarray
    gains: np.ndarray
    wavelength: float

    def __post_init__(self):
        aods = np.asarray(self.aods, dtype=float).ravel()
        gains = np.asarray(self.gains, dtype=complex).ravel()
        if aods.shape != gains.shape or aods.size == 0:
            raise InvalidParameterError("aods and gains must be non-empty and equally long")
        if np.any(aods < 0) or np.any(aods > math.pi):
            raise InvalidParameterError("angles of departure must lie in [0, pi]")
        if not self.wavelength > 0:
            raise InvalidParameterError(f"wavelength must be positive, got {self.wavelength!r}")
        object.__setattr__(self, "aods", _frozen(aods))
        object.__setattr__(self, "gains", _frozen(gains))

    @property
    def K(self) -> int:
        return self.aods.size

    @property
    def total_gain(self) -> float:
        return float(np.sum(np.abs(self.gains) ** 2))

    def scaled(self, factor: complex) -> "PathSet":
        return PathSet(self.aods, self.gains * factor, self.wavelength)


@dataclass(frozen=True)
class ChannelMap:
    """Per-grid-point channel values; index ``m`` lives at array slot ``m - 1``."""

    grid: SamplingGrid
    true_values: np.ndarray
    estimated_values: np.ndarray

    def __post_init__(self):
        tv = np.asarray(self.true_values, dtype=complex).ravel()
        ev = np.asarray(self.estimated_values, dtype=complex).ravel()
        if tv.size != self.grid.M or ev.size != self.grid.M:
            raise InvalidParameterError(
                f"channel map needs {self.grid.M} values, got {tv.size} and {ev.size}"
            )
        object.__setattr__(self, "true_values", _frozen(tv))
        object.__setattr__(self, "estimated_values", _frozen(ev))

    @classmethod
    def from_estimates(cls, grid: SamplingGrid, values) -> "ChannelMap":
        return cls(grid, values, values)

    def with_error(self, errors) -> "ChannelMap":
        """Map whose true values are ``estimated + errors`` (length ``M``)."""
        return ChannelMap(self.grid, self.estimated_values + np.asarray(errors), self.estimated_values)

    @property
    def gains(self) -> np.ndarray:
        """``|h_bar_m|**2`` for every grid point."""
        return np.abs(self.estimated_values) ** 2


def synthesize_paths(
    rng_seed: Seed,
    K: int,
    wavelength: float,
    distance: float,
    pathloss_exponent: float,
    reference_gain: float | None = None,
) -> PathSet:
    """Draw a random multipath description.

    The total power ``reference_gain * distance**(-pathloss_exponent)`` is
    split across paths by normalizing ``K`` uniform (0, 1] draws.  Phases
    are uniform on [0, 2 pi) and angles of departure uniform on [0, pi].
    ``reference_gain`` defaults to the free-space gain at 1 m.
    """
    if int(K) != K or K < 1:
        raise InvalidParameterError(f"K must be a positive integer, got {K!r}")
    if not distance > 0:
        raise InvalidParameterError(f"distance must be positive, got {distance!r}")
    if reference_gain is None:
        reference_gain = free_space_reference_gain(wavelength)
    if not reference_gain > 0:
        raise InvalidParameterError(f"reference_gain must be positive, got {reference_gain!r}")

    rng = np.random.default_rng(rng_seed)
    total = reference_gain * distance ** (-pathloss_exponent)
    # 1 - U maps [0, 1) onto (0, 1]
    weights = 1.0 - rng.random(int(K))
    fractions = weights / weights.sum()
    phases = rng.uniform(0.0, 2.0 * math.pi, int(K))
    aods = rng.uniform(0.0, math.pi, int(K))
    gains = np.sqrt(total * fractions) * np.exp(1j * phases)
    return PathSet(aods, gains, wavelength)


def _response(paths: PathSet, positions: np.ndarray) -> np.ndarray:
    k = 2.0 * math.pi / paths.wavelength
    phase = k * np.multiply.outer(positions, np.cos(paths.aods))
    # explicit reduction keeps scalar and vector evaluation bitwise identical
    return (np.exp(1j * phase) * paths.gains).sum(axis=-1)


def field_response(paths: PathSet, position: float) -> complex:
    if not math.isfinite(position):
        raise InvalidParameterError(f"position must be finite, got {position!r}")
    return complex(_response(paths, np.array([float(position)]))[0])


def build_channel_map(paths: PathSet, grid: SamplingGrid) -> ChannelMap:
    """Evaluate the field response on every grid point (no CSI error applied)."""
    return ChannelMap.from_estimates(grid, _response(paths, grid.positions))


def channel_at_positions(paths: PathSet, positions, L: float | None = None) -> np.ndarray:
    """Field response at arbitrary positions; warns for positions outside [0, L]."""
    pos = np.asarray(positions, dtype=float).ravel()
    if pos.size == 0:
        return np.zeros(0, dtype=complex)
    if L is not None and (pos.min() < 0.0 or pos.max() > L):
        warnings.warn(f"positions outside the transmit region [0, {L}]", stacklevel=2)
    return _response(paths, pos)

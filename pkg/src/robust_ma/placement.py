"""Antenna placement on the sampling grid and fixed-antenna baselines.

The robust problems for both CSI error models reduce to choosing ``N`` grid
indices ``a_1 < ... < a_N`` with gaps of at least ``a_min`` that maximize
``sum_n |h_bar_{a_n}|**2``.

Ties between optimal selections are broken the same way everywhere: the
smallest last index wins, then the smallest second-to-last, and so on.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMap, PathSet, channel_at_positions
from .errors import EnumerationLimitError, InfeasibleError, InvalidParameterError

__all__ = [
    "PlacementSelection",
    "check_feasible",
    "optimize_placement_dp",
    "optimize_placement_bruteforce",
    "fpa_positions",
    "comb_positions",
    "fpa_with_as",
]

BRUTEFORCE_MAX_M = 40
BRUTEFORCE_MAX_N = 4


@dataclass(frozen=True)
class PlacementSelection:
    """Chosen antenna slots.

    ``indices`` are 1-based and strictly increasing; for grid placements they
    index the sampling grid, for the antenna-selection baseline they index
    the fixed comb.  ``objective`` is ``sum |channel_subvector|**2``.
    """

    indices: tuple[int, ...]
    positions: np.ndarray
    channel_subvector: np.ndarray
    objective: float

    @property
    def N(self) -> int:
        return len(self.indices)


def _select(values: np.ndarray, positions: np.ndarray, indices) -> PlacementSelection:
    idx = tuple(int(i) for i in indices)
    sub = values[np.asarray(idx, dtype=int) - 1]
    gains = np.abs(sub) ** 2
    objective = 0.0
    for g in gains:
        objective += g
    return PlacementSelection(idx, positions[np.asarray(idx, dtype=int) - 1], sub, float(objective))


def check_feasible(M: int, N: int, a_min: int) -> None:
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be a positive integer, got {N!r}")
    if (N - 1) * a_min + 1 > M:
        raise InfeasibleError(
            f"(N-1)*a_min + 1 <= M violated: ({N}-1)*{a_min} + 1 = {(N - 1) * a_min + 1} > M = {M}"
        )


def optimize_placement_dp(channel_map: ChannelMap, N: int) -> PlacementSelection:
    """Globally optimal placement by a stage-indexed dynamic program.

    ``best[n][m]`` is the largest gain sum of ``n + 1`` points ending at grid
    slot ``m``; a running prefix maximum of the previous stage makes each
    stage O(M).
    """
    grid = channel_map.grid
    M, a = grid.M, grid.a_min
    check_feasible(M, N, a)
    gains = channel_map.gains

    best = np.full((N, M), -np.inf)
    best[0] = gains
    for n in range(1, N):
        prefix = np.maximum.accumulate(best[n - 1])
        best[n, a:] = gains[a:] + prefix[: M - a]

    # argmax returns the first (smallest) index among ties
    m = int(np.argmax(best[N - 1]))
    chosen = [m]
    for n in range(N - 1, 0, -1):
        target = best[n, m]
        candidates = best[n - 1, : m - a + 1] + gains[m]
        m = int(np.flatnonzero(candidates == target)[0])
        chosen.append(m)
    chosen.reverse()
    return _select(channel_map.estimated_values, grid.positions, [c + 1 for c in chosen])


def optimize_placement_bruteforce(channel_map: ChannelMap, N: int) -> PlacementSelection:
    """Exact placement by enumerating every feasible subset (small grids only)."""
    grid = channel_map.grid
    M, a = grid.M, grid.a_min
    check_feasible(M, N, a)
    if M > BRUTEFORCE_MAX_M and N > BRUTEFORCE_MAX_N:
        raise EnumerationLimitError(
            f"refusing to enumerate C({M}, {N}); need M <= {BRUTEFORCE_MAX_M} or N <= {BRUTEFORCE_MAX_N}"
        )
    gains = channel_map.gains
    best_value = -math.inf
    best_key = None
    for combo in itertools.combinations(range(M), N):
        if any(j - i < a for i, j in zip(combo, combo[1:])):
            continue
        value = 0.0
        for i in combo:
            value += gains[i]
        key = tuple(reversed(combo))
        if value > best_value or (value == best_value and key < best_key):
            best_value, best_key = value, key
    return _select(channel_map.estimated_values, grid.positions, [c + 1 for c in reversed(best_key)])


def fpa_positions(N: int, L: float, d_min: float) -> np.ndarray:
    """``N`` fixed antennas centred in ``[0, L]`` at pitch ``d_min``."""
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be a positive integer, got {N!r}")
    if (N - 1) * d_min > L * (1 + 1e-12):
        raise InfeasibleError(f"(N-1)*d_min <= L violated: {(N - 1) * d_min} > {L}")
    n = np.arange(1, N + 1)
    return L / 2 + (n - (N + 1) / 2) * d_min


def comb_positions(L: float, d_min: float) -> np.ndarray:
    """``L / d_min`` antennas at pitch ``d_min`` spanning the whole array."""
    ratio = L / d_min
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > 1e-9 * max(ratio, 1.0):
        raise InvalidParameterError(f"L / d_min must be an integer, got {ratio}")
    return np.arange(1, count + 1) * d_min - d_min / 2


def fpa_with_as(paths: PathSet, N: int, L: float, d_min: float) -> PlacementSelection:
    """Activate the ``N`` strongest antennas of the fixed comb.

    Any subset of the comb meets the spacing rule, so the best subset is the
    ``N`` largest ``|h|**2`` (smallest comb index first on ties).
    """
    positions = comb_positions(L, d_min)
    if int(N) != N or N < 1 or N > positions.size:
        raise InfeasibleError(f"cannot activate N={N} of {positions.size} fixed antennas")
    values = channel_at_positions(paths, positions)
    order = np.argsort(-(np.abs(values) ** 2), kind="stable")
    chosen = np.sort(order[:N]) + 1
    return _select(values, positions, chosen)

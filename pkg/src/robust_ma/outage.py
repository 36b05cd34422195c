"""Monte Carlo estimation of the non-outage received power.

Trial ``i`` under ``base_seed`` always draws its error from the seed
``trial_seed(base_seed, i)``, so splitting trials across workers cannot
change any result.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import Seed
from .csi_error import standard_complex_normal, trial_seed
from .errors import ConsistencyError, InvalidParameterError
from .robust import Beamformer, bernstein_r0, mrt

__all__ = [
    "OutageEstimate",
    "BernsteinValidation",
    "percentile_index",
    "standard_error_draws",
    "trial_powers",
    "simulate_outage",
    "violation_slack",
    "validate_bernstein",
]


@dataclass(frozen=True)
class OutageEstimate:
    trials: int
    rho: float
    empirical_r: float
    violation_rate_at_r0: float | None = None


def _check(rho: float, trials: int) -> None:
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError(f"rho must lie in (0, 1), got {rho!r}")
    if int(trials) != trials or trials < 1:
        raise InvalidParameterError(f"trials must be a positive integer, got {trials!r}")


def percentile_index(rho: float, trials: int) -> int:
    """1-based position of the ``100 (1 - rho)``-th percentile in a descending sort."""
    _check(rho, trials)
    # guard against (1 - rho) * T landing a hair above an integer
    k = math.ceil((1.0 - rho) * trials - 1e-9)
    return min(max(k, 1), int(trials))


def _draw_block(base_seed: tuple, start: int, stop: int, n: int) -> np.ndarray:
    return np.stack([standard_complex_normal(trial_seed(base_seed, i), n) for i in range(start, stop)])


@lru_cache(maxsize=64)
def _cached_draws(base_seed: tuple, trials: int, n: int, workers: int) -> np.ndarray:
    if workers <= 1 or trials < 2:
        out = _draw_block(base_seed, 0, trials, n)
    else:
        edges = np.linspace(0, trials, min(workers, trials) + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = pool.map(lambda ab: _draw_block(base_seed, ab[0], ab[1], n), zip(edges[:-1], edges[1:]))
            out = np.concatenate(list(blocks))
    out.flags.writeable = False
    return out


def standard_error_draws(base_seed: Seed, trials: int, n: int, workers: int = 1) -> np.ndarray:
    """``(trials, n)`` matrix of CN(0, 1) draws, row ``i`` from ``trial_seed(base_seed, i)``.

    The result is cached and read-only; scale by ``sqrt(sigma2)`` for CN(0, sigma2).
    """
    key = trial_seed(base_seed, 0)[:-1]
    return _cached_draws(key, int(trials), int(n), int(workers))


def trial_powers(h_bar, w: Beamformer, sigma2: float, trials: int, base_seed: Seed, workers: int = 1) -> np.ndarray:
    """Received power ``|w^H (h_bar + e_i)|**2`` for every trial, in trial order."""
    if not sigma2 >= 0:
        raise InvalidParameterError(f"sigma2 must be nonnegative, got {sigma2!r}")
    h = np.asarray(h_bar, dtype=complex).ravel()
    weights = w.weights
    if weights.shape != h.shape:
        raise InvalidParameterError("beamformer and channel lengths differ")
    xi = standard_error_draws(base_seed, trials, h.size, workers)
    received = np.vdot(weights, h) + math.sqrt(sigma2) * (xi @ weights.conj())
    return np.abs(received) ** 2


def simulate_outage(
    h_bar,
    w: Beamformer,
    sigma2: float,
    rho: float,
    trials: int,
    base_seed: Seed,
    r0: float | None = None,
    workers: int = 1,
) -> OutageEstimate:
    """Empirical non-outage received power.

    Sorts the per-trial powers in descending order and returns the entry at
    1-based position ``ceil((1 - rho) * trials)``.  When ``r0`` is given, the
    fraction of trials falling below it is reported too.
    """
    _check(rho, trials)
    powers = trial_powers(h_bar, w, sigma2, trials, base_seed, workers)
    ranked = np.sort(powers)[::-1]
    empirical = float(ranked[percentile_index(rho, trials) - 1])
    violation = None
    if r0 is not None:
        # relative allowance absorbs rounding when the bound is tight (sigma2 = 0)
        violation = float(np.count_nonzero(powers < r0 - 1e-12 * abs(r0))) / trials
    return OutageEstimate(int(trials), rho, empirical, violation)


def violation_slack(rho: float, trials: int) -> float:
    """Three-sigma binomial allowance on top of ``rho``."""
    return 3.0 * math.sqrt(rho * (1.0 - rho) / trials)


@dataclass(frozen=True)
class BernsteinValidation:
    rho: float
    sigma2: float
    trials: int
    r0: float
    empirical_r: float
    violation_rate: float
    allowed_rate: float

    @property
    def gap(self) -> float:
        return self.empirical_r - self.r0

    @property
    def ok(self) -> bool:
        return self.violation_rate <= self.allowed_rate


def validate_bernstein(h_bar, sigma2: float, rho: float, trials: int, base_seed: Seed,
                       p_max: float = 1.0, workers: int = 1) -> BernsteinValidation:
    """Check empirically that the Bernstein bound is not exceeded more often than ``rho``.

    Raises :class:`ConsistencyError` when the violation rate exceeds the
    three-sigma allowance.
    """
    result = bernstein_r0(h_bar, sigma2, p_max, rho)
    est = simulate_outage(h_bar, mrt(h_bar, p_max), sigma2, rho, trials, base_seed, r0=result.r0, workers=workers)
    report = BernsteinValidation(
        rho, sigma2, int(trials), result.r0, est.empirical_r, est.violation_rate_at_r0,
        rho + violation_slack(rho, trials),
    )
    if not report.ok:
        raise ConsistencyError(
            f"Bernstein bound violated in {report.violation_rate:.4f} of trials (allowed {report.allowed_rate:.4f})"
        )
    return report

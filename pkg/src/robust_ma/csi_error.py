"""CSI error models: norm-bounded (adversarial) and circular Gaussian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Seed
from .errors import DegenerateChannelError, InvalidParameterError

__all__ = [
    "NormBoundedModel",
    "GaussianModel",
    "worst_case_error",
    "standard_complex_normal",
    "sample_gaussian_error",
    "trial_seed",
]


@dataclass(frozen=True)
class NormBoundedModel:
    """Errors with ``||e|| <= delta`` on the selected entries."""

    delta: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise InvalidParameterError(f"delta must be nonnegative, got {self.delta!r}")


@dataclass(frozen=True)
class GaussianModel:
    """Errors ``e ~ CN(0, sigma2 * I)`` on the selected entries."""

    sigma2: float

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise InvalidParameterError(f"sigma2 must be nonnegative, got {self.sigma2!r}")


def worst_case_error(h_bar, delta: float) -> np.ndarray:
    """Error on the ``delta``-ball that minimizes the MRT received power.

    Returns ``-delta * h_bar / ||h_bar||``, i.e. the estimate pulled straight
    towards the origin.
    """
    h_bar = np.asarray(h_bar, dtype=complex)
    if delta < 0:
        raise InvalidParameterError(f"delta must be nonnegative, got {delta!r}")
    norm = np.linalg.norm(h_bar)
    if norm == 0:
        raise DegenerateChannelError("worst-case error direction undefined for a zero channel")
    return -delta * h_bar / norm


def trial_seed(base_seed: Seed, index: int) -> tuple[int, ...]:
    """Seed of the ``index``-th Monte Carlo trial under ``base_seed``."""
    base = (base_seed,) if isinstance(base_seed, (int, np.integer)) else tuple(base_seed)
    return tuple(int(b) for b in base) + (int(index),)


def standard_complex_normal(rng_seed: Seed, n: int) -> np.ndarray:
    """``n`` i.i.d. CN(0, 1) draws: real and imaginary parts each N(0, 1/2)."""
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n!r}")
    z = np.random.default_rng(rng_seed).standard_normal((int(n), 2))
    return (z[:, 0] + 1j * z[:, 1]) * np.sqrt(0.5)


def sample_gaussian_error(rng_seed: Seed, n: int, sigma2: float) -> np.ndarray:
    """Draw ``e ~ CN(0, sigma2 * I_n)`` deterministically from ``rng_seed``.

    Computed as ``sqrt(sigma2) * xi`` with ``xi`` standard, so two calls with
    the same seed and different variances are exact rescalings of each other.
    """
    if not sigma2 >= 0:
        raise InvalidParameterError(f"sigma2 must be nonnegative, got {sigma2!r}")
    return np.sqrt(sigma2) * standard_complex_normal(rng_seed, n)

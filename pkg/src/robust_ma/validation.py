"""Quick oracle checks run by ``robust-ma validate``.

Each check compares a closed form or optimizer against an independent
brute-force route on a handful of seeded random instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import ChannelMap, SamplingGrid
from .csi_error import worst_case_error
from .errors import ConsistencyError
from .outage import validate_bernstein
from .placement import optimize_placement_bruteforce, optimize_placement_dp
from .robust import RHO_THRESHOLD, Branch, bernstein_r0, f_of_y, f_prime, mrt, received_power, worst_case_power, y_zero


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def sample_ball(rng, n: int, count: int, radius: float) -> np.ndarray:
    """``count`` points drawn uniformly from the complex ``n``-ball of given radius."""
    d = _crandn(rng, count, n)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / (2 * n))
    return d * r[:, None]


def check_worst_case(seed: int = 0, instances: int = 10, samples: int = 20000) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    for _ in range(instances):
        h = _crandn(rng, 4)
        delta = 0.3 * np.linalg.norm(h)
        w = mrt(h, 1.0)
        closed = worst_case_power(h, delta, 1.0).power
        sampled = np.abs((h + sample_ball(rng, 4, samples, delta)) @ w.weights.conj()) ** 2
        if sampled.min() < closed * (1 - 1e-12):
            return CheckResult("worst_case", False, f"sampled {sampled.min()} below closed form {closed}")
        attained = received_power(w, h + worst_case_error(h, delta))
        worst_gap = max(worst_gap, abs(attained - closed) / closed)
    return CheckResult("worst_case", worst_gap <= 1e-9, f"max attainment error {worst_gap:.2e}")


def check_placement(seed: int = 0, instances: int = 50) -> CheckResult:
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        M = int(rng.integers(10, 31))
        N = int(rng.integers(1, 5))
        a_max = (M - 1) // (N - 1) if N > 1 else M
        a_min = int(rng.integers(1, a_max + 1))
        grid = SamplingGrid(M, 1.0, a_min / M)
        cmap = ChannelMap.from_estimates(grid, _crandn(rng, M))
        dp, bf = optimize_placement_dp(cmap, N), optimize_placement_bruteforce(cmap, N)
        if dp.indices != bf.indices or dp.objective != bf.objective:
            return CheckResult("placement", False, f"M={M} N={N} a_min={a_min}: {dp.indices} vs {bf.indices}")
    return CheckResult("placement", True, f"{instances} instances agree with enumeration")


def check_bernstein_function(seed: int = 0, points: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        sigma2, p, rho = rng.uniform(0.1, 2), rng.uniform(0.5, 2), rng.uniform(1e-3, RHO_THRESHOLD - 1e-3)
        y1 = y_zero(sigma2, p, rho)
        worst = max(worst, abs(f_of_y(y1, sigma2, p, rho)) / (sigma2 * p))
        y = rng.uniform(0, 10)
        h = 1e-6 * max(1.0, y)
        fd = (f_of_y(y + h, sigma2, p, rho) - f_of_y(y - h, sigma2, p, rho)) / (2 * h) if y > h else None
        if fd is not None and abs(fd - f_prime(y, sigma2, p, rho)) > 1e-6 * p:
            return CheckResult("bernstein_function", False, f"derivative mismatch at y={y}")
    return CheckResult("bernstein_function", worst <= 1e-9, f"max |F(y1)|/(sigma2 P) {worst:.2e}")


def check_bernstein_validity(seed: int = 0, trials: int = 4000) -> CheckResult:
    rng = np.random.default_rng(seed)
    for rho in (0.05, 0.2):
        h = _crandn(rng, 6)
        sigma2 = 0.02 * np.vdot(h, h).real
        result = bernstein_r0(h, sigma2, 1.0, rho)
        if result.branch is Branch.FALLBACK_Y2:
            continue
        try:
            validate_bernstein(h, sigma2, rho, trials, (seed, int(rho * 1000)))
        except ConsistencyError as exc:
            return CheckResult("bernstein_validity", False, str(exc))
    return CheckResult("bernstein_validity", True, "violation rates within three-sigma allowance")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "worst_case": check_worst_case,
    "placement": check_placement,
    "bernstein_function": check_bernstein_function,
    "bernstein_validity": check_bernstein_validity,
}


def run_all() -> list[CheckResult]:
    return [fn() for fn in CHECKS.values()]

"""Closed-form robust received-power analysis for a MISO link.

Two CSI error models are handled:

* norm-bounded error ``||e|| <= delta``: the worst-case received power of
  MRT is ``P_max * (||h_bar|| - delta)**2`` (zero once ``||h_bar|| <= delta``);
* Gaussian error ``e ~ CN(0, sigma2 I)``: a Bernstein-type sufficient
  condition turns the outage constraint into the scalar function

      F(y) = sigma2*P - sqrt(2 ln(1/rho)) * sqrt(sigma2**2 P**2 + 2 sigma2 P**2 y) + P*y

  of ``y = |h_bar^H w0|**2``; its maximum over ``[0, ||h_bar||**2]`` is the
  guaranteed non-outage power ``R0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DegenerateChannelError, InvalidParameterError

__all__ = [
    "RHO_THRESHOLD",
    "Beamformer",
    "WorstCaseResult",
    "Branch",
    "BernsteinResult",
    "mrt",
    "orthogonal_beamformer",
    "received_power",
    "worst_case_objective",
    "worst_case_power",
    "bernstein_lhs",
    "f_of_y",
    "f_prime",
    "f_second",
    "y_extreme",
    "y_zero",
    "bernstein_r0",
]

#: Outage probability below which F first decreases (F'(0) < 0).
RHO_THRESHOLD = math.exp(-0.5)


def _as_vector(h) -> np.ndarray:
    return np.asarray(h, dtype=complex).ravel()


def _check_rho(rho: float) -> None:
    # rho = 1 is admitted as the limit where the log term vanishes
    if not 0.0 < rho <= 1.0:
        raise InvalidParameterError(f"rho must lie in (0, 1), got {rho!r}")


def _log_factor(rho: float) -> float:
    """``sqrt(2 ln(1/rho))``."""
    _check_rho(rho)
    return math.sqrt(2.0 * math.log(1.0 / rho))


@dataclass(frozen=True)
class Beamformer:
    weights: np.ndarray
    p_max: float

    def __post_init__(self):
        w = _as_vector(self.weights)
        if not self.p_max > 0:
            raise InvalidParameterError(f"p_max must be positive, got {self.p_max!r}")
        if np.vdot(w, w).real > self.p_max * (1.0 + 1e-12):
            raise InvalidParameterError("beamformer exceeds the transmit power budget")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def normalized(self) -> np.ndarray:
        """``w / sqrt(P_max)``."""
        return self.weights / math.sqrt(self.p_max)

    @property
    def power(self) -> float:
        return float(np.vdot(self.weights, self.weights).real)


@dataclass(frozen=True)
class WorstCaseResult:
    power: float
    nulled: bool
    margin: float


class Branch(enum.Enum):
    MRT_MONOTONE = "mrt_monotone"
    MRT_PAST_ZERO = "mrt_past_zero"
    FALLBACK_Y2 = "fallback_y2"

    @property
    def is_mrt(self) -> bool:
        return self is not Branch.FALLBACK_Y2


@dataclass(frozen=True)
class BernsteinResult:
    """Maximized Bernstein bound for one channel estimate.

    ``r0`` is reported unclamped; it can be negative in the fallback branch.
    ``y1`` is ``None`` when ``rho >= exp(-1/2)``.
    """

    r0: float
    y_max: float
    y0: float
    y1: float | None
    y_star: float
    branch: Branch
    beamformer: Beamformer

    @property
    def r0_clamped(self) -> float:
        return max(self.r0, 0.0)


def mrt(h_bar, p_max: float) -> Beamformer:
    """Maximum-ratio transmission ``sqrt(P_max) * h_bar / ||h_bar||``."""
    h = _as_vector(h_bar)
    norm = np.linalg.norm(h)
    if norm == 0:
        raise DegenerateChannelError("MRT is undefined for a zero channel")
    return Beamformer(math.sqrt(p_max) * h / norm, p_max)


def orthogonal_beamformer(h_bar, p_max: float) -> Beamformer:
    """Full-power beamformer with ``h_bar^H w = 0``.

    Gram-Schmidt of the first standard basis vector that is not parallel to
    ``h_bar``; needs at least two antennas.
    """
    h = _as_vector(h_bar)
    norm = np.linalg.norm(h)
    if norm == 0:
        raise DegenerateChannelError("orthogonal direction undefined for a zero channel")
    if h.size < 2:
        raise InvalidParameterError("a single antenna has no direction orthogonal to the channel")
    u = h / norm
    for i in range(h.size):
        v = -np.conj(u[i]) * u
        v[i] += 1.0
        v_norm = np.linalg.norm(v)
        if v_norm > 1e-8:
            return Beamformer(math.sqrt(p_max) * v / v_norm, p_max)
    raise ConsistencyError("no basis vector escapes the channel direction")


def received_power(w, h) -> float:
    """``|w^H h|**2``; ``w`` may be a :class:`Beamformer` or a plain vector."""
    weights = w.weights if isinstance(w, Beamformer) else _as_vector(w)
    h = _as_vector(h)
    if weights.shape != h.shape:
        raise InvalidParameterError(
            f"beamformer length {weights.size} does not match channel length {h.size}"
        )
    return float(abs(np.vdot(weights, h)) ** 2)


def worst_case_objective(w, h_bar, delta: float) -> float:
    """Worst-case received power of an arbitrary beamformer over ``||e|| <= delta``."""
    weights = w.weights if isinstance(w, Beamformer) else _as_vector(w)
    gain = abs(np.vdot(weights, _as_vector(h_bar)))
    leak = delta * np.linalg.norm(weights)
    return 0.0 if gain <= leak else float((gain - leak) ** 2)


def worst_case_power(h_bar, delta: float, p_max: float) -> WorstCaseResult:
    """Optimal worst-case received power for fixed antenna positions.

    Attained by MRT together with the error ``-delta * h_bar / ||h_bar||``.
    """
    if not delta >= 0:
        raise InvalidParameterError(f"delta must be nonnegative, got {delta!r}")
    if not p_max > 0:
        raise InvalidParameterError(f"p_max must be positive, got {p_max!r}")
    margin = float(np.linalg.norm(_as_vector(h_bar))) - delta
    if margin <= 0:
        return WorstCaseResult(0.0, True, margin)
    return WorstCaseResult(p_max * margin**2, False, margin)


def bernstein_lhs(Q_trace: float, Q_fro2: float, r_norm2: float, s: float, rho: float) -> float:
    """Left side of the Bernstein sufficient condition; feasible iff ``>= 0``.

    ``Tr(Q) - sqrt(2 ln(1/rho) (||Q||_F**2 + 2 ||r||**2)) + s``
    """
    _check_rho(rho)
    if Q_fro2 < 0 or r_norm2 < 0:
        raise InvalidParameterError("squared norms must be nonnegative")
    return Q_trace - math.sqrt(2.0 * math.log(1.0 / rho) * (Q_fro2 + 2.0 * r_norm2)) + s


def f_of_y(y: float, sigma2: float, p_max: float, rho: float) -> float:
    c = _log_factor(rho)
    return sigma2 * p_max - c * math.sqrt(sigma2**2 * p_max**2 + 2.0 * sigma2 * p_max**2 * y) + p_max * y


def f_prime(y: float, sigma2: float, p_max: float, rho: float) -> float:
    c = _log_factor(rho)
    if sigma2 == 0:
        return float(p_max)
    # sigma2 * P**2 / sqrt(sigma2**2 P**2 + 2 sigma2 P**2 y) with P factored out
    return p_max - c * p_max * math.sqrt(sigma2) / math.sqrt(sigma2 + 2.0 * y)


def f_second(y: float, sigma2: float, p_max: float, rho: float) -> float:
    c = _log_factor(rho)
    if sigma2 == 0:
        return 0.0
    return c * sigma2**2 * p_max**4 / (sigma2**2 * p_max**2 + 2.0 * sigma2 * p_max**2 * y) ** 1.5


def y_extreme(sigma2: float, rho: float) -> float:
    """Stationary point of F, clamped to 0 when F is monotone on y >= 0."""
    _check_rho(rho)
    return max(0.5 * sigma2 * (2.0 * math.log(1.0 / rho) - 1.0), 0.0)


def y_zero(sigma2: float, p_max: float, rho: float) -> float:
    """Zero of F on its increasing branch.

    With ``t = sqrt(sigma2**2 P**2 + 2 sigma2 P**2 y)``, ``F = 0`` becomes
    ``t**2 - 2 c sigma2 P t + sigma2**2 P**2 = 0`` where ``c = sqrt(2 ln(1/rho))``.
    The larger root gives ``y1 = sigma2 * (d + c * sqrt(d))`` with ``d = c**2 - 1``.
    Returns 0 when ``rho >= exp(-1/2)`` (then ``F(0) >= 0``).
    """
    c = _log_factor(rho)
    if not p_max > 0:
        raise InvalidParameterError(f"p_max must be positive, got {p_max!r}")
    d = c * c - 1.0
    if rho >= RHO_THRESHOLD or sigma2 == 0:
        return 0.0
    if d < -1e-12:
        raise ConsistencyError(f"negative discriminant {d} for rho={rho} below threshold")
    d = max(d, 0.0)
    return sigma2 * (d + c * math.sqrt(d))


def bernstein_r0(h_bar, sigma2: float, p_max: float, rho: float) -> BernsteinResult:
    """Maximize the Bernstein bound over the beamformer for a fixed channel estimate."""
    h = _as_vector(h_bar)
    if not sigma2 >= 0:
        raise InvalidParameterError(f"sigma2 must be nonnegative, got {sigma2!r}")
    _check_rho(rho)
    w_mrt = mrt(h, p_max)
    y_max = float(np.vdot(h, h).real)
    y0 = y_extreme(sigma2, rho)

    def F(y):
        return f_of_y(y, sigma2, p_max, rho)

    if rho >= RHO_THRESHOLD:
        return BernsteinResult(F(y_max), y_max, y0, None, y_max, Branch.MRT_MONOTONE, w_mrt)
    y1 = y_zero(sigma2, p_max, rho)
    if y_max >= y1:
        return BernsteinResult(F(y_max), y_max, y0, y1, y_max, Branch.MRT_PAST_ZERO, w_mrt)
    # F is convex, so its maximum over [0, y_max] sits at an endpoint
    if h.size == 1 or F(y_max) >= F(0.0):
        return BernsteinResult(F(y_max), y_max, y0, y1, y_max, Branch.FALLBACK_Y2, w_mrt)
    return BernsteinResult(F(0.0), y_max, y0, y1, 0.0, Branch.FALLBACK_Y2, orthogonal_beamformer(h, p_max))

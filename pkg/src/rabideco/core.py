"""Closed-form primitives for driven two-level systems.

Angular frequencies are in radians per unit coordinate time. Probabilities
are plain floats; `clamp_probability` absorbs accumulated rounding at the
1e-12 level and treats anything worse as a bug.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Rounding slack for values that are probabilities in exact arithmetic.
PROB_TOL = 1e-12

# Lamb-Dicke parameter of the trapped-ion frequency ladder.
LAMB_DICKE = 0.202

# Above this n the direct comb/power product risks overflow; switch to logs.
BINOM_DIRECT_MAX_N = 60


class InitialState(enum.Enum):
    EXCITED = "excited"
    GROUND = "ground"


@dataclass(frozen=True)
class RabiSystem:
    """A resonantly driven two-level system and how it was prepared."""

    omega: float
    initial_state: InitialState = InitialState.EXCITED

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")


@dataclass(frozen=True, eq=False)
class ProbabilitySeries:
    """A sampled probability curve plus metadata naming its producer."""

    times: np.ndarray
    probs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)


def clamp_probability(value: float, tol: float = PROB_TOL) -> float:
    """Snap a float to [0, 1], tolerating rounding of at most `tol`.

    Values outside [-tol, 1 + tol] indicate a genuine error upstream and
    raise instead of being silently clipped.
    """
    if value < -tol or value > 1.0 + tol:
        raise ValueError(f"not a probability (beyond {tol} slack): {value!r}")
    return min(1.0, max(0.0, value))


def clamp_probability_array(values: np.ndarray, tol: float = PROB_TOL) -> np.ndarray:
    lo = float(values.min(initial=0.0))
    hi = float(values.max(initial=0.0))
    if lo < -tol or hi > 1.0 + tol:
        raise ValueError(f"not probabilities (beyond {tol} slack): range [{lo}, {hi}]")
    return np.clip(values, 0.0, 1.0)


def born_ground_prob(system: RabiSystem, t: float) -> float:
    """Probability to find the system in the ground state after evolving for t.

    sin^2(omega t) for excited preparation, cos^2(omega t) for ground
    preparation; t is a duration since the (active or passive) preparation
    and must be non-negative.
    """
    if t < 0.0:
        raise ValueError(f"evolution duration must be non-negative, got {t}")
    s2 = math.sin(system.omega * t) ** 2
    if system.initial_state is InitialState.EXCITED:
        return s2
    return 1.0 - s2


def born_excited_prob(system: RabiSystem, t: float) -> float:
    """Complement of `born_ground_prob` (cos^2 for excited preparation).

    Computed as 1 - born_ground_prob so the pair sums to 1 exactly.
    """
    return 1.0 - born_ground_prob(system, t)


def binomial_weight(n: int, k: int, beta: float) -> float:
    """Probability mass C(n,k) beta^k (1-beta)^(n-k).

    Exact comb/power product for n <= 60, log-gamma form above so that
    n ~ 10^4 neither overflows nor underflows. beta = 0 is rejected: the
    coordinate-time rescaling divides by beta.
    """
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise ValueError("n and k must be integers")
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if not (0.0 < beta <= 1.0):
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    if beta == 1.0:
        return 1.0 if k == n else 0.0
    if n <= BINOM_DIRECT_MAX_N:
        return math.comb(n, k) * beta**k * (1.0 - beta) ** (n - k)
    log_mass = (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(beta)
        + (n - k) * math.log1p(-beta)
    )
    return math.exp(log_mass)


def binomial_weights_row(n: int, beta: float) -> np.ndarray:
    """All masses b(n, k, beta) for k = 0..n as one array."""
    return np.array([binomial_weight(n, k, beta) for k in range(n + 1)])


def laguerre_l1(n: int, x: float) -> float:
    """Generalized Laguerre polynomial L^(1)_n(x) by three-term recurrence.

    L^(1)_0 = 1, L^(1)_1 = 2 - x, and for m >= 2
    L^(1)_m = ((2m - x) L^(1)_{m-1} - m L^(1)_{m-2}) / m.
    """
    if n < 0:
        raise ValueError(f"polynomial order must be non-negative, got {n}")
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    if n == 0:
        return 1.0
    prev = 1.0
    cur = 2.0 - x
    for m in range(2, n + 1):
        prev, cur = cur, ((2.0 * m - x) * cur - m * prev) / m
    return cur


@dataclass(frozen=True)
class FrequencyLadder:
    """Rabi frequencies between successive internal/vibrational level pairs."""

    base_omega: float
    lamb_dicke: float
    entries: tuple[tuple[int, float], ...]

    def omega_n(self, n: int) -> float:
        return self.entries[n][1]


def rabi_frequency_ladder(
    base_omega: float, n_max: int, lamb_dicke: float = LAMB_DICKE
) -> FrequencyLadder:
    """Ladder omega_n = base * eta * exp(-eta^2/2) * L^(1)_n(eta^2) / sqrt(n+1).

    eta is the Lamb-Dicke parameter (0.202 for the trap this ladder models;
    configurable for sensitivity studies).
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    x = lamb_dicke**2
    prefactor = lamb_dicke * math.exp(-x / 2.0)
    entries = tuple(
        (n, base_omega * prefactor * laguerre_l1(n, x) / math.sqrt(n + 1))
        for n in range(n_max + 1)
    )
    return FrequencyLadder(base_omega, lamb_dicke, entries)

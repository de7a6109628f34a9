"""Binomial-weighted nested predictor for indistinguishable interference events.

When neither the ensemble members nor the epochs at which the environment
collapses them can be told apart, the ground-state probability after n
epochs of length dt, allowing at most i collapses, obeys

    P_g^(j)(n dt) = sum_k b(n, k, beta) * ( cos^2(omega (n-k) dt) * P_g^(j-1)(k dt)
                                          + sin^2(omega (n-k) dt) * P_e^(j-1)(k dt) )

with the plain Born probabilities as level 0 and b the binomial mass with
interval probability beta. The excited-state rows swap the two trig
factors. Levels are filled bottom-up over the whole k range (dynamic
programming, O(i n^2)); the literal nested sum would cost O(n^i).

Coordinate time enters through the mean of the binomial distribution:
after stepping to n dt, on average beta*n intervals precede the last
collapse, so a clock reading t maps to the continuous index
n* = t / (beta dt), linearly interpolated between table columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    InitialState,
    ProbabilitySeries,
    RabiSystem,
    binomial_weights_row,
    clamp_probability,
    clamp_probability_array,
)


@dataclass(frozen=True)
class IndistinguishableEnv:
    """Interference scale dt, interval probability beta, truncation order.

    beta is the probability that a randomly chosen interval of length dt
    precedes an interference event; beta = 1 is perfect isolation. beta = 0
    and dt = 0 are rejected because the time rescaling divides by beta*dt.
    max_events is the largest number of collapses a member may suffer.
    """

    dt: float
    beta: float
    max_events: int = 5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.max_events < 0:
            raise ValueError(f"max_events must be >= 0, got {self.max_events}")


@dataclass(frozen=True, eq=False)
class NestedTable:
    """Per-level probability rows at the discrete times k dt.

    ground[j, k] and excited[j, k] are the ground/excited probabilities at
    k dt allowing at most j collapses, j = 0..max_events, k = 0..n_max.
    Immutable after construction; concurrent queries are safe.
    """

    system: RabiSystem
    env: IndistinguishableEnv
    n_max: int
    ground: np.ndarray
    excited: np.ndarray


def build_nested_table(
    system: RabiSystem, env: IndistinguishableEnv, n_max: int
) -> NestedTable:
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    levels = env.max_events
    ks = np.arange(n_max + 1)
    s2 = np.sin(system.omega * env.dt * ks) ** 2
    c2 = np.cos(system.omega * env.dt * ks) ** 2

    ground = np.empty((levels + 1, n_max + 1))
    excited = np.empty((levels + 1, n_max + 1))
    if system.initial_state is InitialState.EXCITED:
        ground[0], excited[0] = s2, c2
    else:
        ground[0], excited[0] = c2, s2

    # Binomial rows are level-independent; compute them once.
    weights = [binomial_weights_row(n, env.beta) for n in range(n_max + 1)]
    for j in range(1, levels + 1):
        g_prev, e_prev = ground[j - 1], excited[j - 1]
        for n in range(n_max + 1):
            w = weights[n]
            outer_c2 = c2[n::-1]  # cos^2(omega (n-k) dt) for k = 0..n
            outer_s2 = s2[n::-1]
            ground[j, n] = w @ (outer_c2 * g_prev[: n + 1] + outer_s2 * e_prev[: n + 1])
            excited[j, n] = w @ (outer_c2 * e_prev[: n + 1] + outer_s2 * g_prev[: n + 1])

    return NestedTable(
        system,
        env,
        n_max,
        clamp_probability_array(ground),
        clamp_probability_array(excited),
    )


def excited_counterpart(table: NestedTable) -> NestedTable:
    """The table built from the swapped base case (sin^2 and cos^2 exchanged).

    Swapping the base case propagates level by level to a plain exchange of
    the ground and excited rows, so this is also the elementwise complement
    of the original ground rows.
    """
    return NestedTable(
        table.system,
        table.env,
        table.n_max,
        table.excited.copy(),
        table.ground.copy(),
    )


def _continuous_index(table: NestedTable, env: IndistinguishableEnv, t_coord: float) -> float:
    if t_coord < 0.0:
        raise ValueError(f"coordinate time must be non-negative, got {t_coord}")
    n_star = t_coord / (env.beta * env.dt)
    if n_star > table.n_max:
        # Tolerate the last grid point landing epsilon past the table edge.
        if n_star <= table.n_max * (1.0 + 1e-12) + 1e-12:
            return float(table.n_max)
        raise ValueError(
            f"t={t_coord} maps to index {n_star:.3f} beyond the table "
            f"(n_max={table.n_max}); rebuild with a larger n_max"
        )
    return n_star


def rescale_to_coordinate_time(
    table: NestedTable, env: IndistinguishableEnv, t_coord: float
) -> float:
    """Top-level ground probability at clock time t_coord.

    Linear interpolation between the columns floor(n*) and ceil(n*) of the
    continuous index n* = t / (beta dt); exact table value when n* is
    integral. Nothing smoother is justified: the index is an ensemble mean.
    """
    n_star = _continuous_index(table, env, t_coord)
    row = table.ground[-1]
    lo = int(math.floor(n_star))
    if lo == n_star:
        return float(row[lo])
    frac = n_star - lo
    return clamp_probability((1.0 - frac) * row[lo] + frac * row[lo + 1])


def sample_rescaled_series(
    table: NestedTable, env: IndistinguishableEnv, grid
) -> ProbabilitySeries:
    """Vectorized `rescale_to_coordinate_time` over a sorted grid."""
    times = np.asarray(grid, dtype=float)
    meta = {
        "predictor": "indistinguishable",
        "omega": table.system.omega,
        "initial_state": table.system.initial_state.value,
        "dt": env.dt,
        "beta": env.beta,
        "max_events": env.max_events,
    }
    if times.size == 0:
        return ProbabilitySeries(times, np.empty(0), meta)
    if np.any(np.diff(times) < 0.0):
        raise ValueError("grid must be sorted ascending")
    _continuous_index(table, env, float(times[0]))
    _continuous_index(table, env, float(times[-1]))
    n_star = np.minimum(times / (env.beta * env.dt), float(table.n_max))
    probs = np.interp(n_star, np.arange(table.n_max + 1), table.ground[-1])
    return ProbabilitySeries(times, clamp_probability_array(probs), meta)


def approx_closed_form(
    system: RabiSystem, env: IndistinguishableEnv, t_coord: float
) -> float:
    """Dominant-term closed form of the nested predictor.

    Keeping only the k = n binomial weight and summing the remaining
    geometric series gives

        P_g(t) ~ (1/4) * (2 - z^(t/(beta dt)) - conj(z)^(t/(beta dt))),
        z = 1 - beta * (1 - exp(-2 i dt omega)),

    which is real. Good for beta near 1 and 2 omega dt < pi (the principal
    branch of the complex power); elsewhere it is only indicative.
    """
    if t_coord < 0.0:
        raise ValueError(f"coordinate time must be non-negative, got {t_coord}")
    z = 1.0 - env.beta * (1.0 - np.exp(-2.0j * env.dt * system.omega))
    w = z ** (t_coord / (env.beta * env.dt))
    val = 0.5 * (1.0 - w.real)
    if system.initial_state is InitialState.GROUND:
        val = 0.5 * (1.0 + w.real)
    return clamp_probability(float(val))


def approx_gamma(system: RabiSystem, env: IndistinguishableEnv) -> float:
    """Leading-order decay rate of the closed form: 2 (1-beta) omega^2 dt."""
    return 2.0 * (1.0 - env.beta) * system.omega**2 * env.dt

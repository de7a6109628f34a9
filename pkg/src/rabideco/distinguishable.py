"""Piecewise predictive probability for distinguishable interference events.

At every multiple of the interference time scale dt a fraction (1 - eta)
of the ensemble is passively measured: collapsed to ground or excited with
the Born weights of its current state, and its evolution clock reset to
zero. Between those epochs everything evolves unitarily, so the predicted
ground-state probability is piecewise: on [n dt, (n+1) dt) it is p_n, with

    p_0(t) = Born ground probability,
    p_n(t) = eta * p_{n-1}(t)
             + (1 - eta) * (cos^2(omega (t - n dt)) * p_{n-1}(n dt)
                            + sin^2(omega (t - n dt)) * (1 - p_{n-1}(n dt))).

Unrolling a query at time t therefore only needs the boundary values
p_{n-1}(n dt), which `build_predictor` tabulates once in O(n_max^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ProbabilitySeries,
    RabiSystem,
    born_excited_prob,
    born_ground_prob,
    clamp_probability,
    clamp_probability_array,
)


@dataclass(frozen=True)
class DistinguishableEnv:
    """Interference time scale dt and per-epoch survival probability eta.

    eta = 1 is a perfectly isolated ensemble; eta = 0 collapses everything
    at every epoch.
    """

    dt: float
    eta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")


@dataclass(frozen=True, eq=False)
class PiecewisePredictor:
    """Immutable boundary table; safe to query from many threads at once.

    boundary_values[n] holds p_{n-1}(n dt) for n >= 1 (entry 0 is the
    freshly prepared value at time zero).
    """

    system: RabiSystem
    env: DistinguishableEnv
    n_max: int
    boundary_values: np.ndarray


def _born_ground_array(system: RabiSystem, t: np.ndarray) -> np.ndarray:
    s2 = np.sin(system.omega * t) ** 2
    if system.initial_state.value == "excited":
        return s2
    return 1.0 - s2


def build_predictor(
    system: RabiSystem, env: DistinguishableEnv, n_max: int
) -> PiecewisePredictor:
    """Tabulate the boundary values p_{n-1}(n dt) for n = 1..n_max.

    Levels are swept once over the whole boundary grid, so the build costs
    O(n_max^2) arithmetic total instead of O(n_max^2) per entry.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    dt, eta, omega = env.dt, env.eta, system.omega
    boundary = np.empty(n_max + 1)
    boundary[0] = born_ground_prob(system, 0.0)
    if n_max == 0:
        return PiecewisePredictor(system, env, n_max, boundary)

    times = dt * np.arange(1, n_max + 1)
    lam = 1.0 - eta
    v = _born_ground_array(system, times)  # level 0 at every boundary point
    for j in range(1, n_max + 1):
        boundary[j] = v[j - 1]
        if j == n_max:
            break
        # Promote the points beyond j dt from level j-1 to level j.
        phase = omega * (times[j:] - j * dt)
        c2 = np.cos(phase) ** 2
        s2 = np.sin(phase) ** 2
        v[j:] = eta * v[j:] + lam * (c2 * boundary[j] + s2 * (1.0 - boundary[j]))
    return PiecewisePredictor(system, env, n_max, clamp_probability_array(boundary))


def _interval_index(pred: PiecewisePredictor, t_coord: float) -> int:
    if t_coord < 0.0:
        raise ValueError(f"coordinate time must be non-negative, got {t_coord}")
    n = int(math.floor(t_coord / pred.env.dt))
    if n > pred.n_max:
        raise ValueError(
            f"t={t_coord} lies beyond the built range "
            f"[0, {(pred.n_max + 1) * pred.env.dt}); rebuild with n_max >= {n}"
        )
    return n


def predict_ground_prob(pred: PiecewisePredictor, t_coord: float) -> float:
    """Predicted probability to find a member in the ground state at t_coord."""
    n = _interval_index(pred, t_coord)
    dt, eta, omega = pred.env.dt, pred.env.eta, pred.system.omega
    b = pred.boundary_values
    v = born_ground_prob(pred.system, t_coord)
    for j in range(1, n + 1):
        phase = omega * (t_coord - j * dt)
        c2 = math.cos(phase) ** 2
        s2 = math.sin(phase) ** 2
        v = eta * v + (1.0 - eta) * (c2 * b[j] + s2 * (1.0 - b[j]))
    return clamp_probability(v)


def predict_excited_prob(pred: PiecewisePredictor, t_coord: float) -> float:
    """Excited-state counterpart: same boundary table, cos^2/sin^2 swapped."""
    n = _interval_index(pred, t_coord)
    dt, eta, omega = pred.env.dt, pred.env.eta, pred.system.omega
    b = pred.boundary_values
    v = born_excited_prob(pred.system, t_coord)
    for j in range(1, n + 1):
        phase = omega * (t_coord - j * dt)
        c2 = math.cos(phase) ** 2
        s2 = math.sin(phase) ** 2
        v = eta * v + (1.0 - eta) * (s2 * b[j] + c2 * (1.0 - b[j]))
    return clamp_probability(v)


def sample_series(pred: PiecewisePredictor, grid) -> ProbabilitySeries:
    """Evaluate the ground-state predictor on a sorted, non-negative grid."""
    times = np.asarray(grid, dtype=float)
    meta = {
        "predictor": "distinguishable",
        "omega": pred.system.omega,
        "initial_state": pred.system.initial_state.value,
        "dt": pred.env.dt,
        "eta": pred.env.eta,
    }
    if times.size == 0:
        return ProbabilitySeries(times, np.empty(0), meta)
    if np.any(np.diff(times) < 0.0):
        raise ValueError("grid must be sorted ascending")
    _interval_index(pred, float(times[0]))
    _interval_index(pred, float(times[-1]))

    dt, eta, omega = pred.env.dt, pred.env.eta, pred.system.omega
    b = pred.boundary_values
    v = _born_ground_array(pred.system, times)
    for j in range(1, pred.n_max + 1):
        start = int(np.searchsorted(times, j * dt, side="left"))
        if start == times.size:
            break
        phase = omega * (times[start:] - j * dt)
        c2 = np.cos(phase) ** 2
        s2 = np.sin(phase) ** 2
        v[start:] = eta * v[start:] + (1.0 - eta) * (
            c2 * b[j] + s2 * (1.0 - b[j])
        )
    return ProbabilitySeries(times, clamp_probability_array(v), meta)

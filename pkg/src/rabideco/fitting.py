"""Master-equation baseline and all parameter estimation.

The damped-sinusoid fitter is a small Levenberg-Marquardt loop with an
analytic Jacobian: the model is offset + amplitude * exp(-gamma t) *
cos(2 omega t + phase), any subset of the five parameters free. Damping is
multiplied by 10 on a rejected step and divided by 10 on an accepted one,
so the residual decreases monotonically; iteration stops when the relative
parameter step drops below 1e-9 or after 200 iterations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ProbabilitySeries, clamp_probability, clamp_probability_array

PARAM_ORDER = ("gamma", "omega", "amplitude", "offset", "phase")

_STEP_TOL = 1e-9
_MAX_ITER = 200
_LAMBDA_MAX = 1e12


class FitConvergenceError(RuntimeError):
    """Raised when the damped-sinusoid fit cannot make progress.

    Carries the last iterate and its residual RMS for diagnosis.
    """

    def __init__(self, message: str, params: dict, residual_rms: float):
        super().__init__(f"{message} (last iterate {params}, residual rms {residual_rms:.3e})")
        self.params = params
        self.residual_rms = residual_rms


@dataclass(frozen=True)
class MasterEqParams:
    """On-resonance driving omega and spontaneous-emission rate gamma_se.

    Restricted to the underdamped regime gamma_se < 8 omega, where
    mu = sqrt(4 omega^2 - (gamma_se/4)^2) is real; the overdamped branch is
    out of scope.
    """

    omega: float
    gamma_se: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not (0.0 <= self.gamma_se < 8.0 * self.omega):
            raise ValueError(
                f"unsupported regime: need 0 <= gamma_se < 8*omega, "
                f"got gamma_se={self.gamma_se}, omega={self.omega}"
            )


def master_eq_prob(params: MasterEqParams, t: float) -> float:
    """Ground-state probability of the on-resonance master equation.

    (4 O^2 / (G^2 + 8 O^2)) * (1 - exp(-3Gt/4) (cos mu t + (3G/4mu) sin mu t))
    with mu = sqrt(4 O^2 - (G/4)^2). Reduces to sin^2(O t) at G = 0.
    """
    if t < 0.0:
        raise ValueError(f"evolution duration must be non-negative, got {t}")
    omega, g = params.omega, params.gamma_se
    mu = math.sqrt(4.0 * omega**2 - (g / 4.0) ** 2)
    pref = 4.0 * omega**2 / (g**2 + 8.0 * omega**2)
    val = pref * (
        1.0
        - math.exp(-3.0 * g * t / 4.0)
        * (math.cos(mu * t) + (3.0 * g / (4.0 * mu)) * math.sin(mu * t))
    )
    return clamp_probability(val)


def master_eq_series(params: MasterEqParams, grid) -> ProbabilitySeries:
    times = np.asarray(grid, dtype=float)
    if times.size and times.min() < 0.0:
        raise ValueError("grid times must be non-negative")
    omega, g = params.omega, params.gamma_se
    mu = math.sqrt(4.0 * omega**2 - (g / 4.0) ** 2)
    pref = 4.0 * omega**2 / (g**2 + 8.0 * omega**2)
    vals = pref * (
        1.0
        - np.exp(-0.75 * g * times)
        * (np.cos(mu * times) + (3.0 * g / (4.0 * mu)) * np.sin(mu * times))
    )
    meta = {"predictor": "master-eq", "omega": omega, "gamma_se": g}
    return ProbabilitySeries(times, clamp_probability_array(vals), meta)


@dataclass(frozen=True)
class DampedSinusoidFit:
    """Result of fitting offset + amplitude e^{-gamma t} cos(2 omega t + phase)."""

    gamma: float
    omega_fit: float
    amplitude: float
    offset: float
    phase: float
    residual_rms: float
    free_params: frozenset = field(default_factory=frozenset)
    iterations: int = 0
    degenerate: bool = False


def damped_sinusoid_model(t: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Model values for params ordered (gamma, omega, amplitude, offset, phase)."""
    gamma, omega, amp, off, phase = params
    return off + amp * np.exp(-gamma * t) * np.cos(2.0 * omega * t + phase)


def damped_sinusoid_jacobian(t: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Analytic Jacobian, columns in PARAM_ORDER."""
    gamma, omega, amp, off, phase = params
    decay = np.exp(-gamma * t)
    arg = 2.0 * omega * t + phase
    cos_a, sin_a = np.cos(arg), np.sin(arg)
    jac = np.empty((t.size, 5))
    jac[:, 0] = -t * amp * decay * cos_a
    jac[:, 1] = -2.0 * t * amp * decay * sin_a
    jac[:, 2] = decay * cos_a
    jac[:, 3] = 1.0
    jac[:, 4] = -amp * decay * sin_a
    return jac


def fit_damped_sinusoid(
    series: ProbabilitySeries,
    omega_hint: float,
    free_params: frozenset | set | None = None,
) -> DampedSinusoidFit:
    """Least-squares fit of the damped sinusoid to a probability series.

    By default gamma and omega are free (gamma starts at 0, omega at
    omega_hint) while amplitude = -1/2, offset = 1/2, phase = 0 stay fixed.
    The series must have at least 10 points spanning two oscillation
    periods of the hinted frequency. A constant series yields a flat fit
    flagged degenerate with gamma = nan.
    """
    if omega_hint <= 0.0 or not math.isfinite(omega_hint):
        raise ValueError(f"omega_hint must be positive and finite, got {omega_hint}")
    free = frozenset(free_params) if free_params is not None else frozenset({"gamma", "omega"})
    unknown = free - set(PARAM_ORDER)
    if unknown:
        raise ValueError(f"unknown fit parameters: {sorted(unknown)}")
    if not free:
        raise ValueError("at least one parameter must be free")

    t = np.asarray(series.times, dtype=float)
    y = np.asarray(series.probs, dtype=float)
    if t.size < 10:
        raise ValueError(f"need at least 10 points, got {t.size}")
    span = float(t[-1] - t[0])
    if span * omega_hint < 2.0 * math.pi:
        raise ValueError(
            f"series spans {span * omega_hint / math.pi:.2f} half-periods of the "
            f"hinted frequency; need at least two full periods"
        )

    if float(np.ptp(y)) < 1e-12:
        return DampedSinusoidFit(
            gamma=math.nan,
            omega_fit=math.nan,
            amplitude=0.0,
            offset=float(np.mean(y)),
            phase=0.0,
            residual_rms=float(np.std(y)),
            free_params=free,
            degenerate=True,
        )

    params = np.array([0.0, omega_hint, -0.5, 0.5, 0.0])
    free_idx = [i for i, name in enumerate(PARAM_ORDER) if name in free]

    resid = damped_sinusoid_model(t, params) - y
    sse = float(resid @ resid)
    lam = 1e-3
    iterations = 0
    while iterations < _MAX_ITER:
        iterations += 1
        jac = damped_sinusoid_jacobian(t, params)[:, free_idx]
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        diag = np.diag(jtj).copy()
        diag[diag <= 0.0] = 1e-30
        try:
            step = np.linalg.solve(jtj + lam * np.diag(diag), -jtr)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)):
            trial = params.copy()
            trial[free_idx] += step
            trial_resid = damped_sinusoid_model(t, trial) - y
            trial_sse = float(trial_resid @ trial_resid)
        else:
            trial_sse = math.inf
        if math.isfinite(trial_sse) and trial_sse <= sse:
            rel_step = float(
                np.max(np.abs(step) / (np.abs(params[free_idx]) + 1e-12))
            )
            params, resid, sse = trial, trial_resid, trial_sse
            lam = max(lam / 10.0, 1e-12)
            if rel_step < _STEP_TOL:
                break
        else:
            lam *= 10.0
            if lam > _LAMBDA_MAX:
                raise FitConvergenceError(
                    "damping exhausted without residual decrease",
                    dict(zip(PARAM_ORDER, (float(p) for p in params))),
                    math.sqrt(sse / t.size),
                )

    gamma = float(params[0])
    if -1e-9 < gamma < 0.0:
        gamma = 0.0  # exactly undamped inputs may round a hair negative
    return DampedSinusoidFit(
        gamma=gamma,
        omega_fit=float(params[1]),
        amplitude=float(params[2]),
        offset=float(params[3]),
        phase=float(params[4]),
        residual_rms=math.sqrt(sse / t.size),
        free_params=free,
        iterations=iterations,
    )


@dataclass(frozen=True)
class PowerLawFit:
    """Exponent p of ratio = (1+n)^p, fit in log space."""

    exponent: float
    residual_rms: float
    degenerate: bool = False


def fit_power_law(ratios) -> PowerLawFit:
    """Least squares of log(ratio) against p * log(1+n).

    `ratios` is a sequence of (n, ratio) pairs with positive ratios; the
    model passes through ratio = 1 at n = 0 by construction. A single
    n = 0 point leaves the exponent undetermined (flagged degenerate).
    """
    pairs = list(ratios)
    if not pairs:
        raise ValueError("need at least one (n, ratio) pair")
    ns = np.array([p[0] for p in pairs], dtype=float)
    rs = np.array([p[1] for p in pairs], dtype=float)
    if np.any(rs <= 0.0):
        raise ValueError("ratios must be positive for a log-space fit")
    x = np.log1p(ns)
    y = np.log(rs)
    sxx = float(x @ x)
    if sxx == 0.0:
        return PowerLawFit(exponent=math.nan, residual_rms=0.0, degenerate=True)
    exponent = float(x @ y) / sxx
    resid = y - exponent * x
    return PowerLawFit(exponent=exponent, residual_rms=float(np.sqrt(np.mean(resid**2))))

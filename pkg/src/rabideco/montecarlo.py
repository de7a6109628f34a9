"""Seeded stochastic oracle for both predictors, recursion-free.

`simulate_distinguishable` plays out the collapse scenario trajectory by
trajectory: at every multiple of dt each member suffers, with probability
1 - eta, a passive measurement that collapses it to ground or excited with
its current Born weights and resets its evolution clock. Between collapses
the evolution is the plain unitary Born law with the reset clock; there is
no effective non-Hermitian Hamiltonian anywhere.

Trajectories are processed in fixed blocks of `BLOCK_SIZE`, each block
drawing from its own stream spawned from (seed, block index), so serial
runs and runs distributed block-by-block produce bit-identical output.
Within a block the draw order is: per epoch a collapse-occurrence vector
then an outcome vector, per grid time a measurement vector, all events in
time order with epochs preceding grid times at ties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InitialState, ProbabilitySeries, RabiSystem
from .distinguishable import DistinguishableEnv
from .indistinguishable import IndistinguishableEnv

BLOCK_SIZE = 65536


@dataclass(frozen=True, eq=False)
class EnsembleConfig:
    """Ensemble size, master seed, and the measurement grid."""

    n_systems: int
    seed: int
    grid: tuple = ()

    def __post_init__(self) -> None:
        if self.n_systems < 1:
            raise ValueError(f"n_systems must be >= 1, got {self.n_systems}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Passive preparations suffered by one member: when, and into what."""

    passive_prep_times: tuple
    passive_prep_states: tuple


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _validated_grid(grid) -> np.ndarray:
    times = np.asarray(grid, dtype=float)
    if times.size and (np.any(np.diff(times) < 0.0) or times[0] < 0.0):
        raise ValueError("grid must be sorted ascending and non-negative")
    return times


def sample_trajectory(
    system: RabiSystem,
    env: DistinguishableEnv,
    t_max: float,
    rng: np.random.Generator,
) -> TrajectoryRecord:
    """One member's passive-preparation history up to t_max (reference process)."""
    n_epochs = int(math.floor(t_max / env.dt + 1e-9))
    in_ground = system.initial_state is InitialState.GROUND
    t_reset = 0.0
    times: list[float] = []
    states: list[InitialState] = []
    for n in range(1, n_epochs + 1):
        t_epoch = n * env.dt
        if rng.random() >= 1.0 - env.eta:
            continue
        phase = system.omega * (t_epoch - t_reset)
        p_ground = math.cos(phase) ** 2 if in_ground else math.sin(phase) ** 2
        in_ground = rng.random() < p_ground
        t_reset = t_epoch
        times.append(t_epoch)
        states.append(InitialState.GROUND if in_ground else InitialState.EXCITED)
    return TrajectoryRecord(tuple(times), tuple(states))


def simulate_distinguishable(
    system: RabiSystem, env: DistinguishableEnv, cfg: EnsembleConfig
) -> ProbabilitySeries:
    """Fraction of the ensemble found in the ground state at each grid time.

    Each member is measured independently at every grid time (a Bernoulli
    draw with its current Born probability); the collapse epochs at
    multiples of dt advance its hidden state. Deterministic per seed.
    """
    times = _validated_grid(cfg.grid)
    meta = {
        "predictor": "monte-carlo-distinguishable",
        "omega": system.omega,
        "initial_state": system.initial_state.value,
        "dt": env.dt,
        "eta": env.eta,
        "n_systems": cfg.n_systems,
        "seed": cfg.seed,
    }
    if times.size == 0:
        return ProbabilitySeries(times, np.empty(0), meta)

    n_epochs = int(math.floor(float(times[-1]) / env.dt + 1e-9))
    # (time, is_grid, payload); epochs sort before grid points at equal times
    events = [(n * env.dt, 0, n) for n in range(1, n_epochs + 1)]
    events += [(float(t), 1, i) for i, t in enumerate(times)]
    events.sort(key=lambda e: (e[0], e[1]))

    lam = 1.0 - env.eta
    omega = system.omega
    counts = np.zeros(times.size, dtype=np.int64)
    n_blocks = (cfg.n_systems + BLOCK_SIZE - 1) // BLOCK_SIZE
    for block in range(n_blocks):
        size = min(BLOCK_SIZE, cfg.n_systems - block * BLOCK_SIZE)
        rng = _block_rng(cfg.seed, block)
        in_ground = np.full(size, system.initial_state is InitialState.GROUND)
        t_reset = np.zeros(size)
        for t_event, is_grid, payload in events:
            draw = rng.random(size)
            phase = omega * (t_event - t_reset)
            p_ground = np.where(in_ground, np.cos(phase) ** 2, np.sin(phase) ** 2)
            if is_grid:
                counts[payload] += int(np.count_nonzero(draw < p_ground))
            else:
                hit = draw < lam
                outcome = rng.random(size) < p_ground
                in_ground[hit] = outcome[hit]
                t_reset[hit] = t_event
    probs = counts / float(cfg.n_systems)
    return ProbabilitySeries(times, probs, meta)


def chain_samples(
    system: RabiSystem, env: IndistinguishableEnv, n: int, cfg: EnsembleConfig
) -> np.ndarray:
    """Per-sample unbiased estimates of the nested predictor at n dt.

    Each sample draws the interval-count chain k_1 ~ Binomial(n, beta),
    k_2 ~ Binomial(k_1, beta), ... (max_events draws) and multiplies the
    corresponding cos^2/sin^2 transfer factors down to the Born base case,
    exactly mirroring the nested sum. This estimates the formula; it is not
    a per-system physical history.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    rng = _block_rng(cfg.seed, 0)
    size = cfg.n_systems
    ks = [np.full(size, n, dtype=np.int64)]
    for _ in range(env.max_events):
        ks.append(rng.binomial(ks[-1], env.beta))

    base_phase = system.omega * env.dt * ks[-1]
    s2 = np.sin(base_phase) ** 2
    if system.initial_state is InitialState.EXCITED:
        vg, ve = s2, 1.0 - s2
    else:
        vg, ve = 1.0 - s2, s2
    for level in range(env.max_events - 1, -1, -1):
        gap_phase = system.omega * env.dt * (ks[level] - ks[level + 1])
        c2 = np.cos(gap_phase) ** 2
        s2 = np.sin(gap_phase) ** 2
        vg, ve = c2 * vg + s2 * ve, c2 * ve + s2 * vg
    return vg


def simulate_indistinguishable_chain(
    system: RabiSystem, env: IndistinguishableEnv, n: int, cfg: EnsembleConfig
) -> float:
    """Mean of `chain_samples`: Monte Carlo estimate of the table entry at n dt."""
    return float(np.mean(chain_samples(system, env, n, cfg)))

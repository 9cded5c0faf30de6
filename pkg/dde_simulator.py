#!/usr/bin/env python3
"""
Delay Differential Equation Simulator
Fixed-step fourth-order Runge-Kutta integration of

    x'(t) = A0 x(t) + A1 x(t - tau),   x(t) = x0 for t in [-tau, 0]

by the method of steps: the delayed state is read back from the stored
trajectory with linear interpolation between samples. Used to confirm the
stability verdicts of the sweep in the time domain.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd

import config
from errors import ConfigurationError
from system_model import RetardedSystem

logger = logging.getLogger(__name__)


class Verdict(Enum):
    DECAYING = 'decaying'
    GROWING = 'growing'
    INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class SimConfig:
    tau: float
    horizon: float
    dt: float
    x0: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'x0', tuple(float(v) for v in np.ravel(self.x0)))
        if not self.tau >= 0.0:
            raise ConfigurationError("tau must be nonnegative")
        if not self.horizon > 0.0:
            raise ConfigurationError("horizon must be positive")
        if not self.dt > 0.0:
            raise ConfigurationError("dt must be positive")
        if self.dt > self.horizon:
            raise ConfigurationError("dt must not exceed the horizon")
        if self.tau > 0.0 and self.dt > self.tau / 10.0 * (1.0 + 1e-12):
            raise ConfigurationError(f"dt = {self.dt} is too coarse for tau = {self.tau}; need dt <= tau/10")
        if not self.x0:
            raise ConfigurationError("x0 must not be empty")
        if self.steps > config.SIM_MAX_STEPS:
            raise ConfigurationError(f"simulation needs {self.steps} steps of dt = {self.dt}, above the cap of "
                                     f"{config.SIM_MAX_STEPS} (DELAY_MARGIN_SIM_MAX_STEPS); shorten the horizon")

    @property
    def steps(self) -> int:
        return int(math.ceil(self.horizon / self.dt - 1e-9))


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    diverged: bool = False

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.x, columns=[f"x{i + 1}" for i in range(self.x.shape[1])])
        frame.insert(0, 't', self.t)
        return frame


def simulate(system: RetardedSystem, cfg: SimConfig) -> Trajectory:
    """Integrate the delayed system from a constant pre-history x0"""
    x0 = np.array(cfg.x0, dtype=float)
    if x0.size != system.n:
        raise ConfigurationError(f"x0 has {x0.size} entries, system has {system.n} states")

    a0, a1 = system.a0, system.a1
    if cfg.tau == 0.0:
        # no history to read: integrate the delay-free system A0 + A1
        a0, a1 = system.closed_loop, np.zeros_like(system.a1)

    dt = cfg.dt
    steps = cfg.steps
    lag = cfg.tau / dt
    history = np.empty((steps + 1, system.n))
    history[0] = x0
    limit = config.DIVERGENCE_FACTOR * max(float(np.linalg.norm(x0)), 1.0)

    def delayed(position: float) -> np.ndarray:
        if position <= 0.0:
            return x0
        i = int(math.floor(position))
        w = position - i
        if w == 0.0:
            return history[i]
        return (1.0 - w) * history[i] + w * history[i + 1]

    last = steps
    diverged = False
    for k in range(steps):
        x = history[k]
        if cfg.tau > 0.0:
            d_start = a1 @ delayed(k - lag)
            d_mid = a1 @ delayed(k + 0.5 - lag)
            d_end = a1 @ delayed(k + 1.0 - lag)
        else:
            d_start = d_mid = d_end = 0.0
        k1 = a0 @ x + d_start
        k2 = a0 @ (x + 0.5 * dt * k1) + d_mid
        k3 = a0 @ (x + 0.5 * dt * k2) + d_mid
        k4 = a0 @ (x + dt * k3) + d_end
        history[k + 1] = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(history[k + 1])) or np.linalg.norm(history[k + 1]) > limit:
            logger.info("💥 Trajectory diverged at t = %.6g s (tau = %.6g s)", (k + 1) * dt, cfg.tau)
            last = k + 1
            diverged = True
            break

    t = dt * np.arange(last + 1, dtype=float)
    return Trajectory(t=t, x=history[:last + 1].copy(), diverged=diverged)


def default_dt(tau: float, horizon: float) -> float:
    dt = min(0.01, horizon / 1000.0)
    if tau > 0.0:
        dt = min(dt, tau / 20.0)
    return dt


def default_horizon(omega: Optional[float]) -> float:
    """Fifty periods of the given crossing frequency, so slow modes can show"""
    if omega is None or not omega > 0.0:
        return 100.0
    return 50.0 * 2.0 * math.pi / omega


def classify_envelope(trajectory: Trajectory, horizon: float) -> Verdict:
    """Compare the peak norm in the last 20% of the horizon with the first 20%"""
    if trajectory.diverged:
        return Verdict.GROWING
    norms = trajectory.norms()
    first = norms[trajectory.t <= 0.2 * horizon]
    last = norms[trajectory.t >= 0.8 * horizon]
    if first.size == 0 or last.size == 0:
        return Verdict.INCONCLUSIVE
    early, late = float(np.max(first)), float(np.max(last))
    if early == 0.0:
        return Verdict.INCONCLUSIVE if late == 0.0 else Verdict.GROWING
    ratio = late / early
    if ratio < config.DECAY_RATIO:
        return Verdict.DECAYING
    if ratio > config.GROWTH_RATIO:
        return Verdict.GROWING
    return Verdict.INCONCLUSIVE


def verdict(system: RetardedSystem, tau: float, horizon: float, dt: Optional[float] = None) -> Verdict:
    """Decaying / Growing / Inconclusive from a simulation with x0 = normalized ones"""
    dt = default_dt(tau, horizon) if dt is None else dt
    x0 = np.ones(system.n) / math.sqrt(system.n)
    trajectory = simulate(system, SimConfig(tau=tau, horizon=horizon, dt=dt, x0=tuple(x0)))
    result = classify_envelope(trajectory, horizon)
    logger.info("🔎 tau = %.6g s over %.6g s: %s", tau, horizon, result.value)
    return result

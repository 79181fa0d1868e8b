"""Continuous muscle model, linearization, and zero-order-hold discretization.

The force dynamics are df/dt = f_max / (tau * (1 + exp(-r))) - f / tau,
with motorneuron firing rate r as input. Everything downstream works in
deviations (delta) from an equilibrium operating point; absolute traces
are reconstructed only at presentation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MuscleParams",
    "OperatingPoint",
    "DiscretePlant",
    "equilibrium_force",
    "linearize",
    "discretize",
    "open_loop_sim",
]


@dataclass(frozen=True)
class MuscleParams:
    """Maximum force output (N) and time constant (s) of the muscle."""

    f_max: float
    tau: float

    def __post_init__(self):
        if self.f_max <= 0:
            raise ValueError("f_max must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class OperatingPoint:
    """Equilibrium firing rate and the force it sustains."""

    r_bar: float
    f_bar: float

    @classmethod
    def from_rate(cls, p: MuscleParams, r_bar: float) -> "OperatingPoint":
        return cls(r_bar=r_bar, f_bar=equilibrium_force(p, r_bar))


@dataclass(frozen=True)
class DiscretePlant:
    """Scalar discrete-time plant delta_f(t+1) = a*delta_f(t) + b*delta_r(t)."""

    a: float
    b: float
    ts: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError("state coefficient must satisfy 0 < a < 1")
        if self.ts <= 0:
            raise ValueError("sampling time must be positive")


def equilibrium_force(p: MuscleParams, r_bar: float) -> float:
    """Steady-state force at constant firing rate r_bar."""
    return p.f_max / (1.0 + math.exp(-r_bar))


def linearize(p: MuscleParams, op: OperatingPoint):
    """Continuous-time (a_c, b_c) of the force dynamics at the operating point.

    a_c is the force self-decay rate (always -1/tau); b_c is the slope of
    the activation sigmoid scaled by f_max/tau, evaluated at r_bar.
    """
    e = math.exp(-op.r_bar)
    a_c = -1.0 / p.tau
    b_c = p.f_max * e / (p.tau * (1.0 + e) ** 2)
    return a_c, b_c


def discretize(a_c: float, b_c: float, ts: float) -> DiscretePlant:
    """Exact zero-order-hold discretization of the scalar pair (a_c, b_c)."""
    if ts <= 0:
        raise ValueError("sampling time must be positive")
    a = math.exp(a_c * ts)
    b = (a - 1.0) / a_c * b_c
    return DiscretePlant(a=a, b=b, ts=ts)


def open_loop_sim(plant: DiscretePlant, inputs, steps: int) -> np.ndarray:
    """Simulate delta_f for `steps` samples from rest, zero-padding the input."""
    u = np.zeros(steps)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.size > steps:
        raise ValueError("input longer than requested number of steps")
    u[: inputs.size] = inputs
    df = np.zeros(steps)
    for t in range(steps - 1):
        df[t + 1] = plant.a * df[t] + plant.b * u[t]
    return df

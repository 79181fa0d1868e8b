"""Closed-loop simulation of plant, disturbance, and controller.

The controller may be given as the raw gain triple, as a state-space
realization of the full pipeline, or as a neural circuit; all three run
the same linear recursion and must produce identical force and
firing-rate traces. A force disturbance w(t) perturbs delta_f at step t
itself, so a controller with two steps of net delay first reacts at
onset + 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import EXTERNAL, NeuralCircuit
from .lqr import LqrWeights, OptimalGains, gains_to_tf
from .muscle import DiscretePlant, OperatingPoint
from .realization import Realization, tf_of
from .transfer import relative_degree

__all__ = [
    "Disturbance",
    "pulse",
    "no_disturbance",
    "ClosedLoopTrace",
    "closed_loop",
    "cost_of_trace",
    "trace_to_csv",
]


@dataclass(frozen=True)
class Disturbance:
    """Additive force disturbance; pulse of given amplitude or nothing."""

    amplitude: float = 0.0
    start: int = 0
    duration: int = 1

    def sample(self, t: int) -> float:
        if self.amplitude != 0.0 and self.start <= t < self.start + self.duration:
            return self.amplitude
        return 0.0


def pulse(amplitude: float, start: int, duration: int) -> Disturbance:
    if duration < 1:
        raise ValueError("pulse duration must be at least one step")
    if not np.isfinite(amplitude):
        raise ValueError("pulse amplitude must be finite")
    return Disturbance(amplitude=amplitude, start=start, duration=duration)


def no_disturbance() -> Disturbance:
    return Disturbance(amplitude=0.0)


@dataclass
class ClosedLoopTrace:
    """Force/firing-rate deviations plus optional per-neuron traces.

    Absolute views add the equilibrium values back in; they exist purely
    for presentation.
    """

    t: np.ndarray
    delta_f: np.ndarray
    delta_r: np.ndarray
    f_bar: float = 0.0
    r_bar: float = 0.0
    neuron_traces: dict | None = None

    @property
    def f_abs(self):
        return self.delta_f + self.f_bar

    @property
    def r_abs(self):
        return self.delta_r + self.r_bar


class _GainsController:
    def __init__(self, gains: OptimalGains):
        self.k = gains
        self.gamma = 0.0
        self.delta_r = 0.0

    def step(self, delta_f):
        out = self.delta_r
        mu = self.k.k0 * delta_f + self.k.k1 * self.gamma + self.k.k2 * self.delta_r
        self.delta_r = self.gamma
        self.gamma = mu
        return out


class _RealizationController:
    def __init__(self, r: Realization):
        self.r = r
        self.x = np.zeros(r.order)

    def step(self, delta_f):
        out = self.r.m @ self.x + self.r.n_ff * delta_f
        self.x = self.r.f @ self.x + self.r.h * delta_f
        return out


class _CircuitController:
    def __init__(self, c: NeuralCircuit):
        self.c = c
        self.out = {n.id: 0.0 for n in c.neurons}

    def step(self, delta_f):
        val = dict(self.out)
        val[EXTERNAL] = delta_f
        y = sum(w * val[src] for src, w in self.c.output_taps)
        nxt = {}
        for n in self.c.neurons:
            acc = n.self_weight * self.out[n.id]
            for src, w in n.synapses:
                acc += w * val[src]
            nxt[n.id] = acc
        self.out = nxt
        return y


def _controller_tf(controller):
    if isinstance(controller, OptimalGains):
        return gains_to_tf(controller)
    if isinstance(controller, Realization):
        return tf_of(controller)
    if isinstance(controller, NeuralCircuit):
        from .circuit import circuit_realization

        return tf_of(circuit_realization(controller))
    raise TypeError(f"unsupported controller type {type(controller).__name__}")


def closed_loop(
    plant: DiscretePlant,
    controller,
    d: Disturbance,
    steps: int,
    op: OperatingPoint | None = None,
) -> ClosedLoopTrace:
    """Simulate the disturbed loop for `steps` samples.

    The controller must realize a transfer function of relative degree
    at least 2; anything faster would outrun the sensorimotor delay the
    synthesis assumed.
    """
    deg = relative_degree(_controller_tf(controller).cancel())
    if deg < 2:
        raise ValueError(f"controller relative degree {deg} < 2 violates the net delay")
    if isinstance(controller, OptimalGains):
        ctl = _GainsController(controller)
    elif isinstance(controller, Realization):
        ctl = _RealizationController(controller)
    else:
        ctl = _CircuitController(controller)

    delta_f = np.zeros(steps)
    delta_r = np.zeros(steps)
    neuron_traces = (
        {n.id: np.zeros(steps) for n in controller.neurons}
        if isinstance(controller, NeuralCircuit)
        else None
    )
    df = d.sample(0)
    for t in range(steps):
        delta_f[t] = df
        if neuron_traces is not None:
            for nid, val in ctl.out.items():
                neuron_traces[nid][t] = val
        delta_r[t] = ctl.step(df)
        df = plant.a * df + plant.b * delta_r[t] + d.sample(t + 1)

    return ClosedLoopTrace(
        t=np.arange(steps) * plant.ts,
        delta_f=delta_f,
        delta_r=delta_r,
        f_bar=op.f_bar if op is not None else 0.0,
        r_bar=op.r_bar if op is not None else 0.0,
        neuron_traces=neuron_traces,
    )


def cost_of_trace(trace: ClosedLoopTrace, w: LqrWeights) -> float:
    """Quadratic cost sum q*delta_f^2 + r*delta_r^2 over the horizon."""
    return float(w.q * np.sum(trace.delta_f**2) + w.r * np.sum(trace.delta_r**2))


def trace_to_csv(trace: ClosedLoopTrace, header_comment: str | None = None) -> str:
    """Deterministic CSV text: t, deltas, absolute views, neuron columns."""
    neuron_ids = sorted(trace.neuron_traces) if trace.neuron_traces else []
    cols = ["t", "delta_f", "delta_r", "f_abs", "r_abs"] + [f"neuron_{nid}" for nid in neuron_ids]
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append(",".join(cols))
    data = [trace.t, trace.delta_f, trace.delta_r, trace.f_abs, trace.r_abs]
    data += [trace.neuron_traces[nid] for nid in neuron_ids]
    for row in zip(*data):
        lines.append(",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"

"""Linear rate-neuron circuits.

A neuron's next output is a weighted sum of its current synaptic inputs
plus a self-dynamics term on its own current output, with one timestep
of axon delay. One neuron carries one state of a realization; the
delay-free output combination (the M and N paths) is delivered as
synapses into whatever consumes the circuit, so circuit simulation and
state-space simulation run the same recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .realization import Realization
from .structure import GAIN, UNIT_DELAY, ControllerStructure

__all__ = [
    "Neuron",
    "NeuralCircuit",
    "circuit_of",
    "circuit_realization",
    "neuron_count",
    "summation_site_count",
    "branch_count",
    "simulate_circuit",
    "realization_of_structure",
]

EXTERNAL = "__input__"


@dataclass(frozen=True)
class Neuron:
    """One rate neuron: self-dynamics weight plus weighted synapses.

    Synapse sources are neuron ids or the external-input sentinel.
    """

    id: str
    self_weight: float
    synapses: tuple  # of (source, weight)


class NeuralCircuit:
    """Neurons plus the delay-free taps that feed the downstream consumer."""

    def __init__(self, neurons, output_taps, external_input="u"):
        self.neurons = tuple(neurons)
        self.output_taps = tuple(output_taps)
        self.external_input = external_input
        ids = [n.id for n in self.neurons]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate neuron ids")
        known = set(ids) | {EXTERNAL}
        for n in self.neurons:
            for src, _ in n.synapses:
                if src not in known:
                    raise ValueError(f"neuron {n.id} has a synapse from unknown source {src!r}")
        if not self.output_taps:
            raise ValueError("circuit needs at least one output tap")
        for src, _ in self.output_taps:
            if src not in known:
                raise ValueError(f"output tap from unknown source {src!r}")

    def neuron(self, neuron_id):
        for n in self.neurons:
            if n.id == neuron_id:
                return n
        raise KeyError(neuron_id)

    def to_text(self):
        lines = [f"input {self.external_input}"]
        for n in self.neurons:
            lines.append(f"neuron {n.id} {n.self_weight!r}")
        for n in self.neurons:
            for src, w in n.synapses:
                name = self.external_input if src == EXTERNAL else src
                lines.append(f"synapse {name} {n.id} {w!r}")
        for src, w in self.output_taps:
            name = self.external_input if src == EXTERNAL else src
            lines.append(f"output {name} {w!r}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"NeuralCircuit({len(self.neurons)} neurons, {len(self.output_taps)} output taps)"


def realization_of_structure(s: ControllerStructure) -> Realization:
    """Recover (F, H, M, N) from a structure with one delay per state.

    The delay-free part of the graph is linear, so probing it with unit
    vectors on the delay outputs and on the external input reads the
    matrices off exactly. Structures with delay-free cycles are rejected
    by the structure itself.
    """
    delays = [b for b in s.blocks if b.kind == UNIT_DELAY]
    n = len(delays)
    index = {b.id: i for i, b in enumerate(delays)}

    def probe(state, u):
        values = dict(state)
        values[s.input_signal] = u
        for bid in s._eval_order:
            b = s.block(bid)
            if b.kind == "gain":
                values[bid] = b.value * values[b.inputs[0]]
            else:
                values[bid] = sum(values[x] for x in b.inputs)
        nxt = np.array([values[b.inputs[0]] for b in delays])
        return nxt, values[s.output_signal]

    zeros = {b.id: 0.0 for b in delays}
    f = np.zeros((n, n))
    m = np.zeros(n)
    for j, b in enumerate(delays):
        state = dict(zeros)
        state[b.id] = 1.0
        f[:, j], m[j] = probe(state, 0.0)
    h, n_ff = probe(zeros, 1.0)
    return Realization(f, h, m, n_ff, labels=[b.id for b in delays])


def circuit_of(source) -> NeuralCircuit:
    """Translate a realization (or a one-delay-per-state structure) to neurons.

    Neuron i holds state i: self weight F_ii, synapses F_ij from the
    other neurons and H_i from the external input. The output taps carry
    M and N.
    """
    r = realization_of_structure(source) if isinstance(source, ControllerStructure) else source
    neurons = []
    for i in range(r.order):
        syn = []
        for j in range(r.order):
            if j != i and r.f[i, j] != 0.0:
                syn.append((r.labels[j], float(r.f[i, j])))
        if r.h[i] != 0.0:
            syn.append((EXTERNAL, float(r.h[i])))
        neurons.append(Neuron(id=r.labels[i], self_weight=float(r.f[i, i]), synapses=tuple(syn)))
    taps = [(r.labels[i], float(r.m[i])) for i in range(r.order) if r.m[i] != 0.0]
    if r.n_ff != 0.0:
        taps.append((EXTERNAL, float(r.n_ff)))
    return NeuralCircuit(neurons, taps)


def circuit_realization(c: NeuralCircuit) -> Realization:
    """Read (F, H, M, N) back off a circuit; inverse of :func:`circuit_of`."""
    ids = [n.id for n in c.neurons]
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    f = np.zeros((n, n))
    h = np.zeros(n)
    m = np.zeros(n)
    n_ff = 0.0
    for i, neuron in enumerate(c.neurons):
        f[i, i] = neuron.self_weight
        for src, w in neuron.synapses:
            if src == EXTERNAL:
                h[i] += w
            else:
                f[i, index[src]] += w
    for src, w in c.output_taps:
        if src == EXTERNAL:
            n_ff += w
        else:
            m[index[src]] += w
    return Realization(f, h, m, n_ff, labels=ids)


def neuron_count(c: NeuralCircuit) -> int:
    return len(c.neurons)


def summation_site_count(c: NeuralCircuit) -> int:
    """Sites where two or more terms are actually added.

    Counts neuron bodies combining at least two terms (synapses plus a
    nonzero self-dynamics term) and the output combination when it mixes
    several taps. Reported alongside neuron_count because circuit
    drawings may materialize the output summation as its own unit.
    """
    sites = 0
    for n in c.neurons:
        terms = len(n.synapses) + (1 if n.self_weight != 0.0 else 0)
        if terms >= 2:
            sites += 1
    if len(c.output_taps) >= 2:
        sites += 1
    return sites


def branch_count(c: NeuralCircuit, neuron_id: str) -> int:
    """Number of distinct targets fed by this neuron's axon.

    Targets are other neurons and the output tap; the self-dynamics loop
    stays inside the body and is not a branch.
    """
    c.neuron(neuron_id)  # raises KeyError for unknown ids
    targets = set()
    for n in c.neurons:
        if n.id == neuron_id:
            continue
        if any(src == neuron_id for src, _ in n.synapses):
            targets.add(n.id)
    if any(src == neuron_id for src, _ in c.output_taps):
        targets.add("__output__")
    return len(targets)


def simulate_circuit(c: NeuralCircuit, inputs, steps: int):
    """Synchronous simulation from equilibrium; returns (output, traces).

    All neurons read the previous step's values and commit together, so
    the result is independent of neuron order. Traces map neuron id to
    its axon output over time; the circuit output combines the current
    tap values, to be absorbed by the consumer's own delayed body.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    u = np.zeros(steps)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.size > steps:
        raise ValueError("input longer than requested number of steps")
    u[: inputs.size] = inputs
    ids = [n.id for n in c.neurons]
    out = {nid: 0.0 for nid in ids}
    traces = {nid: np.zeros(steps) for nid in ids}
    y = np.zeros(steps)
    for t in range(steps):
        val = dict(out)
        val[EXTERNAL] = u[t]
        for nid in ids:
            traces[nid][t] = out[nid]
        y[t] = sum(w * val[src] for src, w in c.output_taps)
        nxt = {}
        for n in c.neurons:
            acc = n.self_weight * out[n.id]
            for src, w in n.synapses:
                acc += w * val[src]
            nxt[n.id] = acc
        out = nxt
    return y, traces

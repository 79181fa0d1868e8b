"""Controller structures: directed block graphs of gains, adders, and unit delays.

Each block consumes named scalar signals and produces exactly one output
signal, named after the block itself. Unit delays sit at the z^-1
position of each state, so every feedback cycle contains at least one
delay and the per-step evaluation is a DAG. Structures are immutable
after construction and safe to share.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .lqr import OptimalGains
from .realization import Realization

__all__ = [
    "Block",
    "ControllerStructure",
    "structure_of",
    "ifp_structure",
    "series",
    "min_path_delay",
    "simulate_structure",
    "same_structure",
]

GAIN = "gain"
SUM = "sum"
UNIT_DELAY = "unit_delay"
INF = float("inf")


@dataclass(frozen=True)
class Block:
    """One diagram block; `id` doubles as the name of its output signal."""

    id: str
    kind: str
    inputs: tuple
    value: float | None = None

    def __post_init__(self):
        if self.kind == GAIN:
            if len(self.inputs) != 1:
                raise ValueError(f"gain block {self.id} needs exactly one input")
            if self.value is None:
                raise ValueError(f"gain block {self.id} needs a value")
        elif self.kind == SUM:
            if len(self.inputs) < 2:
                raise ValueError(f"sum block {self.id} needs at least two inputs")
        elif self.kind == UNIT_DELAY:
            if len(self.inputs) != 1:
                raise ValueError(f"delay block {self.id} needs exactly one input")
        else:
            raise ValueError(f"unknown block kind {self.kind!r}")


class ControllerStructure:
    """Immutable block graph with one distinguished input and output signal."""

    def __init__(self, blocks, input_signal, output_signal):
        self.blocks = tuple(blocks)
        self.input_signal = input_signal
        self.output_signal = output_signal
        self._by_id = {}
        for b in self.blocks:
            if b.id in self._by_id or b.id == input_signal:
                raise ValueError(f"duplicate signal name {b.id!r}")
            self._by_id[b.id] = b
        self.signals = (input_signal,) + tuple(b.id for b in self.blocks)
        sigset = set(self.signals)
        for b in self.blocks:
            for s in b.inputs:
                if s not in sigset:
                    raise ValueError(f"block {b.id} consumes unknown signal {s!r}")
        if output_signal not in sigset:
            raise ValueError(f"unknown output signal {output_signal!r}")
        self._eval_order = self._check_no_algebraic_loop()
        if min_path_delay(self, input_signal, output_signal) == INF:
            raise ValueError("output signal is not reachable from the input")

    def block(self, block_id):
        return self._by_id[block_id]

    def edges(self):
        """(src_signal, dst_signal, delay) triples, one per block input."""
        out = []
        for b in self.blocks:
            w = 1 if b.kind == UNIT_DELAY else 0
            for s in b.inputs:
                out.append((s, b.id, w))
        return out

    def _check_no_algebraic_loop(self):
        """Topological order of the delay-free blocks; rejects algebraic loops."""
        instant = [b for b in self.blocks if b.kind != UNIT_DELAY]
        pending = {b.id: {s for s in b.inputs if s in self._by_id and self._by_id[s].kind != UNIT_DELAY}
                   for b in instant}
        order = []
        ready = deque(bid for bid, deps in pending.items() if not deps)
        while ready:
            bid = ready.popleft()
            order.append(bid)
            for other, deps in pending.items():
                if bid in deps:
                    deps.remove(bid)
                    if not deps:
                        ready.append(other)
        if len(order) != len(instant):
            raise ValueError("algebraic loop: a cycle without any unit delay")
        return order

    def __repr__(self):
        return (
            f"ControllerStructure({len(self.blocks)} blocks, "
            f"{self.input_signal!r} -> {self.output_signal!r})"
        )

    # -- text format -------------------------------------------------

    def to_text(self):
        """Serialize as `block id kind [value]` and `edge src -> dst` lines."""
        lines = [f"input {self.input_signal}", f"output {self.output_signal}"]
        for b in self.blocks:
            if b.kind == GAIN:
                lines.append(f"block {b.id} gain {b.value!r}")
            else:
                lines.append(f"block {b.id} {b.kind}")
        for b in self.blocks:
            for s in b.inputs:
                lines.append(f"edge {s} -> {b.id}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Parse the text format; `edge src -> dst N` inserts N inline delays."""
        input_signal = None
        output_signal = None
        kinds = {}
        values = {}
        inputs = {}
        order = []
        extra = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "input":
                    input_signal = parts[1]
                elif parts[0] == "output":
                    output_signal = parts[1]
                elif parts[0] == "block":
                    bid, kind = parts[1], parts[2]
                    kinds[bid] = kind
                    if kind == GAIN:
                        values[bid] = float(parts[3])
                    inputs[bid] = []
                    order.append(bid)
                elif parts[0] == "edge":
                    if parts[2] != "->":
                        raise ValueError("expected 'edge src -> dst [delay]'")
                    src, dst = parts[1], parts[3]
                    delay = int(parts[4]) if len(parts) > 4 else 0
                    for i in range(delay):
                        did = f"{src}__d{i + 1}__{dst}"
                        kinds[did] = UNIT_DELAY
                        inputs[did] = [src]
                        order.append(did)
                        src = did
                    inputs[dst].append(src)
                else:
                    raise ValueError(f"unknown directive {parts[0]!r}")
            except (IndexError, KeyError, ValueError) as exc:
                raise ValueError(f"structure parse error on line {ln}: {raw.strip()!r}") from exc
        if input_signal is None or output_signal is None:
            raise ValueError("structure file must declare input and output")
        blocks = [
            Block(id=bid, kind=kinds[bid], inputs=tuple(inputs[bid]), value=values.get(bid))
            for bid in order
        ]
        return cls(blocks, input_signal, output_signal)


def structure_of(r: Realization) -> ControllerStructure:
    """Block graph of a realization's sparsity pattern.

    One unit delay per state (output signal named by the state label),
    one gain per nonzero matrix entry, and adders only where two or more
    terms actually meet. Zero entries produce nothing, so the graph IS
    the sparsity pattern.
    """
    blocks = []
    labels = r.labels

    def contributions(i):
        terms = []
        for j in range(r.order):
            if r.f[i, j] != 0.0:
                bid = f"f{i + 1}{j + 1}"
                blocks.append(Block(bid, GAIN, (labels[j],), float(r.f[i, j])))
                terms.append(bid)
        if r.h[i] != 0.0:
            bid = f"h{i + 1}"
            blocks.append(Block(bid, GAIN, ("u",), float(r.h[i])))
            terms.append(bid)
        return terms

    for i in range(r.order):
        terms = contributions(i)
        if not terms:
            raise ValueError(f"state {labels[i]} has no drivers; structure undefined")
        if len(terms) > 1:
            blocks.append(Block(f"s{i + 1}", SUM, tuple(terms)))
            src = f"s{i + 1}"
        else:
            src = terms[0]
        blocks.append(Block(labels[i], UNIT_DELAY, (src,)))

    out_terms = []
    for i in range(r.order):
        if r.m[i] != 0.0:
            bid = f"m{i + 1}"
            blocks.append(Block(bid, GAIN, (labels[i],), float(r.m[i])))
            out_terms.append(bid)
    if r.n_ff != 0.0:
        blocks.append(Block("n", GAIN, ("u",), float(r.n_ff)))
        out_terms.append("n")
    if not out_terms:
        raise ValueError("realization has identically zero output; structure undefined")
    if len(out_terms) > 1:
        blocks.append(Block("y", SUM, tuple(out_terms)))
        output = "y"
    else:
        output = out_terms[0]
    return ControllerStructure(blocks, "u", output)


def ifp_structure(g: OptimalGains) -> ControllerStructure:
    """The delay-in-the-middle interconnection of the synthesized gains.

    Input x feeds the k0 gain; the adder output mu passes through two
    unit delays (gamma, then u) to become the controller output, and
    both delayed copies feed back delay-free through k1 and k2.
    """
    blocks = [
        Block("k0", GAIN, ("x",), g.k0),
        Block("k1", GAIN, ("gamma",), g.k1),
        Block("k2", GAIN, ("u",), g.k2),
        Block("mu", SUM, ("k0", "k1", "k2")),
        Block("gamma", UNIT_DELAY, ("mu",)),
        Block("u", UNIT_DELAY, ("gamma",)),
    ]
    return ControllerStructure(blocks, "x", "u")


def series(structures, prefixes=None) -> ControllerStructure:
    """Chain structures, splicing each output signal to the next stage's input.

    All signal names are prefixed per stage so the merged namespace stays
    unique.
    """
    structures = list(structures)
    if not structures:
        raise ValueError("series of zero structures")
    if prefixes is None:
        prefixes = [f"s{i + 1}" for i in range(len(structures))]
    if len(prefixes) != len(structures):
        raise ValueError("one prefix per stage required")
    blocks = []
    prev_out = None
    for s, pre in zip(structures, prefixes):
        def rename(sig, s=s, pre=pre):
            if sig == s.input_signal:
                return prev_out if prev_out is not None else f"{pre}_{sig}"
            return f"{pre}_{sig}"

        for b in s.blocks:
            blocks.append(
                Block(f"{pre}_{b.id}", b.kind, tuple(rename(x) for x in b.inputs), b.value)
            )
        prev_out = f"{pre}_{s.output_signal}"
    input_signal = f"{prefixes[0]}_{structures[0].input_signal}"
    return ControllerStructure(blocks, input_signal, prev_out)


def min_path_delay(s: ControllerStructure, from_sig: str, to_sig: str):
    """Minimum number of unit delays over directed paths; inf if unreachable.

    A signal reaches itself with delay 0 by convention.
    """
    sigset = set(s.signals)
    if from_sig not in sigset or to_sig not in sigset:
        raise ValueError(f"unknown signal in query: {from_sig!r} -> {to_sig!r}")
    if from_sig == to_sig:
        return 0
    adj = {sig: [] for sig in s.signals}
    for src, dst, w in s.edges():
        adj[src].append((dst, w))
    # 0-1 BFS
    dist = {from_sig: 0}
    dq = deque([from_sig])
    while dq:
        cur = dq.popleft()
        for nxt, w in adj[cur]:
            nd = dist[cur] + w
            if nd < dist.get(nxt, INF):
                dist[nxt] = nd
                if w == 0:
                    dq.appendleft(nxt)
                else:
                    dq.append(nxt)
    return dist.get(to_sig, INF)


def simulate_structure(s: ControllerStructure, inputs, steps: int):
    """Drive the block graph and return (outputs, all signal traces).

    Within a step, gains and sums are evaluated in topological order;
    delay outputs change only between steps. Traces are keyed by signal
    name and hold the value visible during each step.
    """
    u = np.zeros(steps)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.size > steps:
        raise ValueError("input longer than requested number of steps")
    u[: inputs.size] = inputs
    delays = [b for b in s.blocks if b.kind == UNIT_DELAY]
    state = {b.id: 0.0 for b in delays}
    traces = {sig: np.zeros(steps) for sig in s.signals}
    y = np.zeros(steps)
    for t in range(steps):
        values = dict(state)
        values[s.input_signal] = u[t]
        for bid in s._eval_order:
            b = s.block(bid)
            if b.kind == GAIN:
                values[bid] = b.value * values[b.inputs[0]]
            else:
                values[bid] = sum(values[x] for x in b.inputs)
        y[t] = values[s.output_signal]
        for sig in s.signals:
            traces[sig][t] = values[sig]
        for b in delays:
            state[b.id] = values[b.inputs[0]]
    return y, traces


def _as_nx(s: ControllerStructure):
    g = nx.MultiDiGraph()
    g.add_node(s.input_signal, kind="external", role="input")
    for b in s.blocks:
        role = "output" if b.id == s.output_signal else "none"
        g.add_node(b.id, kind=b.kind, role=role)
    if s.input_signal == s.output_signal:
        g.nodes[s.input_signal]["role"] = "output"
    for src, dst, _ in s.edges():
        g.add_edge(src, dst)
    return g


def same_structure(a: ControllerStructure, b: ControllerStructure) -> bool:
    """Graph isomorphism on block kinds and input/output roles.

    Gain values are deliberately ignored: two diagrams with the same
    configuration of blocks count as the same structure even when the
    gains differ.
    """
    match = nx.algorithms.isomorphism.categorical_node_match(["kind", "role"], [None, None])
    return nx.is_isomorphic(_as_nx(a), _as_nx(b), node_match=match)

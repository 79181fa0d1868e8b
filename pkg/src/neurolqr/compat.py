"""Delay graphs, delay assignments, and structure/graph compatibility.

A delay graph constrains where computation may happen: vertex v1 is the
sensor, vN the actuator, and edge weights are communication delays in
timesteps. An assignment maps every structure signal to a vertex; it is
compatible when the structure never provides a signal path faster than
the anatomy allows.

The controller delay matrix entry (i, j) is the fastest DIRECT path
from a signal at vertex i to a signal at vertex j, i.e. over paths whose
intermediate signals are themselves assigned to i or j. A path that
detours through a third vertex is that vertex's traffic, already
constrained by its own entries; if every i-to-j path detours, the entry
is infinite. Infinity is always the float value, never an integer
sentinel, so comparisons cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .structure import ControllerStructure, UNIT_DELAY

__all__ = [
    "DelayGraph",
    "DelayAssignment",
    "closure",
    "muscle_delay_graph",
    "controller_delay_matrix",
    "is_assignment_compatible",
    "find_compatible_assignment",
    "is_controller_compatible",
]

INF = float("inf")


class DelayGraph:
    """Weighted digraph over vertices 1..n; v1 = sensor source, vn = actuator sink."""

    def __init__(self, n, edges):
        if n < 1:
            raise ValueError("delay graph needs at least one vertex")
        self.n = n
        self.edges = []
        for i, j, w in edges:
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} vertices")
            if w < 0 or int(w) != w:
                raise ValueError("edge weights must be non-negative integers")
            self.edges.append((int(i), int(j), int(w)))

    def to_text(self):
        lines = [f"vertex {self.n}"]
        lines += [f"edge {i} {j} {w}" for i, j, w in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        n = None
        edges = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "vertex":
                    n = int(parts[1])
                elif parts[0] == "edge":
                    edges.append((int(parts[1]), int(parts[2]), int(parts[3])))
                else:
                    raise ValueError(f"unknown directive {parts[0]!r}")
            except (IndexError, ValueError) as exc:
                raise ValueError(f"delay graph parse error on line {ln}: {raw.strip()!r}") from exc
        if n is None:
            raise ValueError("delay graph file must declare a vertex count")
        return cls(n, edges)

    def __repr__(self):
        return f"DelayGraph(n={self.n}, edges={self.edges})"


def muscle_delay_graph() -> DelayGraph:
    """Sensor -> nervous system -> muscle, one timestep per hop, nothing else."""
    return DelayGraph(3, [(1, 2, 1), (2, 3, 1)])


def closure(g: DelayGraph) -> np.ndarray:
    """All-pairs min-plus shortest-path matrix; unreachable pairs are inf."""
    e = np.full((g.n, g.n), INF)
    np.fill_diagonal(e, 0.0)
    for i, j, w in g.edges:
        e[i - 1, j - 1] = min(e[i - 1, j - 1], float(w))
    for k in range(g.n):
        e = np.minimum(e, e[:, k : k + 1] + e[k : k + 1, :])
    np.fill_diagonal(e, 0.0)
    return e


@dataclass(frozen=True)
class DelayAssignment:
    """Total map from structure signals to delay-graph vertices (1-based)."""

    vertex_of: dict

    def __getitem__(self, signal):
        return self.vertex_of[signal]

    def items(self):
        return self.vertex_of.items()


def _signal_edges(s: ControllerStructure):
    """Direct signal-to-signal hops with their delay contribution (0 or 1)."""
    out = []
    for b in s.blocks:
        w = 1 if b.kind == UNIT_DELAY else 0
        for src in b.inputs:
            out.append((src, b.id, w))
    return out


def _validate_assignment(s: ControllerStructure, g: DelayGraph, a: DelayAssignment):
    for sig in s.signals:
        if sig not in a.vertex_of:
            raise ValueError(f"signal {sig!r} is not assigned to a vertex")
        v = a.vertex_of[sig]
        if not 1 <= v <= g.n:
            raise ValueError(f"signal {sig!r} assigned to out-of-range vertex {v}")
    if a.vertex_of[s.input_signal] != 1:
        raise ValueError("controller input must be assigned to v1")
    if a.vertex_of[s.output_signal] != g.n:
        raise ValueError(f"controller output must be assigned to v{g.n}")


def controller_delay_matrix(s: ControllerStructure, g: DelayGraph, a: DelayAssignment) -> np.ndarray:
    """Fastest direct signal path between each ordered vertex pair.

    Entry (i, j) is the minimum delay over structure paths that start at
    a signal assigned to vertex i, end at one assigned to j, and never
    visit a signal assigned elsewhere. Diagonal entries are 0 by
    convention.
    """
    _validate_assignment(s, g, a)
    edges = _signal_edges(s)
    et = np.full((g.n, g.n), INF)
    np.fill_diagonal(et, 0.0)
    for i in range(1, g.n + 1):
        for j in range(1, g.n + 1):
            if i == j:
                continue
            allowed = {sig for sig in s.signals if a[sig] in (i, j)}
            # Bellman-Ford on the induced subgraph; tiny, so no heap needed
            dist = {sig: (0.0 if a[sig] == i else INF) for sig in allowed}
            for _ in range(len(allowed)):
                changed = False
                for src, dst, w in edges:
                    if src in allowed and dst in allowed and dist[src] + w < dist[dst]:
                        dist[dst] = dist[src] + w
                        changed = True
                if not changed:
                    break
            best = min((dist[sig] for sig in allowed if a[sig] == j), default=INF)
            et[i - 1, j - 1] = best
    return et


def is_assignment_compatible(e_tilde, e) -> bool:
    """Entrywise e_tilde >= e, with inf dominating everything."""
    e_tilde = np.asarray(e_tilde, dtype=float)
    e = np.asarray(e, dtype=float)
    if e_tilde.shape != e.shape:
        raise ValueError(f"matrix shapes differ: {e_tilde.shape} vs {e.shape}")
    return bool(np.all(e_tilde >= e))


def find_compatible_assignment(s: ControllerStructure, g: DelayGraph):
    """Exhaustive search for a compatible assignment; None when there is none.

    Signals are assigned in sorted-name order, vertices tried ascending,
    and the input/output pins are fixed, so the returned witness is the
    lexicographically first one. Branches die as soon as a direct hop
    between two already-assigned signals is faster than the delay graph
    allows; that local test is exact because any offending multi-hop
    path contains an offending single hop.
    """
    e = closure(g)
    order = [s.input_signal, s.output_signal] + sorted(
        sig for sig in s.signals if sig not in (s.input_signal, s.output_signal)
    )
    hops_out = {sig: [] for sig in s.signals}
    hops_in = {sig: [] for sig in s.signals}
    for src, dst, w in _signal_edges(s):
        hops_out[src].append((dst, w))
        hops_in[dst].append((src, w))

    assigned = {}

    def ok(sig, v):
        for dst, w in hops_out[sig]:
            if dst in assigned and w < e[v - 1, assigned[dst] - 1]:
                return False
        for src, w in hops_in[sig]:
            if src in assigned and w < e[assigned[src] - 1, v - 1]:
                return False
        return True

    def search(idx):
        if idx == len(order):
            return dict(assigned)
        sig = order[idx]
        if sig == s.input_signal:
            choices = [1]
        elif sig == s.output_signal:
            choices = [g.n]
        else:
            choices = range(1, g.n + 1)
        for v in choices:
            if ok(sig, v):
                assigned[sig] = v
                found = search(idx + 1)
                if found is not None:
                    return found
                del assigned[sig]
        return None

    found = search(0)
    return DelayAssignment(found) if found is not None else None


def is_controller_compatible(candidate_structures, g: DelayGraph):
    """True when any candidate structure admits a compatible assignment.

    Returns (verdict, witness); witness is the first (structure,
    assignment) pair found, or None.
    """
    candidates = list(candidate_structures)
    if not candidates:
        raise ValueError("no candidate structures given")
    for s in candidates:
        a = find_compatible_assignment(s, g)
        if a is not None:
            return True, (s, a)
    return False, None

"""State-space realizations (F, H, M, N) of scalar transfer functions.

Covers the canonical second-order forms, dense realizations obtained by
similarity transform, series composition of stages, and the minimality
rank test. State labels travel with the matrices so downstream circuit
diagrams keep readable names.
"""

from __future__ import annotations

import numpy as np

from .transfer import RationalTransferFunction

__all__ = [
    "Realization",
    "first_order_stage",
    "controllable_canonical",
    "observable_canonical",
    "similarity_transform",
    "general_realization",
    "random_transform",
    "cascade",
    "tf_of",
    "is_minimal",
    "simulate_realization",
]

_ZERO_TOL = 1e-12


class Realization:
    """Matrices of x(t+1) = F x + H u, y = M x + N u, with state labels."""

    def __init__(self, f, h, m, n_ff, labels=None):
        self.f = np.atleast_2d(np.asarray(f, dtype=float))
        self.h = np.asarray(h, dtype=float).reshape(-1)
        self.m = np.asarray(m, dtype=float).reshape(-1)
        self.n_ff = float(n_ff)
        n = self.f.shape[0]
        if self.f.shape != (n, n) or self.h.size != n or self.m.size != n:
            raise ValueError("inconsistent realization dimensions")
        self.labels = list(labels) if labels is not None else [f"x{i + 1}" for i in range(n)]
        if len(self.labels) != n:
            raise ValueError("one label per state required")

    @property
    def order(self):
        return self.f.shape[0]

    def __repr__(self):
        return (
            f"Realization(order={self.order}, labels={self.labels}, "
            f"n_ff={self.n_ff:.6g})"
        )


def first_order_stage(c: float, eps: float) -> Realization:
    """One-state relay x(t+1) = eps*x + c*u, y = x, i.e. c/(z - eps)."""
    if c == 0.0:
        raise ValueError("stage gain must be nonzero")
    return Realization([[eps]], [c], [1.0], 0.0)


def _biproper_second_order_parts(g2: RationalTransferFunction):
    """Split a biproper second-order g2 into (feedthrough, b0, b1, d1, d2).

    g2 = n_ff + (b1*z + b0) / (z^2 + d1*z + d2).
    """
    if len(g2.den) != 3:
        raise ValueError(f"expected a second-order function, got order {len(g2.den) - 1}")
    num = np.pad(g2.num, (3 - len(g2.num), 0))
    n_ff = num[0]
    rem = num - n_ff * g2.den
    return float(n_ff), float(rem[2]), float(rem[1]), float(g2.den[1]), float(g2.den[2])


def controllable_canonical(g2: RationalTransferFunction) -> Realization:
    """Controllable canonical realization of a second-order function.

    F is the bottom-companion matrix of the denominator, H = [0; 1], and
    the numerator lands entirely in M and the feedthrough N.
    """
    n_ff, b0, b1, d1, d2 = _biproper_second_order_parts(g2)
    f = np.array([[0.0, 1.0], [-d2, -d1]])
    h = np.array([0.0, 1.0])
    m = np.array([b0, b1])
    return Realization(f, h, m, n_ff)


def observable_canonical(g2: RationalTransferFunction) -> Realization:
    """Observable canonical realization: the transpose dual, M = [0, 1]."""
    n_ff, b0, b1, d1, d2 = _biproper_second_order_parts(g2)
    f = np.array([[0.0, -d2], [1.0, -d1]])
    h = np.array([b0, b1])
    m = np.array([0.0, 1.0])
    return Realization(f, h, m, n_ff)


def similarity_transform(r: Realization, p) -> Realization:
    """Change state coordinates: (P^-1 F P, P^-1 H, M P, N)."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if p.shape != (r.order, r.order):
        raise ValueError("transform dimension does not match realization order")
    if abs(np.linalg.det(p)) <= 1e-9:
        raise ValueError("transform matrix is singular")
    p_inv = np.linalg.inv(p)
    return Realization(p_inv @ r.f @ p, p_inv @ r.h, r.m @ p, r.n_ff, labels=r.labels)


def general_realization(g2: RationalTransferFunction, p) -> Realization:
    """Dense realization of g2 via a similarity transform of the canonical form.

    Every entry of F, H, M must come out nonzero; a transform that
    produces a structural zero is rejected so the caller can retry with
    a different matrix.
    """
    r = similarity_transform(controllable_canonical(g2), p)
    entries = np.concatenate([r.f.ravel(), r.h, r.m])
    if np.any(np.abs(entries) <= _ZERO_TOL):
        raise ValueError("transform produced a structural zero; retry with a different matrix")
    return r


def random_transform(order: int, rng, cond_limit: float = 50.0) -> np.ndarray:
    """Draw a well-conditioned invertible matrix from the given generator."""
    for _ in range(1000):
        p = rng.uniform(-2.0, 2.0, size=(order, order))
        if np.linalg.cond(p) < cond_limit:
            return p
    raise RuntimeError("could not draw a well-conditioned transform")


def cascade(*stages: Realization) -> Realization:
    """Series composition, signal flowing through the stages left to right.

    The downstream stage's input matrix absorbs the upstream stage's
    output map, which is what lets delay-free output summations ride
    inside the next block.
    """
    if not stages:
        raise ValueError("cascade of zero stages")
    labels = [lab for stage in stages for lab in stage.labels]
    if len(set(labels)) != len(labels):
        labels = [f"s{i + 1}_{lab}" for i, stage in enumerate(stages) for lab in stage.labels]
    f, h, m, n_ff = stages[0].f, stages[0].h, stages[0].m, stages[0].n_ff
    for nxt in stages[1:]:
        na, nb = f.shape[0], nxt.order
        fc = np.zeros((na + nb, na + nb))
        fc[:na, :na] = f
        fc[na:, :na] = np.outer(nxt.h, m)
        fc[na:, na:] = nxt.f
        h = np.concatenate([h, nxt.h * n_ff])
        m = np.concatenate([nxt.n_ff * m, nxt.m])
        f, n_ff = fc, nxt.n_ff * n_ff
    return Realization(f, h, m, n_ff, labels=labels)


def tf_of(r: Realization) -> RationalTransferFunction:
    """Transfer function M (zI - F)^-1 H + N via the Leverrier-Faddeev recursion.

    The denominator is the characteristic polynomial of F; no
    cancellation is performed, so hidden modes stay visible as common
    factors.
    """
    n = r.order
    f = r.f
    den = np.zeros(n + 1)
    den[0] = 1.0
    sp = np.zeros(n)  # strictly proper numerator, coefficients of z^(n-1)..z^0
    bk = np.eye(n)
    for k in range(1, n + 1):
        sp[k - 1] = r.m @ bk @ r.h
        fb = f @ bk
        den[k] = -np.trace(fb) / k
        bk = fb + den[k] * np.eye(n)
    num = r.n_ff * den + np.pad(sp, (1, 0))
    return RationalTransferFunction(num, den)


def _krylov(f, v, by_rows=False):
    n = f.shape[0]
    cols = [v]
    for _ in range(n - 1):
        cols.append((cols[-1] @ f) if by_rows else (f @ cols[-1]))
    return np.vstack(cols) if by_rows else np.column_stack(cols)


def is_minimal(r: Realization, tol: float = 1e-8) -> bool:
    """True when every eigenvalue of F survives as a pole of the transfer function.

    Tested via full rank of the controllability and observability
    matrices, using a singular-value threshold that tolerates
    near-cancellations.
    """
    ctrb = _krylov(r.f, r.h)
    obsv = _krylov(r.f, r.m, by_rows=True)
    n = r.order
    scale_c = max(np.max(np.abs(ctrb)), 1.0)
    scale_o = max(np.max(np.abs(obsv)), 1.0)
    rank_c = np.sum(np.linalg.svd(ctrb, compute_uv=False) > tol * scale_c)
    rank_o = np.sum(np.linalg.svd(obsv, compute_uv=False) > tol * scale_o)
    return bool(rank_c == n and rank_o == n)


def simulate_realization(r: Realization, inputs, steps: int):
    """Run the state-space recursion from rest; returns (outputs, states).

    states has shape (steps, order) and holds x(t) before the t-th
    update, matching the synchronous neuron convention downstream.
    """
    u = np.zeros(steps)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.size > steps:
        raise ValueError("input longer than requested number of steps")
    u[: inputs.size] = inputs
    x = np.zeros(r.order)
    states = np.zeros((steps, r.order))
    y = np.zeros(steps)
    for t in range(steps):
        states[t] = x
        y[t] = r.m @ x + r.n_ff * u[t]
        x = r.f @ x + r.h * u[t]
    return y, states

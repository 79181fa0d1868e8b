"""Delay-augmented LQR synthesis.

Sensorimotor delay is folded into the plant by stacking the force state
with virtual intended-actuation stages, after which the delayed problem
is an ordinary LQR with zero penalty on the new input. The Riccati fixed
point is found by value iteration, which is trivially adequate at this
scale and easy to validate against a brute-force dynamic program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .muscle import DiscretePlant
from .transfer import RationalTransferFunction

__all__ = [
    "AugmentedSystem",
    "LqrWeights",
    "OptimalGains",
    "augment",
    "augment_cost",
    "riccati_fixed_point",
    "solve_delayed_lqr",
    "gains_to_tf",
]

_MAX_ITER = 10_000
_CONV_TOL = 1e-12
_PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class AugmentedSystem:
    """Delay-augmented pair (a_tilde, b_tilde) with net delay in timesteps."""

    a_tilde: np.ndarray
    b_tilde: np.ndarray
    delay_T: int


@dataclass(frozen=True)
class LqrWeights:
    """Scalar penalties on force deviation (q) and firing-rate deviation (r).

    q = 0 is allowed (nothing to regulate, zero gains); r must stay
    strictly positive so the actuation channel is penalized.
    """

    q: float = 1.0
    r: float = 0.01

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("state penalty q must be non-negative")
        if self.r <= 0:
            raise ValueError("input penalty r must be positive")


@dataclass(frozen=True)
class OptimalGains:
    """Gains of mu(t) = k0*delta_f(t) + k1*gamma(t) + k2*delta_r(t)."""

    k0: float
    k1: float
    k2: float

    def as_array(self):
        return np.array([self.k0, self.k1, self.k2])


def augment(plant: DiscretePlant, delay_T: int) -> AugmentedSystem:
    """Stack [delta_f; gamma_{T-1}; ...; gamma_1; delta_r] into one system.

    The intended actuation mu enters the first gamma stage and shifts
    down the chain one slot per step, reaching the plant as delta_r after
    delay_T steps.
    """
    if delay_T < 1:
        raise ValueError("delay_T must be >= 1; the undelayed problem is plain LQR")
    n = delay_T + 1
    a_tilde = np.zeros((n, n))
    a_tilde[0, 0] = plant.a
    a_tilde[0, n - 1] = plant.b
    for i in range(2, n):
        a_tilde[i, i - 1] = 1.0
    b_tilde = np.zeros((n, 1))
    b_tilde[1, 0] = 1.0
    return AugmentedSystem(a_tilde=a_tilde, b_tilde=b_tilde, delay_T=delay_T)


def augment_cost(w: LqrWeights, delay_T: int) -> np.ndarray:
    """Penalty matrix diag(q, 0, ..., 0, r) for the augmented state."""
    if delay_T < 1:
        raise ValueError("delay_T must be >= 1")
    d = np.zeros(delay_T + 1)
    d[0] = w.q
    d[-1] = w.r
    return np.diag(d)


def riccati_fixed_point(a_tilde, b_tilde, q_tilde):
    """Value iteration for the discrete Riccati equation with zero input penalty.

    Returns (k, p): the optimal feedback row k (control = k @ state) and
    the cost-to-go matrix p.

    The pivot b'Pb is zero on early iterates (the fresh intended
    actuation has not yet picked up the r penalty through the delay
    chain); when both the pivot and the linear term b'PA vanish the
    minimization is flat and the correction term is zero. A vanishing
    pivot with a nonvanishing linear term means an unbounded
    minimization and is reported as a singularity.
    """
    a = np.asarray(a_tilde, dtype=float)
    b = np.asarray(b_tilde, dtype=float).reshape(-1, 1)
    p = np.asarray(q_tilde, dtype=float).copy()
    for _ in range(_MAX_ITER):
        pivot = float(b.T @ p @ b)
        lin = (b.T @ p @ a).ravel()
        if pivot > _PIVOT_FLOOR:
            corr = np.outer(lin, lin) / pivot
        elif np.max(np.abs(lin)) <= 1e-12:
            corr = 0.0
        else:
            raise ArithmeticError("singular Riccati pivot: b'Pb ~ 0 with b'PA != 0")
        p_next = q_tilde + a.T @ p @ a - corr
        delta = np.max(np.abs(p_next - p))
        p = p_next
        if delta < _CONV_TOL:
            pivot = float(b.T @ p @ b)
            lin = (b.T @ p @ a).ravel()
            k = -lin / pivot if pivot > _PIVOT_FLOOR else np.zeros(a.shape[0])
            return k, p
    raise ArithmeticError(f"Riccati iteration did not converge in {_MAX_ITER} iterations")


def solve_delayed_lqr(sys: AugmentedSystem, q_tilde):
    """Solve the augmented LQR problem.

    Returns (gains, p); gains is an :class:`OptimalGains` triple for the
    net delay of 2 exercised throughout, or the raw feedback row for
    other delays.
    """
    k, p = riccati_fixed_point(sys.a_tilde, sys.b_tilde, q_tilde)
    if sys.delay_T == 2:
        return OptimalGains(k0=float(k[0]), k1=float(k[1]), k2=float(k[2])), p
    return k, p


def gains_to_tf(g: OptimalGains) -> RationalTransferFunction:
    """Controller transfer function k0 / (z^2 - k1 z - k2), relative degree 2."""
    if g.k0 == 0.0:
        raise ValueError("degenerate controller: k0 = 0 has no transfer function")
    return RationalTransferFunction([g.k0], [1.0, -g.k1, -g.k2])

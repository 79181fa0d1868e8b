"""End-to-end wiring: synthesize gains, decompose, realize, and build circuits.

The deployed controller is the three-stage pipeline g3*g2*g1 (relay in,
second-order core, relay out); the monolithic gain form stays available
for cross-checking.
"""

from __future__ import annotations

import numpy as np

from .lqr import LqrWeights, OptimalGains, augment, augment_cost, gains_to_tf, solve_delayed_lqr
from .muscle import DiscretePlant
from .realization import (
    Realization,
    cascade,
    controllable_canonical,
    first_order_stage,
    general_realization,
    observable_canonical,
    random_transform,
)
from .structure import ControllerStructure, series, structure_of
from .transfer import DecompositionParams, RationalTransferFunction, decompose

__all__ = [
    "synthesize",
    "stage_realizations",
    "pipeline_realization",
    "pipeline_structure",
]

REALIZATION_FORMS = ("controllable", "observable", "general")


def synthesize(plant: DiscretePlant, weights: LqrWeights, delay_T: int = 2):
    """Solve the delay-augmented LQR problem; returns (gains, transfer function)."""
    sys = augment(plant, delay_T)
    gains, _ = solve_delayed_lqr(sys, augment_cost(weights, delay_T))
    if not isinstance(gains, OptimalGains):
        raise ValueError("pipeline synthesis is defined for net delay 2")
    return gains, gains_to_tf(gains)


def stage_realizations(
    gains: OptimalGains,
    params: DecompositionParams = DecompositionParams(),
    form: str = "controllable",
    seed: int = 0,
):
    """Realize the three pipeline stages; returns (r1, r2, r3).

    `form` picks the realization of the second-order core: one of the
    canonical forms, or a dense one drawn from a seeded well-conditioned
    similarity transform.
    """
    g1, g2, g3 = decompose(gains_to_tf(gains), params)
    r1 = first_order_stage(params.c1, params.eps1)
    r1.labels = ["g1"]
    if form == "controllable":
        r2 = controllable_canonical(g2)
    elif form == "observable":
        r2 = observable_canonical(g2)
    elif form == "general":
        rng = np.random.default_rng(seed)
        while True:
            try:
                r2 = general_realization(g2, random_transform(2, rng))
                break
            except ValueError:
                continue
    else:
        raise ValueError(f"unknown realization form {form!r}; pick one of {REALIZATION_FORMS}")
    r2.labels = ["g2_x1", "g2_x2"]
    r3 = first_order_stage(params.c3, params.eps3)
    r3.labels = ["g3"]
    return r1, r2, r3


def pipeline_realization(r1: Realization, r2: Realization, r3: Realization) -> Realization:
    """Single composed realization of the full controller g3*g2*g1."""
    return cascade(r1, r2, r3)


def pipeline_structure(r1: Realization, r2: Realization, r3: Realization) -> ControllerStructure:
    """Stage-structured block graph of the full controller."""
    return series(
        [structure_of(r1), structure_of(r2), structure_of(r3)],
        prefixes=("g1", "g2", "g3"),
    )

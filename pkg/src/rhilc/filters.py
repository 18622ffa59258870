"""Closed-form learning filters and the receding-horizon update law.

Setting the gradient of the horizon cost with respect to the stacked
input plan to zero gives an affine update: the next multi-iteration plan
is a fixed linear function of the previous iteration's input, measured
tracking error and the two adjacent initial conditions, plus a constant
from the economic term.  All five filters share the same normal matrix

    L_0 = Q_hat_u + G_sup' (Q_hat_x + Q_hat_e) G_sup,

which is factored once and reused.  Only the first iteration's block of
the plan is ever applied before replanning (`receding_step`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SynthesisError
from .lifting import LiftedModel
from .superlift import SuperLiftedModel, SuperOperators
from .weights import PerformanceWeights

__all__ = [
    "LearningFilters",
    "ControllerState",
    "synthesize",
    "update_law",
    "receding_step",
]


@dataclass(frozen=True)
class LearningFilters:
    """Affine maps from previous-iteration data to the next input plan.

    L_u acts on the applied input sequence, L_e on the measured lifted
    error, L_x0_prev / L_x0_next on the initial conditions of the
    previous and upcoming iteration, and L_c is the constant offset
    induced by the economic slope.
    """

    L_u: np.ndarray
    L_e: np.ndarray
    L_x0_prev: np.ndarray
    L_x0_next: np.ndarray
    L_c: np.ndarray
    L0_factor: tuple
    n_s: int
    n_x: int
    n_u: int
    n_i: int

    def solve_normal(self, rhs: np.ndarray) -> np.ndarray:
        """Solve L_0 @ y = rhs against the cached factorization."""
        return scipy.linalg.cho_solve(self.L0_factor, rhs)


@dataclass(frozen=True)
class ControllerState:
    """Data carried from iteration j into the update for iteration j+1."""

    u_prev: np.ndarray
    e_prev: np.ndarray
    x0_prev: np.ndarray
    x0_next: np.ndarray

    def __post_init__(self):
        for name in ("u_prev", "e_prev", "x0_prev", "x0_next"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=float).ravel()
            )


def synthesize(
    super_model: SuperLiftedModel,
    lifted: LiftedModel,
    weights: PerformanceWeights,
    ops: SuperOperators,
    min_rcond: float = 1e-12,
) -> LearningFilters:
    """Derive the learning filters for one controller model and horizon.

    `super_model` propagates the controller's model over the horizon;
    `lifted` is the same model's single-iteration map, used to express
    the previous iteration's state as a function of its input and
    initial condition.  Each filter is a linear solve against the shared
    normal matrix rather than an explicit inverse.
    """
    G_sup, F_sup = super_model.G_sup, super_model.F_sup
    G, F = lifted.G_lift, lifted.F_lift
    Qhx_e = weights.Q_hat_x + weights.Q_hat_e

    L0 = weights.Q_hat_u + G_sup.T @ Qhx_e @ G_sup
    L0 = 0.5 * (L0 + L0.T)  # symmetrize against roundoff before factoring

    rcond = 1.0 / np.linalg.cond(L0)
    if not np.isfinite(rcond) or rcond < min_rcond:
        raise SynthesisError(
            f"normal matrix is ill conditioned (reciprocal condition {rcond:.3e})",
            rcond=rcond,
        )
    try:
        factor = scipy.linalg.cho_factor(L0)
    except scipy.linalg.LinAlgError as exc:
        raise SynthesisError(
            f"normal matrix is not positive definite: {exc}", rcond=rcond
        ) from exc

    solve = lambda rhs: scipy.linalg.cho_solve(factor, rhs)
    GtQe_Ix = G_sup.T @ weights.Q_hat_e @ ops.I_x
    ExG_tQdx = (ops.E_x @ G_sup).T @ weights.Q_delta_x

    L_u = solve(ops.E_u.T @ weights.Q_delta_u + GtQe_Ix @ G + ExG_tQdx @ G)
    L_e = solve(GtQe_Ix)
    L_x0_prev = solve(ExG_tQdx @ F + GtQe_Ix @ F)
    L_x0_next = -solve(G_sup.T @ Qhx_e @ F_sup)
    L_c = -solve(G_sup.T @ weights.s_x_sup)

    return LearningFilters(
        L_u=L_u, L_e=L_e, L_x0_prev=L_x0_prev, L_x0_next=L_x0_next, L_c=L_c,
        L0_factor=factor,
        n_s=lifted.n_s, n_x=lifted.n_x, n_u=lifted.n_u, n_i=super_model.n_i,
    )


def update_law(filters: LearningFilters, state: ControllerState) -> np.ndarray:
    """Next multi-iteration input plan from the previous iteration's data.

    The returned stacked plan is the stationary point of the horizon
    cost as a function of the plan, holding the previous input, state
    and the upcoming initial condition fixed.
    """
    nsu = filters.n_s * filters.n_u
    nsx = filters.n_s * filters.n_x
    if state.u_prev.size != nsu:
        raise ValueError(f"u_prev must have length {nsu}, got {state.u_prev.size}")
    if state.e_prev.size != nsx:
        raise ValueError(f"e_prev must have length {nsx}, got {state.e_prev.size}")
    if state.x0_prev.size != filters.n_x or state.x0_next.size != filters.n_x:
        raise ValueError(f"initial conditions must have length {filters.n_x}")
    return (
        filters.L_u @ state.u_prev
        + filters.L_e @ state.e_prev
        + filters.L_x0_prev @ state.x0_prev
        + filters.L_x0_next @ state.x0_next
        + filters.L_c
    )


def receding_step(u_sup: np.ndarray, ops: SuperOperators) -> np.ndarray:
    """First iteration's input block of a stacked plan."""
    u_sup = np.asarray(u_sup, dtype=float).ravel()
    if u_sup.size != ops.n_i * ops.n_s * ops.n_u:
        raise ValueError(
            f"u_sup must have length {ops.n_i * ops.n_s * ops.n_u}, got {u_sup.size}"
        )
    return u_sup[: ops.n_s * ops.n_u].copy()

"""Desired converged behavior: the repeatable optimum z_opt.

Where the closed loop converges is not automatically where it *should*
converge.  The desired target is the input sequence and initial
condition that minimise the converged per-iteration cost subject to
being repeatable: applying the input from the initial condition (under
the limit disturbance) must return the plant to that same initial
condition.  That is an equality-constrained QP in z = [u_lift; x0],

    minimize 0.5 z' Q_quad z + q_lin' z   subject to   W z = v,

solved through its KKT system.  The assembly keeps only the cost terms
that survive at a repeatable point; the inter-iteration difference
penalties cancel there, which also makes z_opt independent of the
prediction horizon length (the matrices scale uniformly with n_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import KktSolveError
from .iteration_map import ZVector
from .lifting import LiftedModel
from .superlift import SuperOperators
from .weights import PerformanceWeights

__all__ = [
    "SelectorOperators",
    "ConvergedProblem",
    "Condition3Verdict",
    "ConvergedOptimum",
    "selector_operators",
    "build_problem",
    "check_condition3",
    "solve_kkt",
    "verify_repeatability",
]


@dataclass(frozen=True)
class SelectorOperators:
    """Selectors splitting z = [u_lift; x0] into its two parts."""

    E_s: np.ndarray
    E_e: np.ndarray


def selector_operators(n_s: int, n_u: int, n_x: int) -> SelectorOperators:
    nsu = n_s * n_u
    E_s = np.hstack([np.eye(nsu), np.zeros((nsu, n_x))])
    E_e = np.hstack([np.zeros((n_x, nsu)), np.eye(n_x)])
    return SelectorOperators(E_s=E_s, E_e=E_e)


@dataclass(frozen=True)
class ConvergedProblem:
    """Equality-constrained QP whose solution is the repeatable optimum."""

    Q_quad: np.ndarray
    q_lin: np.ndarray
    W: np.ndarray
    v: np.ndarray
    r_lift: np.ndarray
    d_lift: np.ndarray
    n_s: int
    n_x: int
    n_u: int

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float).ravel()
        return float(0.5 * z @ self.Q_quad @ z + self.q_lin @ z)


@dataclass(frozen=True)
class Condition3Verdict:
    satisfied: bool
    min_eigenvalue: float


@dataclass(frozen=True)
class ConvergedOptimum:
    """KKT solution with its residuals."""

    z_opt: ZVector
    lambda_opt: np.ndarray
    constraint_residual: float
    stationarity_residual: float


def build_problem(
    lifted_limit: LiftedModel,
    weights: PerformanceWeights,
    ops: SuperOperators,
    r_lift: np.ndarray,
    d_lift: np.ndarray,
) -> ConvergedProblem:
    """Assemble the converged-cost QP for the limit plant and disturbance.

    At a repeatable point the stacked input and state are the same
    lifted vector repeated n_i times, so stacking identities collapse
    onto single-iteration weights.  Folding the hatted matrices through
    the stackers over-counts each difference penalty by exactly one
    lifted copy (E_u I_u = I makes the first-block penalty a plain
    Q_delta term, and the paired cross terms cancel the rest), hence the
    single -Q_delta corrections below.  The constraint requires the
    terminal state reached from z, under the limit disturbance, to equal
    z's own initial condition.
    """
    G, F, E_F = lifted_limit.G_lift, lifted_limit.F_lift, lifted_limit.E_F
    n_s, n_x, n_u = lifted_limit.n_s, lifted_limit.n_x, lifted_limit.n_u
    if (weights.n_s, weights.n_x, weights.n_u) != (n_s, n_x, n_u):
        raise ValueError("weights and plant dimensions do not match")
    r_lift = np.asarray(r_lift, dtype=float).ravel()
    d_lift = np.asarray(d_lift, dtype=float).ravel()
    if r_lift.size != n_s * n_x or d_lift.size != n_s * n_x:
        raise ValueError(f"r_lift and d_lift must have length {n_s * n_x}")

    sel = selector_operators(n_s, n_u, n_x)
    M = G @ sel.E_s + F @ sel.E_e  # lifted state of z under the limit plant
    Qhx_e = ops.I_x.T @ (weights.Q_hat_x + weights.Q_hat_e) @ ops.I_x - weights.Q_delta_x
    Qhu = ops.I_u.T @ weights.Q_hat_u @ ops.I_u - weights.Q_delta_u

    Q_quad = sel.E_s.T @ Qhu @ sel.E_s + M.T @ Qhx_e @ M
    Q_quad = 0.5 * (Q_quad + Q_quad.T)
    q_lin = M.T @ (
        Qhx_e @ d_lift
        + ops.I_x.T @ (weights.s_x_sup - weights.Q_hat_e @ ops.I_x @ r_lift)
    )
    W = sel.E_e - E_F @ M
    v = E_F @ d_lift
    return ConvergedProblem(
        Q_quad=Q_quad, q_lin=q_lin, W=W, v=v,
        r_lift=r_lift, d_lift=d_lift, n_s=n_s, n_x=n_x, n_u=n_u,
    )


def check_condition3(prob: ConvergedProblem, tol: float = 1e-10) -> Condition3Verdict:
    """Positive definiteness of Q_quad + W'W (solvability of the KKT system)."""
    M = prob.Q_quad + prob.W.T @ prob.W
    lam_min = float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())
    return Condition3Verdict(satisfied=lam_min > tol, min_eigenvalue=lam_min)


def solve_kkt(prob: ConvergedProblem, min_rcond: float = 1e-12) -> ConvergedOptimum:
    """Solve the saddle KKT system for (z_opt, lambda_opt)."""
    n = prob.Q_quad.shape[0]
    m = prob.W.shape[0]
    K = np.block([[prob.Q_quad, prob.W.T], [prob.W, np.zeros((m, m))]])
    rcond = 1.0 / np.linalg.cond(K)
    if not np.isfinite(rcond) or rcond < min_rcond:
        raise KktSolveError(
            f"KKT system is numerically singular (reciprocal condition {rcond:.3e})",
            rcond=rcond,
        )
    sol = scipy.linalg.lu_solve(
        scipy.linalg.lu_factor(K), np.concatenate([-prob.q_lin, prob.v])
    )
    z, lam = sol[:n], sol[n:]

    scale = 1.0 + max(np.max(np.abs(prob.v)), np.max(np.abs(prob.q_lin)), np.max(np.abs(z)))
    constraint = float(np.max(np.abs(prob.W @ z - prob.v))) if m else 0.0
    stationarity = float(np.max(np.abs(prob.Q_quad @ z + prob.W.T @ lam + prob.q_lin)))
    if constraint > 1e-8 * scale or stationarity > 1e-8 * scale:
        raise KktSolveError(
            f"KKT residuals too large (constraint {constraint:.3e}, "
            f"stationarity {stationarity:.3e})",
            rcond=rcond,
        )
    return ConvergedOptimum(
        z_opt=ZVector.from_stacked(z, prob.n_x),
        lambda_opt=lam,
        constraint_residual=constraint,
        stationarity_residual=stationarity,
    )


def verify_repeatability(
    opt: ConvergedOptimum, lifted_limit: LiftedModel, d_lift
) -> float:
    """Terminal-state error after one iteration run from the optimum.

    Simulates the optimum's input from its initial condition under the
    limit disturbance and returns the infinity norm of (terminal state -
    initial condition); zero means the point repeats exactly.
    """
    d_lift = np.asarray(d_lift, dtype=float).ravel()
    x_lift = lifted_limit.predict(opt.z_opt.u_lift, opt.z_opt.x0) + d_lift
    terminal = lifted_limit.terminal(x_lift)
    return float(np.max(np.abs(terminal - opt.z_opt.x0)))

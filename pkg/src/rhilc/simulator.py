"""Closed-loop simulation of the true plant under continuous operation.

The true plant may differ from the controller's model, carry an additive
lifted disturbance with per-iteration Gaussian noise, and be perturbed
by iteration-varying random matrices whose size decays geometrically
(so the plant and disturbance converge, as the analysis assumes).  All
randomness is drawn from streams keyed by (seed, iteration, purpose), so
runs are reproducible and independent of call order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .filters import ControllerState, LearningFilters, receding_step, update_law
from .lifting import LiftedModel
from .superlift import SuperOperators
from .weights import PerformanceWeights

__all__ = [
    "DisturbanceSpec",
    "UncertaintySpec",
    "RunRecord",
    "draw_disturbance",
    "draw_uncertainty",
    "step_plant",
    "run_closed_loop",
]

# stream tags so disturbance and uncertainty draws never collide
_STREAM_DISTURBANCE = 0
_STREAM_DELTA_G = 1
_STREAM_DELTA_F = 2


@dataclass(frozen=True)
class DisturbanceSpec:
    """Lifted disturbance: a per-step mean plus optional Gaussian noise."""

    mean_per_step: np.ndarray
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "mean_per_step",
            np.atleast_1d(np.asarray(self.mean_per_step, dtype=float)),
        )
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class UncertaintySpec:
    """Additive plant perturbations shrinking by `decay` every iteration."""

    magnitude: float = 0.0
    decay: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("magnitude must be nonnegative")
        if not 0.0 <= self.decay < 1.0:
            raise ValueError("decay must lie in [0, 1) so perturbations vanish")


@dataclass
class RunRecord:
    """Per-iteration history of a closed-loop run."""

    u_hist: np.ndarray
    x_hist: np.ndarray
    x0_hist: np.ndarray
    z_hist: np.ndarray
    e_hist: np.ndarray
    d_hist: np.ndarray
    cost_hist: np.ndarray
    n_i: int
    seeds: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def n_iterations(self) -> int:
        return self.u_hist.shape[0]


def _rng(seed: int, j: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(j), stream)))


def draw_disturbance(spec: DisturbanceSpec, j: int, n_s: int) -> np.ndarray:
    """Lifted disturbance for iteration j: replicated mean plus noise."""
    d = np.tile(spec.mean_per_step, n_s)
    if spec.sigma > 0:
        d = d + spec.sigma * _rng(spec.seed, j, _STREAM_DISTURBANCE).standard_normal(d.size)
    return d


def draw_uncertainty(spec: UncertaintySpec, j: int, shape_G, shape_F):
    """Additive perturbations (delta_G, delta_F) for iteration j."""
    scale = spec.magnitude * spec.decay ** j
    if scale == 0.0:
        return np.zeros(shape_G), np.zeros(shape_F)
    dG = scale * _rng(spec.seed, j, _STREAM_DELTA_G).standard_normal(shape_G)
    dF = scale * _rng(spec.seed, j, _STREAM_DELTA_F).standard_normal(shape_F)
    return dG, dF


def step_plant(true_lifted: LiftedModel, delta_G, delta_F, u_lift, x0, d_lift) -> np.ndarray:
    """Lifted state of one iteration of the (perturbed, disturbed) plant."""
    u_lift = np.asarray(u_lift, dtype=float).ravel()
    x0 = np.asarray(x0, dtype=float).ravel()
    d_lift = np.asarray(d_lift, dtype=float).ravel()
    x = true_lifted.predict(u_lift, x0) + d_lift
    if delta_G is not None and np.size(delta_G):
        x = x + np.asarray(delta_G, dtype=float) @ u_lift
    if delta_F is not None and np.size(delta_F):
        x = x + np.asarray(delta_F, dtype=float) @ x0
    return x


def _iteration_cost(weights, u, x, e, u_prev, x_prev):
    cost = float(u @ weights.Q_u @ u + x @ weights.Q_x @ x + e @ weights.Q_e @ e
                 + 2.0 * weights.s_x_lift @ x)
    if u_prev is not None:
        du = u - u_prev
        dx = x - x_prev
        cost += float(du @ weights.Q_delta_u @ du + dx @ weights.Q_delta_x @ dx)
    return cost


def run_closed_loop(
    filters: LearningFilters,
    ops: SuperOperators,
    true_lifted: LiftedModel,
    r_lift: np.ndarray,
    n_iterations: int,
    disturbance: DisturbanceSpec | None = None,
    uncertainty: UncertaintySpec | None = None,
    u_init=None,
    x0_init=None,
    weights: PerformanceWeights | None = None,
) -> RunRecord:
    """Run the receding-horizon learning loop for n_iterations.

    Iteration 0 applies the initial input from the initial condition;
    every later iteration starts from the previous terminal state and
    applies the first block of the freshly replanned input.  Raises
    `DivergenceError` (carrying the partial record) if any signal stops
    being finite.
    """
    n_s, n_x, n_u = true_lifted.n_s, true_lifted.n_x, true_lifted.n_u
    r_lift = np.asarray(r_lift, dtype=float).ravel()
    if r_lift.size != n_s * n_x:
        raise ValueError(f"r_lift must have length {n_s * n_x}, got {r_lift.size}")
    if n_iterations < 1:
        raise ValueError("n_iterations must be positive")
    if disturbance is None:
        disturbance = DisturbanceSpec(mean_per_step=np.zeros(n_x))
    if disturbance.mean_per_step.size != n_x:
        raise ValueError(f"disturbance mean must have {n_x} entries")

    u = np.zeros(n_s * n_u) if u_init is None else np.asarray(u_init, dtype=float).ravel()
    x0 = np.zeros(n_x) if x0_init is None else np.asarray(x0_init, dtype=float).ravel()

    rec = RunRecord(
        u_hist=np.zeros((n_iterations, n_s * n_u)),
        x_hist=np.zeros((n_iterations, n_s * n_x)),
        x0_hist=np.zeros((n_iterations, n_x)),
        z_hist=np.zeros((n_iterations, n_s * n_u + n_x)),
        e_hist=np.zeros((n_iterations, n_s * n_x)),
        d_hist=np.zeros((n_iterations, n_s * n_x)),
        cost_hist=np.zeros(n_iterations),
        n_i=filters.n_i,
        seeds={"disturbance": disturbance.seed,
               "uncertainty": uncertainty.seed if uncertainty else None},
    )

    shape_G = true_lifted.G_lift.shape
    shape_F = true_lifted.F_lift.shape
    u_last = None
    x_last = None
    for j in range(n_iterations):
        d = draw_disturbance(disturbance, j, n_s)
        if uncertainty is not None:
            dG, dF = draw_uncertainty(uncertainty, j, shape_G, shape_F)
        else:
            dG = dF = None
        x = step_plant(true_lifted, dG, dF, u, x0, d)
        e = r_lift - x

        rec.u_hist[j] = u
        rec.x_hist[j] = x
        rec.x0_hist[j] = x0
        rec.z_hist[j] = np.concatenate([u, x0])
        rec.e_hist[j] = e
        rec.d_hist[j] = d
        if weights is not None:
            rec.cost_hist[j] = _iteration_cost(weights, u, x, e, u_last, x_last)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            partial = RunRecord(
                u_hist=rec.u_hist[: j + 1].copy(),
                x_hist=rec.x_hist[: j + 1].copy(),
                x0_hist=rec.x0_hist[: j + 1].copy(),
                z_hist=rec.z_hist[: j + 1].copy(),
                e_hist=rec.e_hist[: j + 1].copy(),
                d_hist=rec.d_hist[: j + 1].copy(),
                cost_hist=rec.cost_hist[: j + 1].copy(),
                n_i=rec.n_i, seeds=rec.seeds, meta=rec.meta,
            )
            raise DivergenceError(
                f"nonfinite values at iteration {j}", iteration=j, record=partial
            )

        if j == n_iterations - 1:
            break
        x0_next = true_lifted.terminal(x)  # continuity: no reset between iterations
        plan = update_law(filters, ControllerState(u, e, x0, x0_next))
        u_last, x_last = u, x
        u = receding_step(plan, ops)
        x0 = x0_next
    return rec

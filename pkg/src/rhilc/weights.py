"""Weighting matrices and the multi-iteration performance index.

Per-state (or per-input) scalar weights are expanded into lifted diagonal
matrices by repeating them over the n_s timesteps of an iteration, and
into super matrices by repeating those over the n_i iterations of the
prediction horizon.  The "hatted" matrices fold the inter-iteration
difference penalties into a single quadratic form.

The cost of a candidate plan is available in two algebraically equal
forms: a per-iteration sum (`evaluate_longform`) and a single quadratic
in the super-vectors (`evaluate_superblock`).  Their agreement is a core
correctness check for everything downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .superlift import SuperOperators

__all__ = [
    "WeightConfig",
    "PerformanceWeights",
    "ReferenceSignal",
    "diag_from_vector",
    "block_repeat",
    "assemble_weights",
    "linearize_economic",
    "evaluate_longform",
    "evaluate_superblock",
]


@dataclass(frozen=True)
class WeightConfig:
    """User-selected scalar weights, one entry per input or state channel.

    q_u penalises input energy, q_delta_u the input change between
    consecutive iterations, q_x state energy, q_delta_x the state change
    between iterations and q_e the tracking error.  s_x_state is the
    per-state slope of a linearised economic objective, replicated over
    the iteration; q_sx optionally rescales it (defaults to ones).
    """

    q_u: np.ndarray
    q_delta_u: np.ndarray
    q_x: np.ndarray
    q_delta_x: np.ndarray
    q_e: np.ndarray
    s_x_state: np.ndarray
    q_sx: np.ndarray | None = None

    def __post_init__(self):
        for name in ("q_u", "q_delta_u", "q_x", "q_delta_x", "q_e", "s_x_state"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, v)
        if self.q_sx is not None:
            object.__setattr__(
                self, "q_sx", np.atleast_1d(np.asarray(self.q_sx, dtype=float))
            )
        for name in ("q_u", "q_delta_u", "q_x", "q_delta_x", "q_e"):
            if np.any(getattr(self, name) < 0):
                raise ConfigError("weight entries must be nonnegative", field=name)
        n_x = self.q_x.size
        for name in ("q_delta_x", "q_e", "s_x_state"):
            if getattr(self, name).size != n_x:
                raise ConfigError(
                    f"expected {n_x} entries to match q_x", field=name
                )
        if self.q_delta_u.size != self.q_u.size:
            raise ConfigError(
                f"expected {self.q_u.size} entries to match q_u", field="q_delta_u"
            )
        if self.q_sx is not None and self.q_sx.size != n_x:
            raise ConfigError(f"expected {n_x} entries to match q_x", field="q_sx")

    @property
    def n_u(self) -> int:
        return self.q_u.size

    @property
    def n_x(self) -> int:
        return self.q_x.size


@dataclass(frozen=True)
class ReferenceSignal:
    """Lifted reference vector built from one reference state per timestep."""

    r_lift: np.ndarray
    n_s: int
    n_x: int

    @classmethod
    def from_states(cls, states) -> "ReferenceSignal":
        states = np.atleast_2d(np.asarray(states, dtype=float))
        return cls(states.ravel(), states.shape[0], states.shape[1])


@dataclass(frozen=True)
class PerformanceWeights:
    """All lifted, super and hatted weighting matrices for one horizon."""

    Q_u: np.ndarray
    Q_delta_u: np.ndarray
    Q_x: np.ndarray
    Q_delta_x: np.ndarray
    Q_e: np.ndarray
    Q_u_sup: np.ndarray
    Q_x_sup: np.ndarray
    Q_e_sup: np.ndarray
    Q_delta_u_sup: np.ndarray
    Q_delta_x_sup: np.ndarray
    Q_hat_u: np.ndarray
    Q_hat_x: np.ndarray
    Q_hat_e: np.ndarray
    s_x_lift: np.ndarray
    s_x_sup: np.ndarray
    n_s: int
    n_i: int
    n_x: int
    n_u: int


def diag_from_vector(v) -> np.ndarray:
    """Square matrix with v on the diagonal (0x0 for an empty vector)."""
    return np.diag(np.asarray(v, dtype=float))


def block_repeat(n_b: int, C) -> np.ndarray:
    """Block-diagonal matrix with C repeated n_b times (n_b = 0 gives 0x0)."""
    if n_b < 0:
        raise ValueError("n_b must not be negative")
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if n_b == 0:
        return np.zeros((0, 0))
    return np.kron(np.eye(n_b), C)


def assemble_weights(
    cfg: WeightConfig, n_s: int, n_i: int, ops: SuperOperators
) -> PerformanceWeights:
    """Expand scalar weights into the full matrix family for one horizon.

    Lifted matrices repeat the per-channel diagonal over n_s steps; super
    matrices repeat those over n_i iterations (n_i - 1 for the difference
    weights, matching the difference operators).  The hatted matrices are

        Q_hat_u = Q_u_sup + D_u' Q_delta_u_sup D_u + E_u' Q_delta_u E_u

    and the state analogue; the error weight carries no difference terms.
    """
    if ops.n_s != n_s or ops.n_i != n_i:
        raise ValueError("operators were built for a different horizon")
    if ops.n_x != cfg.n_x or ops.n_u != cfg.n_u:
        raise ValueError("operators and weight config disagree on dimensions")

    Q_u = block_repeat(n_s, diag_from_vector(cfg.q_u))
    Q_delta_u = block_repeat(n_s, diag_from_vector(cfg.q_delta_u))
    Q_x = block_repeat(n_s, diag_from_vector(cfg.q_x))
    Q_delta_x = block_repeat(n_s, diag_from_vector(cfg.q_delta_x))
    Q_e = block_repeat(n_s, diag_from_vector(cfg.q_e))

    Q_u_sup = block_repeat(n_i, Q_u)
    Q_x_sup = block_repeat(n_i, Q_x)
    Q_e_sup = block_repeat(n_i, Q_e)
    Q_delta_u_sup = block_repeat(n_i - 1, Q_delta_u)
    Q_delta_x_sup = block_repeat(n_i - 1, Q_delta_x)

    Q_hat_u = Q_u_sup + ops.D_u.T @ Q_delta_u_sup @ ops.D_u \
        + ops.E_u.T @ Q_delta_u @ ops.E_u
    Q_hat_x = Q_x_sup + ops.D_x.T @ Q_delta_x_sup @ ops.D_x \
        + ops.E_x.T @ Q_delta_x @ ops.E_x
    Q_hat_e = Q_e_sup

    q_sx = np.ones(cfg.n_x) if cfg.q_sx is None else cfg.q_sx
    s_x_lift = np.tile(cfg.s_x_state * q_sx, n_s)
    s_x_sup = np.tile(s_x_lift, n_i)

    return PerformanceWeights(
        Q_u=Q_u, Q_delta_u=Q_delta_u, Q_x=Q_x, Q_delta_x=Q_delta_x, Q_e=Q_e,
        Q_u_sup=Q_u_sup, Q_x_sup=Q_x_sup, Q_e_sup=Q_e_sup,
        Q_delta_u_sup=Q_delta_u_sup, Q_delta_x_sup=Q_delta_x_sup,
        Q_hat_u=Q_hat_u, Q_hat_x=Q_hat_x, Q_hat_e=Q_hat_e,
        s_x_lift=s_x_lift, s_x_sup=s_x_sup,
        n_s=n_s, n_i=n_i, n_x=cfg.n_x, n_u=cfg.n_u,
    )


def linearize_economic(gradient, nominal_states, nominal_inputs, q_sx=None) -> np.ndarray:
    """Lifted slope of an economic objective along a nominal trajectory.

    `gradient(x, u)` must return the state gradient of the economic
    metric at one (state, input) pair; the results are stacked over the
    n_s nominal pairs and scaled entrywise by q_sx.
    """
    nominal_states = [np.asarray(x, dtype=float).ravel() for x in nominal_states]
    nominal_inputs = [np.asarray(u, dtype=float).ravel() for u in nominal_inputs]
    if len(nominal_states) != len(nominal_inputs) or not nominal_states:
        raise ValueError("need one nominal input per nominal state")
    n_x = nominal_states[0].size
    q_sx = np.ones(n_x) if q_sx is None else np.atleast_1d(np.asarray(q_sx, dtype=float))
    if q_sx.size != n_x:
        raise ValueError(f"q_sx must have {n_x} entries, got {q_sx.size}")

    blocks = []
    for x, u in zip(nominal_states, nominal_inputs):
        g = np.asarray(gradient(x, u), dtype=float).ravel()
        if g.size != n_x:
            raise ValueError(
                f"economic gradient must have {n_x} entries, got {g.size}"
            )
        blocks.append(g * q_sx)
    return np.concatenate(blocks)


def _quad(v, Q):
    return float(v @ Q @ v)


def evaluate_longform(weights: PerformanceWeights, u_seq, x_seq, r_lift) -> float:
    """Per-iteration sum form of the horizon cost.

    `u_seq` and `x_seq` hold n_i + 1 lifted vectors each; index 0 is the
    already-executed iteration the first difference terms compare
    against, indices 1..n_i are the predicted iterations.
    """
    u_seq = [np.asarray(u, dtype=float).ravel() for u in u_seq]
    x_seq = [np.asarray(x, dtype=float).ravel() for x in x_seq]
    n_i = weights.n_i
    if len(u_seq) != n_i + 1 or len(x_seq) != n_i + 1:
        raise ValueError(
            f"need {n_i + 1} lifted vectors (previous iteration plus horizon), "
            f"got {len(u_seq)} inputs and {len(x_seq)} states"
        )
    r_lift = np.asarray(r_lift, dtype=float).ravel()

    total = 0.0
    for k in range(1, n_i + 1):
        du = u_seq[k] - u_seq[k - 1]
        dx = x_seq[k] - x_seq[k - 1]
        e = r_lift - x_seq[k]
        total += (
            _quad(u_seq[k], weights.Q_u)
            + _quad(du, weights.Q_delta_u)
            + _quad(x_seq[k], weights.Q_x)
            + _quad(dx, weights.Q_delta_x)
            + _quad(e, weights.Q_e)
            + 2.0 * float(weights.s_x_lift @ x_seq[k])
        )
    return total


def evaluate_superblock(
    weights: PerformanceWeights,
    ops: SuperOperators,
    u_sup, x_sup, e_sup, u_prev, x_prev,
) -> float:
    """Super-block form of the horizon cost; equals `evaluate_longform`."""
    u_sup = np.asarray(u_sup, dtype=float).ravel()
    x_sup = np.asarray(x_sup, dtype=float).ravel()
    e_sup = np.asarray(e_sup, dtype=float).ravel()
    u_prev = np.asarray(u_prev, dtype=float).ravel()
    x_prev = np.asarray(x_prev, dtype=float).ravel()
    if u_sup.size != ops.n_i * ops.n_s * ops.n_u:
        raise ValueError(f"u_sup must have length {ops.n_i * ops.n_s * ops.n_u}")
    if x_sup.size != ops.n_i * ops.n_s * ops.n_x or e_sup.size != x_sup.size:
        raise ValueError("x_sup / e_sup have the wrong length")

    du0 = ops.E_u @ u_sup - u_prev
    dx0 = ops.E_x @ x_sup - x_prev
    return (
        _quad(u_sup, weights.Q_u_sup)
        + _quad(ops.D_u @ u_sup, weights.Q_delta_u_sup)
        + _quad(du0, weights.Q_delta_u)
        + _quad(x_sup, weights.Q_x_sup)
        + _quad(ops.D_x @ x_sup, weights.Q_delta_x_sup)
        + _quad(dx0, weights.Q_delta_x)
        + _quad(e_sup, weights.Q_e_sup)
        + 2.0 * float(weights.s_x_sup @ x_sup)
    )

"""Multi-iteration (super-lifted) prediction models and stacking operators.

A super-lifted vector concatenates lifted vectors over a prediction
horizon of ``n_i`` iterations.  Because the terminal state of each
iteration seeds the next one, the whole horizon is again a single affine
map of the first initial condition and the stacked inputs:

    x_sup = G_sup @ u_sup + F_sup @ x0,

with iteration-block (a, b) of G_sup equal to ``(F_lift E_F)^(a-b) G_lift``
and block row a of F_sup equal to ``(F_lift E_F)^(a-1) F_lift``.

The companion operators stack, difference and select lifted blocks of
super-vectors; they carry the degenerate n_i = 1 case as zero-row
difference operators so that a single code path covers classical
single-iteration learning control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lifting import LiftedModel

__all__ = [
    "SuperLiftedModel",
    "SuperOperators",
    "stacked_identity",
    "build_operators",
    "build_super",
    "build_super_ltv",
    "super_error",
]


@dataclass(frozen=True)
class SuperLiftedModel:
    """Affine map from stacked inputs and one initial condition to stacked states."""

    G_sup: np.ndarray
    F_sup: np.ndarray
    n_i: int
    lifted: LiftedModel

    def predict(self, u_sup: np.ndarray, x0: np.ndarray) -> np.ndarray:
        u_sup = np.asarray(u_sup, dtype=float).ravel()
        x0 = np.asarray(x0, dtype=float).ravel()
        if u_sup.size != self.G_sup.shape[1]:
            raise ValueError(
                f"u_sup must have length {self.G_sup.shape[1]}, got {u_sup.size}"
            )
        return self.G_sup @ u_sup + self.F_sup @ x0


@dataclass(frozen=True)
class SuperOperators:
    """Stack / difference / first-block-select operators for super-vectors.

    I_x and I_u stack n_i copies of a lifted identity; D_x and D_u take
    differences of consecutive lifted blocks (n_i - 1 block rows, empty
    for n_i = 1); E_x and E_u select the first lifted block.
    """

    I_x: np.ndarray
    I_u: np.ndarray
    D_x: np.ndarray
    D_u: np.ndarray
    E_x: np.ndarray
    E_u: np.ndarray
    n_s: int
    n_x: int
    n_u: int
    n_i: int


def stacked_identity(dim: int, count: int) -> np.ndarray:
    """Vertical stack of `count` identity matrices of size `dim`."""
    return np.tile(np.eye(dim), (count, 1))


def _difference_operator(dim: int, n_i: int) -> np.ndarray:
    D = np.zeros(((n_i - 1) * dim, n_i * dim))
    for i in range(n_i - 1):
        D[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = np.eye(dim)
        D[i * dim:(i + 1) * dim, (i + 1) * dim:(i + 2) * dim] = -np.eye(dim)
    return D


def _first_block_selector(dim: int, n_i: int) -> np.ndarray:
    E = np.zeros((dim, n_i * dim))
    E[:, :dim] = np.eye(dim)
    return E


def build_operators(n_s: int, n_x: int, n_u: int, n_i: int) -> SuperOperators:
    """All stacking operators for a horizon of n_i iterations."""
    if min(n_s, n_x, n_u, n_i) < 1:
        raise ValueError("n_s, n_x, n_u and n_i must all be positive")
    nsx, nsu = n_s * n_x, n_s * n_u
    return SuperOperators(
        I_x=stacked_identity(nsx, n_i),
        I_u=stacked_identity(nsu, n_i),
        D_x=_difference_operator(nsx, n_i),
        D_u=_difference_operator(nsu, n_i),
        E_x=_first_block_selector(nsx, n_i),
        E_u=_first_block_selector(nsu, n_i),
        n_s=n_s, n_x=n_x, n_u=n_u, n_i=n_i,
    )


def build_super(lifted: LiftedModel, n_i: int) -> SuperLiftedModel:
    """Chain one lifted model over n_i iterations.

    The terminal-to-initial handoff F_lift @ E_F couples consecutive
    iterations; its powers fill the sub-diagonal iteration blocks.
    """
    if n_i < 1:
        raise ValueError("n_i must be positive")
    nsx = lifted.n_s * lifted.n_x
    nsu = lifted.n_s * lifted.n_u
    C = lifted.F_lift @ lifted.E_F
    powers = [np.eye(nsx)]
    for _ in range(n_i - 1):
        powers.append(C @ powers[-1])

    G_sup = np.zeros((n_i * nsx, n_i * nsu))
    F_sup = np.zeros((n_i * nsx, lifted.n_x))
    for a in range(1, n_i + 1):
        rows = slice((a - 1) * nsx, a * nsx)
        F_sup[rows] = powers[a - 1] @ lifted.F_lift
        for b in range(1, a + 1):
            cols = slice((b - 1) * nsu, b * nsu)
            G_sup[rows, cols] = powers[a - b] @ lifted.G_lift
    return SuperLiftedModel(G_sup, F_sup, n_i, lifted)


def build_super_ltv(lifted_seq, n_i: int | None = None) -> SuperLiftedModel:
    """Chain a sequence of per-iteration lifted models.

    ``lifted_seq[i]`` models the (i+1)-th predicted iteration.  Built row
    by row: block row a is the handoff ``F_a @ E_F`` applied to row a-1
    plus that iteration's own lifted response on the diagonal.
    """
    lifted_seq = list(lifted_seq)
    if n_i is None:
        n_i = len(lifted_seq)
    if n_i < 1 or len(lifted_seq) != n_i:
        raise ValueError(f"expected {n_i} lifted models, got {len(lifted_seq)}")
    first = lifted_seq[0]
    for lm in lifted_seq:
        if (lm.n_s, lm.n_x, lm.n_u) != (first.n_s, first.n_x, first.n_u):
            raise ValueError("all lifted models must share n_s, n_x and n_u")

    nsx = first.n_s * first.n_x
    nsu = first.n_s * first.n_u
    G_sup = np.zeros((n_i * nsx, n_i * nsu))
    F_sup = np.zeros((n_i * nsx, first.n_x))

    rows = slice(0, nsx)
    F_sup[rows] = first.F_lift
    G_sup[rows, 0:nsu] = first.G_lift
    for a in range(2, n_i + 1):
        lm = lifted_seq[a - 1]
        handoff = lm.F_lift @ lm.E_F
        prev = slice((a - 2) * nsx, (a - 1) * nsx)
        rows = slice((a - 1) * nsx, a * nsx)
        F_sup[rows] = handoff @ F_sup[prev]
        G_sup[rows, :(a - 1) * nsu] = handoff @ G_sup[prev, :(a - 1) * nsu]
        G_sup[rows, (a - 1) * nsu:a * nsu] = lm.G_lift
    return SuperLiftedModel(G_sup, F_sup, n_i, first)


def super_error(x_sup: np.ndarray, r_lift: np.ndarray) -> np.ndarray:
    """Stacked tracking error: the lifted reference repeated minus x_sup."""
    x_sup = np.asarray(x_sup, dtype=float).ravel()
    r_lift = np.asarray(r_lift, dtype=float).ravel()
    if r_lift.size == 0 or x_sup.size % r_lift.size != 0:
        raise ValueError(
            f"x_sup length {x_sup.size} is not a multiple of r_lift length {r_lift.size}"
        )
    n_i = x_sup.size // r_lift.size
    return np.tile(r_lift, n_i) - x_sup

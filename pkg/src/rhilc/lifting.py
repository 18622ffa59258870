"""Single-iteration lifted models of discrete-time linear plants.

One iteration of a repetitive task covers ``n_s`` timesteps of the
recursion ``x[k+1] = A x[k] + B u[k]``.  Stacking the states ``x[1..n_s]``
into a single vector ``x_lift`` and the inputs ``u[0..n_s-1]`` into
``u_lift`` turns the whole iteration into one affine map,

    x_lift = G_lift @ u_lift + F_lift @ x0,

where ``G_lift`` is block lower triangular (block (m, p) is ``A^(m-p) B``
for m >= p) and ``F_lift`` stacks the powers ``A^m``.  The terminal
selector ``E_F`` picks the last state block out of ``x_lift``; in
continuous operation the terminal state of one iteration becomes the
initial condition of the next.

`simulate_iteration` runs the recursion step by step and is the ground
truth every lifted construction is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "StateSpaceModel",
    "TimeVaryingModel",
    "LiftedModel",
    "terminal_selector",
    "build_lifted_lti",
    "build_lifted_ltv",
    "simulate_iteration",
]


@dataclass(frozen=True)
class StateSpaceModel:
    """Constant-coefficient plant ``x[k+1] = A x[k] + B u[k]``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise ValueError(
                f"B must have {A.shape[0]} rows to match A, got shape {B.shape}"
            )
        if A.shape[0] < 1 or B.shape[1] < 1:
            raise ValueError("state and input dimensions must be at least 1")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class TimeVaryingModel:
    """Plant with per-timestep matrices, ``x[k+1] = A[k] x[k] + B[k] u[k]``."""

    A_seq: np.ndarray
    B_seq: np.ndarray

    def __post_init__(self):
        A_seq = np.asarray([np.atleast_2d(np.asarray(A, dtype=float)) for A in self.A_seq])
        B_list = []
        for B in self.B_seq:
            B = np.asarray(B, dtype=float)
            B_list.append(B.reshape(-1, 1) if B.ndim == 1 else B)
        B_seq = np.asarray(B_list)
        if len(A_seq) == 0 or len(A_seq) != len(B_seq):
            raise ValueError(
                f"A_seq and B_seq must be nonempty and of equal length, "
                f"got {len(A_seq)} and {len(B_seq)}"
            )
        n_x = A_seq[0].shape[0]
        if A_seq.shape[1:] != (n_x, n_x):
            raise ValueError("all A matrices must be square with a common size")
        if B_seq.shape[1] != n_x:
            raise ValueError("all B matrices must have n_x rows")
        object.__setattr__(self, "A_seq", A_seq)
        object.__setattr__(self, "B_seq", B_seq)

    @property
    def n_s(self) -> int:
        return len(self.A_seq)

    @property
    def n_x(self) -> int:
        return self.A_seq[0].shape[0]

    @property
    def n_u(self) -> int:
        return self.B_seq[0].shape[1]


@dataclass(frozen=True)
class LiftedModel:
    """One iteration of plant dynamics as a single affine map."""

    G_lift: np.ndarray
    F_lift: np.ndarray
    E_F: np.ndarray
    n_s: int
    n_x: int
    n_u: int

    def predict(self, u_lift: np.ndarray, x0: np.ndarray) -> np.ndarray:
        """Lifted state response to an input sequence and initial condition."""
        u_lift = np.asarray(u_lift, dtype=float).ravel()
        x0 = np.asarray(x0, dtype=float).ravel()
        if u_lift.size != self.n_s * self.n_u:
            raise ValueError(
                f"u_lift must have length {self.n_s * self.n_u}, got {u_lift.size}"
            )
        if x0.size != self.n_x:
            raise ValueError(f"x0 must have length {self.n_x}, got {x0.size}")
        return self.G_lift @ u_lift + self.F_lift @ x0

    def terminal(self, x_lift: np.ndarray) -> np.ndarray:
        """Last state block of a lifted state vector."""
        return self.E_F @ np.asarray(x_lift, dtype=float).ravel()


def terminal_selector(n_s: int, n_x: int) -> np.ndarray:
    """Matrix picking the final n_x entries out of a lifted state vector."""
    if n_s < 1 or n_x < 1:
        raise ValueError("n_s and n_x must be positive")
    E_F = np.zeros((n_x, n_s * n_x))
    E_F[:, (n_s - 1) * n_x:] = np.eye(n_x)
    return E_F


def build_lifted_lti(model: StateSpaceModel, n_s: int) -> LiftedModel:
    """Lifted matrices for a constant-coefficient plant over n_s steps.

    Block (m, p) of G_lift is zero above the diagonal, B on it, and
    ``A^(m-p) B`` below; block row m of F_lift is ``A^m`` (1-indexed
    blocks).  Powers are built by repeated multiplication.
    """
    if n_s < 1:
        raise ValueError("n_s must be positive")
    A, B = model.A, model.B
    n_x, n_u = model.n_x, model.n_u

    powers = [np.eye(n_x)]
    for _ in range(n_s):
        powers.append(A @ powers[-1])

    G = np.zeros((n_s * n_x, n_s * n_u))
    F = np.zeros((n_s * n_x, n_x))
    for m in range(1, n_s + 1):
        F[(m - 1) * n_x:m * n_x] = powers[m]
        for p in range(1, m + 1):
            G[(m - 1) * n_x:m * n_x, (p - 1) * n_u:p * n_u] = powers[m - p] @ B
    return LiftedModel(G, F, terminal_selector(n_s, n_x), n_s, n_x, n_u)


def build_lifted_ltv(model: TimeVaryingModel) -> LiftedModel:
    """Lifted matrices for a time-varying plant.

    Built row by row from the recursion itself: block row m is A[m-1]
    times block row m-1 with B[m-1] on the diagonal, so the result
    reproduces `simulate_iteration` for every input and initial
    condition by construction.
    """
    n_s, n_x, n_u = model.n_s, model.n_x, model.n_u
    G = np.zeros((n_s * n_x, n_s * n_u))
    F = np.zeros((n_s * n_x, n_x))

    row = slice(0, n_x)
    F[row] = model.A_seq[0]
    G[row, 0:n_u] = model.B_seq[0]
    for m in range(2, n_s + 1):
        prev = slice((m - 2) * n_x, (m - 1) * n_x)
        row = slice((m - 1) * n_x, m * n_x)
        A_k = model.A_seq[m - 1]
        F[row] = A_k @ F[prev]
        G[row, :(m - 1) * n_u] = A_k @ G[prev, :(m - 1) * n_u]
        G[row, (m - 1) * n_u:m * n_u] = model.B_seq[m - 1]
    return LiftedModel(G, F, terminal_selector(n_s, n_x), n_s, n_x, n_u)


def simulate_iteration(model, x0, u_seq, d_seq=None) -> np.ndarray:
    """Step-by-step recursion ``x[k+1] = A x[k] + B u[k] + d[k]``.

    Accepts a `StateSpaceModel` or `TimeVaryingModel` and returns the
    states x[1..n_s] as an (n_s, n_x) array.  This is the oracle all
    lifted constructions are checked against.
    """
    time_varying = isinstance(model, TimeVaryingModel)
    n_x, n_u = model.n_x, model.n_u

    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        u_seq = u_seq.reshape(-1, n_u)
    n_s = u_seq.shape[0]
    if u_seq.shape != (n_s, n_u):
        raise ValueError(f"u_seq must have shape (n_s, {n_u}), got {u_seq.shape}")
    if time_varying and n_s != model.n_s:
        raise ValueError(
            f"u_seq has {n_s} steps but the model defines {model.n_s}"
        )

    if d_seq is None:
        d_seq = np.zeros((n_s, n_x))
    else:
        d_seq = np.asarray(d_seq, dtype=float)
        if d_seq.ndim == 1:
            d_seq = d_seq.reshape(-1, n_x)
        if d_seq.shape != (n_s, n_x):
            raise ValueError(f"d_seq must have shape (n_s, {n_x}), got {d_seq.shape}")

    x = np.asarray(x0, dtype=float).ravel()
    if x.size != n_x:
        raise ValueError(f"x0 must have length {n_x}, got {x.size}")

    states = np.zeros((n_s, n_x))
    for k in range(n_s):
        A = model.A_seq[k] if time_varying else model.A
        B = model.B_seq[k] if time_varying else model.B
        x = A @ x + B @ u_seq[k] + d_seq[k]
        states[k] = x
    return states

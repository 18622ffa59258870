"""Iteration-domain closed-loop analysis.

With the learning filters fixed, one closed-loop iteration (apply the
input, measure, replan) maps z = [u_lift; x0] affinely to its successor:

    z[j+1] = A_z @ z[j] + eta(r, d),

where A_z blends the filters with the (possibly mismatched) plant's
lifted matrices and eta collects the reference, disturbance and
economic contributions.  The loop is stable in the iteration domain iff
the spectral radius of A_z is below one, in which case z converges to
the fixed point (I - A_z)^-1 eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import FixedPointError
from .filters import LearningFilters
from .lifting import LiftedModel
from .superlift import SuperOperators

__all__ = [
    "ZVector",
    "ClosedLoopMap",
    "StabilityVerdict",
    "build_closed_loop",
    "build_closed_loop_sequence",
    "spectral_radius",
    "check_condition1",
    "z_infinity",
]


@dataclass(frozen=True)
class ZVector:
    """Input sequence and initial condition of one iteration, stacked."""

    u_lift: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u_lift", np.asarray(self.u_lift, dtype=float).ravel())
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).ravel())

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.u_lift, self.x0])

    @classmethod
    def from_stacked(cls, z: np.ndarray, n_x: int) -> "ZVector":
        z = np.asarray(z, dtype=float).ravel()
        return cls(z[: z.size - n_x], z[z.size - n_x:])


@dataclass(frozen=True)
class ClosedLoopMap:
    """Affine iteration-domain recursion z[j+1] = A_z z[j] + eta.

    eta is stored split into its affine pieces: H_r maps the lifted
    reference, H_d the lifted disturbance, and eta_c is the constant
    part contributed by the economic filter.
    """

    A_z: np.ndarray
    T_u: np.ndarray
    T_x0: np.ndarray
    H_r: np.ndarray
    H_d: np.ndarray
    eta_c: np.ndarray
    n_s: int
    n_x: int
    n_u: int

    def eta(self, r_lift: np.ndarray, d_lift=None) -> np.ndarray:
        r_lift = np.asarray(r_lift, dtype=float).ravel()
        out = self.H_r @ r_lift + self.eta_c
        if d_lift is not None:
            out = out + self.H_d @ np.asarray(d_lift, dtype=float).ravel()
        return out

    def step(self, z: np.ndarray, r_lift: np.ndarray, d_lift=None) -> np.ndarray:
        return self.A_z @ np.asarray(z, dtype=float).ravel() + self.eta(r_lift, d_lift)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    radius: float


def build_closed_loop(
    filters: LearningFilters, plant_lifted: LiftedModel, ops: SuperOperators
) -> ClosedLoopMap:
    """Assemble the iteration-domain map of filters against a plant.

    `plant_lifted` is the plant the inputs are actually applied to; it
    may differ from the model the filters were synthesized from, which
    is exactly how model mismatch enters the analysis.
    """
    if (plant_lifted.n_s, plant_lifted.n_x, plant_lifted.n_u) != (
        filters.n_s, filters.n_x, filters.n_u,
    ):
        raise ValueError("plant and filter dimensions do not match")
    G_p, F_p, E_F = plant_lifted.G_lift, plant_lifted.F_lift, plant_lifted.E_F
    E_u = ops.E_u

    L_corr = filters.L_x0_next @ E_F - filters.L_e  # measured-data correction
    T_u = E_u @ (filters.L_u + L_corr @ G_p)
    T_x0 = E_u @ (filters.L_x0_next @ E_F @ F_p + filters.L_x0_prev - filters.L_e @ F_p)

    A_z = np.block([[T_u, T_x0], [E_F @ G_p, E_F @ F_p]])
    n_x = plant_lifted.n_x
    H_r = np.vstack([E_u @ filters.L_e, np.zeros((n_x, filters.L_e.shape[1]))])
    H_d = np.vstack([E_u @ L_corr, E_F])
    eta_c = np.concatenate([E_u @ filters.L_c, np.zeros(n_x)])
    return ClosedLoopMap(
        A_z=A_z, T_u=T_u, T_x0=T_x0, H_r=H_r, H_d=H_d, eta_c=eta_c,
        n_s=plant_lifted.n_s, n_x=n_x, n_u=plant_lifted.n_u,
    )


def build_closed_loop_sequence(filters, plant_lifted_seq, ops):
    """One closed-loop map per plant model in an iteration-varying sequence."""
    return [build_closed_loop(filters, plant, ops) for plant in plant_lifted_seq]


def spectral_radius(M: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a square matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if M.size == 0:
        return 0.0
    try:
        eigvals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise FixedPointError(f"eigenvalue computation failed: {exc}") from exc
    return float(np.max(np.abs(eigvals)))


def check_condition1(cmap: ClosedLoopMap, margin: float = 0.0) -> StabilityVerdict:
    """Iteration-domain stability test: spectral radius below 1 - margin."""
    radius = spectral_radius(cmap.A_z)
    return StabilityVerdict(stable=radius < 1.0 - margin, radius=radius)


def z_infinity(
    cmap: ClosedLoopMap,
    r_lift: np.ndarray,
    d_lift=None,
    min_rcond: float = 1e-12,
    require_stable: bool = True,
) -> ZVector:
    """Fixed point (I - A_z)^-1 eta of the iteration-domain recursion.

    With `require_stable` (the default) the spectral radius must be
    below one, so the returned point is the attractor of the closed
    loop.  Passing require_stable=False returns the algebraic fixed
    point whenever I - A_z is well conditioned, which is useful for
    reporting on unstable configurations; it is then not an attractor.
    """
    radius = spectral_radius(cmap.A_z)
    if require_stable and radius >= 1.0:
        raise FixedPointError(
            f"iteration-domain map is not stable (spectral radius {radius:.6f})",
            radius=radius,
        )
    n = cmap.A_z.shape[0]
    I_minus_A = np.eye(n) - cmap.A_z
    rcond = 1.0 / np.linalg.cond(I_minus_A)
    if not np.isfinite(rcond) or rcond < min_rcond:
        raise FixedPointError(
            f"I - A_z is numerically singular (reciprocal condition {rcond:.3e})",
            radius=radius, rcond=rcond,
        )
    eta = cmap.eta(r_lift, d_lift)
    z = scipy.linalg.solve(I_minus_A, eta)
    residual = np.max(np.abs(z - (cmap.A_z @ z + eta)))
    if residual > 1e-8 * (1.0 + np.max(np.abs(z))):
        raise FixedPointError(
            f"fixed-point residual {residual:.3e} exceeds tolerance",
            radius=radius, rcond=rcond,
        )
    return ZVector.from_stacked(z, cmap.n_x)

from pathlib import Path

import numpy as np
import pytest

from rhilc import (
    StateSpaceModel,
    WeightConfig,
    assemble_weights,
    build_lifted_lti,
    build_operators,
    build_super,
    synthesize,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

# servo plant used throughout the experiments
NOMINAL_A = np.array([[0.0, 1.0], [-0.71, 1.50]])
NOMINAL_B = np.array([[1.0], [1.0]])
TRUE_A = np.array([[0.0, 1.0], [-0.35, 0.87]])
TRUE_B = np.array([[1.60], [0.82]])

NOMINAL_WEIGHTS = dict(
    q_u=[1e-3], q_delta_u=[1e-2], q_x=[1e-6, 1e-6],
    q_delta_x=[0.3, 0.3], q_e=[1.0, 0.0], s_x_state=[1e-18, 1e-18],
)
UNCERTAIN_WEIGHTS = dict(
    q_u=[1e-3], q_delta_u=[1e-3], q_x=[1e-6, 1e-6],
    q_delta_x=[3e-3, 3e-3], q_e=[1.0, 0.0], s_x_state=[1e-18, 1e-18],
)


def nominal_model():
    return StateSpaceModel(NOMINAL_A, NOMINAL_B)


def true_model():
    return StateSpaceModel(TRUE_A, TRUE_B)


def sine_reference(n_s, n_x, amplitude=1.0, periods=1):
    k = np.arange(1, n_s + 1)
    r = np.zeros((n_s, n_x))
    r[:, 0] = amplitude * np.sin(2.0 * np.pi * periods * k / n_s)
    return r.ravel()


def random_model(rng, n_x, n_u, radius=0.9):
    """Random plant rescaled so the step dynamics are not explosive."""
    A = rng.normal(size=(n_x, n_x))
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho > 0:
        A *= radius / rho
    B = rng.normal(size=(n_x, n_u))
    return StateSpaceModel(A, B)


def random_weight_config(rng, n_x, n_u, economic=True):
    """Random PSD diagonal weights with a floor keeping synthesis well posed."""
    return WeightConfig(
        q_u=0.05 + rng.uniform(0.0, 1.0, n_u),
        q_delta_u=rng.uniform(0.0, 1.0, n_u),
        q_x=rng.uniform(0.0, 0.5, n_x),
        q_delta_x=rng.uniform(0.0, 0.5, n_x),
        q_e=rng.uniform(0.0, 2.0, n_x),
        s_x_state=rng.normal(0.0, 0.3, n_x) if economic else np.zeros(n_x),
    )


def random_setup(rng, n_x=2, n_u=1, n_s=5, n_i=3, economic=True):
    """Model, lifted/super models, operators, weights and filters in one go."""
    model = random_model(rng, n_x, n_u)
    lifted = build_lifted_lti(model, n_s)
    sup = build_super(lifted, n_i)
    ops = build_operators(n_s, n_x, n_u, n_i)
    cfg = random_weight_config(rng, n_x, n_u, economic=economic)
    weights = assemble_weights(cfg, n_s, n_i, ops)
    filters = synthesize(sup, lifted, weights, ops)
    return model, lifted, sup, ops, weights, filters


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)

import numpy as np
import pytest

from rhilc import (
    StateSpaceModel,
    TimeVaryingModel,
    build_lifted_lti,
    build_lifted_ltv,
    simulate_iteration,
    terminal_selector,
)
from conftest import nominal_model, random_model


def test_nilpotent_plant_gives_identity_input_map():
    model = StateSpaceModel([[0.0]], [[1.0]])
    lifted = build_lifted_lti(model, 3)
    assert np.array_equal(lifted.G_lift, np.eye(3))
    assert np.array_equal(lifted.F_lift, np.zeros((3, 1)))


def test_scalar_powers_fill_initial_condition_map():
    lifted = build_lifted_lti(StateSpaceModel([[2.0]], [[1.0]]), 3)
    assert np.array_equal(lifted.F_lift, np.array([[2.0], [4.0], [8.0]]))


def test_lti_prediction_matches_step_simulation():
    lifted = build_lifted_lti(nominal_model(), 4)
    rng = np.random.default_rng(1)
    u = rng.normal(size=4)
    x0 = rng.normal(size=2)
    sim = simulate_iteration(nominal_model(), x0, u.reshape(-1, 1)).ravel()
    assert np.max(np.abs(lifted.predict(u, x0) - sim)) < 1e-12


def test_constant_ltv_equals_lti():
    model = nominal_model()
    n_s = 6
    tv = TimeVaryingModel([model.A] * n_s, [model.B] * n_s)
    lti = build_lifted_lti(model, n_s)
    ltv = build_lifted_ltv(tv)
    assert np.max(np.abs(lti.G_lift - ltv.G_lift)) < 1e-14
    assert np.max(np.abs(lti.F_lift - ltv.F_lift)) < 1e-14


def test_ltv_hand_recursion():
    tv = TimeVaryingModel([[[2.0]], [[3.0]]], [[[1.0]], [[1.0]]])
    lifted = build_lifted_ltv(tv)
    assert np.array_equal(lifted.G_lift, np.array([[1.0, 0.0], [3.0, 1.0]]))
    assert np.array_equal(lifted.F_lift, np.array([[2.0], [6.0]]))


def test_ltv_prediction_matches_step_simulation():
    rng = np.random.default_rng(7)
    n_s, n_x, n_u = 5, 2, 1
    tv = TimeVaryingModel(
        [rng.normal(size=(n_x, n_x)) for _ in range(n_s)],
        [rng.normal(size=(n_x, n_u)) for _ in range(n_s)],
    )
    lifted = build_lifted_ltv(tv)
    u = rng.normal(size=(n_s, n_u))
    x0 = rng.normal(size=n_x)
    sim = simulate_iteration(tv, x0, u).ravel()
    assert np.max(np.abs(lifted.predict(u.ravel(), x0) - sim)) < 1e-12


def test_terminal_selector_picks_last_block():
    E_F = terminal_selector(2, 2)
    assert np.array_equal(E_F @ np.array([1.0, 2.0, 3.0, 4.0]), [3.0, 4.0])
    assert np.array_equal(terminal_selector(1, 3), np.eye(3))
    wide = terminal_selector(50, 2)
    assert wide.shape == (2, 100)
    assert np.count_nonzero(wide) == 2
    assert set(wide[wide != 0]) == {1.0}


def test_simulate_zero_everything_stays_zero():
    states = simulate_iteration(nominal_model(), np.zeros(2), np.zeros((4, 1)))
    assert np.array_equal(states, np.zeros((4, 2)))


def test_simulate_integrator_accumulates():
    model = StateSpaceModel([[1.0]], [[1.0]])
    states = simulate_iteration(model, [0.0], [[1.0], [1.0], [1.0]])
    assert np.array_equal(states.ravel(), [1.0, 2.0, 3.0])


def test_simulate_with_disturbance():
    model = StateSpaceModel([[0.0]], [[1.0]])
    states = simulate_iteration(model, [0.0], [[1.0], [1.0]], d_seq=[[0.5], [0.5]])
    assert np.array_equal(states.ravel(), [1.5, 1.5])


@pytest.mark.parametrize("trial", range(20))
def test_lifted_equals_simulation_random(trial):
    rng = np.random.default_rng(100 + trial)
    n_x = int(rng.integers(1, 5))
    n_u = int(rng.integers(1, 3))
    n_s = int(rng.integers(1, 21))
    model = random_model(rng, n_x, n_u)
    u = rng.normal(size=(n_s, n_u))
    x0 = rng.normal(size=n_x)
    sim = simulate_iteration(model, x0, u).ravel()

    lti = build_lifted_lti(model, n_s)
    scale = 1.0 + np.max(np.abs(sim))
    assert np.max(np.abs(lti.predict(u.ravel(), x0) - sim)) / scale < 1e-10

    tv = TimeVaryingModel(
        [rng.normal(size=(n_x, n_x)) * 0.6 for _ in range(n_s)],
        [rng.normal(size=(n_x, n_u)) for _ in range(n_s)],
    )
    ltv = build_lifted_ltv(tv)
    sim_tv = simulate_iteration(tv, x0, u).ravel()
    scale = 1.0 + np.max(np.abs(sim_tv))
    assert np.max(np.abs(ltv.predict(u.ravel(), x0) - sim_tv)) / scale < 1e-10


@pytest.mark.parametrize("builder", ["lti", "ltv"])
def test_block_strict_lower_triangularity(builder):
    rng = np.random.default_rng(5)
    n_x, n_u, n_s = 3, 2, 6
    if builder == "lti":
        lifted = build_lifted_lti(random_model(rng, n_x, n_u), n_s)
    else:
        lifted = build_lifted_ltv(TimeVaryingModel(
            [rng.normal(size=(n_x, n_x)) for _ in range(n_s)],
            [rng.normal(size=(n_x, n_u)) for _ in range(n_s)],
        ))
    for m in range(n_s):
        for p in range(n_s):
            block = lifted.G_lift[m * n_x:(m + 1) * n_x, p * n_u:(p + 1) * n_u]
            if m < p:
                assert np.array_equal(block, np.zeros((n_x, n_u)))
            elif m == p:
                assert np.any(block != 0.0) or not np.any(
                    lifted.G_lift[m * n_x:(m + 1) * n_x]
                )


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        StateSpaceModel([[1.0, 0.0]], [[1.0]])
    with pytest.raises(ValueError):
        StateSpaceModel([[1.0]], [[1.0], [2.0]])
    with pytest.raises(ValueError):
        TimeVaryingModel([np.eye(2)], [np.ones((2, 1)), np.ones((2, 1))])
    with pytest.raises(ValueError):
        simulate_iteration(nominal_model(), np.zeros(3), np.zeros((4, 1)))
    with pytest.raises(ValueError):
        simulate_iteration(nominal_model(), np.zeros(2), np.zeros((4, 2)))
    with pytest.raises(ValueError):
        build_lifted_lti(nominal_model(), 0)

"""Lifted and super-lifted models of a servo plant.

Walks through the core representation: one iteration of a discrete-time
plant collapsed into a single affine map, and a multi-iteration horizon
chained through the terminal-to-initial handoff.  Every construction is
checked against plain step-by-step simulation.
"""

import numpy as np

from rhilc import (
    StateSpaceModel,
    build_lifted_lti,
    build_super,
    simulate_iteration,
)

# the servo benchmark plant used throughout these demos
model = StateSpaceModel(A=[[0.0, 1.0], [-0.71, 1.50]], B=[[1.0], [1.0]])
n_s = 8

lifted = build_lifted_lti(model, n_s)
print(f"plant: n_x={model.n_x}, n_u={model.n_u}, iteration length n_s={n_s}")
print(f"G_lift shape {lifted.G_lift.shape}, F_lift shape {lifted.F_lift.shape}")
print("\nfirst 4x4 entries of G_lift (block lower triangular):")
print(np.array_str(lifted.G_lift[:4, :4], precision=3))

rng = np.random.default_rng(0)
u = rng.normal(size=n_s)
x0 = rng.normal(size=2)

x_lifted = lifted.predict(u, x0)
x_stepped = simulate_iteration(model, x0, u.reshape(-1, 1)).ravel()
print(f"\nlifted prediction vs step simulation: "
      f"max abs gap {np.max(np.abs(x_lifted - x_stepped)):.2e}")

# continuous operation: the terminal state seeds the next iteration
x_terminal = lifted.terminal(x_lifted)
print(f"terminal state of the iteration: {x_terminal}")

n_i = 3
sup = build_super(lifted, n_i)
u_sup = rng.normal(size=n_i * n_s)
x_sup = sup.predict(u_sup, x0)

# oracle: run the three iterations one at a time, handing the state on
x_start, chained = x0, []
for u_block in u_sup.reshape(n_i, n_s):
    block = simulate_iteration(model, x_start, u_block.reshape(-1, 1))
    chained.append(block.ravel())
    x_start = block[-1]
gap = np.max(np.abs(x_sup - np.concatenate(chained)))
print(f"\nsuper-lifted horizon of {n_i} iterations, "
      f"prediction vs chained simulation: max abs gap {gap:.2e}")

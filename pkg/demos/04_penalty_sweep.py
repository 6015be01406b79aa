"""Projection penalty scheme: divergence damping and its epsilon sweep.

The constraint div v = 0 is relaxed to a stiff damping of the gradient
part of the velocity at rate 1/eps (applied exactly in time, so the step
size never sees eps). Two estimates are measured across the sweep:

* the penalty size ||(I-P)v|| stays O(eps): its ratio to eps is a stable
  constant;
* the solutions converge to the exactly-projected dynamics as eps -> 0.
"""

import torusflow as tf
from torusflow.presets import initial_state

grid = tf.Grid(64)
init = initial_state(grid, "taylor_green", 0.1)
law = tf.kinetic_law(1.0, 1.0)  # admissible: f = 1 + |v|^2
controls = tf.TimeControls(t_final=0.5)
eps_values = (0.2, 0.1, 0.05, 0.025)

print("sweeping the penalty scheme against a sharply-mollified projected reference...")
study = tf.run_study(init, tf.SchemeKind.CONTINUOUS_PROJECTION, eps_values, law, controls,
                     reference_eps=1e-3)

print(f"\n{'eps':>8} {'max ||(I-P)v||':>16} {'penalty/eps':>13} {'dist to ref':>13}")
for eps, run, c, d in zip(eps_values, study.runs, study.penalty_constants, study.distances):
    print(f"{eps:8.3f} {run.penalty_norm.max():16.4e} {c:13.3f} {d:13.4e}")

ratio = max(study.penalty_constants) / min(study.penalty_constants)
print(f"\npenalty constant stable across the sweep (max/min = {ratio:.2f})")
print(f"distance to the projected reference decays, fitted rate ~ eps^{study.fitted_rate:.2f}")
print("(the theory guarantees convergence but promises no rate; the fit is empirical)")

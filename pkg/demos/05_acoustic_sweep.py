"""Artificial compressibility: acoustic relaxation of the constraint.

An extra pressure unknown obeys dp/dt = -div(v)/eps while the velocity
feels -grad(p)/eps: fast plane acoustic waves at speed 1/eps carry the
compressible content away. The stiff pair is constant-coefficient, so the
integrator advances it by an exact per-mode rotation and the step size
stays on the material CFL scale. Measured across the sweep:

* max_t ||div v|| <= C eps with C stable;
* convergence to the projected dynamics as eps -> 0.
"""

import torusflow as tf
from torusflow.presets import initial_state

grid = tf.Grid(64)
init = initial_state(grid, "taylor_green", 0.1)
law = tf.kinetic_law(1.0, 1.0)
controls = tf.TimeControls(t_final=0.5)
eps_values = (0.2, 0.1, 0.05, 0.025)

print("sweeping the acoustic scheme against a sharply-mollified projected reference...")
study = tf.run_study(init, tf.SchemeKind.ARTIFICIAL_COMPRESSIBILITY, eps_values, law, controls,
                     reference_eps=1e-3)

print(f"\n{'eps':>8} {'max ||div v||':>14} {'div/eps':>10} {'dist to ref':>13} {'steps':>6}")
for eps, run, c, d in zip(eps_values, study.runs, study.divergence_constants, study.distances):
    print(f"{eps:8.3f} {run.div_norm.max():14.4e} {c:10.3f} {d:13.4e} {run.times.size - 1:6d}")

ratio = max(study.divergence_constants) / min(study.divergence_constants)
print(f"\ndivergence scales linearly with eps (constant ratio {ratio:.2f});")
print("note the step count barely changes with eps: the acoustic part is exact,")
print("so no 1/eps time-step restriction applies.")
print(f"distance to the projected reference decays, fitted rate ~ eps^{study.fitted_rate:.2f}")

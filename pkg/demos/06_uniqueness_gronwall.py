"""Twin-run separation: the energy argument behind uniqueness, measured.

Two copies of the same problem start 1e-6 apart in one density mode. The
weighted L2 distance between them (weight diag(f/rho, 1, 1), frozen at
the second twin) obeys a differential inequality d/dt W <= c W, so its
logarithm grows at most linearly. The demo fits that exponent and checks
the bound.
"""

import numpy as np

import torusflow as tf
from torusflow.presets import initial_state

grid = tf.Grid(64)
init = initial_state(grid, "taylor_green", 0.1)
law = tf.kinetic_law(1.0, 1.0)
controls = tf.TimeControls(t_final=0.5)
cfg = tf.SchemeConfig(kind=tf.SchemeKind.MOLLIFIED_PROJECTED, eps=0.05)

print("running twins separated by 1e-6 in the density...")
sep = tf.uniqueness_separation(init, cfg, law, controls, delta=1e-6)

print(f"\n  W(0) = {sep.separation[0]:.3e}")
print(f"  W(T) = {sep.separation[-1]:.3e}   (growth factor {sep.growth_factor[-1]:.4f})")
print(f"  exponent fitted on the first 10%: c~ = {sep.c_tilde:.4f}")
print(f"  full-horizon affine fit: slope {sep.slope:.4f}, "
      f"rms residual {np.sqrt(np.mean(sep.residuals**2)):.2e}")
print(f"  log W(t) - log W(0) <= c~ t + log 2 held throughout: {sep.bound_ok}")

print("\nlog growth of the separation over time:")
step = max(1, len(sep.times) // 12)
for t, g in zip(sep.times[::step], np.log(sep.growth_factor[::step])):
    bar = "#" * int(3000 * max(g, 0.0))
    print(f"  t={t:5.3f}  {g: .5f} {bar}")

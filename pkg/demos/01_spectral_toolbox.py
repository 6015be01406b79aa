"""Tour of the periodic-domain calculus: transforms, projection, smoothing.

Every operator is an exact Fourier multiplier, so the identities printed
here hold to rounding error, not to a discretization tolerance.
"""

import numpy as np

import torusflow as tf

grid = tf.Grid(64)
X, Y = grid.coords
print(f"grid: {grid.n} x {grid.n} over [0, {grid.length:.4f})^2, spacing {grid.spacing:.4f}")

# --- transforms -------------------------------------------------------------
f = tf.ScalarField.from_function(grid, lambda x, y: np.sin(x))
coeffs = tf.transform_forward(f)
print("\nsin(x) lives on two conjugate modes:")
print(f"  coeff at mode (+1, 0): {coeffs.data[1, 0]:.3f}")
print(f"  coeff at mode (-1, 0): {coeffs.data[-1, 0]:.3f}")
back = tf.transform_inverse(coeffs)
print(f"  round-trip error: {np.abs(back.values - f.values).max():.2e}")

# --- Parseval and Sobolev weights -------------------------------------------
print("\nmean-square norms are resolution independent:")
print(f"  ||sin x||_0 = {tf.sobolev_norm(f, 0):.12f}  (1/sqrt(2) = {1/np.sqrt(2):.12f})")
print(f"  ||sin x||_1 = {tf.sobolev_norm(f, 1):.12f}  (weight (1+|k|^2) doubles the energy)")

# --- divergence-free projection ----------------------------------------------
rng = np.random.default_rng(0)
v = tf.VectorField.from_arrays(grid, rng.standard_normal((64, 64)), rng.standard_normal((64, 64)))
p = tf.leray_project(v)
grad_part = tf.VectorField.from_arrays(grid, v.x - p.x, v.y - p.y)
print("\nprojection of white noise onto divergence-free fields:")
print(f"  ||div v||  before: {tf.l2_norm(tf.divergence(v)):.3e}")
print(f"  ||div Pv|| after:  {tf.l2_norm(tf.divergence(p)):.3e}")
print(f"  orthogonality <Pv, v - Pv> = {tf.inner(p, grad_part):.3e}")
pp = tf.leray_project(p)
print(f"  idempotence ||P(Pv) - Pv|| = {np.abs(pp.x - p.x).max():.3e}")

# --- smoothing ---------------------------------------------------------------
print("\nsmoothing is a multiplier family, 1 at frequency zero:")
m = tf.mollify(f, 0.5)
print(f"  gaussian at eps=0.5 scales sin(x) by {m.values[16, 0] / f.values[16, 0]:.6f}"
      f"  (exp(-0.25) = {np.exp(-0.25):.6f})")
a = tf.mollify_vector(tf.leray_project(v), 0.2)
b = tf.leray_project(tf.mollify_vector(v, 0.2))
print(f"  commutation with the projection: {np.abs(a.x - b.x).max():.3e}")

# --- dealiasing ----------------------------------------------------------------
spiky = tf.ScalarField.from_function(grid, lambda x, y: np.sin(x) + 0.5 * np.sin(25 * x))
clean = tf.dealias_field(spiky)
print("\n2/3-rule low-pass keeps mode 1, removes mode 25 (cutoff 64/3):")
print(f"  max |dealias(f) - sin x| = {np.abs(clean.values - np.sin(X)).max():.3e}")

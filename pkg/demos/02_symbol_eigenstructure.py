"""Advection symbol: matrices, spectrum, symmetrizer, admissible laws.

The first-order part of the model has the closed-form spectrum
v.xi (d-1 times) and v.xi +/- sqrt(f rho) |xi|; the diagonal weight
(f/rho, 1, ..., 1) symmetrizes every advection matrix. Both facts are
checked against generic linear algebra below, together with the
structural conditions on the shipped coefficient laws.
"""

import numpy as np

import torusflow as tf
from torusflow.model import advection_matrices

rng = np.random.default_rng(1)

print("closed-form spectrum vs numpy.linalg.eigvals at random points:")
worst = 0.0
for _ in range(500):
    rho = 0.2 + 3 * rng.random()
    v = 2 * rng.standard_normal(2)
    f = 0.1 + 3 * rng.random()
    xi = rng.standard_normal(2)
    closed = tf.eigenvalues_closed_form(rho, v, f, xi)
    numeric = np.sort(np.linalg.eigvals(tf.assemble_symbol(rho, v, f, xi)).real)
    worst = max(worst, np.abs(closed - numeric).max())
print(f"  max elementwise gap over 500 points: {worst:.2e}")

print("\nworked example (rho=4, v=(1,0), f=1, xi=(1,0)):")
print(f"  eigenvalues {tf.eigenvalues_closed_form(4.0, [1, 0], 1.0, [1, 0])}"
      "   [v.xi = 1, sqrt(f rho)|xi| = 2]")
print(f"  symmetrizer diag {tf.symmetrizer(4.0, 1.0)}")
A0 = np.diag(tf.symmetrizer(4.0, 1.0))
A1 = advection_matrices(4.0, [1.0, 0.0], 1.0, form="full")[0]
print(f"  symmetry defect of A0 @ A1: {np.abs(A0 @ A1 - (A0 @ A1).T).max():.2e}")

print("\nhyperbolicity needs f rho > 0; f = -1 yields a complex spectrum:")
eigs = np.linalg.eigvals(tf.assemble_symbol(1.0, [0, 0], -1.0, [1, 0]))
print(f"  spectrum {np.sort_complex(eigs)}")

print("\nadmissibility of the shipped coefficient laws")
print("(positive, velocity-gradient parallel to v, nonnegative coefficient):")
samples = [(0.5 + rng.random(), rng.standard_normal(2)) for _ in range(200)]
for law in (tf.constant_law(1.0), tf.biofilm_law(0.5), tf.kinetic_law(1.0, 1.0), tf.affine_rho_law(1.0, 0.5)):
    rep = tf.check_admissible(law, samples)
    tag = "admissible" if rep.admissible else "NOT admissible"
    if rep.admissible and rep.degenerate:
        tag += " (degenerate: gradient coefficient is zero)"
    print(f"  {law.name:10s} -> {tag}; min f = {rep.min_f:.3f}, "
          f"analytic gradients vs finite differences: {rep.max_gradient_error:.1e}")

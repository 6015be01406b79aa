"""Built-in initial conditions for benchmarks and the CLI.

All presets are smooth, periodic for any torus length, and have
divergence-free velocity. The density is ``1 + amplitude * shape`` and
the reference constant is its spatial mean, so the fluctuation is
mean-free.
"""

from __future__ import annotations

import numpy as np

from .model import State, make_state
from .spectral import Grid, ScalarField, VectorField, TWO_PI

INIT_PRESETS = ("taylor_green", "shear", "quiescent_density_bump", "custom_file")
V01_PRESETS = ("zero", "gradient")


def initial_state(grid: Grid, preset: str, amplitude: float = 0.1) -> State:
    """Construct the named initial state (``custom_file`` is handled by I/O)."""
    s = TWO_PI / grid.length  # map [0, L) onto one full period
    X, Y = grid.coords
    tx, ty = s * X, s * Y
    if preset == "taylor_green":
        vx, vy = np.sin(tx) * np.cos(ty), -np.cos(tx) * np.sin(ty)
        shape = np.sin(tx) * np.sin(ty)
    elif preset == "shear":
        vx, vy = np.sin(ty), np.zeros_like(tx)
        shape = np.sin(tx)
    elif preset == "quiescent_density_bump":
        vx, vy = np.zeros_like(tx), np.zeros_like(tx)
        shape = np.exp(2.0 * (np.cos(tx - np.pi) + np.cos(ty - np.pi) - 2.0))
    else:
        raise ValueError(f"unknown initial preset {preset!r}; known: {INIT_PRESETS[:-1]}")
    rho = ScalarField(grid, 1.0 + amplitude * shape)
    return make_state(rho, VectorField.from_arrays(grid, vx, vy))


def compressible_perturbation(grid: Grid, preset: str) -> VectorField | None:
    """The slightly-compressible direction v0_1 (a pure gradient, or none)."""
    if preset == "zero":
        return None
    if preset == "gradient":
        s = TWO_PI / grid.length
        X, Y = grid.coords
        # grad(sin(sx) sin(sy)): mean-free, entirely in the gradient sector
        return VectorField.from_arrays(
            grid,
            s * np.cos(s * X) * np.sin(s * Y),
            s * np.sin(s * X) * np.cos(s * Y),
        )
    raise ValueError(f"unknown v0_1 preset {preset!r}; known: {V01_PRESETS}")

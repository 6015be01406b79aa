"""Right-hand sides of the three epsilon-approximation schemes.

All schemes share the advective core of `model.advective_rhs`; they differ
in how the incompressibility constraint is imposed:

* Scheme A (mollified projected): smooth the state, evaluate the
  advection there, smooth again and project the velocity block onto
  divergence-free fields. The constraint holds exactly at every instant.
* Scheme B (projection penalty): no projector in the advection; instead
  the gradient part of the velocity is damped by the stiff linear term
  ``-(I - P)v / eps``, which the integrator applies exactly.
* Scheme C (artificial compressibility): an extra pressure unknown
  evolves by ``dp/dt = -div(v)/eps`` while the velocity feels
  ``-grad(p)/eps``; the epsilon-singular part is a constant-coefficient
  acoustic operator, again applied exactly per Fourier mode.

The reduction oracle integrates the exactly-solvable special case
``f = phi'(rho)``: homogeneous incompressible advection plus passive
density transport. It is the independent reference the general schemes
are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PositivityLoss
from .model import PressureLaw, RHO_FLOOR, State, Tendency, require_positive
from .spectral import (
    MollifierKind,
    ScalarField,
    VectorField,
    dealias_field,
    dealias_vector,
    divergence,
    gradient,
    l2_norm,
    leray_project,
    mollify,
    mollify_vector,
)


class SchemeKind(Enum):
    MOLLIFIED_PROJECTED = "a"
    CONTINUOUS_PROJECTION = "b"
    ARTIFICIAL_COMPRESSIBILITY = "c"
    REDUCTION_ORACLE = "oracle"


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme selection plus its regularization data.

    ``eps`` is the smoothing scale (A), penalty strength (B) or acoustic
    stiffness (C); it must be positive for those schemes and is ignored by
    the oracle. ``v0_1`` is the slightly-compressible initial perturbation
    added as ``v0 + eps * v0_1`` for B and C. ``p_tilde_0`` seeds the extra
    pressure unknown of C (zero by default; any smooth field is valid).
    """

    kind: SchemeKind
    eps: float | None = None
    mollifier: MollifierKind = MollifierKind.GAUSSIAN_MULTIPLIER
    v0_1: VectorField | None = None
    p_tilde_0: ScalarField | None = None

    def __post_init__(self):
        if self.kind is not SchemeKind.REDUCTION_ORACLE:
            if self.eps is None or not self.eps > 0:
                raise ValueError(
                    f"scheme {self.kind.value!r} needs a positive eps, got {self.eps}"
                )


@dataclass(frozen=True)
class ProjectionPenalty:
    """Stiff descriptor: v' = -(I - P)v / eps, solved exactly in time."""

    eps: float


@dataclass(frozen=True)
class AcousticPair:
    """Stiff descriptor: p' = -div(v)/eps, v' = -grad(p)/eps, exact per mode."""

    eps: float


StiffDescriptor = ProjectionPenalty | AcousticPair


# ---------------------------------------------------------------------------
# shared mollified advective core


def _mollified_core(state: State, law: PressureLaw, eps: float, kind: MollifierKind) -> Tendency:
    """Smoothed advection: coefficients at the smoothed state, derivatives of
    smoothed fields, one more smoothing pass on the result.

    Raises `PositivityLoss` if the smoothed density crosses the vacuum
    floor (the coefficient f is evaluated there).
    """
    g = state.grid
    rho_t_m = mollify(state.rho_tilde, eps, kind)
    v_m = mollify_vector(state.v, eps, kind)
    rho_m = rho_t_m.values + state.rho_bar
    if not float(rho_m.min()) > RHO_FLOOR:
        raise PositivityLoss(
            f"mollified density reached {float(rho_m.min()):.3e} <= floor {RHO_FLOOR:.1e}"
        )
    f_m = np.broadcast_to(
        np.asarray(law.f(rho_m, v_m.x, v_m.y), dtype=np.float64), (g.n, g.n)
    )
    grad_rho = gradient(rho_t_m)
    grad_vx = gradient(v_m.components[0])
    grad_vy = gradient(v_m.components[1])

    core_rho = dealias_field(ScalarField(g, v_m.x * grad_rho.x + v_m.y * grad_rho.y))
    core_vx = dealias_field(
        ScalarField(g, v_m.x * grad_vx.x + v_m.y * grad_vx.y + f_m * grad_rho.x)
    )
    core_vy = dealias_field(
        ScalarField(g, v_m.x * grad_vy.x + v_m.y * grad_vy.y + f_m * grad_rho.y)
    )
    return Tendency(
        ScalarField(g, -mollify(core_rho, eps, kind).values),
        VectorField(
            g,
            (
                ScalarField(g, -mollify(core_vx, eps, kind).values),
                ScalarField(g, -mollify(core_vy, eps, kind).values),
            ),
        ),
    )


def _sandwich_core(state: State, law: PressureLaw, eps: float, kind: MollifierKind) -> Tendency:
    """Literal symmetrized evaluation of the same core.

    Multiplies the derivative stack by ``diag(f/rho,1,1) @ A_j`` pointwise
    and undoes the symmetrizer afterwards. The scalar weights cancel node
    by node, so this must agree with `_mollified_core` to rounding; it
    exists to guard the matrix transcriptions.
    """
    g = state.grid
    rho_t_m = mollify(state.rho_tilde, eps, kind)
    v_m = mollify_vector(state.v, eps, kind)
    rho_m = rho_t_m.values + state.rho_bar
    f_m = np.broadcast_to(
        np.asarray(law.f(rho_m, v_m.x, v_m.y), dtype=np.float64), (g.n, g.n)
    )
    grad_rho = gradient(rho_t_m)
    grad_vx = gradient(v_m.components[0])
    grad_vy = gradient(v_m.components[1])
    weight = f_m / rho_m
    # symmetrized rows: weight * (v . grad rho) for the density slot,
    # untouched velocity rows (the symmetrizer's velocity block is I)
    sym_rho = weight * (v_m.x * grad_rho.x + v_m.y * grad_rho.y)
    core_rho = (1.0 / weight) * sym_rho
    core_vx = v_m.x * grad_vx.x + v_m.y * grad_vx.y + f_m * grad_rho.x
    core_vy = v_m.x * grad_vy.x + v_m.y * grad_vy.y + f_m * grad_rho.y
    return Tendency(
        ScalarField(g, -mollify(dealias_field(ScalarField(g, core_rho)), eps, kind).values),
        VectorField.from_arrays(
            g,
            -mollify(dealias_field(ScalarField(g, core_vx)), eps, kind).values,
            -mollify(dealias_field(ScalarField(g, core_vy)), eps, kind).values,
        ),
    )


# ---------------------------------------------------------------------------
# scheme right-hand sides


def rhs_scheme_a(
    state: State,
    law: PressureLaw,
    eps: float,
    mollifier: MollifierKind = MollifierKind.GAUSSIAN_MULTIPLIER,
) -> Tendency:
    """Mollified projected tendency; its velocity block is divergence-free.

    The density block passes through the block projector untouched, the
    velocity block is Leray-projected, so pure-gradient forcings (e.g.
    ``f grad rho`` for constant f) produce no velocity tendency at all.
    States must (and, under this scheme, do) stay divergence-free.
    """
    div_v = l2_norm(divergence(state.v))
    if div_v > 1e-8 * max(1.0, l2_norm(state.v)):
        raise ValueError(
            f"projected-scheme state has ||div v|| = {div_v:.3e}; it must stay divergence-free"
        )
    core = _mollified_core(state, law, eps, mollifier)
    return Tendency(core.rho_tilde, leray_project(core.v))


def rhs_scheme_b(
    state: State,
    law: PressureLaw,
    eps: float,
    mollifier: MollifierKind = MollifierKind.GAUSSIAN_MULTIPLIER,
    debug_sandwich: bool = False,
) -> tuple[Tendency, ProjectionPenalty]:
    """Projection-penalty scheme: smoothed advection plus a stiff damping map.

    Returns the nonstiff tendency (the same mollified core Scheme A uses,
    before projection) and the descriptor for ``v' = -(I-P)v/eps``, to be
    applied exactly by the integrator. With ``debug_sandwich`` the core is
    recomputed through the literal symmetrizer sandwich and compared.
    """
    core = _mollified_core(state, law, eps, mollifier)
    if debug_sandwich:
        other = _sandwich_core(state, law, eps, mollifier)
        scale = max(
            np.abs(core.rho_tilde.values).max(),
            np.abs(core.v.x).max(),
            np.abs(core.v.y).max(),
            1.0,
        )
        diff = max(
            np.abs(core.rho_tilde.values - other.rho_tilde.values).max(),
            np.abs(core.v.x - other.v.x).max(),
            np.abs(core.v.y - other.v.y).max(),
        )
        if diff > 1e-10 * scale:
            raise RuntimeError(
                f"symmetrizer sandwich mismatch: {diff:.3e} vs scale {scale:.3e}"
            )
    return core, ProjectionPenalty(eps)


def penalty_gradient(state: State, eps: float) -> VectorField:
    """Reconstructed pressure gradient of the penalty scheme: (I-P)v / eps."""
    p = leray_project(state.v)
    g = state.grid
    return VectorField.from_arrays(g, (state.v.x - p.x) / eps, (state.v.y - p.y) / eps)


def rhs_scheme_c(state: State, law: PressureLaw, eps: float) -> Tendency:
    """Full artificial-compressibility tendency (stiff terms included).

    d/dt rho_tilde = -div(rho v)          (conservative: div v != 0 here)
    d/dt p_tilde   = -div(v) / eps
    d/dt v         = -(v.grad)v - f grad(rho_tilde) - grad(p_tilde)/eps
    """
    nonstiff, pair = rhs_scheme_c_split(state, law, eps)
    g = state.grid
    div_v = divergence(state.v)
    grad_p = gradient(state.p_tilde)
    return Tendency(
        nonstiff.rho_tilde,
        VectorField.from_arrays(
            g,
            nonstiff.v.x - grad_p.x / eps,
            nonstiff.v.y - grad_p.y / eps,
        ),
        ScalarField(g, nonstiff.p_tilde.values - div_v.values / eps),
    )


def rhs_scheme_c_split(
    state: State, law: PressureLaw, eps: float
) -> tuple[Tendency, AcousticPair]:
    """Nonstiff advective part of the artificial-compressibility scheme.

    The epsilon-singular coupling (p_tilde against div v) is returned as an
    `AcousticPair` descriptor: its matrices are constant, so the integrator
    can advance it by an exact plane-wave rotation per Fourier mode.
    """
    if state.p_tilde is None:
        raise ValueError("artificial-compressibility states need the p_tilde block")
    require_positive(state)
    g = state.grid
    vx, vy = state.v.x, state.v.y
    rho = state.rho
    flux = dealias_vector(VectorField.from_arrays(g, rho * vx, rho * vy))
    rho_dot = ScalarField(g, -divergence(flux).values)

    grad_rho = gradient(state.rho_tilde)
    grad_vx = gradient(state.v.components[0])
    grad_vy = gradient(state.v.components[1])
    f_vals = law.f_on_state(state)
    vx_dot = dealias_field(
        ScalarField(g, -(vx * grad_vx.x + vy * grad_vx.y) - f_vals * grad_rho.x)
    )
    vy_dot = dealias_field(
        ScalarField(g, -(vx * grad_vy.x + vy * grad_vy.y) - f_vals * grad_rho.y)
    )
    p_dot = ScalarField(g, np.zeros((g.n, g.n)))
    return Tendency(rho_dot, VectorField(g, (vx_dot, vy_dot)), p_dot), AcousticPair(eps)


def reduction_oracle_rhs(state: State, law: PressureLaw) -> Tendency:
    """Exactly-solvable reference dynamics for laws with f = phi'(rho).

    The compressible pressure folds into the incompressible one, leaving
    projected homogeneous advection for v and passive transport for the
    density fluctuation.
    """
    if not law.reducible:
        raise ValueError(
            f"law {law.name!r} has no antiderivative phi; the reduction only "
            "applies when f depends on rho alone"
        )
    require_positive(state)
    g = state.grid
    vx, vy = state.v.x, state.v.y
    grad_rho = gradient(state.rho_tilde)
    grad_vx = gradient(state.v.components[0])
    grad_vy = gradient(state.v.components[1])
    rho_dot = dealias_field(ScalarField(g, -(vx * grad_rho.x + vy * grad_rho.y)))
    adv = dealias_vector(
        VectorField.from_arrays(
            g,
            -(vx * grad_vx.x + vy * grad_vx.y),
            -(vx * grad_vy.x + vy * grad_vy.y),
        )
    )
    return Tendency(rho_dot, leray_project(adv))


def slightly_compressible_init(v0: VectorField, v0_1: VectorField | None, eps: float) -> VectorField:
    """Initial velocity ``v0 + eps * v0_1`` for the penalty/acoustic schemes.

    ``v0`` must be divergence-free; the perturbation ``v0_1`` is arbitrary
    (and may well be a pure gradient, the interesting direction).
    """
    div0 = l2_norm(divergence(v0))
    if div0 > 1e-10 * max(1.0, l2_norm(v0)):
        raise ValueError(f"base initial velocity is not divergence-free: ||div v0|| = {div0:.3e}")
    if v0_1 is None or eps == 0.0:
        return v0
    return VectorField.from_arrays(v0.grid, v0.x + eps * v0_1.x, v0.y + eps * v0_1.y)

"""Time advancement: RK4 for the advection, exact substeps for stiff parts.

The stiff epsilon-singular operators of the penalty and artificial
compressibility schemes are linear with constant (or Fourier-diagonal)
coefficients, so they are advanced by their exact solution operators:
an exponential contraction of the gradient part for the penalty, a
plane-wave rotation per Fourier mode for the acoustic pair. Splitting
(Strang by default) combines them with the explicit RK4 nonstiff step,
which removes any 1/eps time step restriction: the CFL bound only sees
the material speeds ``|v|_1 + sqrt(f * rho)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .errors import HyperbolicityLoss, NumericalBlowup, PositivityLoss
from .model import (
    PressureLaw,
    State,
    Tendency,
    add_scaled,
    require_positive,
    state_sobolev_norm,
)
from .schemes import (
    AcousticPair,
    ProjectionPenalty,
    SchemeConfig,
    SchemeKind,
    StiffDescriptor,
    reduction_oracle_rhs,
    rhs_scheme_a,
    rhs_scheme_b,
    rhs_scheme_c_split,
    slightly_compressible_init,
)
from .spectral import (
    ScalarField,
    VectorField,
    divergence,
    gradient_part,
    l2_norm,
    leray_project,
)


class Splitting(Enum):
    STRANG = "strang"
    LIE = "lie"


@dataclass(frozen=True)
class TimeControls:
    """Horizon, CFL number and splitting flavor for a run."""

    t_final: float
    cfl: float = 0.4
    dt_override: float | None = None
    splitting: Splitting = Splitting.STRANG

    def __post_init__(self):
        if self.t_final < 0:
            raise ValueError(f"final time must be nonnegative, got {self.t_final}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt_override is not None and not self.dt_override > 0:
            raise ValueError(f"dt override must be positive, got {self.dt_override}")


def cfl_dt(
    state: State,
    law: PressureLaw,
    controls: TimeControls,
    eps: float | None = None,
    stiff_exact: bool = True,
) -> float:
    """Largest stable step: ``cfl * dx / max(|v|_1 + sqrt(f rho))``.

    ``|v|_1`` is the 1-norm of the velocity, a conservative bound on the
    directional advection speed. When the stiff part is *not* advanced by
    its exact solution operator, the acoustic speed 1/eps enters and the
    step is additionally capped by ``cfl * eps * dx``; with exact
    substeps (the default) no epsilon cap applies. A ``dt_override`` is
    returned verbatim, with a warning if it exceeds the CFL value.
    """
    grid = state.grid
    f_rho = np.asarray(law.f(state.rho, state.v.x, state.v.y), dtype=float) * state.rho
    if (f_rho < 0).any():
        raise HyperbolicityLoss(
            f"f*rho reached {float(f_rho.min()):.3e} < 0 inside the CFL bound"
        )
    speed = float((np.abs(state.v.x) + np.abs(state.v.y) + np.sqrt(f_rho)).max())
    speed = max(speed, 1e-12)
    dt = controls.cfl * grid.spacing / speed
    if eps is not None and not stiff_exact:
        dt = min(dt, controls.cfl * eps * grid.spacing)
    if controls.dt_override is not None:
        if controls.dt_override > dt:
            warnings.warn(
                f"dt override {controls.dt_override:.3e} exceeds the CFL step {dt:.3e}",
                stacklevel=2,
            )
        return controls.dt_override
    return dt


def rk4_step(state: State, rhs: Callable[[State], Tendency], dt: float) -> State:
    """Classical fourth-order step; raises `NumericalBlowup` on NaN/Inf."""
    k1 = rhs(state)
    k2 = rhs(add_scaled(state, k1, 0.5 * dt))
    k3 = rhs(add_scaled(state, k2, 0.5 * dt))
    k4 = rhs(add_scaled(state, k3, dt))
    out = add_scaled(state, k1 + 2.0 * k2 + 2.0 * k3 + k4, dt / 6.0)
    if not out.is_finite:
        raise NumericalBlowup("state stopped being finite after an RK4 step", state=state)
    return out


def stiff_exact_substep(state: State, descriptor: StiffDescriptor | None, dt: float) -> State:
    """Advance the stiff linear part by its exact solution operator.

    ProjectionPenalty: ``v <- P v + exp(-dt/eps) (I-P) v``; divergence-free
    fields are fixed points, pure gradients decay exponentially.

    AcousticPair: per Fourier mode the pair (p_tilde, longitudinal
    velocity amplitude) rotates at angular rate ``|k|/eps``; the
    solenoidal velocity part and the mean mode are untouched. The
    rotation is unitary, so acoustic energy is conserved exactly.
    """
    if descriptor is None:
        return state
    if isinstance(descriptor, ProjectionPenalty):
        sol = leray_project(state.v)
        decay = float(np.exp(-dt / descriptor.eps))
        v_new = VectorField.from_arrays(
            state.grid,
            sol.x + decay * (state.v.x - sol.x),
            sol.y + decay * (state.v.y - sol.y),
        )
        return replace(state, v=v_new)
    if isinstance(descriptor, AcousticPair):
        if state.p_tilde is None:
            raise ValueError("acoustic substep needs the p_tilde block")
        g = state.grid
        kmag = np.sqrt(g.k_sq_d)
        inv_kmag = np.zeros_like(kmag)
        np.divide(1.0, kmag, out=inv_kmag, where=kmag > 0)
        ph = np.fft.fft2(state.p_tilde.values)
        vxh = np.fft.fft2(state.v.x)
        vyh = np.fft.fft2(state.v.y)
        lon = (g.kx_d * vxh + g.ky_d * vyh) * inv_kmag
        theta = kmag * dt / descriptor.eps
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        ph_new = cos_t * ph - 1j * sin_t * lon
        lon_new = -1j * sin_t * ph + cos_t * lon
        dlon = (lon_new - lon) * inv_kmag
        v_new = VectorField.from_arrays(
            g,
            np.fft.ifft2(vxh + g.kx_d * dlon).real,
            np.fft.ifft2(vyh + g.ky_d * dlon).real,
        )
        return replace(state, v=v_new, p_tilde=ScalarField(g, np.fft.ifft2(ph_new).real))
    raise ValueError(f"unknown stiff descriptor {descriptor!r}")


# ---------------------------------------------------------------------------
# run orchestration


@dataclass(frozen=True)
class Failure:
    kind: str  # "positivity" or "blowup"
    time: float


@dataclass
class RunReport:
    """Diagnostic time series of one simulation.

    All norms are mean-square based: ``hs_norm`` is the Sobolev norm of
    (rho_tilde, v) at index ``hs_index``, ``kinetic`` is ``||v||_0^2 / 2``,
    ``div_norm`` and ``penalty_norm`` are ``||div v||_0`` and
    ``||(I-P) v||_0``. A run that lost positivity or blew up carries the
    failure kind and the last valid time in ``failure``.
    """

    times: np.ndarray
    hs_norm: np.ndarray
    kinetic: np.ndarray
    div_norm: np.ndarray
    penalty_norm: np.ndarray
    min_rho: np.ndarray
    final_state: State
    final_time: float
    scheme: SchemeKind
    eps: float | None
    law: PressureLaw
    hs_index: float
    failure: Failure | None = None
    states: list[State] | None = None
    dt: float | None = None

    @property
    def completed(self) -> bool:
        return self.failure is None


def prepare_initial_state(initial: State, scheme: SchemeConfig) -> State:
    """Normalize an initial state for the chosen scheme.

    Applies the slightly-compressible perturbation for the penalty and
    acoustic schemes and attaches (or forbids) the extra pressure block.
    """
    state = initial
    if scheme.kind in (SchemeKind.CONTINUOUS_PROJECTION, SchemeKind.ARTIFICIAL_COMPRESSIBILITY):
        v0 = slightly_compressible_init(state.v, scheme.v0_1, scheme.eps)
        state = replace(state, v=v0)
    if scheme.kind is SchemeKind.ARTIFICIAL_COMPRESSIBILITY:
        if state.p_tilde is None:
            p0 = scheme.p_tilde_0
            if p0 is None:
                p0 = ScalarField(state.grid, np.zeros((state.grid.n, state.grid.n)))
            state = replace(state, p_tilde=p0)
    elif state.p_tilde is not None:
        raise ValueError(f"scheme {scheme.kind.value!r} does not carry a p_tilde block")
    return state


def make_stepper(
    scheme: SchemeConfig, law: PressureLaw, splitting: Splitting = Splitting.STRANG
) -> Callable[[State, float], State]:
    """One full time step for the chosen scheme, as a (state, dt) map.

    Plain RK4 for the projected scheme and the oracle; stiff/nonstiff
    splitting with exact stiff substeps for the penalty and acoustic
    schemes. A Strang step with a vanished stiff part reduces exactly to
    the RK4 step.
    """
    kind = scheme.kind
    if kind is SchemeKind.MOLLIFIED_PROJECTED:
        def rhs(s: State) -> Tendency:
            return rhs_scheme_a(s, law, scheme.eps, scheme.mollifier)

        return lambda s, dt: rk4_step(s, rhs, dt)

    if kind is SchemeKind.REDUCTION_ORACLE:
        if not law.reducible:
            raise ValueError(f"law {law.name!r} is not reducible; the oracle needs f = f(rho)")

        def rhs(s: State) -> Tendency:
            return reduction_oracle_rhs(s, law)

        return lambda s, dt: rk4_step(s, rhs, dt)

    if kind is SchemeKind.CONTINUOUS_PROJECTION:
        descriptor = ProjectionPenalty(scheme.eps)

        def rhs(s: State) -> Tendency:
            tend, _ = rhs_scheme_b(s, law, scheme.eps, scheme.mollifier)
            return tend

    elif kind is SchemeKind.ARTIFICIAL_COMPRESSIBILITY:
        descriptor = AcousticPair(scheme.eps)

        def rhs(s: State) -> Tendency:
            tend, _ = rhs_scheme_c_split(s, law, scheme.eps)
            return tend

    else:
        raise ValueError(f"unknown scheme kind {kind!r}")

    if splitting is Splitting.STRANG:
        def step(s: State, dt: float) -> State:
            s = stiff_exact_substep(s, descriptor, 0.5 * dt)
            s = rk4_step(s, rhs, dt)
            return stiff_exact_substep(s, descriptor, 0.5 * dt)

    else:  # Lie
        def step(s: State, dt: float) -> State:
            s = stiff_exact_substep(s, descriptor, dt)
            return rk4_step(s, rhs, dt)

    return step


def run_simulation(
    initial: State,
    scheme: SchemeConfig,
    law: PressureLaw,
    controls: TimeControls,
    hs_index: float = 3.0,
    snapshot_every: int = 1,
    keep_states: bool = False,
) -> RunReport:
    """Advance a state to ``controls.t_final`` and collect diagnostics.

    Snapshots are recorded at t=0, every ``snapshot_every`` accepted steps
    and at the final time. Positivity loss or numerical blowup terminates
    the run cleanly; the report then carries the failure kind and the last
    valid time instead of raising.
    """
    state = prepare_initial_state(initial, scheme)
    require_positive(state, time=0.0)
    step = make_stepper(scheme, law, controls.splitting)

    times: list[float] = []
    hs: list[float] = []
    kin: list[float] = []
    div: list[float] = []
    pen: list[float] = []
    mrho: list[float] = []
    states: list[State] | None = [] if keep_states else None

    def record(t: float, s: State) -> None:
        times.append(t)
        hs.append(state_sobolev_norm(s, hs_index))
        kin.append(0.5 * l2_norm(s.v) ** 2)
        div.append(l2_norm(divergence(s.v)))
        pen.append(l2_norm(gradient_part(s.v)))
        mrho.append(s.min_rho)
        if states is not None:
            states.append(s)

    t = 0.0
    record(t, state)
    failure: Failure | None = None
    fixed_dt = controls.dt_override
    n_steps = 0
    while t < controls.t_final - 1e-14:
        dt_full = fixed_dt if fixed_dt is not None else cfl_dt(state, law, controls, eps=scheme.eps)
        dt = min(dt_full, controls.t_final - t)
        try:
            new_state = step(state, dt)
            require_positive(new_state, time=t + dt)
        except PositivityLoss:
            failure = Failure("positivity", t)
            break
        except NumericalBlowup:
            failure = Failure("blowup", t)
            break
        state = new_state
        t += dt
        n_steps += 1
        if n_steps % snapshot_every == 0 or t >= controls.t_final - 1e-14:
            record(t, state)

    if times[-1] < t:  # ensure the last accepted state is recorded
        record(t, state)
    return RunReport(
        times=np.asarray(times),
        hs_norm=np.asarray(hs),
        kinetic=np.asarray(kin),
        div_norm=np.asarray(div),
        penalty_norm=np.asarray(pen),
        min_rho=np.asarray(mrho),
        final_state=state,
        final_time=t,
        scheme=scheme.kind,
        eps=scheme.eps,
        law=law,
        hs_index=hs_index,
        failure=failure,
        states=states,
        dt=fixed_dt,
    )

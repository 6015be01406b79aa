"""Continuous-model data: states, pressure laws, symbol algebra, advection.

The model couples a transported density to an incompressible velocity
through a pressure-like term ``f(rho, v) * grad(rho)``. This module owns
everything the approximation schemes share:

* the translated state ``(rho_tilde, v)`` with its positivity contract,
* scalar coefficient laws ``f`` with analytic velocity/density gradients,
* the first-order advection matrices, their Fourier symbol, the
  closed-form spectrum and the diagonal symmetrizer ``diag(f/rho, 1, ...)``,
* admissibility checks for ``f`` (positivity, velocity-gradient parallel
  to v with nonnegative coefficient),
* the advective right-hand side and the elliptic pressure recovery.

Matrix assembly is written for a general space dimension ``d`` even
though the grids are 2-D, so the block structure stays visible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import HyperbolicityLoss, PositivityLoss
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    dealias_field,
    dealias_vector,
    divergence,
    gradient,
    l2_norm,
    sobolev_norm,
    solve_poisson,
)

RHO_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# states and tendencies


@dataclass(frozen=True)
class State:
    """Translated unknown: density fluctuation, velocity, reference density.

    ``rho_tilde`` stores ``rho - rho_bar`` so the unknown is square
    integrable around the constant background. ``p_tilde`` is present only
    for artificial-compressibility runs (it is that scheme's extra
    pressure variable).
    """

    rho_tilde: ScalarField
    v: VectorField
    rho_bar: float
    p_tilde: ScalarField | None = None

    def __post_init__(self):
        if self.v.grid != self.rho_tilde.grid:
            raise ValueError("state fields must share one grid")
        if self.p_tilde is not None and self.p_tilde.grid != self.rho_tilde.grid:
            raise ValueError("state fields must share one grid")
        if not self.rho_bar > 0:
            raise ValueError(f"reference density must be positive, got {self.rho_bar}")

    @property
    def grid(self) -> Grid:
        return self.rho_tilde.grid

    @property
    def rho(self) -> np.ndarray:
        """Physical density samples rho_tilde + rho_bar."""
        return self.rho_tilde.values + self.rho_bar

    @property
    def min_rho(self) -> float:
        return float(self.rho.min())

    @property
    def is_finite(self) -> bool:
        ok = self.rho_tilde.is_finite and self.v.is_finite
        if self.p_tilde is not None:
            ok = ok and self.p_tilde.is_finite
        return ok


@dataclass(frozen=True)
class Tendency:
    """Time derivative with the same block layout as `State`."""

    rho_tilde: ScalarField
    v: VectorField
    p_tilde: ScalarField | None = None

    def __add__(self, other: "Tendency") -> "Tendency":
        pt = None
        if self.p_tilde is not None or other.p_tilde is not None:
            a = self.p_tilde.values if self.p_tilde is not None else 0.0
            b = other.p_tilde.values if other.p_tilde is not None else 0.0
            grid = (self.p_tilde or other.p_tilde).grid
            pt = ScalarField(grid, a + b)
        return Tendency(
            ScalarField(self.rho_tilde.grid, self.rho_tilde.values + other.rho_tilde.values),
            VectorField.from_arrays(self.v.grid, self.v.x + other.v.x, self.v.y + other.v.y),
            pt,
        )

    def __rmul__(self, a: float) -> "Tendency":
        pt = None if self.p_tilde is None else ScalarField(self.p_tilde.grid, a * self.p_tilde.values)
        return Tendency(
            ScalarField(self.rho_tilde.grid, a * self.rho_tilde.values),
            VectorField.from_arrays(self.v.grid, a * self.v.x, a * self.v.y),
            pt,
        )

    @property
    def is_finite(self) -> bool:
        ok = self.rho_tilde.is_finite and self.v.is_finite
        if self.p_tilde is not None:
            ok = ok and self.p_tilde.is_finite
        return ok


def add_scaled(state: State, tend: Tendency, a: float) -> State:
    """Return ``state + a * tend``, carrying rho_bar through unchanged."""
    pt = state.p_tilde
    if pt is not None:
        if tend.p_tilde is None:
            raise ValueError("tendency lacks the p_tilde block this state carries")
        pt = ScalarField(pt.grid, pt.values + a * tend.p_tilde.values)
    return State(
        ScalarField(state.grid, state.rho_tilde.values + a * tend.rho_tilde.values),
        VectorField.from_arrays(state.grid, state.v.x + a * tend.v.x, state.v.y + a * tend.v.y),
        state.rho_bar,
        pt,
    )


def require_positive(state: State, floor: float = RHO_FLOOR, time: float | None = None) -> None:
    """Hard positivity gate: the model is meaningless at vacuum."""
    m = state.min_rho
    if not m > floor:
        at = "" if time is None else f" at t={time:.6g}"
        raise PositivityLoss(f"density reached {m:.3e} <= floor {floor:.1e}{at}", time)


def state_sobolev_norm(state: State, s: float) -> float:
    """Sobolev norm of the translated pair (rho_tilde, v)."""
    return float(np.sqrt(sobolev_norm(state.rho_tilde, s) ** 2 + sobolev_norm(state.v, s) ** 2))


def translate(rho: ScalarField, rho_bar: float | None = None) -> tuple[ScalarField, float]:
    """Split a positive density into (fluctuation, reference constant).

    With ``rho_bar`` omitted the spatial mean is used, which makes the
    fluctuation mean-free. Exact inverse of `untranslate`.
    """
    if not float(rho.values.min()) > 0:
        raise ValueError("density must be positive at every node")
    if rho_bar is None:
        rho_bar = rho.mean()
    if not rho_bar > 0:
        raise ValueError(f"reference density must be positive, got {rho_bar}")
    return ScalarField(rho.grid, rho.values - rho_bar), float(rho_bar)


def untranslate(state: State) -> ScalarField:
    return ScalarField(state.grid, state.rho)


def make_state(
    rho: ScalarField,
    v: VectorField,
    rho_bar: float | None = None,
    p_tilde: ScalarField | None = None,
) -> State:
    rho_t, bar = translate(rho, rho_bar)
    return State(rho_t, v, bar, p_tilde)


def with_p_tilde(state: State, p_tilde: ScalarField | None) -> State:
    return replace(state, p_tilde=p_tilde)


# ---------------------------------------------------------------------------
# pressure laws


@dataclass(frozen=True)
class PressureLaw:
    """Scalar coefficient ``f(rho, v)`` with its analytic derivatives.

    ``f``, ``grad_rho`` map node arrays ``(rho, vx, vy)`` to arrays;
    ``grad_v`` returns the pair ``(df/dvx, df/dvy)``. ``phi`` is the
    antiderivative in rho, present exactly when f depends on rho alone
    (then ``f = phi'(rho)`` and the model reduces to homogeneous
    incompressible flow plus a passive transport, the verification oracle).
    """

    name: str
    f: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    grad_v: Callable[[np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    grad_rho: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray] | None = None
    params: tuple[float, ...] = ()

    @property
    def reducible(self) -> bool:
        return self.phi is not None

    def f_on_state(self, state: State) -> np.ndarray:
        return np.broadcast_to(
            np.asarray(self.f(state.rho, state.v.x, state.v.y), dtype=np.float64),
            (state.grid.n, state.grid.n),
        )


def constant_law(fbar: float = 1.0) -> PressureLaw:
    return PressureLaw(
        name="constant",
        f=lambda rho, vx, vy: np.full_like(np.asarray(rho, dtype=float), fbar),
        grad_v=lambda rho, vx, vy: (np.zeros_like(np.asarray(vx, dtype=float)),
                                    np.zeros_like(np.asarray(vy, dtype=float))),
        grad_rho=lambda rho, vx, vy: np.zeros_like(np.asarray(rho, dtype=float)),
        phi=lambda rho: fbar * np.asarray(rho, dtype=float),
        params=(fbar,),
    )


def biofilm_law(gamma: float = 0.5) -> PressureLaw:
    """f = gamma / rho, the logarithmic compressible pressure."""
    return PressureLaw(
        name="biofilm",
        f=lambda rho, vx, vy: gamma / np.asarray(rho, dtype=float),
        grad_v=lambda rho, vx, vy: (np.zeros_like(np.asarray(vx, dtype=float)),
                                    np.zeros_like(np.asarray(vy, dtype=float))),
        grad_rho=lambda rho, vx, vy: -gamma / np.asarray(rho, dtype=float) ** 2,
        phi=lambda rho: gamma * np.log(np.asarray(rho, dtype=float)),
        params=(gamma,),
    )


def kinetic_law(fbar: float = 1.0, c: float = 1.0) -> PressureLaw:
    """f = fbar + c |v|^2; velocity gradient 2c*v, parallel to v by design."""
    return PressureLaw(
        name="kinetic",
        f=lambda rho, vx, vy: fbar + c * (np.asarray(vx, dtype=float) ** 2 + np.asarray(vy, dtype=float) ** 2),
        grad_v=lambda rho, vx, vy: (2.0 * c * np.asarray(vx, dtype=float),
                                    2.0 * c * np.asarray(vy, dtype=float)),
        grad_rho=lambda rho, vx, vy: np.zeros_like(np.asarray(rho, dtype=float)),
        phi=None,
        params=(fbar, c),
    )


def affine_rho_law(fbar: float = 1.0, a: float = 0.5) -> PressureLaw:
    return PressureLaw(
        name="affine_rho",
        f=lambda rho, vx, vy: fbar + a * np.asarray(rho, dtype=float),
        grad_v=lambda rho, vx, vy: (np.zeros_like(np.asarray(vx, dtype=float)),
                                    np.zeros_like(np.asarray(vy, dtype=float))),
        grad_rho=lambda rho, vx, vy: np.full_like(np.asarray(rho, dtype=float), a),
        phi=lambda rho: fbar * np.asarray(rho, dtype=float) + 0.5 * a * np.asarray(rho, dtype=float) ** 2,
        params=(fbar, a),
    )


LAW_FACTORIES: dict[str, Callable[..., PressureLaw]] = {
    "constant": constant_law,
    "biofilm": biofilm_law,
    "kinetic": kinetic_law,
    "affine_rho": affine_rho_law,
}


def make_law(law_id: str, params: Sequence[float] = ()) -> PressureLaw:
    try:
        factory = LAW_FACTORIES[law_id]
    except KeyError:
        raise ValueError(f"unknown pressure law {law_id!r}; known: {sorted(LAW_FACTORIES)}") from None
    return factory(*params)


# ---------------------------------------------------------------------------
# symbol algebra


def advection_matrices(rho: float, v: Sequence[float], f_val: float, form: str = "full") -> list[np.ndarray]:
    """Point values of the (d+1)x(d+1) advection matrices A_j.

    ``form="full"`` corresponds to the conservative density equation
    (first row carries rho against the velocity divergence); ``"transport"``
    drops those entries, matching the pure transport density equation used
    once the velocity is divergence-free. Both have ``f`` down the first
    column and the advection speed v_j on the diagonal.
    """
    v = np.asarray(v, dtype=float)
    d = v.size
    mats = []
    for j in range(d):
        A = np.zeros((d + 1, d + 1))
        np.fill_diagonal(A, v[j])
        A[j + 1, 0] = f_val
        if form == "full":
            A[0, j + 1] = rho
        elif form != "transport":
            raise ValueError(f"unknown matrix form {form!r}")
        mats.append(A)
    return mats


def assemble_symbol(rho: float, v: Sequence[float], f_val: float, xi: Sequence[float]) -> np.ndarray:
    """Advection symbol sum_j A_j xi_j in the full (conservative) form.

    Entrywise: first row ``(v.xi, rho*xi_1, ..., rho*xi_d)``, first column
    below the diagonal ``f*xi_j``, diagonal ``v.xi``.
    """
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if v.shape != xi.shape:
        raise ValueError("v and xi must have the same dimension")
    if not np.linalg.norm(xi) > 0:
        raise ValueError("frequency xi must be nonzero")
    d = v.size
    vxi = float(v @ xi)
    A = np.zeros((d + 1, d + 1))
    np.fill_diagonal(A, vxi)
    A[0, 1:] = rho * xi
    A[1:, 0] = f_val * xi
    return A


def eigenvalues_closed_form(rho: float, v: Sequence[float], f_val: float, xi: Sequence[float]) -> np.ndarray:
    """Sorted spectrum of the advection symbol.

    ``v.xi`` with multiplicity d-1 plus the acoustic pair
    ``v.xi +/- sqrt(f*rho) |xi|``. Requires ``f*rho >= 0``; otherwise the
    spectrum is complex and hyperbolicity is lost.
    """
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if not np.linalg.norm(xi) > 0:
        raise ValueError("frequency xi must be nonzero")
    prod = f_val * rho
    if prod < 0:
        raise HyperbolicityLoss(
            f"f*rho = {prod:.6g} < 0: complex spectrum, hyperbolicity lost"
        )
    d = v.size
    vxi = float(v @ xi)
    c = float(np.sqrt(prod) * np.linalg.norm(xi))
    return np.sort(np.array([vxi - c] + [vxi] * (d - 1) + [vxi + c]))


def symmetrizer(rho: float, f_val: float, d: int = 2) -> np.ndarray:
    """Diagonal of the symmetrizer: ``(f/rho, 1, ..., 1)``.

    Positive definite iff f > 0 (rho must already be positive). Makes
    every product ``diag(...) @ A_j`` symmetric for the full matrices.
    """
    if not rho > 0:
        raise ValueError(f"symmetrizer undefined for rho = {rho}")
    return np.array([f_val / rho] + [1.0] * d)


# -- artificial-compressibility variant (extra pressure unknown) -------------
#
# State ordering (rho, p_tilde, v_1, ..., v_d): the advective parts carry
# the material speeds, the epsilon-singular parts are constant matrices
# coupling p_tilde with the velocity divergence (plane acoustic waves).


def acoustic_advection_matrices(rho: float, v: Sequence[float], f_val: float) -> list[np.ndarray]:
    v = np.asarray(v, dtype=float)
    d = v.size
    mats = []
    for j in range(d):
        A = np.zeros((d + 2, d + 2))
        A[0, 0] = v[j]
        A[0, 2 + j] = rho
        A[2 + j, 0] = f_val
        for i in range(d):
            A[2 + i, 2 + i] = v[j]
        mats.append(A)
    return mats


def acoustic_singular_matrices(d: int = 2) -> list[np.ndarray]:
    """Constant matrices multiplying 1/eps: p_tilde <-> div(v) coupling."""
    mats = []
    for j in range(d):
        A = np.zeros((d + 2, d + 2))
        A[1, 2 + j] = 1.0
        A[2 + j, 1] = 1.0
        mats.append(A)
    return mats


def acoustic_symmetrizer(rho: float, f_val: float, d: int = 2) -> np.ndarray:
    if not rho > 0:
        raise ValueError(f"symmetrizer undefined for rho = {rho}")
    return np.array([f_val / rho] + [1.0] * (d + 1))


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    """Verdicts for a coefficient law over a sample cloud.

    ``positive``: f > 0 everywhere sampled. ``gradient_parallel``: the
    velocity gradient of f is parallel to v wherever v != 0.
    ``alpha_nonnegative``: the fitted proportionality alpha = (grad_v.v)/|v|^2
    never dips below -1e-12. ``degenerate``: alpha vanished identically
    (constant-in-v laws); admissible but with a trivial coefficient.
    ``gradient_consistent``: analytic grad_v matched central differences.
    """

    positive: bool
    gradient_parallel: bool
    alpha_nonnegative: bool
    degenerate: bool
    gradient_consistent: bool
    min_f: float
    max_orthogonal_ratio: float
    min_alpha: float
    max_gradient_error: float

    @property
    def admissible(self) -> bool:
        return self.positive and self.gradient_parallel and self.alpha_nonnegative


def check_admissible(
    law: PressureLaw,
    samples: Iterable[tuple[float, Sequence[float]]],
    fd_step: float = 1e-6,
    fd_rtol: float = 1e-5,
) -> AdmissibilityReport:
    """Probe a law on (rho, v) samples for the structural conditions.

    The analytic velocity gradient is cross-checked against central finite
    differences of f; parallelism is measured by the orthogonal residual
    of grad_v against v relative to |grad_v|.
    """
    min_f = np.inf
    max_orth = 0.0
    min_alpha = np.inf
    max_fd_err = 0.0
    saw_moving_sample = False
    for rho, v in samples:
        if not rho > 0:
            raise ValueError("admissibility samples need rho > 0")
        vx, vy = float(v[0]), float(v[1])
        fval = float(law.f(rho, vx, vy))
        min_f = min(min_f, fval)
        gx, gy = (float(c) for c in law.grad_v(rho, vx, vy))
        # finite-difference cross-check of the analytic gradient
        fd_gx = (float(law.f(rho, vx + fd_step, vy)) - float(law.f(rho, vx - fd_step, vy))) / (2 * fd_step)
        fd_gy = (float(law.f(rho, vx, vy + fd_step)) - float(law.f(rho, vx, vy - fd_step))) / (2 * fd_step)
        scale = max(abs(gx), abs(gy), 1.0)
        max_fd_err = max(max_fd_err, abs(fd_gx - gx) / scale, abs(fd_gy - gy) / scale)
        v_sq = vx * vx + vy * vy
        if v_sq > 0:
            saw_moving_sample = True
            g_norm = float(np.hypot(gx, gy))
            alpha = (gx * vx + gy * vy) / v_sq
            min_alpha = min(min_alpha, alpha)
            if g_norm > 0:
                orth = float(np.hypot(gx - alpha * vx, gy - alpha * vy))
                max_orth = max(max_orth, orth / g_norm)
    if not saw_moving_sample:
        min_alpha = 0.0
    return AdmissibilityReport(
        positive=bool(min_f > 0),
        gradient_parallel=bool(max_orth <= 1e-8),
        alpha_nonnegative=bool(min_alpha >= -1e-12),
        degenerate=bool(abs(min_alpha) <= 1e-12 and max_orth <= 1e-8),
        gradient_consistent=bool(max_fd_err <= fd_rtol),
        min_f=float(min_f),
        max_orthogonal_ratio=float(max_orth),
        min_alpha=float(min_alpha),
        max_gradient_error=float(max_fd_err),
    )


# ---------------------------------------------------------------------------
# advection right-hand side and pressure recovery


def advective_rhs(state: State, law: PressureLaw) -> Tendency:
    """Transport-form tendency with no incompressible pressure and no penalty.

    d/dt rho_tilde = -v . grad(rho_tilde)
    d/dt v         = -(v . grad) v - f(rho, v) grad(rho_tilde)

    (grad rho == grad rho_tilde since the reference density is constant.)
    Every quadratic product is dealiased.
    """
    require_positive(state)
    g = state.grid
    vx, vy = state.v.x, state.v.y
    grad_rho = gradient(state.rho_tilde)
    grad_vx = gradient(state.v.components[0])
    grad_vy = gradient(state.v.components[1])
    f_vals = law.f_on_state(state)

    rho_dot = dealias_field(ScalarField(g, -(vx * grad_rho.x + vy * grad_rho.y)))
    vx_dot = dealias_field(ScalarField(g, -(vx * grad_vx.x + vy * grad_vx.y) - f_vals * grad_rho.x))
    vy_dot = dealias_field(ScalarField(g, -(vx * grad_vy.x + vy * grad_vy.y) - f_vals * grad_rho.y))
    return Tendency(rho_dot, VectorField(g, (vx_dot, vy_dot)))


def recover_pressure(state: State, law: PressureLaw, div_warn: float = 1e-6) -> ScalarField:
    """Zero-mean pressure from the elliptic balance of the velocity equation.

    Solves ``laplacian(P) = -div((v.grad)v) - div(f grad rho)`` spectrally.
    Meaningful for (approximately) divergence-free velocity; a warning is
    emitted when ||div v|| exceeds `div_warn`.
    """
    g = state.grid
    div_v = l2_norm(divergence(state.v))
    if div_v > div_warn:
        warnings.warn(
            f"pressure recovery on a velocity with ||div v|| = {div_v:.3e} > {div_warn:.1e}",
            stacklevel=2,
        )
    vx, vy = state.v.x, state.v.y
    grad_vx = gradient(state.v.components[0])
    grad_vy = gradient(state.v.components[1])
    adv = dealias_vector(VectorField.from_arrays(
        g,
        vx * grad_vx.x + vy * grad_vx.y,
        vx * grad_vy.x + vy * grad_vy.y,
    ))
    grad_rho = gradient(state.rho_tilde)
    f_vals = law.f_on_state(state)
    f_grad_rho = dealias_vector(VectorField.from_arrays(g, f_vals * grad_rho.x, f_vals * grad_rho.y))
    rhs = ScalarField(g, -(divergence(adv).values + divergence(f_grad_rho).values))
    return solve_poisson(rhs)

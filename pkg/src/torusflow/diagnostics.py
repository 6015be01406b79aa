"""Quantitative checks of the model's a-priori estimates on finished runs.

Everything here is read-only over `RunReport` objects (or drives pairs of
runs in lockstep and then reads them): empirical penalty constants,
epsilon-convergence distances, the weighted twin-separation growth that
mirrors the uniqueness estimate, energy-history exponents, and a
hyperbolicity scan of the advection symbol along a trajectory.

Fitted constants are empirical by construction; the theory only asserts
their existence, never a value, so they are reported and compared for
stability rather than against analytic targets.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .integrate import (
    Failure,
    RunReport,
    TimeControls,
    cfl_dt,
    make_stepper,
    prepare_initial_state,
    run_simulation,
)
from .model import (
    PressureLaw,
    State,
    assemble_symbol,
    constant_law,
    recover_pressure,
    require_positive,
)
from .schemes import SchemeConfig, SchemeKind
from .spectral import ScalarField, l2_norm

__all__ = [
    "RunReport",
    "Failure",
    "StudyReport",
    "SeparationReport",
    "OracleDistances",
    "HyperbolicityReport",
    "state_distance",
    "penalty_bound_check",
    "divergence_bound_check",
    "uniqueness_separation",
    "scheme_distance",
    "oracle_compare",
    "hyperbolicity_scan",
    "run_study",
    "fit_growth_exponent",
]


def state_distance(a: State, b: State) -> float:
    """Mean-square L2 distance of the (rho_tilde, v) blocks."""
    if a.grid != b.grid:
        raise ValueError("states live on different grids")
    d_rho = l2_norm(ScalarField(a.grid, a.rho_tilde.values - b.rho_tilde.values))
    d_vx = np.sqrt(np.mean((a.v.x - b.v.x) ** 2))
    d_vy = np.sqrt(np.mean((a.v.y - b.v.y) ** 2))
    return float(np.sqrt(d_rho**2 + d_vx**2 + d_vy**2))


def fit_growth_exponent(times: np.ndarray, values: np.ndarray) -> tuple[float, np.ndarray]:
    """Least-squares exponent c in ``values ~ values[0] * exp(c t)``.

    Returns the exponent and the residuals of ``log(values/values[0])``
    against the through-origin linear fit.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values[0] <= 0 or (values <= 0).any():
        raise ValueError("growth fit needs strictly positive values")
    y = np.log(values / values[0])
    denom = float(np.sum(times * times))
    c = float(np.sum(times * y) / denom) if denom > 0 else 0.0
    return c, y - c * times


# ---------------------------------------------------------------------------
# penalty and divergence constants


def penalty_bound_check(report: RunReport, eps: float) -> float:
    """Empirical constant ``max_t ||(I-P)v||_0 / eps`` of a penalty run."""
    if report.scheme is not SchemeKind.CONTINUOUS_PROJECTION:
        raise ValueError(
            f"penalty constant is defined for the penalty scheme, got {report.scheme.value!r}"
        )
    if report.penalty_norm.size == 0:
        raise ValueError("report carries no penalty history")
    return float(report.penalty_norm.max() / eps)


def divergence_bound_check(report: RunReport, eps: float) -> float:
    """Empirical constant ``max_t ||div v||_0 / eps`` of an acoustic run."""
    if report.scheme is not SchemeKind.ARTIFICIAL_COMPRESSIBILITY:
        raise ValueError(
            f"divergence constant is defined for the acoustic scheme, got {report.scheme.value!r}"
        )
    if report.div_norm.size == 0:
        raise ValueError("report carries no divergence history")
    return float(report.div_norm.max() / eps)


# ---------------------------------------------------------------------------
# twin-run separation (uniqueness estimate, Gronwall shape)


@dataclass(frozen=True)
class SeparationReport:
    """Weighted L2 separation of two runs from initially close states.

    ``separation`` is the norm induced by the diagonal weight
    ``(f/rho, 1, ..., 1)`` frozen at the *second* twin's state per
    snapshot. ``c_tilde`` is the exponent fitted on the early window;
    ``bound_ok`` says whether ``log W(t) - log W(0) <= c_tilde t + log 2``
    held over the whole horizon. ``slope``/``intercept``/``residuals``
    come from the full-horizon affine fit of the log separation (the
    intercept absorbs the initial alignment transient; the additive log 2
    headroom of the bound plays the same role on the estimate side).
    """

    times: np.ndarray
    separation: np.ndarray
    growth_factor: np.ndarray
    delta: float
    c_tilde: float
    bound_ok: bool
    slope: float
    intercept: float
    residuals: np.ndarray


def _weighted_separation(a: State, b: State, law: PressureLaw) -> float:
    w_rho = a.rho_tilde.values - b.rho_tilde.values
    w_vx = a.v.x - b.v.x
    w_vy = a.v.y - b.v.y
    weight = np.asarray(law.f(b.rho, b.v.x, b.v.y), dtype=float) / b.rho
    total = np.mean(weight * w_rho**2 + w_vx**2 + w_vy**2)
    if a.p_tilde is not None and b.p_tilde is not None:
        total += np.mean((a.p_tilde.values - b.p_tilde.values) ** 2)
    return float(np.sqrt(total))


def uniqueness_separation(
    initial: State,
    scheme: SchemeConfig,
    law: PressureLaw,
    controls: TimeControls,
    delta: float = 1e-6,
    fit_fraction: float = 0.1,
) -> SeparationReport:
    """Advance twin runs differing by a one-mode density perturbation.

    The twins share one fixed time step so they stay in lockstep. Raises
    if either twin fails before the horizon: the separation estimate only
    speaks about intervals where both solutions exist.
    """
    if delta < 0:
        raise ValueError("perturbation size must be nonnegative")
    X, _ = initial.grid.coords
    bump = delta * np.cos(2.0 * np.pi / initial.grid.length * X)
    perturbed = replace(
        initial, rho_tilde=ScalarField(initial.grid, initial.rho_tilde.values + bump)
    )

    s1 = prepare_initial_state(initial, scheme)
    s2 = prepare_initial_state(perturbed, scheme)
    require_positive(s1)
    require_positive(s2)
    step = make_stepper(scheme, law, controls.splitting)
    dt = controls.dt_override if controls.dt_override is not None else cfl_dt(s1, law, controls, eps=scheme.eps)

    times = [0.0]
    seps = [_weighted_separation(s1, s2, law)]
    t = 0.0
    while t < controls.t_final - 1e-14:
        h = min(dt, controls.t_final - t)
        try:
            s1 = step(s1, h)
            s2 = step(s2, h)
            require_positive(s1, time=t + h)
            require_positive(s2, time=t + h)
        except Exception as exc:
            raise RuntimeError(f"twin run failed at t={t:.6g}: {exc}") from exc
        t += h
        times.append(t)
        seps.append(_weighted_separation(s1, s2, law))

    times_arr = np.asarray(times)
    seps_arr = np.asarray(seps)
    if seps_arr[0] == 0.0:
        # identical twins stay identical; nothing to fit
        return SeparationReport(
            times=times_arr,
            separation=seps_arr,
            growth_factor=np.ones_like(seps_arr),
            delta=delta,
            c_tilde=0.0,
            bound_ok=bool(np.all(seps_arr == 0.0)),
            slope=0.0,
            intercept=0.0,
            residuals=np.zeros_like(seps_arr),
        )

    growth = seps_arr / seps_arr[0]
    log_growth = np.log(growth)
    # exponent from the early window, Gronwall-style
    n_fit = max(2, int(np.ceil(fit_fraction * len(times_arr))))
    c_tilde, _ = fit_growth_exponent(times_arr[:n_fit], seps_arr[:n_fit])
    bound_ok = bool(np.all(log_growth <= c_tilde * times_arr + np.log(2.0) + 1e-12))
    slope, intercept = np.polyfit(times_arr, log_growth, 1)
    residuals = log_growth - (slope * times_arr + intercept)
    return SeparationReport(
        times=times_arr,
        separation=seps_arr,
        growth_factor=growth,
        delta=delta,
        c_tilde=c_tilde,
        bound_ok=bound_ok,
        slope=float(slope),
        intercept=float(intercept),
        residuals=residuals,
    )


# ---------------------------------------------------------------------------
# cross-scheme distances and the epsilon study


@dataclass(frozen=True)
class StudyReport:
    """Epsilon sweep of one scheme against a sharply-resolved reference.

    All runs share the grid, law, controls and initial data; only eps
    varies. ``distances`` are final-time L2 distances to the reference,
    ``fitted_rate`` the log-log slope of distance against eps (reported,
    never asserted: no convergence rate is guaranteed, only convergence).
    """

    scheme: SchemeKind
    eps_values: tuple[float, ...]
    runs: tuple[RunReport, ...]
    reference: RunReport
    distances: tuple[float, ...]
    penalty_constants: tuple[float, ...] | None
    divergence_constants: tuple[float, ...] | None
    fitted_rate: float | None
    common_time: float


def _state_at_time(report: RunReport, t: float) -> State:
    if abs(report.final_time - t) <= 1e-12:
        return report.final_state
    if report.states is None:
        raise ValueError(
            f"run has no stored snapshots; cannot compare at truncated time {t:.6g}"
        )
    idx = int(np.argmin(np.abs(report.times - t)))
    return report.states[idx]


def scheme_distance(study_runs: Sequence[RunReport], reference: RunReport) -> tuple[tuple[float, ...], float]:
    """Final-common-time L2 distances of each run to the reference.

    Horizons are truncated to the minimum successful time across all runs
    (with a warning); grids must agree.
    """
    for r in study_runs:
        if r.final_state.grid != reference.final_state.grid:
            raise ValueError("study runs and reference use different grids")
    t_common = min([r.final_time for r in study_runs] + [reference.final_time])
    horizons = {round(r.final_time, 12) for r in study_runs} | {round(reference.final_time, 12)}
    if len(horizons) > 1:
        warnings.warn(
            f"runs reached different horizons; comparing at t={t_common:.6g}", stacklevel=2
        )
    ref_state = _state_at_time(reference, t_common)
    dists = tuple(state_distance(_state_at_time(r, t_common), ref_state) for r in study_runs)
    return dists, t_common


def run_study(
    initial: State,
    scheme_kind: SchemeKind,
    eps_values: Sequence[float],
    law: PressureLaw,
    controls: TimeControls,
    reference_eps: float = 1e-3,
    hs_index: float = 3.0,
    v0_1=None,
    p_tilde_0: ScalarField | None = None,
    snapshot_every: int = 1,
) -> StudyReport:
    """Sweep eps for the penalty or acoustic scheme against a projected reference.

    The reference is the projected scheme at mollification ``reference_eps``
    (sharp enough to stand in for the constrained dynamics). Penalty or
    divergence constants are collected according to the swept scheme.
    """
    if scheme_kind not in (SchemeKind.CONTINUOUS_PROJECTION, SchemeKind.ARTIFICIAL_COMPRESSIBILITY):
        raise ValueError("studies sweep the penalty or acoustic scheme")
    eps_values = tuple(float(e) for e in eps_values)
    if any(e <= 0 for e in eps_values):
        raise ValueError("eps values must be positive")

    ref_cfg = SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=reference_eps)
    reference = run_simulation(
        initial, ref_cfg, law, controls, hs_index=hs_index, snapshot_every=snapshot_every, keep_states=True
    )

    runs = []
    for eps in eps_values:
        cfg = SchemeConfig(kind=scheme_kind, eps=eps, v0_1=v0_1, p_tilde_0=p_tilde_0)
        runs.append(
            run_simulation(
                initial, cfg, law, controls, hs_index=hs_index, snapshot_every=snapshot_every, keep_states=True
            )
        )

    distances, t_common = scheme_distance(runs, reference)
    penalty_constants = None
    divergence_constants = None
    if scheme_kind is SchemeKind.CONTINUOUS_PROJECTION:
        penalty_constants = tuple(penalty_bound_check(r, e) for r, e in zip(runs, eps_values))
    else:
        divergence_constants = tuple(divergence_bound_check(r, e) for r, e in zip(runs, eps_values))

    fitted_rate = None
    if all(d > 0 for d in distances) and len(distances) >= 2:
        fitted_rate = float(np.polyfit(np.log(eps_values), np.log(distances), 1)[0])

    return StudyReport(
        scheme=scheme_kind,
        eps_values=eps_values,
        runs=tuple(runs),
        reference=reference,
        distances=distances,
        penalty_constants=penalty_constants,
        divergence_constants=divergence_constants,
        fitted_rate=fitted_rate,
        common_time=t_common,
    )


# ---------------------------------------------------------------------------
# oracle comparison


@dataclass(frozen=True)
class OracleDistances:
    v_distance: float
    rho_distance: float
    pressure_distance: float

    def max(self) -> float:
        return max(self.v_distance, self.rho_distance, self.pressure_distance)


def oracle_compare(general_run: RunReport, oracle_run: RunReport) -> OracleDistances:
    """Relative final-time differences between a projected-scheme run and
    the exactly-solvable reduction of the same problem.

    Velocity and density fluctuation are compared directly; the pressure of
    the general run is compared against the reduced pressure minus the
    density potential, both mean-normalized.
    """
    law = general_run.law
    if not law.reducible:
        raise ValueError(f"law {law.name!r} is not reducible; no oracle comparison possible")
    if general_run.scheme is not SchemeKind.MOLLIFIED_PROJECTED:
        raise ValueError("the general run must use the projected scheme")
    if oracle_run.scheme is not SchemeKind.REDUCTION_ORACLE:
        raise ValueError("the oracle run must use the reduction dynamics")
    a, b = general_run.final_state, oracle_run.final_state
    if a.grid != b.grid:
        raise ValueError("runs use different grids")
    if abs(general_run.final_time - oracle_run.final_time) > 1e-12:
        raise ValueError("runs reached different final times")

    tiny = 1e-300
    v_ref = np.sqrt(np.mean(b.v.x**2 + b.v.y**2))
    v_dist = np.sqrt(np.mean((a.v.x - b.v.x) ** 2 + (a.v.y - b.v.y) ** 2)) / max(v_ref, tiny)
    rho_ref = l2_norm(b.rho_tilde)
    rho_dist = l2_norm(ScalarField(a.grid, a.rho_tilde.values - b.rho_tilde.values)) / max(rho_ref, tiny)

    pressure = recover_pressure(a, law)
    zero_law = constant_law(0.0)
    reduced_pressure = recover_pressure(b, zero_law)
    potential = law.phi(b.rho)
    potential = potential - potential.mean()
    equivalent = ScalarField(b.grid, reduced_pressure.values - potential)
    p_ref = l2_norm(equivalent)
    p_dist = l2_norm(ScalarField(a.grid, pressure.values - equivalent.values)) / max(p_ref, tiny)
    return OracleDistances(float(v_dist), float(rho_dist), float(p_dist))


# ---------------------------------------------------------------------------
# hyperbolicity scan


@dataclass(frozen=True)
class HyperbolicityReport:
    """Worst-case symbol spectrum data over sampled nodes and directions."""

    min_f: float
    min_f_over_rho: float
    max_imag_eigenvalue: float
    middle_multiplicity: int
    multiplicity_ok: bool
    loss_detected: bool
    loss_note: str


def hyperbolicity_scan(
    trajectory: State | Sequence[State],
    law: PressureLaw,
    n_samples: int = 200,
    seed: int = 0,
) -> HyperbolicityReport:
    """Sample nodes and directions along a trajectory; inspect the symbol.

    Reports the extremes of f and f/rho, the largest imaginary part of the
    numerically computed spectrum (nonzero exactly when f*rho < 0
    somewhere) and the geometric multiplicity of the advection eigenvalue
    ``v.xi`` (d-1 for a healthy symbol). Never raises: diagnosis only.
    """
    states = [trajectory] if isinstance(trajectory, State) else list(trajectory)
    if not states:
        raise ValueError("empty trajectory")
    rng = np.random.default_rng(seed)
    n = states[0].grid.n
    min_f = np.inf
    min_f_over_rho = np.inf
    max_imag = 0.0
    worst_mult = 1
    mult_ok = True
    loss_detected = False
    loss_note = ""
    d = 2
    for _ in range(n_samples):
        s = states[rng.integers(len(states))]
        i, j = rng.integers(n), rng.integers(n)
        rho = float(s.rho[i, j])
        vx, vy = float(s.v.x[i, j]), float(s.v.y[i, j])
        fval = float(law.f(rho, vx, vy))
        min_f = min(min_f, fval)
        if rho > 0:
            min_f_over_rho = min(min_f_over_rho, fval / rho)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        xi = np.array([np.cos(angle), np.sin(angle)])
        A = assemble_symbol(rho, np.array([vx, vy]), fval, xi)
        eigs = np.linalg.eigvals(A)
        imag = float(np.abs(eigs.imag).max())
        max_imag = max(max_imag, imag)
        if fval * rho <= 0 and not loss_detected:
            loss_detected = True
            loss_note = (
                f"f*rho = {fval * rho:.3e} at node ({i},{j}) with rho={rho:.4g}, f={fval:.4g}"
            )
        if fval * rho > 0:
            # geometric multiplicity of the middle eigenvalue v.xi
            vxi = vx * xi[0] + vy * xi[1]
            sing = np.linalg.svd(A - vxi * np.eye(d + 1), compute_uv=False)
            scale = max(sing.max(), 1.0)
            mult = int(np.sum(sing < 1e-8 * scale))
            if mult != d - 1:
                mult_ok = False
                worst_mult = mult
            elif mult_ok:
                worst_mult = mult
    return HyperbolicityReport(
        min_f=float(min_f),
        min_f_over_rho=float(min_f_over_rho),
        max_imag_eigenvalue=float(max_imag),
        middle_multiplicity=worst_mult,
        multiplicity_ok=mult_ok,
        loss_detected=loss_detected,
        loss_note=loss_note,
    )

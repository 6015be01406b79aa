"""Command-line front end: run, study, symbol, oracle.

Exit codes: 0 on success, 1 on configuration/usage errors, 2 on physical
failure (positivity loss, blowup, or an oracle distance above threshold).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .diagnostics import oracle_compare, run_study
from .errors import ConfigError, HyperbolicityLoss
from .integrate import cfl_dt, run_simulation
from .io import load_config, write_diagnostics_csv, write_field_dump, write_study_csv
from .model import assemble_symbol, eigenvalues_closed_form, symmetrizer
from .schemes import SchemeConfig, SchemeKind

ORACLE_THRESHOLD = 1e-5
# mollification small enough that the projected run tracks the exact
# reduction to rounding over desk-scale horizons
ORACLE_DEFAULT_EPS = 1e-8


def _parse_pair(text: str, name: str) -> np.ndarray:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{name} expects two comma-separated numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"{name} expects numbers, got {text!r}") from None


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.override)
    grid = cfg.build_grid()
    law = cfg.build_law()
    scheme = cfg.build_scheme(grid)
    controls = cfg.build_controls()
    initial = cfg.build_initial(grid)

    report = run_simulation(
        initial, scheme, law, controls, snapshot_every=cfg.output_every_steps
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_diagnostics_csv(report, out / "diagnostics.csv")
    if cfg.output_fields:
        write_field_dump(report.final_state, out / "final_state.cifd", time=report.final_time)
    if report.failure is not None:
        print(
            f"run failed: {report.failure.kind} at t={report.failure.time:.6g} "
            f"(diagnostics in {out / 'diagnostics.csv'})"
        )
        return 2
    print(
        f"run complete: t={report.final_time:.6g}, "
        f"hs_norm={report.hs_norm[-1]:.6g}, min_rho={report.min_rho[-1]:.6g} "
        f"-> {out / 'diagnostics.csv'}"
    )
    return 0


def cmd_study(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.override)
    if cfg.scheme_kind not in (SchemeKind.CONTINUOUS_PROJECTION, SchemeKind.ARTIFICIAL_COMPRESSIBILITY):
        raise ConfigError("study sweeps scheme.kind = 'b' or 'c'")
    eps_list = cfg.study_eps_list
    if args.eps_list:
        eps_list = tuple(float(p) for p in args.eps_list.split(","))
        if any(e <= 0 for e in eps_list):
            raise ConfigError("--eps-list values must be positive")
    grid = cfg.build_grid()
    law = cfg.build_law()
    controls = cfg.build_controls()
    initial = cfg.build_initial(grid)
    scheme = cfg.build_scheme(grid)

    study = run_study(
        initial,
        cfg.scheme_kind,
        eps_list,
        law,
        controls,
        reference_eps=cfg.study_ref_eps,
        v0_1=scheme.v0_1,
        p_tilde_0=scheme.p_tilde_0,
        snapshot_every=cfg.output_every_steps,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_study_csv(study, out / "study.csv")
    write_diagnostics_csv(study.reference, out / "reference.csv")

    constants = study.penalty_constants or study.divergence_constants
    print(f"eps sweep of scheme {cfg.scheme_kind.value!r} vs projected reference "
          f"(eps_ref={cfg.study_ref_eps:g}), compared at t={study.common_time:.6g}")
    for eps, dist, c in zip(study.eps_values, study.distances, constants):
        print(f"  eps={eps:<8g} distance={dist:.6e} bound_constant={c:.6e}")
    if study.fitted_rate is not None:
        print(f"  fitted rate: distance ~ eps^{study.fitted_rate:.3f}")
    print(f"-> {out / 'study.csv'}")
    return 2 if any(not r.completed for r in study.runs) else 0


def cmd_symbol(args: argparse.Namespace) -> int:
    v = _parse_pair(args.v, "--v")
    xi = _parse_pair(args.xi, "--xi")
    rho, f_val = args.rho, args.f
    if not np.linalg.norm(xi) > 0:
        raise ConfigError("--xi must be nonzero")
    A = assemble_symbol(rho, v, f_val, xi)
    numerical = np.sort_complex(np.linalg.eigvals(A))
    print(f"symbol at rho={rho:g}, v=({v[0]:g}, {v[1]:g}), f={f_val:g}, xi=({xi[0]:g}, {xi[1]:g})")
    print("matrix:")
    for row in A:
        print("  [" + ", ".join(f"{x: .6g}" for x in row) + "]")
    try:
        closed = eigenvalues_closed_form(rho, v, f_val, xi)
        print("closed-form eigenvalues: " + ", ".join(f"{x:.12g}" for x in closed))
    except HyperbolicityLoss as exc:
        print(f"closed-form eigenvalues: undefined ({exc})")
    print("numerical eigenvalues:   " + ", ".join(f"{x:.12g}" for x in numerical))
    if rho > 0:
        diag = symmetrizer(rho, f_val, d=2)
        pd = " (positive definite)" if (diag > 0).all() else " (NOT positive definite)"
        print("symmetrizer diag:        " + ", ".join(f"{x:.12g}" for x in diag) + pd)
    else:
        print("symmetrizer diag:        undefined for rho <= 0")
    max_imag = float(np.abs(numerical.imag).max())
    if f_val * rho > 0 and max_imag <= 1e-10:
        print("hyperbolicity: OK (real spectrum, f*rho > 0)")
    else:
        print(f"hyperbolicity: LOST (f*rho = {f_val * rho:g}, max |Im lambda| = {max_imag:.3e})")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.override)
    law = cfg.build_law()
    if not law.reducible:
        raise ConfigError(
            f"law.id = {cfg.law_id!r} is not reducible; the oracle check needs f = f(rho)"
        )
    grid = cfg.build_grid()
    initial = cfg.build_initial(grid)
    controls = cfg.build_controls()
    if controls.dt_override is None:
        # one shared step so the two integrations are dt-matched
        dt = cfl_dt(initial, law, controls)
        controls = replace(controls, dt_override=dt)
    eps = cfg.scheme_eps if "scheme.eps" in cfg.provided else ORACLE_DEFAULT_EPS
    general_cfg = SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=eps, mollifier=cfg.mollifier)
    oracle_cfg = SchemeConfig(kind=SchemeKind.REDUCTION_ORACLE)

    general = run_simulation(initial, general_cfg, law, controls)
    oracle = run_simulation(initial, oracle_cfg, law, controls)
    if general.failure is not None or oracle.failure is not None:
        print("oracle check aborted: a run failed before the horizon")
        return 2
    dist = oracle_compare(general, oracle)
    print(f"oracle comparison at t={general.final_time:.6g} (eps={eps:g}, dt={controls.dt_override:.6g}):")
    print(f"  velocity relative L2 distance: {dist.v_distance:.6e}")
    print(f"  density  relative L2 distance: {dist.rho_distance:.6e}")
    print(f"  pressure relative L2 distance: {dist.pressure_distance:.6e}")
    if dist.max() > ORACLE_THRESHOLD:
        print(f"FAIL: a distance exceeds {ORACLE_THRESHOLD:g}")
        return 2
    print(f"OK: all distances within {ORACLE_THRESHOLD:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusflow",
        description="Pseudo-spectral solvers for a density-coupled incompressible flow model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one simulation from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_run.set_defaults(func=cmd_run)

    p_study = sub.add_parser("study", help="epsilon sweep with convergence diagnostics")
    p_study.add_argument("--config", required=True)
    p_study.add_argument("--eps-list", default=None, help="comma-separated eps values")
    p_study.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_study.set_defaults(func=cmd_study)

    p_sym = sub.add_parser("symbol", help="eigenstructure of the advection symbol at a point")
    p_sym.add_argument("--rho", type=float, required=True)
    p_sym.add_argument("--v", required=True, metavar="VX,VY")
    p_sym.add_argument("--f", type=float, required=True)
    p_sym.add_argument("--xi", required=True, metavar="X,Y")
    p_sym.set_defaults(func=cmd_symbol)

    p_orc = sub.add_parser("oracle", help="projected scheme vs the exact reduction")
    p_orc.add_argument("--config", required=True)
    p_orc.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_orc.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

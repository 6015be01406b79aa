"""Time stepping: CFL control, RK4, exact stiff substeps, run orchestration."""

import numpy as np
import pytest

from torusflow.integrate import (
    Splitting,
    TimeControls,
    cfl_dt,
    rk4_step,
    run_simulation,
    stiff_exact_substep,
)
from torusflow.errors import NumericalBlowup
from torusflow.model import State, Tendency, constant_law, kinetic_law
from torusflow.presets import initial_state
from torusflow.schemes import AcousticPair, ProjectionPenalty, SchemeConfig, SchemeKind
from torusflow.spectral import (
    Grid,
    ScalarField,
    VectorField,
    l2_norm,
    leray_project,
)


@pytest.fixture
def grid():
    return Grid(64)


def quiet_state(grid, rho_bar=1.0):
    return State(ScalarField(grid, np.zeros((grid.n, grid.n))), VectorField.zero(grid), rho_bar)


class TestTimeControls:
    def test_validation(self):
        with pytest.raises(ValueError):
            TimeControls(t_final=-1.0)
        with pytest.raises(ValueError):
            TimeControls(t_final=1.0, cfl=0.0)
        with pytest.raises(ValueError):
            TimeControls(t_final=1.0, cfl=1.5)
        with pytest.raises(ValueError):
            TimeControls(t_final=1.0, dt_override=0.0)
        TimeControls(t_final=0.0)  # degenerate horizon is allowed


class TestCflDt:
    def test_unit_speed(self, grid):
        s = quiet_state(grid)  # f*rho = 1 with the unit constant law
        dt = cfl_dt(s, constant_law(1.0), TimeControls(t_final=1.0, cfl=0.4))
        assert abs(dt - 0.4 * 2 * np.pi / 64) < 1e-15

    def test_speed_scaling(self, grid):
        s = quiet_state(grid)
        dt1 = cfl_dt(s, constant_law(1.0), TimeControls(t_final=1.0))
        dt2 = cfl_dt(s, constant_law(4.0), TimeControls(t_final=1.0))
        assert abs(dt1 / dt2 - 2.0) < 1e-12  # speed doubles, dt halves

    def test_override_returned_verbatim_with_warning(self, grid):
        s = quiet_state(grid)
        ctl = TimeControls(t_final=1.0, dt_override=10.0)
        with pytest.warns(UserWarning, match="exceeds"):
            dt = cfl_dt(s, constant_law(1.0), ctl)
        assert dt == 10.0
        small = TimeControls(t_final=1.0, dt_override=1e-4)
        assert cfl_dt(s, constant_law(1.0), small) == 1e-4

    def test_eps_cap_without_exact_splitting(self, grid):
        s = quiet_state(grid)
        ctl = TimeControls(t_final=1.0, cfl=0.4)
        free = cfl_dt(s, constant_law(1.0), ctl, eps=1e-3, stiff_exact=True)
        capped = cfl_dt(s, constant_law(1.0), ctl, eps=1e-3, stiff_exact=False)
        assert free == 0.4 * grid.spacing
        assert abs(capped - 0.4 * 1e-3 * grid.spacing) < 1e-18


class TestRk4:
    def test_zero_rhs_is_identity(self, grid):
        s = initial_state(grid, "taylor_green", 0.1)
        out = rk4_step(s, lambda u: Tendency(
            ScalarField(grid, np.zeros((64, 64))), VectorField.zero(grid)), 0.3)
        np.testing.assert_array_equal(out.rho_tilde.values, s.rho_tilde.values)
        np.testing.assert_array_equal(out.v.x, s.v.x)

    def test_linear_decay_matches_rk4_polynomial(self, grid):
        # u' = -u over one step dt = 0.1: the classical stage polynomial
        # 1 + h + h^2/2 + h^3/6 + h^4/24 at h = -0.1, which sits within
        # |h|^5/120 of exp(-0.1) = 0.904837418...
        s = State(ScalarField(grid, np.full((64, 64), 1.0)), VectorField.zero(grid), 2.0)

        def rhs(u):
            return Tendency(ScalarField(grid, -u.rho_tilde.values), VectorField.zero(grid))

        out = rk4_step(s, rhs, 0.1)
        h = -0.1
        polynomial = 1 + h + h**2 / 2 + h**3 / 6 + h**4 / 24
        np.testing.assert_allclose(out.rho_tilde.values, polynomial, rtol=1e-14)
        assert abs(polynomial - np.exp(-0.1)) < 1e-7  # O(dt^5) truncation

    def test_quadratic_forcing_integrated_exactly(self, grid):
        # u' = 3 t^2 from u(0) = 0 over [0, dt]: RK4 reduces to Simpson's
        # rule in t, exact for this integrand; a velocity slot carries t
        dt = 0.37

        def rhs(u):
            return Tendency(
                ScalarField(grid, 3.0 * u.v.x**2),
                VectorField.from_arrays(grid, np.ones((64, 64)), np.zeros((64, 64))),
            )

        s = State(ScalarField(grid, np.zeros((64, 64))), VectorField.zero(grid), 1.0)
        out = rk4_step(s, rhs, dt)
        np.testing.assert_allclose(out.rho_tilde.values, dt**3, rtol=1e-13)

    def test_nan_raises_blowup(self, grid):
        def rhs(u):
            return Tendency(ScalarField(grid, np.full((64, 64), np.nan)), VectorField.zero(grid))

        s = quiet_state(grid)
        with pytest.raises(NumericalBlowup) as info:
            rk4_step(s, rhs, 0.1)
        assert info.value.state is s  # the last finite snapshot rides along


class TestStiffSubsteps:
    def test_projection_penalty_fixes_divergence_free(self, grid):
        _, Y = grid.coords
        v = VectorField.from_arrays(grid, np.sin(Y), np.zeros((64, 64)))
        s = State(ScalarField(grid, np.zeros((64, 64))), v, 1.0)
        out = stiff_exact_substep(s, ProjectionPenalty(0.05), 0.3)
        np.testing.assert_allclose(out.v.x, v.x, atol=1e-12)

    def test_projection_penalty_decays_gradient(self, grid):
        X, _ = grid.coords
        v = VectorField.from_arrays(grid, np.cos(X), np.zeros((64, 64)))
        s = State(ScalarField(grid, np.zeros((64, 64))), v, 1.0)
        out = stiff_exact_substep(s, ProjectionPenalty(0.1), 0.1)
        np.testing.assert_allclose(out.v.x, np.exp(-1.0) * np.cos(X), atol=1e-13)

    def test_penalty_never_increases_gradient_part(self, grid):
        rng = np.random.default_rng(0)
        for _ in range(5):
            v = VectorField.from_arrays(grid, rng.standard_normal((64, 64)), rng.standard_normal((64, 64)))
            s = State(ScalarField(grid, np.zeros((64, 64))), v, 1.0)
            before = l2_norm(VectorField.from_arrays(grid, v.x - leray_project(v).x, v.y - leray_project(v).y))
            out = stiff_exact_substep(s, ProjectionPenalty(0.2), 0.05)
            pv = leray_project(out.v)
            after = l2_norm(VectorField.from_arrays(grid, out.v.x - pv.x, out.v.y - pv.y))
            assert after <= before * (1 + 1e-12)
            np.testing.assert_allclose(after, before * np.exp(-0.05 / 0.2), rtol=1e-10)

    def test_acoustic_full_period_returns(self, grid):
        X, _ = grid.coords
        s = State(
            ScalarField(grid, np.zeros((64, 64))),
            VectorField.zero(grid),
            1.0,
            p_tilde=ScalarField(grid, np.sin(X)),
        )
        eps = 0.5
        out = stiff_exact_substep(s, AcousticPair(eps), 2 * np.pi * eps)  # |k| = 1
        assert np.abs(out.p_tilde.values - np.sin(X)).max() <= 1e-10
        assert np.abs(out.v.x).max() <= 1e-10

    def test_acoustic_conserves_wave_energy(self, grid):
        rng = np.random.default_rng(1)
        p = ScalarField(grid, rng.standard_normal((64, 64)))
        v = VectorField.from_arrays(grid, rng.standard_normal((64, 64)), rng.standard_normal((64, 64)))
        s = State(ScalarField(grid, np.zeros((64, 64))), v, 1.0, p_tilde=p)
        out = stiff_exact_substep(s, AcousticPair(0.3), 0.17)
        before = l2_norm(p) ** 2 + l2_norm(v) ** 2
        after = l2_norm(out.p_tilde) ** 2 + l2_norm(out.v) ** 2
        np.testing.assert_allclose(after, before, rtol=1e-12)

    def test_acoustic_leaves_solenoidal_part_alone(self, grid):
        _, Y = grid.coords
        v = VectorField.from_arrays(grid, np.sin(Y), np.zeros((64, 64)))
        s = State(ScalarField(grid, np.zeros((64, 64))), v, 1.0,
                  p_tilde=ScalarField(grid, np.zeros((64, 64))))
        out = stiff_exact_substep(s, AcousticPair(0.1), 0.3)
        np.testing.assert_allclose(out.v.x, v.x, atol=1e-12)
        assert np.abs(out.p_tilde.values).max() <= 1e-12

    def test_none_descriptor_is_identity(self, grid):
        s = initial_state(grid, "taylor_green", 0.1)
        out = stiff_exact_substep(s, None, 0.5)
        assert out is s

    def test_unknown_descriptor_rejected(self, grid):
        s = quiet_state(grid)
        with pytest.raises(ValueError, match="descriptor"):
            stiff_exact_substep(s, object(), 0.1)


class TestRunSimulation:
    def test_zero_horizon_single_snapshot(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        rep = run_simulation(init, SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=0.1),
                             kinetic_law(), TimeControls(t_final=0.0))
        assert rep.times.size == 1 and rep.times[0] == 0.0
        np.testing.assert_array_equal(rep.final_state.rho_tilde.values, init.rho_tilde.values)

    @pytest.mark.parametrize("kind,eps,law", [
        (SchemeKind.MOLLIFIED_PROJECTED, 0.1, kinetic_law()),
        (SchemeKind.CONTINUOUS_PROJECTION, 0.1, kinetic_law()),
        (SchemeKind.ARTIFICIAL_COMPRESSIBILITY, 0.1, kinetic_law()),
        (SchemeKind.REDUCTION_ORACLE, None, constant_law(1.0)),
    ])
    def test_constant_state_is_fixed_point(self, grid, kind, eps, law):
        init = State(
            ScalarField(grid, np.zeros((64, 64))),
            VectorField.from_arrays(grid, np.full((64, 64), 0.3), np.full((64, 64), -0.1)),
            1.0,
        )
        rep = run_simulation(init, SchemeConfig(kind=kind, eps=eps), law, TimeControls(t_final=1.0))
        assert rep.failure is None
        assert np.abs(rep.final_state.rho_tilde.values).max() <= 1e-12
        assert np.abs(rep.final_state.v.x - 0.3).max() <= 1e-12

    def test_strang_with_zero_stiff_equals_plain_rk4(self, grid):
        # stepping the penalty scheme by hand with a disabled stiff part
        # must reproduce the raw RK4 step bit for bit
        from torusflow.schemes import rhs_scheme_b

        init = initial_state(grid, "taylor_green", 0.1)
        law = kinetic_law()

        def rhs(s):
            t, _ = rhs_scheme_b(s, law, 0.1)
            return t

        direct = rk4_step(init, rhs, 0.01)
        split = stiff_exact_substep(rk4_step(stiff_exact_substep(init, None, 0.005), rhs, 0.01), None, 0.005)
        np.testing.assert_array_equal(direct.v.x, split.v.x)
        np.testing.assert_array_equal(direct.rho_tilde.values, split.rho_tilde.values)

    def test_benchmark_penalty_run_divergence_level(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        eps = 0.1
        rep = run_simulation(init, SchemeConfig(kind=SchemeKind.CONTINUOUS_PROJECTION, eps=eps),
                             kinetic_law(), TimeControls(t_final=0.5))
        assert rep.failure is None
        assert rep.div_norm.max() <= 10 * eps  # O(eps) constraint violation
        assert (np.diff(rep.times) > 0).all()
        assert (rep.min_rho > 0).all()

    def test_lie_splitting_runs(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        rep = run_simulation(
            init,
            SchemeConfig(kind=SchemeKind.CONTINUOUS_PROJECTION, eps=0.1),
            kinetic_law(),
            TimeControls(t_final=0.1, splitting=Splitting.LIE),
        )
        assert rep.failure is None

    def test_blowup_recorded_not_raised(self, grid):
        init = initial_state(grid, "taylor_green", 0.3)
        # a grotesquely large forced step makes RK4 diverge
        rep = run_simulation(
            init,
            SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=0.05),
            kinetic_law(1.0, 5.0),
            TimeControls(t_final=10.0, dt_override=5.0),
        )
        assert rep.failure is not None
        assert rep.failure.kind in ("blowup", "positivity")
        assert rep.final_time <= rep.failure.time + 1e-12
        assert (rep.min_rho > 0).all()  # recorded snapshots are all valid

    def test_p_tilde_forbidden_outside_acoustic_scheme(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        s = State(init.rho_tilde, init.v, init.rho_bar, p_tilde=ScalarField(grid, np.zeros((64, 64))))
        with pytest.raises(ValueError, match="p_tilde"):
            run_simulation(s, SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=0.1),
                           kinetic_law(), TimeControls(t_final=0.1))

    def test_oracle_requires_reducible_law(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        with pytest.raises(ValueError, match="reduc"):
            run_simulation(init, SchemeConfig(kind=SchemeKind.REDUCTION_ORACLE), kinetic_law(),
                           TimeControls(t_final=0.1))

    def test_deterministic_repeat(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        cfg = SchemeConfig(kind=SchemeKind.CONTINUOUS_PROJECTION, eps=0.1)
        ctl = TimeControls(t_final=0.2)
        a = run_simulation(init, cfg, kinetic_law(), ctl)
        b = run_simulation(init, cfg, kinetic_law(), ctl)
        np.testing.assert_array_equal(a.hs_norm, b.hs_norm)
        np.testing.assert_array_equal(a.final_state.v.x, b.final_state.v.x)

    def test_snapshot_cadence(self, grid):
        init = initial_state(grid, "taylor_green", 0.1)
        rep = run_simulation(init, SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=0.1),
                             kinetic_law(), TimeControls(t_final=0.2), snapshot_every=5)
        assert rep.times.size < 10
        assert rep.times[-1] == rep.final_time


class TestTemporalOrder:
    def test_self_convergence_order(self):
        from torusflow.diagnostics import state_distance

        grid = Grid(32)
        init = initial_state(grid, "taylor_green", 0.1)
        law = kinetic_law()
        cfg = SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=0.05)
        dt0 = cfl_dt(init, law, TimeControls(t_final=0.1))
        finals = []
        for k in range(3):
            ctl = TimeControls(t_final=0.1, dt_override=dt0 / 2**k)
            finals.append(run_simulation(init, cfg, law, ctl).final_state)
        d1 = state_distance(finals[0], finals[1])
        d2 = state_distance(finals[1], finals[2])
        assert np.log2(d1 / d2) >= 3.5

"""Config parsing, binary field dumps, diagnostics CSV."""

import struct

import numpy as np
import pytest

from torusflow.errors import ConfigError, FormatError, UnsupportedVersion
from torusflow.integrate import TimeControls, run_simulation
from torusflow.io import (
    DUMP_VERSION,
    MAGIC,
    parse_config,
    read_diagnostics_csv,
    read_field_dump,
    write_diagnostics_csv,
    write_field_dump,
)
from torusflow.model import State, constant_law
from torusflow.presets import initial_state
from torusflow.schemes import SchemeConfig, SchemeKind
from torusflow.spectral import Grid, MollifierKind, ScalarField, VectorField

MINIMAL = "grid.n = 64\nscheme.kind = a\nlaw.id = constant\ntime.t_final = 0.5\n"


class TestParseConfig:
    def test_minimal_with_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.grid_n == 64
        assert cfg.scheme_kind is SchemeKind.MOLLIFIED_PROJECTED
        assert cfg.scheme_eps == 0.05  # smoothing default for the projected scheme
        assert cfg.mollifier is MollifierKind.GAUSSIAN_MULTIPLIER
        assert cfg.cfl == 0.4
        assert cfg.init_preset == "taylor_green"
        assert cfg.study_eps_list == (0.2, 0.1, 0.05, 0.025)

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# header\n\n" + MINIMAL + "   # trailing\n")
        assert cfg.t_final == 0.5

    def test_odd_n_rejected(self):
        with pytest.raises(ConfigError, match="even"):
            parse_config(MINIMAL.replace("grid.n = 64", "grid.n = 63"))

    def test_penalty_scheme_requires_eps(self):
        with pytest.raises(ConfigError, match="scheme.eps"):
            parse_config(MINIMAL.replace("scheme.kind = a", "scheme.kind = b"))
        with pytest.raises(ConfigError, match="scheme.eps"):
            parse_config(MINIMAL.replace("scheme.kind = a", "scheme.kind = c"))
        # explicit eps satisfies it
        cfg = parse_config(MINIMAL.replace("scheme.kind = a", "scheme.kind = b") + "scheme.eps = 0.1\n")
        assert cfg.scheme_eps == 0.1

    def test_unknown_key_named_with_line(self):
        with pytest.raises(ConfigError, match=r"line 5.*bogus"):
            parse_config(MINIMAL + "bogus.key = 1\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="grid.n"):
            parse_config("scheme.kind = a\nlaw.id = constant\ntime.t_final = 0.5\n")

    def test_bad_value_reports_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("grid.n = sixty\n" + MINIMAL[MINIMAL.index("scheme") :])

    def test_range_violations(self):
        with pytest.raises(ConfigError, match="cfl"):
            parse_config(MINIMAL + "time.cfl = 1.5\n")
        with pytest.raises(ConfigError, match="positive"):
            parse_config(MINIMAL + "scheme.eps = -0.1\n")
        with pytest.raises(ConfigError, match="t_final"):
            parse_config(MINIMAL.replace("time.t_final = 0.5", "time.t_final = -1"))

    def test_overrides_applied_last(self):
        cfg = parse_config(MINIMAL, overrides=["time.t_final=0.25", "grid.n=32"])
        assert cfg.t_final == 0.25 and cfg.grid_n == 32

    def test_override_errors(self):
        with pytest.raises(ConfigError, match="override 1"):
            parse_config(MINIMAL, overrides=["nonsense"])
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(MINIMAL, overrides=["foo.bar=1"])

    def test_custom_file_requires_path(self):
        with pytest.raises(ConfigError, match="init.file"):
            parse_config(MINIMAL + "init.preset = custom_file\n")

    def test_oracle_rejects_velocity_dependent_law(self):
        text = MINIMAL.replace("scheme.kind = a", "scheme.kind = oracle").replace(
            "law.id = constant", "law.id = kinetic"
        )
        with pytest.raises(ConfigError, match="reducible"):
            parse_config(text)

    def test_law_params_arity_checked(self):
        with pytest.raises(ConfigError, match="law.params"):
            parse_config(MINIMAL + "law.params = 1.0, 2.0, 3.0\n")

    def test_builders(self):
        cfg = parse_config(MINIMAL + "law.params = 2.5\ninit.v0_1 = gradient\n")
        grid = cfg.build_grid()
        assert grid.n == 64
        law = cfg.build_law()
        assert float(law.f(1.0, 0, 0)) == 2.5
        scheme = cfg.build_scheme(grid)
        assert scheme.v0_1 is not None
        state = cfg.build_initial(grid)
        assert state.grid == grid


class TestFieldDump:
    def random_state(self, grid, with_p=False, seed=0):
        rng = np.random.default_rng(seed)
        p = ScalarField(grid, rng.standard_normal((grid.n, grid.n))) if with_p else None
        return State(
            ScalarField(grid, rng.standard_normal((grid.n, grid.n))),
            VectorField.from_arrays(grid, rng.standard_normal((grid.n, grid.n)), rng.standard_normal((grid.n, grid.n))),
            1.0 + rng.random(),
            p_tilde=p,
        )

    @pytest.mark.parametrize("with_p", [False, True])
    def test_round_trip_bit_exact(self, tmp_path, with_p):
        grid = Grid(16)
        state = self.random_state(grid, with_p=with_p)
        path = tmp_path / "state.cifd"
        write_field_dump(state, path, time=0.625)
        loaded, t = read_field_dump(path)
        assert t == 0.625
        assert loaded.rho_bar == state.rho_bar
        np.testing.assert_array_equal(loaded.rho_tilde.values, state.rho_tilde.values)
        np.testing.assert_array_equal(loaded.v.x, state.v.x)
        if with_p:
            np.testing.assert_array_equal(loaded.p_tilde.values, state.p_tilde.values)
        else:
            assert loaded.p_tilde is None
        # writing the loaded state reproduces the file byte for byte
        path2 = tmp_path / "state2.cifd"
        write_field_dump(loaded, path2, time=t)
        assert path.read_bytes() == path2.read_bytes()

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.cifd"
        grid = Grid(16)
        write_field_dump(self.random_state(grid), path)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="magic"):
            read_field_dump(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v2.cifd"
        grid = Grid(16)
        write_field_dump(self.random_state(grid), path)
        data = bytearray(path.read_bytes())
        struct.pack_into("<I", data, 4, DUMP_VERSION + 1)
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedVersion):
            read_field_dump(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.cifd"
        grid = Grid(16)
        write_field_dump(self.random_state(grid), path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(FormatError, match="bytes"):
            read_field_dump(path)

    def test_header_layout(self, tmp_path):
        path = tmp_path / "layout.cifd"
        grid = Grid(16)
        write_field_dump(self.random_state(grid), path, time=1.5)
        data = path.read_bytes()
        magic, version, n, ncomp, t, rho_bar = struct.unpack_from("<4sIIIdd", data)
        assert magic == MAGIC and version == DUMP_VERSION
        assert (n, ncomp, t) == (16, 3, 1.5)
        assert len(data) == struct.calcsize("<4sIIIdd") + 3 * 16 * 16 * 8


class TestDiagnosticsCsv:
    def test_zero_horizon_writes_single_row(self, tmp_path):
        grid = Grid(16)
        init = initial_state(grid, "taylor_green", 0.1)
        rep = run_simulation(init, SchemeConfig(kind=SchemeKind.MOLLIFIED_PROJECTED, eps=0.1),
                             constant_law(1.0), TimeControls(t_final=0.0))
        path = tmp_path / "d.csv"
        write_diagnostics_csv(rep, path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 2
        assert lines[0] == "time,hs_norm,kinetic,div_norm,penalty_norm,min_rho"

    def test_read_back_exact(self, tmp_path):
        grid = Grid(16)
        init = initial_state(grid, "taylor_green", 0.1)
        rep = run_simulation(init, SchemeConfig(kind=SchemeKind.CONTINUOUS_PROJECTION, eps=0.1),
                             constant_law(1.0), TimeControls(t_final=0.1))
        path = tmp_path / "d.csv"
        write_diagnostics_csv(rep, path)
        cols = read_diagnostics_csv(path)
        np.testing.assert_array_equal(cols["time"], rep.times)
        np.testing.assert_array_equal(cols["hs_norm"], rep.hs_norm)
        np.testing.assert_array_equal(cols["penalty_norm"], rep.penalty_norm)
        np.testing.assert_array_equal(cols["min_rho"], rep.min_rho)

"""Configuration parsing and deterministic on-disk formats.

Configs are line-oriented ``dotted.key = value`` text (see docs/config.md
for every key and default); command-line ``--override key=value`` pairs
are applied after the file. Unknown keys, malformed values and range
violations are rejected with the offending key and line.

Field dumps are a fixed little-endian binary layout (docs/formats.md)
whose read/write round trip is bit exact; diagnostics CSVs print 17
significant digits so parsed-back floats are exact too.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError, UnsupportedVersion
from .integrate import RunReport, Splitting, TimeControls
from .model import LAW_FACTORIES, PressureLaw, State, make_law
from .presets import INIT_PRESETS, V01_PRESETS, compressible_perturbation, initial_state
from .schemes import SchemeConfig, SchemeKind
from .spectral import Grid, MollifierKind, ScalarField, VectorField

MAGIC = b"CIFD"
DUMP_VERSION = 1
DEFAULT_EPS_LIST = (0.2, 0.1, 0.05, 0.025)

_MOLLIFIER_NAMES = {
    "gaussian": MollifierKind.GAUSSIAN_MULTIPLIER,
    "sharp_cutoff": MollifierKind.SHARP_CUTOFF,
}
_SPLITTING_NAMES = {"strang": Splitting.STRANG, "lie": Splitting.LIE}
_SCHEME_NAMES = {k.value: k for k in SchemeKind}


# ---------------------------------------------------------------------------
# configuration


@dataclass
class Config:
    """Validated run configuration (primitive values, not built objects)."""

    grid_n: int
    scheme_kind: SchemeKind
    law_id: str
    t_final: float
    grid_length: float = 2.0 * np.pi
    scheme_eps: float | None = None
    mollifier: MollifierKind = MollifierKind.GAUSSIAN_MULTIPLIER
    splitting: Splitting = Splitting.STRANG
    law_params: tuple[float, ...] = ()
    init_preset: str = "taylor_green"
    init_amplitude: float = 0.1
    init_v0_1: str = "zero"
    init_file: str | None = None
    cfl: float = 0.4
    dt_override: float | None = None
    output_dir: str = "out"
    output_every_steps: int = 1
    output_fields: bool = False
    study_eps_list: tuple[float, ...] = DEFAULT_EPS_LIST
    study_ref_eps: float = 1e-3
    provided: frozenset[str] = field(default_factory=frozenset)

    # -- builders ----------------------------------------------------------

    def build_grid(self) -> Grid:
        return Grid(self.grid_n, self.grid_length)

    def build_law(self) -> PressureLaw:
        return make_law(self.law_id, self.law_params)

    def build_controls(self) -> TimeControls:
        return TimeControls(
            t_final=self.t_final,
            cfl=self.cfl,
            dt_override=self.dt_override,
            splitting=self.splitting,
        )

    def build_scheme(self, grid: Grid) -> SchemeConfig:
        return SchemeConfig(
            kind=self.scheme_kind,
            eps=self.scheme_eps,
            mollifier=self.mollifier,
            v0_1=compressible_perturbation(grid, self.init_v0_1),
        )

    def build_initial(self, grid: Grid) -> State:
        if self.init_preset == "custom_file":
            state, _ = read_field_dump(self.init_file)
            if state.grid != grid:
                raise ConfigError(
                    f"init.file grid n={state.grid.n} does not match grid.n={grid.n}"
                )
            return state
        return initial_state(grid, self.init_preset, self.init_amplitude)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(p) for p in items)


def _choice(options):
    def parse(text: str):
        key = text.strip().lower()
        if key not in options:
            raise ValueError(f"expected one of {sorted(options)}, got {text!r}")
        return options[key] if isinstance(options, dict) else key

    return parse


# key -> (attribute, parser, range check or None)
_SCHEMA = {
    "grid.n": ("grid_n", int, lambda v: v >= 8 and v % 2 == 0, "n must be even >= 8"),
    "grid.length": ("grid_length", float, lambda v: v > 0, "length must be positive"),
    "scheme.kind": ("scheme_kind", _choice(_SCHEME_NAMES), None, None),
    "scheme.eps": ("scheme_eps", float, lambda v: v > 0, "eps must be positive"),
    "scheme.mollifier": ("mollifier", _choice(_MOLLIFIER_NAMES), None, None),
    "scheme.splitting": ("splitting", _choice(_SPLITTING_NAMES), None, None),
    "law.id": ("law_id", _choice({k: k for k in LAW_FACTORIES}), None, None),
    "law.params": ("law_params", _parse_float_list, None, None),
    "init.preset": ("init_preset", _choice({k: k for k in INIT_PRESETS}), None, None),
    "init.amplitude": ("init_amplitude", float, None, None),
    "init.v0_1": ("init_v0_1", _choice({k: k for k in V01_PRESETS}), None, None),
    "init.file": ("init_file", str, None, None),
    "time.t_final": ("t_final", float, lambda v: v >= 0, "t_final must be nonnegative"),
    "time.cfl": ("cfl", float, lambda v: 0 < v <= 1, "cfl must lie in (0, 1]"),
    "time.dt_override": ("dt_override", float, lambda v: v > 0, "dt_override must be positive"),
    "output.dir": ("output_dir", str, None, None),
    "output.every_steps": ("output_every_steps", int, lambda v: v >= 1, "every_steps must be >= 1"),
    "output.fields": ("output_fields", _parse_bool, None, None),
    "study.eps_list": ("study_eps_list", _parse_float_list,
                       lambda v: all(e > 0 for e in v), "eps values must be positive"),
    "study.ref_eps": ("study_ref_eps", float, lambda v: v > 0, "ref_eps must be positive"),
}

_REQUIRED = ("grid.n", "scheme.kind", "law.id", "time.t_final")

# the smoothing scale has a sensible default for the projected scheme;
# the penalty/acoustic epsilon is physics and must be stated explicitly
_DEFAULT_MOLLIFICATION_EPS = 0.05


def parse_config(text: str, overrides: tuple[str, ...] | list[str] = ()) -> Config:
    """Parse and fully validate a config, applying overrides last."""
    raw: dict[str, tuple[str, str]] = {}  # key -> (value text, location)

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = (value, f"line {lineno}")

    for i, ov in enumerate(overrides, start=1):
        if "=" not in ov:
            raise ConfigError(f"override {i}: expected 'key=value', got {ov!r}")
        key, value = (part.strip() for part in ov.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"override {i}: unknown key {key!r}")
        raw[key] = (value, f"override {i}")

    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    values = {}
    for key, (text_value, where) in raw.items():
        attr, parser, check, message = _SCHEMA[key]
        try:
            parsed = parser(text_value)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key} = {text_value!r}: {exc}") from None
        if check is not None and not check(parsed):
            raise ConfigError(f"{where}: {key} = {text_value!r}: {message}")
        values[attr] = parsed

    cfg = Config(provided=frozenset(raw), **values)

    if cfg.scheme_kind in (SchemeKind.CONTINUOUS_PROJECTION, SchemeKind.ARTIFICIAL_COMPRESSIBILITY):
        if cfg.scheme_eps is None:
            raise ConfigError(
                f"scheme.kind = {cfg.scheme_kind.value!r} requires scheme.eps (the "
                "penalty/acoustic parameter has no default)"
            )
    elif cfg.scheme_kind is SchemeKind.MOLLIFIED_PROJECTED and cfg.scheme_eps is None:
        cfg.scheme_eps = _DEFAULT_MOLLIFICATION_EPS
    if cfg.init_preset == "custom_file" and cfg.init_file is None:
        raise ConfigError("init.preset = 'custom_file' requires init.file")
    try:
        law = cfg.build_law()
    except TypeError:
        raise ConfigError(
            f"law.params = {cfg.law_params!r} does not fit law {cfg.law_id!r}"
        ) from None
    if cfg.scheme_kind is SchemeKind.REDUCTION_ORACLE and not law.reducible:
        raise ConfigError(
            f"law.id = {cfg.law_id!r} is not reducible (f depends on v); "
            "the oracle scheme needs f = f(rho)"
        )
    return cfg


def load_config(path: str | Path, overrides: tuple[str, ...] | list[str] = ()) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, overrides)


# ---------------------------------------------------------------------------
# binary field dumps

_HEADER = struct.Struct("<4sIIIdd")  # magic, version, n, ncomp, time, rho_bar


def write_field_dump(state: State, path: str | Path, time: float = 0.0) -> None:
    """Write a state snapshot: header + row-major float64 blocks.

    Component order: rho_tilde, then p_tilde when present, then the two
    velocity components. See docs/formats.md for the exact byte layout.
    """
    ncomp = 3 if state.p_tilde is None else 4
    blocks = [state.rho_tilde.values]
    if state.p_tilde is not None:
        blocks.append(state.p_tilde.values)
    blocks += [state.v.x, state.v.y]
    payload = b"".join(np.ascontiguousarray(b, dtype="<f8").tobytes() for b in blocks)
    header = _HEADER.pack(MAGIC, DUMP_VERSION, state.grid.n, ncomp, float(time), state.rho_bar)
    Path(path).write_bytes(header + payload)


def read_field_dump(path: str | Path) -> tuple[State, float]:
    """Read a dump back; exact inverse of `write_field_dump`.

    The grid period is not stored in the format and defaults to 2*pi.
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, n, ncomp, time, rho_bar = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != DUMP_VERSION:
        raise UnsupportedVersion(f"{path}: format version {version}, expected {DUMP_VERSION}")
    if ncomp not in (3, 4):
        raise FormatError(f"{path}: invalid component count {ncomp}")
    expected = _HEADER.size + ncomp * n * n * 8
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    grid = Grid(n)
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).copy()
    blocks = flat.reshape(ncomp, n, n)
    i = 0
    rho_tilde = ScalarField(grid, blocks[i]); i += 1
    p_tilde = None
    if ncomp == 4:
        p_tilde = ScalarField(grid, blocks[i]); i += 1
    v = VectorField.from_arrays(grid, blocks[i], blocks[i + 1])
    return State(rho_tilde, v, rho_bar, p_tilde), float(time)


# ---------------------------------------------------------------------------
# CSV outputs

_CSV_HEADER = "time,hs_norm,kinetic,div_norm,penalty_norm,min_rho"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_diagnostics_csv(report: RunReport, path: str | Path) -> None:
    """One row per snapshot, 17 significant digits (lossless round trip)."""
    lines = [_CSV_HEADER]
    for i in range(report.times.size):
        lines.append(
            ",".join(
                _fmt(col[i])
                for col in (
                    report.times,
                    report.hs_norm,
                    report.kinetic,
                    report.div_norm,
                    report.penalty_norm,
                    report.min_rho,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_diagnostics_csv(path: str | Path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != _CSV_HEADER:
        raise FormatError(f"{path}: unexpected diagnostics header")
    names = lines[0].split(",")
    rows = [[float(cell) for cell in line.split(",")] for line in lines[1:]]
    arr = np.asarray(rows, dtype=float).reshape(len(rows), len(names))
    return {name: arr[:, j] for j, name in enumerate(names)}


def write_study_csv(study, path: str | Path) -> None:
    """Per-eps summary of a sweep: distance, bound constant, status."""
    constants = study.penalty_constants or study.divergence_constants
    lines = ["eps,distance,bound_constant,final_time,completed"]
    for i, eps in enumerate(study.eps_values):
        run = study.runs[i]
        lines.append(
            ",".join(
                (
                    _fmt(eps),
                    _fmt(study.distances[i]),
                    _fmt(constants[i]),
                    _fmt(run.final_time),
                    "1" if run.completed else "0",
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

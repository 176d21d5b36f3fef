"""Config files: a small INI-style dialect with a fixed schema.

Format: [section] headers, key = value lines, # comments (full line or
trailing), blank lines. Values are typed by the schema: int, float, bool
(true/false), or string (bare or double quoted). Unknown sections or keys
are hard errors with line numbers, as are type mismatches. Loading fills
every schema default, so an echoed config is complete and reloads to the
identical canonical text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

_REQUIRED = object()


def _fmt_float(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(float(v), ".17g")


@dataclass(frozen=True)
class Key:
    name: str
    kind: str                 # int | float | bool | str
    default: object
    help: str = ""
    optional: bool = False    # may resolve later (echoes as the sentinel)


_SCHEMA: dict[str, tuple[Key, ...]] = {
    "geometry": (
        Key("hypotenuse", "str", "straight", "straight | arc"),
        Key("leg_length", "float", 1.0),
        Key("sagitta", "float", 0.06, "arc bulge toward the cavity"),
        Key("slit_separation", "float", 0.3),
        Key("slit_width", "float", 0.05),
        Key("box_depth", "float", 1.5),
        Key("film_offset", "float", 0.6, "film height above the box floor"),
        Key("wall_height", "float", 4.0e4),
        Key("wall_skin", "float", 0.025),
        Key("absorber_width", "float", 0.2),
        Key("absorber_strength", "float", 1.2e4),
        Key("margin", "float", 0.05),
    ),
    "grid": (
        Key("nx", "int", 224),
        Key("ny", "int", 512),
        Key("dt", "float", 0.0,
            "0 means auto: dt_max_factor * mass * min(dx,dy)^2 / hbar",
            optional=True),
        Key("dt_max_factor", "float", 0.2),
        Key("hbar", "float", 1.0),
        Key("mass", "float", 1.0),
    ),
    "packet": (
        Key("x0", "float", 0.5),
        Key("y0", "float", 0.185),
        Key("sigma", "float", 0.031),
        Key("kx", "float", 0.0),
        Key("ky", "float", -90.0),
    ),
    "run": (
        Key("n_steps", "int", 10417),
        Key("window_start", "float", 0.05),
        Key("window_end", "float", 0.25),
        Key("film_cadence", "int", 1),
        Key("probe_cadence", "int", 50),
        Key("snapshot_cadence", "int", 0, "0 disables snapshots"),
        Key("nan_check_cadence", "int", 100),
        Key("seal_slit_1", "bool", False),
        Key("seal_slit_2", "bool", False),
    ),
    "analysis": (
        Key("film_window_lo", "float", 0.25),
        Key("film_window_hi", "float", 0.75),
        Key("smooth_width", "float", 0.01,
            "gaussian sigma for fringe smoothing, film length units"),
        Key("n_subwindows", "int", 6),
    ),
    "classical": (
        Key("x", "float", 0.2),
        Key("y", "float", 0.5),
        Key("theta", "float", 0.0),
        Key("n_bounces", "int", 10000),
        Key("offset", "float", 1e-9),
        Key("deviation_offset", "float", 1e-7),
        Key("deviation_bounces", "int", 200),
    ),
    "spectral": (
        Key("n", "int", 256, "lattice subdivisions per leg"),
        Key("k_levels", "int", 40),
        Key("window_lo", "float", 0.0),
        Key("window_hi", "float", 0.0, "0 means no upper window"),
    ),
    "poles": (
        Key("u0", "float", 10.0),
        Key("amplitude", "float", 1.0),
        Key("wall_order", "int", 0),
        Key("radius", "float", 1.0, "cavity size; inf allowed"),
        Key("mass", "float", 1.0),
        Key("hbar", "float", 1.0),
        Key("sweep", "bool", False),
        Key("radius_min", "float", 0.5),
        Key("radius_max", "float", 50.0),
        Key("n_radii", "int", 12),
    ),
    "sid": (
        Key("kind", "str", "dense_gaussian",
            "two_mode | sparse | dense_gaussian | sampled | random_blocks"),
        Key("sigma_m", "float", 1.0),
        Key("m0", "float", 1.0),
        Key("n_modes", "int", 1000),
        Key("separation", "float", 0.7),
        Key("x_max_over_hbar", "float", 50.0,
            "scan reach in units hbar / sigma_m (or hbar / m0)"),
        Key("n_points", "int", 48),
        Key("seed", "int", 20260819),
        Key("hbar", "float", 1.0),
        Key("n_blocks", "int", 3),
        Key("weight_profile", "str", "uniform", "uniform | gaussian"),
    ),
}

_BOOL_WORDS = {"true": True, "false": False}


class ExperimentConfig:
    """Typed section/key mapping with canonical serialization."""

    def __init__(self, sections: dict[str, dict[str, object]]):
        self.sections = sections

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def __eq__(self, other):
        return (isinstance(other, ExperimentConfig)
                and self.sections == other.sections)

    def copy(self) -> "ExperimentConfig":
        return ExperimentConfig({s: dict(kv) for s, kv in self.sections.items()})

    def echo(self) -> str:
        """Canonical text: schema order, resolved defaults, 17 digit floats."""
        lines = []
        for section, keys in _SCHEMA.items():
            lines.append(f"[{section}]")
            data = self.sections[section]
            for key in keys:
                v = data[key.name]
                if key.kind == "float":
                    text = _fmt_float(v)
                elif key.kind == "bool":
                    text = "true" if v else "false"
                elif key.kind == "str" and _needs_quotes(str(v)):
                    text = '"' + str(v) + '"'
                else:
                    text = str(v)
                lines.append(f"{key.name} = {text}")
            lines.append("")
        return "\n".join(lines)


def _needs_quotes(s: str) -> bool:
    if s == "" or s.lower() in _BOOL_WORDS:
        return True
    return not all(c.isalnum() or c in "_-." for c in s)


def _parse_value(raw: str, key: Key, line_no: int):
    raw = raw.strip()
    if raw.startswith('"'):
        if not (len(raw) >= 2 and raw.endswith('"')):
            raise ConfigError(f"unterminated string for {key.name}", line_no)
        raw_str = raw[1:-1]
        if key.kind != "str":
            raise ConfigError(
                f"{key.name} expects {key.kind}, got a string", line_no)
        return raw_str
    if key.kind == "str":
        return raw
    if key.kind == "bool":
        if raw.lower() not in _BOOL_WORDS:
            raise ConfigError(
                f"{key.name} expects true or false, got {raw!r}", line_no)
        return _BOOL_WORDS[raw.lower()]
    if key.kind == "int":
        try:
            return int(raw, 0)
        except ValueError:
            raise ConfigError(
                f"{key.name} expects an integer, got {raw!r}", line_no) from None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"{key.name} expects a number, got {raw!r}", line_no) from None


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text against the schema; errors carry line numbers."""
    sections = {s: {k.name: k.default for k in keys}
                for s, keys in _SCHEMA.items()}
    seen: set[tuple[str, str]] = set()
    current = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", line_no)
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(f"unknown section [{name}]", line_no)
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line_no)
        if current is None:
            raise ConfigError("key outside any [section]", line_no)
        key_name, _, raw_value = line.partition("=")
        key_name = key_name.strip()
        keys = {k.name: k for k in _SCHEMA[current]}
        if key_name not in keys:
            raise ConfigError(
                f"unknown key {key_name!r} in [{current}]", line_no)
        if (current, key_name) in seen:
            raise ConfigError(
                f"duplicate key {key_name!r} in [{current}]", line_no)
        seen.add((current, key_name))
        sections[current][key_name] = _parse_value(
            raw_value, keys[key_name], line_no)
    return ExperimentConfig(sections)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill derived values and enforce cross-key constraints.

    Resolves dt = 0 to the conservative default rule and rejects a dt above
    the configured ceiling dt_max_factor * mass * min(dx,dy)^2 / hbar.
    """
    from .geometry import build_apparatus, grid_for_apparatus

    out = cfg.copy()
    geom = build_apparatus(out["geometry"])
    g = out["grid"]
    for name in ("nx", "ny"):
        if g[name] < 8:
            raise ConfigError(f"grid {name} = {g[name]} too small")
    probe = grid_for_apparatus(geom, g["nx"], g["ny"], dt=1.0,
                               hbar=g["hbar"], mass=g["mass"])
    dt_max = (g["dt_max_factor"] * g["mass"]
              * min(probe.dx, probe.dy) ** 2 / g["hbar"])
    if g["dt"] == 0.0:
        g["dt"] = dt_max
    if g["dt"] < 0.0:
        raise ConfigError(f"dt must be positive, got {g['dt']}")
    if g["dt"] > dt_max * (1.0 + 1e-12):
        raise ConfigError(
            f"dt = {g['dt']:.6g} exceeds the ceiling {dt_max:.6g} "
            f"(dt_max_factor = {g['dt_max_factor']:.6g})")
    r = out["run"]
    if r["n_steps"] < 1:
        raise ConfigError("n_steps must be >= 1")
    if not r["window_end"] > r["window_start"] >= 0.0:
        raise ConfigError(
            f"film window [{r['window_start']}, {r['window_end']}] is empty")
    a = out["analysis"]
    if not a["film_window_hi"] > a["film_window_lo"]:
        raise ConfigError("film x-window is empty")
    if a["n_subwindows"] < 0:
        raise ConfigError("n_subwindows must be >= 0")
    return out

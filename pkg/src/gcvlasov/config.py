"""Scenario configuration files.

INI syntax (``[section]`` headers, ``key = value`` lines, ``#`` comments).
Parsing is strict: unknown sections or keys, duplicate keys and
out-of-range values are all reported, not only the first one. Every key has
a documented default, so a file only needs ``[scenario] name = ...``.

Lists are comma separated. Floats are written with ``repr`` so a
serialised config parses back to an identical object.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

SCENARIOS = (
    "exb-drift",
    "gradb-drift",
    "mu-invariance",
    "gc2d",
    "pic-run",
    "defect-scan",
    "convergence",
)

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Carries every problem found in a config, one message per entry."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


def _pow2(n: int) -> bool:
    return n >= 8 and n & (n - 1) == 0


# type, default, check(value) -> error message or None
def _positive(v):
    return None if v > 0 else "must be > 0"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _eps(v):
    return None if 0 < v <= 1 else "must be in (0, 1]"


def _eps_list(v):
    if len(v) < 1 or any(not 0 < e <= 1 for e in v):
        return "entries must be in (0, 1]"
    if any(b >= a for a, b in zip(v, v[1:])):
        return "must be strictly decreasing"
    return None


def _counts(v):
    return None if len(v) in (2, 3) and all(_pow2(n) for n in v) else "need 2 or 3 powers of two >= 8"


def _lengths(v):
    return None if len(v) in (2, 3) and all(x > 0 for x in v) else "need 2 or 3 positive lengths"


def _pair(v):
    return None if len(v) == 2 else "need 2 values"


def _even4(v):
    return None if v >= 4 and v % 2 == 0 else "must be even and >= 4"


def _choice(*opts):
    def check(v):
        return None if v in opts else f"must be one of {', '.join(opts)}"

    return check


def _unit_interval(v):
    return None if 0 <= v < 1 else "must be in [0, 1)"


SCHEMA: dict[str, dict[str, tuple]] = {
    "scenario": {
        "name": ("str", None, _choice(*SCENARIOS)),
        "out": ("str", "", None),
        "seed": ("int", 0, _nonneg),
        "threads": ("int", 1, _positive),
    },
    "field": {
        "variant": ("str", "uniform", _choice("uniform", "linear-ramp", "smooth-periodic-bump")),
        "b0": ("float", 1.0, _positive),
        "alpha": ("float", 0.5, _positive),
        "grad": ("floats", [0.0, 0.0], _pair),
        "amplitude": ("float", 0.0, None),
        "center": ("floats", [math.pi, math.pi], _pair),
    },
    "domain": {
        "lengths": ("floats", [TWO_PI, TWO_PI], _lengths),
        "counts": ("ints", [128, 8], _counts),
    },
    "epsilon": {
        "value": ("float", 0.05, _eps),
        "list": ("floats", [0.1, 0.05, 0.025], _eps_list),
    },
    "pic": {
        "n_particles": ("int", 8192, _positive),
        "steps_per_period": ("int", 64, _positive),
        "t_end": ("float", 1.0, _positive),
        "output_every": ("int", 64, _positive),
        "snapshot_every": ("int", 0, _nonneg),
        "rho0": ("float", 1.0, _positive),
        "delta": ("float", 0.5, _unit_interval),
        "velocity": ("str", "ring", _choice("ring", "maxwellian", "delta")),
        "sampling": ("str", "quiet", _choice("quiet", "random")),
        "n_phases": ("int", 8, _positive),
        "lattice": ("ints", [128, 8, 1], None),
    },
    "gc2d": {
        "dt": ("float", 0.1, _positive),
        "t_end": ("float", 10.0, _positive),
        "output_every": ("int", 1, _positive),
        "initial": ("str", "kelvin-helmholtz", _choice("uniform", "single-mode", "kelvin-helmholtz", "vortex")),
        "rho0": ("float", 2.0, _positive),
        "delta": ("float", 0.015, None),
        "shear": ("float", 1.0, None),
        "mode": ("int", 1, _positive),
    },
    "orbit": {
        "x": ("floats", [1.0, 3.5, 2.0, 5.0], None),
        "y": ("floats", [2.0, 1.0, 4.5, 5.0], None),
        "w": ("floats", [1.0, 0.5, 2.0, 1.5], None),
        "potential": ("str", "modes", _choice("zero", "uniform", "quadratic", "modes")),
        "potential_params": ("floats", [0.3, 1.0, 0.0, 0.0, 0.2, 0.0, 1.0, 0.5, 0.1, 1.0, 1.0, 0.3], None),
        "T": ("float", 10.0, _positive),
        "dt": ("float", 1e-3, _positive),
        "e0": ("float", 1.0, None),
        "n_periods": ("int", 10, _positive),
    },
    "defect": {
        "n_theta": ("int", 8, _even4),
        "n_w": ("int", 64, _positive),
        "n_v": ("int", 32, _positive),
        "delta": ("float", 0.2, None),
    },
    "acceptance": {
        "drift_tol": ("float", 0.05, _positive),
        "mu_tol": ("float", 1e-8, _positive),
        "energy_tol": ("float", 0.01, _positive),
        "mass_tol": ("float", 1e-10, _positive),
        "ratio_min": ("float", 1.5, _positive),
        "ratio_max": ("float", 2.5, _positive),
    },
}

# scenario-specific defaults layered over SCHEMA defaults
SCENARIO_DEFAULTS: dict[str, dict[str, dict]] = {
    "exb-drift": {"epsilon": {"list": [0.05, 0.025, 0.0125]}},
    "gradb-drift": {
        "field": {"variant": "linear-ramp", "grad": [0.1, 0.0]},
        "epsilon": {"list": [0.05, 0.025, 0.0125]},
    },
    "mu-invariance": {"field": {"variant": "smooth-periodic-bump", "amplitude": 0.5}},
    "gc2d": {"domain": {"lengths": [2.0 * TWO_PI, TWO_PI], "counts": [128, 128]}},
    "defect-scan": {
        "domain": {"counts": [16, 16]},
        "acceptance": {"ratio_min": 1.7, "ratio_max": 2.3},
    },
}


@dataclass
class ScenarioConfig:
    """Fully populated configuration; ``sections[sec][key]`` holds typed values."""

    name: str
    sections: dict = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.sections[section][key]

    def with_overrides(self, **updates) -> "ScenarioConfig":
        """Copy with ``section__key=value`` overrides (no validation)."""
        secs = {s: dict(v) for s, v in self.sections.items()}
        for k, v in updates.items():
            s, key = k.split("__", 1)
            secs[s][key] = v
        return ScenarioConfig(self.name, secs)


def defaults_for(name: str) -> dict:
    secs = {s: {k: (list(d) if isinstance(d, list) else d) for k, (_, d, _) in keys.items()} for s, keys in SCHEMA.items()}
    secs["scenario"]["name"] = name
    for s, keys in SCENARIO_DEFAULTS.get(name, {}).items():
        secs[s].update(keys)
    if not secs["scenario"]["out"]:
        secs["scenario"]["out"] = f"runs/{name}"
    return secs


def _convert(kind: str, text: str):
    text = text.strip()
    if kind == "str":
        return text
    if kind == "int":
        return int(text)
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    items = [t.strip() for t in text.split(",") if t.strip()]
    if kind == "ints":
        return [int(t) for t in items]
    vals = [float(t) for t in items]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("not finite")
    return vals


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    parser = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError([f"line {exc.lineno}: duplicate key '{exc.option}' in [{exc.section}]"]) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError([f"line {exc.lineno}: duplicate section [{exc.section}]"]) from exc
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc

    errors: list[str] = []
    for sec in parser.sections():
        if sec not in SCHEMA:
            errors.append(f"unknown section [{sec}]")
    name = parser.get("scenario", "name", fallback=None) if parser.has_section("scenario") else None
    if name is None:
        errors.append("missing required key scenario.name")
        raise ConfigError(errors)
    name = name.strip()
    if name not in SCENARIOS:
        errors.append(f"scenario.name: unknown scenario '{name}' (expected one of {', '.join(SCENARIOS)})")
        raise ConfigError(errors)
    secs = defaults_for(name)
    for sec in parser.sections():
        if sec not in SCHEMA:
            continue
        for key, raw in parser.items(sec):
            spec = SCHEMA[sec].get(key)
            if spec is None:
                errors.append(f"{sec}.{key}: unknown key")
                continue
            kind, _, check = spec
            try:
                val = _convert(kind, raw)
            except ValueError:
                errors.append(f"{sec}.{key}: cannot read '{raw}' as {kind}")
                continue
            msg = check(val) if check else None
            if msg:
                errors.append(f"{sec}.{key} = {raw.strip()}: {msg}")
                continue
            secs[sec][key] = val
    errors += _cross_checks(secs)
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(name, secs)


def _cross_checks(secs) -> list[str]:
    out = []
    if secs["field"]["b0"] <= secs["field"]["alpha"]:
        out.append("field.b0: must exceed field.alpha")
    o = secs["orbit"]
    if not len(o["x"]) == len(o["y"]) == len(o["w"]):
        out.append("orbit.x, orbit.y, orbit.w: need equal lengths")
    if any(w < 0 for w in o["w"]):
        out.append("orbit.w: entries must be >= 0")
    if len(secs["domain"]["lengths"]) != len(secs["domain"]["counts"]):
        out.append("domain.lengths/counts: dimension mismatch")
    a = secs["acceptance"]
    if a["ratio_min"] >= a["ratio_max"]:
        out.append("acceptance.ratio_min: must be below ratio_max")
    return out


def _format(v) -> str:
    if isinstance(v, list):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = []
    for sec, keys in cfg.sections.items():
        lines.append(f"[{sec}]")
        for k, v in keys.items():
            lines.append(f"{k} = {_format(v)}")
        lines.append("")
    return "\n".join(lines)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config(name: str) -> ScenarioConfig:
    if name not in SCENARIOS:
        raise ConfigError([f"unknown scenario '{name}'"])
    return ScenarioConfig(name, defaults_for(name))

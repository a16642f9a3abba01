"""Flat ``key = value`` run configuration with strict validation.

Unknown keys, duplicate keys, malformed values, and out-of-range values are
all rejected with the offending key and line number; a config that loads is
fully resolved (every default applied).  ``resolved_text`` renders a config
back to text such that loading it reproduces the identical RunConfig, which
is how runs echo their effective configuration next to their outputs.
"""

import math
import os
from dataclasses import dataclass, fields
from typing import Mapping

from .objectives import ObjectiveSpec, VARIANTS
from .optimizer import DEParams, GWOParams, Schedules
from .physics import (
    SELLMEIER_SETS,
    DispersionModel,
    MismatchTable,
    PhaseMismatchPair,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # geometry and process
    crystal_length_um: float
    domain_thickness_um: float
    process: str
    pump_wavelengths_nm: tuple[float, ...]
    # dispersion
    temperature_c: float = 25.0
    sellmeier: str = "linbo3_e"
    sellmeier_coefficients: Mapping[str, float] | None = None
    wavelength_range_um: tuple[float, float] = (0.4, 5.0)
    dk_override: tuple[PhaseMismatchPair, ...] | None = None
    # optimizer scale
    np: int = 200
    generations: int = 300
    # DE / objective parameters
    f_max: float = 0.1
    f_min: float = 0.01
    cr: float = 0.9
    beta: float = 1.0
    g0: float = 2.0
    normalization: str = "normalized"
    leader_count: int = 4
    # schedules
    p_dist0: float = 0.1
    p_sl0: float = 0.05
    p_flip0: float = 0.02
    phase_split: float = 0.5
    decay_strength: float = 0.2
    theta_low_frac: float = 0.05
    theta_high_frac: float = 0.5
    range_trigger_frac: float = 1.0
    explore_boost: float = 1.2
    exploit_factor: float = 0.8
    conv_threshold: float = 0.1
    conv_window: int = 10
    adaptive_branches: bool = True
    discreteness_factor: float = 1.0
    gwo_a_initial: float = 2.0
    gwo_a_final: float = 0.0
    divide_by_leader_count: bool = False
    # execution
    seed: int = 0
    workers: int = 1
    chunk_size: int = 0  # 0 = automatic
    output_dir: str = "out"

    @property
    def n_domains(self) -> int:
        ratio = self.crystal_length_um / self.domain_thickness_um
        n = round(ratio)
        if abs(ratio - n) > 1e-9 or n < 1:
            raise ConfigError(
                f"crystal_length_um / domain_thickness_um = {ratio!r} is not an "
                "integer domain count (tolerance 1e-9)"
            )
        return int(n)

    def objective_spec(self) -> ObjectiveSpec:
        return ObjectiveSpec(
            variant=self.process,
            pump_wavelengths_nm=self.pump_wavelengths_nm,
            g0=self.g0,
            beta=self.beta,
            normalization=self.normalization,
        )

    def mismatch_provider(self):
        if self.dk_override is not None:
            table = {
                wl: pair for wl, pair in zip(self.pump_wavelengths_nm, self.dk_override)
            }
            return MismatchTable(table)
        coeffs = self.sellmeier_coefficients
        if coeffs is None:
            coeffs = SELLMEIER_SETS[self.sellmeier]
        return DispersionModel(
            coefficients=dict(coeffs),
            temperature_c=self.temperature_c,
            wavelength_range_um=self.wavelength_range_um,
        )

    def de_params(self) -> DEParams:
        return DEParams(f=self.f_max, cr=self.cr, f_min=self.f_min, f_max=self.f_max)

    def gwo_params(self) -> GWOParams:
        return GWOParams(
            a=self.gwo_a_initial,
            a_final=self.gwo_a_final,
            leader_count=self.leader_count,
            discreteness_factor=self.discreteness_factor,
            divide_by_leader_count=self.divide_by_leader_count,
        )

    def schedules(self) -> Schedules:
        return Schedules(
            p_dist0=self.p_dist0,
            p_sl0=self.p_sl0,
            p_flip0=self.p_flip0,
            phase_split=self.phase_split,
            decay_strength=self.decay_strength,
            theta_low_frac=self.theta_low_frac,
            theta_high_frac=self.theta_high_frac,
            range_trigger_frac=self.range_trigger_frac,
            explore_boost=self.explore_boost,
            exploit_factor=self.exploit_factor,
            conv_threshold=self.conv_threshold,
            conv_window=self.conv_window,
            adaptive_branches=self.adaptive_branches,
        )


# ---------------------------------------------------------------------------
# value parsers
# ---------------------------------------------------------------------------

def _parse_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return value


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected true/false, got {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("expected a comma-separated list of numbers")
    return tuple(_parse_float(p) for p in parts)


def _parse_dk_pairs(text: str) -> tuple[PhaseMismatchPair, ...]:
    pairs = []
    for part in (p.strip() for p in text.split(",") if p.strip()):
        bits = part.split(":")
        if len(bits) == 1:
            pairs.append(PhaseMismatchPair(_parse_float(bits[0]), 0.0))
        elif len(bits) == 2:
            pairs.append(PhaseMismatchPair(_parse_float(bits[0]), _parse_float(bits[1])))
        else:
            raise ConfigError(f"dk pair must be 'dk1' or 'dk1:dk2', got {part!r}")
    if not pairs:
        raise ConfigError("expected at least one dk pair")
    return tuple(pairs)


def _parse_coefficients(text: str) -> dict[str, float]:
    out = {}
    for part in (p.strip() for p in text.split(",") if p.strip()):
        bits = part.split(":")
        if len(bits) != 2:
            raise ConfigError(f"coefficient must be 'name:value', got {part!r}")
        out[bits[0].strip()] = _parse_float(bits[1])
    if not out:
        raise ConfigError("expected at least one name:value coefficient")
    return out


def _parse_range(text: str) -> tuple[float, float]:
    vals = _parse_float_list(text)
    if len(vals) != 2:
        raise ConfigError(f"expected 'min,max', got {text!r}")
    return (vals[0], vals[1])


_PARSERS = {
    "crystal_length_um": _parse_float,
    "domain_thickness_um": _parse_float,
    "process": str,
    "pump_wavelengths_nm": _parse_float_list,
    "temperature_c": _parse_float,
    "sellmeier": str,
    "sellmeier_coefficients": _parse_coefficients,
    "wavelength_range_um": _parse_range,
    "dk_override": _parse_dk_pairs,
    "np": _parse_int,
    "generations": _parse_int,
    "f_max": _parse_float,
    "f_min": _parse_float,
    "cr": _parse_float,
    "beta": _parse_float,
    "g0": _parse_float,
    "normalization": str,
    "leader_count": _parse_int,
    "p_dist0": _parse_float,
    "p_sl0": _parse_float,
    "p_flip0": _parse_float,
    "phase_split": _parse_float,
    "decay_strength": _parse_float,
    "theta_low_frac": _parse_float,
    "theta_high_frac": _parse_float,
    "range_trigger_frac": _parse_float,
    "explore_boost": _parse_float,
    "exploit_factor": _parse_float,
    "conv_threshold": _parse_float,
    "conv_window": _parse_int,
    "adaptive_branches": _parse_bool,
    "discreteness_factor": _parse_float,
    "gwo_a_initial": _parse_float,
    "gwo_a_final": _parse_float,
    "divide_by_leader_count": _parse_bool,
    "seed": _parse_int,
    "workers": _parse_int,
    "chunk_size": _parse_int,
    "output_dir": str,
}

_REQUIRED = ("crystal_length_um", "domain_thickness_um", "process", "pump_wavelengths_nm")


def _validate(cfg: RunConfig, lines: Mapping[str, int]) -> None:
    def fail(key: str, message: str):
        where = f" (line {lines[key]})" if key in lines else ""
        raise ConfigError(f"{key}{where}: {message}")

    if cfg.crystal_length_um <= 0:
        fail("crystal_length_um", "must be > 0")
    if cfg.domain_thickness_um <= 0:
        fail("domain_thickness_um", "must be > 0")
    try:
        cfg.n_domains
    except ConfigError as exc:
        fail("crystal_length_um", str(exc))
    if cfg.process not in VARIANTS:
        fail("process", f"must be one of {', '.join(VARIANTS)}")
    if any(w <= 0 for w in cfg.pump_wavelengths_nm):
        fail("pump_wavelengths_nm", "wavelengths must be > 0")
    if cfg.process.startswith("single") and len(cfg.pump_wavelengths_nm) != 1:
        fail("pump_wavelengths_nm", "single_* processes take exactly one wavelength")
    if cfg.process.startswith("multi") and len(cfg.pump_wavelengths_nm) < 2:
        fail("pump_wavelengths_nm", "multi_* processes need at least two wavelengths")
    if cfg.sellmeier not in SELLMEIER_SETS:
        fail("sellmeier", f"unknown set; available: {', '.join(sorted(SELLMEIER_SETS))}")
    if cfg.dk_override is not None and len(cfg.dk_override) != len(cfg.pump_wavelengths_nm):
        fail("dk_override", "need exactly one dk pair per pump wavelength")
    if cfg.np < 4:
        fail("np", "population size must be >= 4")
    if cfg.generations < 0:
        fail("generations", "must be >= 0")
    if not (0 < cfg.f_min <= cfg.f_max <= 2.0):
        fail("f_min", f"need 0 < f_min <= f_max <= 2, got [{cfg.f_min}, {cfg.f_max}]")
    if not (0 <= cfg.cr <= 1):
        fail("cr", "must be in [0, 1]")
    if cfg.beta < 0:
        fail("beta", "must be >= 0")
    if cfg.process.startswith("multi") and cfg.g0 <= 0:
        fail("g0", "must be > 0 for multi_* processes")
    if cfg.normalization not in ("normalized", "raw"):
        fail("normalization", "must be 'normalized' or 'raw'")
    if cfg.leader_count not in (3, 4):
        fail("leader_count", "must be 3 or 4")
    for key in ("p_dist0", "p_sl0", "p_flip0", "phase_split", "decay_strength",
                "conv_threshold", "discreteness_factor"):
        if not (0.0 <= getattr(cfg, key) <= 1.0):
            fail(key, "must be in [0, 1]")
    for key in ("theta_low_frac", "theta_high_frac", "range_trigger_frac"):
        if getattr(cfg, key) < 0:
            fail(key, "must be >= 0")
    for key in ("explore_boost", "exploit_factor"):
        if getattr(cfg, key) <= 0:
            fail(key, "must be > 0")
    if cfg.conv_window < 1:
        fail("conv_window", "must be >= 1")
    if not (0.0 <= cfg.gwo_a_initial <= 2.0):
        fail("gwo_a_initial", "must be in [0, 2]")
    if not (0.0 <= cfg.gwo_a_final <= cfg.gwo_a_initial):
        fail("gwo_a_final", "must be in [0, gwo_a_initial]")
    if cfg.workers < 1:
        fail("workers", "must be >= 1")
    if cfg.chunk_size < 0:
        fail("chunk_size", "must be >= 0 (0 = automatic)")
    lo, hi = cfg.wavelength_range_um
    if not (0 < lo < hi):
        fail("wavelength_range_um", "must satisfy 0 < min < max")


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{ln}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{ln}: unknown key {key!r}")
        if key in values:
            raise ConfigError(
                f"{source}:{ln}: duplicate key {key!r} (first set on line {lines[key]})"
            )
        try:
            values[key] = _PARSERS[key](value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{ln}: {key}: {exc}") from None
        lines[key] = ln
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required key(s): {', '.join(missing)}")
    cfg = RunConfig(**values)
    _validate(cfg, lines)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


# ---------------------------------------------------------------------------
# resolved-config echo
# ---------------------------------------------------------------------------

def _format_value(key: str, value) -> str:
    if key == "pump_wavelengths_nm":
        return ", ".join(repr(v) for v in value)
    if key == "wavelength_range_um":
        return f"{value[0]!r}, {value[1]!r}"
    if key == "dk_override":
        return ", ".join(f"{p.dk1!r}:{p.dk2!r}" for p in value)
    if key == "sellmeier_coefficients":
        return ", ".join(f"{n}:{v!r}" for n, v in sorted(value.items()))
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolved_text(cfg: RunConfig) -> str:
    """Render every field; loading the result reproduces cfg exactly."""
    out = ["# resolved configuration (all defaults applied)"]
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        out.append(f"{f.name} = {_format_value(f.name, value)}")
    return "\n".join(out) + "\n"


def write_resolved(cfg: RunConfig, out_dir) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(str(out_dir), "resolved.cfg")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(resolved_text(cfg))
    return path

"""Run configuration: a flat key = value text format with typed fields.

Lines are `key = value`; blank lines and lines starting with '#' are ignored.
All physical inputs are dimensionless (reference-rate units, hbar = 1).
Complex values accept Python literals like `10`, `1+0.5j`.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .params import SystemParams

OUTPUT_ENV_VAR = "CAVITYGATE_OUT"


@dataclass
class RunConfig:
    experiment: str = ""
    # system parameters
    kappa: float = 1.0
    mu_c: float = 0.1
    gamma_e: float = 0.5
    gamma_el: float = 0.0
    omega_rabi: complex = 1.0 + 0.0j
    delta_0: float = 0.0
    delta_e: float = 0.0
    # Only detunings enter the dynamics; an optical-scale carrier keeps every
    # ray-bundle wavenumber positive.
    omega_c: float = 1.0e4
    # grid and pulse
    v_g: float = 1.0
    n_modes: int = 2048
    bandwidth: float | None = None   # None: auto narrowband choice
    grid_margin: float = 8.0
    grid_center: str = "carrier"     # or "cavity"
    s0_factor: float = 6.0
    e1_weight: float = 1.0
    rel_phase: float = 0.0
    # experiment knobs
    incident_angle: float = 0.25 * 3.141592653589793
    n_traj: int = 100
    seed: int = 0
    sweep_parameter: str | None = None
    sweep_min: float = 0.0
    sweep_max: float = 5.0
    sweep_steps: int = 101
    memory_budget: int = 2_000_000_000
    out_dir: Path = Path("cavitygate-out")
    quiet: bool = False

    def system_params(self) -> SystemParams:
        try:
            return SystemParams(
                kappa=self.kappa, mu_c=self.mu_c, gamma_e=self.gamma_e,
                gamma_el=self.gamma_el, omega_rabi=self.omega_rabi,
                delta_0=self.delta_0, delta_e=self.delta_e, omega_c=self.omega_c,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> dict:
        """JSON-serializable view of the effective configuration."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, complex):
                out[f.name] = [value.real, value.imag]
            elif isinstance(value, Path):
                out[f.name] = str(value)
            else:
                out[f.name] = value
        return out


# Experiments whose reference parameter sets differ from the global defaults.
_EXPERIMENT_DEFAULTS = {
    "gate-demo": {"gamma_e": 0.1, "mu_c": 0.1, "omega_rabi": 10.0 + 0.0j},
    "oracle-compare": {"gamma_e": 0.5, "mu_c": 0.1, "omega_rabi": 10.0 + 0.0j},
}

_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False,
                "yes": True, "no": False}


def _convert(name: str, kind, raw: str):
    raw = raw.strip()
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind is complex:
            return complex(raw.replace(" ", ""))
        if kind is bool:
            return _BOOL_VALUES[raw.lower()]
        if kind is Path:
            return Path(raw)
        return raw
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


_FIELD_TYPES = {
    "experiment": str, "kappa": float, "mu_c": float, "gamma_e": float,
    "gamma_el": float, "omega_rabi": complex, "delta_0": float,
    "delta_e": float, "omega_c": float, "v_g": float, "n_modes": int,
    "bandwidth": float, "grid_margin": float, "grid_center": str,
    "s0_factor": float, "e1_weight": float, "rel_phase": float,
    "incident_angle": float, "n_traj": int, "seed": int,
    "sweep_parameter": str, "sweep_min": float, "sweep_max": float,
    "sweep_steps": int, "memory_budget": int, "out_dir": Path, "quiet": bool,
}


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines into typed values; unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, _FIELD_TYPES[key], raw)
    return values


def load_config(
    experiment: str,
    config_path: str | Path | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Build the effective configuration.

    Precedence, lowest to highest: experiment defaults, the output-directory
    environment variable, the config file, command-line overrides.
    """
    cfg = RunConfig(experiment=experiment)
    cfg = replace(cfg, **_EXPERIMENT_DEFAULTS.get(experiment, {}))
    env_out = os.environ.get(OUTPUT_ENV_VAR)
    if env_out:
        cfg = replace(cfg, out_dir=Path(env_out))
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        parsed = parse_config_text(text)
        parsed.pop("experiment", None)
        cfg = replace(cfg, **parsed)
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg


def config_hash(cfg: RunConfig) -> str:
    """Deterministic 12-hex digest of the effective configuration."""
    echo = cfg.echo()
    canon = "\n".join(f"{k}={echo[k]!r}" for k in sorted(echo))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]

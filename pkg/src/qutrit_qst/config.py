"""Run configuration in the units the device is usually quoted in.

Frequencies are given as f = omega / 2pi (MHz or GHz) and decay channels as
lifetimes in microseconds. Conversion to rad/ns and 1/ns happens here and
nowhere else. A lifetime of ``null`` switches its channel off.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .dynamics import IntegratorConfig
from .hilbert import DomainError, SpaceLayout
from .model import ModelParams
from .protocol import InputState

TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    """Invalid configuration file or value; the message names the key."""


def mhz_to_rad_per_ns(f_mhz: float) -> float:
    return TWO_PI * f_mhz * 1e-3


def ghz_to_rad_per_ns(f_ghz: float) -> float:
    return TWO_PI * f_ghz


def rad_per_ns_to_mhz(w: float) -> float:
    return w / TWO_PI * 1e3


def lifetime_us_to_rate(t_us: float | None) -> float:
    if t_us is None:
        return 0.0
    return 1.0 / (1e3 * t_us)


def rate_to_lifetime_us(rate: float) -> float | None:
    return None if rate == 0 else 1.0 / (1e3 * rate)


@dataclass(frozen=True)
class RunConfig:
    Omega_over_2pi_MHz: float = 100.0
    omega_c1_over_2pi_GHz: float = 4.5
    omega_c2_over_2pi_GHz: float = 7.0
    g_over_2pi_MHz: float = 100.0
    g12_ratio: float = 0.1
    delta_over_2pi_MHz: float = 0.0
    c: float = 1.0
    gamma_phi_e_inverse_us: float | None = 1.5
    gamma_phi_f_inverse_us: float | None = 0.5
    gamma_eg_inverse_us: float | None = 2.5
    gamma_fe_inverse_us: float | None = 2.5
    gamma_fg_inverse_us: float | None = 2.5
    kappa_inverse_us: float | None = 20.0
    alpha_re: float = 1 / math.sqrt(3)
    alpha_im: float = 0.0
    beta_re: float = 1 / math.sqrt(3)
    beta_im: float = 0.0
    gamma_re: float = 1 / math.sqrt(3)
    gamma_im: float = 0.0
    n_max: int = 1
    dt_ns: float = 1e-3
    refine_factor: int = 2
    convergence_tol: float = 1e-6
    reset_clock: bool = False
    out: str | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "out":
                if v is not None and not isinstance(v, str):
                    raise ConfigError(f"{f.name}: expected a path string, got {v!r}")
                continue
            if f.name == "reset_clock":
                if not isinstance(v, bool):
                    raise ConfigError(f"{f.name}: expected true/false, got {v!r}")
                continue
            if f.name.endswith("_inverse_us") and v is None:
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{f.name}: expected a finite number, got {v!r}")
            if f.name.endswith("_inverse_us") and v <= 0:
                raise ConfigError(f"{f.name}: lifetime must be positive or null, got {v!r}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ConfigError(f"n_max: must be an integer >= 1, got {self.n_max!r}")
        if self.dt_ns <= 0:
            raise ConfigError(f"dt_ns: must be positive, got {self.dt_ns!r}")
        # surface the model-level invariants under their config key names
        for key, build in (("alpha_re", self.input_state), ("dt_ns", self.integrator),
                           ("g_over_2pi_MHz", self.params)):
            try:
                build()
            except DomainError as exc:
                raise ConfigError(f"{key}: {exc}") from exc

    def params(self) -> ModelParams:
        g = mhz_to_rad_per_ns(self.g_over_2pi_MHz)
        kappa = lifetime_us_to_rate(self.kappa_inverse_us)
        return ModelParams(
            g_eg_1=g, g_eg_2=g, g_fg_1=self.c * g, g_fg_2=self.c * g,
            g12=self.g12_ratio * g,
            delta=mhz_to_rad_per_ns(self.delta_over_2pi_MHz),
            omega_c1=ghz_to_rad_per_ns(self.omega_c1_over_2pi_GHz),
            omega_c2=ghz_to_rad_per_ns(self.omega_c2_over_2pi_GHz),
            Omega=mhz_to_rad_per_ns(self.Omega_over_2pi_MHz),
            kappa_1=kappa, kappa_2=kappa,
            gamma_eg=lifetime_us_to_rate(self.gamma_eg_inverse_us),
            gamma_fe=lifetime_us_to_rate(self.gamma_fe_inverse_us),
            gamma_fg=lifetime_us_to_rate(self.gamma_fg_inverse_us),
            gamma_phi_e=lifetime_us_to_rate(self.gamma_phi_e_inverse_us),
            gamma_phi_f=lifetime_us_to_rate(self.gamma_phi_f_inverse_us),
            layout=SpaceLayout(int(self.n_max)),
        )

    def input_state(self) -> InputState:
        return InputState(complex(self.alpha_re, self.alpha_im),
                          complex(self.beta_re, self.beta_im),
                          complex(self.gamma_re, self.gamma_im))

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(self.dt_ns, int(self.refine_factor), self.convergence_tol)

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "RunConfig":
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
        return RunConfig(**{**self.to_dict(), **changes})


def parse_config(path) -> RunConfig:
    """Read a flat JSON object of overrides on top of the default parameters."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return RunConfig().replace(**data)


def dump_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")

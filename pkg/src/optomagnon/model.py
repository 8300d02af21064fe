"""
Parameter space of the opto-magnomechanical model.

Everything inside the library is angular frequency (rad/s).  Config
documents, CSV output and presets quote ordinary frequencies nu = omega/2pi
in Hz, which is how experimental rates are usually written down.

Config schema (JSON object)::

    {
      "omega_b1": 1e7, "omega_b2": 1e7,        # or "omega_b" for both
      "kappa_c": 2e6, "kappa_a": 1.5e6, "kappa_m": 1.5e6,
      "gamma_b1": 100, "gamma_b2": 100,        # or "gamma_b" for both
      "g_a": 2e6,
      "lambda_sq": 2e6,                        # or "lambda_over_kappa_c": 0.5
      "theta": 0.0,                            # rad
      "Delta_a": -1e7,
      "eps_p": 1.0,                            # optional, arbitrary units
      "detuning_mode": "prescribed",           # or "self_consistent"
      "prescribed": {"Delta_c_eff": 1e7, "Delta_m_eff": -1e7,
                     "G_c1": 3.2e6, "G_c2": 4.8e6, "G_m": 4.8e6},
      "first_principles": {"Delta_c": ..., "Delta_m": ..., "g_1": ...,
                           "g_2": ..., "g_m": ..., "eps_L": ..., "Omega": ...}
    }

Exactly one of ``prescribed`` / ``first_principles`` must be present.  Any
frequency key may instead be given in angular units with a ``_rad_s`` suffix
(``"kappa_c_rad_s": 1.2566e7``); :func:`emit_config` falls back to that form
only when no Hz float converts back bit-exactly.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

TWO_PI = 2.0 * math.pi
MHZ = 1e6


class ConfigError(ValueError):
    """Raised for missing keys, bad values or inconsistent config blocks."""


class DetuningMode(str, enum.Enum):
    PRESCRIBED = "prescribed"
    SELF_CONSISTENT = "self_consistent"


@dataclass(frozen=True)
class Prescribed:
    """Effective detunings and real, non-negative effective couplings [rad/s]."""

    Delta_c_eff: float
    Delta_m_eff: float
    G_c1: float
    G_c2: float
    G_m: float


@dataclass(frozen=True)
class FirstPrinciples:
    """Bare detunings, single-quantum couplings and drive amplitudes [rad/s]."""

    Delta_c: float
    Delta_m: float
    g_1: float
    g_2: float
    g_m: float
    eps_L: float
    Omega: float


@dataclass(frozen=True)
class SystemParams:
    omega_b1: float
    omega_b2: float
    kappa_c: float
    kappa_a: float
    kappa_m: float
    gamma_b1: float
    gamma_b2: float
    g_a: float
    lambda_sq: float
    theta: float
    Delta_a: float
    detuning_mode: DetuningMode = DetuningMode.PRESCRIBED
    prescribed: Prescribed | None = None
    first_principles: FirstPrinciples | None = None
    eps_p: float = 1.0

    def __post_init__(self):
        validate(self)

    @property
    def omega_b(self) -> float:
        """Reference mechanical frequency used to normalise detunings."""
        return self.omega_b1

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SweepSpec:
    """Probe-detuning grid in units of omega_b1, plus an optional parameter sweep.

    ``swept_param`` is ``(name, values)`` with values in config units, i.e.
    Hz for frequencies, rad for ``theta`` and plain multiples for
    ``lambda_over_kappa_c``.
    """

    delta_min: float = 0.0
    delta_max: float = 2.0
    n_points: int = 4001
    swept_param: tuple[str, tuple[float, ...]] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.delta_min) and np.isfinite(self.delta_max)):
            raise ConfigError("sweep bounds must be finite")
        if not self.delta_min < self.delta_max:
            raise ConfigError(
                f"delta_min ({self.delta_min}) must be below delta_max ({self.delta_max})")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ConfigError(f"n_points must be an integer >= 3, got {self.n_points}")
        if self.swept_param is not None:
            name, values = self.swept_param
            values = tuple(float(v) for v in values)
            if not values:
                raise ConfigError(f"sweep over {name!r} has no values")
            object.__setattr__(self, "swept_param", (str(name), values))

    def grid(self) -> np.ndarray:
        """Normalised detunings delta/omega_b."""
        return np.linspace(self.delta_min, self.delta_max, int(self.n_points))

    def deltas(self, omega_b: float) -> np.ndarray:
        return self.grid() * omega_b


_RATE_FIELDS = ("kappa_c", "kappa_a", "kappa_m", "gamma_b1", "gamma_b2")
_TOP_FREQ_FIELDS = ("omega_b1", "omega_b2", "kappa_c", "kappa_a", "kappa_m",
                    "gamma_b1", "gamma_b2", "g_a", "lambda_sq", "Delta_a")
_PRESCRIBED_FIELDS = tuple(f.name for f in dataclasses.fields(Prescribed))
_FIRST_PRINCIPLES_FIELDS = tuple(f.name for f in dataclasses.fields(FirstPrinciples))


def validate(p: SystemParams) -> None:
    for name in _TOP_FREQ_FIELDS + ("theta", "eps_p"):
        v = getattr(p, name)
        if not isinstance(v, (int, float, np.floating)) or not math.isfinite(v):
            raise ConfigError(f"{name} must be a finite real number, got {v!r}")
    for name in _RATE_FIELDS + ("omega_b1", "omega_b2"):
        if getattr(p, name) <= 0:
            raise ConfigError(f"non-positive rate: {name} = {getattr(p, name)}")
    if p.lambda_sq < 0:
        raise ConfigError(f"lambda_sq must be >= 0, got {p.lambda_sq}")
    mode = DetuningMode(p.detuning_mode)
    object.__setattr__(p, "detuning_mode", mode)
    if mode is DetuningMode.PRESCRIBED:
        if p.prescribed is None or p.first_principles is not None:
            raise ConfigError("prescribed mode needs exactly the 'prescribed' block")
        for name in ("G_c1", "G_c2", "G_m"):
            if getattr(p.prescribed, name) < 0:
                raise ConfigError(f"effective coupling {name} must be >= 0")
        blk = p.prescribed
    else:
        if p.first_principles is None or p.prescribed is not None:
            raise ConfigError("self-consistent mode needs exactly the 'first_principles' block")
        blk = p.first_principles
    for f in dataclasses.fields(blk):
        v = getattr(blk, f.name)
        if not math.isfinite(v):
            raise ConfigError(f"{f.name} must be finite, got {v!r}")


# --------------------------------------------------------------------------
# config <-> params

def _read_freq(cfg: Mapping[str, Any], key: str, where: str = "") -> float:
    if key + "_rad_s" in cfg:
        return float(cfg[key + "_rad_s"])
    if key not in cfg:
        raise ConfigError(f"missing required key {where}{key!r}")
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}{key} must be a number (Hz), got {v!r}")
    return float(v) * TWO_PI


def _read_shared(cfg, key, pair):
    """omega_b / gamma_b shorthand sets both mechanical modes."""
    out = []
    for k in pair:
        if k in cfg or k + "_rad_s" in cfg:
            out.append(_read_freq(cfg, k))
        elif key in cfg or key + "_rad_s" in cfg:
            out.append(_read_freq(cfg, key))
        else:
            raise ConfigError(f"missing required key {k!r} (or shorthand {key!r})")
    return out


def build_params(config: Mapping[str, Any]) -> SystemParams:
    """Validate a config document (Hz units) and convert it to :class:`SystemParams`."""
    if not isinstance(config, Mapping):
        raise ConfigError("config must be a mapping")
    cfg = dict(config)
    omega_b1, omega_b2 = _read_shared(cfg, "omega_b", ("omega_b1", "omega_b2"))
    gamma_b1, gamma_b2 = _read_shared(cfg, "gamma_b", ("gamma_b1", "gamma_b2"))
    kappa_c = _read_freq(cfg, "kappa_c")
    if "lambda_over_kappa_c" in cfg:
        if "lambda_sq" in cfg or "lambda_sq_rad_s" in cfg:
            raise ConfigError("give either lambda_sq or lambda_over_kappa_c, not both")
        lambda_sq = float(cfg["lambda_over_kappa_c"]) * kappa_c
    elif "lambda_sq" in cfg or "lambda_sq_rad_s" in cfg:
        lambda_sq = _read_freq(cfg, "lambda_sq")
    else:
        lambda_sq = 0.0

    has_p = cfg.get("prescribed") is not None
    has_f = cfg.get("first_principles") is not None
    if has_p == has_f:
        raise ConfigError("exactly one of 'prescribed' / 'first_principles' must be present")
    mode = cfg.get("detuning_mode",
                   DetuningMode.PRESCRIBED.value if has_p else DetuningMode.SELF_CONSISTENT.value)
    try:
        mode = DetuningMode(mode)
    except ValueError:
        raise ConfigError(f"unknown detuning_mode {mode!r}") from None

    prescribed = first = None
    if has_p:
        blk = cfg["prescribed"]
        prescribed = Prescribed(**{k: _read_freq(blk, k, "prescribed.")
                                   for k in _PRESCRIBED_FIELDS})
    else:
        blk = cfg["first_principles"]
        first = FirstPrinciples(**{k: _read_freq(blk, k, "first_principles.")
                                   for k in _FIRST_PRINCIPLES_FIELDS})

    return SystemParams(
        omega_b1=omega_b1, omega_b2=omega_b2,
        kappa_c=kappa_c, kappa_a=_read_freq(cfg, "kappa_a"), kappa_m=_read_freq(cfg, "kappa_m"),
        gamma_b1=gamma_b1, gamma_b2=gamma_b2,
        g_a=_read_freq(cfg, "g_a"),
        lambda_sq=lambda_sq,
        theta=float(cfg.get("theta", 0.0)),
        Delta_a=_read_freq(cfg, "Delta_a"),
        detuning_mode=mode, prescribed=prescribed, first_principles=first,
        eps_p=float(cfg.get("eps_p", 1.0)),
    )


def _hz_exact(x: float) -> float | None:
    """A float v with v * 2pi == x bit-exactly, if one exists near x / 2pi."""
    v = x / TWO_PI
    if v * TWO_PI == x:
        return v
    lo = hi = v
    for _ in range(8):
        lo, hi = math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf)
        for cand in (lo, hi):
            if cand * TWO_PI == x:
                return cand
    return None


def _emit_freq(out: dict, key: str, x: float) -> None:
    v = _hz_exact(x)
    if v is None:
        out[key + "_rad_s"] = x
    else:
        out[key] = v


def emit_config(p: SystemParams) -> dict:
    """Inverse of :func:`build_params`; ``build_params(emit_config(p)) == p``."""
    out: dict[str, Any] = {}
    for name in _TOP_FREQ_FIELDS:
        _emit_freq(out, name, getattr(p, name))
    out["theta"] = p.theta
    out["eps_p"] = p.eps_p
    out["detuning_mode"] = p.detuning_mode.value
    if p.prescribed is not None:
        blk: dict[str, Any] = {}
        for name in _PRESCRIBED_FIELDS:
            _emit_freq(blk, name, getattr(p.prescribed, name))
        out["prescribed"] = blk
    if p.first_principles is not None:
        blk = {}
        for name in _FIRST_PRINCIPLES_FIELDS:
            _emit_freq(blk, name, getattr(p.first_principles, name))
        out["first_principles"] = blk
    return out


def with_config_value(p: SystemParams, name: str, value: float) -> SystemParams:
    """Copy of ``p`` with one config-level key overridden (config units).

    ``name`` may be a top-level key, ``lambda_over_kappa_c``, ``omega_b`` /
    ``gamma_b`` shorthands, or a key of the active mode block.
    """
    cfg = emit_config(p)
    blocks = [b for b in ("prescribed", "first_principles") if b in cfg]

    def drop(d, key):
        d.pop(key, None)
        d.pop(key + "_rad_s", None)

    if name == "lambda_over_kappa_c":
        drop(cfg, "lambda_sq")
        cfg[name] = value
    elif name in ("omega_b", "gamma_b"):
        for k in (name + "1", name + "2"):
            drop(cfg, k)
        cfg[name] = value
    elif name in _TOP_FREQ_FIELDS:
        drop(cfg, name)
        cfg[name] = value
    elif name in ("theta", "eps_p"):
        cfg[name] = value
    elif blocks and name in (_PRESCRIBED_FIELDS if blocks[0] == "prescribed"
                             else _FIRST_PRINCIPLES_FIELDS):
        drop(cfg[blocks[0]], name)
        cfg[blocks[0]][name] = value
    else:
        raise ConfigError(f"cannot sweep unknown parameter {name!r}")
    return build_params(cfg)


# --------------------------------------------------------------------------
# figure presets

_BASE = {
    "omega_b": 10 * MHZ,
    "gamma_b": 100.0,
    "kappa_c": 2 * MHZ,
    "kappa_a": 1.5 * MHZ,
    "kappa_m": 1.5 * MHZ,
    "g_a": 2 * MHZ,
    "lambda_over_kappa_c": 0.5,
    "theta": 0.0,
    "Delta_a": -10 * MHZ,
}
_BASE_PRESCRIBED = {
    "Delta_c_eff": 10 * MHZ,
    "Delta_m_eff": -10 * MHZ,
    "G_c1": 3.2 * MHZ,
    "G_c2": 4.8 * MHZ,
    "G_m": 4.8 * MHZ,
}

_SQUEEZE_LEVELS = (0.0, 0.15, 0.5, 0.9)
_GA_LEVELS_HZ = (0.0, 1 * MHZ, 1.5 * MHZ, 3 * MHZ)


@dataclass(frozen=True)
class _Preset:
    top: dict = field(default_factory=dict)
    blk: dict = field(default_factory=dict)
    sweep: tuple[str, tuple[float, ...]] | None = None
    note: str = ""


PRESETS: dict[str, _Preset] = {
    "fig2a": _Preset({"g_a": 0.0}, {"G_c1": 0.0, "G_c2": 0.0}),
    "fig2b": _Preset({"g_a": 0.0}, {"G_c1": 0.0}),
    "fig2c": _Preset({"g_a": 0.0}),
    "fig2d": _Preset({"g_a": 2 * MHZ}),
    "fig2e": _Preset({"g_a": 2.4 * MHZ}),
    "fig3a": _Preset({"g_a": 0.0}, {"G_c1": 0.0},
                     sweep=("G_c2", (0.0, 2 * MHZ, 4 * MHZ, 8 * MHZ))),
    # 3.3 MHz belongs to the G_c1 series
    "fig3b": _Preset({"g_a": 0.0},
                     sweep=("G_c1", (0.0, 2 * MHZ, 3.1 * MHZ, 3.2 * MHZ, 3.3 * MHZ))),
    # same squeezing levels as fig8
    "fig4a": _Preset({"g_a": 2.4 * MHZ}, sweep=("lambda_over_kappa_c", _SQUEEZE_LEVELS),
                     note="absorption Re[eps_out]; squeezing levels assumed"),
    "fig4b": _Preset({"g_a": 2.4 * MHZ}, sweep=("lambda_over_kappa_c", _SQUEEZE_LEVELS),
                     note="dispersion Im[eps_out]; squeezing levels assumed"),
    "fig5a_fano": _Preset({"g_a": 0.0}, {"G_c1": 3.5 * MHZ, "Delta_c_eff": 9 * MHZ}),
    "fig5b_fano": _Preset({"g_a": 0.0}, {"G_c1": 3.5 * MHZ}),
    "fig_phase_a": _Preset({"g_a": 0.0}, {"G_c1": 0.0}),
    "fig_phase_b": _Preset({"g_a": 0.0}),
    "fig_phase_c": _Preset({"g_a": 2 * MHZ}),
    "fig_phase_d": _Preset({"g_a": 3 * MHZ}),
    "fig6a": _Preset({"g_a": 0.0, "lambda_over_kappa_c": 0.0}, {"G_c1": 3.5 * MHZ},
                     sweep=("g_a", _GA_LEVELS_HZ)),
    "fig6b": _Preset({"g_a": 0.0}, {"G_c1": 3.5 * MHZ}, sweep=("g_a", _GA_LEVELS_HZ)),
    # g_a/2pi = 1 MHz is an assumption
    "fig8": _Preset({"g_a": 1 * MHZ}, {"G_c1": 3.5 * MHZ},
                    sweep=("lambda_over_kappa_c", _SQUEEZE_LEVELS),
                    note="g_a/2pi = 1 MHz assumed"),
}


def preset_config(figure_id: str) -> dict:
    """Config document (Hz units) for a figure preset, without its sweep."""
    try:
        pre = PRESETS[figure_id]
    except KeyError:
        raise ConfigError(
            f"unknown figure_id {figure_id!r}; choose from {', '.join(PRESETS)}") from None
    cfg = {**_BASE, **pre.top}
    cfg["prescribed"] = {**_BASE_PRESCRIBED, **pre.blk}
    return cfg


def paper_preset(figure_id: str) -> tuple[SystemParams, SweepSpec]:
    """Parameters and default grid (delta/omega_b in [0, 2], 4001 points) of a figure."""
    params = build_params(preset_config(figure_id))
    return params, SweepSpec(0.0, 2.0, 4001, PRESETS[figure_id].sweep)

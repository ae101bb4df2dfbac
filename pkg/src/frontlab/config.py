"""Experiment configs: flat ``key = value`` text with dotted keys.

Example::

    name = fig3
    mode = pde
    a = 0.3
    defect.kind = gaussian
    defect.s0 = 0.3
    defect.s1 = 7
    defect.d = 0.3
    init.x0 = -20

Keys of the form ``panel.<id>.<key>`` define extra panels that override the
base keys; a config with panels runs once per panel. A panel that sets
``defect.kind`` replaces the base defect entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from . import cv
from .defects import Dirac, Gaussian, Heaviside, Tanh, from_mapping, is_evaluable
from .errors import ConfigError

MODES = ("pde", "cv", "compare", "pinning-threshold", "invert", "sweep", "sources")
CV_KINDS = ("general", "adiabatic", "adiabatic-taylor", "dirac", "heaviside")

DEFAULTS = {
    "a": "0.3",
    "grid.x_min": "-100",
    "grid.x_max": "100",
    "grid.n": "4000",
    "solver.rtol": "1e-8",
    "solver.atol": "1e-8",
    "solver.dt_out": "1",
    "init.x0": "-20",
    "init.w": "equilibrium",
    "output.dir": "out",
    "output.snapshot_every": "0",
    "pinning.stop": "false",
    "threshold.rtol": "0.01",
    "threshold.engine": "pde",
    "sweep.mode": "pde",
    "sweep.workers": "1",
    "invert.smooth": "0",
    "sources.lo": "-10",
    "sources.hi": "10",
    "sources.steps": "401",
}

KNOWN_KEYS = set(DEFAULTS) | {
    "name", "mode", "description", "solver.t_max", "cv.kind",
    "threshold.param", "threshold.lo", "threshold.hi",
    "sweep.param", "sweep.lo", "sweep.hi", "sweep.steps",
    "sources.kind",
}
DEFECT_FIELDS = {"s", "s0", "s1", "d", "s_l", "s_r", "alpha", "beta", "center"}


def parse_text(text):
    """Parse config text into an ordered ``{key: raw string}`` mapping."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"line {lineno}: expected 'key = value', got {raw.strip()!r}"])
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError([f"line {lineno}: empty key"])
        if key in values:
            raise ConfigError([f"line {lineno}: duplicate key {key!r}"])
        values[key] = value
    return values


def format_text(values):
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def _is_known(key):
    if key in KNOWN_KEYS or key == "defect.kind":
        return True
    return key.startswith("defect.") and key[len("defect."):] in DEFECT_FIELDS


@dataclass(frozen=True)
class ExperimentConfig:
    """Raw key/value settings with typed accessors; defaults fill missing keys."""

    values: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, text):
        return cls(parse_text(text))

    @classmethod
    def load(cls, path):
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def to_text(self):
        return format_text(self.values)

    # -- access ------------------------------------------------------------

    def raw(self, key, default=None):
        if key in self.values:
            return self.values[key]
        return DEFAULTS.get(key, default)

    def num(self, key):
        v = self.raw(key)
        if v is None:
            raise KeyError(key)
        return float(v)

    def integer(self, key):
        v = float(self.num(key))
        if v != int(v):
            raise ValueError(f"{key} must be an integer")
        return int(v)

    def flag(self, key):
        return str(self.raw(key, "false")).lower() in ("1", "true", "yes", "on")

    @property
    def name(self):
        return self.raw("name", "")

    @property
    def mode(self):
        return self.raw("mode", "")

    def defect(self):
        spec = {k[len("defect."):]: v for k, v in self.values.items()
                if k.startswith("defect.") and k != "defect.kind"}
        spec["kind"] = self.raw("defect.kind")
        return from_mapping(spec)

    def with_overrides(self, overrides):
        merged = dict(self.values)
        merged.update({k: str(v) for k, v in overrides.items()})
        return ExperimentConfig(merged)

    def panels(self):
        """``[(panel_id or None, config)]``; panel keys are folded into each copy."""
        base = {k: v for k, v in self.values.items() if not k.startswith("panel.")}
        found = {}
        for k, v in self.values.items():
            if k.startswith("panel."):
                rest = k[len("panel."):]
                pid, _, sub = rest.partition(".")
                found.setdefault(pid, {})[sub] = v
        if not found:
            return [(None, ExperimentConfig(base))]
        out = []
        for pid, over in found.items():
            merged = dict(base)
            if "defect.kind" in over:
                merged = {k: v for k, v in merged.items() if not k.startswith("defect.")}
            merged.update(over)
            out.append((pid, ExperimentConfig(merged)))
        return out


# --- validation --------------------------------------------------------------


def _check_number(cfg, key, out, positive=False, integer=False):
    try:
        v = cfg.num(key)
    except KeyError:
        out.append(f"missing required key {key}")
        return None
    except ValueError:
        out.append(f"{key} is not a number: {cfg.raw(key)!r}")
        return None
    if not math.isfinite(v):
        out.append(f"{key} must be finite")
        return None
    if positive and not v > 0:
        out.append(f"{key} must be positive")
    if integer and v != int(v):
        out.append(f"{key} must be an integer")
    return v


def _check_model(kind, defect, out):
    if kind not in CV_KINDS:
        out.append(f"unknown cv.kind {kind!r} (expected one of {', '.join(CV_KINDS)})")
        return
    if defect is None:
        return
    if kind in ("general", "adiabatic", "adiabatic-taylor") and not is_evaluable(defect):
        label = {"general": "General", "adiabatic": "Adiabatic", "adiabatic-taylor": "AdiabaticTaylor"}[kind]
        out.append(f"{label} model rejects Dirac")
    if kind == "adiabatic-taylor" and isinstance(defect, Heaviside):
        out.append("AdiabaticTaylor model needs a differentiable defect")
    if kind == "dirac" and not isinstance(defect, (Dirac, Gaussian)):
        out.append("dirac model needs a Dirac or Gaussian defect")
    if kind == "heaviside" and not isinstance(defect, (Heaviside, Tanh)):
        out.append("heaviside model needs a Heaviside or Tanh defect")


def _validate_one(cfg):
    out = []
    for key in cfg.values:
        if not _is_known(key):
            out.append(f"unknown key {key!r}")
    if not cfg.name:
        out.append("missing required key name")
    mode = cfg.mode
    if mode not in MODES:
        out.append(f"unknown mode {mode!r} (expected one of {', '.join(MODES)})")
        return out
    a = _check_number(cfg, "a", out)
    if a is not None and not 0.0 < a < 1.0:
        out.append("a must lie in (0, 1)")
    if mode == "sources":
        if cfg.raw("sources.kind") not in ("dirac", "heaviside"):
            out.append("sources.kind must be dirac or heaviside")
        lo = _check_number(cfg, "sources.lo", out)
        hi = _check_number(cfg, "sources.hi", out)
        steps = _check_number(cfg, "sources.steps", out, integer=True)
        if lo is not None and hi is not None and not hi > lo:
            out.append("sources.hi must exceed sources.lo")
        if steps is not None and steps < 2:
            out.append("sources.steps must be at least 2")
        return out

    defect = None
    if cfg.raw("defect.kind") is None:
        out.append("missing required key defect.kind")
    else:
        try:
            defect = cfg.defect()
        except (KeyError, TypeError, ValueError) as exc:
            out.append(f"invalid defect: {exc}")

    uses_pde = mode in ("pde", "compare", "invert") or (
        mode == "pinning-threshold" and cfg.raw("threshold.engine") == "pde"
    ) or (mode == "sweep" and cfg.raw("sweep.mode") in ("pde", "compare"))
    uses_cv = mode in ("cv", "compare") or (
        mode == "pinning-threshold" and cfg.raw("threshold.engine") == "cv"
    ) or (mode == "sweep" and cfg.raw("sweep.mode") in ("cv", "compare"))

    if uses_pde:
        n = _check_number(cfg, "grid.n", out, integer=True)
        if n is not None and n < 3:
            out.append("grid too small")
        x_min = _check_number(cfg, "grid.x_min", out)
        x_max = _check_number(cfg, "grid.x_max", out)
        if x_min is not None and x_max is not None and not x_max > x_min:
            out.append("grid.x_max must exceed grid.x_min")
        x0 = _check_number(cfg, "init.x0", out)
        if None not in (x0, x_min, x_max) and not x_min < x0 < x_max:
            out.append("init.x0 must lie inside the grid")
        if isinstance(defect, Dirac):
            out.append("PDE runs reject Dirac defects (use a narrow Gaussian)")
    for key in ("solver.rtol", "solver.atol", "solver.dt_out"):
        _check_number(cfg, key, out, positive=True)
    t_max = _check_number(cfg, "solver.t_max", out, positive=True)
    dt_out = cfg.raw("solver.dt_out")
    try:
        if t_max is not None and float(dt_out) > t_max:
            out.append("solver.dt_out must not exceed solver.t_max")
    except ValueError:
        pass
    _check_number(cfg, "init.x0", out)
    if cfg.raw("init.w") != "equilibrium":
        _check_number(cfg, "init.w", out, positive=True)
    snap = _check_number(cfg, "output.snapshot_every", out, integer=True)
    if snap is not None and snap < 0:
        out.append("output.snapshot_every must be >= 0")
    if uses_cv:
        kind = cfg.raw("cv.kind")
        if kind is None:
            out.append("missing required key cv.kind")
        else:
            _check_model(kind, defect, out)

    if mode == "pinning-threshold":
        if cfg.raw("threshold.engine") not in ("pde", "cv"):
            out.append("threshold.engine must be pde or cv")
        _check_param(cfg, "threshold", out)
        _check_number(cfg, "threshold.rtol", out, positive=True)
    if mode == "sweep":
        if cfg.raw("sweep.mode") not in ("pde", "cv", "compare"):
            out.append("sweep.mode must be pde, cv or compare")
        _check_param(cfg, "sweep", out)
        steps = _check_number(cfg, "sweep.steps", out, integer=True)
        if steps is not None and steps < 1:
            out.append("sweep.steps must be at least 1")
        workers = _check_number(cfg, "sweep.workers", out, integer=True)
        if workers is not None and workers < 1:
            out.append("sweep.workers must be at least 1")
    if mode == "invert":
        if a is not None and abs(a - 0.5) < 1e-12:
            out.append("invert needs a != 1/2")
        smooth = _check_number(cfg, "invert.smooth", out, integer=True)
        if smooth is not None and smooth != 0 and (smooth < 1 or smooth % 2 == 0):
            out.append("invert.smooth must be 0 (off) or a positive odd integer")
        if defect is not None and not is_evaluable(defect):
            out.append("invert needs a pointwise-evaluable truth defect")
    return out


def _check_param(cfg, prefix, out):
    param = cfg.raw(f"{prefix}.param")
    if param is None:
        out.append(f"missing required key {prefix}.param")
    elif not _is_known(param) or param.startswith(("threshold.", "sweep.", "panel.")):
        out.append(f"{prefix}.param {param!r} is not a settable key")
    lo = _check_number(cfg, f"{prefix}.lo", out)
    hi = _check_number(cfg, f"{prefix}.hi", out)
    if lo is not None and hi is not None and not hi > lo:
        out.append(f"{prefix}.hi must exceed {prefix}.lo")


def validate(cfg):
    """List of human-readable violations; empty means the config is runnable."""
    out = []
    for pid, sub in cfg.panels():
        tag = "" if pid is None else f"panel {pid}: "
        out.extend(tag + v for v in _validate_one(sub))
    return out


def require_valid(cfg):
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def build_model(cfg, defect):
    """CV model kind for a config, converting Gaussian/Tanh for point/step models."""
    from .defects import dirac_equivalent, heaviside_equivalent

    kind = cfg.raw("cv.kind")
    if kind == "dirac" and isinstance(defect, Gaussian):
        defect = dirac_equivalent(defect)
    if kind == "heaviside" and isinstance(defect, Tanh):
        defect = heaviside_equivalent(defect)
    return cv.model_for(kind, defect)

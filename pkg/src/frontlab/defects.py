"""Localized defect profiles s(x) multiplying the reaction term.

Five variants are provided as frozen dataclasses. ``Constant``, ``Gaussian``,
``Tanh`` and ``Heaviside`` can be sampled pointwise; ``Dirac`` is a
distribution and only enters the reduced models in closed form.

The Gaussian keeps the width parameter unsquared, ``exp(-x**2 / (2 d))``, so
``d`` carries units of length squared and the standard deviation is
``sqrt(d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from .errors import DomainError, NotEvaluableError


def _require(cond, message):
    if not cond:
        raise DomainError(message)


@dataclass(frozen=True)
class Constant:
    s: float
    center: float = 0.0

    kind = "constant"

    def __post_init__(self):
        _require(self.s > 0, f"constant defect needs s > 0, got {self.s}")


@dataclass(frozen=True)
class Gaussian:
    s0: float
    s1: float
    d: float
    center: float = 0.0

    kind = "gaussian"

    def __post_init__(self):
        _require(self.s0 > 0, f"gaussian baseline s0 must be > 0, got {self.s0}")
        _require(self.d > 0, f"gaussian scale d must be > 0, got {self.d}")


@dataclass(frozen=True)
class Tanh:
    s_l: float
    s_r: float
    d: float
    center: float = 0.0

    kind = "tanh"

    def __post_init__(self):
        _require(self.s_l > 0 and self.s_r > 0, "tanh levels s_l and s_r must be > 0")
        _require(self.d > 0, f"tanh transition length d must be > 0, got {self.d}")


@dataclass(frozen=True)
class Dirac:
    alpha: float
    beta: float
    center: float = 0.0

    kind = "dirac"

    def __post_init__(self):
        _require(self.alpha > 0, f"dirac baseline alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class Heaviside:
    alpha: float
    beta: float
    center: float = 0.0

    kind = "heaviside"

    def __post_init__(self):
        _require(self.alpha > 0, f"heaviside baseline alpha must be > 0, got {self.alpha}")
        _require(self.alpha + self.beta > 0, "heaviside needs alpha + beta > 0")


DefectSpec = Union[Constant, Gaussian, Tanh, Dirac, Heaviside]

VARIANTS = {cls.kind: cls for cls in (Constant, Gaussian, Tanh, Dirac, Heaviside)}


def is_evaluable(spec):
    return not isinstance(spec, Dirac)


def eval_defect(spec, x):
    """Evaluate s(x) for a pointwise-evaluable defect.

    ``x`` may be a scalar or an array; the result has the same shape. The
    Heaviside step takes the value 1/2 exactly at the jump.
    """
    if isinstance(spec, Dirac):
        raise NotEvaluableError("a Dirac defect is not pointwise evaluable")
    scalar = np.ndim(x) == 0
    xs = np.asarray(x, dtype=float) - spec.center
    if isinstance(spec, Constant):
        out = np.full_like(xs, spec.s)
    elif isinstance(spec, Gaussian):
        out = spec.s0 + spec.s1 * np.exp(-xs * xs / (2.0 * spec.d))
    elif isinstance(spec, Tanh):
        out = spec.s_l + 0.5 * (spec.s_r - spec.s_l) * (1.0 + np.tanh(xs / spec.d))
    elif isinstance(spec, Heaviside):
        out = spec.alpha + spec.beta * np.heaviside(xs, 0.5)
    else:
        raise TypeError(f"unknown defect type {type(spec).__name__}")
    return float(out) if scalar else out


def defect_derivative(spec, x):
    """Closed-form s'(x); available for the smooth variants only."""
    scalar = np.ndim(x) == 0
    xs = np.asarray(x, dtype=float) - spec.center
    if isinstance(spec, Constant):
        out = np.zeros_like(xs)
    elif isinstance(spec, Gaussian):
        out = -spec.s1 * xs / spec.d * np.exp(-xs * xs / (2.0 * spec.d))
    elif isinstance(spec, Tanh):
        e = np.exp(-2.0 * np.abs(xs / spec.d))  # sech^2 without overflowing cosh
        out = (spec.s_r - spec.s_l) / (2.0 * spec.d) * 4.0 * e / (1.0 + e) ** 2
    else:
        raise TypeError(f"no analytic derivative for {type(spec).__name__} defects")
    return float(out) if scalar else out


def dirac_equivalent(g):
    """Point-mass defect carrying the same integrated bump as a Gaussian.

    >>> dirac_equivalent(Gaussian(0.3, 5.0, 0.1)).beta  # doctest: +ELLIPSIS
    3.963...
    """
    if not isinstance(g, Gaussian):
        raise TypeError(f"dirac_equivalent needs a Gaussian defect, got {type(g).__name__}")
    return Dirac(alpha=g.s0, beta=g.s1 * math.sqrt(2.0 * math.pi * g.d), center=g.center)


def heaviside_equivalent(t):
    """Sharp step with the same far-field levels as a tanh transition."""
    if not isinstance(t, Tanh):
        raise TypeError(f"heaviside_equivalent needs a Tanh defect, got {type(t).__name__}")
    return Heaviside(alpha=t.s_l, beta=t.s_r - t.s_l, center=t.center)


def left_level(spec):
    """Far-field value of s as x -> -inf (sets the incoming front's width)."""
    if isinstance(spec, Constant):
        return spec.s
    if isinstance(spec, Gaussian):
        return spec.s0
    if isinstance(spec, Tanh):
        return spec.s_l
    return spec.alpha


def extent(spec):
    """Characteristic length of the defect; zero for the idealized variants."""
    if isinstance(spec, Gaussian):
        return math.sqrt(spec.d)
    if isinstance(spec, Tanh):
        return spec.d
    return 0.0


def to_mapping(spec):
    out = {"kind": spec.kind}
    out.update({f.name: getattr(spec, f.name) for f in fields(spec)})
    return out


def from_mapping(values):
    """Build a defect from ``{"kind": ..., <numeric fields>}``.

    Unknown keys raise ``KeyError``; missing required fields raise ``TypeError``.
    """
    values = dict(values)
    kind = str(values.pop("kind")).lower()
    try:
        cls = VARIANTS[kind]
    except KeyError:
        raise KeyError(f"unknown defect kind {kind!r}") from None
    allowed = {f.name for f in fields(cls)}
    extra = set(values) - allowed
    if extra:
        raise KeyError(f"unexpected keys for {kind} defect: {sorted(extra)}")
    return cls(**{k: float(v) for k, v in values.items()})

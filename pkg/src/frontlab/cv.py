"""Collective-variable (x0, w) models of the front.

Substituting the logistic profile U(z) = 1/(1 + e^z), z = (x - x0)/w, into the
equation and into its product with u, then integrating over x, gives two ODEs
for the front position and width. ``General`` evaluates the defect integrals
by adaptive quadrature; the other kinds are closed-form reductions for wide
(``Adiabatic``, ``AdiabaticTaylor``), point-mass (``DiracModel``) and step
(``HeavisideModel``) defects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate
from scipy.special import expit

from . import _dopri5
from .defects import Dirac, Heaviside, defect_derivative, eval_defect, extent, is_evaluable
from .errors import DomainError, NotEvaluableError
from .kinkfit import FrontTrajectory, KinkState
from .quadrature import gk15

Z_CUT = 40.0
QUAD_EPSABS = 1e-10
CV_RTOL = 1e-10
CV_ATOL = 1e-10


# --- profile and source terms ------------------------------------------------


def profile(z):
    """U(z) = 1 / (1 + e^z), evaluated without overflow."""
    return expit(-np.asarray(z, dtype=float))


def source_R(z, a):
    """R(U(z)) = -e^z (-1 + a + a e^z) / (1 + e^z)^3."""
    u = profile(z)
    v = expit(np.asarray(z, dtype=float))  # 1 - U without cancellation
    out = u * v * (u - a)
    return float(out) if np.ndim(out) == 0 else out


def source_R2(z, a):
    """(1 - 2U) R(U) = e^z (1 - e^z) (-1 + a + a e^z) / (1 + e^z)^4."""
    u = profile(z)
    v = expit(np.asarray(z, dtype=float))
    out = (v - u) * u * v * (u - a)
    return float(out) if np.ndim(out) == 0 else out


def heaviside_source_1(y, a):
    """Integral of R(U(z)) over z in [y, inf): q^2/2 - a q with q = 1/(1 + e^y)."""
    q = profile(y)
    out = 0.5 * q * q - a * q
    return float(out) if np.ndim(out) == 0 else out


def heaviside_source_2(y, a):
    """Integral of (1 - 2U) R(U) over [y, inf): -2q^3/3 + (1 + 2a) q^2/2 - a q."""
    q = profile(y)
    out = -2.0 / 3.0 * q**3 + 0.5 * (1.0 + 2.0 * a) * q * q - a * q
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MomentConstants:
    """Integrals of the kink profile over the real line that enter the reduction."""

    M_Uprime: float = -1.0
    M_zUprime: float = 0.0
    M_UUprime: float = -0.5
    M_zUUprime: float = 0.5
    M_Uprime2: float = 1.0 / 6.0


MOMENTS = MomentConstants()


def _dprofile(z):
    u = profile(z)
    return -u * expit(z)


def quadrature_moments(epsabs=1e-13):
    """Recompute the five moment constants by adaptive quadrature on the real line."""

    def q(f):
        return integrate.quad(f, -np.inf, np.inf, epsabs=epsabs, epsrel=1e-13, limit=200)[0]

    return MomentConstants(
        M_Uprime=q(_dprofile),
        M_zUprime=q(lambda z: z * _dprofile(z)),
        M_UUprime=q(lambda z: profile(z) * _dprofile(z)),
        M_zUUprime=q(lambda z: z * profile(z) * _dprofile(z)),
        M_Uprime2=q(lambda z: _dprofile(z) ** 2),
    )


# --- model kinds -------------------------------------------------------------


def _require_evaluable(defect, model):
    if not is_evaluable(defect):
        raise NotEvaluableError(f"{model} model rejects Dirac defects; use DiracModel")


@dataclass(frozen=True)
class General:
    defect: object

    def __post_init__(self):
        _require_evaluable(self.defect, "General")


@dataclass(frozen=True)
class Adiabatic:
    defect: object

    def __post_init__(self):
        _require_evaluable(self.defect, "Adiabatic")


@dataclass(frozen=True)
class AdiabaticTaylor:
    defect: object
    defect_derivative: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        _require_evaluable(self.defect, "AdiabaticTaylor")
        if self.defect_derivative is None:
            defect_derivative(self.defect, 0.0)  # raises for variants without s'

    def slope(self, x):
        if self.defect_derivative is not None:
            return float(self.defect_derivative(x))
        return defect_derivative(self.defect, x)


@dataclass(frozen=True)
class DiracModel:
    alpha: float
    beta: float
    center: float = 0.0

    @classmethod
    def from_defect(cls, d):
        return cls(d.alpha, d.beta, d.center)


@dataclass(frozen=True)
class HeavisideModel:
    alpha: float
    beta: float
    center: float = 0.0

    @classmethod
    def from_defect(cls, h):
        return cls(h.alpha, h.beta, h.center)


CvModelKind = Union[General, Adiabatic, AdiabaticTaylor, DiracModel, HeavisideModel]


def model_for(kind_name, defect):
    """Build a model kind from its name and a defect spec (used by configs)."""
    name = kind_name.lower()
    if name == "general":
        return General(defect)
    if name == "adiabatic":
        return Adiabatic(defect)
    if name in ("adiabatic-taylor", "taylor"):
        return AdiabaticTaylor(defect)
    if name == "dirac":
        if not isinstance(defect, Dirac):
            raise TypeError("dirac model needs a Dirac defect (see dirac_equivalent)")
        return DiracModel.from_defect(defect)
    if name == "heaviside":
        if not isinstance(defect, Heaviside):
            raise TypeError("heaviside model needs a Heaviside defect (see heaviside_equivalent)")
        return HeavisideModel.from_defect(defect)
    raise KeyError(f"unknown collective-variable model {kind_name!r}")


# --- right-hand sides --------------------------------------------------------


def general_integrals(defect, x0, w, a):
    """Quadrature of s(wz + x0) R(U) and s(wz + x0) U R(U) over z in [-40, 40].

    The defect centre, and points 1, 4 and 12 defect lengths either side of
    it, are added to the initial partition so narrow bumps and steps are
    never hidden between the nodes of a coarse interval.
    """
    edges = list(np.linspace(-Z_CUT, Z_CUT, 17))
    z_c = (getattr(defect, "center", 0.0) - x0) / w
    ext = extent(defect) / w
    for off in (0.0, -ext, ext, -4 * ext, 4 * ext, -12 * ext, 12 * ext):
        z = z_c + off
        if -Z_CUT < z < Z_CUT:
            edges.append(z)
    edges = np.unique(edges)

    def integrands(z):
        r = eval_defect(defect, w * z + x0) * source_R(z, a)
        return np.vstack([r, profile(z) * r])

    (i1, i2), _ = gk15(integrands, edges, epsabs=QUAD_EPSABS)
    return float(i1), float(i2)


def cv_rhs(kind, state, a):
    """(x0', w') for the chosen reduced model at ``state``."""
    x0, w = (state.x0, state.w) if isinstance(state, KinkState) else state
    if not w > 0:
        raise DomainError(f"front width must be positive, got {w}")
    drift = (1.0 - 2.0 * a) / 2.0
    if isinstance(kind, General):
        i1, i_ur = general_integrals(kind.defect, x0, w, a)
        return w * i1, 1.0 / (3.0 * w) + w * (i1 - 2.0 * i_ur)
    if isinstance(kind, (Adiabatic, AdiabaticTaylor)):
        s = eval_defect(kind.defect, x0)
        dx = drift * w * s
        dw = 1.0 / (3.0 * w) - w / 6.0 * s
        if isinstance(kind, AdiabaticTaylor):
            ds = kind.slope(x0)
            dx -= 0.5 * w * w * ds
            dw += 0.5 * (1.0 - 2.0 * a) * w * w * ds
        return dx, dw
    if isinstance(kind, DiracModel):
        y = -(x0 - kind.center) / w
        dx = kind.alpha * w * drift + kind.beta * source_R(y, a)
        dw = 1.0 / (3.0 * w) - kind.alpha * w / 6.0 + kind.beta * source_R2(y, a)
        return dx, dw
    if isinstance(kind, HeavisideModel):
        y = -(x0 - kind.center) / w
        dx = kind.alpha * w * drift + kind.beta * w * heaviside_source_1(y, a)
        dw = 1.0 / (3.0 * w) - kind.alpha * w / 6.0 + kind.beta * w * heaviside_source_2(y, a)
        return dx, dw
    raise TypeError(f"unknown model kind {type(kind).__name__}")


def integrate_cv(kind, init, a, t_max, dt_out, t0=0.0, rtol=CV_RTOL, atol=CV_ATOL):
    """Integrate the reduced ODEs from ``init``; samples every ``dt_out``.

    The fit_error column of the result is zero (no fit is involved).
    """
    if not init.w > 0:
        raise DomainError("initial width must be positive")

    def f(t, y):
        if not y[1] > 0:
            return np.array([np.nan, np.nan])
        return np.array(cv_rhs(kind, (y[0], y[1]), a))

    m = int(math.floor(t_max / dt_out + 1e-9))
    times = t0 + dt_out * np.arange(m + 1)
    sol = _dopri5.solve(f, np.array([init.x0, init.w]), times, rtol=rtol, atol=atol)
    return FrontTrajectory.from_samples(sol.t, sol.y[:, 0], sol.y[:, 1])

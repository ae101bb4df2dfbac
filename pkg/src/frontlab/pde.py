"""Method-of-lines solver for u_t = u_xx + s(x) u (1 - u) (u - a).

Space is split into ``n`` equal cells with centres ``x_k``; the Laplacian
uses the three-point stencil in the interior and one-sided Neumann stencils
in the two end cells. Time is advanced by the Dormand-Prince 5(4) pair with
adaptive step control. The inner loop is compiled with numba since the
semi-discrete system is stiff and needs O(1e5) explicit steps per run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from . import _dopri5 as dp
from .defects import Dirac, eval_defect
from .errors import DivergenceError, DomainError, FrontNotContainedError, NotEvaluableError, StiffnessError
from .io import write_csv

OVERSHOOT = 1e-6
EXP_CLAMP = 700.0


@dataclass(frozen=True)
class Grid:
    x_min: float = -100.0
    x_max: float = 100.0
    n: int = 4000

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"grid too small: need n >= 3 cells, got {self.n}")
        if not self.x_max > self.x_min:
            raise DomainError("grid needs x_max > x_min")

    @property
    def h(self):
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self):
        return self.x_min + self.h * (np.arange(self.n) + 0.5)


@dataclass(frozen=True)
class ReactionParams:
    a: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise DomainError(f"bistable threshold must satisfy 0 < a < 1, got {self.a}")


@dataclass(frozen=True)
class FieldState:
    grid: Grid
    t: float
    u: np.ndarray = field(repr=False)

    @property
    def x(self):
        return self.grid.x


@dataclass(frozen=True)
class SolverConfig:
    t_max: float
    dt_out: float = 1.0
    rtol: float = 1e-8
    atol: float = 1e-8
    dt0: float | None = None

    def __post_init__(self):
        for name in ("t_max", "dt_out", "rtol", "atol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"solver setting {name} must be positive")
        if self.dt0 is not None and not self.dt0 > 0:
            raise DomainError("initial step dt0 must be positive")
        if self.dt_out > self.t_max:
            raise DomainError("dt_out must not exceed t_max")

    def output_times(self, t0=0.0):
        m = int(math.floor(self.t_max / self.dt_out + 1e-9))
        times = t0 + self.dt_out * np.arange(m + 1)
        if self.t_max - m * self.dt_out > 1e-9 * self.dt_out:
            times = np.append(times, t0 + self.t_max)
        return times


def reaction(u, a):
    return u * (1.0 - u) * (u - a)


def exact_kink(x, x0, w):
    """Decreasing logistic front 1 / (1 + exp((x - x0) / w))."""
    if not w > 0:
        raise DomainError(f"kink width must be positive, got {w}")
    z = np.clip((np.asarray(x, dtype=float) - x0) / w, -EXP_CLAMP, EXP_CLAMP)
    out = 1.0 / (1.0 + np.exp(z))
    return float(out) if np.ndim(out) == 0 else out


def homogeneous_speed(s, a):
    """Speed of the exact kink in a uniform medium (positive = rightward)."""
    if not s > 0:
        raise DomainError(f"reaction scale must be positive, got {s}")
    return math.sqrt(s / 2.0) * (1.0 - 2.0 * a)


def homogeneous_width(s):
    if not s > 0:
        raise DomainError(f"reaction scale must be positive, got {s}")
    return math.sqrt(2.0 / s)


def kink_state(grid, x0, w, t=0.0):
    return FieldState(grid, t, exact_kink(grid.x, x0, w))


def sample_defect(grid, defect):
    """Defect sampled at cell centres (midpoint rule)."""
    if isinstance(defect, Dirac):
        raise NotEvaluableError(
            "Dirac defects cannot drive the PDE; use dirac_equivalent's inverse, a narrow Gaussian"
        )
    return np.ascontiguousarray(eval_defect(defect, grid.x), dtype=float)


def rhs(state, defect, params):
    """Semi-discrete time derivative for every cell."""
    u = np.asarray(state.u, dtype=float)
    s = sample_defect(state.grid, defect)
    lap = np.empty_like(u)
    lap[1:-1] = u[2:] + u[:-2] - 2.0 * u[1:-1]
    lap[0] = u[1] - u[0]
    lap[-1] = u[-2] - u[-1]
    return lap / state.grid.h**2 + s * reaction(u, params.a)


def speed_functional(state, defect, params, check=True):
    """Front speed as the integral of s(x) R(u) over the domain.

    The identity holds for a decreasing front that is flat at both ends;
    ``check=False`` skips that orientation test and returns the raw quadrature.
    """
    u = np.asarray(state.u, dtype=float)
    if check and (abs(u[0] - 1.0) > 0.1 or abs(u[-1]) > 0.1):
        raise FrontNotContainedError(
            f"front not contained: u[0]={u[0]:.3g}, u[-1]={u[-1]:.3g} (expected ~1 and ~0)"
        )
    s = sample_defect(state.grid, defect)
    return float(np.trapezoid(s * reaction(u, params.a), state.grid.x))


# --- compiled kernel ---------------------------------------------------------


@numba.njit(cache=True)
def _rhs_kernel(u, s, a, inv_h2, out):
    n = u.shape[0]
    for k in range(n):
        uk = u[k]
        if k == 0:
            lap = u[1] - uk
        elif k == n - 1:
            lap = u[n - 2] - uk
        else:
            lap = u[k + 1] + u[k - 1] - 2.0 * uk
        out[k] = lap * inv_h2 + s[k] * uk * (1.0 - uk) * (uk - a)


@numba.njit(cache=True)
def _march(u, s, a, inv_h2, t0, t_out, rtol, atol, h, h_min, err_prev):
    """Advance ``u`` in place, storing it at each ``t_out``.

    Returns (samples, status, t, h, err_prev, accepted, rejected) with status
    0 = done, 1 = step underflow, 2 = non-finite state.
    """
    n = u.shape[0]
    m = t_out.shape[0]
    samples = np.empty((m, n))
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    y = np.empty(n)
    yn = np.empty(n)
    t = t0
    accepted = 0
    rejected = 0
    last_rejected = False
    _rhs_kernel(u, s, a, inv_h2, k1)
    for i in range(n):
        if not np.isfinite(k1[i]):
            return samples, 2, t, h, err_prev, accepted, rejected
    j = 0
    while j < m:
        t_target = t_out[j]
        if t_target <= t:
            samples[j, :] = u
            j += 1
            continue
        hs = min(h, t_target - t)
        clamped = hs < h
        if hs < h_min and not clamped:
            return samples, 1, t, hs, err_prev, accepted, rejected

        for i in range(n):
            y[i] = u[i] + hs * dp.A21 * k1[i]
        _rhs_kernel(y, s, a, inv_h2, k2)
        for i in range(n):
            y[i] = u[i] + hs * (dp.A31 * k1[i] + dp.A32 * k2[i])
        _rhs_kernel(y, s, a, inv_h2, k3)
        for i in range(n):
            y[i] = u[i] + hs * (dp.A41 * k1[i] + dp.A42 * k2[i] + dp.A43 * k3[i])
        _rhs_kernel(y, s, a, inv_h2, k4)
        for i in range(n):
            y[i] = u[i] + hs * (dp.A51 * k1[i] + dp.A52 * k2[i] + dp.A53 * k3[i] + dp.A54 * k4[i])
        _rhs_kernel(y, s, a, inv_h2, k5)
        for i in range(n):
            y[i] = u[i] + hs * (
                dp.A61 * k1[i] + dp.A62 * k2[i] + dp.A63 * k3[i] + dp.A64 * k4[i] + dp.A65 * k5[i]
            )
        _rhs_kernel(y, s, a, inv_h2, k6)
        for i in range(n):
            yn[i] = u[i] + hs * (
                dp.B1 * k1[i] + dp.B3 * k3[i] + dp.B4 * k4[i] + dp.B5 * k5[i] + dp.B6 * k6[i]
            )
        _rhs_kernel(yn, s, a, inv_h2, k7)

        acc = 0.0
        for i in range(n):
            e = hs * (
                dp.E1 * k1[i] + dp.E3 * k3[i] + dp.E4 * k4[i] + dp.E5 * k5[i] + dp.E6 * k6[i] + dp.E7 * k7[i]
            )
            sc = atol + rtol * max(abs(u[i]), abs(yn[i]))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / n)

        if not (err <= 1.0):
            rejected += 1
            if np.isfinite(err):
                fac = max(dp.FAC_MIN, dp.SAFETY * err ** (-0.2))
            else:
                fac = dp.FAC_MIN
            h = hs * fac
            last_rejected = True
            if h < h_min:
                status = 1 if np.isfinite(err) else 2
                return samples, status, t, h, err_prev, accepted, rejected
            continue

        accepted += 1
        if err == 0.0:
            fac = dp.FAC_MAX
        else:
            fac = min(dp.FAC_MAX, max(dp.FAC_MIN, dp.SAFETY * err ** (-dp.ALPHA) * err_prev**dp.BETA))
        if last_rejected:
            fac = min(fac, 1.0)
        err_prev = max(err, 1e-4)
        last_rejected = False
        h_new = hs * fac
        h = max(h_new, h) if clamped else h_new
        if clamped or t + hs >= t_target:
            t = t_target
        else:
            t = t + hs
        finite = True
        for i in range(n):
            u[i] = yn[i]
            k1[i] = k7[i]
            if not (np.isfinite(u[i]) and np.isfinite(k1[i])):
                finite = False
        if not finite:
            return samples, 2, t, h, err_prev, accepted, rejected
        if t == t_target:
            samples[j, :] = u
            j += 1
    return samples, 0, t, h, err_prev, accepted, rejected


class Integrator:
    """Stateful PDE integration that can be advanced in chunks.

    ``advance(times)`` returns the ``FieldState`` at each requested time and
    keeps the step-size controller state between calls, so a chunked run
    reproduces a single long run bit for bit.
    """

    def __init__(self, u0, defect, params, rtol=1e-8, atol=1e-8, dt0=None, t_span=1.0):
        u = np.array(u0.u, dtype=float)
        if u.shape != (u0.grid.n,) or not np.all(np.isfinite(u)):
            raise DomainError("initial field must be finite with one value per cell")
        self.grid = u0.grid
        self.params = params
        self.t = float(u0.t)
        self.u = u
        self.s = sample_defect(self.grid, defect)
        self.inv_h2 = 1.0 / self.grid.h**2
        self.rtol = float(rtol)
        self.atol = float(atol)
        self.h_min = dp.UNDERFLOW * max(float(t_span), 1.0)
        self.err_prev = 1e-4
        self.accepted = 0
        self.rejected = 0
        if dt0 is None:
            def f(t, y):
                out = np.empty_like(y)
                _rhs_kernel(y, self.s, self.params.a, self.inv_h2, out)
                return out

            f0 = f(self.t, self.u)
            if not np.all(np.isfinite(f0)):
                raise DivergenceError(self.t)
            dt0 = dp.initial_step(f, self.t, self.u, f0, self.rtol, self.atol)
        self.h = float(dt0)

    def advance(self, times):
        times = np.ascontiguousarray(times, dtype=float)
        samples, status, t, h, err_prev, acc, rej = _march(
            self.u, self.s, self.params.a, self.inv_h2, self.t, times,
            self.rtol, self.atol, self.h, self.h_min, self.err_prev,
        )
        self.t, self.h, self.err_prev = t, h, err_prev
        self.accepted += acc
        self.rejected += rej
        if status == 1:
            raise StiffnessError(t, h)
        if status == 2:
            raise DivergenceError(t)
        return [FieldState(self.grid, float(tt), samples[i].copy()) for i, tt in enumerate(times)]


def march(u0, defect, params, cfg, chunk=32):
    """Yield ``FieldState`` samples at t0, t0 + dt_out, ... up to t0 + t_max.

    Lazily integrates ``chunk`` output intervals at a time so callers can stop
    early (the pinning driver does).
    """
    times = cfg.output_times(u0.t)
    stepper = Integrator(u0, defect, params, cfg.rtol, cfg.atol, cfg.dt0, t_span=cfg.t_max)
    yield FieldState(u0.grid, float(times[0]), np.array(u0.u, dtype=float))
    for start in range(1, times.size, chunk):
        yield from stepper.advance(times[start : start + chunk])


def integrate(u0, defect, params, cfg):
    """All snapshots of a run as a list; see ``march`` for the lazy form."""
    return list(march(u0, defect, params, cfg))


def snapshot_name(t):
    return f"field_t{t:.6g}.csv"


def write_snapshot(state, directory):
    rows = zip(state.grid.x, state.u)
    return write_csv(Path(directory) / snapshot_name(state.t), ["x", "u"], rows)

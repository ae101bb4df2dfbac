"""Dormand-Prince 5(4) embedded Runge-Kutta pair with adaptive step control.

The tableau constants live at module level so the jitted PDE kernel in
``frontlab.pde`` freezes them as compile-time literals. ``solve`` is the plain
NumPy driver used for small systems such as the collective-variable ODEs.

Step control follows Hairer, Norsett & Wanner: RMS error in the mixed norm
``atol + rtol * max(|y_old|, |y_new|)``, a step is accepted iff that norm is
at most one, and the next step uses a Lund-stabilised (PI) factor.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DivergenceError, StiffnessError

C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
# fifth-order weights; also the last stage row (FSAL)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# difference between fifth- and embedded fourth-order weights
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA
UNDERFLOW = 1e-14


def rms_error(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return math.sqrt(float(np.mean((err / scale) ** 2)))


def step_factor(err, err_prev):
    """Multiplier for the next step after an accepted step with norm ``err``."""
    if err == 0.0:
        return FAC_MAX
    fac = SAFETY * err ** (-ALPHA) * err_prev**BETA
    return min(FAC_MAX, max(FAC_MIN, fac))


def reject_factor(err):
    if not math.isfinite(err):
        return FAC_MIN
    return max(FAC_MIN, SAFETY * err ** (-0.2))


def initial_step(f, t0, y0, f0, rtol, atol):
    """Starting step from the derivative scales (Hairer's heuristic, order 5)."""
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def dopri5_step(f, t, y, k1, h):
    """One trial step. Returns (y_new, k7, error_vector)."""
    k2 = f(t + C2 * h, y + h * (A21 * k1))
    k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2))
    k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
    k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
    k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
    y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
    k7 = f(t + h, y_new)
    err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
    return y_new, k7, err


class Solution:
    """Samples at the requested output times plus step statistics."""

    def __init__(self, t, y, n_accepted, n_rejected, h_last):
        self.t = t
        self.y = y
        self.n_accepted = n_accepted
        self.n_rejected = n_rejected
        self.h_last = h_last


def solve(f, y0, t_out, rtol=1e-8, atol=1e-8, h0=None, max_steps=10_000_000):
    """Integrate ``y' = f(t, y)`` and sample exactly at ``t_out``.

    Steps are shortened to land on each output time, so samples are genuine
    step endpoints rather than interpolants. ``t_out[0]`` is the initial time.

    Raises
    ------
    StiffnessError
        The step size fell below ``1e-14 * (t_out[-1] - t_out[0])``.
    DivergenceError
        An accepted state or its derivative is not finite.
    """
    t_out = np.asarray(t_out, dtype=float)
    if t_out.ndim != 1 or t_out.size == 0 or np.any(np.diff(t_out) <= 0):
        raise ValueError("t_out must be a non-empty strictly increasing 1-D array")
    y = np.array(y0, dtype=float)
    t = float(t_out[0])
    k1 = np.asarray(f(t, y), dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(k1))):
        raise DivergenceError(t)
    span = float(t_out[-1] - t_out[0])
    h_min = UNDERFLOW * max(span, 1.0)
    h = initial_step(f, t, y, k1, rtol, atol) if h0 is None else float(h0)

    out = np.empty((t_out.size,) + y.shape)
    out[0] = y
    accepted = rejected = 0
    err_prev = 1e-4
    last_rejected = False
    i_next = 1
    while i_next < t_out.size:
        t_target = float(t_out[i_next])
        h_step = min(h, t_target - t)
        clamped = h_step < h
        if h_step < h_min and not clamped:
            raise StiffnessError(t, h_step)
        y_new, k7, err_vec = dopri5_step(f, t, y, k1, h_step)
        err = rms_error(err_vec, y, y_new, rtol, atol)
        if not math.isfinite(err) or err > 1.0:
            rejected += 1
            h = h_step * reject_factor(err)
            last_rejected = True
            if h < h_min:
                if not math.isfinite(err):
                    raise DivergenceError(t)
                raise StiffnessError(t, h)
            continue
        accepted += 1
        if accepted > max_steps:
            raise StiffnessError(t, h_step)
        fac = step_factor(err, err_prev)
        if last_rejected:
            fac = min(fac, 1.0)
        err_prev = max(err, 1e-4)
        last_rejected = False
        h_new = h_step * fac
        h = max(h_new, h) if clamped else h_new
        t = t_target if clamped or t + h_step >= t_target else t + h_step
        y, k1 = y_new, k7
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(k1))):
            raise DivergenceError(t)
        if t == t_target:
            out[i_next] = y
            i_next += 1
    return Solution(t_out, out, accepted, rejected, h)

"""Least-squares extraction of the collective coordinates (x0, w) from a field.

A snapshot is compared against the logistic kink ``1 / (1 + exp((x - x0)/w))``
on the cells where the *model* lies in (0.01, 0.99). The error is the sum of
squared residuals over that window divided by the total number of cells ``n``;
``window_mse`` gives the per-window mean instead. The error is minimised with
Polak-Ribiere conjugate gradients; each line minimisation locates the zero of
the exact directional derivative, so a noise-free kink is recovered to
round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, FitNotConvergedError, FrontNotVisibleError, SnapshotFitError
from .io import write_csv

WINDOW_LO = 0.01
WINDOW_HI = 0.99
Z_WINDOW = math.log(WINDOW_HI / WINDOW_LO)  # |z| bound equivalent to the u-window
E_TOL = 1e-14
E_REL = 1e-8
G_TOL = 1e-10
MAX_ITER = 200
LN3 = math.log(3.0)


@dataclass(frozen=True)
class KinkState:
    x0: float
    w: float

    def __post_init__(self):
        if not (math.isfinite(self.x0) and math.isfinite(self.w)) or not self.w > 0:
            raise DomainError(f"kink state needs finite x0 and w > 0, got ({self.x0}, {self.w})")


def _window(x, x0, w):
    z = (x - x0) / w
    mask = np.abs(z) < Z_WINDOW
    return z, mask


def _residuals(x, u, x0, w):
    z, mask = _window(x, x0, w)
    if not mask.any():
        raise FrontNotVisibleError(f"no cells inside the fit window for x0={x0:.6g}, w={w:.6g}")
    zm = z[mask]
    model = 1.0 / (1.0 + np.exp(zm))
    return zm, model, u[mask] - model


def _objective(x, u, theta):
    x0, w = theta
    _, _, r = _residuals(x, u, x0, w)
    return float(np.sum(r * r)) / u.size


def _gradient(x, u, theta):
    """Analytic gradient of the windowed mean squared error (mask held fixed)."""
    x0, w = theta
    zm, model, r = _residuals(x, u, x0, w)
    slope = model * (1.0 - model) / w  # d model / d x0
    m = u.size
    g_x0 = -2.0 / m * float(np.sum(r * slope))
    g_w = -2.0 / m * float(np.sum(r * slope * zm))
    return np.array([g_x0, g_w])


def fit_error(state, k):
    """Squared residual summed over the fit window, divided by the cell count."""
    return _objective(state.grid.x, np.asarray(state.u, dtype=float), (k.x0, k.w))


def window_mse(state, k):
    """Mean squared residual over the cells of the fit window only."""
    _, _, r = _residuals(state.grid.x, np.asarray(state.u, dtype=float), k.x0, k.w)
    return float(np.mean(r * r))


def _crossing(x, u, level):
    above = u >= level
    idx = np.nonzero(above[:-1] & ~above[1:])[0]
    if idx.size == 0:
        raise FrontNotVisibleError(f"field never crosses u={level} downward")
    i = idx[0]
    return x[i] + (u[i] - level) / (u[i] - u[i + 1]) * (x[i + 1] - x[i])


def initial_guess(state):
    """Position and width from the u = 0.75 and u = 0.25 crossings."""
    x = state.grid.x
    u = np.asarray(state.u, dtype=float)
    x_hi = _crossing(x, u, 0.75)
    x_lo = _crossing(x, u, 0.25)
    w = (x_lo - x_hi) / (2.0 * LN3)
    if not w > 0:
        raise FrontNotVisibleError("quantile crossings out of order; front is not decreasing")
    return KinkState(0.5 * (x_hi + x_lo), w)


def _line_minimize(x, u, theta, p):
    """Minimise E(theta + alpha p) over alpha >= 0 via the directional derivative."""

    def dphi(alpha):
        return float(_gradient(x, u, theta + alpha * p) @ p)

    d0 = dphi(0.0)
    if d0 >= 0.0:
        return 0.0
    alpha_max = math.inf
    if p[1] < 0.0:
        alpha_max = 0.9 * theta[1] / -p[1]
    alpha = min(0.1 * theta[1] / float(np.hypot(*p)), 0.5 * alpha_max)
    lo = 0.0
    for _ in range(80):
        d = dphi(alpha)
        if d >= 0.0:
            break
        lo = alpha
        if alpha >= 0.5 * alpha_max:
            return alpha
        alpha = min(2.0 * alpha, 0.5 * (alpha + alpha_max)) if math.isfinite(alpha_max) else 2.0 * alpha
    else:
        return alpha
    if d == 0.0:
        return alpha
    return brentq(dphi, lo, alpha, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)


def fit(state, guess, max_iter=MAX_ITER):
    """Polak-Ribiere minimisation of ``fit_error`` starting from ``guess``.

    Returns ``(KinkState, error)``. Converges when successive errors differ by
    less than 1e-14 (and by less than 1e-8 relative) or the gradient norm
    drops below 1e-10.
    """
    x = state.grid.x
    u = np.asarray(state.u, dtype=float)
    if not (u.max() > 0.5 > u.min()):
        raise FrontNotVisibleError("field never crosses u = 1/2; there is no front to fit")
    theta = np.array([guess.x0, guess.w], dtype=float)
    e = _objective(x, u, theta)
    g = _gradient(x, u, theta)
    p = -g
    best = (theta.copy(), e)
    for _ in range(max_iter):
        if float(np.hypot(*g)) < G_TOL:
            return KinkState(*theta), e
        alpha = _line_minimize(x, u, theta, p)
        theta_new = theta + alpha * p
        e_new = _objective(x, u, theta_new)
        if e_new > e:
            # mask jump made the step uphill; restart along steepest descent
            p = -g
            alpha = _line_minimize(x, u, theta, p)
            theta_new = theta + alpha * p
            e_new = _objective(x, u, theta_new)
            if e_new > e:
                return KinkState(*theta), e
        g_new = _gradient(x, u, theta_new)
        # absolute test alone stops early when E itself is ~1e-14 (noise-free data)
        converged = abs(e - e_new) < E_TOL and abs(e - e_new) <= E_REL * e
        theta, e = theta_new, e_new
        if e < best[1]:
            best = (theta.copy(), e)
        if converged:
            return KinkState(*theta), e
        gamma = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        p = -g_new + gamma * p
        if float(p @ g_new) >= 0.0:
            p = -g_new
        g = g_new
    raise FitNotConvergedError(
        f"fit did not converge in {max_iter} iterations", best=KinkState(*best[0]), error=best[1]
    )


@dataclass(frozen=True)
class FrontTrajectory:
    """Samples (t, x0, w, fit_error) of a moving front."""

    t: np.ndarray
    x0: np.ndarray
    w: np.ndarray
    fit_error: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.x0) == len(self.w) == len(self.fit_error) == n):
            raise ValueError("trajectory columns must have equal length")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    @property
    def speed(self):
        """Centred-difference x0'(t) at the interior samples."""
        return (self.x0[2:] - self.x0[:-2]) / (self.t[2:] - self.t[:-2])

    def speed_column(self):
        """Speed aligned with the samples, NaN at both ends."""
        col = np.full(len(self), np.nan)
        if len(self) >= 3:
            col[1:-1] = self.speed
        return col

    def to_csv(self, path):
        rows = zip(self.t, self.x0, self.w, self.speed_column(), self.fit_error)
        return write_csv(Path(path), ["t", "x0", "w", "speed", "fit_error"], rows)

    @classmethod
    def from_samples(cls, t, x0, w, fit_error=None):
        t = np.asarray(t, dtype=float)
        fe = np.zeros_like(t) if fit_error is None else np.asarray(fit_error, dtype=float)
        return cls(t, np.asarray(x0, dtype=float), np.asarray(w, dtype=float), fe)


class TrajectoryBuilder:
    """Incremental warm-started fitting, one snapshot at a time."""

    def __init__(self):
        self.t, self.x0, self.w, self.err = [], [], [], []
        self._last = None

    def add(self, state):
        try:
            guess = self._last if self._last is not None else initial_guess(state)
            k, e = fit(state, guess)
        except (FrontNotVisibleError, FitNotConvergedError) as exc:
            raise SnapshotFitError(len(self.t), exc) from exc
        self._last = k
        self.t.append(float(state.t))
        self.x0.append(k.x0)
        self.w.append(k.w)
        self.err.append(e)
        return k, e

    def result(self):
        return FrontTrajectory.from_samples(self.t, self.x0, self.w, self.err)


def trajectory(states):
    """Fit every snapshot (warm-started) and return the front trajectory."""
    states = list(states)
    if len(states) < 3:
        raise ValueError("a trajectory needs at least 3 snapshots")
    builder = TrajectoryBuilder()
    for st in states:
        builder.add(st)
    return builder.result()

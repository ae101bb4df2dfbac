"""Defect topography from an observed front trajectory.

In the adiabatic regime the position equation reads
``x0' = (1 - 2a)/2 * w * s(x0)``, so every interior sample of a trajectory
gives one estimate ``s(x0) = 2/(1 - 2a) * x0' / w`` with ``x0'`` taken as a
centred difference.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .defects import eval_defect, is_evaluable
from .errors import DomainError, NotEvaluableError
from .io import write_csv

SCHEME = "centered-difference"


class MonotonicityWarning(UserWarning):
    """The front did not move one way, so the adiabatic inversion is suspect."""


@dataclass(frozen=True)
class TopographyEstimate:
    """Samples ``(x0, s_est)`` sorted by x0, plus provenance."""

    x0: np.ndarray
    s_est: np.ndarray
    a: float
    scheme: str = SCHEME
    source_id: str = ""
    monotone: bool = True
    smooth_window: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.x0)

    def to_csv(self, path, truth=None):
        """Write ``x0,s_est`` (and ``s_true`` when a truth spec is given)."""
        if truth is None:
            return write_csv(Path(path), ["x0", "s_est"], zip(self.x0, self.s_est))
        s_true = eval_defect(truth, self.x0)
        return write_csv(Path(path), ["x0", "s_est", "s_true"], zip(self.x0, self.s_est, s_true))


def _moving_average(v, window):
    if window % 2 == 0 or window < 1:
        raise ValueError(f"smoothing window must be a positive odd integer, got {window}")
    if window == 1 or v.size < window:
        return v
    half = window // 2
    out = np.convolve(v, np.ones(window) / window, mode="same")
    # shrink the window near the ends instead of padding with zeros
    for i in range(half):
        out[i] = v[: 2 * i + 1].mean()
        out[-1 - i] = v[v.size - 2 * i - 1 :].mean()
    return out


def reconstruct(traj, a, smooth_window=None, source_id=""):
    """Estimate s along the path of the front.

    Parameters
    ----------
    traj : FrontTrajectory
        At least three samples with positive widths.
    a : float
        Reaction threshold; ``a = 1/2`` gives zero free speed and is rejected.
    smooth_window : int, optional
        Odd moving-average length applied to the estimate (off by default).

    Returns
    -------
    TopographyEstimate
        Interior samples only, sorted by x0. ``monotone`` is False (and a
        ``MonotonicityWarning`` is issued) when x0 is not strictly monotone.
    """
    if abs(a - 0.5) < 1e-12:
        raise DomainError("a = 1/2: zero free speed, the inversion is degenerate")
    if len(traj) < 3:
        raise ValueError("reconstruction needs at least 3 trajectory samples")
    w = np.asarray(traj.w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("trajectory widths must be positive")
    x0 = np.asarray(traj.x0, dtype=float)
    s = 2.0 / (1.0 - 2.0 * a) * traj.speed / w[1:-1]
    xi = x0[1:-1]
    steps = np.diff(x0)
    monotone = bool(np.all(steps > 0) or np.all(steps < 0))
    if not monotone:
        warnings.warn("front position is not monotone; adiabatic inversion assumption violated",
                      MonotonicityWarning, stacklevel=2)
    order = np.argsort(xi, kind="stable")
    xi, s = xi[order], s[order]
    if smooth_window is not None:
        s = _moving_average(s, int(smooth_window))
    return TopographyEstimate(xi, s, float(a), SCHEME, source_id, monotone, smooth_window)


def residual(est, truth):
    """Relative sup-norm and L2 errors of ``est`` against a pointwise-evaluable truth."""
    if not is_evaluable(truth):
        raise NotEvaluableError("residual needs a pointwise-evaluable truth; Dirac is rejected")
    if len(est) == 0:
        raise ValueError("empty topography estimate")
    s_true = np.asarray(eval_defect(truth, est.x0), dtype=float)
    diff = est.s_est - s_true
    sup = float(np.max(np.abs(diff)) / np.max(np.abs(s_true)))
    l2 = float(np.linalg.norm(diff) / np.linalg.norm(s_true))
    return sup, l2

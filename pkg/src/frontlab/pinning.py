"""Front pinning: closed-form threshold for a point defect, numerical detection
of stalled fronts, and bisection for the critical defect amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import cv, pde
from .defects import Gaussian, extent, left_level
from .errors import DomainError, NoSignChangeError, UndecidedError
from .kinkfit import KinkState, TrajectoryBuilder

STALL_FACTOR = 1e-4
STALL_WINDOW = 50.0
NEAR_WIDTHS = 10.0
PASS_WIDTHS = 10.0


@dataclass(frozen=True)
class PinningAnalysis:
    a: float
    alpha: float
    r: float
    z_min: float
    min_R: float
    beta_c: float
    x0_pin: float
    w_pin: float


def analyze(a, alpha):
    """Critical point-mass strength and the front state at pinning.

    The balance of the position equation at the minimum of R(U(z)) gives the
    threshold; the width equation evaluated on the stall locus
    ``-x0/w = z_min`` gives the width.
    """
    if not 0.0 < a < 0.5:
        raise DomainError(f"front not rightward: pinning analysis needs 0 < a < 1/2, got a={a}")
    if not alpha > 0:
        raise DomainError(f"baseline alpha must be positive, got {alpha}")
    r = math.sqrt(1.0 - a + a * a)
    z_min = math.log((1.0 + r) / a)
    min_r = -(a * a) * (1.0 + r) * (a + r) / (1.0 + a + r) ** 3
    shape = math.sqrt(1.0 + 3.0 * (1.0 - 2.0 * a) * (1.0 - a + r) / (1.0 + a + r))
    w_pin = math.sqrt(2.0 / alpha) / shape
    beta_c = (
        math.sqrt(alpha / 2.0)
        * (1.0 - 2.0 * a)
        * (1.0 + a + r) ** 3
        / (a * a * (1.0 + r) * (a + r) * shape)
    )
    return PinningAnalysis(a, alpha, r, z_min, min_r, beta_c, -w_pin * z_min, w_pin)


@dataclass(frozen=True)
class PinningVerdict:
    pinned: bool
    x0_final: float
    w_final: float
    t_decided: float


class PinningMonitor:
    """Streaming version of ``detect_pinning``: feed samples, poll ``verdict``.

    The stall rule needs the centred speed below ``1e-4 * free_speed`` for a
    full trailing window of 50 time units with the front within 10 widths of
    the defect; the pass rule fires once x0 is ``10 * max(w, defect_extent)``
    beyond the defect centre.
    """

    def __init__(self, free_speed, defect_extent, center=0.0, window=STALL_WINDOW):
        self.threshold = STALL_FACTOR * abs(free_speed)
        self.extent = float(defect_extent)
        self.center = float(center)
        self.window = float(window)
        self._t = []
        self._x = []
        self._stall_since = None
        self.verdict = None

    def add(self, t, x0, w):
        if self.verdict is not None:
            return self.verdict
        self._t.append(float(t))
        self._x.append(float(x0))
        if x0 - self.center > PASS_WIDTHS * max(w, self.extent):
            self.verdict = PinningVerdict(False, float(x0), float(w), float(t))
            return self.verdict
        if len(self._t) >= 3:
            t_prev, t_mid = self._t[-3], self._t[-2]
            speed = (self._x[-1] - self._x[-3]) / (self._t[-1] - t_prev)
            if abs(speed) < self.threshold:
                if self._stall_since is None:
                    self._stall_since = t_mid
                near = abs(x0 - self.center) <= NEAR_WIDTHS * w
                if near and t_mid - self._stall_since >= self.window:
                    self.verdict = PinningVerdict(True, float(x0), float(w), float(t))
            else:
                self._stall_since = None
        return self.verdict


def detect_pinning(traj, free_speed, defect_extent, center=0.0):
    """Decide whether a trajectory shows a pinned front.

    Raises ``UndecidedError`` if neither rule fires before the trajectory ends.
    """
    mon = PinningMonitor(free_speed, defect_extent, center)
    for t, x0, w in zip(traj.t, traj.x0, traj.w):
        if mon.add(t, x0, w) is not None:
            return mon.verdict
    raise UndecidedError(
        f"undecided at t={traj.t[-1]:.6g} (x0={traj.x0[-1]:.6g}) - increase t_max"
    )


def find_threshold(run, lo, hi, rtol=1e-2, log=None):
    """Bisect on a defect amplitude for the onset of pinning.

    ``run(amplitude)`` must return a ``PinningVerdict``. The bracket must
    have ``run(lo)`` unpinned and ``run(hi)`` pinned; bisection stops when
    ``hi - lo <= rtol * |mid|`` and the midpoint is returned. Every probe is
    appended to ``log`` as ``(amplitude, verdict)`` when a list is given.
    """
    probes = [] if log is None else log
    v_lo, v_hi = run(lo), run(hi)
    probes.append((lo, v_lo))
    probes.append((hi, v_hi))
    if v_lo.pinned == v_hi.pinned:
        raise NoSignChangeError(
            f"no sign change: both ends {'pinned' if v_lo.pinned else 'unpinned'} on [{lo}, {hi}]"
        )
    if v_lo.pinned:
        raise NoSignChangeError(f"bracket reversed: lower amplitude {lo} pins, upper {hi} does not")
    while hi - lo > rtol * abs(0.5 * (lo + hi)):
        mid = 0.5 * (lo + hi)
        v = run(mid)
        probes.append((mid, v))
        if v.pinned:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- probe factories ---------------------------------------------------------


def track_pde(defect, params, grid, x0_init, cfg, w_init=None, monitor=None, center=0.0):
    """Integrate the PDE from an equilibrium kink, fitting every snapshot.

    Stops early once ``monitor`` (a ``PinningMonitor``) reaches a verdict.
    Returns ``(trajectory, last_state, verdict_or_None)``.
    """
    w0 = pde.homogeneous_width(left_level(defect)) if w_init is None else w_init
    u0 = pde.kink_state(grid, x0_init, w0)
    builder = TrajectoryBuilder()
    last = u0
    for state in pde.march(u0, defect, params, cfg):
        k, _ = builder.add(state)
        last = state
        if monitor is not None and monitor.add(state.t, k.x0, k.w) is not None:
            break
    verdict = monitor.verdict if monitor is not None else None
    return builder.result(), last, verdict


def pde_gaussian_probe(s0, d, a, grid, x0_init=-20.0, t_max=3000.0, dt_out=1.0, rtol=1e-8, atol=1e-8):
    """Factory: s1 -> PinningVerdict for a PDE run through Gaussian{s0, s1, d}."""
    params = pde.ReactionParams(a)
    cfg = pde.SolverConfig(t_max=t_max, dt_out=dt_out, rtol=rtol, atol=atol)
    free = pde.homogeneous_speed(s0, a)

    def run(s1):
        defect = Gaussian(s0, s1, d)
        mon = PinningMonitor(free, extent(defect))
        traj, _, verdict = track_pde(defect, params, grid, x0_init, cfg, monitor=mon)
        if verdict is None:
            raise UndecidedError(f"s1={s1}: undecided at t={traj.t[-1]:.6g} - increase t_max")
        return verdict

    return run


def cv_probe(model_factory, alpha, a, x0_init=-20.0, t_max=4000.0, dt_out=1.0, defect_extent=0.0):
    """Factory: amplitude -> PinningVerdict for a reduced-model run.

    ``model_factory(amplitude)`` builds the model kind, e.g.
    ``lambda beta: cv.DiracModel(alpha, beta)``.
    """
    free = pde.homogeneous_speed(alpha, a)
    init = KinkState(x0_init, pde.homogeneous_width(alpha))

    def run(amplitude):
        traj = cv.integrate_cv(model_factory(amplitude), init, a, t_max, dt_out)
        return detect_pinning(traj, free, defect_extent)

    return run


def dirac_probe(alpha, a, **kw):
    return cv_probe(lambda beta: cv.DiracModel(alpha, beta), alpha, a, **kw)


def heaviside_probe(alpha, a, **kw):
    return cv_probe(lambda beta: cv.HeavisideModel(alpha, beta), alpha, a, **kw)


def stall_point(model, init, a, t_max=4000.0, dt_out=1.0):
    """Terminal (x0, w) of a reduced-model run and the residual |x0'|, |w'| there."""
    traj = cv.integrate_cv(model, init, a, t_max, dt_out)
    x0, w = float(traj.x0[-1]), float(traj.w[-1])
    dx, dw = cv.cv_rhs(model, (x0, w), a)
    return x0, w, abs(dx), abs(dw)


def scan_pinning(run, amplitudes):
    """Evaluate ``run`` over a list of amplitudes; undecided probes map to None."""
    out = []
    for amp in amplitudes:
        try:
            out.append((float(amp), run(amp)))
        except UndecidedError:
            out.append((float(amp), None))
    return out


def monotone_verdicts(scan):
    """True if pinned verdicts never switch back to unpinned as amplitude grows."""
    flags = [v.pinned for _, v in sorted(scan, key=lambda p: p[0]) if v is not None]
    return all(not (p and not q) for p, q in zip(flags, flags[1:]))

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from frontlab import _dopri5 as dp
from frontlab.errors import DivergenceError, StiffnessError


def test_tableau_consistency():
    # row sums equal the nodes, weights sum to one, error weights sum to zero
    assert dp.A21 == pytest.approx(dp.C2)
    assert dp.A31 + dp.A32 == pytest.approx(dp.C3)
    assert dp.A41 + dp.A42 + dp.A43 == pytest.approx(dp.C4)
    assert dp.A51 + dp.A52 + dp.A53 + dp.A54 == pytest.approx(dp.C5)
    assert dp.A61 + dp.A62 + dp.A63 + dp.A64 + dp.A65 == pytest.approx(1.0)
    assert dp.B1 + dp.B3 + dp.B4 + dp.B5 + dp.B6 == pytest.approx(1.0)
    assert dp.E1 + dp.E3 + dp.E4 + dp.E5 + dp.E6 + dp.E7 == pytest.approx(0.0, abs=1e-15)


def test_exponential_decay_accuracy():
    sol = dp.solve(lambda t, y: -y, [1.0], np.linspace(0, 5, 11), rtol=1e-10, atol=1e-12)
    assert np.max(np.abs(sol.y[:, 0] - np.exp(-sol.t))) < 1e-9


def test_fifth_order_convergence_on_fixed_steps():
    # one step of size h on y' = y: local error ~ h^6
    errs = []
    for h in (0.1, 0.05):
        y, _, _ = dp.dopri5_step(lambda t, y: y, 0.0, np.array([1.0]), np.array([1.0]), h)
        errs.append(abs(y[0] - math.exp(h)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(6.0, abs=0.3)


def test_matches_scipy_rk45_on_van_der_pol():
    def f(t, y):
        return np.array([y[1], 2.0 * (1 - y[0] ** 2) * y[1] - y[0]])

    times = np.linspace(0, 10, 21)
    ours = dp.solve(f, [2.0, 0.0], times, rtol=1e-10, atol=1e-10)
    ref = solve_ivp(f, (0, 10), [2.0, 0.0], t_eval=times, method="DOP853", rtol=1e-12, atol=1e-12)
    assert np.max(np.abs(ours.y - ref.y.T)) < 1e-7


def test_samples_land_exactly_on_output_times():
    times = np.array([0.0, 0.3, 0.31, 2.0])
    sol = dp.solve(lambda t, y: np.cos(t) * np.ones_like(y), [0.0], times)
    assert np.array_equal(sol.t, times)
    assert sol.y[:, 0] == pytest.approx(np.sin(times), abs=1e-8)


def test_finite_time_blowup_is_reported():
    # y' = y^2 blows up at t = 1; the controller either underflows or sees inf
    with pytest.raises((StiffnessError, DivergenceError)):
        dp.solve(lambda t, y: y * y, [1.0], [0.0, 2.0])


def test_nonfinite_derivative_raises_divergence():
    def f(t, y):
        return np.array([np.nan]) if t > 0.5 else np.array([1.0])

    with pytest.raises(DivergenceError):
        dp.solve(f, [0.0], [0.0, 1.0])


def test_stiffness_floor_raises():
    # a discontinuous right-hand side that can never be resolved
    def f(t, y):
        return np.array([1e20 if t > 0.5 else 0.0])

    with pytest.raises((StiffnessError, DivergenceError)):
        dp.solve(f, [0.0], [0.0, 1.0], rtol=1e-12, atol=1e-12)


def test_bad_output_times():
    with pytest.raises(ValueError):
        dp.solve(lambda t, y: y, [1.0], [0.0, 0.0])


def test_step_factor_bounds():
    assert dp.step_factor(0.0, 1e-4) == dp.FAC_MAX
    assert dp.step_factor(1e10, 1.0) == dp.FAC_MIN
    assert dp.reject_factor(float("nan")) == dp.FAC_MIN

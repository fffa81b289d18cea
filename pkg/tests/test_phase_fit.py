import json
import math

import numpy as np
import pytest

from gpwz import modulation as mod
from gpwz.asymptotics import u0_eval
from gpwz.phase_fit import (
    DEFAULT_WINDOW, N_SCAN, WIDE_WINDOW, ScalingFit, UndersamplingError, WindowError,
    fit_exponent, fit_phase, fit_phase_curve, scaling_fit,
)


def synthetic(asym, t, s, h=0.05, noise=0.0, seed=0):
    x = np.arange(-1.3 * t**1.5, 0.05 * t**1.5, h)
    z = x / t**1.5
    U = u0_eval(t, z, asym.with_phase(s))
    if noise:
        U = U + noise * np.random.default_rng(seed).normal(size=U.shape)
    return z, U


@pytest.mark.parametrize("s", [0.3, 1.234, math.pi, 5.9])
def test_synthetic_round_trip(asym, s):
    z, U = synthetic(asym, 20.0, s)
    res = fit_phase_curve(20.0, z, U, asym)
    assert abs((res.s0_hat - s + math.pi) % (2 * math.pi) - math.pi) <= 1e-4
    assert res.rms <= 1e-5
    assert res.curve.shape == (N_SCAN, 2)


def test_round_trip_with_noise(asym):
    z, U = synthetic(asym, 20.0, 2.0, noise=0.05)
    res = fit_phase_curve(20.0, z, U, asym)
    assert abs(res.s0_hat - 2.0) <= 1e-2


def test_window_margin_enforced(asym):
    z, U = synthetic(asym, 20.0, 1.0)
    with pytest.raises(WindowError):
        fit_phase_curve(20.0, z, U, asym, window=(-1.35, -0.2))
    with pytest.raises(WindowError):
        fit_phase_curve(20.0, z, U, asym, window=(-0.2, -0.5))


def test_too_few_periods(asym):
    z, U = synthetic(asym, 20.0, 1.0)
    with pytest.raises(WindowError):
        fit_phase_curve(20.0, z, U, asym, window=(-0.5, -0.45))


def test_undersampled(asym):
    z, U = synthetic(asym, 20.0, 1.0, h=0.5)
    with pytest.raises(UndersamplingError):
        fit_phase_curve(20.0, z, U, asym)


def test_fit_at_t20(solve, asym):
    res = fit_phase(solve(20.0), asym)
    assert abs(res.s0_hat - math.pi) <= 0.05
    assert 3.1254 == pytest.approx(math.pi, abs=0.05)
    doc = res.to_json()
    assert json.loads(json.dumps(doc))["s0_hat"] == res.s0_hat
    # the post-fit residual carries no leftover phase error
    assert abs(res.sin_correlation) <= 0.2


def test_grid_halving(solve, asym):
    a = fit_phase(solve(20.0), asym).s0_hat
    b = fit_phase(solve(20.0, h=0.025), asym).s0_hat
    assert abs(a - b) <= 1e-2


def test_negative_time_rejected(solve, asym):
    with pytest.raises(ValueError):
        fit_phase(solve(-7.0, x_min=-60.0, x_max=60.0), asym)


def test_scaling_fit_exact_power():
    t = [10.0, 15.0, 20.0, 30.0]
    fit = scaling_fit(t, [3.0 * v**-1.75 for v in t])
    assert fit.exponent == pytest.approx(-1.75, abs=1e-12)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-12)


def test_scaling_fit_validation():
    with pytest.raises(ValueError):
        ScalingFit((1.0, 2.0), (1.0, 1.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        ScalingFit((1.0, 3.0, 2.0), (1.0, 1.0, 1.0), 0.0, 1.0)


def test_wide_window_keeps_margin():
    assert WIDE_WINDOW[0] == pytest.approx(mod.Z_LEAD + 0.1)
    assert WIDE_WINDOW[1] == pytest.approx(mod.Z_TRAIL - 0.1)


def test_default_window_too_short_at_t10(solve, asym):
    with pytest.raises(WindowError):
        fit_phase(solve(10.0), asym, DEFAULT_WINDOW)


def test_scaling_exponent(solve, asym):
    sols = [solve(t) for t in (10.0, 15.0, 20.0, 30.0)]
    fit = fit_exponent(sols, asym)
    assert -1.95 <= fit.exponent <= -1.55
    assert all(abs(s - math.pi) <= 0.1 for s in fit.s0_hats)
    assert list(fit.max_residuals) == sorted(fit.max_residuals, reverse=True)


def test_doubling_margin_steepens_exponent(solve, asym):
    sols = [solve(t) for t in (10.0, 15.0, 20.0, 30.0)]
    lo, hi = DEFAULT_WINDOW
    doubled = (mod.Z_LEAD + 2 * (lo - mod.Z_LEAD), mod.Z_TRAIL - 2 * (mod.Z_TRAIL - hi))
    base = fit_exponent(sols, asym)
    inner = fit_exponent(sols, asym, window=doubled)
    assert inner.exponent <= base.exponent + 1e-12


def test_half_wavelength_window_shift(solve, asym):
    sol = solve(20.0)
    F = asym.fields([-0.7])
    half = math.pi / (20.0**1.75 * F.Q[0])
    lo, hi = DEFAULT_WINDOW
    a = fit_phase(sol, asym).s0_hat
    b = fit_phase(sol, asym, (lo + half, hi + half)).s0_hat
    assert abs(a - b) <= 0.02


def test_scan_is_periodic_and_minimal(solve, asym):
    from gpwz.asymptotics import PHASE_EXPONENT, _u0_from_fields
    from gpwz.gp_bvp import to_scaled

    sol = solve(20.0)
    res = fit_phase(sol, asym)
    z, U = to_scaled(sol)
    sel = (z >= DEFAULT_WINDOW[0]) & (z <= DEFAULT_WINDOW[1])
    F = asym.fields(z[sel])
    base = sol.t**PHASE_EXPONENT * F.f
    for s in (0.0, 1.0, 4.0):
        m0 = np.mean((U[sel] - _u0_from_fields(F, base + s)) ** 2)
        m1 = np.mean((U[sel] - _u0_from_fields(F, base + s + 2 * math.pi)) ** 2)
        assert abs(m0 - m1) <= 1e-12
    assert 0.0 <= res.s0_hat < 2 * math.pi
    assert res.rms**2 <= res.curve[:, 1].min() * (1 + 1e-6)

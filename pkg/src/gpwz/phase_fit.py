"""Phase-shift extraction and error-scaling fits against numeric solutions.

The numeric solution is compared with the cnoidal wave on its own grid,
mapped to z, so no resampling happens at the oscillation scale.  The phase
constant is found by a dense scan of the mean-square misfit over one period
followed by a parabolic refinement of the discrete minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import modulation as mod
from .asymptotics import PHASE_EXPONENT, AsymptoticSolution, _u0_from_fields
from .gp_bvp import GridSolution, to_scaled

__all__ = [
    "DEFAULT_WINDOW",
    "WIDE_WINDOW",
    "WindowError",
    "UndersamplingError",
    "PhaseFitResult",
    "ScalingFit",
    "fit_phase",
    "fit_phase_curve",
    "fit_exponent",
    "window_residual",
    "scaling_fit",
]

DEFAULT_WINDOW = (-1.2, -0.2)
EDGE_MARGIN = 0.1
WIDE_WINDOW = (mod.Z_LEAD + EDGE_MARGIN, mod.Z_TRAIL - EDGE_MARGIN)
MIN_PERIODS = 10
MIN_SAMPLES = 8
N_SCAN = 720


class WindowError(ValueError):
    pass


class UndersamplingError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseFitResult:
    t: float
    s0_hat: float
    window: tuple[float, float]
    rms: float
    curve: np.ndarray = field(repr=False)  # columns (s, misfit)
    n_samples: int = 0
    max_residual: float = math.nan
    z: np.ndarray = field(default=None, repr=False)
    residual: np.ndarray = field(default=None, repr=False)
    sin_correlation: float = math.nan

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "s0_hat": self.s0_hat,
            "window": list(self.window),
            "rms": self.rms,
            "n_samples": self.n_samples,
            "max_residual": self.max_residual,
            "sin_correlation": self.sin_correlation,
        }


@dataclass(frozen=True)
class ScalingFit:
    t_values: tuple[float, ...]
    max_residuals: tuple[float, ...]
    exponent: float
    prefactor: float
    s0_hats: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.t_values) < 3:
            raise ValueError("a scaling fit needs at least three t values")
        if any(b <= a for a, b in zip(self.t_values, self.t_values[1:])):
            raise ValueError("t values must be strictly increasing")


def _check_window(window):
    lo, hi = window
    if not (lo < hi):
        raise WindowError(f"empty fit window {window}")
    if lo < mod.Z_LEAD + EDGE_MARGIN or hi > mod.Z_TRAIL - EDGE_MARGIN:
        raise WindowError(
            f"fit window {window} must keep a margin of {EDGE_MARGIN} from the zone edges "
            f"({mod.Z_LEAD:.6f}, {mod.Z_TRAIL:.6f})"
        )


def fit_phase_curve(t: float, z, U, asym: AsymptoticSolution, window=DEFAULT_WINDOW,
                    n_scan: int = N_SCAN) -> PhaseFitResult:
    """Fit the phase constant to samples U(z) of a scaled solution at time t."""
    window = (float(window[0]), float(window[1]))
    _check_window(window)
    z = np.asarray(z, dtype=float)
    U = np.asarray(U, dtype=float)
    sel = (z >= window[0]) & (z <= window[1])
    z, U = z[sel], U[sel]
    if len(z) < 2:
        raise UndersamplingError("no samples inside the fit window")

    F = asym.fields(z)
    scale = t**PHASE_EXPONENT
    periods = scale * (F.f.max() - F.f.min()) / (2.0 * math.pi)
    if periods < MIN_PERIODS:
        raise WindowError(f"only {periods:.1f} oscillation periods inside the window (need {MIN_PERIODS})")
    dz = np.max(np.diff(z))
    per_period = 2.0 * math.pi / (scale * F.Q.max()) / dz
    if per_period < MIN_SAMPLES:
        raise UndersamplingError(
            f"{per_period:.1f} samples per oscillation period (need {MIN_SAMPLES})"
        )

    base = scale * F.f
    s_grid = np.arange(n_scan) * (2.0 * math.pi / n_scan)
    misfit = np.array([np.mean((U - _u0_from_fields(F, base + s)) ** 2) for s in s_grid])
    i = int(np.argmin(misfit))
    a, b, c = misfit[(i - 1) % n_scan], misfit[i], misfit[(i + 1) % n_scan]
    denom = a - 2.0 * b + c
    shift = 0.5 * (a - c) / denom if denom > 0 else 0.0
    s_hat = (s_grid[i] + shift * (2.0 * math.pi / n_scan)) % (2.0 * math.pi)

    phi = base + s_hat
    resid = U - _u0_from_fields(F, phi)
    sin_phi = np.sin(phi)
    corr = float(np.corrcoef(resid, sin_phi)[0, 1]) if np.std(resid) > 0 else 0.0
    return PhaseFitResult(
        t=float(t),
        s0_hat=float(s_hat),
        window=window,
        rms=float(math.sqrt(np.mean(resid**2))),
        curve=np.column_stack([s_grid, misfit]),
        n_samples=int(len(z)),
        max_residual=float(np.abs(resid).max()),
        z=z,
        residual=resid,
        sin_correlation=corr,
    )


def fit_phase(sol: GridSolution, asym: AsymptoticSolution, window=DEFAULT_WINDOW,
              n_scan: int = N_SCAN) -> PhaseFitResult:
    """Fit the phase constant of a numeric BVP solution (t > 0)."""
    if sol.t <= 0:
        raise ValueError("phase fitting needs t > 0")
    z, U = to_scaled(sol)
    return fit_phase_curve(sol.t, z, U, asym, window, n_scan)


def scaling_fit(t_values: Sequence[float], max_residuals: Sequence[float]) -> ScalingFit:
    """Least-squares slope of log(max residual) against log(t)."""
    t = np.asarray(t_values, dtype=float)
    r = np.asarray(max_residuals, dtype=float)
    slope, intercept = np.polyfit(np.log(t), np.log(r), 1)
    return ScalingFit(tuple(float(v) for v in t), tuple(float(v) for v in r),
                      float(slope), float(math.exp(intercept)))


def window_residual(sol: GridSolution, asym: AsymptoticSolution, s0: float,
                    window=DEFAULT_WINDOW) -> float:
    """max |U_num - U0| over ``window`` with the phase constant fixed at s0."""
    z, U = to_scaled(sol)
    sel = (z >= window[0]) & (z <= window[1])
    F = asym.fields(z[sel])
    phi = sol.t**PHASE_EXPONENT * F.f + s0
    return float(np.abs(U[sel] - _u0_from_fields(F, phi)).max())


def fit_exponent(solutions: Sequence[GridSolution], asym: AsymptoticSolution,
                 window=DEFAULT_WINDOW, fit_window=WIDE_WINDOW) -> ScalingFit:
    """Scaling exponent of the post-fit maximum residual over several times.

    The phase constant of each solution is fitted on ``fit_window`` (by
    default the whole zone less the edge margins, which holds at least ten
    periods already at t = 10); the residual is then measured on the fixed
    ``window`` for every t.
    """
    _check_window(window)
    sols = sorted(solutions, key=lambda s: s.t)
    s0 = [fit_phase(s, asym, fit_window).s0_hat for s in sols]
    res = [window_residual(s, asym, a, window) for s, a in zip(sols, s0)]
    fit = scaling_fit([s.t for s in sols], res)
    return ScalingFit(fit.t_values, fit.max_residuals, fit.exponent, fit.prefactor, tuple(s0))

"""Leading-order evaluation of the oscillating solution and its outer branches.

Inside the Whitham zone the scaled solution is the modulated cnoidal wave

    U0 = A dn^2((K(k)/pi) phi; k) + C,   phi = t^(7/4) f(z) + s0,

and outside it follows the outer roots of the cusp cubic.  Modulation fields
between table nodes come from monotone cubic interpolation of (l1, l2, l3),
optionally polished by a few Newton steps on the Whitham system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import modulation as mod
from .outer import MINUS_INF, NEGATIVE_TIME, PLUS_INF, cusp_root
from .specfun import jacobi_dn

__all__ = [
    "OutOfZoneError",
    "AsymptoticSolution",
    "phase",
    "u0_eval",
    "composite_eval",
    "physical_eval",
    "pde_leading_order_check",
]

PHASE_EXPONENT = 7.0 / 4.0


class OutOfZoneError(ValueError):
    pass


@dataclass(frozen=True)
class AsymptoticSolution:
    table: mod.ModulationTable
    s0: float = math.pi
    polish: bool = True
    _interp: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 <= self.s0 < 2.0 * math.pi):
            object.__setattr__(self, "s0", float(self.s0) % (2.0 * math.pi))
        z = self.table.z
        interp = tuple(PchipInterpolator(z, self.table.column(c)) for c in ("l1", "l2", "l3"))
        object.__setattr__(self, "_interp", interp)

    @classmethod
    def build(cls, n: int = 512, s0: float = math.pi, polish: bool = True):
        return cls(mod.sweep_zone(n), s0=s0, polish=polish)

    def with_phase(self, s0: float) -> "AsymptoticSolution":
        return AsymptoticSolution(self.table, s0=s0, polish=self.polish)

    def triples(self, z) -> np.ndarray:
        """(l1, l2, l3) at each z, shape (n, 3)."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        _check_zone(z)
        L = np.column_stack([f(z) for f in self._interp])
        # keep the ordering that PCHIP could break only at rounding level
        L[:, 1] = np.clip(L[:, 1], L[:, 0], L[:, 2])
        if self.polish:
            # the extreme ends of the zone are left as interpolated
            inner = (z > mod.Z_LEAD + 1e-9) & (z < mod.Z_TRAIL - 1e-9)
            if np.any(inner):
                Lp, _, ok = mod._newton(z[inner], L[inner])
                keep = L[inner]
                keep[ok] = Lp[ok]
                L[inner] = keep
        return L

    def fields(self, z) -> SimpleNamespace:
        """All modulation fields at z as arrays (k, A, C, Q, f, bigK, ...)."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        L = self.triples(z)
        return SimpleNamespace(**mod.derived_fields(z, L[:, 0], L[:, 1], L[:, 2]))


def _check_zone(z):
    z = np.asarray(z, dtype=float)
    if np.any(~(z > mod.Z_LEAD) | ~(z < mod.Z_TRAIL)):
        raise OutOfZoneError(
            f"z must lie strictly inside ({mod.Z_LEAD}, {mod.Z_TRAIL}); got range "
            f"[{np.min(z)}, {np.max(z)}]"
        )


def _scalar_out(value, like):
    return float(value[0]) if np.ndim(like) == 0 else value


def phase(t: float, z, sol: AsymptoticSolution):
    """Fast phase t^(7/4) f(z) + s0."""
    if t <= 0:
        raise ValueError("the oscillating phase is defined for t > 0 only")
    F = sol.fields(z)
    return _scalar_out(t**PHASE_EXPONENT * F.f + sol.s0, z)


def _u0_from_fields(F, phi):
    theta = F.bigK / math.pi * phi
    dn = jacobi_dn(theta, F.k, np.sqrt(F.m1))
    return F.A * dn * dn + F.C


def u0_eval(t: float, z, sol: AsymptoticSolution):
    """Modulated cnoidal wave A dn^2((K/pi) phi; k) + C inside the zone."""
    if t <= 0:
        raise ValueError("the oscillating solution is defined for t > 0 only")
    F = sol.fields(z)
    phi = t**PHASE_EXPONENT * F.f + sol.s0
    return _scalar_out(_u0_from_fields(F, phi), z)


def composite_eval(t: float, z, sol: AsymptoticSolution):
    """Cnoidal wave inside the zone, the matching cubic root outside it."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z_arr)
    left = z_arr <= mod.Z_LEAD
    right = z_arr >= mod.Z_TRAIL
    inside = ~(left | right)
    if np.any(left):
        out[left] = cusp_root(z_arr[left], MINUS_INF)
    if np.any(right):
        out[right] = cusp_root(z_arr[right], PLUS_INF)
    if np.any(inside):
        out[inside] = u0_eval(t, z_arr[inside], sol)
    return _scalar_out(out, z)


def physical_eval(t: float, x, sol: AsymptoticSolution):
    """u(x, t) = sqrt|t| U(z) with z = x/|t|^(3/2)."""
    if t == 0:
        raise ValueError("t = 0 has no scaled representation")
    if t < 0:
        z = np.asarray(x, dtype=float) / abs(t) ** 1.5
        return math.sqrt(-t) * np.asarray(cusp_root(z, NEGATIVE_TIME))[()]
    return math.sqrt(t) * np.asarray(composite_eval(t, np.asarray(x, dtype=float) * t**-1.5, sol))[()]


def pde_leading_order_check(sol: AsymptoticSolution, z: float, t: float = 1e3, n_phi: int = 257):
    """Cancellation of the t^(7/4) terms of the scaled KdV equation.

    With frozen modulation, U = U0(phi(t, z)) gives
        t U_t = (7/4) t^(7/4) f U',   -(3/2) z U_z = -(3/2) z t^(7/4) Q U',
        U U_z = t^(7/4) Q U U',       t^(-7/2) U_zzz = t^(7/4) Q^3 U''',
    (primes are phi-derivatives).  Returns (relative cancellation, max of the
    remaining O(1) residual), the former measured against the largest term.
    """
    F = sol.fields([z])
    p = SimpleNamespace(**{k: v[0] for k, v in vars(F).items()})
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi)
    U, U1, _, U3, _ = mod.u0_phase_derivatives(p, phi)
    s = t**PHASE_EXPONENT
    terms = [
        PHASE_EXPONENT * s * p.f * U1,
        -1.5 * p.z * s * p.Q * U1,
        s * p.Q * U * U1,
        s * p.Q**3 * U3,
    ]
    big = sum(terms)
    scale = max(np.abs(term).max() for term in terms)
    full = big + 0.5 * U
    return float(np.abs(big).max() / scale), float(np.abs(full).max())

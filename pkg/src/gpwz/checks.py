"""Invariant gates for each module, as used by ``gpwz check``.

Every gate returns a ``Gate`` with the measured value, its threshold and a
pass flag.  Suites are plain functions returning lists of gates, so they can
run in any order or in parallel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import gp_bvp, modulation as mod
from .asymptotics import AsymptoticSolution, _u0_from_fields, pde_leading_order_check
from .outer import MINUS_INF, NEGATIVE_TIME, PLUS_INF, FOLD_Z, cusp_root
from .specfun import elliptic_KE, jacobi_dn

__all__ = ["Gate", "SUITES", "run_suite", "manufactured_solution_error"]


@dataclass(frozen=True)
class Gate:
    name: str
    value: float
    threshold: float
    passed: bool

    @classmethod
    def at_most(cls, name, value, threshold):
        value = float(value)
        return cls(name, value, float(threshold), bool(value <= threshold))

    def as_dict(self):
        return asdict(self)


@lru_cache(maxsize=2)
def _table(n=512):
    return mod.sweep_zone(n)


def specfun_gates():
    ks = np.linspace(0.01, 0.99, 99)
    leg = 0.0
    for k in ks:
        a = elliptic_KE(k)
        b = elliptic_KE(math.sqrt((1 - k) * (1 + k)))
        leg = max(leg, abs(a.bigE * b.bigK + b.bigE * a.bigK - a.bigK * b.bigK - math.pi / 2) / (math.pi / 2))

    rng = np.random.default_rng(12345)
    theta = rng.uniform(-5.0, 5.0, 200)
    k = rng.uniform(0.05, 0.95, 200)
    step = 1e-5
    y = lambda th: jacobi_dn(th, k) ** 2  # noqa: E731
    Y = y(theta)
    dY = (y(theta + step) - y(theta - step)) / (2 * step)
    rhs = 4 * Y * (1 - Y) * (Y - 1 + k * k)
    ident = np.max(np.abs(dY**2 - rhs) / np.maximum(1.0, np.abs(rhs)))

    ev = elliptic_KE(0.8)
    Kq = quad(lambda s: 1 / math.sqrt(1 - 0.64 * math.sin(s) ** 2), 0, math.pi / 2, epsabs=1e-14, epsrel=1e-14)[0]
    Eq = quad(lambda s: math.sqrt(1 - 0.64 * math.sin(s) ** 2), 0, math.pi / 2, epsabs=1e-14, epsrel=1e-14)[0]
    quad_err = max(abs(ev.bigK - Kq), abs(ev.bigE - Eq))

    per = 0.0
    th = np.linspace(-3, 3, 61)
    for kk in (0.1, 0.5, 0.9, 0.999):
        K2 = 2 * elliptic_KE(kk).bigK
        per = max(per, np.abs(jacobi_dn(th + K2, kk) - jacobi_dn(th, kk)).max())
    return [
        Gate.at_most("legendre_relation", leg, 1e-12),
        Gate.at_most("dn_differential_identity", ident, 1e-6),
        Gate.at_most("quadrature_KE_k0.8", quad_err, 1e-10),
        Gate.at_most("dn_periodicity", per, 1e-10),
    ]


def outer_gates():
    zs = np.linspace(-20, 20, 4001)
    neg = np.abs(zs + (u := cusp_root(zs, NEGATIVE_TIME)) + u**3).max()
    zl = zs[zs <= FOLD_Z]
    zr = zs[zs >= -FOLD_Z]
    ul = cusp_root(zl, MINUS_INF)
    ur = cusp_root(zr, PLUS_INF)
    pos = max(np.abs(zl - ul + ul**3).max(), np.abs(zr - ur + ur**3).max())
    cont = max(np.abs(np.diff(cusp_root(np.linspace(-3, 0.3, 3301), MINUS_INF))).max(),
               np.abs(np.diff(cusp_root(np.linspace(-0.3, 3, 3301), PLUS_INF))).max())
    big = abs(cusp_root(1e3, PLUS_INF) / -(1e3 ** (1 / 3)) - 1)
    return [
        Gate.at_most("cubic_residual_t_negative", neg, 1e-14),
        Gate.at_most("cubic_residual_t_positive", pos, 1e-14),
        Gate.at_most("branch_step_continuity", cont, 1e-2),
        Gate.at_most("large_z_asymptotics", big, 1e-2),
    ]


def modulation_gates(n=512):
    tab = _table(n)
    pts = tab.points
    constraint = max(abs(mod.whitham_residuals(*p.triple, p.z)[0]) for p in pts)
    dn2 = max(np.abs(mod.dn2_system_residuals(p.A, p.B, p.C, p.R, p.k, p.z)).max() for p in pts)
    pot = max(np.abs(mod.potemin_residuals(*p.triple, p.z)).max() for p in pts)
    ans = max(mod.ansatz_residual(p) for p in pts)
    r11 = max(abs(mod.ak_equation_residuals(p.A, p.k, p.z)[0]) / (1 + p.A**6) for p in pts)
    _, rode, _ = mod.r_ode_residual(tab, 1e-4, (-1.2, 0.0))
    _, fq = mod.phase_gradient_residual(tab, 1e-4, (-1.2, 0.0))
    lim = mod.edge_limits(tab)
    ser = mod.edge_series_check(tab)
    dzH, cH = mod.h_edge_expansion(1e-3)
    triple_err = max(abs(a - b) for a, b in zip(lim["lead_triple"], mod.LEAD_TRIPLE))
    return [
        Gate.at_most("whitham_constraint", constraint, 1e-10),
        Gate.at_most("dn2_system", dn2, 1e-9),
        Gate.at_most("potemin", pot, 1e-8),
        Gate.at_most("ansatz", ans, 1e-8),
        Gate.at_most("degree6_relation_scaled", r11, 1e-6),
        Gate.at_most("r_ode_mid_zone", rode.max(), 1e-4),
        Gate.at_most("phase_gradient_mid_zone", fq.max(), 1e-5),
        Gate.at_most("leading_edge_position", abs(lim["z_lead"] - mod.Z_LEAD), 1e-6),
        Gate.at_most("trailing_edge_position", abs(lim["z_trail"] - mod.Z_TRAIL), 1e-4),
        Gate.at_most("leading_edge_triple", triple_err, 1e-5),
        Gate.at_most("leading_edge_R", abs(lim["lead_R"] + math.sqrt(2) / 6), 1e-5),
        Gate.at_most("leading_edge_U0", abs(lim["lead_U0"] - math.sqrt(2)), 1e-5),
        Gate.at_most("k_series_rel_dev", ser["k_probe_rel_dev"], 1e-2),
        Gate.at_most("H_edge_product", abs(dzH - 1), 1e-2),
        Gate.at_most("H_edge_constant", abs(cH + 543 / 1600 * math.sqrt(2)), 5e-2),
    ]


def asymptotics_gates(n=512):
    sol = AsymptoticSolution(_table(n))
    cancel = max(pde_leading_order_check(sol, z)[0] for z in (-1.0, -0.7, -0.3))
    z = np.linspace(-1.3, 0.05, 101)
    F = sol.fields(z)
    phi = np.linspace(0, 2 * math.pi, 33)[:, None]
    U = _u0_from_fields(F, phi)
    U2 = _u0_from_fields(F, phi + 2 * math.pi)
    lo = F.C + F.A * (1 - F.k**2)
    hi = F.C + F.A
    rng = max(np.max(lo - U), np.max(U - hi), 0.0)
    L = sol.triples(np.linspace(-1.41, 0.117, 2001))
    l1, l2, l3 = L.T
    cons = np.abs(3 * (l1**2 + l2**2 + l3**2) + 2 * (l1 * l2 + l2 * l3 + l3 * l1) - 5).max()
    return [
        Gate.at_most("leading_order_cancellation", cancel, 1e-8),
        Gate.at_most("phase_periodicity", np.abs(U2 - U).max(), 1e-10),
        Gate.at_most("range_violation", rng, 1e-12),
        Gate.at_most("interpolated_constraint", cons, 1e-6),
    ]


def manufactured_solution_error(h=0.02, t=1.0, order=4):
    """Recover u* = sin(x) with the discrete forcing that makes it exact."""
    x = gp_bvp.make_grid(0.0, 2.0 * math.pi, h)
    h = x[1] - x[0]
    s = np.sin(x)
    bc = gp_bvp.BoundaryData(float(s[0]), float(np.cos(x[0])), float(s[-1]), float(np.cos(x[-1])))
    forcing = gp_bvp.ode_residual(s, t, x, order=order, bc=bc)
    cfg = gp_bvp.SolverConfig(h=h, order=order, tol=1e-10)
    y = np.empty(2 * len(x))
    y[0::2] = s + 0.1 * np.sin(2 * x)
    y[1::2] = gp_bvp._second_derivative(y[0::2], h, order)
    y, _, _ = gp_bvp.newton_solve(y, x, t, h, cfg, bc=bc, forcing=forcing)
    return float(np.abs(y[0::2] - s).max())


def bvp_gates():
    sol = gp_bvp.solve_fixed_t(-7.0, gp_bvp.SolverConfig(x_min=-60.0, x_max=60.0))
    z, U = gp_bvp.to_scaled(sol)
    dev = np.abs(U - cusp_root(z, NEGATIVE_TIME)).max()
    b = gp_bvp.boundary_data(sol.x, sol.t)
    bc_err = max(abs(sol.u[0] - b.u_left), abs(sol.u[-1] - b.u_right))
    return [
        Gate.at_most("negative_time_vs_root", dev, 0.05),
        Gate.at_most("negative_time_residual", sol.converged, 1e-9),
        Gate.at_most("boundary_values", bc_err, 1e-12),
        Gate.at_most("manufactured_solution", manufactured_solution_error(), 1e-8),
    ]


SUITES = {
    "specfun": specfun_gates,
    "outer": outer_gates,
    "modulation": modulation_gates,
    "asymptotics": asymptotics_gates,
    "bvp": bvp_gates,
}


def run_suite(name: str) -> dict[str, list[Gate]]:
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return {n: SUITES[n]() for n in names}

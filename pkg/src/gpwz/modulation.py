"""Slowly varying parameters of the cnoidal wave across the Whitham zone.

The primary unknowns are the Whitham variables ``l1 <= l2 <= l3``.  At a
given ``z`` they satisfy three algebraic equations (a quadratic constraint,
a cubic ``z``-equation and a transcendental ``q``-equation with
``q = E(k)/K(k)``); every other modulation parameter follows from them:

    A = 2 (l3 - l1),  C = l1 + l2 - l3,  k^2 = (l2 - l1)/(l3 - l1),
    B = sqrt(A/12),   Q = pi B / K(k),   R = (k^2 - 2) A/3 - C,
    f = Q (4 R + 6 z)/7.

The dn^2-substitution system, the R-ODE, H(z, R), the Potemin form and the
(A, k) relations are provided as independent residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .specfun import ellipke, ellipke_dm, jacobi_sncndn

__all__ = [
    "Z_LEAD",
    "Z_TRAIL",
    "LEAD_TRIPLE",
    "TRAIL_TRIPLE",
    "ModulationPoint",
    "ModulationTable",
    "DegenerateTripleError",
    "ModulationConvergenceError",
    "PoleError",
    "whitham_residuals",
    "solve_point",
    "solve_points",
    "edge_guess",
    "sweep_zone",
    "edge_limits",
    "ansatz_residual",
    "u0_phase_derivatives",
    "ansatz_residuals",
    "dn2_system_residuals",
    "r_ode_rhs",
    "r_ode_residual",
    "phase_gradient_residual",
    "h_numerator",
    "eval_H",
    "edge_series",
    "edge_series_check",
    "h_edge_expansion",
    "potemin_residuals",
    "ak_equation_residuals",
    "derived_fields",
]

SQRT2 = math.sqrt(2.0)
Z_LEAD = -SQRT2
Z_TRAIL = math.sqrt(10.0) / 27.0
LEAD_TRIPLE = (-SQRT2 / 4.0, -SQRT2 / 4.0, SQRT2)
TRAIL_TRIPLE = (-math.sqrt(10.0) / 3.0, math.sqrt(10.0) / 4.0, math.sqrt(10.0) / 4.0)

NEWTON_TOL = 1e-11
NEWTON_MAXITER = 50
SLOW_NEWTON = 8  # more iterations than this triggers step halving in the sweep


class DegenerateTripleError(ValueError):
    pass


class ModulationConvergenceError(RuntimeError):
    def __init__(self, message: str, z: float | None = None):
        super().__init__(message if z is None else f"{message} (z = {z!r})")
        self.z = z


class PoleError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class ModulationPoint:
    z: float
    l1: float
    l2: float
    l3: float
    k: float
    q: float
    A: float
    B: float
    C: float
    R: float
    Q: float
    f: float

    @classmethod
    def from_triple(cls, z: float, l1: float, l2: float, l3: float) -> "ModulationPoint":
        d = derived_fields(z, l1, l2, l3)
        return cls(**{name: float(d[name]) for name in COLUMNS})

    @property
    def triple(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    @property
    def m(self) -> float:
        return (self.l2 - self.l1) / (self.l3 - self.l1)

    @property
    def m1(self) -> float:
        return (self.l3 - self.l2) / (self.l3 - self.l1)

    @property
    def bigK(self) -> float:
        return math.inf if self.m1 == 0 else float(ellipke(self.m, self.m1)[0])


COLUMNS = tuple(f.name for f in fields(ModulationPoint))


def derived_fields(z, l1, l2, l3) -> dict:
    """All modulation fields from the Whitham triple (vectorised)."""
    z, l1, l2, l3 = (np.asarray(v, dtype=float) for v in (z, l1, l2, l3))
    span = l3 - l1
    m = (l2 - l1) / span
    m1 = (l3 - l2) / span
    A = 2.0 * span
    C = l1 + l2 - l3
    R = (m - 2.0) * A / 3.0 - C
    B = np.sqrt(A / 12.0)
    soliton = m1 <= 0
    K, E = ellipke(np.where(soliton, 0.5, m), np.where(soliton, 0.5, m1))
    K = np.where(soliton, np.inf, K)
    q = np.where(soliton, 0.0, E / K)
    Q = np.pi * B / K
    f = Q * (4.0 * R + 6.0 * z) / 7.0
    k = np.sqrt(m)
    return dict(z=z, l1=l1, l2=l2, l3=l3, k=k, q=q, A=A, B=B, C=C, R=R, Q=Q, f=f,
                m=m, m1=m1, bigK=K)


# --- Whitham system -------------------------------------------------------

def _constraint(l1, l2, l3):
    return 3.0 * (l1 * l1 + l2 * l2 + l3 * l3) + 2.0 * (l1 * l2 + l2 * l3 + l3 * l1) - 5.0


def _z_poly(l1, l2, l3):
    return (2.0 / 45.0) * (
        l1 * (8 * l2**2 + 4 * l2 * l3 + 8 * l3**2 - 15)
        - (l2 + l3) * (24 * l2**2 - 8 * l2 * l3 + 24 * l3**2 - 25)
    )


def _q_num(l1, l2, l3):
    # numerator of the q-equation without its (l2 - l3) factor
    return 3 * l2 * l3 + 3 * l3 * l1 + 9 * l3**2 - 5


def _q_den(l1, l2, l3):
    return l1 * (2 * l2**2 + l2 * l3 + 2 * l3**2 - 5) - (l2 + l3) * (
        6 * l2**2 - 2 * l2 * l3 + 6 * l3**2 - 5
    )


def whitham_residuals(l1: float, l2: float, l3: float, z: float):
    """Raw residuals (constraint, z-equation, q-equation) of the Whitham system."""
    if l3 - l1 < 1e-12:
        raise DegenerateTripleError("l3 - l1 must exceed 1e-12")
    if not (l1 <= l2 <= l3):
        raise DegenerateTripleError(f"triple must be ordered, got {(l1, l2, l3)}")
    den = _q_den(l1, l2, l3)
    if den == 0:
        raise DegenerateTripleError("q-equation denominator vanishes")
    m1 = (l3 - l2) / (l3 - l1)
    if m1 == 0:
        q = 0.0
    else:
        K, E = ellipke((l2 - l1) / (l3 - l1), m1)
        q = E / K
    r_q = q - 0.5 * (l2 - l3) * _q_num(l1, l2, l3) / den
    return (float(_constraint(l1, l2, l3)), float(z - _z_poly(l1, l2, l3)), float(r_q))


def _system(L, z):
    """Regularised residual and Jacobian, batched over rows of ``L``.

    The q-equation  q = (l2 - l3) N / (2 D)  is multiplied through by D/q:
        D + (l3 - l2) N / (2 q) = 0,
    which removes the spurious solution family l2 = l3 (where q = 0 and the
    raw q-equation is satisfied for every z) and stays finite at both edges.
    """
    l1, l2, l3 = L[:, 0], L[:, 1], L[:, 2]
    span = l3 - l1
    m = (l2 - l1) / span
    m1 = (l3 - l2) / span
    K, E, dK, dE = ellipke_dm(m, m1)
    K, E, dK, dE = (np.atleast_1d(v) for v in (K, E, dK, dE))
    q = E / K
    dq_dm = (dE * K - E * dK) / (K * K)
    dm = np.stack([-(l3 - l2) / span**2, 1.0 / span, -(l2 - l1) / span**2], axis=1)

    N = _q_num(l1, l2, l3)
    D = _q_den(l1, l2, l3)
    gap = l3 - l2

    F = np.empty_like(L)
    F[:, 0] = _constraint(l1, l2, l3)
    F[:, 1] = z - _z_poly(l1, l2, l3)
    F[:, 2] = D + gap * N / (2.0 * q)

    J = np.empty((L.shape[0], 3, 3))
    J[:, 0, 0] = 6 * l1 + 2 * (l2 + l3)
    J[:, 0, 1] = 6 * l2 + 2 * (l1 + l3)
    J[:, 0, 2] = 6 * l3 + 2 * (l1 + l2)

    zc = 24 * l2**2 - 8 * l2 * l3 + 24 * l3**2 - 25
    dP1 = 8 * l2**2 + 4 * l2 * l3 + 8 * l3**2 - 15
    dP2 = l1 * (16 * l2 + 4 * l3) - zc - (l2 + l3) * (48 * l2 - 8 * l3)
    dP3 = l1 * (4 * l2 + 16 * l3) - zc - (l2 + l3) * (48 * l3 - 8 * l2)
    J[:, 1, 0] = -(2.0 / 45.0) * dP1
    J[:, 1, 1] = -(2.0 / 45.0) * dP2
    J[:, 1, 2] = -(2.0 / 45.0) * dP3

    dc = 6 * l2**2 - 2 * l2 * l3 + 6 * l3**2 - 5
    dD = np.stack([
        2 * l2**2 + l2 * l3 + 2 * l3**2 - 5,
        l1 * (4 * l2 + l3) - dc - (l2 + l3) * (12 * l2 - 2 * l3),
        l1 * (l2 + 4 * l3) - dc - (l2 + l3) * (12 * l3 - 2 * l2),
    ], axis=1)
    dN = np.stack([3 * l3, 3 * l3, 3 * (l1 + l2) + 18 * l3], axis=1)
    dgap = np.array([0.0, -1.0, 1.0])
    J[:, 2, :] = (
        dD
        + (dgap[None, :] * N[:, None] + gap[:, None] * dN) / (2.0 * q[:, None])
        - (gap * N / (2.0 * q * q) * dq_dm)[:, None] * dm
    )
    return F, J


def _ordered(L):
    return (L[:, 0] <= L[:, 1]) & (L[:, 1] <= L[:, 2]) & (L[:, 2] - L[:, 0] > 1e-12)


def _newton(z, L, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Damped Newton on the batched system; returns (L, iterations, converged)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    L = np.array(L, dtype=float, ndmin=2)
    if not np.all(_ordered(L)):
        raise DegenerateTripleError("initial triple is not ordered l1 <= l2 <= l3")
    done = np.zeros(len(z), dtype=bool)
    iters = np.zeros(len(z), dtype=int)
    for _ in range(maxiter + 1):
        F, J = _system(L, z)
        norm = np.abs(F).max(axis=1)
        done = norm <= tol
        if np.all(done):
            break
        active = ~done
        iters[active] += 1
        if np.any(iters > maxiter):
            break
        try:
            step = np.linalg.solve(J[active], -F[active][..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        lam = np.ones(active.sum())
        La = L[active]
        na = norm[active]
        za = z[active]
        trial = La + step
        for _h in range(40):
            ok = _ordered(trial)
            if np.any(ok):
                Ft, _ = _system(np.where(ok[:, None], trial, La), za)
                nt = np.abs(Ft).max(axis=1)
                ok &= (nt < na) | (nt <= tol) | (lam >= 1.0) & (nt < 10 * na)
            if np.all(ok):
                break
            lam = np.where(ok, lam, 0.5 * lam)
            trial = La + lam[:, None] * step
        else:
            break
        L[active] = trial
    F, _ = _system(L, z)
    converged = np.abs(F).max(axis=1) <= tol
    return L, iters, converged


def solve_points(z, guesses):
    """Batched fixed-z solve; raises on the first point that fails."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    L, _, conv = _newton(z, guesses)
    if not np.all(conv):
        bad = z[~conv][0]
        raise ModulationConvergenceError("Whitham Newton solve failed", float(bad))
    return L


def _as_triple(guess):
    if isinstance(guess, ModulationPoint):
        return guess.triple
    return tuple(float(v) for v in guess)


def solve_point(z: float, guess) -> ModulationPoint:
    """Solve the Whitham system at fixed z, starting from ``guess``.

    ``guess`` is a ModulationPoint or an ordered (l1, l2, l3) triple.  Newton
    steps that break the ordering or fail to reduce the residual are halved.
    """
    if not (Z_LEAD < z < Z_TRAIL):
        raise ValueError(f"z = {z} is outside the Whitham zone ({Z_LEAD}, {Z_TRAIL})")
    L, iters, conv = _newton([z], [_as_triple(guess)])
    if not conv[0]:
        raise ModulationConvergenceError("Whitham Newton solve failed", float(z))
    p = ModulationPoint.from_triple(z, *L[0])
    object.__setattr__(p, "_iterations", int(iters[0]))
    return p


# --- near-edge expansions -------------------------------------------------

def edge_series(dz):
    """Leading-edge expansions of k and R in powers of dz = z - z_lead."""
    dz = np.asarray(dz, dtype=float)
    s = np.sqrt(dz)
    k = (2.0**0.875 / math.sqrt(5.0)) * dz**0.25 * (
        1.0 - (2.0**0.75 / 10.0) * s + (131.0 / 1280.0) * SQRT2 * dz
    )
    R = -SQRT2 / 6.0 + dz / 40.0 + (7.0 / 2560.0) * SQRT2 * dz * dz
    return k, R


def edge_guess(z: float) -> tuple[float, float, float]:
    """Triple near the leading edge built from the k and R expansions.

    With m = k^2 and S1 = l1 + l2 + l3 = -3R fixed, l2 = l1 + m (l3 - l1) and
    the quadratic constraint leave one quadratic for l3.
    """
    k, R = edge_series(z - Z_LEAD)
    m = float(k) ** 2
    S1 = -3.0 * float(R)
    # l1 = (S1 - (1 + m) l3)/(2 - m) =: a + b l3
    a = S1 / (2.0 - m)
    b = -(1.0 + m) / (2.0 - m)
    # l2 = l1 + m (l3 - l1) = (1 - m) l1 + m l3 = c + d l3
    c = (1.0 - m) * a
    d = (1.0 - m) * b + m
    # 3 sum l_i^2 + 2 sum l_i l_j - 5 = 0 as a quadratic in l3
    qa = 3 * (b * b + d * d + 1) + 2 * (b * d + d + b)
    qb = 3 * (2 * a * b + 2 * c * d) + 2 * (a * d + b * c + c + a)
    qc = 3 * (a * a + c * c) + 2 * a * c - 5
    disc = math.sqrt(max(qb * qb - 4 * qa * qc, 0.0))
    roots = [(-qb + disc) / (2 * qa), (-qb - disc) / (2 * qa)]
    l3 = min(roots, key=lambda r: abs(r - SQRT2))
    return (a + b * l3, c + d * l3, l3)


# --- tables ---------------------------------------------------------------

@dataclass(frozen=True)
class ModulationTable:
    points: tuple[ModulationPoint, ...]
    z_lead: float = Z_LEAD
    z_trail: float = Z_TRAIL

    def __post_init__(self):
        z = [p.z for p in self.points]
        if any(b <= a for a, b in zip(z, z[1:])):
            raise ValueError("table points must be strictly increasing in z")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])

    @property
    def z(self) -> np.ndarray:
        return self.column("z")

    def as_array(self) -> np.ndarray:
        return np.array([[getattr(p, c) for c in COLUMNS] for p in self.points])

    @classmethod
    def from_triples(cls, z, l1, l2, l3) -> "ModulationTable":
        return cls(tuple(ModulationPoint.from_triple(*row) for row in zip(z, l1, l2, l3)))


def zone_nodes(n: int, lead_min=1e-7, trail_min=1e-8, edge_width=2e-2) -> np.ndarray:
    """z nodes: geometric clustering at both edges, uniform in between."""
    n_edge = min(n // 4, max(16, n // 8))
    n_mid = n - 2 * n_edge
    lead = Z_LEAD + np.geomspace(lead_min, edge_width, n_edge, endpoint=False)
    trail = Z_TRAIL - np.geomspace(edge_width, trail_min, n_edge + 1)[1:]
    mid = np.linspace(Z_LEAD + edge_width, Z_TRAIL - edge_width, n_mid)
    return np.concatenate([lead, mid, trail])


def sweep_zone(n: int = 512, nodes: Sequence[float] | None = None) -> ModulationTable:
    """Continuation sweep from the leading to the trailing edge.

    The first node is seeded from the leading-edge expansion; each later node
    is predicted by secant extrapolation from the two previous solutions and
    corrected by ``solve_point``.  Slow or failed corrections trigger
    halving of the z-step through intermediate (unrecorded) substeps.
    """
    if n < 16:
        raise ValueError("sweep_zone needs n >= 16")
    z_nodes = zone_nodes(n) if nodes is None else np.asarray(nodes, dtype=float)
    points: list[ModulationPoint] = []
    prev: list[tuple[float, np.ndarray]] = []

    def predict(z):
        if not prev:
            return edge_guess(z)
        if len(prev) == 1:
            return tuple(prev[-1][1])
        (za, La), (zb, Lb) = prev[-2], prev[-1]
        L = Lb + (Lb - La) * (z - zb) / (zb - za)
        if L[0] <= L[1] <= L[2]:
            return tuple(L)
        return tuple(Lb)

    def attempt(z):
        L, iters, conv = _newton([z], [predict(z)])
        ok = conv[0] and iters[0] <= SLOW_NEWTON
        return (L[0] if conv[0] else None), ok

    for z_target in z_nodes:
        z_from = prev[-1][0] if prev else None
        L, ok = attempt(z_target)
        if not ok and z_from is not None:
            # walk towards z_target with halved steps
            dz = (z_target - z_from) / 2.0
            z_cur = z_from
            while z_cur < z_target:
                z_next = min(z_cur + dz, z_target)
                L_sub, ok_sub = attempt(z_next)
                if L_sub is None:
                    dz /= 2.0
                    if dz < 1e-14:
                        raise ModulationConvergenceError("continuation stalled", float(z_next))
                    continue
                prev.append((z_next, L_sub))
                z_cur = z_next
                if not ok_sub:
                    dz /= 2.0
            L = prev[-1][1]
        elif L is None:
            raise ModulationConvergenceError("continuation failed at first node", float(z_target))
        else:
            prev.append((z_target, L))
        points.append(ModulationPoint.from_triple(z_target, *L))
        prev = prev[-2:]
    return ModulationTable(tuple(points))


def edge_limits(table: ModulationTable, n_fit: int = 8) -> dict:
    """Extrapolate the sweep to k -> 0 and k -> 1.

    Near the leading edge z - z_lead ~ m^2, so z is fitted by a polynomial in
    m with no linear term and the l's, R by quadratics in m.  Near the
    trailing edge z is fitted linearly-quadratically in w = (1 - m)/q.
    """
    pts = table.points
    head = pts[:n_fit]
    m = np.array([p.m for p in head])
    z = np.array([p.z for p in head])
    Vz = np.column_stack([np.ones_like(m), m**2, m**3])
    z_lead = float(np.linalg.lstsq(Vz, z, rcond=None)[0][0])
    Vl = np.column_stack([np.ones_like(m), m, m**2])

    def at_lead(name):
        y = np.array([getattr(p, name) for p in head])
        return float(np.linalg.lstsq(Vl, y, rcond=None)[0][0])

    tail = pts[-n_fit:]
    w = np.array([p.m1 / p.q for p in tail])
    zt = np.array([p.z for p in tail])
    Vt = np.column_stack([np.ones_like(w), w, w**2])
    z_trail = float(np.linalg.lstsq(Vt, zt, rcond=None)[0][0])
    return {
        "z_lead": z_lead,
        "z_trail": z_trail,
        "lead_triple": (at_lead("l1"), at_lead("l2"), at_lead("l3")),
        "lead_R": at_lead("R"),
        "lead_A": at_lead("A"),
        "lead_U0": at_lead("A") + at_lead("C"),
    }


# --- the U0 equations -----------------------------------------------------

def u0_phase_derivatives(p: ModulationPoint, phi):
    """U0 and its first four phi-derivatives, from dn identities.

    With Y = dn^2(theta), theta = (K/pi) phi:  Y'^2 = P(Y) where
    P(Y) = -4Y^3 + 4(1 + k'^2) Y^2 - 4 k'^2 Y, so Y'' = P'/2,
    Y''' = P'' Y'/2 and Y'''' = P''' Y'^2/2 + P'' Y''/2.

    ``p`` is a ModulationPoint or any object with array attributes
    m, m1, k, bigK, A, C that broadcast against ``phi``.
    """
    m, m1 = p.m, p.m1
    c = p.bigK / math.pi
    kp = np.sqrt(m1)
    sn, cn, dn = jacobi_sncndn(c * np.asarray(phi, dtype=float), p.k, kp)
    Y = dn * dn
    Y1 = -2.0 * m * sn * cn * dn
    P1 = -12.0 * Y * Y + 8.0 * (1.0 + m1) * Y - 4.0 * m1
    P2 = -24.0 * Y + 8.0 * (1.0 + m1)
    Y2 = 0.5 * P1
    Y3 = 0.5 * P2 * Y1
    Y4 = -12.0 * Y1 * Y1 + 0.5 * P2 * Y2
    A = p.A
    return (A * Y + p.C, A * c * Y1, A * c**2 * Y2, A * c**3 * Y3, A * c**4 * Y4)


def ansatz_residuals(p: ModulationPoint, phi):
    """Pointwise residuals of the first-, third- and fourth-order U0 equations."""
    U, U1, U2, U3, U4 = u0_phase_derivatives(p, phi)
    Q, R, z = p.Q, p.R, p.z
    first = (Q * Q * U1 * U1 + U**3 / 3.0 + R * U * U + (18 * R * R - 5) * U / 3.0
             + (15 * R - 54 * R**3 - 5 * z) / 3.0)
    third = Q**3 * U3 + Q * R * U1 + Q * U * U1
    fourth = (Q**4 * U4 + (5.0 / 6.0) * Q * Q * (2.0 * U * U2 + U1 * U1)
              + (5.0 / 18.0) * (z - U + U**3))
    return first, third, fourth


def ansatz_residual(p: ModulationPoint, theta_grid=None) -> float:
    if theta_grid is None:
        theta_grid = np.linspace(0.0, 2.0 * math.pi, 257)
    return float(max(np.abs(r).max() for r in ansatz_residuals(p, theta_grid)))


def dn2_system_residuals(A, B, C, R, k, z) -> np.ndarray:
    """Residuals of the dn^2 coefficient system (corrected second and third rows)."""
    m = k * k
    return np.array([
        A - 12.0 * B * B,
        4.0 * (2.0 - m) * B * B + C + R,
        (m - 1.0) * A * A + 3.0 * C * C + 6.0 * C * R + 18.0 * R * R - 5.0,
        C**3 + 3.0 * R * C * C + (18.0 * R * R - 5.0) * C - 54.0 * R**3 + 15.0 * R - 5.0 * z,
    ])


# --- R-equation and H -----------------------------------------------------

def r_ode_rhs(z, R):
    num = 486 * R**4 - 171 * R**2 + 9 * z * R + 5
    den = 9 * (54 * R**3 - 9 * R + z) * (2 * R + 3 * z)
    return num / den


def _centered(table, h, fn, z_range=None):
    zs, out = [], []
    for p in table.points:
        if not (Z_LEAD < p.z - h and p.z + h < Z_TRAIL):
            continue
        if z_range is not None and not (z_range[0] <= p.z <= z_range[1]):
            continue
        lo = solve_point(p.z - h, p)
        hi = solve_point(p.z + h, p)
        zs.append(p.z)
        out.append(fn(p, lo, hi))
    return np.array(zs), np.array(out)


def r_ode_residual(table: ModulationTable, h: float = 1e-4, z_range=None):
    """|centered dR/dz - RHS| at interior table points.

    Returns (z, residual, singular) where ``singular`` flags points with
    |54R^3 - 9R + z| < 1e-4, at which the RHS is not trusted.
    """
    def fn(p, lo, hi):
        slope = (hi.R - lo.R) / (2 * h)
        return abs(slope - r_ode_rhs(p.z, p.R)), abs(54 * p.R**3 - 9 * p.R + p.z) < 1e-4

    z, res = _centered(table, h, fn, z_range)
    if len(z) == 0:
        return z, np.array([]), np.array([], dtype=bool)
    return z, res[:, 0], res[:, 1].astype(bool)


def phase_gradient_residual(table: ModulationTable, h: float = 1e-4, z_range=None):
    """|centered df/dz - Q| at interior table points."""
    z, res = _centered(table, h, lambda p, lo, hi: abs((hi.f - lo.f) / (2 * h) - p.Q), z_range)
    return z, res


def h_numerator(z, R):
    """Numerator polynomial N(z, R) of H; exact for int/Fraction/sympy input."""
    return (45 * z**3 + (4860 * R**3 - 582 * R) * z**2
            + (131220 * R**6 - 43416 * R**4 + 2721 * R**2 - 35) * z
            + 139968 * R**7 - 59616 * R**5 + 6048 * R**3 - 120 * R)


def eval_H(z, R):
    den = (54 * R**3 - 9 * R + z) ** 2 * (2 * R + 3 * z) ** 2
    if den == 0:
        raise PoleError(f"H has a pole at (z, R) = ({z}, {R})")
    return h_numerator(z, R) / (3 * den)


def h_edge_expansion(dz: float = 1e-3) -> tuple[float, float]:
    """Leading-edge behaviour of H along the solved R(z).

    Returns (dz * H, c) where c estimates lim (H - 1/dz) by Richardson
    extrapolation from dz and dz/2, assuming an O(dz) remainder.
    """
    def excess(d):
        z = Z_LEAD + d
        p = solve_point(z, edge_guess(z))
        return float(eval_H(p.z, p.R)), float(eval_H(p.z, p.R)) - 1.0 / d

    H1, e1 = excess(dz)
    _, e2 = excess(dz / 2.0)
    return dz * H1, 2.0 * e2 - e1


def edge_series_check(table: ModulationTable, dz_probe: float = 1e-3) -> dict:
    """Compare the solved modulation near the leading edge with the expansions."""
    lead = [p for p in table.points if 1e-4 <= p.z - Z_LEAD <= 1e-2]
    dz = np.array([p.z - Z_LEAD for p in lead])
    k_num = np.array([p.k for p in lead])
    R_num = np.array([p.R for p in lead])
    k_ser, R_ser = edge_series(dz)

    guess = min(table.points, key=lambda p: abs(p.z - Z_LEAD - dz_probe))
    probe = solve_point(Z_LEAD + dz_probe, guess)
    k_probe_series = float(edge_series(dz_probe)[0])

    # k / dz^(1/4) = c0 (1 + c1 dz^(1/2) + ...): intercept is the leading coefficient
    small = dz <= 2e-3
    s = np.sqrt(dz[small])
    V = np.column_stack([np.ones_like(s), s, s * s])
    lead_coeff = float(np.linalg.lstsq(V, k_num[small] / dz[small] ** 0.25, rcond=None)[0][0])

    # one-sided quadratic fit of R on dz
    Vr = np.column_stack([np.ones_like(dz), dz, dz * dz])
    cR = np.linalg.lstsq(Vr, R_num, rcond=None)[0]
    return {
        "dz": dz,
        "k_rel_dev": np.abs(k_num / k_ser - 1.0),
        "R_rel_dev": np.abs(R_num / R_ser - 1.0),
        "k_probe": probe.k,
        "k_probe_series": k_probe_series,
        "k_probe_rel_dev": abs(probe.k / k_probe_series - 1.0),
        "k_leading_coefficient": lead_coeff,
        "R_edge": float(cR[0]),
        "dRdz_edge": float(cR[1]),
    }


# --- Potemin form and the (A, k) relations --------------------------------

def potemin_residuals(l1: float, l2: float, l3: float, z: float) -> np.ndarray:
    """Residuals z - Y_j + Z_j of the three Potemin equations."""
    m = (l2 - l1) / (l3 - l1)
    m1 = (l3 - l2) / (l3 - l1)
    K, E = ellipke(m, m1)
    q = E / K
    dens = (1.0 - q, 1.0 - q - m, q)
    if min(abs(d) for d in dens) < 1e-14:
        raise DegenerateTripleError("Potemin Y_j denominator vanishes at this triple")
    S1 = l1 + l2 + l3
    S2 = l1 * l2 + l2 * l3 + l3 * l1
    S3 = l1 * l2 * l3
    V = 5 * S1**3 - 12 * S1 * S2 + 8 * S3
    Y = (
        S1 / 3 + (2.0 / 3.0) * (l1 - l2) / (1.0 - q),
        S1 / 3 - (2.0 / 3.0) * (l1 - l2) * m1 / (1.0 - q - m),
        S1 / 3 + (2.0 / 3.0) * (l3 - l2) / q,
    )
    dS2 = (l2 + l3, l1 + l3, l1 + l2)
    dS3 = (l2 * l3, l1 * l3, l1 * l2)
    out = []
    for j in range(3):
        dV = 15 * S1**2 - 12 * S2 - 12 * S1 * dS2[j] + 8 * dS3[j]
        Zj = (V + (3 * Y[j] - S1) * dV) / 35.0
        out.append(z - Y[j] + Zj)
    return np.array(out)


def ak_equation_residuals(A: float, k: float, z: float, *, printed: bool = False):
    """Residuals of the degree-6 (A, k, z) relation and the q-bearing relation.

    The degree-6 coefficient is palindromic (8, -24, 43, -46, 43, -24, 8) by
    default; ``printed=True`` uses the sign pattern -43, +24, -8 in the tail.
    """
    m = k * k
    if printed:
        c6 = 8 * m**6 - 24 * m**5 + 43 * m**4 - 46 * m**3 - 43 * m**2 + 24 * m - 8
    else:
        c6 = 8 * m**6 - 24 * m**5 + 43 * m**4 - 46 * m**3 + 43 * m**2 - 24 * m + 8
    g = m * m - m + 1
    r11 = (c6 * A**6 - 140 * g**2 * A**4 + 50 * z * (m - 2) * (2 * m - 1) * (m + 1) * A**3
           + 500 * g * A**2 + 3375 * z**2 - 500)
    if k >= 1.0:
        q = 0.0
    else:
        K, E = ellipke(m, (1.0 - k) * (1.0 + k))
        q = E / K
    r12 = (21 * m**2 * (m - 1) ** 2 * A**3
           + 10 * ((2 * q - 1) * m**3 - (3 * q + 1) * m**2 - (3 * q - 4) * m + (2 * q - 2)) * A
           + 315 * z * ((2 * q - 1) * m**2 - (2 * q - 3) * m + (2 * q - 2)))
    return float(r11), float(r12)

"""Real root branches of the cusp-catastrophe cubic.

In scaled variables the dispersionless solution solves ``z - U + U**3 = 0``
for t > 0 and ``z + U + U**3 = 0`` for t < 0.  For t > 0 and
|z| < 2/sqrt(27) there are three real roots; only the two outer ones are ever
returned, each selected by continuation from |z| = infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Branch",
    "CubicBranch",
    "BranchError",
    "FoldPointError",
    "FOLD_Z",
    "cusp_root",
    "cusp_root_derivative",
    "cubic_root_physical",
]

FOLD_Z = 2.0 / math.sqrt(27.0)
_SQRT3 = math.sqrt(3.0)


class Branch(str, Enum):
    FROM_PLUS_INFINITY = "from_plus_infinity"
    FROM_MINUS_INFINITY = "from_minus_infinity"
    UNIQUE = "unique"


class BranchError(ValueError):
    pass


class FoldPointError(ValueError):
    pass


@dataclass(frozen=True)
class CubicBranch:
    t_sign: int
    branch: Branch = Branch.UNIQUE

    def __post_init__(self):
        if self.t_sign not in (-1, 1):
            raise ValueError(f"t_sign must be +1 or -1, got {self.t_sign}")
        object.__setattr__(self, "branch", Branch(self.branch))


PLUS_INF = CubicBranch(+1, Branch.FROM_PLUS_INFINITY)
MINUS_INF = CubicBranch(+1, Branch.FROM_MINUS_INFINITY)
NEGATIVE_TIME = CubicBranch(-1, Branch.UNIQUE)


def _seed_positive_time(z, branch: Branch):
    """Closed-form (trigonometric/hyperbolic Cardano) root of U^3 - U + z = 0."""
    a = 1.5 * _SQRT3 * z  # U = (2/sqrt3) w reduces to 4w^3 - 3w = -a
    seed = np.empty_like(z)
    three = np.abs(a) <= 1.0
    # three real roots: w = cos(arccos(-a)/3 - 2 pi j/3)
    top = (2.0 / _SQRT3) * np.cos(np.arccos(np.clip(-a, -1, 1)) / 3.0)
    bottom = -(2.0 / _SQRT3) * np.cos(np.arccos(np.clip(a, -1, 1)) / 3.0)
    # single real root: w = -sign(a) cosh(arccosh(|a|)/3)
    single = -np.sign(a) * (2.0 / _SQRT3) * np.cosh(np.arccosh(np.maximum(np.abs(a), 1.0)) / 3.0)
    if branch is Branch.FROM_MINUS_INFINITY:
        seed = np.where(three, top, single)
    else:
        seed = np.where(three, bottom, single)
    return seed


def _polish(U, f, df, steps=3):
    for _ in range(steps):
        d = df(U)
        U = U - np.where(d != 0, f(U) / np.where(d != 0, d, 1.0), 0.0)
    return U


def cusp_root(z, branch: CubicBranch):
    """Scaled outer root U(z) on the requested branch.

    For t_sign = +1 the branch from_minus_infinity exists for z <= 2/sqrt(27)
    (U >= 1/sqrt(3)) and from_plus_infinity for z >= -2/sqrt(27).  Requesting
    ``unique`` where three roots exist, or a branch beyond its fold, raises
    ``BranchError``.
    """
    z_arr = np.asarray(z, dtype=float)
    if branch.t_sign == -1:
        # U^3 + U + z = 0 is strictly monotone: one real root
        seed = -(2.0 / _SQRT3) * np.sinh(np.arcsinh(1.5 * _SQRT3 * z_arr) / 3.0)
        U = _polish(seed, lambda u: z_arr + u + u**3, lambda u: 1.0 + 3.0 * u * u)
    else:
        if branch.branch is Branch.UNIQUE:
            if np.any(np.abs(z_arr) < FOLD_Z):
                raise BranchError("three real roots for |z| < 2/sqrt(27); choose a branch")
            sel = Branch.FROM_MINUS_INFINITY
            U = np.where(
                z_arr <= -FOLD_Z,
                _seed_positive_time(z_arr, Branch.FROM_MINUS_INFINITY),
                _seed_positive_time(z_arr, Branch.FROM_PLUS_INFINITY),
            )
        else:
            sel = branch.branch
            if sel is Branch.FROM_MINUS_INFINITY and np.any(z_arr > FOLD_Z):
                raise BranchError("from_minus_infinity branch ends at z = 2/sqrt(27)")
            if sel is Branch.FROM_PLUS_INFINITY and np.any(z_arr < -FOLD_Z):
                raise BranchError("from_plus_infinity branch ends at z = -2/sqrt(27)")
            U = _seed_positive_time(z_arr, sel)
        f = lambda u: z_arr - u + u**3  # noqa: E731
        df = lambda u: 3.0 * u * u - 1.0  # noqa: E731
        # Newton is useless exactly at a fold; the seed is exact there anyway
        near_fold = np.abs(df(U)) < 1e-6
        U = np.where(near_fold, U, _polish(U, f, df))
    if U.ndim == 0:
        return float(U)
    return U


def cusp_root_derivative(z, branch: CubicBranch):
    """dU/dz on the branch, by implicit differentiation of the cubic."""
    U = np.asarray(cusp_root(z, branch))
    if branch.t_sign == -1:
        d = -1.0 / (3.0 * U * U + 1.0)
    else:
        g = 3.0 * U * U - 1.0
        if np.any(np.abs(g) < 1e-8):
            raise FoldPointError("dU/dz is unbounded at the fold 3U^2 = 1")
        d = -1.0 / g
    if d.ndim == 0:
        return float(d)
    return d


def cubic_root_physical(x, t: float, side: str):
    """Root of the unscaled cubic ``x - t u + u^3 = 0`` and its slope du/dx.

    ``side`` is ``"left"`` (branch continued from x = -inf) or ``"right"``.
    At t = 0 the root is the real cube root -x^(1/3).
    """
    x = np.asarray(x, dtype=float)
    if t == 0.0:
        u = -np.cbrt(x)
        with np.errstate(divide="ignore"):
            du = -1.0 / (3.0 * u * u)
    else:
        scale = math.sqrt(abs(t))
        z = x / abs(t) ** 1.5
        if t < 0:
            br = NEGATIVE_TIME
        elif side == "left":
            br = MINUS_INF
        elif side == "right":
            br = PLUS_INF
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        u = scale * np.asarray(cusp_root(z, br))
        du = -1.0 / (3.0 * u * u - t)
    if u.ndim == 0:
        return float(u), float(du)
    return u, du

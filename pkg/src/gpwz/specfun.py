"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here takes the modulus ``k`` (not the parameter ``m = k**2``) at the
public surface.  The private helpers work with ``m`` and, where it matters,
with the complementary parameter ``1 - m`` supplied directly so that callers
who know it to full precision (e.g. from differences of Whitham variables)
do not lose digits near ``k = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticEval",
    "elliptic_KE",
    "jacobi_dn",
    "ellipke",
    "ellipke_dm",
    "jacobi_sncndn",
]

_AGM_TOL = 1e-17
_AGM_MAXITER = 40
_SOLITON_CUTOFF = 1e-9  # below this k' the sech expansion is used


@dataclass(frozen=True)
class EllipticEval:
    k: float
    bigK: float
    bigE: float
    q: float


def _check_modulus(k, *, allow_one: bool):
    k = np.asarray(k, dtype=float)
    bad = (k < 0) | (k > 1) | (~allow_one & (k >= 1)) | ~np.isfinite(k)
    if np.any(bad):
        bound = "[0, 1]" if allow_one else "[0, 1)"
        raise ValueError(f"elliptic modulus must lie in {bound}, got {k}")
    return k


def ellipke(m, m1=None):
    """Return ``(K, E)`` for parameter ``m`` by the arithmetic-geometric mean.

    ``m1`` is the complementary parameter ``1 - m``; pass it when it is known
    more accurately than ``1 - m`` would be in floating point.
    """
    m = np.asarray(m, dtype=float)
    m1 = 1.0 - m if m1 is None else np.asarray(m1, dtype=float)
    if np.any(m1 <= 0):
        raise ValueError("complete elliptic integrals diverge at m = 1")
    a = np.ones(np.broadcast(m, m1).shape)
    b = np.sqrt(m1) * np.ones_like(a)
    c = np.sqrt(m) * np.ones_like(a)
    total = 0.5 * c * c
    weight = 0.5
    for _ in range(_AGM_MAXITER):
        a_next = 0.5 * (a + b)
        # c_{n+1} = c_n^2 / (4 a_{n+1}); avoids the cancellation in (a - b)/2
        c = c * c / (4.0 * a_next)
        b = np.sqrt(a * b)
        a = a_next
        weight *= 2.0
        total = total + weight * c * c
        if np.all(c <= _AGM_TOL * a):
            break
    K = math.pi / (2.0 * a)
    E = K * (1.0 - total)
    if K.ndim == 0:
        return float(K), float(E)
    return K, E


def ellipke_dm(m, m1=None):
    """Return ``(K, E, dK/dm, dE/dm)``; small-``m`` branch uses the series."""
    m = np.asarray(m, dtype=float)
    m1 = 1.0 - m if m1 is None else np.asarray(m1, dtype=float)
    K, E = ellipke(m, m1)
    K = np.asarray(K)
    E = np.asarray(E)
    small = m < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        dK = (E - m1 * K) / (2.0 * m * m1)
        dE = (E - K) / (2.0 * m)
    half_pi = 0.5 * math.pi
    dK_series = half_pi * (1 / 4 + 2 * (9 / 64) * m + 3 * (25 / 256) * m**2)
    dE_series = half_pi * (-1 / 4 - 2 * (3 / 64) * m - 3 * (5 / 256) * m**2)
    dK = np.where(small, dK_series, dK)
    dE = np.where(small, dE_series, dE)
    if K.ndim == 0:
        return float(K), float(E), float(dK), float(dE)
    return K, E, dK, dE


def elliptic_KE(k: float) -> EllipticEval:
    """Complete elliptic integrals K(k), E(k) and their ratio q = E/K.

    Raises ``ValueError`` unless ``0 <= k < 1``.
    """
    k = float(_check_modulus(k, allow_one=False))
    kp2 = (1.0 - k) * (1.0 + k)
    K, E = ellipke(k * k, kp2)
    return EllipticEval(k=k, bigK=K, bigE=E, q=E / K)


def _landen_sncndn(u, m, m1):
    """Descending Landen / AGM evaluation of (sn, cn, dn)(u | m).

    ``u``, ``m`` and ``m1`` broadcast against each other; ``m1 > 0`` required.
    """
    u, m, m1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (u, m, m1)))
    a = np.ones_like(u)
    b = np.sqrt(m1)
    c = np.sqrt(m)
    a_hist = [a]
    c_hist = [c]
    for _ in range(_AGM_MAXITER):
        if np.all(np.abs(c) <= _AGM_TOL * a):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        a_hist.append(a)
        c_hist.append(c)
    n = len(a_hist) - 1
    phi = (2.0**n) * a_hist[-1] * u
    for j in range(n, 0, -1):
        ratio = np.clip(c_hist[j] * np.sin(phi) / a_hist[j], -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(ratio))
    sn = np.sin(phi)
    cn = np.cos(phi)
    if n == 0:
        return sn, cn, np.ones_like(u)
    # both forms are sums of non-negative terms in their own range of m
    dn = np.where(m < 0.5, np.sqrt(1.0 - m * sn * sn), np.sqrt(m1 + m * cn * cn))
    return sn, cn, dn


def _soliton_sncndn(u, m1):
    """Expansion about m = 1 to first order in m1 (Abramowitz & Stegun 16.15).

    ``u`` is first folded into [0, K] using the quarter-period symmetries.
    """
    m1 = np.asarray(m1, dtype=float)
    with np.errstate(divide="ignore"):
        K = np.where(m1 > 0, np.log(4.0 / np.sqrt(m1)), np.inf)
    sign = np.sign(u)
    u = np.abs(u)
    u = np.where(np.isfinite(K), np.mod(u, 4.0 * K), u)
    # fold [2K, 4K) onto [0, 2K): sn odd about 2K, cn and dn even
    upper = u > 2.0 * K
    u = np.where(upper, 4.0 * K - u, u)
    sign = np.where(upper, -sign, sign)
    mirror = u > K
    u = np.where(mirror, 2.0 * K - u, u)
    sech = 1.0 / np.cosh(u)
    tanh = np.tanh(u)
    sc = np.where(m1 > 0, np.sinh(u) * np.cosh(u), 0.0)
    sn = tanh + 0.25 * m1 * (sc - u) * sech**2
    cn = sech - 0.25 * m1 * (sc - u) * tanh * sech
    dn = sech + 0.25 * m1 * (sc + u) * tanh * sech
    cn = np.where(mirror, -cn, cn)
    return sign * sn, cn, dn


def jacobi_sncndn(theta, k, kp=None):
    """Jacobi (sn, cn, dn) of real argument ``theta`` and modulus ``k``.

    ``kp`` optionally gives the complementary modulus sqrt(1 - k^2) directly.
    Arguments broadcast.  The argument is reduced modulo the real period 4K
    before the Landen recursion.
    """
    k = _check_modulus(k, allow_one=True)
    theta = np.asarray(theta, dtype=float)
    if kp is None:
        kp = np.sqrt((1.0 - k) * (1.0 + k))
    kp = np.asarray(kp, dtype=float)
    theta, k, kp = np.broadcast_arrays(theta, k, kp)
    m = k * k
    m1 = kp * kp
    near_one = kp < _SOLITON_CUTOFF
    sn = np.empty_like(theta)
    cn = np.empty_like(theta)
    dn = np.empty_like(theta)
    reg = ~near_one
    if np.any(reg):
        K, _ = ellipke(m[reg], m1[reg])
        period = 4.0 * np.asarray(K)
        th = theta[reg]
        th = th - period * np.round(th / period)
        s, c, d = _landen_sncndn(th, m[reg], m1[reg])
        sn[reg], cn[reg], dn[reg] = s, c, d
    if np.any(near_one):
        s, c, d = _soliton_sncndn(theta[near_one], m1[near_one])
        sn[near_one], cn[near_one], dn[near_one] = s, c, d
    if sn.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_dn(theta, k, kp=None):
    """Jacobi delta amplitude dn(theta; k) for real theta and 0 <= k <= 1.

    Even in theta by construction: the recursion is run on |theta|.
    """
    theta = np.abs(np.asarray(theta, dtype=float))
    return jacobi_sncndn(theta, k, kp)[2]

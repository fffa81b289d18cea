import math

import numpy as np
import pytest

from gpwz import modulation as mod
from gpwz.asymptotics import (
    AsymptoticSolution, OutOfZoneError, _u0_from_fields, composite_eval, pde_leading_order_check,
    phase, physical_eval, u0_eval,
)
from gpwz.outer import MINUS_INF, NEGATIVE_TIME, PLUS_INF, cusp_root


def test_fields_match_table_nodes(asym, table):
    p = table.points[200]
    F = asym.fields([p.z])
    for name in ("k", "A", "C", "R", "Q", "f"):
        assert getattr(F, name)[0] == pytest.approx(getattr(p, name), abs=1e-10)


def test_polished_interpolation_solves_system(asym):
    z = np.linspace(-1.3, 0.05, 57)
    L = asym.triples(z)
    for zi, row in zip(z, L):
        r = mod.whitham_residuals(*row, zi)
        assert abs(r[0]) <= 1e-10 and abs(r[1]) <= 1e-10


def test_unpolished_interpolation_is_close(table, asym):
    raw = AsymptoticSolution(table, polish=False)
    z = np.linspace(-1.3, 0.05, 57)
    assert np.abs(raw.triples(z) - asym.triples(z)).max() <= 1e-6


def test_out_of_zone(asym):
    with pytest.raises(OutOfZoneError):
        asym.fields([mod.Z_LEAD])
    with pytest.raises(OutOfZoneError):
        asym.fields([0.2])


def test_phase_periodicity_and_range(asym):
    z = np.linspace(-1.3, 0.05, 41)
    F = asym.fields(z)
    phi = np.linspace(0, 2 * math.pi, 17)[:, None]
    U = _u0_from_fields(F, phi)
    assert np.abs(_u0_from_fields(F, phi + 2 * math.pi) - U).max() <= 1e-10
    assert np.all(U >= F.C + F.A * (1 - F.k**2) - 1e-12)
    assert np.all(U <= F.C + F.A + 1e-12)


def test_crest_at_phase_zero(asym):
    F = asym.fields([-0.5])
    assert _u0_from_fields(F, 0.0)[0] == pytest.approx(F.A[0] + F.C[0], abs=1e-13)


def test_s0_shift(table):
    a = AsymptoticSolution(table, s0=0.0)
    b = a.with_phase(1.0)
    t, z = 20.0, -0.4
    assert phase(t, z, b) - phase(t, z, a) == pytest.approx(1.0, abs=1e-12)
    assert AsymptoticSolution(table, s0=2 * math.pi + 0.5).s0 == pytest.approx(0.5)


def test_pde_leading_order_cancellation(asym):
    for z in (-1.0, -0.7, -0.3):
        rel, _ = pde_leading_order_check(asym, z)
        assert rel <= 1e-8


def test_composite_outside_zone(asym):
    assert composite_eval(20.0, -2.0, asym) == pytest.approx(cusp_root(-2.0, MINUS_INF))
    assert composite_eval(20.0, 0.5, asym) == pytest.approx(cusp_root(0.5, PLUS_INF))
    inside = u0_eval(20.0, -0.5, asym)
    assert composite_eval(20.0, -0.5, asym) == pytest.approx(inside)


def test_leading_edge_continuity(asym):
    # amplitude vanishes and the wave meets the outer root at the leading edge
    # (oscillation amplitude A k^2 shrinks like sqrt(z - z_lead))
    F = asym.fields(mod.Z_LEAD + np.array([1e-6, 1e-4]))
    amp = F.A * F.k**2
    assert amp[1] / amp[0] == pytest.approx(10.0, rel=0.05)
    assert abs(F.A[0] + F.C[0] - cusp_root(mod.Z_LEAD, MINUS_INF)) <= 5e-3


def test_physical_eval(asym):
    assert physical_eval(-7.0, 0.0, asym) == pytest.approx(0.0, abs=1e-14)
    x = -3.0 * 7.0**1.5
    assert physical_eval(-7.0, x, asym) == pytest.approx(math.sqrt(7) * cusp_root(-3.0, NEGATIVE_TIME))
    t = 20.0
    assert physical_eval(t, -0.5 * t**1.5, asym) == pytest.approx(math.sqrt(t) * u0_eval(t, -0.5, asym))
    with pytest.raises(ValueError):
        physical_eval(0.0, 1.0, asym)


def test_negative_time_rejected(asym):
    with pytest.raises(ValueError):
        u0_eval(-1.0, -0.5, asym)
    with pytest.raises(ValueError):
        phase(0.0, -0.5, asym)


def test_phase_mean_is_C_plus_Aq(asym):
    F = asym.fields([-0.9, -0.4, 0.0])
    phi = np.linspace(0, 2 * math.pi, 4097)[:-1][:, None]
    mean = _u0_from_fields(F, phi).mean(axis=0)
    assert np.abs(mean - (F.C + F.A * F.q)).max() <= 1e-10


def test_soliton_limit_shape(asym):
    z = mod.Z_TRAIL - 1e-7
    F = asym.fields([z])
    assert F.k[0] > 0.999
    assert _u0_from_fields(F, 0.0)[0] == pytest.approx(F.A[0] + F.C[0], abs=1e-12)
    theta = 0.3
    phi = theta * math.pi / F.bigK[0]
    sech2 = 1 / math.cosh(theta) ** 2
    assert _u0_from_fields(F, phi)[0] == pytest.approx(F.C[0] + F.A[0] * sech2, abs=1e-3)


def test_phase_scale_at_t20(asym):
    assert 20.0**1.75 == pytest.approx(189.15, abs=0.01)
    z = np.array([-0.5])
    h = 1e-6
    dphi = (phase(20.0, z + h, asym) - phase(20.0, z - h, asym)) / (2 * h)
    assert dphi[0] == pytest.approx(20.0**1.75 * asym.fields(z).Q[0], rel=1e-6)


def test_crest_when_phase_is_full_turn(table):
    sol = AsymptoticSolution(table, s0=0.0)
    z = -0.5
    f = sol.fields([z]).f[0]
    # f < 0 here, so choose t with t^(7/4) f = -2 pi
    t = (2 * math.pi / abs(f)) ** (1 / 1.75)
    F = sol.fields([z])
    assert u0_eval(t, z, sol) == pytest.approx(F.A[0] + F.C[0], abs=1e-9)


def test_physical_examples(asym):
    assert physical_eval(-1.0, 2.0, asym) == pytest.approx(-1.0, abs=1e-14)
    assert abs(physical_eval(4.0, 0.0, asym)) <= 2 * 3.0
    x = np.linspace(-120, 10, 7)
    direct = physical_eval(20.0, x, asym)
    via = math.sqrt(20.0) * np.asarray(composite_eval(20.0, x * 20.0**-1.5, asym))
    assert np.array_equal(direct, via)


def test_zone_in_physical_units():
    s = 20.0**1.5
    assert mod.Z_LEAD * s == pytest.approx(-126.5, abs=0.05)
    assert mod.Z_TRAIL * s == pytest.approx(10.5, abs=0.05)

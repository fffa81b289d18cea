import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from gpwz import modulation as mod

SQRT2 = math.sqrt(2.0)

# Independent oracle: the triple at z = -0.5 from a bracketed brentq solve in
# (m, l3 - l1) with scipy.special ellipk/ellipe, frozen here.
ORACLE_Z = -0.5
ORACLE_TRIPLE = (-0.8893830023227018, 0.3287578116741994, 1.1855906748265579)
ORACLE_M = 0.5870632612893991


def nearest(table, z):
    return min(table.points, key=lambda p: abs(p.z - z))


def test_brute_force_oracle(table):
    p = mod.solve_point(ORACLE_Z, nearest(table, ORACLE_Z))
    assert np.allclose(p.triple, ORACLE_TRIPLE, atol=1e-10, rtol=0)
    assert p.m == pytest.approx(ORACLE_M, abs=1e-10)


def test_table_is_ordered_and_in_zone(table):
    assert len(table) == 512
    z = table.z
    assert np.all(np.diff(z) > 0)
    assert z[0] > mod.Z_LEAD and z[-1] < mod.Z_TRAIL
    for p in table:
        assert p.l1 <= p.l2 <= p.l3
        assert 0 <= p.k <= 1


def test_k_increases_across_zone(table):
    assert np.all(np.diff(table.column("k")) > 0)


def test_whitham_constraint(table):
    res = np.array([mod.whitham_residuals(*p.triple, p.z) for p in table])
    assert np.abs(res[:, 0]).max() <= 1e-10
    assert np.abs(res[:, 1]).max() <= 1e-10
    # the q-equation divides by a polynomial that vanishes at the leading
    # edge, so it is checked cross-multiplied
    cross = max(abs(p.q * mod._q_den(*p.triple) - 0.5 * (p.l2 - p.l3) * mod._q_num(*p.triple))
                for p in table)
    assert cross <= 1e-10


def test_zone_edges(table):
    lim = mod.edge_limits(table)
    assert abs(lim["z_lead"] + SQRT2) <= 1e-6
    assert abs(lim["z_trail"] - math.sqrt(10) / 27) <= 1e-4


def test_leading_edge_limits(table):
    lim = mod.edge_limits(table)
    assert np.allclose(lim["lead_triple"], (-SQRT2 / 4, -SQRT2 / 4, SQRT2), atol=1e-5, rtol=0)
    assert lim["lead_R"] == pytest.approx(-SQRT2 / 6, abs=1e-5)
    assert lim["lead_U0"] == pytest.approx(SQRT2, abs=1e-5)


def test_edge_triples_solve_the_system_exactly():
    # both edge triples substituted into the constraint and the z polynomial
    for L, z in ((mod.LEAD_TRIPLE, mod.Z_LEAD), (mod.TRAIL_TRIPLE, mod.Z_TRAIL)):
        assert abs(mod._constraint(*L)) <= 1e-13
        assert abs(z - mod._z_poly(*L)) <= 1e-13


def test_edge_triples_exact_rational():
    s2, s10 = sp.sqrt(2), sp.sqrt(10)
    l1, l2, l3 = sp.symbols("l1 l2 l3")
    cons = 3 * (l1**2 + l2**2 + l3**2) + 2 * (l1 * l2 + l2 * l3 + l3 * l1) - 5
    zp = sp.Rational(2, 45) * (l1 * (8 * l2**2 + 4 * l2 * l3 + 8 * l3**2 - 15)
                               - (l2 + l3) * (24 * l2**2 - 8 * l2 * l3 + 24 * l3**2 - 25))
    lead = {l1: -s2 / 4, l2: -s2 / 4, l3: s2}
    trail = {l1: -s10 / 3, l2: s10 / 4, l3: s10 / 4}
    assert sp.simplify(cons.subs(lead)) == 0 and sp.simplify(zp.subs(lead) + s2) == 0
    assert sp.simplify(cons.subs(trail)) == 0 and sp.simplify(zp.subs(trail) - s10 / 27) == 0


def test_dn2_and_potemin(table):
    interior = table.points[1:-1]
    dn2 = max(np.abs(mod.dn2_system_residuals(p.A, p.B, p.C, p.R, p.k, p.z)).max() for p in interior)
    pot = max(np.abs(mod.potemin_residuals(*p.triple, p.z)).max() for p in interior)
    assert dn2 <= 1e-9
    assert pot <= 1e-8


def test_ansatz(table):
    assert max(mod.ansatz_residual(p) for p in table) <= 1e-8


def test_ansatz_detects_wrong_R(table):
    p = nearest(table, -0.6)
    bad = mod.ModulationPoint(**{**p.__dict__, "R": p.R + 1e-3})
    assert mod.ansatz_residual(bad) >= 1e-4


def test_r_ode(table):
    _, res, _ = mod.r_ode_residual(table, 1e-4, (-1.2, 0.0))
    assert res.max() <= 1e-4


def test_phase_gradient(table):
    _, res = mod.phase_gradient_residual(table, 1e-4, (-1.2, 0.0))
    assert res.max() <= 1e-5


def test_h_numerator_vanishes_exactly():
    s2 = sp.sqrt(2)
    assert sp.expand(mod.h_numerator(-s2, -s2 / 6)) == 0
    # a rational point away from the edge is not a root
    assert mod.h_numerator(Fraction(-1), Fraction(-1, 4)) != 0


def test_h_pole_raises():
    with pytest.raises(mod.PoleError):
        mod.eval_H(0.0, 0.0)


def test_h_edge_expansion():
    dzH, c = mod.h_edge_expansion(1e-3)
    assert abs(dzH - 1.0) <= 1e-2
    assert abs(c + 543 / 1600 * SQRT2) <= 5e-2


def test_near_edge_series(table):
    ser = mod.edge_series_check(table)
    assert ser["k_probe_rel_dev"] <= 1e-2
    assert ser["k_leading_coefficient"] == pytest.approx(2**0.875 / math.sqrt(5), rel=1e-2)
    assert ser["R_edge"] == pytest.approx(-SQRT2 / 6, abs=1e-6)
    assert ser["dRdz_edge"] == pytest.approx(1 / 40, rel=5e-2)


def _r11_symbolic(c6, A, m, z):
    g = m * m - m + 1
    return (c6 * A**6 - 140 * g**2 * A**4 + 50 * z * (m - 2) * (2 * m - 1) * (m + 1) * A**3
            + 500 * g * A**2 + 3375 * z**2 - 500)


def test_degree6_exact_edge_identity():
    A, m, z = sp.symbols("A m z")
    c6_pal = 8 * m**6 - 24 * m**5 + 43 * m**4 - 46 * m**3 + 43 * m**2 - 24 * m + 8
    c6_prn = 8 * m**6 - 24 * m**5 + 43 * m**4 - 46 * m**3 - 43 * m**2 + 24 * m - 8
    assert sp.expand(m**6 * c6_pal.subs(m, 1 / m) - c6_pal) == 0
    # leading edge: m = 0, A = 5 sqrt(2)/2, z = -sqrt(2)
    edge = {m: 0, A: 5 * sp.sqrt(2) / 2, z: -sp.sqrt(2)}
    assert sp.simplify(_r11_symbolic(c6_pal, A, m, z).subs(edge)) == 0
    assert sp.simplify(_r11_symbolic(c6_prn, A, m, z).subs(edge)) != 0
    # and the float implementation agrees with the symbolic one
    assert mod.ak_equation_residuals(5 * SQRT2 / 2, 0.0, -SQRT2)[0] == pytest.approx(0.0, abs=1e-9)


def test_degree6_relation(table):
    worst = max(abs(mod.ak_equation_residuals(p.A, p.k, p.z)[0]) / (1 + p.A**6) for p in table)
    assert worst <= 1e-6


def test_printed_degree6_form_fails(table):
    worst = max(abs(mod.ak_equation_residuals(p.A, p.k, p.z, printed=True)[0]) / (1 + p.A**6)
                for p in table)
    assert worst > 1e-3


def test_q_relation_limits():
    # the second (A, k) relation at the harmonic and soliton limits
    _, r0 = mod.ak_equation_residuals(0.0, 0.0, 0.0)
    assert r0 == pytest.approx(0.0, abs=1e-12)
    p = mod.ModulationPoint.from_triple(mod.Z_TRAIL, *mod.TRAIL_TRIPLE)
    _, r1 = mod.ak_equation_residuals(p.A, 1.0, mod.Z_TRAIL)
    assert abs(r1) <= 1e-10


def test_q_relation_on_table(table):
    worst = max(abs(mod.ak_equation_residuals(p.A, p.k, p.z)[1]) for p in table)
    assert worst <= 1e-8


def test_edge_guess_is_close():
    for dz in (1e-6, 1e-4, 1e-2):
        z = mod.Z_LEAD + dz
        guess = np.array(mod.edge_guess(z))
        exact = np.array(mod.solve_point(z, guess).triple)
        assert np.abs(guess - exact).max() <= 20 * dz


def test_solve_point_near_both_edges(table):
    p = mod.solve_point(mod.Z_LEAD + 1e-6, mod.edge_guess(mod.Z_LEAD + 1e-6))
    assert p.k < 0.05
    q = mod.solve_point(mod.Z_TRAIL - 1e-6, table.points[-1])
    assert q.k > 0.999


def test_degenerate_triples_rejected():
    with pytest.raises(mod.DegenerateTripleError):
        mod.whitham_residuals(0.5, 0.5, 0.5, 0.0)
    with pytest.raises(mod.DegenerateTripleError):
        mod.whitham_residuals(0.0, 1.0, 0.5, 0.0)


def test_sweep_rejects_tiny_n():
    with pytest.raises(ValueError):
        mod.sweep_zone(8)


def test_modulation_point_roundtrip(table):
    p = nearest(table, -0.3)
    arr = table.as_array()
    assert arr.shape == (512, len(mod.COLUMNS))
    again = mod.ModulationTable.from_triples(table.z, table.column("l1"), table.column("l2"), table.column("l3"))
    assert np.allclose(again.as_array(), arr, rtol=0, atol=1e-14)
    assert p.B == pytest.approx(math.sqrt(p.A / 12))


def test_sweep_endpoints(table):
    assert table.points[0].k < 0.05
    assert table.points[-1].k > 0.995


def test_construction_identities(table):
    for p in table:
        assert 1.75 * p.f / p.Q - 1.5 * p.z - p.R == pytest.approx(0.0, abs=1e-12)
        assert p.B / p.Q - p.bigK / math.pi == pytest.approx(0.0, abs=1e-12)


def test_dn2_system_at_edge_values():
    A = 5 * SQRT2 / 2
    r = mod.dn2_system_residuals(A, math.sqrt(A / 12), -1.5 * SQRT2, -SQRT2 / 6, 0.0, -SQRT2)
    assert np.abs(r).max() <= 1e-12


def test_constant_solution_at_edge():
    # k = 0: U0 is the constant sqrt(2) and every U0 equation is satisfied
    p = mod.ModulationPoint.from_triple(mod.Z_LEAD, *mod.LEAD_TRIPLE)
    assert p.A + p.C == pytest.approx(SQRT2, abs=1e-14)
    assert mod.ansatz_residual(p) <= 1e-12


def test_r_ode_is_singular_at_edge():
    s2 = sp.sqrt(2)
    z, R = -s2, -s2 / 6
    assert sp.expand(486 * R**4 - 171 * R**2 + 9 * z * R + 5) == 0
    assert sp.expand(54 * R**3 - 9 * R + z) == 0


@pytest.mark.parametrize("A,z", [(0.7, -1.0), (3.0, 0.05), (1.5, -0.3)])
def test_q_relation_vanishes_at_both_limits(A, z):
    assert mod.ak_equation_residuals(A, 0.0, z)[1] == pytest.approx(0.0, abs=1e-10)
    assert mod.ak_equation_residuals(A, 1.0, z)[1] == pytest.approx(0.0, abs=1e-10)


def test_edge_slope_of_R(table):
    assert abs(mod.edge_series_check(table)["dRdz_edge"] - 1 / 40) <= 5e-3

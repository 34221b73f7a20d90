import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq, minimize

import sem_oracle
from viscolim.errors import (BoundaryTooCloseToZero, BudgetExceeded, ConfigError, NonCompactSupport,
                             ZeroWavenumber)
from viscolim.potentials import AnalyticPotential, PiecewiseConstantPotential
from viscolim.resonance_direct import (KRectangle, Pole, find_resonances, matching_function,
                                       propagate_piece, winding_number)

BARRIER = PiecewiseConstantPotential(((-1, 1, 10),))
WELL = PiecewiseConstantPotential(((-1, 1, -4),))
FREE = PiecewiseConstantPotential(())
ASYM = PiecewiseConstantPotential(((-1.5, -0.5, 6), (0.0, 0.7, -3), (0.7, 2.0, 2.5)))
SEARCH = KRectangle(0.3, 6, -2, -1e-3)


def test_propagate_examples():
    u, du = propagate_piece(1, 0, 0.0, 1, math.pi)
    assert u == pytest.approx(-1, abs=1e-15) and du == pytest.approx(0, abs=1e-15)
    u, du = propagate_piece(0, 1, 4.0, 2, 3.7)
    assert u == pytest.approx(3.7, abs=1e-15) and du == pytest.approx(1, abs=1e-15)
    for length in (0.3, 2.0, 11.0):
        u, du = propagate_piece(1, 1j, 0.0, 1, length)
        assert u == pytest.approx(cmath.exp(1j * length), abs=1e-14)
        assert du == pytest.approx(1j * cmath.exp(1j * length), abs=1e-14)
    with pytest.raises(ValueError):
        propagate_piece(1, 0, 0.0, 1, -1.0)


@pytest.mark.parametrize("w", [1e-5, -3e-5, 2e-5j, 9.99e-5, 1.001e-4, 5e-4])
def test_taylor_branch_agrees_with_closed_form(w):
    """Both branches of the w -> 0 switch agree with the square-root formula."""
    length = 1.0
    k = cmath.sqrt(w + 2.0)
    u, du = propagate_piece(0.3, -0.7, 2.0, k, length)
    r = cmath.sqrt(w)
    ref_u = 0.3 * cmath.cos(r * length) - 0.7 * cmath.sin(r * length) / r
    ref_du = -0.3 * r * cmath.sin(r * length) - 0.7 * cmath.cos(r * length)
    assert abs(u - ref_u) < 1e-13 and abs(du - ref_du) < 1e-13


def test_propagate_is_vectorized():
    k = np.array([0.5 + 0.1j, 2.0, 3 - 1j])
    u, du = propagate_piece(np.ones(3), np.zeros(3), 1.5, k, 0.8)
    for i in range(3):
        ui, dui = propagate_piece(1, 0, 1.5, k[i], 0.8)
        assert u[i] == ui and du[i] == dui


def test_free_matching_function_closed_form():
    k = 2 - 1j
    ref = 2j * k * cmath.exp(-1j * k)
    assert matching_function(FREE, k, r0=1.0) == pytest.approx(ref, rel=1e-14)
    assert matching_function(PiecewiseConstantPotential(((-1, 1, 0.0),)), k) == pytest.approx(ref, rel=1e-14)
    assert matching_function(AnalyticPotential.zero(), k, r0=1.0) == pytest.approx(ref, rel=1e-14)


def test_matching_function_errors():
    with pytest.raises(ZeroWavenumber):
        matching_function(BARRIER, 0)
    with pytest.raises(ZeroWavenumber):
        matching_function(BARRIER, np.array([1.0, 0.0]))
    with pytest.raises(NonCompactSupport):
        matching_function(AnalyticPotential.sinc(), 1.0)
    with pytest.raises(ConfigError):
        matching_function(BARRIER, 1.0, r0=0.5)


def test_barrier_has_no_real_zeros():
    k = np.linspace(0.1, 10, 20001)
    f = np.abs(matching_function(BARRIER, k))
    assert np.all(f > 0.05 * np.abs(k))


def test_matches_transfer_matrix_with_exponentials():
    """Closed form for a single barrier using exponentials inside, k away from w = 0."""
    v, k = 10.0, 2.3 - 0.4j
    q = cmath.sqrt(k * k - v)
    # left region: e^{-ikx}; inside: a e^{iqx} + b e^{-iqx}, matched at x = -1
    u0, du0 = cmath.exp(1j * k), -1j * k * cmath.exp(1j * k)
    a = (u0 + du0 / (1j * q)) / (2 * cmath.exp(-1j * q))
    b = (u0 - du0 / (1j * q)) / (2 * cmath.exp(1j * q))
    u1 = a * cmath.exp(1j * q) + b * cmath.exp(-1j * q)
    du1 = 1j * q * (a * cmath.exp(1j * q) - b * cmath.exp(-1j * q))
    assert matching_function(BARRIER, k) == pytest.approx(1j * k * u1 - du1, rel=1e-12)


ks = st.complex_numbers(min_magnitude=0.05, max_magnitude=8, allow_nan=False, allow_infinity=False)


@given(ks)
def test_reflection_symmetry(k):
    for p in (BARRIER, ASYM):
        f1 = matching_function(p, -np.conj(k))
        f2 = np.conj(matching_function(p, k))
        assert abs(f1 - f2) <= 1e-12 * max(1.0, abs(f2))


@settings(max_examples=50)
@given(ks)
def test_cauchy_riemann(k):
    step = 1e-5
    f = lambda z: matching_function(ASYM, z)
    dx = (f(k + step) - f(k - step)) / (2 * step)
    dy = (f(k + 1j * step) - f(k - 1j * step)) / (2j * step)
    assert abs(dx - dy) <= 1e-6 * max(abs(dx), 1e-3 * abs(f(k)), 1e-12)


def test_winding_free_is_zero():
    assert winding_number(FREE, KRectangle(0.2, 5, -3, 2), r0=1.0) == 0
    assert winding_number(PiecewiseConstantPotential(((-2, 2, 0.0),)), KRectangle(-5, 5, -4, -0.1)) == 0


def test_winding_counts_barrier_zeros():
    assert winding_number(BARRIER, SEARCH) == 3
    assert winding_number(BARRIER, KRectangle(3.3, 3.6, -0.3, -0.1)) == 1
    assert winding_number(BARRIER, KRectangle(-6, 6, -2, -1e-3)) == 6


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.booleans())
def test_winding_additivity(fx, fy, vertical_first):
    rect = KRectangle(0.3, 6, -2.5, -1e-3)
    total = winding_number(ASYM, rect)
    cut_x = rect.re_min + fx * rect.width
    cut_y = rect.im_min + fy * rect.height
    cells = [KRectangle(rect.re_min, cut_x, rect.im_min, cut_y), KRectangle(cut_x, rect.re_max, rect.im_min, cut_y),
             KRectangle(rect.re_min, cut_x, cut_y, rect.im_max), KRectangle(cut_x, rect.re_max, cut_y, rect.im_max)]
    try:
        parts = sum(winding_number(ASYM, c) for c in cells)
    except BoundaryTooCloseToZero:
        return
    assert parts == total


def test_boundary_through_zero_is_detected():
    k0 = find_resonances(BARRIER, SEARCH).poles[0].k
    with pytest.raises(BoundaryTooCloseToZero):
        winding_number(BARRIER, KRectangle(k0.real, k0.real + 1, k0.imag - 0.5, k0.imag + 0.5))


def test_free_potential_has_no_resonances():
    assert find_resonances(FREE, SEARCH).poles == ()
    assert find_resonances(AnalyticPotential.zero(), SEARCH).poles == ()


def _grid_minima(p, rect, n=240):
    """Independent zero search: local minima of |f| on a grid, polished by Nelder-Mead."""
    re = np.linspace(rect.re_min, rect.re_max, n)
    im = np.linspace(rect.im_min, rect.im_max, n)
    kk = re[None, :] + 1j * im[:, None]
    mag = np.abs(matching_function(p, kk))
    found = []
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            if mag[i, j] < mag[i - 1:i + 2, j - 1:j + 2].ravel()[[0, 1, 2, 3, 5, 6, 7, 8]].min():
                g = lambda x: abs(matching_function(p, complex(x[0], x[1]))) ** 2
                res = minimize(g, [kk[i, j].real, kk[i, j].imag], method="Nelder-Mead",
                               options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 4000})
                if res.fun < 1e-16:
                    found.append(complex(*res.x))
    return found


@pytest.mark.parametrize("p", [BARRIER, ASYM])
def test_certified_barrier_roots(p):
    rs = find_resonances(p, SEARCH)
    assert rs.poles
    for pole in rs.poles:
        assert pole.certified and pole.multiplicity == 1 and pole.kind == "resonance"
        assert abs(matching_function(p, pole.k)) <= 1e-10 * rs.boundary_max_abs_f
        r = 1e-4 * (1 + abs(pole.k))
        assert winding_number(p, KRectangle(pole.k.real - r, pole.k.real + r, pole.k.imag - r, pole.k.imag + r)) == 1
        assert pole.z == pytest.approx(pole.k**2)
    grid = _grid_minima(p, SEARCH)
    assert len(grid) == len(rs.poles)
    for g in grid:
        assert min(abs(g - pole.k) for pole in rs.poles) < 1e-6


def test_known_barrier_resonance():
    k = find_resonances(BARRIER, SEARCH).poles[0].k
    assert k == pytest.approx(3.452169012 - 0.18600004j, abs=1e-8)


def test_multiplicity_conservation():
    for p in (BARRIER, ASYM, WELL):
        rect = KRectangle(-6, 6, -2.5, -1e-3)
        rs = find_resonances(p, rect)
        assert rs.total_winding == winding_number(p, rect)
        assert rs.total_winding == sum(pole.multiplicity for pole in rs.poles if pole.certified)


def test_zero_set_symmetric_across_imaginary_axis():
    rs = find_resonances(ASYM, KRectangle(-6, 6, -2.5, -1e-3))
    ks = np.array([p.k for p in rs.poles])
    for k in ks:
        assert np.min(np.abs(ks + np.conj(k))) <= 1e-10


def _exact_well_levels(depth=4.0, half=1.0):
    """Even and odd bound states of the square well from the transcendental equations."""
    out = []
    top = math.sqrt(depth) * half
    f_even = lambda q: q * math.tan(q) - math.sqrt(top * top - q * q)
    f_odd = lambda q: -q / math.tan(q) - math.sqrt(top * top - q * q)
    out.append(brentq(f_even, 1e-12, min(math.pi / 2, top) - 1e-12))
    if top > math.pi / 2:
        out.append(brentq(f_odd, math.pi / 2 + 1e-12, top - 1e-12))
    return sorted((q / half) ** 2 - depth for q in out)


def test_bound_states_against_self_adjoint_solvers():
    rs = find_resonances(WELL, KRectangle(-0.5, 0.5, 0.05, 3))
    assert all(p.kind == "bound_state" and p.certified for p in rs.poles)
    z = np.sort([p.z.real for p in rs.poles])
    assert np.max(np.abs([p.k.real for p in rs.poles])) < 1e-10
    np.testing.assert_allclose(z, sem_oracle.bound_states(WELL.pieces), atol=1e-6)
    np.testing.assert_allclose(z, _exact_well_levels(), atol=1e-10)


def test_resonances_escape_as_barrier_vanishes():
    lowest = []
    for v in (10, 1, 0.1):
        rs = find_resonances(PiecewiseConstantPotential(((-1, 1, v),)), KRectangle(0.05, 8, -4, -1e-3))
        lowest.append(min(-p.k.imag for p in rs.poles))
    assert lowest[0] < lowest[1] < lowest[2]


def test_budget_and_threshold_guards():
    with pytest.raises(BudgetExceeded):
        find_resonances(BARRIER, SEARCH, max_depth=0)
    with pytest.raises(ConfigError):
        find_resonances(BARRIER, KRectangle(-1, 1, -1, -1e-4))
    with pytest.raises(NonCompactSupport):
        find_resonances(AnalyticPotential.sinc(), SEARCH)


def test_cluster_reported_at_minimum_cell():
    rs = find_resonances(BARRIER, SEARCH, min_cell=10.0, newton_tol=1e-12)
    assert len(rs.poles) == 1
    pole = rs.poles[0]
    assert pole.multiplicity == 3 and pole.certified
    assert pole.k == SEARCH.center


def test_pole_properties():
    p = Pole(3 - 0.2j, 1, True)
    assert p.kind == "resonance" and p.z == (3 - 0.2j) ** 2
    assert p.sheet_arg == pytest.approx(2 * math.atan2(-0.2, 3))
    assert Pole(1j, 1, True).kind == "bound_state"
    assert Pole(-1 - 0.1j, 1, True).sheet_arg == pytest.approx(2 * (math.atan2(-0.1, -1) + 2 * math.pi))


def test_rectangle_helpers():
    r = KRectangle(0, 4, -1, 1)
    a, b = r.split(0.25)
    assert (a.re_max, b.re_min) == (1, 1)
    a, b = KRectangle(0, 1, -3, 1).split(0.5)
    assert (a.im_max, b.im_min) == (-1, -1)
    assert r.contains(2 + 0j) and not r.contains(5 + 0j)
    assert KRectangle(1, 2, 1, 2).distance_to_origin() == pytest.approx(math.sqrt(2))
    with pytest.raises(ConfigError):
        KRectangle(1, 1, 0, 1)

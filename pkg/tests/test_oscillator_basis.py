import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from viscolim.eigensolver import cap_spectrum
from viscolim.errors import ConfigError, QuadratureOrderTooLow
from viscolim.oscillator_basis import (CapConfig, assemble_cap_matrix, davies_matrix,
                                       gauss_hermite_function_rule, hermite_functions, matrix_d2,
                                       matrix_x2, potential_matrix)
from viscolim.potentials import AnalyticPotential, PiecewiseConstantPotential

BARRIER = PiecewiseConstantPotential(((-1, 1, 10),))


def h(k, x):
    return float(hermite_functions([x], k + 1)[k, 0])


def h_mp(k, x):
    """Normalized Hermite function in extended precision."""
    x = mpmath.mpf(x)
    return mpmath.hermite(k, x) * mpmath.exp(-x * x / 2) / mpmath.sqrt(2**k * mpmath.factorial(k) * mpmath.sqrt(mpmath.pi))


def test_h0_at_origin_and_normalization():
    assert h(0, 0.0) == pytest.approx(math.pi**-0.25, abs=1e-15)
    assert quad(lambda x: h(0, x) ** 2, -np.inf, np.inf)[0] == pytest.approx(1.0, abs=1e-12)
    assert h(1, 0.0) == 0.0


def test_orthogonality_by_gauss_hermite():
    x, w = np.polynomial.hermite.hermgauss(40)
    hv = hermite_functions(x, 6)
    weights = w * np.exp(x * x)
    assert abs(np.sum(weights * hv[3] * hv[5])) < 1e-12
    gram = (hv * weights) @ hv.T
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-12)


@pytest.mark.parametrize("x", [0.3, -2.5, 7.0, 19.0, 35.0])
@pytest.mark.parametrize("k", [0, 1, 7, 40, 150])
def test_matches_extended_precision(k, x):
    ref = float(h_mp(k, x))
    got = h(k, x) if k < 150 else float(hermite_functions([x], 151)[150, 0])
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_no_underflow_far_out():
    vals = hermite_functions([40.0, -45.0], 600)
    assert np.all(np.isfinite(vals))
    assert vals[599, 0] != 0.0


def test_matrix_x2_against_quadrature():
    m = matrix_x2(3)
    np.testing.assert_allclose(np.diag(m), [0.5, 1.5, 2.5], atol=1e-14)
    for j in range(3):
        for k in range(3):
            ref = quad(lambda x: x * x * h(j, x) * h(k, x), -np.inf, np.inf)[0]
            assert m[j, k] == pytest.approx(ref, abs=1e-10)
    assert m[0, 2] == pytest.approx(math.sqrt(2) / 2)
    assert m[0, 1] == 0.0


def test_matrix_d2_against_finite_differences():
    m = matrix_d2(3)
    step = 1e-3

    def minus_second(k, x):
        return -(h(k, x + step) - 2 * h(k, x) + h(k, x - step)) / step**2

    for j in range(3):
        for k in range(3):
            ref = quad(lambda x: h(j, x) * minus_second(k, x), -12, 12, limit=200)[0]
            assert m[j, k] == pytest.approx(ref, abs=1e-6)
    assert m[0, 2] == pytest.approx(-math.sqrt(2) / 2)


def test_oscillator_identity_and_small_sizes():
    n = 40
    np.testing.assert_array_equal(matrix_d2(n) + matrix_x2(n), np.diag(2 * np.arange(n) + 1.0))
    np.testing.assert_array_equal(matrix_d2(2), [[0.5, 0], [0, 1.5]])
    with pytest.raises(ConfigError):
        matrix_x2(1)


def test_gauss_hermite_rule_large_order():
    x, w = gauss_hermite_function_rule(800)
    assert np.all(np.isfinite(w)) and np.all(w > 0)
    assert np.sum(w * np.exp(-x * x)) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_potential_matrix_exact_paths():
    np.testing.assert_array_equal(potential_matrix(AnalyticPotential.quadratic(1), 3, 6, 1.0), matrix_x2(3))
    np.testing.assert_allclose(potential_matrix(AnalyticPotential.quadratic(-2), 5, 10, 0.5),
                               -0.5 * matrix_x2(5))
    assert not potential_matrix(AnalyticPotential.zero(), 4, 8, 1.0).any()
    assert not potential_matrix(PiecewiseConstantPotential(()), 4, 8, 1.0).any()


def test_barrier_entry_against_adaptive_quadrature():
    m = potential_matrix(BARRIER, 4, 32, 1.0)
    ref = 10 * quad(lambda x: h(0, x) ** 2, -1, 1, epsabs=1e-14)[0]
    assert m[0, 0] == pytest.approx(ref, abs=1e-10)


def test_step_matrix_with_dilation():
    p = PiecewiseConstantPotential(((-2, -0.5, 3), (0.5, 1.5, -4)))
    dil, n = 0.7, 8
    m = potential_matrix(p, n, 2 * n, dil)
    for j, k in [(0, 0), (1, 2), (3, 7), (6, 6)]:
        ref = sum(v * quad(lambda x: h(j, x) * h(k, x), a / dil, b / dil, epsabs=1e-14)[0] for a, b, v in p.pieces)
        assert m[j, k] == pytest.approx(ref, abs=1e-10)


def test_sinc_matrix_against_adaptive_quadrature():
    n = 6
    m = potential_matrix(AnalyticPotential.sinc(), n, 200, 1.3)
    f = lambda x: np.sinc(1.3 * x / np.pi)
    for j, k in [(0, 0), (0, 2), (3, 5), (4, 4)]:
        ref = quad(lambda x: f(x) * h(j, x) * h(k, x), -30, 30, limit=400, epsabs=1e-14)[0]
        assert m[j, k] == pytest.approx(ref, abs=1e-10)


def test_minimum_order_is_already_close():
    fine = potential_matrix(BARRIER, 4, 64, 1.0)
    assert np.max(np.abs(potential_matrix(BARRIER, 4, 8, 1.0) - fine)) < 1e-5
    assert np.max(np.abs(potential_matrix(BARRIER, 4, 16, 1.0) - fine)) < 1e-13


def test_quadrature_order_guard():
    with pytest.raises(QuadratureOrderTooLow):
        potential_matrix(BARRIER, 10, 19, 1.0)
    with pytest.raises(QuadratureOrderTooLow):
        CapConfig(0.1, basis_size=10, quadrature_order=19)


@pytest.mark.parametrize("kw", [dict(epsilon=0.0), dict(epsilon=0.1, alpha=math.pi), dict(epsilon=0.1, alpha=-0.1),
                                dict(epsilon=0.1, basis_size=1), dict(epsilon=0.1, basis_scale=0.0),
                                dict(epsilon=math.nan)])
def test_cap_config_validation(kw):
    with pytest.raises(ConfigError):
        CapConfig(**kw)


def test_cap_config_defaults_and_resize():
    c = CapConfig(0.1, basis_size=50)
    assert c.quadrature_order == 100 and c.alpha == 0.0 and c.basis_scale == 1.0
    assert c.with_size(75).quadrature_order == 150
    assert c.digest() != c.with_size(75).digest()


def test_davies_first_eigenvalue():
    ev = cap_spectrum(AnalyticPotential.zero(), CapConfig(0.25, basis_size=64)).eigenvalues
    first = ev[np.argmin(np.abs(ev))]
    assert abs(first - 0.5 * np.exp(-0.25j * np.pi)) < 1e-8


def test_quadratic_first_eigenvalue():
    ev = cap_spectrum(AnalyticPotential.quadratic(1), CapConfig(0.1, basis_size=64)).eigenvalues
    first = ev[np.argmin(np.abs(ev))]
    assert abs(first - complex(1.0012461, -0.0499377)) < 1e-7
    assert abs(first - np.sqrt(1 - 0.1j)) < 1e-8


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
@pytest.mark.parametrize("lam", [0.7, 1.0, 1.6])
def test_quadratic_consistency(eps, lam):
    n = 64
    # basis width matched to the oscillator in the original variable
    cfg = CapConfig(eps, basis_size=n, basis_scale=math.sqrt(lam) * eps**-0.25)
    ev = cap_spectrum(AnalyticPotential.quadratic(lam * lam), cfg).eigenvalues
    low = np.sort_complex(ev[np.argsort(np.abs(ev))][: n // 4])
    ref = np.sort_complex(np.sqrt(lam * lam - 1j * eps) * (2 * np.arange(n // 4) + 1))
    np.testing.assert_allclose(low, ref, atol=1e-6, rtol=0)


@st.composite
def steps(draw):
    n = draw(st.integers(0, 3))
    cuts = sorted(draw(st.lists(st.floats(-3, 3, allow_nan=False), min_size=2 * n, max_size=2 * n, unique=True)))
    vals = draw(st.lists(st.floats(-20, 20, allow_nan=False), min_size=n, max_size=n))
    return PiecewiseConstantPotential(tuple((cuts[2 * i], cuts[2 * i + 1], vals[i]) for i in range(n)))


@settings(max_examples=25, deadline=None)
@given(steps(), st.floats(1e-3, 2.0), st.floats(0.3, 3.0))
def test_symmetry_and_conjugation(p, eps, s):
    plus = assemble_cap_matrix(p, CapConfig(eps, basis_size=24, basis_scale=s))
    minus = assemble_cap_matrix(p, CapConfig(-eps, basis_size=24, basis_scale=s))
    assert np.max(np.abs(plus.entries - plus.entries.T)) == 0.0
    np.testing.assert_array_equal(minus.entries, np.conj(plus.entries))
    assert plus.scale_factor == minus.scale_factor == math.sqrt(eps)


def test_galerkin_matrix_metadata():
    gm = assemble_cap_matrix(BARRIER, CapConfig(0.1, basis_size=8))
    assert gm.entries.shape == (8, 8) and gm.entries.dtype == complex
    np.testing.assert_allclose(gm.physical, gm.scale_factor * gm.entries)
    assert gm.potential_digest and gm.config.basis_size == 8


def test_davies_matrix_matches_cap_assembly():
    # D^2 - i eps x^2 is the gamma = pi/2 Davies operator
    gm = assemble_cap_matrix(AnalyticPotential.zero(), CapConfig(0.04, basis_size=20))
    np.testing.assert_allclose(davies_matrix(0.04, math.pi / 2, 20), gm.physical, atol=1e-15)
    with pytest.raises(ConfigError):
        davies_matrix(-0.1, 0.0, 4)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brls.bath import (QuadratureError, SpectralDensity, TransitionSpectrum, bose_occupation,
                       correlation, effective_density_table, effective_sd, effective_sd_curve,
                       evaluate_sd, half_fourier_f, read_table, surrogate_structured_density,
                       transition_spectrum_value)

# Reference values below were computed once with mpmath (30 digits) by direct
# quadrature of the Lorentzian density, independently of this package.
C0_REF = 8.92907602169620750e-4
F_BROAD_REF = complex(0.0171292465209096919, -9.38439538508189135e-6)  # x=-0.2, G=0.1
C10_REF = complex(-3.66635246958152736e-4, -7.98281632249069139e-4)   # t = 10 / eV
JEFF_REF = 5.45240851048485563e-3                                    # center 0.2, width 0.1


def test_lorentzian_zero_for_negative_frequency(test_bath):
    assert evaluate_sd(test_bath, -0.1) == 0.0
    assert evaluate_sd(test_bath, 0.0) == 0.0


def test_lorentzian_peak_value(test_bath):
    # denominator reduces to kappa^2 omega_b^2 at the centre
    expected = 2 * 0.03**2 / (math.pi * 0.005)
    assert evaluate_sd(test_bath, 0.2) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.1146, abs=1e-4)


def test_tabulated_midpoint_and_zero_extrapolation():
    sd = SpectralDensity.tabulated([0.1, 0.3], [0.0, 0.2])
    assert evaluate_sd(sd, 0.2) == pytest.approx(0.1)
    assert evaluate_sd(sd, 0.05) == 0.0
    assert evaluate_sd(sd, 0.35) == 0.0
    np.testing.assert_allclose(sd(np.array([0.2, 0.5])), [0.1, 0.0])


def test_scalar_and_vector_evaluation_agree():
    sd = surrogate_structured_density()
    w = np.linspace(-0.05, 0.6, 301)
    np.testing.assert_allclose([sd(float(x)) for x in w], sd(w), rtol=1e-13, atol=1e-300)


def test_invalid_tables_rejected():
    with pytest.raises(ValueError):
        SpectralDensity.tabulated([0.3, 0.1], [0.0, 0.1])
    with pytest.raises(ValueError):
        SpectralDensity.tabulated([0.1, 0.3], [0.0, -0.1])
    with pytest.raises(ValueError):
        SpectralDensity.lorentzian(0.03, 0.2, 0.005, temperature=-1.0)


def test_read_table(tmp_path):
    path = tmp_path / "j.txt"
    path.write_text("# omega J\n0.1\t0.0\n0.2 0.5\n\n0.3 0.1\n")
    w, j = read_table(path)
    np.testing.assert_allclose(w, [0.1, 0.2, 0.3])
    sd = SpectralDensity.from_file(path)
    assert sd(0.15) == pytest.approx(0.25)


def test_bose_occupation_zero_temperature():
    assert np.all(bose_occupation(np.array([0.01, 0.2, 3.0]), 0.0) == 0.0)
    assert bose_occupation(0.2, 0.0259) == pytest.approx(1 / math.expm1(0.2 / 0.0259))


def test_correlation_at_zero(test_bath):
    c0 = correlation(test_bath, 0.0)
    assert c0.imag == 0.0
    assert c0.real == pytest.approx(C0_REF, rel=1e-8)


def test_correlation_approaches_g_squared_for_narrow_peaks():
    # the total weight tends to g_b^2 as kappa -> 0
    errs = [abs(correlation(SpectralDensity.lorentzian(0.03, 0.2, k), 0.0).real - 9e-4)
            for k in (5e-3, 5e-4, 5e-5)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6 * 9e-4 * 1e3


def test_correlation_finite_time(test_bath):
    assert correlation(test_bath, 10.0) == pytest.approx(C10_REF, rel=1e-7)


def test_correlation_zero_bath():
    assert correlation(SpectralDensity.zero(), 3.0) == 0


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 400.0))
def test_correlation_bounded_by_initial_value(test_bath, t):
    assert abs(correlation(test_bath, t)) <= correlation(test_bath, 0.0).real * (1 + 1e-9)


def test_f_zero_bath():
    assert half_fourier_f(SpectralDensity.zero(), 1.0, 1.2, 0.0, 0.0) == 0


def test_f_pole_gives_pi_j(test_bath):
    # omega_q - omega_j = -0.2 with no broadening
    F = half_fourier_f(test_bath, 1.8, 2.0, 0.0, 0.0)
    assert F.real == pytest.approx(math.pi * test_bath(0.2), rel=1e-8)
    assert F.real == pytest.approx(0.36, rel=1e-8)


def test_f_broadened(test_bath):
    F = half_fourier_f(test_bath, 1.8, 2.0, 0.05, 0.05)
    assert F == pytest.approx(F_BROAD_REF, rel=1e-7)


def test_f_rejects_negative_widths(test_bath):
    with pytest.raises(ValueError):
        half_fourier_f(test_bath, 1.8, 2.0, -0.1, 0.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(1e-3, 0.2))
def test_real_part_of_f_is_pi_jeff(test_bath, delta, width):
    F = half_fourier_f(test_bath, 1.0, 1.0 + delta, width / 2, width / 2)
    ts = TransitionSpectrum(delta, 0.0, width / 2, width / 2)
    assert F.real == pytest.approx(math.pi * effective_sd(test_bath, ts), rel=1e-6, abs=1e-11)


def test_transition_spectrum_peak_and_delta():
    ts = TransitionSpectrum(2.1, 1.85, 0.05005, 0.05005)
    assert ts(0.25) == pytest.approx(2 / (math.pi * 0.1001))
    with pytest.raises(ValueError):
        transition_spectrum_value(TransitionSpectrum(2.0, 1.8, 0.0, 0.0), 0.2)
    with pytest.raises(ValueError):
        TransitionSpectrum(2.0, 1.8, -0.1, 0.0)


def test_transition_spectrum_normalized():
    ts = TransitionSpectrum(2.1, 1.85, 0.05005, 0.05005)
    # the Lorentzian integrates to 1 over the whole line
    from scipy.integrate import quad
    val = quad(ts, -np.inf, np.inf, points=None, epsabs=1e-12, limit=500)[0]
    assert val == pytest.approx(1.0, abs=1e-6)


def test_jeff_delta_branch(test_bath):
    ts = TransitionSpectrum(2.2, 2.0, 0.0, 0.0)
    assert effective_sd(test_bath, ts) == pytest.approx(test_bath(0.2), rel=1e-12)


def test_jeff_of_constant_density():
    sd = SpectralDensity.tabulated([0.0, 50.0], [0.3, 0.3])
    ts = TransitionSpectrum(25.0, 0.0, 0.01, 0.01)
    # Lorentzian weight inside [0, 50] for half-width 0.01 centred at 25
    inside = 2 * math.atan(25.0 / 0.01) / math.pi
    assert effective_sd(sd, ts) == pytest.approx(0.3 * inside, rel=1e-7)
    assert effective_sd(sd, ts) == pytest.approx(0.3, rel=1e-3)


def test_jeff_reference(test_bath):
    ts = TransitionSpectrum(0.2, 0.0, 0.05, 0.05)
    assert effective_sd(test_bath, ts) == pytest.approx(JEFF_REF, rel=1e-7)


def test_jeff_converges_to_j(test_bath):
    errs = [abs(effective_sd(test_bath, TransitionSpectrum(0.19, 0.0, w / 2, w / 2))
                - test_bath(0.19)) for w in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]


def test_jeff_curve_matches_pointwise():
    sd = surrogate_structured_density()
    w = np.linspace(0.0, 0.4, 7)
    for width in (0.1001, 1e-3):
        curve = effective_sd_curve(sd, w, width)
        single = [effective_sd(sd, TransitionSpectrum(x, 0.0, width / 2, width / 2)) for x in w]
        np.testing.assert_allclose(curve, single, rtol=1e-7, atol=1e-11)


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-3, 0.2))
def test_jeff_smoother_than_j(test_bath, width):
    w = np.linspace(0.0, 0.5, 400)
    J = test_bath(w)
    Je = effective_sd_curve(test_bath, w, width)
    assert np.all(Je >= 0)
    assert np.abs(np.diff(Je)).sum() <= np.abs(np.diff(J)).sum()


def test_effective_density_table_vanishes_at_zero():
    tab = effective_density_table(surrogate_structured_density(), 0.1001,
                                  np.linspace(0.0, 1.0, 201))
    assert tab(0.0) == 0.0
    assert tab(0.2) > surrogate_structured_density()(0.2)


def test_thermal_f_adds_absorption(test_bath):
    hot = SpectralDensity.lorentzian(0.03, 0.2, 0.005, temperature=0.1)
    # uphill transition only possible with thermal phonons
    assert half_fourier_f(test_bath, 2.0, 1.8, 0.0, 0.0).real == pytest.approx(0.0, abs=1e-9)
    assert half_fourier_f(hot, 2.0, 1.8, 0.0, 0.0).real > 0.01


def test_quadrature_error_message():
    err = QuadratureError("Re F", 1e-3, 1e-10)
    assert "Re F" in str(err) and err.residual == 1e-3

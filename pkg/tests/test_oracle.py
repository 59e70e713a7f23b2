import warnings

import numpy as np
import pytest

from brls.bath import SpectralDensity
from brls.dynamics import basis_density, default_grid, eigenstate_density, evolve, observables
from brls.nheig import decompose
from brls.operators import build_nh, tavis_cummings
from brls.oracle import (DimensionError, DiscretizationWarning, ExactPropagator, discretize,
                         exact_evolve, write_bath)
from brls.redfield import assemble_generator

from conftest import GAMMA_C, GAMMA_E, OMEGA


def _quiet_discretize(sd, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscretizationWarning)
        return discretize(sd, **kw)


def test_zero_bath_has_zero_couplings():
    bath = discretize(SpectralDensity.zero(), n_modes=10)
    assert bath.n_modes == 10
    assert np.all(bath.couplings == 0)


def test_discretized_weight(test_bath):
    bath = discretize(test_bath)
    total = np.sum(bath.couplings**2)
    # nearly all of the Lorentzian weight g_b^2 sits inside the default window
    assert total == pytest.approx(0.03**2, rel=0.02)
    assert bath.spacing == pytest.approx(0.3 / 200)
    assert bath.recurrence_time == pytest.approx(2 * np.pi / bath.spacing)
    finer = discretize(test_bath, n_modes=400)
    assert abs(np.sum(finer.couplings**2) - total) < 1e-3 * total


def test_grid_is_midpoint(test_bath):
    bath = _quiet_discretize(test_bath, window=(0.1, 0.3), n_modes=4)
    np.testing.assert_allclose(bath.omegas, [0.125, 0.175, 0.225, 0.275])
    np.testing.assert_allclose(bath.couplings**2, test_bath(bath.omegas) * 0.05)


def test_narrow_window_warns(test_bath):
    with pytest.warns(DiscretizationWarning):
        discretize(test_bath, window=(0.19, 0.21), n_modes=20)


@pytest.mark.parametrize("kw", [{"n_modes": 1}, {"window": (0.3, 0.1)}, {"window": (-0.1, 0.3)}])
def test_bad_discretization(test_bath, kw):
    with pytest.raises(ValueError):
        discretize(test_bath, **kw)


def test_write_bath(tmp_path, test_bath):
    bath = discretize(test_bath, n_modes=5, window=(0.15, 0.25))
    path = tmp_path / "bath.csv"
    write_bath(bath, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "omega_ev,g_ev" and len(rows) == 6


def test_without_bath_reduces_to_lindblad():
    model = tavis_cummings(1, OMEGA, OMEGA, 0.1, GAMMA_C, GAMMA_E, SpectralDensity.zero())
    eig = decompose(build_nh(model))
    grid = default_grid(100.0, 200)
    rho0 = eigenstate_density(eig, 2)
    ex = exact_evolve(model, discretize(SpectralDensity.zero(), n_modes=10), rho0, grid)
    ref = evolve(assemble_generator(eig, None, model.jumps), rho0, grid)
    np.testing.assert_allclose(ex.rho, ref.rho, atol=1e-7)


def test_without_bath_dephasing_reduces_to_lindblad():
    model = tavis_cummings(1, OMEGA, OMEGA, 0.1, GAMMA_C, 0.0, SpectralDensity.zero(),
                           jump="dephasing")
    eig = decompose(build_nh(model))
    grid = default_grid(60.0, 120)
    rho0 = basis_density(3, model.space.index[(0, 1)])
    ex = exact_evolve(model, discretize(SpectralDensity.zero(), n_modes=4), rho0, grid)
    ref = evolve(assemble_generator(eig, None, model.jumps), rho0, grid)
    np.testing.assert_allclose(ex.rho, ref.rho, atol=1e-6)


@pytest.fixture(scope="module")
def small_bath(test_bath):
    return _quiet_discretize(test_bath, n_modes=12)


@pytest.mark.parametrize("jump", ["decay", "dephasing"])
def test_sector_matches_full(tc_model, test_bath, small_bath, jump):
    model = tavis_cummings(1, OMEGA, OMEGA, 0.1, GAMMA_C, GAMMA_E, test_bath, jump=jump)
    grid = default_grid(40.0, 80)
    rho0 = basis_density(3, model.space.index[(0, 1)])
    fast = exact_evolve(model, small_bath, rho0, grid, method="sector")
    full = exact_evolve(model, small_bath, rho0, grid, method="full")
    assert fast.extra["path"] == "sector" and full.extra["path"] == "full"
    np.testing.assert_allclose(fast.rho, full.rho, atol=1e-6)


def test_full_path_positivity_and_trace(tc_model, small_bath):
    grid = default_grid(40.0, 80)
    rho0 = basis_density(3, tc_model.space.index[(0, 1)])
    traj = exact_evolve(tc_model, small_bath, rho0, grid, method="full")
    assert np.all(np.abs(traj.extra["joint_trace"] - 1) < 1e-8)
    assert np.all(traj.extra["joint_min_eig"] >= -1e-8)


def test_sector_path_positivity(tc_model, tc_eig, test_bath):
    bath = discretize(test_bath)
    traj = exact_evolve(tc_model, bath, eigenstate_density(tc_eig, 2), default_grid())
    assert np.all(traj.extra["joint_min_eig"] >= -1e-8)
    assert np.all(np.abs(traj.trace - 1) < 1e-8)
    w = np.linalg.eigvalsh(traj.rho)
    assert w.min() > -1e-8


def test_sector_refused_for_ground_coherence(tc_model, small_bath):
    psi = np.zeros(3, dtype=complex)
    psi[[0, tc_model.space.index[(0, 1)]]] = 1 / np.sqrt(2)
    with pytest.raises(ValueError):
        exact_evolve(tc_model, small_bath, np.outer(psi, psi.conj()), default_grid(10.0, 20),
                     method="sector")


def test_phonon_cap_converged(tc_model, tc_eig, test_bath):
    bath = _quiet_discretize(test_bath, n_modes=40)
    grid = default_grid(100.0, 200)
    rho0 = eigenstate_density(tc_eig, 2)
    one = exact_evolve(tc_model, bath, rho0, grid, phonon_cap=1)
    two = exact_evolve(tc_model, bath, rho0, grid, phonon_cap=2)
    assert np.abs(one.rho - two.rho).max() < 1e-2


def test_mode_number_converged(tc_model, tc_eig, test_bath):
    grid = default_grid()
    rho0 = eigenstate_density(tc_eig, 2)
    a = exact_evolve(tc_model, _quiet_discretize(test_bath, n_modes=100), rho0, grid)
    b = exact_evolve(tc_model, discretize(test_bath, n_modes=200), rho0, grid)
    assert np.abs(a.rho - b.rho).max() < 1e-2


def test_dimension_cap(tc_model, test_bath):
    bath = _quiet_discretize(test_bath, n_modes=50)
    with pytest.raises(DimensionError):
        exact_evolve(tc_model, bath, basis_density(3, 1), default_grid(10.0, 10),
                     method="full", phonon_cap=2, max_dim=1000)


def test_propagator_reuse(tc_model, small_bath):
    grid = default_grid(50.0, 100)
    prop = ExactPropagator(tc_model, small_bath, grid)
    rho_e = basis_density(3, tc_model.space.index[(0, 1)])
    rho_c = basis_density(3, tc_model.space.index[(1, 0)])
    a = prop.reduced(rho_e)
    prop.reduced(rho_c)
    again = prop.reduced(rho_e)
    np.testing.assert_array_equal(a.rho, again.rho)
    # linearity in the initial state
    mix = prop.reduced(0.5 * (rho_e + rho_c))
    np.testing.assert_allclose(mix.rho, 0.5 * (a.rho + prop.reduced(rho_c).rho), atol=1e-12)


def test_bath_drives_up_to_lp(tc_model, tc_eig, test_bath):
    traj = exact_evolve(tc_model, discretize(test_bath), eigenstate_density(tc_eig, 2),
                        default_grid(30.0, 60))
    # UP -> LP transfer is visible within the first few fs
    assert traj.populations[0, 1] < 1e-12
    assert traj.populations[-1, 1] > 5e-3

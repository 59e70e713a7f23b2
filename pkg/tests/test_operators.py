import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brls.dynamics import basis_density, default_grid, evolve
from brls.nheig import decompose
from brls.operators import (BathCoupling, HilbertSpace, InvalidModelError, JumpOperator, Mode,
                            SystemModel, ValidityWarning, build_nh, tavis_cummings)
from brls.redfield import assemble_generator, brls_tensor, eigen_couplings

from conftest import GAMMA_C, GAMMA_E, OMEGA


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=4),
       st.one_of(st.none(), st.integers(0, 4)))
def test_space_matches_brute_force_enumeration(n_max, cap):
    modes = [Mode.tls() if n == 0 else Mode.boson(n) for n in n_max]
    space = HilbertSpace(modes, cap)
    brute = [s for s in itertools.product(*[range(m.n_max + 1) for m in modes])
             if cap is None or sum(s) <= cap]
    assert list(space.states) == brute
    assert space.dim == len(brute) >= 1


def test_large_capped_space_is_cheap():
    space = HilbertSpace([Mode.boson(1)] + [Mode.tls()] * 40, excitation_cap=1)
    assert space.dim == 42


def test_ladder_operators():
    space = HilbertSpace([Mode.boson(3), Mode.tls(), Mode.tls()], excitation_cap=3)
    ground = space.basis_vector((0, 0, 0))
    assert not np.any(space.lower(1) @ ground)
    one = space.basis_vector((1, 0, 0))
    assert np.allclose(space.number(0) @ one, one)
    n1, n2 = space.number(1), space.number(2)
    assert np.allclose(n1 @ n2 - n2 @ n1, 0)
    a = space.lower(0)
    comm = a @ a.conj().T - a.conj().T @ a
    # [a, a^dag] = 1 on boson states with room to raise, ignoring the emitters
    for i, s in enumerate(space.states):
        if sum(s) < 3:
            assert comm[i, i] == pytest.approx(1.0)
    with pytest.raises(IndexError):
        space.lower(3)


def test_mode_validation():
    with pytest.raises(ValueError):
        Mode("spin")
    with pytest.raises(ValueError):
        Mode("tls", 2)


def test_tc_structure(tc_model):
    assert tc_model.dim == 3
    assert len(tc_model.jumps) == 2
    assert len(tc_model.couplings) == 1
    assert np.allclose(tc_model.hamiltonian, tc_model.hamiltonian.conj().T)
    assert {j.rate for j in tc_model.jumps} == {GAMMA_C, GAMMA_E}


@pytest.mark.parametrize("n", [1, 2, 5])
def test_tc_dimension(n):
    assert tavis_cummings(n, 2.0, 2.0, 0.1, 0.1, 0.0).dim == n + 2


def test_tc_rejects_bad_input():
    with pytest.raises(InvalidModelError):
        tavis_cummings(0, 2.0, 2.0, 0.1, 0.1, 0.0)
    with pytest.raises(InvalidModelError):
        tavis_cummings(1, 2.0, 2.0, 0.1, -0.1, 0.0)
    with pytest.raises(InvalidModelError):
        tavis_cummings(1, 2.0, 2.0, 0.1, 0.1, 0.0, jump="pump")


def test_polariton_eigenvalues(tc_model):
    lam = np.sort_complex(np.linalg.eigvals(build_nh(tc_model)))[1:]
    shift = np.sqrt(0.1**2 - ((GAMMA_C - GAMMA_E) / 4) ** 2)
    expected = OMEGA - 0.25j * (GAMMA_C + GAMMA_E) + np.array([-shift, shift])
    np.testing.assert_allclose(lam, expected, rtol=1e-12)


def test_dark_state_n2():
    m = tavis_cummings(2, OMEGA, OMEGA, 0.1, GAMMA_C, GAMMA_E)
    lam = np.linalg.eigvals(build_nh(m))
    assert np.min(np.abs(lam - (OMEGA - 0.5j * GAMMA_E))) < 1e-12


def test_decoupled_limit():
    m = tavis_cummings(1, 2.0, 2.1, 0.0, 0.1, 0.0)
    H = m.hamiltonian
    assert np.allclose(H, np.diag(np.diag(H)))


def test_nh_lossless_limit():
    m = tavis_cummings(2, 2.0, 2.0, 0.1, 0.0, 0.0)
    assert np.array_equal(build_nh(m), m.hamiltonian)


def test_nh_diagonal_losses(tc_model):
    space = tc_model.space
    Hnh = build_nh(tc_model)
    c = space.index[(1, 0)]
    e = space.index[(0, 1)]
    assert Hnh[c, c].imag == pytest.approx(-GAMMA_C / 2)
    assert Hnh[e, e].imag == pytest.approx(-GAMMA_E / 2)


def test_dephasing_nh_correction():
    m = tavis_cummings(1, 2.0, 2.0, 0.1, 0.1, 0.0, jump="dephasing")
    n = m.space.number(0)
    correction = build_nh(m) - m.hamiltonian
    np.testing.assert_allclose(correction, -0.5j * 0.1 * n @ n)
    assert len(m.jumps) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.floats(0, 0.3), st.floats(0, 0.5), st.floats(0, 0.5))
def test_anti_hermitian_part_negative(n, g, gc, ge):
    m = tavis_cummings(n, 2.0, 2.05, g, gc, ge)
    Hnh = build_nh(m)
    anti = (Hnh - Hnh.conj().T) / 2j
    assert np.linalg.eigvalsh(anti).max() <= 1e-14


def test_validity_guard_warns():
    with pytest.warns(ValidityWarning):
        tavis_cummings(1, 2.0, 2.0, 0.1, 3.0, 0.0)


def test_model_validation():
    H = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(InvalidModelError):
        SystemModel(H)
    Hh = np.eye(2, dtype=complex)
    V = np.array([[0, 1j], [-1j, 0]])
    with pytest.raises(InvalidModelError):
        SystemModel(Hh, couplings=[BathCoupling(V, None)])
    with pytest.raises(InvalidModelError):
        JumpOperator(np.eye(2), -1.0)


def test_excitation_cap_does_not_change_single_excitation_dynamics(test_bath):
    grid = default_grid(50.0, 101)
    block = []
    for cap in (1, 2):
        m = tavis_cummings(1, OMEGA, OMEGA, 0.1, GAMMA_C, GAMMA_E, sd=test_bath,
                           excitation_cap=cap)
        eig = decompose(build_nh(m))
        gen = assemble_generator(eig, brls_tensor(eig, eigen_couplings(eig, m)), m.jumps)
        start = m.space.index[(0, 1)]
        traj = evolve(gen, basis_density(m.dim, start), grid)
        idx = [m.space.index[s] for s in [(1, 0), (0, 1)]]
        block.append(traj.rho[:, idx][:, :, idx])
    np.testing.assert_allclose(block[0], block[1], atol=1e-8)

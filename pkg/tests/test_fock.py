import math

import numpy as np
import pytest

from coincspec.fock import (
    CompositeSpace,
    Operator,
    SpaceMismatchError,
    annihilation,
    atom_sigma,
    excitation_number,
    identity,
    normal_ordered_n2,
    number,
)


def test_space_dimension():
    assert CompositeSpace(4, 2).dim == 5 * 4
    assert CompositeSpace(2, 0).dim == 3
    assert CompositeSpace(8, 1).dim == 18


def test_space_validation():
    with pytest.raises(ValueError):
        CompositeSpace(0, 1)
    with pytest.raises(ValueError):
        CompositeSpace(3, -1)


def test_annihilation_matrix_elements():
    a = annihilation(CompositeSpace(2, 0)).mat
    expected = np.zeros((3, 3))
    expected[0, 1] = 1.0
    expected[1, 2] = np.sqrt(2)
    assert np.allclose(a, expected)


def test_annihilation_nilpotent_at_cutoff():
    a = annihilation(CompositeSpace(1, 0)).mat
    assert np.allclose(a @ a, 0.0)


def test_canonical_commutator_below_cutoff():
    space = CompositeSpace(8, 0)
    a = annihilation(space).mat
    comm = a @ a.conj().T - a.conj().T @ a
    # the cutoff corrupts only the |n_max><n_max| corner
    assert np.allclose(comm[:8, :8], np.eye(8))


def test_sigma_actions():
    space = CompositeSpace(1, 1)
    sm = atom_sigma(space, 1, "minus").mat
    e_state = space.basis_state(0, (1,))
    g_state = space.basis_state(0)
    assert np.allclose(sm @ e_state, g_state)
    assert np.allclose(sm @ g_state, 0.0)
    sp = atom_sigma(space, 1, "plus").mat
    proj = sp @ sm
    assert np.allclose(proj @ e_state, e_state)
    assert np.allclose(proj @ g_state, 0.0)


def test_distinct_slots_commute():
    space = CompositeSpace(2, 2)
    s1 = atom_sigma(space, 1, "minus")
    s2 = atom_sigma(space, 2, "plus")
    assert np.allclose(s1.commutator(s2).mat, 0.0)


def test_embed_order_consistency():
    space = CompositeSpace(2, 2)
    a = annihilation(space)
    s2 = atom_sigma(space, 2, "plus")
    assert np.allclose((a @ s2).mat, (s2 @ a).mat)


def test_atom_index_range():
    space = CompositeSpace(2, 1)
    with pytest.raises(ValueError):
        atom_sigma(space, 2, "minus")
    with pytest.raises(ValueError):
        atom_sigma(space, 0, "z")


def test_space_mismatch_rejected():
    a = annihilation(CompositeSpace(2, 0))
    b = annihilation(CompositeSpace(3, 0))
    with pytest.raises(SpaceMismatchError):
        _ = a @ b


def test_normal_ordered_n2_fock_states():
    space = CompositeSpace(4, 0)
    n2 = normal_ordered_n2(space)
    vac = np.outer(space.basis_state(0), space.basis_state(0).conj())
    assert abs(n2.expect(vac)) < 1e-14
    two = np.outer(space.basis_state(2), space.basis_state(2).conj())
    assert abs(n2.expect(two) - 2.0) < 1e-12


def test_normal_ordered_n2_operator_identity():
    # a^dag a^dag a a = n(n-1) exactly on the whole truncated space
    space = CompositeSpace(6, 1)
    n2 = normal_ordered_n2(space).mat
    n = number(space).mat
    assert np.allclose(n2, n @ n - n, atol=1e-12)


def test_normal_ordered_n2_coherent_state():
    # oracle: brute-force Poisson sum of n(n-1) over the truncated amplitudes
    space = CompositeSpace(12, 0)
    alpha2 = 1.0
    amps = np.array([np.exp(-alpha2 / 2) * alpha2 ** (n / 2) / np.sqrt(float(math.factorial(n)))
                     for n in range(13)])
    psi = amps / np.linalg.norm(amps)
    rho = np.outer(psi, psi.conj())
    oracle = sum(abs(psi[n]) ** 2 * n * (n - 1) for n in range(13))
    val = normal_ordered_n2(space).expect(rho).real
    assert abs(val - oracle) < 1e-12
    assert abs(val - 1.0) < 1e-6


def test_hermitian_builds_have_real_spectra():
    space = CompositeSpace(3, 2)
    a = annihilation(space)
    h = a @ a.dag + atom_sigma(space, 1, "z") + atom_sigma(space, 2, "z")
    assert h.is_hermitian()
    w = np.linalg.eigvals(h.mat)
    assert np.max(np.abs(w.imag)) < 1e-10


def test_embed_preserves_spectrum():
    space = CompositeSpace(2, 1)
    sz = atom_sigma(space, 1, "z").mat
    w = np.sort(np.linalg.eigvalsh(sz))
    # each 2x2 eigenvalue appears cavity_dim times
    expected = np.sort(np.repeat([-0.5, 0.5], space.cavity_dim))
    assert np.allclose(w, expected)


def test_excitation_number_diagonal():
    space = CompositeSpace(2, 2)
    nexc = excitation_number(space).mat
    assert np.allclose(nexc, np.diag(np.diag(nexc)))
    v = space.basis_state(1, (1, 2))
    assert abs((v.conj() @ nexc @ v) - 3.0) < 1e-14


def test_operator_algebra_shapes():
    space = CompositeSpace(2, 1)
    one = identity(space)
    a = annihilation(space)
    assert np.allclose((2.0 * one - one).mat, np.eye(space.dim))
    assert np.allclose((a.dag.dag).mat, a.mat)

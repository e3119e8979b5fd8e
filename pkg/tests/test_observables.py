import numpy as np
import pytest

from coincspec.fock import CompositeSpace
from coincspec.observables import BrokenDensityMatrixError, W2Value, mixture_w2, w2


def fock_rho(space, n):
    v = space.basis_state(n)
    return np.outer(v, v.conj())


def test_vacuum_zero():
    space = CompositeSpace(4, 0)
    assert w2(fock_rho(space, 0), space).value == 0.0


def test_two_photon_state():
    space = CompositeSpace(4, 0)
    assert w2(fock_rho(space, 2), space).value == pytest.approx(2.0)


@pytest.mark.parametrize("cutoff,analytic_tol", [(10, 1e-3), (16, 1e-4)])
def test_thermal_state_oracle(cutoff, analytic_tol):
    # Bose-Einstein weights, mean 0.5: <n(n-1)> -> 2 nbar^2 as the cutoff
    # grows; the geometric tail above n = 10 still carries ~7e-4 of it
    space = CompositeSpace(cutoff, 0)
    nbar = 0.5
    p = np.array([(nbar / (1 + nbar)) ** n / (1 + nbar)
                  for n in range(cutoff + 1)])
    p /= p.sum()
    rho = np.diag(p).astype(complex)
    oracle = float(sum(p[n] * n * (n - 1) for n in range(cutoff + 1)))
    val = w2(rho, space).value
    assert val == pytest.approx(oracle, abs=1e-14)
    assert val == pytest.approx(2 * nbar**2, abs=analytic_tol)


def test_zero_for_single_photon_support():
    space = CompositeSpace(3, 1)
    v0 = space.basis_state(0, (1,))
    v1 = space.basis_state(1)
    rho = 0.3 * np.outer(v0, v0.conj()) + 0.7 * np.outer(v1, v1.conj())
    assert w2(rho, space).value == 0.0


def test_broken_rho_raises():
    space = CompositeSpace(2, 0)
    rho = np.array([[0.5, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3j]])
    with pytest.raises(BrokenDensityMatrixError):
        w2(rho, space)


def test_clamping_keeps_raw():
    val = W2Value(value=0.0, raw=-5e-9)
    assert val.raw == -5e-9
    with pytest.raises(BrokenDensityMatrixError):
        W2Value(value=0.0, raw=-1e-6)


def test_mixture_single_component():
    x = W2Value(value=0.7, raw=0.7)
    y = W2Value(value=123.0, raw=123.0)
    assert mixture_w2([(1.0, x), (0.0, y)]).value == pytest.approx(0.7)


def test_mixture_sparse_beam_weights():
    w1 = W2Value(value=2.0, raw=2.0)
    w2_ = W2Value(value=10.0, raw=10.0)
    mixed = mixture_w2([(0.9, w1), (0.1, w2_)])
    assert mixed.value == pytest.approx(0.9 * 2.0 + 0.1 * 10.0)


def test_mixture_linearity_constant():
    c = W2Value(value=3.3, raw=3.3)
    probs = [0.2, 0.5, 0.1]
    mixed = mixture_w2([(p, c) for p in probs])
    assert mixed.value == pytest.approx(3.3 * sum(probs))


def test_mixture_rejects_negative_probability():
    with pytest.raises(ValueError):
        mixture_w2([(-0.1, W2Value(value=1.0, raw=1.0))])

"""Operators on the truncated composite space cavity (x) atom_1 (x) ... (x) atom_N.

Basis ordering is cavity-major: index = (photon number)*2^N + atomic bits,
with atom 1 the slowest atomic slot and |g> = 0, |e> = 1 per atom.  All
operators are dense complex matrices; composite dimensions stay tiny
(a few tens) so dense algebra is both simpler and fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-12


class SpaceMismatchError(ValueError):
    """Raised when combining operators that live on different composite spaces."""


@dataclass(frozen=True)
class CompositeSpace:
    """Truncated Hilbert space of one cavity mode and ``atom_count`` two-level atoms.

    Parameters
    ----------
    fock_cutoff : int
        Maximum photon number n_max kept in the cavity factor (dimension
        n_max + 1).
    atom_count : int
        Number of two-level atoms (each contributes a factor of dimension 2).
    """

    fock_cutoff: int
    atom_count: int

    def __post_init__(self):
        if self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")
        if self.atom_count < 0:
            raise ValueError(f"atom_count must be >= 0, got {self.atom_count}")

    @property
    def cavity_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def dim(self) -> int:
        return self.cavity_dim * 2**self.atom_count

    def basis_state(self, photons: int, excited: tuple[int, ...] = ()) -> np.ndarray:
        """Unit vector |photons> (x) |s_1 ... s_N> with s_m = 1 for excited atoms."""
        if not 0 <= photons <= self.fock_cutoff:
            raise ValueError(f"photon number {photons} outside cutoff {self.fock_cutoff}")
        bits = [0] * self.atom_count
        for m in excited:
            if not 1 <= m <= self.atom_count:
                raise ValueError(f"atom index {m} out of range 1..{self.atom_count}")
            bits[m - 1] = 1
        idx = photons
        for b in bits:
            idx = 2 * idx + b
        v = np.zeros(self.dim, dtype=complex)
        v[idx] = 1.0
        return v


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix tagged with its composite space."""

    space: CompositeSpace
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatchError(
                f"matrix shape {m.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "mat", m)

    def _check(self, other: "Operator"):
        if self.space != other.space:
            raise SpaceMismatchError("operators live on different composite spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.mat - other.mat)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.mat @ other.mat)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, scalar * self.mat)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.mat)

    @property
    def dag(self) -> "Operator":
        return Operator(self.space, self.mat.conj().T)

    def commutator(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.mat @ other.mat - other.mat @ self.mat)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return float(np.max(np.abs(self.mat - self.mat.conj().T))) < tol

    def expect(self, rho: np.ndarray) -> complex:
        return complex(np.trace(rho @ self.mat))


def identity(space: CompositeSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def annihilation(space: CompositeSpace) -> Operator:
    """Cavity annihilation operator a, identity on all atomic factors.

    <n-1| a |n> = sqrt(n); the ladder is truncated above ``fock_cutoff``.
    """
    nc = space.cavity_dim
    a = np.zeros((nc, nc), dtype=complex)
    for n in range(1, nc):
        a[n - 1, n] = np.sqrt(n)
    return Operator(space, np.kron(a, np.eye(2**space.atom_count)))


def number(space: CompositeSpace) -> Operator:
    """Photon number operator a^dag a."""
    ad = annihilation(space).dag
    return ad @ annihilation(space)


_SIGMA = {
    # atomic basis order |g> = 0, |e> = 1
    "minus": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    "plus": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
    # sigma_z has eigenvalues +-1/2 so the bare splitting enters as omega*sigma_z
    "z": np.array([[-0.5, 0.0], [0.0, 0.5]], dtype=complex),
}


def atom_sigma(space: CompositeSpace, atom_index: int, which: str) -> Operator:
    """Pauli-type operator for one atom, embedded with identities elsewhere.

    Parameters
    ----------
    atom_index : int
        1-based atom slot.
    which : {"minus", "plus", "z"}
        sigma_- = |g><e|, sigma_+ = |e><g|, sigma_z = (|e><e| - |g><g|)/2.
    """
    if not 1 <= atom_index <= space.atom_count:
        raise ValueError(
            f"atom_index {atom_index} out of range 1..{space.atom_count}"
        )
    if which not in _SIGMA:
        raise ValueError(f"unknown sigma kind {which!r}")
    op = np.eye(space.cavity_dim, dtype=complex)
    for m in range(1, space.atom_count + 1):
        factor = _SIGMA[which] if m == atom_index else np.eye(2)
        op = np.kron(op, factor)
    return Operator(space, op)


def total_sigma(space: CompositeSpace, which: str) -> Operator:
    """Sum of single-atom sigma operators over all atoms."""
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for m in range(1, space.atom_count + 1):
        out += atom_sigma(space, m, which).mat
    return Operator(space, out)


def excitation_number(space: CompositeSpace) -> Operator:
    """Total excitation a^dag a + sum_m sigma_+ sigma_- (photons plus excited atoms)."""
    n = number(space).mat.copy()
    for m in range(1, space.atom_count + 1):
        sp = atom_sigma(space, m, "plus").mat
        sm = atom_sigma(space, m, "minus").mat
        n += sp @ sm
    return Operator(space, n)


def normal_ordered_n2(space: CompositeSpace) -> Operator:
    """a^dag a^dag a a; its expectation in |n> is n(n-1)."""
    a = annihilation(space)
    ad = a.dag
    return ad @ ad @ a @ a


def density_checks(rho: np.ndarray, trace_tol: float = 1e-12,
                   herm_tol: float = 1e-10, eig_tol: float = -1e-8) -> dict:
    """Diagnostics for a candidate density matrix.

    Returns the deviations; callers decide what to tolerate.  Positivity is
    checked only down to ``eig_tol`` since Fock truncation can leave tiny
    negative eigenvalues.
    """
    tr_dev = abs(np.trace(rho) - 1.0)
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    return {
        "trace_dev": float(tr_dev),
        "herm_dev": herm_dev,
        "min_eig": min_eig,
        "ok": tr_dev < trace_tol and herm_dev < herm_tol and min_eig > eig_tol,
    }

"""Lab-frame and rotating-frame Hamiltonians plus the atomic drive operator.

Unit conventions used throughout the package: hbar = 1, kappa = 1, and the
common cavity/atom frequency omega = 0 (every spectrum is reported as a shift
from omega, so omega never enters an observable).  The rotating frame sits at
the fixed drive frequency omega_1 = omega - g_f, which turns the detuning
omega - omega_1 into the single parameter g_f.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fock import (
    CompositeSpace,
    Operator,
    annihilation,
    atom_sigma,
    number,
    total_sigma,
)


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of one atoms-plus-cavity configuration, in kappa units.

    Parameters
    ----------
    couplings : tuple of float
        Atom-cavity coupling strengths (g_1, ..., g_N); the atom count is the
        length of this tuple.
    gamma : float
        Free-space emission rate, identical for all atoms.
    e1, e2 : float
        Amplitudes of the fixed (omega_1) and scanning (omega_2) drive field.
    g_f : float
        Fixed-field detuning omega - omega_1.
    n_max : int
        Fock cutoff of the cavity factor.
    """

    couplings: tuple[float, ...]
    gamma: float = 0.0
    e1: float = 0.0
    e2: float = 0.0
    g_f: float = 0.0
    n_max: int = 4

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(g) for g in self.couplings))
        for name in ("gamma", "e1", "e2"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {val}")
        for g in self.couplings:
            if not np.isfinite(g) or g < 0:
                raise ValueError(f"couplings must be finite and >= 0, got {g}")
        if not np.isfinite(self.g_f):
            raise ValueError("g_f must be finite")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def atom_count(self) -> int:
        return len(self.couplings)

    @property
    def space(self) -> CompositeSpace:
        return CompositeSpace(self.n_max, self.atom_count)


def build_h(config: SystemConfig, phases: tuple[float, ...] | None = None) -> Operator:
    """Undriven, undamped Hamiltonian at omega = 0.

    H = sum_m i(g_m a^dag sigma_-^(m) - g_m^* a sigma_+^(m)) with
    g_m = |g_m| e^{i theta_m}.  The bare omega(a^dag a + sum sigma_z) term
    vanishes in this frame and is dropped.  ``phases`` exists only to test
    gauge invariance; production couplings are real.
    """
    space = config.space
    h = np.zeros((space.dim, space.dim), dtype=complex)
    a = annihilation(space).mat
    ad = a.conj().T
    for m, g in enumerate(config.couplings, start=1):
        gm = g if phases is None else g * np.exp(1j * phases[m - 1])
        sm = atom_sigma(space, m, "minus").mat
        sp = atom_sigma(space, m, "plus").mat
        h += 1j * (gm * ad @ sm - np.conj(gm) * a @ sp)
    return Operator(space, h)


def build_drive(space: CompositeSpace, amplitude: float) -> Operator:
    """Off-axis atomic drive Upsilon(E) = i E sum_m (sigma_+^(m) - sigma_-^(m))."""
    if amplitude < 0:
        raise ValueError("drive amplitude must be >= 0")
    sp = total_sigma(space, "plus").mat
    sm = total_sigma(space, "minus").mat
    return Operator(space, 1j * amplitude * (sp - sm))


def build_h_eff(config: SystemConfig,
                phases: tuple[float, ...] | None = None) -> Operator:
    """Non-Hermitian effective Hamiltonian in the frame rotating at omega_1.

    Contains the detuning g_f(a^dag a + sum sigma_z), the coupling, the fixed
    drive Upsilon(E_1), and the anti-Hermitian damping
    -i(kappa a^dag a + sum (gamma/2) sigma_+ sigma_-).  The scanning field is
    time dependent and lives in the Liouvillian blocks, not here.
    """
    space = config.space
    h = config.g_f * number(space).mat
    for m in range(1, config.atom_count + 1):
        h = h + config.g_f * atom_sigma(space, m, "z").mat
    h = h + build_h(config, phases=phases).mat
    h = h + build_drive(space, config.e1).mat
    h = h - 1j * number(space).mat  # kappa = 1
    for m in range(1, config.atom_count + 1):
        sp = atom_sigma(space, m, "plus").mat
        sm = atom_sigma(space, m, "minus").mat
        h = h - 0.5j * config.gamma * (sp @ sm)
    return Operator(space, h)


def anti_hermitian_part(op: Operator) -> np.ndarray:
    """(A - A^dag)/2, the damping content of an effective Hamiltonian."""
    return 0.5 * (op.mat - op.mat.conj().T)

"""Suppressed transitions: zero chosen drive matrix elements in the dressed basis.

Writing a drive operator in the eigenbasis of the undriven Hamiltonian,
zeroing one element together with its conjugate, and transforming back
removes a single excitation pathway from the dynamics while leaving the jump
term untouched.  Comparing spectra with and without such surgery attributes
peaks to pathways; it is an analysis instrument, not a physical process.

Selector strings use the grammar  field ":" bra "~" ket  with field one of
``fixed`` (the omega_1 drive) or ``scan`` (the omega_2 drive), e.g.
``fixed:0~1-`` or ``scan:1-~2++``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dressed import DressedBasis, dressed_basis
from .fock import Operator, total_sigma
from .hamiltonian import SystemConfig, build_drive
from .liouville import Superoperator, assemble_blocks

FIELD_FIXED = "fixed"
FIELD_SCAN = "scan"


class SelectorError(ValueError):
    """Selector string malformed or unresolvable in the current eigensystem."""


@dataclass(frozen=True)
class TransitionSelector:
    """One dressed-state transition of one drive field."""

    field: str
    bra: str
    ket: str

    def __post_init__(self):
        if self.field not in (FIELD_FIXED, FIELD_SCAN):
            raise SelectorError(f"field must be 'fixed' or 'scan', got {self.field!r}")
        if self.bra == self.ket:
            raise SelectorError("selector endpoints must differ")

    def __str__(self):
        return f"{self.field}:{self.bra}~{self.ket}"


def parse_selector(text: str) -> TransitionSelector:
    """Parse ``field:bra~ket``; raises with the offending position on failure."""
    if ":" not in text:
        raise SelectorError(f"missing ':' in selector {text!r}")
    fld, _, rest = text.partition(":")
    if "~" not in rest:
        raise SelectorError(f"missing '~' after position {len(fld) + 1} in {text!r}")
    bra, _, ket = rest.partition("~")
    if not bra or not ket:
        raise SelectorError(f"empty endpoint in selector {text!r}")
    return TransitionSelector(field=fld.strip(), bra=bra.strip(), ket=ket.strip())


def parse_selectors(text: str) -> tuple[TransitionSelector, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(parse_selector(p) for p in parts)


def to_dressed_basis(op: Operator, basis: DressedBasis,
                     ortho_tol: float = 1e-10) -> Operator:
    """Similarity transform U^dag A U into the dressed eigenbasis."""
    u = basis.transform
    gram_dev = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))
    if gram_dev > ortho_tol:
        raise ValueError(f"eigensystem not orthonormal (deviation {gram_dev:.2e})")
    return Operator(op.space, u.conj().T @ op.mat @ u)


def from_dressed_basis(op: Operator, basis: DressedBasis) -> Operator:
    u = basis.transform
    return Operator(op.space, u @ op.mat @ u.conj().T)


def suppress(op_dressed: Operator, selectors, basis: DressedBasis) -> Operator:
    """Zero the selected elements and their conjugates; everything else untouched."""
    mat = op_dressed.mat.copy()
    for sel in selectors:
        i = basis.index_of(sel.bra)
        j = basis.index_of(sel.ket)
        mat[i, j] = 0.0
        mat[j, i] = 0.0
    return Operator(op_dressed.space, mat)


def _suppress_bare(mat: np.ndarray, selectors, basis: DressedBasis) -> np.ndarray:
    u = basis.transform
    dressed = u.conj().T @ mat @ u
    for sel in selectors:
        i = basis.index_of(sel.bra)
        j = basis.index_of(sel.ket)
        dressed[i, j] = 0.0
        dressed[j, i] = 0.0
    return u @ dressed @ u.conj().T


def rebuild_with_suppression(config: SystemConfig, selectors,
                             basis: DressedBasis | None = None,
                             phases: tuple[float, ...] | None = None,
                             ) -> tuple[Superoperator, Superoperator, Superoperator]:
    """Liouvillian blocks with the selected drive transitions removed.

    The dressed basis comes from the undriven Hamiltonian at the config's
    couplings.  Fixed-field selectors act on Upsilon(E1); scanning-field
    selectors act on both exp(-+ i delta t) halves of the E2 drive, which is
    the only choice that keeps the drive Hermitian.  With no selectors the
    assembly is bypassed entirely, so the output is bit-identical to
    :func:`assemble_blocks`.
    """
    selectors = tuple(selectors)
    fixed_sel = [s for s in selectors if s.field == FIELD_FIXED]
    scan_sel = [s for s in selectors if s.field == FIELD_SCAN]
    if not fixed_sel and not scan_sel:
        return assemble_blocks(config, phases=phases)

    if basis is None:
        basis = dressed_basis(config.couplings, config.space)
    space = config.space
    fixed_op = None
    if fixed_sel:
        fixed_op = _suppress_bare(build_drive(space, config.e1).mat, fixed_sel, basis)
    scan_plus = scan_minus = None
    if scan_sel:
        scan_plus = _suppress_bare(total_sigma(space, "plus").mat, scan_sel, basis)
        scan_minus = _suppress_bare(total_sigma(space, "minus").mat, scan_sel, basis)
    return assemble_blocks(config, phases=phases, fixed_drive=fixed_op,
                           scan_plus=scan_plus, scan_minus=scan_minus)


def resolvable(selectors, basis: DressedBasis) -> bool:
    """True when every selector endpoint exists in this eigensystem."""
    try:
        for sel in selectors:
            basis.index_of(sel.bra)
            basis.index_of(sel.ket)
    except KeyError:
        return False
    return True

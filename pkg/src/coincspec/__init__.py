"""coincspec: two-photon coincidence spectroscopy of one and two atoms in a cavity.

A numpy/scipy library (plus a small CLI) that builds driven-dissipative
Liouvillians for two-level atoms coupled to a damped cavity mode, solves the
long-time density matrix under bichromatic driving through a truncated Bloch
hierarchy, averages over position-induced coupling distributions, and turns
the result into coincidence-rate spectra with background subtraction,
peak detection and pathway attribution via suppressed transitions.
"""

__version__ = "0.1.0"

from .broadening import (
    CouplingDistribution,
    CouplingGrid,
    average_w2,
    build_distribution,
    product_distribution,
)
from .dressed import (
    DressedBasis,
    DressedState,
    dressed_basis,
    jc_ladder,
    numeric_eigensystem,
    quadruplet,
    quadruplet_eigenvalues,
    resonance_detuning,
    triplet,
)
from .fock import (
    CompositeSpace,
    Operator,
    annihilation,
    atom_sigma,
    excitation_number,
    normal_ordered_n2,
    total_sigma,
)
from .hamiltonian import SystemConfig, build_drive, build_h, build_h_eff
from .liouville import (
    BlochSolution,
    SteadyStateSolver,
    Superoperator,
    assemble_blocks,
    steady_state,
    time_propagate_oracle,
)
from .observables import W2Value, mixture_w2, w2
from .spectroscopy import (
    Peak,
    ScanConfig,
    SpectrumResult,
    background_subtract,
    detect_peaks,
    scan,
    sector_mix,
)
from .suppression import (
    TransitionSelector,
    parse_selector,
    parse_selectors,
    rebuild_with_suppression,
    suppress,
    to_dressed_basis,
)

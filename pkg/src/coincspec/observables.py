"""Two-photon coincidence rate and mixtures over atom-number sectors.

The short-coincidence-window rate is proportional to the equal-time
normally ordered moment <a^dag a^dag a a>; no attempt is made to restore
absolute detector units, so all spectra are in arbitrary (but mutually
comparable) units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import CompositeSpace, normal_ordered_n2

RAW_FLOOR = -1e-8
IMAG_TOL = 1e-8


class BrokenDensityMatrixError(ValueError):
    """The coincidence-rate trace came out non-real beyond tolerance."""


@dataclass(frozen=True)
class W2Value:
    """Two-photon coincidence rate with its unclamped raw value and provenance."""

    value: float
    raw: float
    provenance: dict | None = None

    def __post_init__(self):
        if self.raw < RAW_FLOOR:
            raise BrokenDensityMatrixError(
                f"coincidence rate {self.raw:.3e} below the truncation floor "
                f"{RAW_FLOOR:.0e}; the density matrix is unphysical")


def w2(rho: np.ndarray, space: CompositeSpace,
       provenance: dict | None = None) -> W2Value:
    """tr(rho a^dag a^dag a a), clamped at zero for reporting.

    Raises if the trace has an imaginary part above 1e-8, which signals a
    non-Hermitian or otherwise broken density matrix.
    """
    val = complex(np.trace(rho @ normal_ordered_n2(space).mat))
    if abs(val.imag) > IMAG_TOL:
        raise BrokenDensityMatrixError(
            f"imaginary coincidence rate {val.imag:.3e}; rho violates Hermiticity")
    raw = float(val.real)
    return W2Value(value=max(raw, 0.0), raw=raw, provenance=provenance)


def mixture_w2(components: list[tuple[float, W2Value]]) -> W2Value:
    """Probability-weighted sum over atom-number sectors; exactly linear."""
    total_val = 0.0
    total_raw = 0.0
    for p, wv in components:
        if p < 0:
            raise ValueError(f"sector probability must be >= 0, got {p}")
        total_val += p * wv.value
        total_raw += p * wv.raw
    return W2Value(value=total_val, raw=total_raw,
                   provenance={"mixture": [p for p, _ in components]})

"""Closed-form eigensystem of the undriven atoms-plus-cavity Hamiltonian.

One atom gives the familiar couplet ladder (splitting +-sqrt(n) g).  Two
atoms with unequal couplings give a singlet, a one-quantum triplet and
quadruplets above; all eigenvalues are reported as shifts from the common
frequency omega = 0.  A numeric diagonalization oracle validates every
closed form and takes over in the degenerate corners where the coefficient
formulas divide by zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fock import CompositeSpace, Operator, excitation_number

# Below this relative scale the coefficient formulas lose all digits to
# cancellation and the analytic limit forms are used instead.
EPS_DEGENERATE = 1e-6


class DegenerateCouplingError(ValueError):
    """Couplings too degenerate for a unique analytic eigenbasis."""


class DarkPathwayError(ValueError):
    """Requested excitation pathway has a vanishing drive matrix element."""


@dataclass(frozen=True)
class DressedState:
    """One analytic eigenpair of the undriven Hamiltonian.

    ``vector`` lives in the full composite-space basis (cavity-major
    ordering); ``eigenvalue`` is the shift from omega in kappa units.
    """

    label: str
    eigenvalue: float
    vector: np.ndarray = field(repr=False)
    space: CompositeSpace
    n_quanta: int


@dataclass(frozen=True)
class LadderCoefficients:
    """Quadruplet coefficient set for one rung index n (quanta = n + 1).

    Primed values are unnormalized; the norm is norm_sq = lam_p**2 +
    zeta1_p**2 + zeta2_p**2 + 1 by construction.  The two members of each
    field hold the xi-sign branches (+, -).
    """

    n: int
    xi: float
    lam_p: tuple[float, float]
    zeta1_p: tuple[float, float]
    zeta2_p: tuple[float, float]
    norm_sq: tuple[float, float]

    @property
    def lam(self) -> tuple[float, float]:
        return tuple(l / np.sqrt(nn) for l, nn in zip(self.lam_p, self.norm_sq))

    @property
    def zeta1(self) -> tuple[float, float]:
        return tuple(z / np.sqrt(nn) for z, nn in zip(self.zeta1_p, self.norm_sq))

    @property
    def zeta2(self) -> tuple[float, float]:
        return tuple(z / np.sqrt(nn) for z, nn in zip(self.zeta2_p, self.norm_sq))


def _embed(space: CompositeSpace, amplitudes: dict[int, complex]) -> np.ndarray:
    v = np.zeros(space.dim, dtype=complex)
    for idx, amp in amplitudes.items():
        v[idx] = amp
    return v


# ---------------------------------------------------------------------------
# one atom: couplet ladder


def jc_ladder(g: float, n: int,
              space: CompositeSpace | None = None) -> tuple[DressedState, DressedState]:
    """Couplet pair |n>_- , |n>_+ of the one-atom ladder, eigenvalues -+sqrt(n) g.

    |n>_eps = (i/sqrt2)(|n-1>|e> + eps i |n>|g>).
    """
    if g < 0:
        raise ValueError("coupling must be >= 0")
    if n < 1:
        raise ValueError("couplet index must be >= 1")
    if space is None:
        space = CompositeSpace(n, 1)
    if space.atom_count != 1 or space.fock_cutoff < n:
        raise ValueError("space cannot hold the requested couplet")
    idx_ng = 2 * n          # |n, g>
    idx_me = 2 * (n - 1) + 1  # |n-1, e>
    states = []
    for eps in (-1, +1):
        amp = {idx_me: 1j / np.sqrt(2), idx_ng: eps * 1j * 1j / np.sqrt(2)}
        states.append(DressedState(
            label=f"{n}{'+' if eps > 0 else '-'}",
            eigenvalue=eps * np.sqrt(n) * g,
            vector=_embed(space, amp),
            space=space,
            n_quanta=n,
        ))
    return states[0], states[1]


# ---------------------------------------------------------------------------
# two atoms: one-quantum triplet


def triplet(g1: float, g2: float,
            space: CompositeSpace | None = None) -> tuple[DressedState, DressedState, DressedState]:
    """One-quantum triplet |1>_-, |1>_0, |1>_+ with eigenvalues (-gt, 0, +gt).

    gt = sqrt(g1^2 + g2^2); |1>_0 carries no photonic amplitude and the
    |1>_+- photonic amplitude is -+ i/sqrt2.
    """
    gt = np.hypot(g1, g2)
    if gt == 0.0:
        raise DegenerateCouplingError(
            "g1 = g2 = 0 leaves the triplet fully degenerate with no preferred basis"
        )
    if space is None:
        space = CompositeSpace(1, 2)
    if space.atom_count != 2 or space.fock_cutoff < 1:
        raise ValueError("space cannot hold the two-atom triplet")
    idx_1gg = 1 * 4          # |1, g, g>
    idx_0eg = 2               # |0, e, g>
    idx_0ge = 1               # |0, g, e>
    dark = DressedState(
        label="10",
        eigenvalue=0.0,
        vector=_embed(space, {idx_0eg: g2 / gt, idx_0ge: -g1 / gt}),
        space=space,
        n_quanta=1,
    )
    out = []
    for eps in (-1, +1):
        amp = {
            idx_1gg: -eps * 1j / np.sqrt(2),
            idx_0eg: -g1 / (np.sqrt(2) * gt),
            idx_0ge: -g2 / (np.sqrt(2) * gt),
        }
        out.append(DressedState(
            label=f"1{'+' if eps > 0 else '-'}",
            eigenvalue=eps * gt,
            vector=_embed(space, amp),
            space=space,
            n_quanta=1,
        ))
    return out[0], dark, out[1]


# ---------------------------------------------------------------------------
# two atoms: quadruplet rungs


def quadruplet_xi(n: int, g1: float, g2: float) -> float:
    """Discriminant Xi^(n); real and >= 0 for all couplings.

    (2n+1)^2 (g1^2+g2^2)^2 >= 4n(n+1)(g1^2-g2^2)^2 because
    (2n+1)^2 > 4n(n+1) and |g1^2-g2^2| <= g1^2+g2^2.
    """
    gs = g1 * g1 + g2 * g2
    gd = g1 * g1 - g2 * g2
    val = (2 * n + 1) ** 2 * gs * gs - 4 * n * (n + 1) * gd * gd
    return float(np.sqrt(max(val, 0.0)))


def quadruplet_eigenvalues(n: int, g1: float, g2: float) -> dict[str, float]:
    """Eigenvalue shifts of rung n keyed by branch label (quanta = n + 1).

    lambda(eps, eps') = eps * sqrt(((2n+1)(g1^2+g2^2) + eps' Xi)/2).
    """
    gs = g1 * g1 + g2 * g2
    xi = quadruplet_xi(n, g1, g2)
    out = {}
    for eps in (-1, +1):
        for epsp in (-1, +1):
            lam = eps * np.sqrt(max(((2 * n + 1) * gs + epsp * xi) / 2.0, 0.0))
            key = f"{'+' if eps > 0 else '-'}{'+' if epsp > 0 else '-'}"
            out[key] = float(lam)
    return out


def quadruplet_coefficients(n: int, g1: float, g2: float) -> LadderCoefficients:
    """Unnormalized quadruplet coefficients for both Xi-sign branches.

    Requires both couplings non-degenerate; the limit forms live in
    :func:`quadruplet`.
    """
    if n < 1:
        raise ValueError("rung index must be >= 1")
    gs = g1 * g1 + g2 * g2
    gt = np.sqrt(gs)
    if min(g1, g2) <= EPS_DEGENERATE * gt or abs(g1 - g2) <= EPS_DEGENERATE * gt:
        raise DegenerateCouplingError(
            "coefficient formulas are singular for (near-)degenerate couplings; "
            "use quadruplet(), which switches to the analytic limit forms"
        )
    xi = quadruplet_xi(n, g1, g2)
    lam_p, z1_p, z2_p, norms = [], [], [], []
    for epsp in (+1, -1):
        lam = -(gs + epsp * xi) / (4.0 * g1 * g2 * np.sqrt(n * (n + 1)))
        root = np.sqrt(2.0 * n * ((2 * n + 1) * gs + epsp * xi))
        z1 = -(g2 * g2 + g1 * g1 * (1 + 4 * n) + epsp * xi) / (2.0 * g1 * root)
        z2 = -(g1 * g1 + g2 * g2 * (1 + 4 * n) + epsp * xi) / (2.0 * g2 * root)
        lam_p.append(lam)
        z1_p.append(z1)
        z2_p.append(z2)
        norms.append(lam * lam + z1 * z1 + z2 * z2 + 1.0)
    return LadderCoefficients(
        n=n, xi=xi,
        lam_p=tuple(lam_p), zeta1_p=tuple(z1_p), zeta2_p=tuple(z2_p),
        norm_sq=tuple(norms),
    )


def _quad_indices(space: CompositeSpace, n: int) -> tuple[int, int, int, int]:
    # basis order: |n+1,gg>, |n,ge>, |n,eg>, |n-1,ee>
    return (4 * (n + 1), 4 * n + 1, 4 * n + 2, 4 * (n - 1) + 3)


def quadruplet(n: int, g1: float, g2: float,
               space: CompositeSpace | None = None) -> tuple[DressedState, ...]:
    """Four dressed states of rung n (n + 1 quanta), eigenvalues symmetric about 0.

    Labels are "(n+1)ee'" with e the overall sign of the eigenvalue and e' the
    Xi sign under the square root.  Near-degenerate couplings switch to the
    analytic limit forms: one-atom ladder times a spectator atom when one
    coupling vanishes, and the equal-coupling forms (with a deterministic
    basis for the central degenerate pair) when g1 = g2.
    """
    if n < 1:
        raise ValueError("rung index must be >= 1")
    gt = np.hypot(g1, g2)
    if gt == 0.0:
        raise DegenerateCouplingError("g1 = g2 = 0: quadruplet fully degenerate")
    if space is None:
        space = CompositeSpace(n + 1, 2)
    if space.atom_count != 2 or space.fock_cutoff < n + 1:
        raise ValueError("space cannot hold the requested quadruplet")
    i1, i2, i3, i4 = _quad_indices(space, n)
    q = n + 1
    lam = quadruplet_eigenvalues(n, g1, g2)

    if min(g1, g2) <= EPS_DEGENERATE * gt:
        return _quadruplet_spectator(n, g1, g2, space, lam)
    if abs(g1 - g2) <= EPS_DEGENERATE * gt:
        return _quadruplet_equal(n, 0.5 * (g1 + g2), space, lam)

    co = quadruplet_coefficients(n, g1, g2)
    states = []
    for bi, epsp in ((0, +1), (1, -1)):
        nrm = np.sqrt(co.norm_sq[bi])
        for eps in (-1, +1):
            amp = {
                i1: co.lam_p[bi] / nrm,
                i2: -eps * 1j * co.zeta1_p[bi] / nrm,
                i3: -eps * 1j * co.zeta2_p[bi] / nrm,
                i4: 1.0 / nrm,
            }
            key = f"{'+' if eps > 0 else '-'}{'+' if epsp > 0 else '-'}"
            states.append(DressedState(
                label=f"{q}{key}", eigenvalue=lam[key],
                vector=_embed(space, amp), space=space, n_quanta=q,
            ))
    return _sorted_quad(states)


def _quadruplet_spectator(n, g1, g2, space, lam) -> tuple[DressedState, ...]:
    # one coupling ~ 0: JC ladder of the coupled atom, the other atom a spectator
    i1, i2, i3, i4 = _quad_indices(space, n)
    q = n + 1
    states = []
    if g2 <= g1:
        up, down = i3, i2  # coupled atom is atom 1
    else:
        up, down = i2, i3
    for eps in (-1, +1):
        # eps' = +: (n+1)-couplet of the coupled atom, spectator in |g>
        amp = {i1: -eps / np.sqrt(2), up: 1j / np.sqrt(2)}
        key = f"{'+' if eps > 0 else '-'}+"
        states.append(DressedState(f"{q}{key}", lam[key], _embed(space, amp), space, q))
        # eps' = -: n-couplet of the coupled atom, spectator excited
        amp = {down: -eps / np.sqrt(2), i4: 1j / np.sqrt(2)}
        key = f"{'+' if eps > 0 else '-'}-"
        states.append(DressedState(f"{q}{key}", lam[key], _embed(space, amp), space, q))
    return _sorted_quad(states)


def _quadruplet_equal(n, g, space, lam) -> tuple[DressedState, ...]:
    # Tavis-Cummings point: outer pair from the regular xi = + branch, central
    # degenerate pair fixed to a deterministic basis
    i1, i2, i3, i4 = _quad_indices(space, n)
    q = n + 1
    lam_p = -np.sqrt((n + 1) / n)
    z = -np.sqrt((2 * n + 1) / (2 * n))
    nrm = np.sqrt(lam_p * lam_p + 2 * z * z + 1.0)
    states = []
    for eps in (-1, +1):
        amp = {i1: lam_p / nrm, i2: -eps * 1j * z / nrm,
               i3: -eps * 1j * z / nrm, i4: 1.0 / nrm}
        key = f"{'+' if eps > 0 else '-'}+"
        states.append(DressedState(f"{q}{key}", lam[key], _embed(space, amp), space, q))
    w = np.sqrt(2 * n + 1.0)
    states.append(DressedState(
        f"{q}+-", lam["+-"],
        _embed(space, {i1: np.sqrt(n) / w, i4: np.sqrt(n + 1.0) / w}), space, q))
    states.append(DressedState(
        f"{q}--", lam["--"],
        _embed(space, {i2: 1 / np.sqrt(2), i3: -1 / np.sqrt(2)}), space, q))
    return _sorted_quad(states)


def _sorted_quad(states) -> tuple[DressedState, ...]:
    order = {"-+": 0, "--": 1, "+-": 2, "++": 3}
    return tuple(sorted(states, key=lambda s: order[s.label[-2:]]))


# ---------------------------------------------------------------------------
# numeric oracle


def numeric_eigensystem(h: Operator, herm_tol: float = 1e-10) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of a Hermitian operator, sorted ascending.

    Used to validate every analytic formula above and as the fallback in
    degenerate corners.
    """
    if not h.is_hermitian(herm_tol):
        raise ValueError("numeric_eigensystem requires a Hermitian operator")
    w, v = np.linalg.eigh(0.5 * (h.mat + h.mat.conj().T))
    return [(float(w[i]), v[:, i].copy()) for i in range(len(w))]


def fix_phase(v: np.ndarray, tie_tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the largest-modulus entry is real positive.

    Ties within ``tie_tol`` resolve to the lowest basis index, which keeps
    dressed-basis matrix elements reproducible across runs and platforms.
    """
    mags = np.abs(v)
    top = float(np.max(mags))
    if top == 0.0:
        return v
    idx = int(np.flatnonzero(mags >= top - tie_tol)[0])
    phase = v[idx] / abs(v[idx])
    return v / phase


def manifold_indices(space: CompositeSpace, quanta: int) -> np.ndarray:
    """Basis indices with total excitation equal to ``quanta``."""
    diag = np.real(np.diag(excitation_number(space).mat))
    return np.flatnonzero(np.abs(diag - quanta) < 1e-9)


# ---------------------------------------------------------------------------
# labeled eigenbasis of the full truncated space


@dataclass(frozen=True)
class DressedBasis:
    """Phase-fixed eigenbasis of the undriven Hamiltonian, labeled per rung.

    ``transform`` holds the eigenvectors as columns, ordered by excitation
    number and then ascending eigenvalue; truncation-edge manifolds that have
    no analytic counterpart get positional labels like "edge5.0".
    """

    space: CompositeSpace
    labels: tuple[str, ...]
    eigenvalues: np.ndarray = field(repr=False)
    transform: np.ndarray = field(repr=False)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no dressed state labeled {label!r}; "
                           f"known labels: {', '.join(self.labels)}") from None


def _analytic_level_values(couplings: tuple[float, ...], quanta: int,
                           dim: int) -> list[float] | None:
    """Expected eigenvalue shifts for a full manifold, ascending; None at edges."""
    if quanta == 0:
        return [0.0]
    if len(couplings) == 1:
        if dim != 2:
            return None
        g = couplings[0]
        return [-np.sqrt(quanta) * g, np.sqrt(quanta) * g]
    if len(couplings) == 2:
        g1, g2 = couplings
        if quanta == 1 and dim == 3:
            gt = np.hypot(g1, g2)
            return [-gt, 0.0, gt]
        if quanta >= 2 and dim == 4:
            lam = quadruplet_eigenvalues(quanta - 1, g1, g2)
            return [lam["-+"], lam["--"], lam["+-"], lam["++"]]
    return None


def _level_labels(atom_count: int, quanta: int, dim: int) -> list[str] | None:
    if quanta == 0:
        return ["0"]
    if atom_count == 1 and dim == 2:
        return [f"{quanta}-", f"{quanta}+"]
    if atom_count == 2:
        if quanta == 1 and dim == 3:
            return ["1-", "10", "1+"]
        if quanta >= 2 and dim == 4:
            return [f"{quanta}-+", f"{quanta}--", f"{quanta}+-", f"{quanta}++"]
    return None


def dressed_basis(couplings: tuple[float, ...], space: CompositeSpace,
                  h_mat: np.ndarray | None = None,
                  match_tol: float = 1e-6) -> DressedBasis:
    """Diagonalize the undriven Hamiltonian per excitation manifold and label it.

    Numeric eigenvectors (phase fixed) are used throughout so the basis is
    orthonormal by construction; eigenvalues are cross-checked against the
    closed forms and a mismatch beyond ``match_tol`` (times the coupling
    scale) keeps the numeric ordering and emits a diagnostic.
    """
    from .hamiltonian import SystemConfig, build_h  # local to avoid cycle

    if h_mat is None:
        cfg = SystemConfig(couplings=couplings, n_max=space.fock_cutoff)
        h_mat = build_h(cfg).mat
    scale = max(1.0, *couplings) if couplings else 1.0
    cols, labels, vals = [], [], []
    max_q = space.fock_cutoff + space.atom_count
    for q in range(max_q + 1):
        idx = manifold_indices(space, q)
        if idx.size == 0:
            continue
        block = h_mat[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(0.5 * (block + block.conj().T))
        expected = _analytic_level_values(couplings, q, idx.size)
        level_labels = _level_labels(space.atom_count, q, idx.size)
        if expected is not None and level_labels is not None:
            dev = float(np.max(np.abs(np.asarray(expected) - w)))
            if dev > match_tol * scale:
                warnings.warn(
                    f"analytic/numeric eigenvalue mismatch {dev:.3e} in the "
                    f"{q}-quanta manifold at couplings {couplings}; keeping "
                    "numeric ordering", RuntimeWarning)
        if level_labels is None:
            level_labels = [f"edge{q}.{i}" for i in range(idx.size)]
        for i in range(idx.size):
            full = np.zeros(space.dim, dtype=complex)
            full[idx] = v[:, i]
            cols.append(fix_phase(full))
            labels.append(level_labels[i])
            vals.append(float(w[i]))
    u = np.column_stack(cols)
    return DressedBasis(space=space, labels=tuple(labels),
                        eigenvalues=np.asarray(vals), transform=u)


# ---------------------------------------------------------------------------
# pathway resonance bookkeeping


@dataclass(frozen=True)
class ResonancePrediction:
    """Normalized detuning at which a two-photon pathway is resonant.

    ``enforcement_residual`` measures how far the non-scanned leg is from its
    required frequency at these couplings (zero on the resonance manifold);
    ``cavity_decoupled`` marks the photonless |1>_0 intermediate.
    """

    delta_tilde: float
    ordering: str
    intermediate: str
    final: str
    enforcement_residual: float
    cavity_decoupled: bool


def _label_eigenvalue(label: str, g1: float, g2: float) -> float:
    gt = np.hypot(g1, g2)
    if label == "0":
        return 0.0
    if label in ("1-", "10", "1+"):
        return {"1-": -gt, "10": 0.0, "1+": gt}[label]
    if len(label) >= 3 and label[:-2].isdigit() and label[-2] in "+-" and label[-1] in "+-":
        q = int(label[:-2])
        if q < 2:
            raise ValueError(f"quadruplet label {label!r} needs >= 2 quanta")
        return quadruplet_eigenvalues(q - 1, g1, g2)[label[-2:]]
    raise ValueError(f"unknown dressed-state label {label!r}")


def resonance_detuning(intermediate: str, final: str, g1: float, g2: float,
                       g_f: float, ordering: str = "omega1_first") -> ResonancePrediction:
    """Normalized detuning of the |0> -> intermediate -> final pathway.

    omega1_first: the fixed field drives the first leg, so the intermediate
    shift must equal -g_f and the scan supplies
    delta_tilde = (lam_final - lam_inter)/g_f.  omega2_first: the scan drives
    the first leg (delta_tilde = lam_inter/g_f) and the fixed field must
    supply lam_final - lam_inter = -g_f.
    """
    if g_f == 0:
        raise ValueError("g_f must be nonzero")
    lam_i = _label_eigenvalue(intermediate, g1, g2)
    lam_f = _label_eigenvalue(final, g1, g2)
    gt = np.hypot(g1, g2)
    if intermediate == "10" and abs(g1 - g2) <= 1e-12 * max(gt, 1.0):
        raise DarkPathwayError(
            "|1>_0 is dark to the symmetric atomic drive at g1 = g2: "
            "<0|Upsilon|1_0> vanishes, the pathway cannot be pumped")
    if ordering == "omega1_first":
        dt = (lam_f - lam_i) / g_f
        residual = lam_i - (-g_f)
    elif ordering == "omega2_first":
        dt = lam_i / g_f
        residual = (lam_f - lam_i) - (-g_f)
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    return ResonancePrediction(
        delta_tilde=float(dt), ordering=ordering, intermediate=intermediate,
        final=final, enforcement_residual=float(residual),
        cavity_decoupled=(intermediate == "10"),
    )

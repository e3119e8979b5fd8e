"""Dissipative superoperator under bichromatic driving and its long-time solution.

Density matrices are vectorized by column stacking: vec(rho)[i + d*j] =
rho[i, j], so vec(A rho B) = kron(B.T, A) vec(rho).  In the frame rotating at
omega_1 the scanning field enters with explicit exp(-+ i delta t) factors
(delta = omega_2 - omega_1), which a Fourier (Bloch) expansion
rho(t) = sum_k rho_k exp(-i k delta t) turns into a block-tridiagonal linear
system for the harmonics:

    (L0 + i k delta) rho_k + L_plus rho_{k-1} + L_minus rho_{k+1} = 0.

The solver eliminates the harmonic chains blockwise (partial-pivoted LU per
block, a Schur form of L0 for the outermost block) and exploits
rho_{-k} = rho_k^dag so only the negative chain is ever factored.  Every
solution is residual-checked against the hierarchy; failures fall back to one
dense solve of the full stacked system.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .fock import CompositeSpace, density_checks, total_sigma
from .hamiltonian import SystemConfig, build_drive, build_h_eff

RESIDUAL_TOL = 1e-9


class SteadyStateError(RuntimeError):
    """Linear system for the Bloch harmonics is singular or inconsistent."""


class StepSizeInstabilityError(RuntimeError):
    """Fixed-step integration drifted; the step size is too large."""


@dataclass(frozen=True)
class Superoperator:
    """d^2 x d^2 matrix acting on column-stacked density matrices."""

    space: CompositeSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        d2 = self.space.dim**2
        if self.matrix.shape != (d2, d2):
            raise ValueError(f"superoperator shape {self.matrix.shape} != ({d2}, {d2})")


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape((d, d), order="F")


def spre(a: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    return np.kron(b.T, np.eye(b.shape[0]))


def sandwich(c: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> C rho C^dag."""
    return np.kron(c.conj(), c)


def trace_row(d: int) -> np.ndarray:
    t = np.zeros(d * d, dtype=complex)
    t[np.arange(d) * (d + 1)] = 1.0
    return t


def dagger_permutation(d: int) -> np.ndarray:
    """Index permutation p with vec(X^dag) = conj(vec(X))[p]."""
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    # vec index of (i, j) is i + d*j; its dagger partner sits at (j, i)
    return (j + d * i).flatten(order="F")


def mirror_superoperator(s: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """P conj(S) P for the dagger permutation P; maps the -k chain to +k."""
    return np.conj(s[np.ix_(perm, perm)])


def assemble_blocks(config: SystemConfig,
                    phases: tuple[float, ...] | None = None,
                    fixed_drive: np.ndarray | None = None,
                    scan_plus: np.ndarray | None = None,
                    scan_minus: np.ndarray | None = None,
                    ) -> tuple[Superoperator, Superoperator, Superoperator]:
    """Static block L0 and the scanning-drive blocks L_plus, L_minus.

    L0 holds the effective-Hamiltonian commutator (fixed drive included) plus
    the jump term; L_plus/L_minus are the exp(-i delta t)/exp(+i delta t)
    components of -i[Upsilon(E2 e^{-i delta t}), rho].  The optional operator
    overrides exist for the suppressed-transition pipeline and default to the
    unmodified drive operators.
    """
    space = config.space
    d = space.dim

    h_eff = build_h_eff(replace(config, e1=0.0), phases=phases).mat
    if fixed_drive is None:
        fixed_drive = build_drive(space, config.e1).mat
    h_eff = h_eff + fixed_drive

    l0 = -1j * (spre(h_eff) - spost(h_eff.conj().T))
    from .fock import annihilation, atom_sigma  # local import keeps deps one-way

    a = annihilation(space).mat
    l0 += 2.0 * sandwich(a)  # kappa = 1
    for m in range(1, config.atom_count + 1):
        sm = atom_sigma(space, m, "minus").mat
        l0 += config.gamma * sandwich(sm)

    sp = total_sigma(space, "plus").mat if scan_plus is None else scan_plus
    sm_tot = total_sigma(space, "minus").mat if scan_minus is None else scan_minus
    lp = config.e2 * (spre(sp) - spost(sp))
    lm = -config.e2 * (spre(sm_tot) - spost(sm_tot))
    return (Superoperator(space, l0), Superoperator(space, lp),
            Superoperator(space, lm))


@dataclass(frozen=True)
class BlochSolution:
    """Harmonic components rho_k (k = -K..K) of the long-time density matrix."""

    k_order: int
    delta: float
    components: dict[int, np.ndarray] = field(repr=False)
    space: CompositeSpace
    diagnostics: dict = field(default_factory=dict)
    degenerate_monochromatic: bool = False

    @property
    def rho0(self) -> np.ndarray:
        return self.components[0]


class SteadyStateSolver:
    """Factorisation cache for repeated steady-state solves at one parameter set.

    Assembling the blocks and Schur-decomposing L0 once per coupling node
    amortizes across a detuning sweep; ``solve`` then costs a handful of
    dense block operations per detuning.
    """

    def __init__(self, blocks: tuple[Superoperator, Superoperator, Superoperator],
                 k_order: int = 2):
        if k_order < 0:
            raise ValueError("k_order must be >= 0")
        self.space = blocks[0].space
        self.d = self.space.dim
        self.k_order = k_order
        self.l0 = blocks[0].matrix
        self.lp = blocks[1].matrix
        self.lm = blocks[2].matrix
        self._perm = dagger_permutation(self.d)
        self._trace = trace_row(self.d)
        self._eye = np.eye(self.d * self.d)
        self._schur = None
        self._drive_on = bool(np.any(self.lp) or np.any(self.lm))

    def _wing_schur(self):
        # complex Schur form of L0; reused for every (K, delta) wing solve
        if self._schur is None:
            t, q = sla.schur(self.l0, output="complex")
            self._schur = (t, q, q.conj().T @ self.lm, self.lp @ q)
        return self._schur

    def _chain(self, delta: float):
        """Eliminate the negative chain; returns (correction, lu factors list)."""
        k = self.k_order
        t, q, qt_lm, lp_q = self._wing_schur()
        # wing block B_{-K} = L0 - iK delta = Q (T - iK delta) Q^dag
        y = sla.solve_triangular(
            t - 1j * k * delta * np.eye(t.shape[0]), qt_lm, check_finite=False)
        c = lp_q @ y  # L_plus B_{-K}^{-1} L_minus
        lus = []
        for kk in range(k - 1, 0, -1):
            b = self.l0 - 1j * kk * delta * self._eye - c
            lu = sla.lu_factor(b, check_finite=False)
            lus.append(lu)
            c = self.lp @ sla.lu_solve(lu, self.lm, check_finite=False)
        return c, lus

    def solve(self, delta: float, residual_tol: float = RESIDUAL_TOL,
              delta_tol: float | None = None) -> BlochSolution:
        """Solve the truncated hierarchy at frequency difference ``delta``.

        At |delta| below ``delta_tol`` the two drive tones coincide and the
        harmonic expansion is ill-defined; the solver then returns the
        monochromatic steady state of the combined static drive.
        """
        d = self.d
        if delta_tol is None:
            delta_tol = 1e-9 * max(1.0, float(np.max(np.abs(np.diag(self.l0)))))
        if self.k_order == 0 or not self._drive_on:
            rho0 = self._null_solve(self.l0)
            comps = {0: rho0}
            for kk in range(1, self.k_order + 1):
                comps[kk] = np.zeros((d, d), dtype=complex)
                comps[-kk] = np.zeros((d, d), dtype=complex)
            return self._package(comps, delta, degenerate=False)
        if abs(delta) < delta_tol:
            # the tones coincide: the DC component is the monochromatic
            # steady state averaged over the (drifting) relative drive phase
            rho0 = np.zeros((d, d), dtype=complex)
            n_phase = 16
            for j in range(n_phase):
                phase = np.exp(2j * np.pi * j / n_phase)
                rho0 += self._null_solve(self.l0 + phase * self.lp
                                         + np.conj(phase) * self.lm)
            rho0 /= n_phase
            comps = {0: rho0}
            for kk in range(1, self.k_order + 1):
                comps[kk] = np.zeros((d, d), dtype=complex)
                comps[-kk] = np.zeros((d, d), dtype=complex)
            return self._package(comps, delta, degenerate=True)

        try:
            sol = self._solve_chain(delta)
            if sol.diagnostics["residual"] <= residual_tol:
                return sol
        except (np.linalg.LinAlgError, ValueError):
            pass
        sol = self._solve_dense(delta)
        if sol.diagnostics["residual"] > residual_tol:
            raise SteadyStateError(
                f"hierarchy residual {sol.diagnostics['residual']:.3e} exceeds "
                f"{residual_tol:.1e} at delta = {delta}; the truncation order "
                f"K = {self.k_order} is inconsistent for these parameters")
        return sol

    def _solve_chain(self, delta: float) -> BlochSolution:
        d = self.d
        c_minus, lus = self._chain(delta)
        c_plus = mirror_superoperator(c_minus, self._perm)
        m = self.l0 - c_minus - c_plus
        m[0, :] = self._trace
        b = np.zeros(d * d, dtype=complex)
        b[0] = 1.0
        x0 = sla.lu_solve(sla.lu_factor(m, check_finite=False), b, check_finite=False)
        comps = {0: unvec(x0, d)}
        # back-substitute the negative chain; positive harmonics by daggering
        v = x0
        for kk in range(1, self.k_order + 1):
            if kk == self.k_order:
                t, q, qt_lm, _ = self._wing_schur()
                y = sla.solve_triangular(
                    t - 1j * kk * delta * np.eye(t.shape[0]), qt_lm @ v,
                    check_finite=False)
                v = -(q @ y)
            else:
                lu = lus[self.k_order - 1 - kk]
                v = -sla.lu_solve(lu, self.lm @ v, check_finite=False)
            comps[-kk] = unvec(v, d)
            comps[kk] = comps[-kk].conj().T
        return self._package(comps, delta, degenerate=False)

    def _solve_dense(self, delta: float) -> BlochSolution:
        """Reference path: one dense partial-pivoted solve of the stacked system."""
        d = self.d
        d2 = d * d
        k = self.k_order
        nblk = 2 * k + 1
        big = np.zeros((nblk * d2, nblk * d2), dtype=complex)
        for row, kk in enumerate(range(-k, k + 1)):
            sl = slice(row * d2, (row + 1) * d2)
            big[sl, sl] = self.l0 + 1j * kk * delta * self._eye
            if row > 0:
                big[sl, (row - 1) * d2:row * d2] = self.lp
            if row < nblk - 1:
                big[sl, (row + 1) * d2:(row + 2) * d2] = self.lm
        rhs = np.zeros(nblk * d2, dtype=complex)
        row0 = k * d2  # vacuum-population equation of the k = 0 block
        big[row0, :] = 0.0
        big[row0, k * d2:(k + 1) * d2] = self._trace
        rhs[row0] = 1.0
        x = sla.solve(big, rhs)
        comps = {kk: unvec(x[(kk + k) * d2:(kk + k + 1) * d2], d)
                 for kk in range(-k, k + 1)}
        return self._package(comps, delta, degenerate=False)

    def _null_solve(self, l_static: np.ndarray) -> np.ndarray:
        d = self.d
        m = l_static.copy()
        m[0, :] = self._trace
        b = np.zeros(d * d, dtype=complex)
        b[0] = 1.0
        try:
            x = sla.solve(m, b)
        except np.linalg.LinAlgError as exc:
            raise SteadyStateError("static Liouvillian has no unique steady "
                                   "state (singular after trace row)") from exc
        return unvec(x, d)

    def hierarchy_residual(self, comps: dict[int, np.ndarray], delta: float) -> float:
        """Max Frobenius norm of the harmonic equations over retained k."""
        d = self.d
        worst = 0.0
        k = self.k_order
        for kk in range(-k, k + 1):
            v = vec(comps[kk])
            r = self.l0 @ v + 1j * kk * delta * v
            if kk - 1 >= -k:
                r = r + self.lp @ vec(comps[kk - 1])
            if kk + 1 <= k:
                r = r + self.lm @ vec(comps[kk + 1])
            if kk == 0:
                # the vacuum-population equation was traded for normalization
                r[0] = 0.0
            worst = max(worst, float(np.linalg.norm(r)))
        return worst

    def _package(self, comps: dict[int, np.ndarray], delta: float,
                 degenerate: bool) -> BlochSolution:
        rho0 = comps[0]
        checks = density_checks(rho0)
        diag = {
            "trace_dev": checks["trace_dev"],
            "herm_dev": checks["herm_dev"],
            "min_eig": checks["min_eig"],
            "residual": 0.0 if degenerate else self.hierarchy_residual(comps, delta),
            "k_traces": {k: abs(np.trace(c)) for k, c in comps.items() if k != 0},
        }
        return BlochSolution(k_order=self.k_order, delta=delta, components=comps,
                             space=self.space, diagnostics=diag,
                             degenerate_monochromatic=degenerate)


def steady_state(config: SystemConfig, delta: float, k_order: int = 2,
                 phases: tuple[float, ...] | None = None) -> BlochSolution:
    """One-shot steady state; build a :class:`SteadyStateSolver` for sweeps."""
    solver = SteadyStateSolver(assemble_blocks(config, phases=phases), k_order)
    return solver.solve(delta)


# ---------------------------------------------------------------------------
# brute-force oracle: fixed-step integration of the time-dependent master equation


def _stability_rate(config: SystemConfig) -> float:
    h = build_h_eff(config).mat
    # spectral radius of the commutator superoperator is at most twice this
    return 2.0 * float(np.linalg.norm(h, 2)) + 2.0 + config.atom_count * config.gamma


def time_propagate_oracle(config: SystemConfig, delta: float,
                          t_final: float = 30.0, dt: float | None = None,
                          blocks: tuple[Superoperator, ...] | None = None,
                          converge_tol: float = 1e-11) -> tuple[np.ndarray, dict]:
    """Period-averaged density matrix from direct RK4 time integration.

    Classical fixed-step fourth-order integration of
    rho' = L0 rho + e^{-i delta t} L_plus rho + e^{+i delta t} L_minus rho,
    run well past the transient (at least ``t_final`` unless the one-period
    map converges earlier) and averaged over the final drive period.  Serves
    as an oracle for the Bloch-hierarchy solver and shares nothing with it
    beyond the block assembly.
    """
    if blocks is None:
        blocks = assemble_blocks(config)
    l0, lp, lm = (b.matrix for b in blocks)
    d = blocks[0].space.dim

    period = 2 * np.pi / abs(delta) if delta != 0 else 1.0
    if dt is None:
        dt = min(0.002 / max(1.0, config.gamma), period / 50.0,
                 1.0 / _stability_rate(config))
    m = max(int(np.ceil(period / dt)), 4)
    dt = period / m

    def gen(t):
        return l0 + np.exp(-1j * delta * t) * lp + np.exp(1j * delta * t) * lm

    # RK4 map over one period, built by propagating the identity
    phi = np.eye(d * d, dtype=complex)
    for j in range(m):
        t0 = j * dt
        k1 = gen(t0) @ phi
        k2 = gen(t0 + 0.5 * dt) @ (phi + 0.5 * dt * k1)
        k3 = gen(t0 + 0.5 * dt) @ (phi + 0.5 * dt * k2)
        k4 = gen(t0 + dt) @ (phi + dt * k3)
        phi = phi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0  # vacuum start; any trace-one state reaches the same attractor
    v = vec(rho)
    n_periods = max(int(np.ceil(t_final / period)), 2)
    used = 0
    for j in range(n_periods):
        v_new = phi @ v
        used += 1
        drift = abs(np.sum(v_new[np.arange(d) * (d + 1)]) - 1.0)
        if drift > 1e-6:
            raise StepSizeInstabilityError(
                f"trace drifted by {drift:.2e} after {used} periods; decrease dt")
        if float(np.linalg.norm(v_new - v)) < converge_tol and used * period > 5.0:
            v = v_new
            break
        v = v_new

    # average over one final period on the same RK4 grid (rectangle rule is
    # spectrally accurate for periodic integrands)
    acc = np.zeros_like(v)
    cur = v
    for j in range(m):
        acc += cur
        t0 = j * dt
        k1 = gen(t0) @ cur
        k2 = gen(t0 + 0.5 * dt) @ (cur + 0.5 * dt * k1)
        k3 = gen(t0 + 0.5 * dt) @ (cur + 0.5 * dt * k2)
        k4 = gen(t0 + dt) @ (cur + dt * k3)
        cur = cur + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    avg = unvec(acc / m, d)
    info = {"dt": dt, "steps_per_period": m, "periods": used,
            "final_drift": float(abs(np.trace(avg) - 1.0))}
    return avg, info

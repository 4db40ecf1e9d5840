"""Matrix-free Lindblad evolution and observables."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .model import (DensityMatrix, E, FockSpace, G, ModelTier, Tier)
from .numkit import ContractError, hermitian_eig, integrate_adaptive
from .params import IonParams

DEFAULT_SAMPLES = 400
DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-10
AUDIT_FAIL = -1e-5


class PositivityWarning(UserWarning):
    pass


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


class Liouvillian:
    """Right-hand side ``-i[H, rho] + sum_j (L rho L^+ - 1/2 {L^+ L, rho})``.

    Never forms the d^2 x d^2 superoperator.  ``drop_diagonal=True`` removes
    ``diag(H)`` from the Hamiltonian, which is the generator seen in the frame
    rotating with that diagonal part.
    """

    def __init__(self, tier: ModelTier, drop_diagonal: bool = False):
        h = np.array(tier.hamiltonian, dtype=complex)
        if drop_diagonal:
            h = h - np.diag(np.diag(h))
        self.dim = h.shape[0]
        self.cutoff = self.dim // 2
        js = tier.jump_set
        self.recoil = js.recoil
        self.h_eff = h - 0.5j * js.decay_sum()
        if self.recoil is None:
            self.jumps = np.stack(js.jumps)
            self.jumps_h = np.conj(np.swapaxes(self.jumps, 1, 2))

    def _add_gain(self, out, rho):
        if self.recoil is not None:
            n = self.cutoff
            out[G * n:(G + 1) * n, G * n:(G + 1) * n] += self.recoil.gain(
                rho[E * n:(E + 1) * n, E * n:(E + 1) * n])
        else:
            out += np.sum(self.jumps @ rho @ self.jumps_h, axis=0)
        return out

    def __call__(self, rho, hermitian: bool = False) -> np.ndarray:
        rho = _matrix(rho)
        if rho.shape != (self.dim, self.dim):
            raise ContractError(f"density matrix shape {rho.shape} does not match {self.dim}")
        k = self.h_eff @ rho
        if hermitian:
            # valid for Hermitian rho: rho H_eff^+ = (H_eff rho)^+
            out = k.T.copy()
            np.conjugate(out, out=out)
            out -= k
            out *= 1j
        else:
            out = -1j * k + 1j * (rho @ self.h_eff.conj().T)
        return self._add_gain(out, rho)


def lindblad_rhs(rho, tier: ModelTier) -> np.ndarray:
    return Liouvillian(tier)(rho)


# ---------------------------------------------------------------- observables

def mean_phonon(rho) -> float:
    m = _matrix(rho)
    n = m.shape[0] // 2
    d = np.diagonal(m)
    val = np.sum(np.tile(np.arange(n), 2) * d)
    if abs(val.imag) > 1e-10:
        raise ContractError(f"phonon expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def excited_population(rho) -> float:
    m = _matrix(rho)
    n = m.shape[0] // 2
    return float(np.sum(np.diagonal(m)[E * n:(E + 1) * n]).real)


def dressed_diagonal(rho, p: IonParams) -> np.ndarray:
    """Populations <s, n|rho|s, n> for s in (+, -); shape (2, cutoff)."""
    m = _matrix(rho)
    n = m.shape[0] // 2
    u = analytics.dressed_basis(p.delta, p.omega).unitary.real  # columns |+>, |->
    blocks = np.array([[np.diagonal(m[i * n:(i + 1) * n, j * n:(j + 1) * n])
                        for j in range(2)] for i in range(2)])
    return np.einsum("is,js,ijn->sn", u, u, blocks).real


def dressed_subspace_populations(rho, p: IonParams) -> np.ndarray:
    """p_0 = <-,0|rho|-,0>,  p_n = <+,n-1|rho|+,n-1> + <-,n|rho|-,n>."""
    if abs(p.delta - analytics.ssc_resonance_delta(p.nu, p.omega)) > 1e-9 * p.nu:
        raise ContractError("dressed subspaces are defined at the resonant detuning")
    diag = dressed_diagonal(rho, p)
    plus, minus = diag[0], diag[1]
    out = np.zeros(plus.size + 1)
    out[:-1] += minus
    out[1:] += plus
    return out


# ---------------------------------------------------------------- evolution

@dataclass
class CoolingTrajectory:
    times: np.ndarray
    nbar: np.ndarray
    p_excited: np.ndarray
    params: IonParams
    tier: Tier
    subspace_pops: np.ndarray | None = None
    trace: np.ndarray | None = None
    hermiticity_drift: float = 0.0
    min_eigenvalues: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None
    stats: dict = field(default_factory=dict)

    @property
    def max_trace_drift(self) -> float:
        return float(np.max(np.abs(self.trace - 1.0))) if self.trace is not None else 0.0

    @property
    def min_audit_eigenvalue(self) -> float:
        return min(self.min_eigenvalues.values()) if self.min_eigenvalues else 0.0


def evolve(rho0, tier: ModelTier, t_final: float, sample_count: int = DEFAULT_SAMPLES,
           rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = DEFAULT_ABS_TOL, *,
           frame: str | None = None, track_subspaces: bool | None = None,
           audit_points: int = 0, audit_seed: int = 0,
           max_initial_step: float = 0.1) -> CoolingTrajectory:
    """Integrate the master equation and sample observables on a uniform grid.

    ``frame="rotating"`` integrates in the frame rotating with ``diag(H)``, an
    exact change of variables that removes the fast free phases; samples are
    transformed back before any observable is taken.  The default is
    ``"rotating"`` for the EXACT and LAMB_DICKE tiers and ``"lab"`` for the
    static RWA_DRESSED generator.  ``audit_points`` random
    sample times get a full eigenvalue positivity check.
    """
    m0 = np.array(_matrix(rho0), dtype=complex)
    if m0.shape != tier.hamiltonian.shape:
        raise ContractError("initial state does not match the model dimension")
    if not t_final > 0:
        raise ContractError("t_final must be positive")
    if sample_count < 2:
        raise ContractError("need at least two samples")
    if frame is None:
        frame = "lab" if tier.tag is Tier.RWA_DRESSED else "rotating"
    if frame not in ("lab", "rotating"):
        raise ContractError(f"unknown frame {frame!r}")
    p = tier.params
    if track_subspaces is None:
        track_subspaces = tier.tag is Tier.RWA_DRESSED
    dim = m0.shape[0]
    times = np.linspace(0.0, t_final, sample_count)

    rotating = frame == "rotating"
    gen = Liouvillian(tier, drop_diagonal=rotating)
    energies = np.diag(tier.hamiltonian).real.copy()

    def phases(t):
        e = np.exp(-1j * energies * t)
        return np.outer(e, e.conj())

    if rotating:
        def rhs(t, y):
            ph = phases(t)
            out = gen(ph * y.reshape(dim, dim), hermitian=True)
            np.conjugate(ph, out=ph)
            out *= ph
            return out.ravel()
    else:
        def rhs(t, y):
            return gen(y.reshape(dim, dim), hermitian=True).ravel()

    rng = np.random.default_rng(audit_seed)
    n_audit = min(audit_points, sample_count)
    audit_idx = set(rng.choice(sample_count, size=n_audit, replace=False).tolist()) if n_audit else set()
    audits: dict = {}
    drift = [0.0]
    counter = [0]

    def observe(t, y):
        rho = y.reshape(dim, dim)
        if rotating:
            rho = phases(t) * rho
        drift[0] = max(drift[0], float(np.max(np.abs(rho - rho.conj().T))))
        rho = 0.5 * (rho + rho.conj().T)
        i = counter[0]
        counter[0] += 1
        if i in audit_idx:
            audits[float(t)] = float(hermitian_eig(rho, tol=1e-6)[0][0])
        rec = [mean_phonon(rho), excited_population(rho), float(np.trace(rho).real)]
        sub = dressed_subspace_populations(rho, p) if track_subspaces else None
        last = rho if i == sample_count - 1 else None
        return rec, sub, last

    sol = integrate_adaptive(rhs, m0.ravel(), (0.0, float(t_final)), rel_tol, abs_tol,
                             times, max_initial_step=max_initial_step, observer=observe)
    rec = np.array([s[0] for s in sol.states])
    traj = CoolingTrajectory(
        times=times, nbar=rec[:, 0], p_excited=rec[:, 1], params=p, tier=tier.tag,
        subspace_pops=np.array([s[1] for s in sol.states]) if track_subspaces else None,
        trace=rec[:, 2], hermiticity_drift=drift[0], min_eigenvalues=audits,
        final_state=sol.states[-1][2],
        stats={"accepted_steps": sol.accepted_steps, "rejected_steps": sol.rejected_steps,
               "rhs_evaluations": sol.rhs_evaluations, "rel_tol": rel_tol,
               "abs_tol": abs_tol, "frame": frame},
    )
    worst = traj.min_audit_eigenvalue
    if worst < AUDIT_FAIL:
        warnings.warn(f"density matrix eigenvalue {worst:.3e} below {AUDIT_FAIL:.0e}",
                      PositivityWarning, stacklevel=2)
    return traj

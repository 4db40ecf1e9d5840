"""Operators, Hamiltonians and dissipators of the trapped-ion cooling model.

The product space is internal (x) motional with the internal factor first and
ordered ``(g, e)``: basis index ``i * cutoff + n`` for internal state ``i``
(0 = g, 1 = e) and phonon number ``n``.

Every jump set uses the single-operator Lindblad convention

    D(rho) = sum_j L_j rho L_j^+ - 1/2 {L_j^+ L_j, rho}

with all rates absorbed into the ``L_j``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .numkit import ContractError, expm, gauss_legendre, hermitian_eig
from .params import IonParams

DEFAULT_CUTOFF = 70
DEFAULT_QUAD_POINTS = 32
DEFAULT_MAX_TAIL = 2e-3

G, E = 0, 1
SIGMA_GG = np.array([[1, 0], [0, 0]], dtype=complex)
SIGMA_EE = np.array([[0, 0], [0, 1]], dtype=complex)
SIGMA_EG = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
SIGMA_GE = SIGMA_EG.T.copy()                          # |g><e|
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class FockSpace:
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ContractError(f"Fock cutoff must be an integer >= 2, got {self.cutoff}")

    @property
    def total_dim(self) -> int:
        return 2 * self.cutoff

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.cutoff, dtype=complex)


def annihilation(space: FockSpace) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, space.cutoff)), 1).astype(complex)


def number_operator(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.cutoff)).astype(complex)


def position_quadrature(space: FockSpace) -> np.ndarray:
    a = annihilation(space)
    return a + a.conj().T


def embed(internal_op, motional_op) -> np.ndarray:
    internal_op = np.asarray(internal_op)
    motional_op = np.asarray(motional_op)
    if internal_op.shape != (2, 2):
        raise ContractError(f"internal operator must be 2x2, got {internal_op.shape}")
    if motional_op.ndim != 2 or motional_op.shape[0] != motional_op.shape[1]:
        raise ContractError(f"motional operator must be square, got {motional_op.shape}")
    return np.kron(internal_op, motional_op)


def displacement(space: FockSpace, eta: float, u: float) -> np.ndarray:
    """exp(i eta u (a + a^+)) on the truncated motional space."""
    if abs(u) > 1:
        raise ContractError(f"|u| must not exceed 1, got {u}")
    return expm(1j * eta * u * position_quadrature(space))


def basis_state(space: FockSpace, internal: int, n: int) -> np.ndarray:
    v = np.zeros(space.total_dim, dtype=complex)
    v[internal * space.cutoff + n] = 1.0
    return v


# ---------------------------------------------------------------- Hamiltonians

def hamiltonian_exact(p: IonParams, space: FockSpace) -> np.ndarray:
    """Running-wave Hamiltonian with the full recoil exponential."""
    x = position_quadrature(space)
    kick = expm(-1j * p.eta * x)  # exp(-i k x) accompanies absorption |e><g|
    h = -p.delta * embed(SIGMA_EE, space.identity) + p.nu * embed(I2, number_operator(space))
    h = h + 0.5 * p.omega * (embed(SIGMA_EG, kick) + embed(SIGMA_GE, kick.conj().T))
    return h


def hamiltonian_ld(p: IonParams, space: FockSpace) -> np.ndarray:
    """First-order Lamb-Dicke expansion H0 + H1."""
    ident = space.identity
    h0 = (p.nu * embed(I2, number_operator(space)) - p.delta * embed(SIGMA_EE, ident)
          + 0.5 * p.omega * embed(SIGMA_EG + SIGMA_GE, ident))
    h1 = p.eta * 0.5 * p.omega * embed(-1j * SIGMA_EG + 1j * SIGMA_GE, position_quadrature(space))
    return h0 + h1


def hamiltonian_rwa(p: IonParams, space: FockSpace) -> np.ndarray:
    """Resonant red-sideband Hamiltonian (eta Omega/2)(i|+><-| a - i|-><+| a^+).

    Interaction-picture operator, expressed in the bare (g, e) basis.
    """
    db = analytics.dressed_basis(p.delta, p.omega)
    plus_minus = np.outer(db.plus_vec, db.minus_vec).astype(complex)  # |+><-|
    a = annihilation(space)
    op = 1j * embed(plus_minus, a)
    return 0.5 * p.eta * p.omega * (op + op.conj().T)


# ---------------------------------------------------------------- dissipators

@dataclass(frozen=True)
class RecoilKernel:
    """Fast form of the angular recoil channel.

    For jumps ``L_j = sqrt(c_j) |g><e| (x) exp(i eta u_j X)`` the gain term is
    ``|g><g| (x) V [(V^+ rho_ee V) o K] V^+`` where ``X = V diag(x) V^+`` and
    ``K_kl = sum_j c_j exp(i eta u_j (x_k - x_l))``.
    """

    vectors: np.ndarray
    kernel: np.ndarray

    def gain(self, rho_ee: np.ndarray) -> np.ndarray:
        v = self.vectors
        return v @ ((v.conj().T @ rho_ee @ v) * self.kernel) @ v.conj().T


@dataclass(frozen=True)
class JumpSet:
    jumps: list
    label: str = ""
    recoil: RecoilKernel | None = None

    def __len__(self) -> int:
        return len(self.jumps)

    def decay_sum(self) -> np.ndarray:
        """sum_j L_j^+ L_j."""
        if not self.jumps:
            raise ContractError("empty jump set has no dimension")
        return sum(l.conj().T @ l for l in self.jumps)


def emission_weight(u, emission: str = "dipole"):
    """Angular emission density in u = cos(theta), normalized on [-1, 1]."""
    u = np.asarray(u, dtype=float)
    if emission == "dipole":
        return 3.0 / 8.0 * (1.0 + u * u)
    return 0.5 * np.ones_like(u)


def emission_quadrature(p: IonParams, quad_points: int = DEFAULT_QUAD_POINTS):
    """Nodes u_j and absorbed weights w_j N(u_j) (summing to 1)."""
    rule = gauss_legendre(quad_points)
    return rule.nodes, rule.weights * emission_weight(rule.nodes, p.emission)


def dissipator_exact(p: IonParams, space: FockSpace,
                     quad_points: int = DEFAULT_QUAD_POINTS) -> JumpSet:
    """Spontaneous emission with recoil, one jump per angular quadrature node."""
    if quad_points < 8:
        raise ContractError(f"need at least 8 quadrature points, got {quad_points}")
    nodes, weights = emission_quadrature(p, quad_points)
    jumps = [np.sqrt(w * p.gamma) * embed(SIGMA_GE, displacement(space, p.eta, u))
             for u, w in zip(nodes, weights)]
    x, vecs = hermitian_eig(position_quadrature(space))
    dx = x[:, None] - x[None, :]
    kernel = sum(p.gamma * w * np.exp(1j * p.eta * u * dx) for u, w in zip(nodes, weights))
    return JumpSet(jumps, "exact", RecoilKernel(vecs, kernel))


def dissipator_ld0(p: IonParams, space: FockSpace) -> JumpSet:
    """Zeroth-order (recoil-free) spontaneous emission."""
    return JumpSet([np.sqrt(p.gamma) * embed(SIGMA_GE, space.identity)], "ld0")


RESONANCE_TOL = 1e-9


def dissipator_dressed(p: IonParams, space: FockSpace) -> JumpSet:
    """Dressed-basis decay |+>-><-| (gamma_-), |->-><+| (gamma_+) and dephasing.

    The dressed form is written as (gamma_x / 2) D_X with
    D_X(rho) = 2 X rho X^+ - {X^+ X, rho}; in the single-operator convention
    used here that is L = sqrt(gamma_x) X.
    """
    delta_res = analytics.ssc_resonance_delta(p.nu, p.omega)
    if abs(p.delta - delta_res) > RESONANCE_TOL * p.nu:
        raise ContractError(
            f"dressed dissipator needs delta = {delta_res:.12g} (got {p.delta:.12g})")
    r = analytics.dressed_rates(p)
    db = analytics.dressed_basis(p.delta, p.omega)
    plus, minus = db.plus_vec.astype(complex), db.minus_vec.astype(complex)
    ident = space.identity
    ops = [
        (r.gamma_minus, np.outer(minus, plus)),
        (r.gamma_plus, np.outer(plus, minus)),
        (r.gamma_phi, np.outer(plus, plus) - np.outer(minus, minus)),
    ]
    return JumpSet([np.sqrt(rate) * embed(x, ident) for rate, x in ops], "dressed")


# ---------------------------------------------------------------- tiers

class Tier(str, enum.Enum):
    EXACT = "EXACT"
    LAMB_DICKE = "LAMB_DICKE"
    RWA_DRESSED = "RWA_DRESSED"


@dataclass(frozen=True)
class ModelTier:
    tag: Tier
    hamiltonian: np.ndarray
    jump_set: JumpSet
    params: IonParams
    space: FockSpace


def build_tier(tag: Tier | str, p: IonParams, space: FockSpace,
               quad_points: int = DEFAULT_QUAD_POINTS) -> ModelTier:
    try:
        tag = Tier(tag)
    except ValueError:
        raise ContractError(f"unknown model tier {tag!r}") from None
    if tag is Tier.EXACT:
        h, jumps = hamiltonian_exact(p, space), dissipator_exact(p, space, quad_points)
    elif tag is Tier.LAMB_DICKE:
        h, jumps = hamiltonian_ld(p, space), dissipator_ld0(p, space)
    else:
        h, jumps = hamiltonian_rwa(p, space), dissipator_dressed(p, space)
    return ModelTier(tag, h, jumps, p, space)


# ---------------------------------------------------------------- states

class Basis(str, enum.Enum):
    BARE = "BARE"
    DRESSED = "DRESSED"


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    basis: Basis = Basis.BARE
    # probability mass discarded by truncation before renormalization
    tail_mass: float = 0.0
    info: dict = field(default_factory=dict)


def thermal_initial_state(p: IonParams, space: FockSpace,
                          max_tail: float = DEFAULT_MAX_TAIL) -> DensityMatrix:
    """|g><g| (x) thermal(n0), renormalized on the truncated space."""
    n = space.cutoff
    if p.n0 == 0:
        tail = 0.0
        pops = np.zeros(n)
        pops[0] = 1.0
    else:
        x = p.n0 / (1 + p.n0)
        tail = float(x ** n)
        if tail >= max_tail:
            raise ContractError(
                f"thermal tail mass {tail:.3e} beyond cutoff {n} exceeds {max_tail:.1e}; "
                "increase the Fock cutoff")
        pops = (1 - x) * x ** np.arange(n)
        pops = pops / pops.sum()
    rho = embed(SIGMA_GG, np.diag(pops).astype(complex))
    return DensityMatrix(rho, Basis.BARE, tail, {"n0": p.n0, "cutoff": n})


def pure_state(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))

"""Closed-form results: dressed states, dressed decay rates, cooling predictions,
the subspace rate equations and exponential fits of cooling curves.

Internal two-level vectors are ordered ``(g, e)`` throughout the package.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .numkit import ContractError, expm, least_squares
from .params import IonParams

# Proportionality constant of the weak-coupling rate eta^2 Omega^2 / gamma.
WSC_RATE_CONSTANT = 1.0
DEFAULT_RATE_TRUNCATION = 120
DEFAULT_FIT_TMIN = 20.0
DEFAULT_EFOLDS = 16.0
DEFAULT_T_CAP = 5000.0


# ---------------------------------------------------------------- dressed states

@dataclass(frozen=True)
class DressedBasis:
    phi: float
    omega_plus: float
    omega_minus: float
    plus_vec: np.ndarray
    minus_vec: np.ndarray

    @property
    def unitary(self) -> np.ndarray:
        """Columns are |+> and |-> in the (g, e) basis."""
        return np.column_stack([self.plus_vec, self.minus_vec]).astype(complex)


def dressed_basis(delta: float, omega: float) -> DressedBasis:
    """Eigenbasis of ``-delta |e><e| + omega/2 (|e><g| + |g><e|)``.

    |+> = sin(phi)|e> + cos(phi)|g>,  |-> = cos(phi)|e> - sin(phi)|g>.
    """
    r = float(np.hypot(delta, omega))
    if r == 0.0:
        raise ContractError("dressed basis undefined for delta = omega = 0")
    s2 = min(1.0, max(0.0, 0.5 * (1.0 - delta / r)))
    phi = float(np.arcsin(np.sqrt(s2)))
    s, c = np.sin(phi), np.cos(phi)
    return DressedBasis(
        phi=phi,
        omega_plus=0.5 * (-delta + r),
        omega_minus=0.5 * (-delta - r),
        plus_vec=np.array([c, s]),
        minus_vec=np.array([-s, c]),
    )


def ssc_resonance_delta(nu: float, omega: float) -> float:
    """Detuning that makes |-, n> <-> |+, n-1> resonant: -sqrt(nu^2 - omega^2)."""
    if not 0 <= omega < nu:
        raise ContractError(f"resonance needs 0 <= omega < nu (omega={omega}, nu={nu})")
    return -float(np.sqrt(nu * nu - omega * omega))


@dataclass(frozen=True)
class DressedRates:
    beta: float
    gamma_minus: float
    gamma_plus: float
    gamma_phi: float


def beta_parameter(nu: float, omega: float) -> float:
    if omega > nu:
        raise ContractError(f"beta needs omega <= nu (omega={omega}, nu={nu})")
    return float(np.sqrt(nu * nu - omega * omega) / nu)


def dressed_rates(p: IonParams) -> DressedRates:
    b = beta_parameter(p.nu, p.omega)
    return DressedRates(
        beta=b,
        gamma_minus=((1 + b) / 2) ** 2 * p.gamma,
        gamma_plus=((1 - b) / 2) ** 2 * p.gamma,
        gamma_phi=(1 - b * b) / 4 * p.gamma,
    )


# ---------------------------------------------------------------- predictions

class Regime(str, enum.Enum):
    WSC = "WSC"
    SSC = "SSC"
    SSC_APPROX = "SSC_APPROX"


@dataclass(frozen=True)
class CoolingPrediction:
    w: float
    nbar_st: float
    regime: Regime
    notes: dict = field(default_factory=dict)


def wsc_prediction(p: IonParams, rate_constant: float = WSC_RATE_CONSTANT) -> CoolingPrediction:
    if p.gamma <= 0:
        raise ContractError("gamma must be positive")
    w = rate_constant * p.eta ** 2 * p.omega ** 2 / p.gamma
    alpha = p.emission_second_moment
    nbar = (alpha + 0.25) * (p.gamma / (2 * p.nu)) ** 2
    return CoolingPrediction(w, nbar, Regime.WSC, {"rate_constant": rate_constant, "alpha": alpha})


def ssc_nbar_st(beta: float) -> float:
    if not 0 < beta <= 1:
        raise ContractError(f"steady occupation diverges for beta={beta}")
    return 0.25 * (beta + 1.0 / beta) - 0.5


def ssc_prediction(p: IonParams, approx: bool = False) -> CoolingPrediction:
    """Strong-coupling steady occupation and cooling rate for a thermal start."""
    if not 0 < p.omega < p.nu:
        raise ContractError("SSC prediction needs 0 < omega < nu")
    if p.n0 <= 0:
        raise ContractError("SSC rate needs n0 > 0")
    r = dressed_rates(p)
    nbar = ssc_nbar_st(r.beta)
    if approx:
        return CoolingPrediction(p.gamma * r.beta / (2 * p.n0), nbar, Regime.SSC_APPROX)
    w = r.gamma_minus / (2 * (1 + p.n0)) - r.gamma_plus / (2 * p.n0)
    return CoolingPrediction(w, nbar, Regime.SSC)


# ---------------------------------------------------------------- rate equations

class RateVariant(str, enum.Enum):
    FULL = "FULL"
    SCALED = "SCALED"
    DIAGONAL_DRESSED = "DIAGONAL_DRESSED"


@dataclass(frozen=True)
class RateModel:
    """Linear population generator ``dp/dt = generator @ p``.

    FULL and SCALED act on subspace populations p_0..p_N.  DIAGONAL_DRESSED
    acts on (p_0, p_{1,+}, p_{1,-}, ..., p_{N,+}, p_{N,-}).
    """

    generator: np.ndarray
    variant: RateVariant
    truncation: int
    rates: DressedRates

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def subspace_sum(self, pops: np.ndarray) -> np.ndarray:
        """Collapse populations (last axis) onto subspace populations p_n."""
        pops = np.asarray(pops)
        if self.variant is not RateVariant.DIAGONAL_DRESSED:
            return pops
        head = pops[..., :1]
        pairs = pops[..., 1:].reshape(pops.shape[:-1] + (self.truncation, 2)).sum(axis=-1)
        return np.concatenate([head, pairs], axis=-1)


def _birth_death(n_states: int, up0: float, up: float, down: float) -> np.ndarray:
    g = np.zeros((n_states, n_states))
    for n in range(n_states):
        if n + 1 < n_states:
            rate = up0 if n == 0 else up
            g[n + 1, n] += rate
            g[n, n] -= rate
        if n > 0:
            g[n - 1, n] += down
            g[n, n] -= down
    return g


def _diagonal_dressed(N: int, r: DressedRates) -> np.ndarray:
    gp, gm, gf = r.gamma_plus, r.gamma_minus, r.gamma_phi
    dim = 2 * N + 1
    g = np.zeros((dim, dim))

    def idx(n, s):  # s = 0 for D+, 1 for D-
        return 2 * n - 1 + s

    g[0, 0] = -gp
    for s in (0, 1):
        g[idx(1, s), 0] = gp / 2
    for n in range(1, N + 1):
        for s in (0, 1):
            j = idx(n, s)
            loss = gm / 2 + gf + (gp / 2 if n < N else 0.0)
            g[j, j] = -loss
            g[idx(n, 1 - s), j] += gf  # dephasing swaps D+ and D-
            if n == 1:
                g[0, j] += gm / 2
            else:
                for s2 in (0, 1):
                    g[idx(n - 1, s2), j] += gm / 4
            if n < N:
                for s2 in (0, 1):
                    g[idx(n + 1, s2), j] += gp / 4
    return g


def rate_model(p: IonParams, truncation: int = DEFAULT_RATE_TRUNCATION,
               variant: RateVariant | str = RateVariant.FULL) -> RateModel:
    try:
        variant = RateVariant(variant)
    except ValueError:
        raise ContractError(f"unknown rate-model variant {variant!r}") from None
    if truncation < 2:
        raise ContractError("rate-model truncation must be >= 2")
    r = dressed_rates(p)
    if variant is RateVariant.FULL:
        g = _birth_death(truncation + 1, r.gamma_plus, r.gamma_plus / 2, r.gamma_minus / 2)
    elif variant is RateVariant.SCALED:
        g = _birth_death(truncation + 1, r.gamma_plus / 2, r.gamma_plus / 2, r.gamma_minus / 2)
    else:
        g = _diagonal_dressed(truncation, r)
    return RateModel(g, variant, truncation, r)


def phonon_weights(n_subspaces: int) -> np.ndarray:
    """Mean phonon number of each subspace: 0 for M_0, n - 1/2 for M_n."""
    n = np.arange(n_subspaces, dtype=float)
    return np.where(n >= 1, n - 0.5, 0.0)


def rate_steady_state(m: RateModel) -> np.ndarray:
    """Normalized null vector of the generator."""
    a = m.generator.copy()
    a[-1, :] = 1.0
    rhs = np.zeros(m.dim)
    rhs[-1] = 1.0
    return np.linalg.solve(a, rhs)


def steady_state_closed_form(rates: DressedRates, truncation: int) -> np.ndarray:
    """p_0 = (1 - r)/(1 + r), p_n = 2 p_0 r^n with r = gamma_+/gamma_-."""
    ratio = rates.gamma_plus / rates.gamma_minus
    p0 = (1 - ratio) / (1 + ratio)
    n = np.arange(truncation + 1)
    return np.where(n == 0, p0, 2 * p0 * ratio ** n)


def thermal_populations(n0: float, n_states: int) -> np.ndarray:
    """Thermal occupation probabilities, renormalized over ``n_states`` levels."""
    if n0 < 0:
        raise ContractError("n0 must be non-negative")
    if n0 == 0:
        out = np.zeros(n_states)
        out[0] = 1.0
        return out
    x = n0 / (1 + n0)
    p = (1 - x) * x ** np.arange(n_states)
    return p / p.sum()


@dataclass
class RateTrajectory:
    times: np.ndarray
    populations: np.ndarray  # shape (samples, dim) in the model's own coordinates
    subspace: np.ndarray     # shape (samples, N + 1)
    nbar: np.ndarray


class NegativePopulationError(ArithmeticError):
    pass


def rate_evolve(m: RateModel, p0, t_final: float, samples: int = 400) -> RateTrajectory:
    """Propagate populations on a uniform grid with the generator exponential."""
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (m.dim,):
        raise ContractError(f"initial populations need shape ({m.dim},), got {p0.shape}")
    if abs(p0.sum() - 1.0) > 1e-9:
        raise ContractError(f"initial populations sum to {p0.sum()!r}, not 1")
    if t_final <= 0 or samples < 2:
        raise ContractError("need t_final > 0 and at least two samples")
    times = np.linspace(0.0, t_final, samples)
    step = expm(m.generator * (times[1] - times[0]))
    pops = np.empty((samples, m.dim))
    pops[0] = p0
    for i in range(1, samples):
        pops[i] = step @ pops[i - 1]
    if pops.min() < -1e-9:
        i, j = np.unravel_index(np.argmin(pops), pops.shape)
        raise NegativePopulationError(
            f"population {j} reached {pops[i, j]:.3e} at t={times[i]:.6g}")
    sub = m.subspace_sum(pops)
    return RateTrajectory(times, pops, sub, sub @ phonon_weights(sub.shape[1]))


def scaled_closed_form(p: IonParams, times, truncation: int = DEFAULT_RATE_TRUNCATION):
    """Single-exponential thermal-start solution of the scaled rate equations.

    Returns ``(populations, nbar)``: p_n(t) = (p_n(0) - p_n,st) e^{-W t} + p_n,st
    with the steady state of the scaled generator and the thermal-start rate W,
    and nbar(t) = n0 (1 - 1/(2(1+n0))) e^{-W t} + nbar_st.
    """
    times = np.asarray(times, dtype=float)
    w = ssc_prediction(p).w
    p_init = thermal_populations(p.n0, truncation + 1)
    p_st = rate_steady_state(rate_model(p, truncation, RateVariant.SCALED))
    decay = np.exp(-w * times)[:, None]
    pops = (p_init - p_st)[None, :] * decay + p_st[None, :]
    nbar = p.n0 * (1 - 1 / (2 * (1 + p.n0))) * decay[:, 0] + ssc_prediction(p).nbar_st
    return pops, nbar


# ---------------------------------------------------------------- fitting

@dataclass(frozen=True)
class CoolingFit:
    """nbar(t) ~ amplitude * exp(-w_fit t) + nbar_st_fit."""

    w_fit: float
    nbar_st_fit: float
    amplitude: float
    residual_norm: float
    converged: bool = True
    identifiable: bool = True


def _initial_guess(t, y):
    n = len(t)
    tail = max(1, n // 10)
    c0 = float(np.mean(y[-tail:]))
    a0 = float(y[0] - c0)
    half = slice(0, max(2, n // 2))
    z = y[half] - c0
    ok = z > 1e-12 * max(abs(a0), 1e-300)
    w0 = 0.0
    if a0 > 0 and ok.sum() >= 2:
        slope = np.polyfit(t[half][ok], np.log(z[ok]), 1)[0]
        w0 = -slope
    span = t[-1] - t[0]
    if not np.isfinite(w0) or w0 <= 0:
        w0 = 1.0 / span
    return a0, w0, c0


def fit_cooling_curve(times, nbar, t_min: float = DEFAULT_FIT_TMIN,
                      weighting: str = "relative") -> CoolingFit:
    """Three-parameter exponential fit over samples with ``t >= t_min``.

    ``weighting="relative"`` minimizes residuals divided by the data, so the
    low plateau carries as much weight as the hot initial decay; ``"uniform"``
    is the plain unweighted fit.  ``residual_norm`` is reported in the chosen
    metric.
    """
    t_all = np.asarray(times, dtype=float)
    y_all = np.asarray(nbar, dtype=float)
    if t_all.shape != y_all.shape:
        raise ContractError("times and nbar must have equal length")
    if weighting not in ("relative", "uniform"):
        raise ContractError(f"unknown weighting {weighting!r}")
    keep = t_all >= t_min
    t, y = t_all[keep], y_all[keep]
    if t.size < 10:
        raise ContractError(f"need at least 10 samples after t_min={t_min}, got {t.size}")
    if np.any(y < -1e-9):
        raise ContractError("cooling curve has negative values")
    t_ref = t[0]
    s = t - t_ref
    a0, w0, c0 = _initial_guess(s, y)
    if weighting == "relative":
        floor = 1e-12 * max(float(np.max(np.abs(y))), 1e-300)
        scale = 1.0 / np.maximum(np.abs(y), floor)
    else:
        scale = np.ones_like(y)

    def model(q):
        return (q[0] * np.exp(-q[1] * s) + q[2]) * scale

    def jac(q):
        e = np.exp(-q[1] * s)
        return np.column_stack([e, -q[0] * s * e, np.ones_like(s)]) * scale[:, None]

    res = least_squares(model, [a0, w0, c0], y * scale, jacobian=jac, max_iter=500)
    a, w, c = res.params
    flat = abs(a) <= 1e-9 * max(abs(c), 1e-12)
    return CoolingFit(
        w_fit=float(w),
        nbar_st_fit=float(c),
        amplitude=float(a * np.exp(w * t_ref)),
        residual_norm=res.residual_norm,
        converged=res.converged,
        identifiable=res.identifiable and not flat,
    )


def default_t_final(p: IonParams, efolds: float = DEFAULT_EFOLDS,
                    cap: float = DEFAULT_T_CAP) -> float:
    """Evolution time covering ``efolds`` decay times of the slower analytic rate."""
    rates = [wsc_prediction(p).w]
    if 0 < p.omega < p.nu and p.n0 > 0:
        rates.append(ssc_prediction(p, approx=True).w)
    rates = [w for w in rates if w > 0]
    return float(min(cap, efolds / min(rates))) if rates else float(cap)

"""Adaptive Dormand-Prince 5(4) integration with PI step control and dense output."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import ContractError


class IntegrationError(RuntimeError):
    """Integration aborted; ``time`` is the last successfully reached time."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


@dataclass
class OdeSolution:
    times: np.ndarray
    states: list
    accepted_steps: int
    rejected_steps: int
    tolerance: float
    rhs_evaluations: int = 0
    stats: dict = field(default_factory=dict)


# Butcher tableau of the DOPRI5 pair
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension (Hairer, Norsett & Wanner, contd5)
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
      -10690763975 / 1880347072, 701980252875 / 199316789632,
      -1453857185 / 822651844, 69997945 / 29380423)

_SAFETY = 0.9
_BETA = 0.04  # PI memory exponent
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


def _error_norm(err, y, y_new, rel_tol, abs_tol) -> float:
    scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    r = np.abs(err) / scale
    return float(np.sqrt(np.mean(r * r)))


def _initial_step(rhs, t0, y0, f0, rel_tol, abs_tol, h_max):
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((np.abs(y0) / scale) ** 2))
    d1 = np.sqrt(np.mean((np.abs(f0) / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, h_max)


def integrate_adaptive(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_span: tuple[float, float],
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    sample_times=None,
    *,
    max_initial_step: float = 0.1,
    max_step: float = np.inf,
    max_steps: int = 10_000_000,
    observer: Callable[[float, np.ndarray], object] | None = None,
) -> OdeSolution:
    """Integrate ``y' = rhs(t, y)`` from ``t_span[0]`` to ``t_span[1]``.

    ``y0`` may be any real or complex array; the error norm is the RMS of the
    componentwise scaled error.  Results are produced at ``sample_times``
    (default: the two endpoints) by the fourth-order continuous extension.
    If ``observer`` is given, ``observer(t, y)`` is stored instead of ``y``.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ContractError(f"need t1 > t0, got {t_span}")
    if not (rel_tol > 0 and abs_tol > 0):
        raise ContractError("tolerances must be positive")
    ts = np.array([t0, t1] if sample_times is None else sample_times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ContractError("sample_times must be a non-empty 1-D sequence")
    if np.any(np.diff(ts) <= 0):
        raise ContractError("sample_times must be strictly increasing")
    if ts[0] < t0 or ts[-1] > t1:
        raise ContractError("sample_times must lie inside t_span")

    y = np.array(y0, dtype=np.result_type(np.asarray(y0).dtype, np.float64))
    record = observer if observer is not None else (lambda t, v: v.copy())
    out: list = []
    n_eval = 0

    def f(t, v):
        nonlocal n_eval
        n_eval += 1
        return rhs(t, v)

    t = t0
    k1 = f(t, y)
    if not np.all(np.isfinite(k1)):
        raise IntegrationError("non-finite derivative", t)
    idx = 0
    while idx < ts.size and ts[idx] <= t0:
        out.append(record(t0, y))
        idx += 1
    h_cap = min(max_step, t1 - t0)
    h = _initial_step(f, t, y, k1, rel_tol, abs_tol, min(max_initial_step, h_cap))
    h_min = 16 * np.finfo(float).eps * max(abs(t0), abs(t1), 1.0)
    fac_old = 1e-4
    accepted = rejected = 0
    last_rejected = False

    while t < t1:
        if accepted + rejected >= max_steps:
            raise IntegrationError(f"step budget {max_steps} exhausted", t)
        if h < h_min:
            raise IntegrationError(f"step size underflow (h={h:.3e})", t)
        final = t + 1.01 * h >= t1
        if final:
            h = t1 - t
        k = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0.0)
            k.append(f(t + _C[i] * h, yi))
        y_new = yi  # stage 7 is evaluated at the 5th-order solution (FSAL)
        k_new = k[6]
        err_vec = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
        if not (np.all(np.isfinite(k_new)) and np.all(np.isfinite(y_new))):
            raise IntegrationError("non-finite derivative", t)
        err = _error_norm(err_vec, y, y_new, rel_tol, abs_tol)
        fac11 = err ** _EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / fac_old ** _BETA
            fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac / _SAFETY))
            h_next = h / fac
            t_new = t1 if final else t + h
            if idx < ts.size and ts[idx] <= t_new:
                diff = y_new - y
                bspl = h * k1 - diff
                r4 = diff - h * k_new - bspl
                r5 = h * sum(d * kj for d, kj in zip(_D, k) if d != 0.0)
                while idx < ts.size and ts[idx] <= t_new:
                    th = (ts[idx] - t) / h
                    th1 = 1.0 - th
                    yt = y + th * (diff + th1 * (bspl + th * (r4 + th1 * r5)))
                    out.append(record(ts[idx], yt))
                    idx += 1
            t, y, k1 = t_new, y_new, k_new
            fac_old = max(err, 1e-4)
            accepted += 1
            if last_rejected:
                h_next = min(h_next, h)
            last_rejected = False
            h = min(h_next, h_cap)
        else:
            rejected += 1
            last_rejected = True
            h = h / min(1 / _FAC_MIN, fac11 / _SAFETY)

    return OdeSolution(
        times=ts.copy(), states=out, accepted_steps=accepted,
        rejected_steps=rejected, tolerance=rel_tol, rhs_evaluations=n_eval,
    )

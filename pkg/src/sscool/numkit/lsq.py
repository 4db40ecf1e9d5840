from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ContractError


@dataclass
class LeastSquaresResult:
    params: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    message: str = ""
    # eigenvalues of J^T J at the solution, ascending; a value near zero
    # marks a parameter direction the data does not constrain
    curvature: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def identifiable(self) -> bool:
        if self.curvature.size == 0:
            return False
        return bool(self.curvature[0] > 1e-12 * max(self.curvature[-1], 1e-300))


def _fd_jacobian(model, p, f0):
    jac = np.empty((f0.size, p.size))
    for i in range(p.size):
        step = 1e-6 * max(abs(p[i]), 1e-3)
        dp = np.zeros_like(p)
        dp[i] = step
        jac[:, i] = (np.asarray(model(p + dp), float) - np.asarray(model(p - dp), float)) / (2 * step)
    return jac


def _polish(model, y, p, r, cost, jac):
    """One undamped Gauss-Newton step, kept only if it does not raise the cost."""
    try:
        delta = np.linalg.lstsq(jac, -r, rcond=None)[0]
    except np.linalg.LinAlgError:
        return p, r, cost
    r_try = np.asarray(model(p + delta), float) - y
    cost_try = float(r_try @ r_try)
    if np.isfinite(cost_try) and cost_try <= cost:
        return p + delta, r_try, cost_try
    return p, r, cost


def least_squares(model, initial, observations, jacobian=None, max_iter: int = 200,
                  gtol: float = 1e-10, rtol: float = 1e-12) -> LeastSquaresResult:
    """Minimize ``|model(p) - observations|^2`` by Levenberg-damped Gauss-Newton.

    ``jacobian(p)`` returns d(model)/dp with shape (n_obs, n_params); central
    differences are used when it is omitted.  Convergence is declared when the
    gradient norm drops below ``gtol`` or an accepted step changes the residual
    norm by less than ``rtol`` relative.  A failure to converge is reported in
    the result, never raised.
    """
    y = np.asarray(observations, dtype=float)
    p = np.array(initial, dtype=float)
    if p.ndim != 1 or y.ndim != 1:
        raise ContractError("params and observations must be 1-D")
    if y.size < p.size:
        raise ContractError(f"{y.size} observations cannot fix {p.size} parameters")
    if not np.all(np.isfinite(p)):
        raise ContractError("initial parameters must be finite")
    jac_fn = jacobian if jacobian is not None else (lambda q: _fd_jacobian(model, q, r + y))

    pred = np.asarray(model(p), float)
    r = pred - y
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    message = "iteration limit reached"
    it = 0
    jac = np.asarray(jac_fn(p), float)
    for it in range(1, max_iter + 1):
        grad = jac.T @ r
        if np.linalg.norm(grad) < gtol or cost == 0.0:
            converged, message = True, "gradient below tolerance"
            it -= 1
            if cost > 0.0:
                p, r, cost = _polish(model, y, p, r, cost, jac)
            break
        jtj = jac.T @ jac
        diag = np.maximum(np.diag(jtj), 1e-300)
        step_taken = False
        while lam < 1e16:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_try = p + delta
            pred_try = np.asarray(model(p_try), float)
            r_try = pred_try - y
            cost_try = float(r_try @ r_try)
            if np.isfinite(cost_try) and cost_try <= cost:
                step_taken = True
                break
            lam *= 10.0
        if not step_taken:
            message = "damping escalation failed to reduce residual"
            break
        rel_change = (np.sqrt(cost) - np.sqrt(cost_try)) / max(np.sqrt(cost), 1e-300)
        p, r, cost = p_try, r_try, cost_try
        lam = max(lam / 10.0, 1e-12)
        jac = np.asarray(jac_fn(p), float)
        if rel_change < rtol:
            converged, message = True, "relative residual change below tolerance"
            break

    jtj = jac.T @ jac
    curv = np.sort(np.linalg.eigvalsh(0.5 * (jtj + jtj.T)))
    return LeastSquaresResult(p, float(np.sqrt(cost)), converged, min(it, max_iter),
                              message, curv)

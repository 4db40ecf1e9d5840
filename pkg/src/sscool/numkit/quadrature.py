from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ContractError, ConvergenceError


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``u`` in (-1, 1), ascending, with positive weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))

    def __len__(self) -> int:
        return len(self.nodes)


def _legendre(n: int, x: np.ndarray):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if n == 0:
        return p0, np.zeros_like(x)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(n: int, max_iter: int = 100) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1] via Newton iteration on P_n."""
    if int(n) != n or n < 1:
        raise ContractError(f"quadrature order must be a positive integer, got {n}")
    n = int(n)
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))
    k = np.arange(1, n + 1)
    x = -np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for it in range(max_iter):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise ConvergenceError("Legendre root iteration did not converge", max_iter)
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # symmetrize to remove rounding asymmetry between u and -u
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(x, w)

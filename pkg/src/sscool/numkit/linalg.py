"""Dense complex linear algebra: products, Hermitian eigensolver, matrix exponential.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` (or real,
where that is all that is needed).  The functions here validate shapes and
raise :class:`ContractError` on misuse.
"""
from __future__ import annotations

import numpy as np


class ContractError(ValueError):
    """Raised when an input violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative kernel fails to converge."""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def _require_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got shape {a.shape}")


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ContractError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def hermiticity_residual(m) -> float:
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def hermitian_eig(m, tol: float = 1e-10, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(eigenvalues, vectors)`` with eigenvalues ascending and the
    eigenvectors as orthonormal columns, so that ``m @ V == V @ diag(w)``.
    """
    a = as_matrix(m).astype(np.complex128, copy=True)
    _require_square(a, "m")
    n = a.shape[0]
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if hermiticity_residual(a) > tol * max(1.0, scale):
        raise ContractError(
            f"matrix is not Hermitian (residual {hermiticity_residual(a):.3e})")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=np.complex128)
    if n <= 1 or scale == 0.0:
        w = a.diagonal().real.copy()
        return w, v

    eps = np.finfo(float).eps
    for sweep in range(1, max_sweeps + 1):
        off = np.abs(a - np.diag(a.diagonal()))
        if off.max() <= eps * scale:
            break
        # skip rotations that cannot change anything at this precision
        skip = max(eps * scale, 0.01 * off.max()) if sweep < 4 else eps * scale
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= skip:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ g
                a[cols, :] = g.conj().T @ a[cols, :]
                v[:, cols] = v[:, cols] @ g
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        off = np.abs(a - np.diag(a.diagonal())).max()
        if off > tol * scale:
            raise ConvergenceError(
                f"Jacobi eigensolver stalled with off-diagonal {off:.3e}", max_sweeps)

    w = a.diagonal().real
    order = np.argsort(w, kind="stable")
    return w[order].copy(), v[:, order]


# Pade coefficients and 1-norm thresholds for scaling and squaring
# (degree 3, 5, 7, 9, 13), double precision.
_PADE = {
    3: [120.0, 60.0, 12.0, 1.0],
    5: [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
    7: [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
    9: [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0],
    13: [64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0],
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_uv(a: np.ndarray, degree: int):
    b = _PADE[degree]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    if degree < 13:
        powers = [ident, a2]
        while len(powers) < (degree + 1) // 2:
            powers.append(powers[-1] @ a2)
        u = sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
        v = sum(b[2 * k] * powers[k] for k in range(len(powers)))
        return a @ u, v
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return u, v


def expm(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade core."""
    a = as_matrix(m)
    _require_square(a, "m")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix exponential needs finite entries")
    a = a.astype(np.result_type(a.dtype, np.float64), copy=False)
    if a.shape[0] == 0:
        return a.copy()
    norm = float(np.max(np.sum(np.abs(a), axis=0)))
    squarings = 0
    for degree in (3, 5, 7, 9):
        if norm <= _THETA[degree]:
            break
    else:
        degree = 13
        if norm > _THETA[13]:
            squarings = int(np.ceil(np.log2(norm / _THETA[13])))
        a = a / 2.0 ** squarings
    u, v = _pade_uv(a, degree)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        r = r @ r
    return r

"""Numerical kernels: dense linear algebra, quadrature, ODE integration, fitting."""
from .linalg import (ContractError, ConvergenceError, adjoint, as_matrix, expm,
                     hermitian_eig, hermiticity_residual, matmul)
from .lsq import LeastSquaresResult, least_squares
from .ode import IntegrationError, OdeSolution, integrate_adaptive
from .quadrature import QuadratureRule, gauss_legendre

__all__ = [
    "ContractError", "ConvergenceError", "IntegrationError", "LeastSquaresResult",
    "OdeSolution", "QuadratureRule", "adjoint", "as_matrix", "expm", "gauss_legendre",
    "hermitian_eig", "hermiticity_residual", "integrate_adaptive", "least_squares",
    "matmul",
]

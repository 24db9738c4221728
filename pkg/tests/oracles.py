"""Independent numerical oracles used by the tests.

Everything here is deliberately built from first principles (explicit basis
formulas, quadrature on uniform grids) rather than from the package's own
spectral algebra, so agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np

SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)


def basis_values(N: int, x: np.ndarray) -> np.ndarray:
    """Rows: the 2N+1 normalized basis functions evaluated on x."""
    rows = [np.full_like(x, 1.0 / SQRT_2PI)]
    for n in range(1, N + 1):
        rows.append(np.sin(n * x) / SQRT_PI)
        rows.append(np.cos(n * x) / SQRT_PI)
    return np.array(rows)


def synthesize(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    N = (len(coeffs) - 1) // 2
    return coeffs @ basis_values(N, x)


def quad_grid(N: int, oversample: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite trapezoid nodes/weights on [-pi, pi], oversample*N+1 points.

    For a periodic integrand this is the rectangle rule in disguise and is
    exact for trigonometric polynomials of wavenumber < oversample*N.
    """
    m = oversample * max(N, 1) + 1
    x = np.linspace(-math.pi, math.pi, m)
    w = np.full(m, 2.0 * math.pi / (m - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def quad_integral(values: np.ndarray, w: np.ndarray) -> float:
    return float(values @ w)


def quad_project(f_values: np.ndarray, N: int, x: np.ndarray,
                 w: np.ndarray) -> np.ndarray:
    """Normalized basis coefficients of sampled function values."""
    B = basis_values(N, x)
    return B @ (w * f_values)


def fd_directional(residual, u: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    return (residual(u + eps * v) - residual(u - eps * v)) / (2.0 * eps)

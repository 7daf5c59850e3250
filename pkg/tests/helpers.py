"""Independent oracles shared by the test modules.

Everything here deliberately avoids the code paths under test: coefficients
come from FFT sampling of closed-form expressions, spline values from their
piecewise formulas, and coset arithmetic from exact rationals.
"""

import numpy as np


def fft_coeffs(func, d, N=16, tol=1e-13):
    """Fourier coefficients {k: c} of a trigonometric polynomial.

    Samples func on the uniform N^d grid of [0, 2pi)^d and reads the
    coefficients off the inverse FFT; exact (to rounding) whenever the
    maximal frequency is below N/2.  Convention: func(xi) = sum c_k e^{-i k.xi}.
    """
    axes = [2 * np.pi * np.arange(N) / N for _ in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = np.asarray(func(grid), dtype=complex)
    coeff_grid = np.fft.ifftn(vals)
    out = {}
    for idx, c in np.ndenumerate(coeff_grid):
        if abs(c) <= tol:
            continue
        k = tuple(i - N if i > N // 2 else i for i in idx)
        # ifftn gives coefficients of e^{+i k.xi}; flip to the e^{-i k.xi} convention.
        out[tuple(-v for v in k)] = complex(c)
    return out


def coeff_dict_dist(a, b):
    keys = set(a) | set(b)
    return max(abs(complex(a.get(k, 0)) - complex(b.get(k, 0))) for k in keys)


def hat(x):
    """Centered linear B-spline (degree 1)."""
    return np.maximum(0.0, 1.0 - np.abs(x))


def cubic_bspline(x):
    """Centered cardinal cubic B-spline on [-2, 2]."""
    a = np.abs(np.asarray(x, dtype=float))
    return np.where(a <= 1, (4 - 6 * a ** 2 + 3 * a ** 3) / 6,
                    np.where(a <= 2, (2 - a) ** 3 / 6, 0.0))


def sinc_squared(xi):
    """FT of the centered hat: sin^2(xi/2) / (xi/2)^2 with the limit at 0."""
    xi = np.asarray(xi, dtype=float)
    out = np.ones_like(xi)
    nz = xi != 0
    out[nz] = np.sin(xi[nz] / 2) ** 2 / (xi[nz] / 2) ** 2
    return out


# Closed forms of the worked masks, written exactly as displayed in the
# tables this library is checked against.

def mask_quincunx(xi):
    return 0.5 + 0.25 * np.cos(xi[..., 0]) + 0.25 * np.cos(xi[..., 1])


def mask_tr1_minus(xi):  # det 2, trace 1, Q2 = [[2,-1/2],[-1/2,1]]
    x, y = xi[..., 0], xi[..., 1]
    return 0.25 * (3 + 2 * np.cos(x) - np.cos(y) + 0.5 * np.sin(x) * np.sin(y))


def mask_tr1_plus(xi):  # det 2, trace 1, Q2 = [[2,1/2],[1/2,1]]
    x, y = xi[..., 0], xi[..., 1]
    return (3 + 2 * np.cos(x) + np.cos(y) + 0.5 * np.sin(x) * np.sin(y)) / 6.0


def mask_diag2(xi):  # 2I, det 4
    x, y = xi[..., 0], xi[..., 1]
    return ((2 + np.cos(x) + np.cos(y)) * (2 + np.cos(x) - np.cos(y))
            * (2 - np.cos(x) + np.cos(y))) / 16.0


def mask_univariate(xi):
    return (1 + np.cos(xi[..., 0])) / 2.0


REFERENCE_MASKS = {
    "A1": mask_quincunx,
    "A2": mask_tr1_minus,
    "A3": mask_tr1_plus,
    "A4": mask_diag2,
    "uni": mask_univariate,
}

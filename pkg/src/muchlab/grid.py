"""Uniform periodic grid on the unit circle and the spectral kernels built on it.

Fields are plain 1-D float arrays of samples at ``x_j = j/n``; the grid is
recovered from the array length.  All transforms use the real FFT, so the
k = 0 .. n/2 half of the spectrum is stored and Hermitian symmetry is implicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidFieldError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicGrid:
    """``n`` equispaced nodes on S = R/Z."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise InvalidFieldError(f"grid size must be an even integer >= 8, got {self.n!r}")

    @cached_property
    def h(self) -> float:
        return 1.0 / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers 0..n/2 of the rfft layout."""
        return np.arange(self.n // 2 + 1)

    def sample(self, func) -> np.ndarray:
        return np.asarray(func(self.nodes), dtype=float) * np.ones(self.n)

    @classmethod
    def of(cls, f) -> "PeriodicGrid":
        return _grid_for(len(f))


_GRIDS: dict[int, PeriodicGrid] = {}


def _grid_for(n: int) -> PeriodicGrid:
    # read-only cache; PeriodicGrid is immutable so sharing across threads is safe
    grid = _GRIDS.get(n)
    if grid is None:
        grid = _GRIDS.setdefault(n, PeriodicGrid(n))
    return grid


def check_field(f) -> np.ndarray:
    """Return ``f`` as a float array after validating shape and finiteness."""
    arr = np.asarray(f, dtype=float)
    if arr.ndim != 1:
        raise InvalidFieldError(f"field must be 1-D, got shape {arr.shape}")
    _grid_for(arr.size)
    if not np.all(np.isfinite(arr)):
        bad = int(np.count_nonzero(~np.isfinite(arr)))
        raise InvalidFieldError(f"field has {bad} non-finite samples")
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients ``c_k`` with ``f(x) = sum_k c_k exp(2 pi i k x)``.

    ``k`` runs over -n/2+1 .. n/2 in increasing order.
    """

    grid: PeriodicGrid
    k: np.ndarray
    coefficients: np.ndarray

    def to_field(self) -> np.ndarray:
        n = self.grid.n
        full = np.zeros(n, dtype=complex)
        full[self.k % n] = self.coefficients
        return np.fft.ifft(full).real * n


def to_spectrum(f) -> Spectrum:
    f = check_field(f)
    n = f.size
    k = np.arange(-n // 2 + 1, n // 2 + 1)
    coeffs = np.fft.fft(f)[k % n] / n
    return Spectrum(_grid_for(n), k, coeffs)


# ---------------------------------------------------------------------------
# elementary operators


def mean(f) -> float:
    """Trapezoid quadrature of ``f`` over S (the sample mean)."""
    return float(np.mean(check_field(f)))


def _symbol_deriv(n: int, order: int) -> np.ndarray:
    k = np.arange(n // 2 + 1)
    sym = (2j * np.pi * k) ** order
    if order % 2:
        sym[-1] = 0.0
    return sym


def deriv(f, order: int = 1) -> np.ndarray:
    """Spectral derivative of order 1, 2 or 3."""
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    f = check_field(f)
    fh = np.fft.rfft(f)
    return np.fft.irfft(fh * _symbol_deriv(f.size, order), n=f.size)


def _symbol_A(n: int) -> np.ndarray:
    k = np.arange(n // 2 + 1, dtype=float)
    sym = (TWO_PI * k) ** 2
    sym[0] = 1.0
    return sym


def apply_A(f) -> np.ndarray:
    """A f = mean(f) - f_xx."""
    f = check_field(f)
    return np.fft.irfft(np.fft.rfft(f) * _symbol_A(f.size), n=f.size)


def apply_Ainv(f) -> np.ndarray:
    """Inverse of :func:`apply_A`."""
    f = check_field(f)
    return np.fft.irfft(np.fft.rfft(f) / _symbol_A(f.size), n=f.size)


def dealias(f) -> np.ndarray:
    """Zero every Fourier mode with |k| > n/3."""
    f = check_field(f)
    fh = np.fft.rfft(f)
    fh[3 * np.arange(fh.size) > f.size] = 0.0
    return np.fft.irfft(fh, n=f.size)


def interpolate(f, x) -> np.ndarray | float:
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary points."""
    f = check_field(f)
    n = f.size
    xs = np.atleast_1d(np.asarray(x, dtype=float)) % 1.0
    fh = np.fft.rfft(f) / n
    k = np.arange(1, n // 2)
    phase = np.exp(TWO_PI * 1j * np.outer(xs, k))
    vals = fh[0].real + 2.0 * (phase @ fh[1:-1]).real
    vals += fh[-1].real * np.cos(np.pi * n * xs)
    if np.ndim(x) == 0:
        return float(vals[0])
    return vals


# ---------------------------------------------------------------------------
# Green function of A


def green_g(x):
    """g(x) = (frac(x) - 1/2)^2 / 2 + 23/24."""
    s = np.asarray(x, dtype=float) % 1.0
    out = 0.5 * (s - 0.5) ** 2 + 23.0 / 24.0
    return float(out) if np.ndim(out) == 0 else out


def green_gx(x):
    """Derivative of g with the coincidence convention g_x(0) = 0."""
    s = np.asarray(x, dtype=float) % 1.0
    out = np.where(s == 0.0, 0.0, s - 0.5)
    return float(out) if np.ndim(out) == 0 else out


# g on [0, 1) as polynomial coefficients in increasing degree
_G_POLY = np.array([1.0 / 8.0 + 23.0 / 24.0, -0.5, 0.5])


def _poly_fourier(poly: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Exact Fourier coefficients of a 1-periodic piecewise polynomial.

    ``poly`` gives P on [0, 1); the function is extended periodically, so
    jumps at x = 0 enter through the boundary terms of repeated integration
    by parts.
    """
    k = np.asarray(k)
    coeffs = np.zeros(k.shape, dtype=complex)
    nz = k != 0
    iw = TWO_PI * 1j * k[nz]
    p = np.polynomial.Polynomial(poly)
    for j in range(len(poly)):
        dj = p.deriv(j) if j else p
        jump = dj(0.0) - dj(1.0)
        coeffs[nz] += jump / iw ** (j + 1)
    coeffs[~nz] = p.integ()(1.0) - p.integ()(0.0)
    return coeffs


def green_coefficients(n: int, derivative: bool = False) -> np.ndarray:
    """rfft-layout Fourier coefficients of g (or g_x) for grid size ``n``."""
    k = np.arange(n // 2 + 1)
    poly = _G_POLY
    if derivative:
        poly = np.polynomial.Polynomial(_G_POLY).deriv().coef
    coeffs = _poly_fourier(poly, k)
    if derivative:
        coeffs[-1] = 0.0
    return coeffs


def convolve_g(f) -> np.ndarray:
    """Periodic convolution (g * f)(x) = int g(x - y) f(y) dy."""
    f = check_field(f)
    return np.fft.irfft(np.fft.rfft(f) * green_coefficients(f.size), n=f.size)


def convolve_gx(f) -> np.ndarray:
    """Periodic convolution with g_x."""
    f = check_field(f)
    return np.fft.irfft(np.fft.rfft(f) * green_coefficients(f.size, derivative=True), n=f.size)

"""
Fourier-spectral differentiation on a rectangular periodic grid.

Fields are real arrays whose last two axes are the grid axes (n1, n2).
Odd derivatives drop the Nyquist mode so that derivatives of real data
stay real and mixed partials commute exactly.
"""

import numpy as np

from src.models.fields import PeriodicGrid


class SpectralDifferentiator:
    """Spectral derivative operators for one PeriodicGrid."""

    def __init__(self, grid: PeriodicGrid):
        self.grid = grid
        k1 = 2 * np.pi * np.fft.fftfreq(grid.n1, d=grid.h1)
        k2 = 2 * np.pi * np.fft.rfftfreq(grid.n2, d=grid.h2)

        k1_odd = k1.copy()
        k1_odd[grid.n1 // 2] = 0.0
        k2_odd = k2.copy()
        k2_odd[-1] = 0.0

        self._k1 = k1[:, None]
        self._k2 = k2[None, :]
        self._k1_odd = k1_odd[:, None]
        self._k2_odd = k2_odd[None, :]

    @property
    def max_wavenumber_sq(self) -> float:
        """Largest |k|^2 the grid resolves (Nyquist in both directions)."""
        return float(np.max(self._k1 ** 2) + np.max(self._k2 ** 2))

    def _forward(self, w: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(w, axes=(-2, -1))

    def _backward(self, w_hat: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(w_hat, s=self.grid.shape, axes=(-2, -1))

    def gradient(self, w: np.ndarray) -> np.ndarray:
        """Return (d1 w, d2 w) stacked on a new last axis, shape w.shape + (2,)."""
        return self._gradient_hat(self._forward(np.asarray(w, dtype=float)))

    def hessian(self, w: np.ndarray) -> np.ndarray:
        """Return second derivatives, shape w.shape + (2, 2)."""
        return self._hessian_hat(self._forward(np.asarray(w, dtype=float)))

    def derivatives(self, w: np.ndarray):
        """Gradient and Hessian sharing one forward transform."""
        w_hat = self._forward(np.asarray(w, dtype=float))
        return self._gradient_hat(w_hat), self._hessian_hat(w_hat)

    def divergence(self, flux: np.ndarray) -> np.ndarray:
        """d1 flux[..., 0] + d2 flux[..., 1] for a flux stored component-last."""
        f1 = self._forward(flux[..., 0])
        f2 = self._forward(flux[..., 1])
        return self._backward(1j * self._k1_odd * f1 + 1j * self._k2_odd * f2)

    def laplacian(self, w: np.ndarray) -> np.ndarray:
        w_hat = self._forward(np.asarray(w, dtype=float))
        return self._backward(-(self._k1 ** 2 + self._k2 ** 2) * w_hat)

    def _gradient_hat(self, w_hat: np.ndarray) -> np.ndarray:
        d1 = self._backward(1j * self._k1_odd * w_hat)
        d2 = self._backward(1j * self._k2_odd * w_hat)
        return np.stack([d1, d2], axis=-1)

    def _hessian_hat(self, w_hat: np.ndarray) -> np.ndarray:
        d11 = self._backward(-(self._k1 ** 2) * w_hat)
        d22 = self._backward(-(self._k2 ** 2) * w_hat)
        d12 = self._backward(-(self._k1_odd * self._k2_odd) * w_hat)
        row1 = np.stack([d11, d12], axis=-1)
        row2 = np.stack([d12, d22], axis=-1)
        return np.stack([row1, row2], axis=-2)


_cache = {}


def differentiator(grid: PeriodicGrid) -> SpectralDifferentiator:
    """Shared differentiator per grid (grids are immutable and hashable)."""
    if grid not in _cache:
        _cache[grid] = SpectralDifferentiator(grid)
    return _cache[grid]


def integrate(grid: PeriodicGrid, w: np.ndarray):
    """Uniform-grid quadrature over the torus (spectrally exact for band-limited w)."""
    total = np.sum(w, axis=(-2, -1)) * grid.cell_area
    return float(total) if np.ndim(total) == 0 else total

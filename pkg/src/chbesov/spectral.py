"""Fourier representation of real periodic fields on the unit torus.

Fields live on the uniform grid ``x_j = j/N`` with ``N`` even. The spectral
coefficient attached to the integer wavenumber ``n`` is

    c(n) = (1/N) * sum_j f(x_j) * exp(-2i*pi*n*x_j),

which agrees with the Fourier integral against ``exp(-2i*pi*n*x)`` whenever
``f`` is band-limited to the resolved modes. Coefficients are kept in FFT
ordering ``(0, 1, ..., N/2-1, -N/2, ..., -1)``. All differential operators act
as diagonal multipliers in this basis; the Nyquist mode ``-N/2`` has no
conjugate partner on an even grid, so differentiation and antidifferentiation
zero it to keep outputs real-valued.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralField",
    "GridField",
    "wavenumbers",
    "grid_points",
    "to_spectral",
    "to_grid",
    "from_function",
    "zeros",
    "mean",
    "derivative",
    "antiderivative",
    "helmholtz_inverse",
    "helmholtz_apply",
    "dealias_band",
    "dealiased_product",
    "grid_max_abs",
    "translate",
]


def _check_size(n_modes: int) -> None:
    if n_modes < 8 or n_modes % 2 != 0:
        raise ValueError(f"n_modes must be even and at least 8, got {n_modes}")


def wavenumbers(n_modes: int) -> np.ndarray:
    """Integer wavenumbers in FFT ordering for an ``n_modes`` grid."""
    return np.fft.fftfreq(n_modes, d=1.0 / n_modes).astype(np.int64)


def grid_points(n_modes: int) -> np.ndarray:
    """Collocation points x_j = j/N on the unit torus."""
    return np.arange(n_modes) / n_modes


@dataclass(frozen=True)
class SpectralField:
    """A real periodic field stored by its Fourier coefficients.

    Parameters
    ----------
    n_modes : int
        Grid size N (even, at least 8).
    coeffs : np.ndarray
        Complex coefficients in FFT ordering, length ``n_modes``.
    """

    n_modes: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_size(self.n_modes)
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.shape != (self.n_modes,):
            raise ValueError(
                f"coefficient array has shape {arr.shape}, expected ({self.n_modes},)"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectral coefficients must be finite")
        object.__setattr__(self, "coeffs", arr)

    def coeff(self, n: int) -> complex:
        """Coefficient attached to integer wavenumber ``n``."""
        if abs(n) > self.n_modes // 2:
            raise IndexError(f"wavenumber {n} outside resolved band of N={self.n_modes}")
        return complex(self.coeffs[n % self.n_modes])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.n_modes, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.n_modes, self.coeffs - other.coeffs)

    def __rmul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.n_modes, scalar * self.coeffs)


@dataclass(frozen=True)
class GridField:
    """A real periodic field stored by its values at the collocation points."""

    n_modes: int
    values: np.ndarray

    def __post_init__(self):
        _check_size(self.n_modes)
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.n_modes,):
            raise ValueError(
                f"value array has shape {arr.shape}, expected ({self.n_modes},)"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", arr)


def to_spectral(field: GridField) -> SpectralField:
    """Forward transform, normalized so that c(n) approximates the Fourier integral."""
    return SpectralField(field.n_modes, np.fft.fft(field.values) / field.n_modes)


def to_grid(field: SpectralField) -> GridField:
    """Inverse transform; imaginary round-off from Hermitian inputs is discarded."""
    vals = np.fft.ifft(field.coeffs * field.n_modes)
    return GridField(field.n_modes, vals.real)


def from_function(fn, n_modes: int) -> SpectralField:
    """Sample ``fn`` on the collocation grid and transform."""
    return to_spectral(GridField(n_modes, fn(grid_points(n_modes))))


def zeros(n_modes: int) -> SpectralField:
    return SpectralField(n_modes, np.zeros(n_modes, dtype=np.complex128))


def mean(field: SpectralField) -> float:
    """Torus average, i.e. the n=0 coefficient."""
    return float(field.coeffs[0].real)


def derivative(field: SpectralField) -> SpectralField:
    """Spatial derivative. Exact on resolved modes, Nyquist zeroed."""
    n = wavenumbers(field.n_modes)
    out = field.coeffs * (2j * np.pi * n)
    out[field.n_modes // 2] = 0.0
    return SpectralField(field.n_modes, out)


def antiderivative(field: SpectralField) -> SpectralField:
    """Zero-mean primitive: divides by 2i*pi*n for n != 0, drops the mean.

    Satisfies derivative(antiderivative(f)) == f - mean(f) exactly on fields
    with no Nyquist content. The Nyquist slot is zeroed for the same
    real-valuedness reason as in :func:`derivative`.
    """
    n = wavenumbers(field.n_modes).astype(np.float64)
    n[0] = 1.0  # placeholder, the mean slot is overwritten below
    out = field.coeffs / (2j * np.pi * n)
    out[0] = 0.0
    out[field.n_modes // 2] = 0.0
    return SpectralField(field.n_modes, out)


def helmholtz_inverse(field: SpectralField) -> SpectralField:
    """Apply (1 - dxx)^{-1}, a positive diagonal multiplier 1/(1 + (2 pi n)^2)."""
    n = wavenumbers(field.n_modes).astype(np.float64)
    return SpectralField(field.n_modes, field.coeffs / (1.0 + (2.0 * np.pi * n) ** 2))


def helmholtz_apply(field: SpectralField) -> SpectralField:
    """Apply (1 - dxx), the exact inverse of :func:`helmholtz_inverse` on all modes."""
    n = wavenumbers(field.n_modes).astype(np.float64)
    return SpectralField(field.n_modes, field.coeffs * (1.0 + (2.0 * np.pi * n) ** 2))


def dealias_band(n_modes: int) -> int:
    """Largest K with 3K < N, the band kept by the 2/3-rule product."""
    return (n_modes - 1) // 3


def _band_mask(n_modes: int, band: int) -> np.ndarray:
    return np.abs(wavenumbers(n_modes)) <= band


def dealiased_product(f: SpectralField, g: SpectralField, dealias: bool = True) -> SpectralField:
    """Pointwise product of two fields, computed on the grid.

    With ``dealias`` set (the default) both inputs and the output are
    truncated to the band ``|n| <= dealias_band(N)``, which makes the result
    the exact truncated convolution whenever the inputs already live in that
    band. With ``dealias`` off this is the plain collocation product and
    carries the usual aliasing error for non-band-limited inputs.
    """
    if f.n_modes != g.n_modes:
        raise ValueError("cannot multiply fields on different grids")
    if dealias:
        mask = _band_mask(f.n_modes, dealias_band(f.n_modes))
        fc = np.where(mask, f.coeffs, 0.0)
        gc = np.where(mask, g.coeffs, 0.0)
    else:
        fc, gc = f.coeffs, g.coeffs
    n = f.n_modes
    prod = np.fft.ifft(fc * n).real * np.fft.ifft(gc * n).real
    out = np.fft.fft(prod) / n
    if dealias:
        out = np.where(mask, out, 0.0)
    return SpectralField(n, out)


def grid_max_abs(field: SpectralField) -> float:
    """Sup-norm of the field sampled on the collocation grid."""
    return float(np.max(np.abs(to_grid(field).values)))


def translate(field: SpectralField, shift: float) -> SpectralField:
    """Translate the field by ``shift``: f(x) -> f(x - shift)."""
    n = wavenumbers(field.n_modes)
    out = field.coeffs * np.exp(-2j * np.pi * n * shift)
    return SpectralField(field.n_modes, out)

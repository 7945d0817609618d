"""Littlewood-Paley decomposition and Besov norms on the discrete torus.

A filter bank carries a low-frequency cutoff weight ``chi`` and dyadic band
weights ``phi_q`` for q = 0..q_max, one weight per resolved wavenumber, with

    chi + sum_q phi_q == 1   on every |xi| <= N/2  (partition of unity).

Two constructions are provided. The smooth bank samples a C-infinity cutoff
chi(t) that equals 1 for t <= 1 and 0 for t >= 4/3, with band profile
phi(t) = chi(t/2) - chi(t) supported in (1, 8/3). The sharp bank uses dyadic
indicator blocks [2^q, 2^{q+1}) with the top block extended to Nyquist; after
per-wavenumber normalization only |xi| = 1 is shared (half in chi, half in
phi_0). q_max is the smallest q with 2^q >= N/4, which closes the telescoping
sum at the Nyquist mode.

Besov norms B^s_{p,r} weight the block norms by 2^{qs} and take a discrete
l^r sum; p is the Lebesgue exponent of each block (2 via coefficient energy,
inf via the grid maximum). Homogeneous norms drop chi, index blocks by the
true dyadic order (the smooth profile reaches down to q = -1), and ignore the
mean mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .spectral import SpectralField

__all__ = [
    "DyadicFilterBank",
    "BesovParams",
    "build_filter_bank",
    "block",
    "low_pass",
    "besov_norm",
    "block_norms",
]

_ALLOWED_P = (2.0, math.inf)
_ALLOWED_R = (1.0, 2.0, math.inf)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """C-infinity ramp from 0 at u<=0 to 1 at u>=1, built from exp(-1/u)."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        g1 = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return g / (g + g1)


def _chi_profile(t: np.ndarray) -> np.ndarray:
    """Smooth cutoff: 1 on t <= 1, 0 on t >= 4/3, monotone in between."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    return _smoothstep((4.0 / 3.0 - t) / (1.0 / 3.0))


def _phi_profile(t: np.ndarray) -> np.ndarray:
    """Smooth band profile chi(t/2) - chi(t), supported in (1, 8/3)."""
    return _chi_profile(np.asarray(t) / 2.0) - _chi_profile(t)


@dataclass(frozen=True)
class DyadicFilterBank:
    """Precomputed block weights for one grid size and filter kind.

    ``chi`` has shape (N,), ``phi`` has shape (q_max+1, N), both indexed by
    FFT-ordered wavenumbers. ``hom_orders``/``hom_phi`` hold the homogeneous
    blocks (chi excluded, mean always zero-weighted).
    """

    n_modes: int
    kind: str
    q_max: int
    chi: np.ndarray
    phi: np.ndarray
    hom_orders: np.ndarray
    hom_phi: np.ndarray


def build_filter_bank(n_modes: int, kind: str = "smooth") -> DyadicFilterBank:
    """Construct the dyadic filter bank for an even grid of size ``n_modes``."""
    if n_modes < 8 or n_modes % 2 != 0:
        raise ValueError(f"n_modes must be even and at least 8, got {n_modes}")
    if kind not in ("smooth", "sharp"):
        raise ValueError(f"unknown filter kind {kind!r}, expected 'smooth' or 'sharp'")

    xi = np.abs(sp.wavenumbers(n_modes)).astype(np.float64)
    q_max = 0
    while (1 << q_max) * 4 < n_modes:
        q_max += 1

    if kind == "smooth":
        chi = _chi_profile(xi)
        phi = np.vstack([_phi_profile(xi / float(1 << q)) for q in range(q_max + 1)])
        hom_orders = np.arange(-1, q_max + 1)
        hom_phi = np.vstack([_phi_profile(xi / 2.0**q) for q in hom_orders])
        hom_phi[:, 0] = 0.0
    else:
        chi = (xi <= 1.0).astype(np.float64)
        rows = []
        for q in range(q_max + 1):
            lo = float(1 << q)
            if q < q_max:
                rows.append(((xi >= lo) & (xi < 2 * lo)).astype(np.float64))
            else:
                rows.append((xi >= lo).astype(np.float64))
        phi = np.vstack(rows)
        total = chi + phi.sum(axis=0)
        chi = chi / total
        phi = phi / total
        # homogeneous blocks: plain dyadic indicators, no chi to share with
        hom_orders = np.arange(0, q_max + 1)
        hom_phi = np.vstack(rows)
        hom_phi[:, 0] = 0.0

    keep = [i for i in range(len(hom_orders)) if np.any(hom_phi[i] != 0.0)]
    return DyadicFilterBank(
        n_modes=n_modes,
        kind=kind,
        q_max=q_max,
        chi=chi,
        phi=phi,
        hom_orders=hom_orders[keep],
        hom_phi=hom_phi[keep],
    )


def _check_field(field: SpectralField, bank: DyadicFilterBank) -> None:
    if field.n_modes != bank.n_modes:
        raise ValueError(
            f"field grid {field.n_modes} does not match filter bank grid {bank.n_modes}"
        )


def block(field: SpectralField, q: int, bank: DyadicFilterBank) -> SpectralField:
    """Dyadic block Delta_q f; q = -1 is the chi block, 0..q_max the bands."""
    _check_field(field, bank)
    if q == -1:
        return SpectralField(bank.n_modes, field.coeffs * bank.chi)
    if 0 <= q <= bank.q_max:
        return SpectralField(bank.n_modes, field.coeffs * bank.phi[q])
    raise IndexError(f"block index {q} outside [-1, {bank.q_max}]")


def low_pass(field: SpectralField, q: int, bank: DyadicFilterBank) -> SpectralField:
    """Running sum S_q f = sum of Delta_p f over p <= q-1.

    S_0 is the chi block alone and S_{q_max+1} (or anything above) is the
    identity, because the weights telescope to 1 on the whole resolved band.
    """
    _check_field(field, bank)
    if q < 0:
        raise IndexError(f"low-pass order {q} must be nonnegative")
    w = bank.chi.copy()
    for p in range(0, min(q - 1, bank.q_max) + 1):
        w += bank.phi[p]
    return SpectralField(bank.n_modes, field.coeffs * w)


@dataclass(frozen=True)
class BesovParams:
    """Besov space exponents: smoothness s, block exponent p, sum exponent r."""

    s: float
    p: float = 2.0
    r: float = 1.0
    homogeneous: bool = False

    def __post_init__(self):
        if self.p not in _ALLOWED_P:
            raise ValueError(f"p must be one of {{2, inf}}, got {self.p}")
        if self.r not in _ALLOWED_R:
            raise ValueError(f"r must be one of {{1, 2, inf}}, got {self.r}")


def _rows(bank: DyadicFilterBank, homogeneous: bool):
    if homogeneous:
        return bank.hom_orders, bank.hom_phi
    orders = np.arange(-1, bank.q_max + 1)
    weights = np.vstack([bank.chi[None, :], bank.phi])
    return orders, weights


def block_norms(field: SpectralField, bank: DyadicFilterBank, p: float, homogeneous: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Per-block L^p norms; returns (block orders, norms)."""
    _check_field(field, bank)
    orders, weights = _rows(bank, homogeneous)
    pieces = weights * field.coeffs[None, :]
    if p == 2.0:
        norms = np.sqrt(np.sum(np.abs(pieces) ** 2, axis=1))
    else:
        grids = np.fft.ifft(pieces * bank.n_modes, axis=1).real
        norms = np.max(np.abs(grids), axis=1)
    return orders, norms


def besov_norm(field: SpectralField, params: BesovParams, bank: DyadicFilterBank) -> float:
    """Discrete Besov norm of a field under the given filter bank."""
    orders, norms = block_norms(field, bank, params.p, params.homogeneous)
    weighted = (2.0 ** (orders * params.s)) * norms
    if params.r == 1.0:
        return float(np.sum(weighted))
    if params.r == 2.0:
        return float(np.sqrt(np.sum(weighted**2)))
    return float(np.max(weighted)) if len(weighted) else 0.0

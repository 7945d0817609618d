"""Empirical probes of the functional inequalities behind the energy estimates.

Each probe evaluates one inequality on concrete trial fields and reports the
ratio of its left side to its right side with the constant stripped. Over a
corpus of trials the largest observed ratio is an empirical stand-in for the
constant; the point of the exercise is that these stay bounded, not that they
approximate any sharp value. Ratios are defined as 0 when the left side
vanishes.

Probes and their validity ranges:

- ``moser``: ||fg||_{B^{s1}_{p,r}} against ||f||_{B^{s1}_{p,r}} ||g||_{B^{s2}_{p,r}},
  requiring s1 <= 1/p < s2 (s2 >= 1/p allowed when r = 1) and s1 + s2 > 0.
- ``endpoint``: ||fg||_{B^{-1/2}_{2,inf}} against
  ||f||_{B^{-1/2}_{2,1}} max(||g||_{B^{1/2}_{2,inf}}, ||g||_{L^inf}).
- ``log_interp``: ||f||_{B^s_{p,1}} against
  ((1+d)/d) ||f||_{B^s_{p,inf}} (1 + log(||f||_{B^{s+d}_{p,inf}} / ||f||_{B^s_{p,inf}})).
- ``real_interp``: ||f||_{B^{t s1+(1-t)s2}_{p,1}} against
  (1/|s2-s1|)(1/t + 1/(1-t)) ||f||^t_{B^{s1}_{p,inf}} ||f||^{1-t}_{B^{s2}_{p,inf}}.
- ``commutator``: the l^r norm of (2^{q sigma} ||[v dx, Delta_q] f||_{L^p})_q
  against ||v_x||_{L^inf} ||f||_{B^sigma_{p,r}}, for 0 < sigma < 1. A constant
  advecting field commutes with every block, so the ratio is exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import littlewood as lp
from . import spectral as sp
from .littlewood import BesovParams, DyadicFilterBank
from .spectral import SpectralField

__all__ = [
    "ProbeReport",
    "PROBE_NAMES",
    "moser_ratio",
    "endpoint_ratio",
    "log_interp_ratio",
    "real_interp_ratio",
    "commutator_ratio",
    "probe_corpus",
    "inequality_probe",
]

PROBE_NAMES = ("moser", "endpoint", "log_interp", "real_interp", "commutator")

_TINY = 1e-14


@dataclass
class ProbeReport:
    """Ratios collected for one inequality over a trial corpus."""

    name: str
    ratios: list = field(default_factory=list)

    @property
    def c_emp(self) -> float:
        return max(self.ratios) if self.ratios else 0.0


def _safe_ratio(lhs: float, rhs: float, scale: float = 1.0) -> float:
    """lhs/rhs with a vanishing left side collapsed to 0.

    ``scale`` is a characteristic magnitude for the trial (a product of the
    norms involved) so that pure round-off on the left side does not get
    divided by a structurally zero right side.
    """
    if lhs <= 1e-12 * max(1.0, scale, rhs):
        return 0.0
    if rhs == 0.0:
        return math.inf
    return lhs / rhs


def moser_ratio(f: SpectralField, g: SpectralField, bank: DyadicFilterBank,
                s1: float = -0.5, s2: float = 1.5, p: float = 2.0, r: float = 1.0) -> float:
    """Product estimate ratio; validates the exponent window before evaluating."""
    over_p = 0.0 if p == math.inf else 1.0 / p
    if s1 + s2 <= 0:
        raise ValueError(f"need s1 + s2 > 0, got s1={s1}, s2={s2}")
    if not (s1 <= over_p):
        raise ValueError(f"need s1 <= 1/p, got s1={s1}, 1/p={over_p}")
    if r == 1.0:
        if s2 < over_p:
            raise ValueError(f"need s2 >= 1/p when r=1, got s2={s2}, 1/p={over_p}")
    elif not (s2 > over_p):
        raise ValueError(f"need s2 > 1/p, got s2={s2}, 1/p={over_p}")
    fg = sp.dealiased_product(f, g, dealias=False)
    lhs = lp.besov_norm(fg, BesovParams(s1, p, r), bank)
    rhs = lp.besov_norm(f, BesovParams(s1, p, r), bank) * lp.besov_norm(g, BesovParams(s2, p, r), bank)
    return _safe_ratio(lhs, rhs)


def endpoint_ratio(f: SpectralField, g: SpectralField, bank: DyadicFilterBank) -> float:
    """Endpoint bilinear estimate ratio at p = 2."""
    fg = sp.dealiased_product(f, g, dealias=False)
    lhs = lp.besov_norm(fg, BesovParams(-0.5, 2, math.inf), bank)
    g_mixed = max(
        lp.besov_norm(g, BesovParams(0.5, 2, math.inf), bank),
        sp.grid_max_abs(g),
    )
    rhs = lp.besov_norm(f, BesovParams(-0.5, 2, 1), bank) * g_mixed
    return _safe_ratio(lhs, rhs)


def log_interp_ratio(f: SpectralField, bank: DyadicFilterBank,
                     s: float = -0.5, delta: float = 0.5, p: float = 2.0) -> float:
    """Log-interpolation ratio between the r=1 and r=inf scales."""
    if delta <= 0:
        raise ValueError(f"need delta > 0, got {delta}")
    lhs = lp.besov_norm(f, BesovParams(s, p, 1), bank)
    base = lp.besov_norm(f, BesovParams(s, p, math.inf), bank)
    if base <= _TINY:
        return 0.0
    upper = lp.besov_norm(f, BesovParams(s + delta, p, math.inf), bank)
    rhs = (1.0 + delta) / delta * base * (1.0 + math.log(upper / base))
    return _safe_ratio(lhs, rhs)


def real_interp_ratio(f: SpectralField, bank: DyadicFilterBank,
                      s1: float = -0.5, s2: float = 0.5, theta: float = 0.5,
                      p: float = 2.0) -> float:
    """Real interpolation ratio at the intermediate exponent theta*s1 + (1-theta)*s2."""
    if not s1 < s2:
        raise ValueError(f"need s1 < s2, got s1={s1}, s2={s2}")
    if not 0 < theta < 1:
        raise ValueError(f"need theta in (0, 1), got {theta}")
    s_mid = theta * s1 + (1 - theta) * s2
    lhs = lp.besov_norm(f, BesovParams(s_mid, p, 1), bank)
    n1 = lp.besov_norm(f, BesovParams(s1, p, math.inf), bank)
    n2 = lp.besov_norm(f, BesovParams(s2, p, math.inf), bank)
    rhs = (1.0 / abs(s2 - s1)) * (1.0 / theta + 1.0 / (1.0 - theta)) * n1**theta * n2 ** (1 - theta)
    return _safe_ratio(lhs, rhs)


def commutator_ratio(v: SpectralField, f: SpectralField, bank: DyadicFilterBank,
                     sigma: float = 0.5, p: float = 2.0, r: float = 1.0) -> float:
    """Transport commutator ratio [v dx, Delta_q] f against ||v_x||_inf ||f||_{B^sigma}."""
    if not 0 < sigma < 1:
        raise ValueError(f"need sigma in (0, 1), got {sigma}")
    df = sp.derivative(f)
    v_df = sp.dealiased_product(v, df, dealias=False)
    pieces = []
    for q in range(-1, bank.q_max + 1):
        inner = sp.dealiased_product(v, sp.derivative(lp.block(f, q, bank)), dealias=False)
        comm = inner - lp.block(v_df, q, bank)
        if p == 2.0:
            block_norm = float(np.sqrt(np.sum(np.abs(comm.coeffs) ** 2)))
        else:
            block_norm = sp.grid_max_abs(comm)
        pieces.append(2.0 ** (q * sigma) * block_norm)
    arr = np.asarray(pieces)
    if r == 1.0:
        lhs = float(np.sum(arr))
    elif r == 2.0:
        lhs = float(np.sqrt(np.sum(arr**2)))
    else:
        lhs = float(np.max(arr))
    f_norm = lp.besov_norm(f, BesovParams(sigma, p, r), bank)
    rhs = sp.grid_max_abs(sp.derivative(v)) * f_norm
    return _safe_ratio(lhs, rhs, scale=sp.grid_max_abs(v) * f_norm)


def probe_corpus(n_modes: int, trials: int, seed: int) -> list[SpectralField]:
    """Deterministic corpus of band-limited fields with varied spectral decay.

    Fields stay inside the alias-free band so plain grid products in the
    probes are exact convolutions.
    """
    rng = np.random.default_rng(seed)
    band_cap = sp.dealias_band(n_modes) // 2
    fields = []
    for _ in range(trials):
        band = int(rng.integers(2, band_cap + 1))
        decay = float(rng.uniform(0.5, 2.5))
        coeffs = np.zeros(n_modes, dtype=np.complex128)
        for n in range(1, band + 1):
            c = (rng.normal() + 1j * rng.normal()) / (1.0 + n) ** decay
            coeffs[n] = c
            coeffs[-n] = np.conj(c)
        coeffs[0] = 0.3 * rng.normal()
        fields.append(SpectralField(n_modes, coeffs))
    return fields


def inequality_probe(name: str, trials: list[SpectralField], bank: DyadicFilterBank,
                     **params) -> ProbeReport:
    """Run one named probe over a corpus; pairs consume two fields per trial."""
    if name not in PROBE_NAMES:
        raise ValueError(f"unknown probe {name!r}, expected one of {PROBE_NAMES}")
    report = ProbeReport(name=name)
    if name in ("moser", "endpoint", "commutator"):
        pairs = zip(trials[0::2], trials[1::2])
        for a, b in pairs:
            if name == "moser":
                report.ratios.append(moser_ratio(a, b, bank, **params))
            elif name == "endpoint":
                report.ratios.append(endpoint_ratio(a, b, bank, **params))
            else:
                report.ratios.append(commutator_ratio(a, b, bank, **params))
    else:
        for a in trials:
            if name == "log_interp":
                report.ratios.append(log_interp_ratio(a, bank, **params))
            else:
                report.ratios.append(real_interp_ratio(a, bank, **params))
    return report

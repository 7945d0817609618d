"""The two-component nonlocal transport model and its damped reductions.

State variables are the momentum densities (m, n); the velocities follow by
u = (1 - dxx)^{-1} m and v = (1 - dxx)^{-1} n. With time-dependent parameters
alpha(t), gamma(t) the coupling field is

    psi = (alpha + gamma) * (v + v_x) * m - alpha * (u - u_x) * n,

its torus average psi_bar, and the mean-free transport velocity
rho = dx^{-1} psi. The evolution can be stepped in divergence form

    m_t = -( rho * m )_x,        n_t = -( rho * n )_x,

which conserves the means exactly, or in the analytically equivalent
advective form m_t = -rho * m_x - m * (psi - psi_bar).

Two damped single-velocity reductions are provided. Both advect with the
zero-mean representative of their transport product, the same gauge the
nonlocal form fixes through dx^{-1}; the textbook writing with the full
product differs from this one by a spatially uniform, time-dependent
translation (see the frame-shift tests). Under the rescaling
m -> e^{lambda t} m the damped systems become the nonlocal system with
alpha(t) = e^{-2 lambda t}, gamma = 0.

Time-dependent parameters are ``Schedule`` objects: constants, exponential
decays e^{-2 lambda t}, linearly interpolated tables, or zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .spectral import GridField, SpectralField

__all__ = [
    "State",
    "DerivedFields",
    "ConstantSchedule",
    "ExpDecaySchedule",
    "TableSchedule",
    "ZeroSchedule",
    "schedule_from_spec",
    "abs_integral",
    "abs_integral_to_inf",
    "simpson_adaptive",
    "derive_fields",
    "NonlocalDynamics",
    "DampedDynamics",
    "cosine_field",
    "fourier_modes_field",
    "gaussian_bump_field",
    "random_band_limited_field",
    "initial_from_spec",
]


# ---------------------------------------------------------------------------
# states

@dataclass(frozen=True)
class State:
    """The pair of momentum fields on a shared grid."""

    m: SpectralField
    n: SpectralField

    def __post_init__(self):
        if self.m.n_modes != self.n.n_modes:
            raise ValueError("m and n must share one grid")

    @property
    def n_modes(self) -> int:
        return self.m.n_modes

    def __add__(self, other: "State") -> "State":
        return State(self.m + other.m, self.n + other.n)

    def __sub__(self, other: "State") -> "State":
        return State(self.m - other.m, self.n - other.n)

    def __rmul__(self, scalar: float) -> "State":
        return State(scalar * self.m, scalar * self.n)

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.m.coeffs)) and np.all(np.isfinite(self.n.coeffs))
        )


@dataclass(frozen=True)
class DerivedFields:
    """Velocities and coupling fields computed from one state."""

    u: SpectralField
    v: SpectralField
    psi: SpectralField
    psi_bar: float
    rho: SpectralField


# ---------------------------------------------------------------------------
# parameter schedules

class ConstantSchedule:
    """alpha(t) = value for all t."""

    def __init__(self, value: float):
        self.value_const = float(value)

    def value(self, t: float) -> float:
        return self.value_const


class ExpDecaySchedule:
    """alpha(t) = amplitude * e^{-2 * rate * t} with rate > 0."""

    def __init__(self, amplitude: float, rate: float):
        if rate <= 0:
            raise ValueError(f"decay rate must be positive, got {rate}")
        self.amplitude = float(amplitude)
        self.rate = float(rate)

    def value(self, t: float) -> float:
        return self.amplitude * math.exp(-2.0 * self.rate * t)


class TableSchedule:
    """Piecewise-linear interpolation through (time, value) knots.

    Extrapolates with the boundary values on both sides. Knot times must be
    nonnegative and strictly increasing.
    """

    def __init__(self, times, values):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 1:
            raise ValueError("table needs matching 1-d times and values")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("table times must be strictly increasing")
        if t[0] < 0:
            raise ValueError("table times must be nonnegative")
        self.times = t
        self.values = v

    def value(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))


class ZeroSchedule:
    """Identically zero."""

    def value(self, t: float) -> float:
        return 0.0


def schedule_from_spec(spec: dict):
    """Build a schedule from its JSON-style description."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("schedule spec must be a mapping with a 'type' key")
    kind = spec["type"]
    if kind == "constant":
        return ConstantSchedule(spec["value"])
    if kind == "exp_decay":
        return ExpDecaySchedule(spec["amplitude"], spec["rate"])
    if kind == "table":
        pts = spec["points"]
        return TableSchedule([p[0] for p in pts], [p[1] for p in pts])
    if kind == "zero":
        return ZeroSchedule()
    raise ValueError(f"unknown schedule type {kind!r}")


def simpson_adaptive(fn, a: float, b: float, tol: float = 1e-12, max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature with absolute tolerance ``tol``."""
    if b <= a:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        x1 = 0.5 * (x0 + x2)
        lm = 0.5 * (x0 + x1)
        rm = 0.5 * (x1 + x2)
        flm, frm = fn(lm), fn(rm)
        left = simpson(x0, x1, f0, flm, f1)
        right = simpson(x1, x2, f1, frm, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(x0, x1, f0, flm, f1, left, eps / 2.0, depth + 1) + recurse(
            x1, x2, f1, frm, f2, right, eps / 2.0, depth + 1
        )

    mid = 0.5 * (a + b)
    fa, fm, fb = fn(a), fn(mid), fn(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def _table_abs_integral(sched: TableSchedule, t: float) -> float:
    """Exact integral of |value| over [0, t] for a piecewise-linear table."""
    knots = list(sched.times)
    vals = list(sched.values)
    # constant extrapolation segments on both sides
    if knots[0] > 0:
        knots.insert(0, 0.0)
        vals.insert(0, vals[0])
    if knots[-1] < t:
        knots.append(t)
        vals.append(vals[-1])
    total = 0.0
    for (t0, v0), (t1, v1) in zip(zip(knots, vals), zip(knots[1:], vals[1:])):
        lo, hi = max(t0, 0.0), min(t1, t)
        if hi <= lo:
            continue
        dv = (v1 - v0) / (t1 - t0)
        va = v0 + dv * (lo - t0)
        vb = v0 + dv * (hi - t0)
        if va * vb < 0:
            # split at the sign change, both pieces are triangles
            tc = lo + abs(va) / (abs(va) + abs(vb)) * (hi - lo)
            total += 0.5 * abs(va) * (tc - lo) + 0.5 * abs(vb) * (hi - tc)
        else:
            total += 0.5 * (abs(va) + abs(vb)) * (hi - lo)
    return total


def abs_integral(sched, t: float, tol: float = 1e-12) -> float:
    """Integral of |schedule| over [0, t]; tables are integrated exactly."""
    if t <= 0:
        return 0.0
    if isinstance(sched, ZeroSchedule):
        return 0.0
    if isinstance(sched, TableSchedule):
        return _table_abs_integral(sched, t)
    return simpson_adaptive(lambda s: abs(sched.value(s)), 0.0, t, tol)


def abs_integral_to_inf(sched, tol: float = 1e-12) -> float:
    """Integral of |schedule| over [0, inf); inf when the tail does not decay."""
    if isinstance(sched, ZeroSchedule):
        return 0.0
    if isinstance(sched, ConstantSchedule):
        return 0.0 if sched.value_const == 0.0 else math.inf
    if isinstance(sched, TableSchedule):
        if sched.values[-1] != 0.0:
            return math.inf
        return _table_abs_integral(sched, float(sched.times[-1]))
    if isinstance(sched, ExpDecaySchedule):
        if sched.amplitude == 0.0:
            return 0.0
        # quadrature horizon where the remaining tail is below 1e-13
        horizon = math.log(abs(sched.amplitude) / (2.0 * sched.rate * 1e-13) + 1.0) / (
            2.0 * sched.rate
        )
        return simpson_adaptive(lambda s: abs(sched.value(s)), 0.0, horizon, tol)
    raise TypeError(f"unsupported schedule {type(sched).__name__}")


# ---------------------------------------------------------------------------
# derived fields and right-hand sides

def derive_fields(state: State, alpha: float, gamma: float, dealias: bool = True) -> DerivedFields:
    """Velocities, coupling field psi, its mean, and the transport velocity rho."""
    u = sp.helmholtz_inverse(state.m)
    v = sp.helmholtz_inverse(state.n)
    v_plus = v + sp.derivative(v)
    u_minus = u - sp.derivative(u)
    first = sp.dealiased_product(v_plus, state.m, dealias)
    second = sp.dealiased_product(u_minus, state.n, dealias)
    psi = (alpha + gamma) * first - alpha * second
    psi_bar = sp.mean(psi)
    rho = sp.antiderivative(psi)
    return DerivedFields(u=u, v=v, psi=psi, psi_bar=psi_bar, rho=rho)


def _remove_mean(f: SpectralField) -> SpectralField:
    out = f.coeffs.copy()
    out[0] = 0.0
    return SpectralField(f.n_modes, out)


class NonlocalDynamics:
    """Right-hand side of the two-component nonlocal system.

    Parameters
    ----------
    alpha, gamma : schedules
        Time-dependent coefficients.
    form : str
        "divergence" steps m_t = -(rho m)_x; "advective" steps
        m_t = -rho m_x - m (psi - psi_bar). On band-limited states the two
        agree to round-off because differentiation commutes with the
        dealiasing truncation.
    dealias : bool
        Apply the 2/3-rule truncation inside products.
    rho_shift : float
        Constant added to the transport velocity; nonzero values realize the
        gauge freedom of dx^{-1} and translate the solution in space.
    """

    def __init__(self, alpha, gamma, form: str = "divergence", dealias: bool = True,
                 rho_shift: float = 0.0):
        if form not in ("divergence", "advective"):
            raise ValueError(f"unknown form {form!r}")
        self.alpha = alpha
        self.gamma = gamma
        self.form = form
        self.dealias = dealias
        self.rho_shift = float(rho_shift)

    def derived(self, state: State, t: float) -> DerivedFields:
        return derive_fields(state, self.alpha.value(t), self.gamma.value(t), self.dealias)

    def parameter_weight(self, t: float) -> float:
        return abs(self.alpha.value(t)) + abs(self.gamma.value(t))

    def _shifted_rho(self, d: DerivedFields) -> SpectralField:
        if self.rho_shift == 0.0:
            return d.rho
        out = d.rho.coeffs.copy()
        out[0] += self.rho_shift
        return SpectralField(d.rho.n_modes, out)

    def rhs(self, state: State, t: float, derived: DerivedFields | None = None) -> State:
        d = derived if derived is not None else self.derived(state, t)
        rho = self._shifted_rho(d)
        if self.form == "divergence":
            dm = -1.0 * sp.derivative(sp.dealiased_product(rho, state.m, self.dealias))
            dn = -1.0 * sp.derivative(sp.dealiased_product(rho, state.n, self.dealias))
        else:
            psi0 = _remove_mean(d.psi)
            dm = -1.0 * sp.dealiased_product(rho, sp.derivative(state.m), self.dealias) \
                - sp.dealiased_product(state.m, psi0, self.dealias)
            dn = -1.0 * sp.dealiased_product(rho, sp.derivative(state.n), self.dealias) \
                - sp.dealiased_product(state.n, psi0, self.dealias)
        return State(dm, dn)

    def step_controls(self, state: State, t: float) -> tuple[float, float]:
        """Sup norms of the transport velocity and of the reaction field."""
        d = self.derived(state, t)
        vel = sp.grid_max_abs(self._shifted_rho(d))
        reaction = sp.grid_max_abs(_remove_mean(d.psi))
        return vel, reaction


class DampedDynamics:
    """Right-hand side of the damped single-velocity reductions.

    ``form="forq"`` advects m with the zero-mean part of u^2 - u_x^2 and
    requires n == m; ``form="sqq"`` advects both components with the
    zero-mean part of (u - u_x)(v + v_x). Both add the linear decay
    -lambda m. The blow-up functionals of a damped run use weight 1 with the
    evolved fields, which equals the transformed-system integrand
    e^{-2 lambda t} || e^{lambda t} m ||^2 identically.
    """

    def __init__(self, lam: float, form: str = "forq", dealias: bool = True):
        if form not in ("forq", "sqq"):
            raise ValueError(f"unknown damped form {form!r}")
        if lam < 0:
            raise ValueError(f"damping rate must be nonnegative, got {lam}")
        self.lam = float(lam)
        self.form = form
        self.dealias = dealias

    def parameter_weight(self, t: float) -> float:
        return 1.0

    def _transport(self, state: State) -> SpectralField:
        u = sp.helmholtz_inverse(state.m)
        if self.form == "forq":
            mism = np.max(np.abs(state.m.coeffs - state.n.coeffs))
            scale = max(np.max(np.abs(state.m.coeffs)), 1.0)
            if mism > 1e-10 * scale:
                raise ValueError("single-component reduction requires n identical to m")
            ux = sp.derivative(u)
            w = sp.dealiased_product(u, u, self.dealias) - sp.dealiased_product(ux, ux, self.dealias)
        else:
            v = sp.helmholtz_inverse(state.n)
            w = sp.dealiased_product(u - sp.derivative(u), v + sp.derivative(v), self.dealias)
        return _remove_mean(w)

    def rhs(self, state: State, t: float) -> State:
        w0 = self._transport(state)
        dm = -1.0 * sp.derivative(sp.dealiased_product(w0, state.m, self.dealias)) - self.lam * state.m
        dn = -1.0 * sp.derivative(sp.dealiased_product(w0, state.n, self.dealias)) - self.lam * state.n
        return State(dm, dn)

    def step_controls(self, state: State, t: float) -> tuple[float, float]:
        w0 = self._transport(state)
        return sp.grid_max_abs(w0), sp.grid_max_abs(sp.derivative(w0)) + self.lam


# ---------------------------------------------------------------------------
# initial data

def cosine_field(n_modes: int, wavenumber: int = 1, amplitude: float = 1.0,
                 offset: float = 0.0) -> SpectralField:
    """amplitude * cos(2 pi k x) + offset."""
    _validate_mode(wavenumber, n_modes)
    return sp.from_function(
        lambda x: amplitude * np.cos(2 * np.pi * wavenumber * x) + offset, n_modes
    )


def fourier_modes_field(n_modes: int, modes) -> SpectralField:
    """Sum of amplitude * cos(2 pi n x + phase) terms given as (n, amp, phase)."""
    coeffs = np.zeros(n_modes, dtype=np.complex128)
    for n, amp, phase in modes:
        n = int(n)
        _validate_mode(n, n_modes)
        half = 0.5 * amp * np.exp(1j * phase)
        if n == 0:
            coeffs[0] += amp * math.cos(phase)
        else:
            coeffs[n % n_modes] += half
            coeffs[(-n) % n_modes] += np.conj(half)
    return SpectralField(n_modes, coeffs)


def gaussian_bump_field(n_modes: int, center: float = 0.5, width: float = 0.05,
                        amplitude: float = 1.0) -> SpectralField:
    """Periodized Gaussian bump; images are summed until they fall below 1e-16."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    x = sp.grid_points(n_modes)
    vals = np.zeros(n_modes)
    wrap = 3 + int(math.ceil(9.0 * width))
    for k in range(-wrap, wrap + 1):
        vals += np.exp(-((x - center + k) ** 2) / (2.0 * width**2))
    return to_spectral_scaled(vals, amplitude, n_modes)


def to_spectral_scaled(vals: np.ndarray, amplitude: float, n_modes: int) -> SpectralField:
    return sp.to_spectral(GridField(n_modes, amplitude * vals))


def random_band_limited_field(n_modes: int, max_mode: int, amplitude: float = 1.0,
                              seed: int = 0) -> SpectralField:
    """Seeded random real field supported on 1 <= |n| <= max_mode."""
    _validate_mode(max_mode, n_modes)
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(n_modes, dtype=np.complex128)
    for n in range(1, max_mode + 1):
        c = rng.normal() + 1j * rng.normal()
        coeffs[n] = c
        coeffs[-n] = np.conj(c)
    top = np.max(np.abs(coeffs))
    if top > 0:
        coeffs *= amplitude / top
    return SpectralField(n_modes, coeffs)


def _validate_mode(n: int, n_modes: int) -> None:
    if abs(int(n)) > n_modes // 2:
        raise ValueError(
            f"wavenumber {n} beyond the resolved band of an N={n_modes} grid"
        )


def initial_from_spec(spec: dict, n_modes: int) -> SpectralField:
    """Build an initial field from its JSON-style description."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("initial field spec must be a mapping with a 'type' key")
    kind = spec["type"]
    if kind == "cosine":
        return cosine_field(
            n_modes,
            wavenumber=int(spec.get("wavenumber", 1)),
            amplitude=float(spec.get("amplitude", 1.0)),
            offset=float(spec.get("offset", 0.0)),
        )
    if kind == "fourier_modes":
        return fourier_modes_field(n_modes, spec["modes"])
    if kind == "gaussian_bump":
        return gaussian_bump_field(
            n_modes,
            center=float(spec.get("center", 0.5)),
            width=float(spec.get("width", 0.05)),
            amplitude=float(spec.get("amplitude", 1.0)),
        )
    if kind == "random_band_limited":
        return random_band_limited_field(
            n_modes,
            max_mode=int(spec["max_mode"]),
            amplitude=float(spec.get("amplitude", 1.0)),
            seed=int(spec.get("seed", 0)),
        )
    if kind == "zero":
        return sp.zeros(n_modes)
    raise ValueError(f"unknown initial field type {kind!r}")

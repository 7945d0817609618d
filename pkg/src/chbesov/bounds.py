"""Closed-form bounds from the well-posedness and blow-up theory.

Everything is driven by two ingredients: the accumulated parameter mass

    A(0, t) = integral over [0, t] of |alpha| + |gamma|,

and the growth function

    hbar(x, A, C) = (x + 8 C^3 x^3 A) * exp(4 C^3 x^2 A).

With F0 the (B^{1/2}_{2,1} sum) size of the data, the guaranteed existence
window is the largest T with A(0, T) <= a*, where a* solves the fixed-point
condition a = ln 2 / (12 C^3 hbar(F0, a, C)^2); the approximate solutions
stay below 2 C hbar(F0, a*, C) on that window. A simpler sufficient global
condition is A(0, inf) <= ln 2 / (24 C^3 F0^2). For the damped reductions
A(0, inf) = 1/(2 lambda), so the smallest sufficient damping rate is
lambda* = 1/(2 a*).

Two lower bounds for a numerically detected blow-up time come from the
continuation criteria: A(0, T) <= 1/(C (||m0|| + ||n0||)^2) with critical
B^{1/2}_{2,1} norms, and A(0, T) <= 1/(C (sqrt(2) e + ||m0|| + ||n0||)^6)
with B^{1/2+eps}_{2,r} norms.

The constant C defaults to 1 and can be overridden per bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import littlewood as lp
from . import model as md
from . import stepping as stp
from .littlewood import BesovParams, DyadicFilterBank
from .model import State, abs_integral, abs_integral_to_inf

__all__ = [
    "hbar",
    "accumulated_parameter",
    "accumulated_parameter_inf",
    "lifespan_fixed_point",
    "lifespan_condition",
    "global_sufficient_condition",
    "uniform_bound",
    "blowup_lower_bound_critical",
    "blowup_lower_bound_noncritical",
    "lambda_threshold",
    "BoundsReport",
    "build_bounds_report",
    "continuity_probe",
]


def hbar(x: float, accumulated: float, constant: float = 1.0) -> float:
    """Growth function (x + 8 C^3 x^3 A) e^{4 C^3 x^2 A}."""
    c3 = constant**3
    return (x + 8.0 * c3 * x**3 * accumulated) * math.exp(4.0 * c3 * x**2 * accumulated)


def accumulated_parameter(alpha, gamma, t: float) -> float:
    """A(0, t), the absolute parameter mass up to time t."""
    return abs_integral(alpha, t) + abs_integral(gamma, t)


def accumulated_parameter_inf(alpha, gamma) -> float:
    """A(0, inf); infinite when either schedule fails to decay."""
    return abs_integral_to_inf(alpha) + abs_integral_to_inf(gamma)


def _bisect_increasing(fn, lo: float, hi: float, rel_tol: float = 1e-14,
                       iters: int = 200) -> float:
    """Root of an increasing function bracketed by [lo, hi]."""
    flo, fhi = fn(lo), fn(hi)
    if flo > 0 or fhi < 0:
        raise ValueError("bisection bracket does not straddle the root")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * abs(hi):
            break
    return 0.5 * (lo + hi)


def lifespan_fixed_point(f0: float, constant: float = 1.0) -> float:
    """The threshold a* solving a = ln 2 / (12 C^3 hbar(f0, a, C)^2).

    Returns inf for zero data (the condition never binds).
    """
    if f0 < 0:
        raise ValueError(f"data size must be nonnegative, got {f0}")
    if f0 == 0.0:
        return math.inf

    def g(a):
        try:
            h = hbar(f0, a, constant)
            return a - math.log(2.0) / (12.0 * constant**3 * h**2)
        except OverflowError:
            # hbar beyond float range means the subtracted term is zero
            return a

    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
    return _bisect_increasing(g, 0.0, hi)


def _invert_accumulation(alpha, gamma, target: float) -> float:
    """Largest t with A(0, t) <= target; inf when the total mass stays below it."""
    if accumulated_parameter_inf(alpha, gamma) <= target:
        return math.inf
    hi = 1.0
    while accumulated_parameter(alpha, gamma, hi) < target:
        hi *= 2.0
    return _bisect_increasing(
        lambda t: accumulated_parameter(alpha, gamma, t) - target, 0.0, hi
    )


def lifespan_condition(m0, n0, alpha, gamma, bank: DyadicFilterBank,
                       constant: float = 1.0) -> float:
    """Guaranteed existence time for the given data and parameter schedules."""
    b12 = BesovParams(0.5, 2, 1)
    f0 = lp.besov_norm(m0, b12, bank) + lp.besov_norm(n0, b12, bank)
    return _invert_accumulation(alpha, gamma, lifespan_fixed_point(f0, constant))


def global_sufficient_condition(f0: float, constant: float = 1.0) -> float:
    """Total parameter mass below ln 2/(24 C^3 F0^2) guarantees a global solution."""
    if f0 == 0.0:
        return math.inf
    return math.log(2.0) / (24.0 * constant**3 * f0**2)


def uniform_bound(f0: float, accumulated: float, constant: float = 1.0) -> float:
    """Bound 2 C hbar(F0, A, C) on the X_{1/2,1} size of the approximations."""
    return 2.0 * constant * hbar(f0, accumulated, constant)


def blowup_lower_bound_critical(m0, n0, alpha, gamma, bank: DyadicFilterBank,
                                constant: float = 1.0) -> float:
    """Largest T with A(0,T) <= 1/(C (||m0|| + ||n0||)^2), critical norms."""
    b12 = BesovParams(0.5, 2, 1)
    total = lp.besov_norm(m0, b12, bank) + lp.besov_norm(n0, b12, bank)
    if total == 0.0:
        return math.inf
    return _invert_accumulation(alpha, gamma, 1.0 / (constant * total**2))


def blowup_lower_bound_noncritical(m0, n0, alpha, gamma, bank: DyadicFilterBank,
                                   eps: float = 0.25, r: float = 2.0,
                                   constant: float = 1.0) -> float:
    """Largest T with A(0,T) <= 1/(C (sqrt(2) e + ||m0|| + ||n0||)^6).

    Norms are B^{1/2+eps}_{2,r} with eps in (0, 1/2); zero data leaves the
    floor 1/(8 e^6 C).
    """
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    params = BesovParams(0.5 + eps, 2, r)
    total = lp.besov_norm(m0, params, bank) + lp.besov_norm(n0, params, bank)
    threshold = 1.0 / (constant * (math.sqrt(2.0) * math.e + total) ** 6)
    return _invert_accumulation(alpha, gamma, threshold)


def lambda_threshold(norm_total: float, constant: float = 1.0) -> float:
    """Smallest damping rate that certifies a global damped solution.

    For the damped reductions A(0, inf) = 1/(2 lambda), so the global
    condition A(0, inf) <= a* is exactly lambda >= 1/(2 a*). Zero data needs
    no damping at all.
    """
    if norm_total == 0.0:
        return 0.0
    return 1.0 / (2.0 * lifespan_fixed_point(norm_total, constant))


@dataclass
class BoundsReport:
    """Every closed-form bound evaluated for one configuration."""

    f0: float
    accumulated_inf: float
    accumulated_at_lifespan: float
    hbar_at_f0: float
    lifespan: float
    uniform_bound: float
    global_condition_threshold: float
    global_condition_satisfied: bool
    blowup_critical: float
    blowup_noncritical: float
    eps: float
    r: float
    lambda_threshold: float | None = None

    def as_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float) and math.isinf(v):
                return "inf"
            return v

        return {k: clean(v) for k, v in self.__dict__.items()}


def build_bounds_report(m0, n0, alpha, gamma, bank: DyadicFilterBank,
                        constant: float = 1.0, eps: float = 0.25, r: float = 2.0,
                        overrides: dict | None = None,
                        damped_norm_total: float | None = None) -> BoundsReport:
    """Evaluate all bounds; ``overrides`` maps bound names to replacement C values.

    Recognized override keys: "lifespan", "critical", "noncritical",
    "lambda", "uniform". ``damped_norm_total`` switches on the damping-rate
    threshold using that data size.
    """
    overrides = overrides or {}

    def c_for(name):
        return float(overrides.get(name, constant))

    b12 = BesovParams(0.5, 2, 1)
    f0 = lp.besov_norm(m0, b12, bank) + lp.besov_norm(n0, b12, bank)

    c_life = c_for("lifespan")
    a_star = lifespan_fixed_point(f0, c_life)
    lifespan = _invert_accumulation(alpha, gamma, a_star)
    acc_inf = accumulated_parameter_inf(alpha, gamma)
    acc_used = min(a_star, acc_inf) if f0 > 0 else acc_inf
    if math.isinf(acc_used):
        acc_used = 0.0

    c_uni = c_for("uniform")
    report = BoundsReport(
        f0=f0,
        accumulated_inf=acc_inf,
        accumulated_at_lifespan=acc_used,
        hbar_at_f0=hbar(f0, acc_used, c_uni),
        lifespan=lifespan,
        uniform_bound=uniform_bound(f0, acc_used, c_uni),
        global_condition_threshold=global_sufficient_condition(f0, c_life),
        global_condition_satisfied=bool(
            acc_inf <= global_sufficient_condition(f0, c_life)
        ),
        blowup_critical=blowup_lower_bound_critical(m0, n0, alpha, gamma, bank, c_for("critical")),
        blowup_noncritical=blowup_lower_bound_noncritical(
            m0, n0, alpha, gamma, bank, eps, r, c_for("noncritical")
        ),
        eps=eps,
        r=r,
    )
    if damped_norm_total is not None:
        report.lambda_threshold = lambda_threshold(damped_norm_total, c_for("lambda"))
    return report


def continuity_probe(initial: State, dynamics_factory, cfg, bank: DyadicFilterBank,
                     deltas=(1e-2, 1e-3, 1e-4), direction_seed: int = 42,
                     monitor=None) -> list[dict]:
    """Data-to-solution continuity check under matched step sequences.

    Perturbs both components by delta times a fixed band-limited field of
    unit B^{1/2}_{2,1} norm, replays the baseline step sequence, and reports
    the sup-in-time solution-map distances in X_{-1/2,1} and X_{1/2,1}.
    """
    from dataclasses import replace

    if cfg.snapshot_every < 1:
        cfg = replace(cfg, snapshot_every=1)
    base = stp.run(initial, dynamics_factory(), cfg, bank, monitor=monitor)
    if base.status != "completed":
        raise RuntimeError(f"baseline run did not complete (status {base.status})")
    n_modes = initial.n_modes
    direction = md.random_band_limited_field(
        n_modes, max_mode=max(2, n_modes // 8), amplitude=1.0, seed=direction_seed
    )
    unit = 1.0 / lp.besov_norm(direction, BesovParams(0.5, 2, 1), bank)
    direction = unit * direction

    lo = BesovParams(-0.5, 2, 1)
    hi = BesovParams(0.5, 2, 1)
    rows = []
    for delta in deltas:
        shifted = State(initial.m + delta * direction, initial.n + delta * direction)
        pert = stp.run(shifted, dynamics_factory(), cfg, bank,
                       monitor=monitor, dt_sequence=base.dt_sequence)
        flagged = pert.status != "completed"
        dist_lo = 0.0
        dist_hi = 0.0
        for (_, _, a), (_, _, b) in zip(base.snapshots, pert.snapshots):
            dm = a.m - b.m
            dn = a.n - b.n
            dist_lo = max(dist_lo, lp.besov_norm(dm, lo, bank) + lp.besov_norm(dn, lo, bank))
            dist_hi = max(dist_hi, lp.besov_norm(dm, hi, bank) + lp.besov_norm(dn, hi, bank))
        rows.append(
            {"delta": float(delta), "dist_low": dist_lo, "dist_high": dist_hi, "flagged": flagged}
        )
    return rows

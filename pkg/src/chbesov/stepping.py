"""Time integration: classical RK4, adaptive steps, blow-up monitoring,
and the linear iteration scheme that approximates the nonlinear flow.

The step size is chosen from three ceilings,

    dt = min(dt_max, cfl * (1/N) / ||velocity||_inf, cfl / ||reaction||_inf),

where the velocity and reaction sup norms come from the dynamics object. A
run ends in one of three states: "completed", "blowup_detected" (one of the
monitor signals fired; the last stable time is reported), or "aborted"
(non-finite values appeared). Recorded step sequences can be replayed so two
runs share identical sample times.

The iteration scheme freezes the transport coefficients of the previous
iterate. Iterate 1 is constant in time (the coarsest low-pass of the data),
and iterate k+1 solves the linear transport equation driven by iterate k,
starting from the order-(k+1) low-pass of the data. Each iterate stores its
RK4 stage states so the next iterate can evaluate frozen coefficients at the
matching stage times; the fixed point of this discrete map is exactly the
direct nonlinear RK4 trajectory in advective form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import littlewood as lp
from . import model as md
from . import spectral as sp
from .littlewood import BesovParams, DyadicFilterBank
from .model import State

__all__ = [
    "IntegratorConfig",
    "BlowupMonitor",
    "TimeSeries",
    "SERIES_COLUMNS",
    "RunResult",
    "rk4_step",
    "adaptive_dt",
    "tail_ratio",
    "run",
    "FriedrichsResult",
    "friedrichs_iterate",
]

SERIES_COLUMNS = (
    "t",
    "mass_m",
    "mass_n",
    "psi_bar",
    "B12_21_m",
    "B12_21_n",
    "hB0_inf1_m",
    "hB0_inf1_n",
    "hB0_inf2_m",
    "hB0_inf2_n",
    "Linf_m",
    "Linf_n",
    "dt",
    "tail_ratio",
    "blowup_integral_thm15",
    "blowup_integral_thm17",
)


@dataclass
class IntegratorConfig:
    """Step-size and output cadence settings."""

    t_end: float
    dt_max: float = 0.01
    dt_min: float = 1e-10
    cfl: float = 0.4
    dealias: bool = True
    series_every: int = 1
    snapshot_every: int = 0

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt_min >= self.dt_max:
            raise ValueError("dt_min must be smaller than dt_max")
        if self.series_every < 1:
            raise ValueError("series_every must be at least 1")


@dataclass
class BlowupMonitor:
    """Thresholds for the three blow-up signals."""

    linf_threshold: float = 1e6
    tail_ratio_threshold: float = 1e-3


@dataclass
class TimeSeries:
    """Columnar time series with the fixed diagnostic schema."""

    data: dict = field(default_factory=lambda: {c: [] for c in SERIES_COLUMNS})

    def record(self, **kwargs):
        if set(kwargs) != set(SERIES_COLUMNS):
            missing = set(SERIES_COLUMNS) ^ set(kwargs)
            raise ValueError(f"series row does not match schema: {sorted(missing)}")
        for k, v in kwargs.items():
            self.data[k].append(float(v))

    def column(self, name: str) -> list:
        return self.data[name]

    def __len__(self):
        return len(self.data["t"])


@dataclass
class RunResult:
    status: str
    series: TimeSeries
    snapshots: list
    dt_sequence: list
    final_state: State
    final_time: float
    t_star_num: float | None = None
    steps: int = 0


def rk4_step(state: State, t: float, dt: float, rhs) -> State:
    """One classical Runge-Kutta step of the nonautonomous system."""
    k1 = rhs(state, t)
    k2 = rhs(state + (0.5 * dt) * k1, t + 0.5 * dt)
    k3 = rhs(state + (0.5 * dt) * k2, t + 0.5 * dt)
    k4 = rhs(state + dt * k3, t + dt)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def adaptive_dt(dynamics, state: State, t: float, cfg: IntegratorConfig) -> float:
    """Step ceiling from the velocity CFL and the reaction rate."""
    vel, reaction = dynamics.step_controls(state, t)
    dt = cfg.dt_max
    if vel > 0:
        dt = min(dt, cfg.cfl / (state.n_modes * vel))
    if reaction > 0:
        dt = min(dt, cfg.cfl / reaction)
    return dt


def tail_ratio(state: State, dealias: bool = True) -> float:
    """Fraction of fluctuation energy in the top third of the active band.

    With dealiasing on, the active band is the 2/3-rule band K (nothing above
    it can grow), so the tail starts at ceil(2K/3); with dealiasing off the
    active band is the full spectrum. The mean mode is excluded from the
    energy count.
    """
    N = state.n_modes
    band = sp.dealias_band(N) if dealias else N // 2
    cut = math.ceil(2.0 * band / 3.0)
    xi = np.abs(sp.wavenumbers(N))
    energy = np.abs(state.m.coeffs) ** 2 + np.abs(state.n.coeffs) ** 2
    total = float(np.sum(energy[xi > 0]))
    if total == 0.0:
        return 0.0
    tail = float(np.sum(energy[xi >= cut]))
    return tail / total


def _hom_sq_norms(state: State, bank: DyadicFilterBank) -> tuple[float, float]:
    """Sum over components of squared homogeneous B^0_{inf,1} and B^0_{inf,2} norms."""
    p1 = BesovParams(0.0, math.inf, 1, homogeneous=True)
    p2 = BesovParams(0.0, math.inf, 2, homogeneous=True)
    a = lp.besov_norm(state.m, p1, bank) ** 2 + lp.besov_norm(state.n, p1, bank) ** 2
    b = lp.besov_norm(state.m, p2, bank) ** 2 + lp.besov_norm(state.n, p2, bank) ** 2
    return a, b


def run(initial: State, dynamics, cfg: IntegratorConfig, bank: DyadicFilterBank,
        monitor: BlowupMonitor | None = None, dt_sequence: list | None = None) -> RunResult:
    """Integrate the dynamics to t_end, recording diagnostics.

    When ``dt_sequence`` is given its steps are replayed verbatim, which is
    how matched-step comparisons between two systems are arranged.
    """
    if monitor is None:
        monitor = BlowupMonitor()
    series = TimeSeries()
    snapshots = [(0, 0.0, initial)]
    taken = []
    state = initial
    t = 0.0
    steps = 0
    status = "completed"
    t_star = None
    b12 = BesovParams(0.5, 2, 1)

    # running blow-up integrals, updated by the trapezoid rule per step
    acc15 = 0.0
    acc17 = 0.0
    sq1, sq2 = _hom_sq_norms(state, bank)
    weight = dynamics.parameter_weight(t)
    integrand15 = weight * sq1
    integrand17 = weight * sq2

    def record_row(dt_value):
        d = dynamics.derived(state, t) if hasattr(dynamics, "derived") else None
        series.record(
            t=t,
            mass_m=sp.mean(state.m),
            mass_n=sp.mean(state.n),
            psi_bar=d.psi_bar if d is not None else 0.0,
            B12_21_m=lp.besov_norm(state.m, b12, bank),
            B12_21_n=lp.besov_norm(state.n, b12, bank),
            hB0_inf1_m=lp.besov_norm(state.m, BesovParams(0.0, math.inf, 1, homogeneous=True), bank),
            hB0_inf1_n=lp.besov_norm(state.n, BesovParams(0.0, math.inf, 1, homogeneous=True), bank),
            hB0_inf2_m=lp.besov_norm(state.m, BesovParams(0.0, math.inf, 2, homogeneous=True), bank),
            hB0_inf2_n=lp.besov_norm(state.n, BesovParams(0.0, math.inf, 2, homogeneous=True), bank),
            Linf_m=sp.grid_max_abs(state.m),
            Linf_n=sp.grid_max_abs(state.n),
            dt=dt_value,
            tail_ratio=tail_ratio(state, cfg.dealias),
            blowup_integral_thm15=acc15,
            blowup_integral_thm17=acc17,
        )

    tiny = 1e-12 * cfg.t_end
    while t < cfg.t_end - tiny:
        if dt_sequence is not None:
            if steps >= len(dt_sequence):
                break
            dt = float(dt_sequence[steps])
        else:
            dt = adaptive_dt(dynamics, state, t, cfg)
            if dt < cfg.dt_min:
                status = "blowup_detected"
                t_star = t
                break
            dt = min(dt, cfg.t_end - t)

        if steps % cfg.series_every == 0:
            record_row(dt)

        try:
            new_state = rk4_step(state, t, dt, dynamics.rhs)
        except ValueError as err:
            # field construction rejects non-finite coefficients, which is how
            # an overflowing step announces itself; anything else is a real bug
            if "finite" not in str(err):
                raise
            status = "aborted"
            break
        if not new_state.is_finite():
            status = "aborted"
            break

        # advance the blow-up integrals
        new_t = t + dt
        sq1, sq2 = _hom_sq_norms(new_state, bank)
        weight = dynamics.parameter_weight(new_t)
        new_i15 = weight * sq1
        new_i17 = weight * sq2
        acc15 += 0.5 * dt * (integrand15 + new_i15)
        acc17 += 0.5 * dt * (integrand17 + new_i17)
        integrand15, integrand17 = new_i15, new_i17

        linf = max(sp.grid_max_abs(new_state.m), sp.grid_max_abs(new_state.n))
        if linf > monitor.linf_threshold or tail_ratio(new_state, cfg.dealias) > monitor.tail_ratio_threshold:
            status = "blowup_detected"
            t_star = t
            break

        state = new_state
        t = new_t
        steps += 1
        taken.append(dt)
        if cfg.snapshot_every > 0 and steps % cfg.snapshot_every == 0:
            snapshots.append((steps, t, state))

    if len(series) == 0 or series.column("t")[-1] != t:
        record_row(taken[-1] if taken else 0.0)
    if snapshots[-1][0] != steps:
        snapshots.append((steps, t, state))
    return RunResult(
        status=status,
        series=series,
        snapshots=snapshots,
        dt_sequence=taken,
        final_state=state,
        final_time=t,
        t_star_num=t_star,
        steps=steps,
    )


# ---------------------------------------------------------------------------
# linear iteration scheme

@dataclass
class FriedrichsResult:
    """Iterate trajectories and contraction diagnostics."""

    dt: float
    times: np.ndarray
    nodes: list          # nodes[k][j] = State of iterate k+1 at time j*dt
    differences: list    # sup-in-time X_{-1/2,inf} distance between iterates
    norms: list          # sup-in-time X_{1/2,1} norm per iterate
    uniform_bound: float | None = None


def _stage_times(t: float, dt: float) -> tuple[float, float, float, float]:
    return (t, t + 0.5 * dt, t + 0.5 * dt, t + dt)


def friedrichs_iterate(initial: State, n_iterates: int, alpha, gamma,
                       cfg: IntegratorConfig, bank: DyadicFilterBank,
                       uniform_bound: float | None = None) -> FriedrichsResult:
    """Run the frozen-coefficient iteration on a fixed uniform step grid.

    The step is the adaptive ceiling of the full initial state, rounded so a
    whole number of steps lands exactly on t_end. Iterate 1 is the constant
    trajectory S_1 of the data; iterate k+1 transports its own low-passed
    data S_{k+1} with velocity and source frozen from iterate k.
    """
    if n_iterates < 2:
        raise ValueError("need at least two iterates to form a difference")
    dyn = md.NonlocalDynamics(alpha, gamma, form="advective", dealias=cfg.dealias)
    dt0 = adaptive_dt(dyn, initial, 0.0, cfg)
    n_steps = max(1, int(math.ceil(cfg.t_end / dt0 - 1e-12)))
    dt = cfg.t_end / n_steps
    times = np.arange(n_steps + 1) * dt

    def low_passed(q: int) -> State:
        return State(lp.low_pass(initial.m, q, bank), lp.low_pass(initial.n, q, bank))

    # iterate 1: constant in time
    first = low_passed(1)
    nodes = [[first for _ in range(n_steps + 1)]]
    prev_stages = [[first] * 4 for _ in range(n_steps)]

    diff_inf = BesovParams(-0.5, 2, math.inf)
    b12 = BesovParams(0.5, 2, 1)

    def sup_norm_x12(traj) -> float:
        return max(
            lp.besov_norm(s.m, b12, bank) + lp.besov_norm(s.n, b12, bank) for s in traj
        )

    differences = []
    norms = [sup_norm_x12(nodes[0])]

    for k in range(2, n_iterates + 1):
        data = low_passed(k)
        traj = [data]
        stages = []
        current = data
        for j in range(n_steps):
            t = times[j]
            sts = _stage_times(t, dt)
            frozen = prev_stages[j]
            slopes = []
            stage_states = []
            xs = current
            for s in range(4):
                if s == 1 or s == 2:
                    xs = current + (0.5 * dt) * slopes[s - 1]
                elif s == 3:
                    xs = current + dt * slopes[2]
                stage_states.append(xs)
                coeff = frozen[s]
                d = md.derive_fields(coeff, alpha.value(sts[s]), gamma.value(sts[s]), cfg.dealias)
                psi0_coeffs = d.psi.coeffs.copy()
                psi0_coeffs[0] = 0.0
                psi0 = sp.SpectralField(d.psi.n_modes, psi0_coeffs)
                dm = -1.0 * sp.dealiased_product(d.rho, sp.derivative(xs.m), cfg.dealias) \
                    - sp.dealiased_product(coeff.m, psi0, cfg.dealias)
                dn = -1.0 * sp.dealiased_product(d.rho, sp.derivative(xs.n), cfg.dealias) \
                    - sp.dealiased_product(coeff.n, psi0, cfg.dealias)
                slopes.append(State(dm, dn))
            current = current + (dt / 6.0) * (
                slopes[0] + 2.0 * slopes[1] + 2.0 * slopes[2] + slopes[3]
            )
            if not current.is_finite():
                raise FloatingPointError(
                    f"iterate {k} lost finiteness at step {j} (t={times[j + 1]:.6g})"
                )
            stages.append(stage_states)
            traj.append(current)
        d_sup = max(
            lp.besov_norm(a.m - b.m, diff_inf, bank) + lp.besov_norm(a.n - b.n, diff_inf, bank)
            for a, b in zip(traj, nodes[-1])
        )
        differences.append(d_sup)
        norms.append(sup_norm_x12(traj))
        nodes.append(traj)
        prev_stages = stages

    return FriedrichsResult(
        dt=dt,
        times=times,
        nodes=nodes,
        differences=differences,
        norms=norms,
        uniform_bound=uniform_bound,
    )

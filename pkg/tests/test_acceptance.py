"""Acceptance suite: one test per shipped guarantee, in numbered order.

Every test prints a single PASS or FAIL verdict line straight to the
terminal (bypassing capture) before asserting, so a full-suite log shows
the twelve verdicts inline. Configurations are frozen; tolerances are the
ones the package promises.
"""

import math

import numpy as np
import pytest

from chbesov import bounds as bd
from chbesov import littlewood as lp
from chbesov import model as md
from chbesov import probes as pr
from chbesov import spectral as sp
from chbesov import stepping as st

ALPHA1 = md.ConstantSchedule(1.0)
GAMMA0 = md.ZeroSchedule()


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"[acceptance {number:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def smooth_run_256():
    """Shared cosine-data run: N=256, alpha constant, gamma zero, t_end=1."""
    bank = lp.build_filter_bank(256, "smooth")
    m0 = md.cosine_field(256, 1, 1.0)
    cfg = st.IntegratorConfig(t_end=1.0, series_every=1)
    result = st.run(md.State(m0, m0), md.NonlocalDynamics(ALPHA1, GAMMA0), cfg, bank)
    assert result.status == "completed"
    return result


@pytest.fixture(scope="module")
def corpus_128():
    return pr.probe_corpus(128, trials=100, seed=0)


def test_c01_operator_exactness(capsys):
    worst = 0.0
    for seed in (1, 2, 3):
        f = md.random_band_limited_field(256, max_mode=80, amplitude=1.0, seed=seed)
        ident = sp.derivative(sp.antiderivative(f))
        target = f.coeffs.copy()
        target[0] = 0.0
        worst = max(worst, float(np.max(np.abs(ident.coeffs - target))))
        round_trip = sp.helmholtz_apply(sp.helmholtz_inverse(f))
        worst = max(worst, float(np.max(np.abs(round_trip.coeffs - f.coeffs))))
    verdict(capsys, 1, worst < 1e-12,
            f"derivative/antiderivative and Helmholtz round trips, max error {worst:.3e}")


def test_c02_partition_of_unity(capsys):
    worst_partition = 0.0
    worst_reconstruction = 0.0
    for kind in ("smooth", "sharp"):
        bank = lp.build_filter_bank(256, kind)
        total = bank.chi + bank.phi.sum(axis=0)
        worst_partition = max(worst_partition, float(np.max(np.abs(total - 1.0))))
        f = md.random_band_limited_field(256, max_mode=100, amplitude=1.0, seed=7)
        rebuilt = lp.block(f, -1, bank).coeffs.copy()
        for q in range(bank.q_max + 1):
            rebuilt += lp.block(f, q, bank).coeffs
        worst_reconstruction = max(
            worst_reconstruction, float(np.max(np.abs(rebuilt - f.coeffs))))
    worst = max(worst_partition, worst_reconstruction)
    verdict(capsys, 2, worst < 1e-12,
            f"both filter kinds at N=256, partition dev {worst_partition:.3e}, "
            f"reconstruction dev {worst_reconstruction:.3e}")


def test_c03_mass_conservation(capsys, smooth_run_256):
    mm = np.asarray(smooth_run_256.series.column("mass_m"))
    mn = np.asarray(smooth_run_256.series.column("mass_n"))
    drift = max(float(np.max(np.abs(mm - mm[0]))), float(np.max(np.abs(mn - mn[0]))))
    verdict(capsys, 3, drift < 1e-10,
            f"mean drift {drift:.3e} over t_end=1 at N=256")


def test_c04_mean_identity_with_zero_gamma(capsys, smooth_run_256):
    worst = float(np.max(np.abs(np.asarray(smooth_run_256.series.column("psi_bar")))))
    verdict(capsys, 4, worst < 1e-10,
            f"max |psi_bar| {worst:.3e} along the shared cosine-data run")


def test_c05_proportional_data_stays_proportional(capsys):
    bank = lp.build_filter_bank(256, "smooth")
    m0 = md.cosine_field(256, 1, 2.0)
    n0 = md.cosine_field(256, 1, 1.0)
    cfg = st.IntegratorConfig(t_end=1.0, series_every=10**9)
    r = st.run(md.State(m0, n0), md.NonlocalDynamics(ALPHA1, GAMMA0), cfg, bank)
    assert r.status == "completed"
    gap = float(np.max(np.abs(sp.to_grid(r.final_state.m).values
                              - 2.0 * sp.to_grid(r.final_state.n).values)))
    verdict(capsys, 5, gap < 1e-8, f"sup |m - 2n| = {gap:.3e} at t=1")


def _equivalence_discrepancy(initial, form, lam):
    cfg = st.IntegratorConfig(t_end=1.0, dt_max=0.005, series_every=10**9)
    bank = lp.build_filter_bank(initial.n_modes, "smooth")
    damped = st.run(initial, md.DampedDynamics(lam, form), cfg, bank)
    assert damped.status == "completed"
    twin = st.run(initial,
                  md.NonlocalDynamics(md.ExpDecaySchedule(1.0, lam), md.ZeroSchedule()),
                  cfg, bank, dt_sequence=damped.dt_sequence)
    assert twin.status == "completed"
    factor = math.exp(lam * damped.final_time)
    disc = 0.0
    for a, b in ((damped.final_state.m, twin.final_state.m),
                 (damped.final_state.n, twin.final_state.n)):
        disc = max(disc, float(np.max(np.abs(
            factor * sp.to_grid(a).values - sp.to_grid(b).values))))
    return disc


def test_c06_damping_equivalence(capsys):
    m0 = md.cosine_field(64, 1, 1.0)
    forq = _equivalence_discrepancy(md.State(m0, m0), "forq", 1.0)
    n0 = md.fourier_modes_field(64, [(1, 0.8, 0.3), (2, 0.3, 0.0)])
    sqq = _equivalence_discrepancy(md.State(m0, n0), "sqq", 1.0)
    ok = forq < 1e-6 and sqq < 1e-6
    verdict(capsys, 6, ok,
            f"rescaled-run sup discrepancy at t=1: forq {forq:.3e}, sqq {sqq:.3e}")


def test_c07_convergence_orders(capsys):
    # spatial: frozen gaussian-bump data against a 512-mode reference
    t_end, dt = 0.25, 0.002

    def bump_final(n_modes):
        bank = lp.build_filter_bank(n_modes, "smooth")
        m0 = md.gaussian_bump_field(n_modes, center=0.35, width=0.02, amplitude=1.2)
        n0 = md.gaussian_bump_field(n_modes, center=0.6, width=0.028, amplitude=0.9)
        cfg = st.IntegratorConfig(t_end=t_end, dt_max=1.0, series_every=10**9)
        r = st.run(md.State(m0, n0), md.NonlocalDynamics(ALPHA1, GAMMA0), cfg, bank,
                   dt_sequence=[dt] * round(t_end / dt))
        assert r.status == "completed"
        return r.final_state

    ref = bump_final(512)

    def coeff_error(state, n_modes):
        err = 0.0
        for attr in ("m", "n"):
            c = getattr(state, attr).coeffs
            cr = getattr(ref, attr).coeffs
            for k in range(-(n_modes // 2 - 1), n_modes // 2):
                err += abs(c[k % n_modes] - cr[k % 512]) ** 2
        return math.sqrt(err)

    e128 = coeff_error(bump_final(128), 128)
    e256 = coeff_error(bump_final(256), 256)
    spatial_ratio = e128 / e256

    # temporal: frozen smooth data, fixed step halved twice
    bank = lp.build_filter_bank(64, "smooth")
    m0 = md.fourier_modes_field(64, [(1, 2.0, 0.0), (2, 0.8, 0.9)])
    n0 = md.fourier_modes_field(64, [(1, 1.6, 0.5), (3, 0.6, 0.0)])
    initial = md.State(m0, n0)

    def final_coeffs(step):
        cfg = st.IntegratorConfig(t_end=0.5, dt_max=1.0, series_every=10**9)
        r = st.run(initial, md.NonlocalDynamics(ALPHA1, GAMMA0), cfg, bank,
                   dt_sequence=[step] * round(0.5 / step))
        assert r.status == "completed"
        return r.final_state.m.coeffs

    c1, c2, c4 = final_coeffs(0.02), final_coeffs(0.01), final_coeffs(0.005)
    e12 = float(np.max(np.abs(c1 - c2)))
    e24 = float(np.max(np.abs(c2 - c4)))
    order = math.log2(e12 / e24)

    ok = spatial_ratio >= 10.0 and order >= 3.8
    verdict(capsys, 7, ok,
            f"spatial error ratio {spatial_ratio:.3e} (128 vs 256), "
            f"temporal order {order:.3f}")


def test_c08_closed_form_bounds(capsys):
    bank = lp.build_filter_bank(64, "smooth")
    checks = []

    value = bd.hbar(1.0, 1.0, 1.0)
    oracle = 9.0 * math.exp(4.0)
    checks.append(("hbar(1,1,1)", value, oracle))

    value = bd.global_sufficient_condition(1.0, 1.0)
    checks.append(("global threshold", value, math.log(2.0) / 24.0))

    unit = md.fourier_modes_field(64, [(1, 2.0, 0.0)])
    value = bd.blowup_lower_bound_critical(unit, unit, ALPHA1, GAMMA0, bank)
    checks.append(("critical T_lower", value, 0.25))

    zero = sp.zeros(64)
    value = bd.blowup_lower_bound_noncritical(zero, zero, ALPHA1, GAMMA0, bank)
    checks.append(("noncritical T_lower", value, 1.0 / (8.0 * math.exp(6.0))))

    def residual(lam):
        return lam - (6.0 / math.log(2.0)) * (1.0 + 4.0 / lam) ** 2 * math.exp(4.0 / lam)

    lo, hi = 16.0, 17.0
    assert residual(lo) < 0.0 < residual(hi)
    while hi - lo > 1e-14 * hi:
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    lam_star = bd.lambda_threshold(1.0, 1.0)
    checks.append(("lambda threshold", lam_star, 0.5 * (lo + hi)))

    worst = max(abs(v - o) / abs(o) for _, v, o in checks)
    ok = worst < 1e-10 and 16.0 < lam_star < 17.0
    verdict(capsys, 8, ok,
            f"five closed forms vs independent oracles, worst rel err {worst:.3e}, "
            f"lambda* = {lam_star:.6f}")


def test_c09_friedrichs_scheme(capsys):
    bank = lp.build_filter_bank(64, "smooth")
    cfg = st.IntegratorConfig(t_end=0.4, dt_max=0.005, series_every=10**9)

    # mollifier exactness on clean single-mode data
    keep = md.fourier_modes_field(64, [(1, 1.0, 0.0)])
    fr_keep = st.friedrichs_iterate(md.State(keep, keep), 2, ALPHA1, GAMMA0, cfg, bank)
    kept = float(np.max(np.abs(fr_keep.nodes[0][0].m.coeffs - keep.coeffs)))
    kill = md.fourier_modes_field(64, [(8, 1.0, 0.0)])
    fr_kill = st.friedrichs_iterate(md.State(kill, kill), 2, ALPHA1, GAMMA0, cfg, bank)
    killed = float(np.max(np.abs(fr_kill.nodes[0][0].m.coeffs)))

    # contraction and trajectory agreement on the standard smooth case
    m0 = md.cosine_field(64, 1, 1.0)
    initial = md.State(m0, m0)
    fr = st.friedrichs_iterate(initial, 8, ALPHA1, GAMMA0, cfg, bank)
    diffs = fr.differences
    decreasing = all(b < a for a, b in zip(diffs[2:], diffs[3:]))
    converged = diffs[-1] < 1e-8

    n_steps = len(fr.times) - 1
    direct_cfg = st.IntegratorConfig(t_end=0.4, dt_max=0.005, series_every=10**9,
                                     snapshot_every=1)
    direct = st.run(initial, md.NonlocalDynamics(ALPHA1, GAMMA0, form="advective"),
                    direct_cfg, bank, dt_sequence=[fr.dt] * n_steps)
    b12 = lp.BesovParams(0.5, 2, 1)
    gap = 0.0
    for (_, _, s), node in zip(direct.snapshots, fr.nodes[-1]):
        gap = max(gap, lp.besov_norm(s.m - node.m, b12, bank)
                  + lp.besov_norm(s.n - node.n, b12, bank))

    ok = kept == 0.0 and killed == 0.0 and decreasing and converged and gap < 1e-6
    verdict(capsys, 9, ok,
            f"mode-1 kept ({kept:.1e}), mode-8 killed ({killed:.1e}), "
            f"differences decreasing from the third, final D {diffs[-1]:.3e}, "
            f"trajectory gap {gap:.3e}")


def test_c10_inequality_probes(capsys, corpus_128):
    bank = lp.build_filter_bank(128, "smooth")
    worst_name, worst = None, 0.0
    finite = True
    for name in pr.PROBE_NAMES:
        report = pr.inequality_probe(name, corpus_128, bank)
        c_emp = report.c_emp
        finite = finite and math.isfinite(c_emp) and len(report.ratios) > 0
        if c_emp > worst:
            worst_name, worst = name, c_emp
    const = np.zeros(128, dtype=np.complex128)
    const[0] = 0.7
    velocity = sp.SpectralField(128, const)
    f = corpus_128[0]
    comm = pr.commutator_ratio(velocity, f, bank)
    ok = finite and comm == 0.0
    verdict(capsys, 10, ok,
            f"all probes finite over 100 fields (largest C_emp {worst:.3g} "
            f"from {worst_name}), constant-velocity commutator = {comm}")


def test_c11_embedding_chain(capsys, corpus_128):
    bank = lp.build_filter_bank(128, "smooth")
    p1 = lp.BesovParams(0.0, math.inf, 1, homogeneous=True)
    p2 = lp.BesovParams(0.0, math.inf, 2, homogeneous=True)
    pinf = lp.BesovParams(0.0, math.inf, math.inf, homogeneous=True)
    ok = True
    margin = math.inf
    for f in corpus_128:
        b1 = lp.besov_norm(f, p1, bank)
        b2 = lp.besov_norm(f, p2, bank)
        binf = lp.besov_norm(f, pinf, bank)
        slack = 1e-12 * max(1.0, b1)
        ok = ok and (b1 + slack >= b2) and (b2 + slack >= binf)
        margin = min(margin, b1 - b2, b2 - binf)
    verdict(capsys, 11, ok,
            f"r=1 >= r=2 >= r=inf on all 100 fields, smallest gap {margin:.3e}")


def test_c12_continuity_probe(capsys):
    bank = lp.build_filter_bank(64, "smooth")
    m0 = md.cosine_field(64, 1, 1.0)
    cfg = st.IntegratorConfig(t_end=0.4, dt_max=0.005, series_every=10**9)
    rows = bd.continuity_probe(md.State(m0, m0),
                               lambda: md.NonlocalDynamics(ALPHA1, GAMMA0),
                               cfg, bank, deltas=(1e-2, 1e-3, 1e-4))
    lows = [r["dist_low"] for r in rows]
    highs = [r["dist_high"] for r in rows]
    monotone = lows[0] > lows[1] > lows[2] > 0 and highs[0] > highs[1] > highs[2] > 0
    ok = monotone and not any(r["flagged"] for r in rows)
    verdict(capsys, 12, ok,
            f"distances {lows[0]:.3e} > {lows[1]:.3e} > {lows[2]:.3e} "
            f"over deltas 1e-2, 1e-3, 1e-4")

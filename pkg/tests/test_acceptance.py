"""Acceptance criteria, one test each, at their stated tolerances.

Every test appends a single ``criterion N [PASS|FAIL] ...`` line, shown in
the terminal summary (and printed, for ``pytest -s``), before asserting.
Criteria 1, 5, 6 and 8 are known to fail; README.md explains why.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from darkcqed.dynamics import (
    basis_projector,
    decay_rate,
    evolve,
    evolve_oracle,
    expectations,
    rabi_experiment,
)
from darkcqed.effective import (
    coupling_ratios,
    effective_params,
    optimal_beta,
    optimal_ratio_map,
    regime_map,
    resonance_delta2,
)
from darkcqed.eigen import avoided_crossing_scan, dark_doublet, effective_agreement_scan
from darkcqed.hilbert import ProbeDrive, build_liouvillian, composite_operators
from darkcqed.probe import excitation_spectrum, g2_scan, g2_zero, local_minima, steady_state

from conftest import ACCEPTANCE_LINES, make_set_a, make_set_b


def report(number, title, ok, detail):
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def rabi_a():
    return rabi_experiment(make_set_a())


@pytest.fixture(scope="module")
def purcell_control():
    p = replace(make_set_a(), J=0.0, delta1=0.0, delta2=0.0)
    t = np.linspace(0.0, 100.0, 201)
    return p, rabi_experiment(p, t_grid=t)


@pytest.fixture(scope="module")
def g2_b():
    p = make_set_b(n1_cutoff=3, n2_cutoff=3)
    grid = np.linspace(-0.15, 0.15, 201)
    return p, grid, g2_scan(p, None, grid)


@pytest.fixture(scope="module")
def crossing_a():
    p = make_set_a()
    eff = effective_params(p)
    grid = resonance_delta2(p) + eff.g_eff * np.linspace(-9, 9, 181)
    return p, eff, grid, avoided_crossing_scan(p, grid)


def test_criterion_1_effective_parameters():
    eff = effective_params(make_set_a())
    split = 2 * eff.g_eff
    shift_rel = abs(eff.shift_e - (-0.001)) / 0.001
    ok_split = abs(split - 0.01) <= 1e-6
    ok_shift = shift_rel < 0.003
    report(1, "effective parameters (set A)", ok_split and ok_shift,
           f"2 g_eff = {split:.8g} (target 0.01 +/- 1e-6, off by {abs(split - 0.01):.3g}); "
           f"shift_e = {eff.shift_e:.6g} (rel. dev. {shift_rel:.2%} < 0.3%: {ok_shift})")


def test_criterion_2_strong_coupling_boundary():
    g = 1.0
    k1 = np.geomspace(0.5, 2000.0, 41)
    k2 = np.geomspace(1e-6, 2.0, 41)
    worst = 0.0
    for a in k1[::8]:
        for b in k2[::8]:
            closed = optimal_beta(g, a, b).ratio_max
            direct = optimal_ratio_map(g, [a], [b], gamma=0.0)["g_over_k"][0, 0]
            worst = max(worst, abs(closed - direct) / closed)
    m = optimal_ratio_map(g, k1, k2, gamma=0.0)
    strong = m["g_over_k"] > 1
    region = k2[None, :] < g**2 / (4 * k1[:, None])
    mismatch = int(np.sum(strong != region))
    report(2, "strong-coupling boundary", worst < 1e-12 and mismatch == 0,
           f"max rel. error of ratio_max vs full evaluation {worst:.2e} (< 1e-12); "
           f"{mismatch} of {strong.size} sweep cells disagree with kappa2 < g^2/(4 kappa1)")


def test_criterion_3_avoided_crossing(crossing_a):
    p, eff, grid, scan = crossing_a
    split = scan["splitting"]
    i = int(np.argmin(split))
    step = grid[1] - grid[0]
    res = resonance_delta2(p)
    ok_pos = abs(grid[i] - res) <= step
    ok_val = abs(split[i] / (2 * eff.g_eff) - 1) < 0.05
    dd = dark_doublet(p)
    ok_w = max(dd.minus.linewidth, dd.plus.linewidth) < 0.5 * dd.splitting
    report(3, "avoided crossing (set A)", ok_pos and ok_val and ok_w,
           f"min splitting {split[i]:.6g} = {split[i] / (2 * eff.g_eff):.4f} x 2 g_eff at "
           f"delta2 = {grid[i]:.6g} (resonance {res:.6g}, step {step:.3g}); "
           f"resonant linewidths {dd.minus.linewidth:.3g}, {dd.plus.linewidth:.3g} "
           f"vs half-splitting {0.5 * dd.splitting:.3g}")


def test_criterion_4_two_photon_ladder():
    p = make_set_b()
    eff = effective_params(p)
    dd = dark_doublet(p, 2)
    target = 2 * math.sqrt(2) * eff.g_eff
    rel = abs(dd.splitting / target - 1)
    report(4, "second-manifold splitting (set B)", rel < 0.05,
           f"splitting {dd.splitting:.6g} vs 2 sqrt(2) g_eff = {target:.6g} ({rel:.2%} < 5%)")


def test_criterion_5_vacuum_rabi(rabi_a, purcell_control):
    rms = rabi_a.rms_deviation
    n1, n2 = rabi_a.max_n1, rabi_a.max_n2
    p, ctl = purcell_control
    pe = ctl.series.pe
    monotone = bool(np.all(np.diff(pe) < 0))
    rate = decay_rate(ctl.series.times[20:], pe[20:])
    target = p.gamma + 4 * p.g**2 / p.kappa1
    ok_rate = abs(rate / target - 1) < 0.10
    parts = [rms < 0.02, n1 < 1e-5, n2 > 0.5, monotone and ok_rate]
    report(5, "vacuum Rabi oscillation (set A)", all(parts),
           f"RMS(Pe - closed form) = {rms:.4f} (< 0.02: {parts[0]}); "
           f"max N1 = {n1:.4g} (< 1e-5: {parts[1]}); max N2 = {n2:.4f} (> 0.5: {parts[2]}); "
           f"control decay monotone {monotone}, rate {rate:.5f} vs {target:.5f} "
           f"(within 10%: {ok_rate})")


def test_criterion_6_photon_blockade(g2_b):
    p, grid, scan = g2_b
    eff = effective_params(p)
    step = grid[1] - grid[0]
    g2 = scan["g2"]
    expected = eff.shift_e + np.array([-1.0, 1.0]) * eff.g_eff
    minima = local_minima(grid, g2)
    idx = np.flatnonzero(np.isin(grid, minima))
    dips = np.sort(grid[idx[np.argsort(g2[idx])[:2]]])
    pos_ok = len(dips) == 2 and bool(np.all(np.abs(dips - expected) <= step))
    # dip depths and the midpoint re-solved by the independent SVD null-space path
    fam = build_liouvillian
    a2 = composite_operators(p).a2
    eps = scan.metadata["eps"]

    def oracle(de):
        return g2_zero(steady_state(fam(p, ProbeDrive(eps, de)), method="svd"), a2)

    dip_vals = [oracle(d) for d in dips]
    mid = grid[np.argmin(np.abs(grid - eff.shift_e))]
    mid_val = oracle(mid)
    # g2 is a ratio of small moments, so compare relatively
    agree = all(abs(v / g2[grid == d][0] - 1) < 1e-5 for d, v in zip(dips, dip_vals))
    ok = pos_ok and max(dip_vals) < 0.2 and mid_val > 1 and agree
    report(6, "photon blockade g2(0) (set B)", ok,
           f"deepest minima at {', '.join(f'{d:.4f}' for d in dips)} vs expected "
           f"{expected[0]:.5f}, {expected[1]:.5f} (step {step:.4f}, within one step: {pos_ok}); "
           f"dip g2 = {', '.join(f'{v:.3f}' for v in dip_vals)} (< 0.2); "
           f"midpoint g2({mid:.4f}) = {mid_val:.3f} (> 1); eps = {eps:.3g}; "
           f"direct/SVD agree: {agree}")


def test_criterion_7_property_suites(rabi_a, purcell_control, crossing_a):
    checks = {}
    runs = [rabi_a.series, purcell_control[1].series]
    checks["trace"] = max(float(s.trace_error.max()) for s in runs) < 1e-8
    checks["positivity"] = min(float(s.min_eigenvalue.min()) for s in runs) >= -1e-8
    checks["hermiticity"] = max(float(s.hermiticity_error.max()) for s in runs) < 1e-10

    rng = np.random.default_rng(7)
    worst = 0.0
    for p, drive in [(make_set_a(n1_cutoff=1, n2_cutoff=1), None),
                     (make_set_b(), ProbeDrive(0.01, 0.04))]:
        times = np.sort(rng.uniform(0, 100, 10))
        rho0 = basis_projector(p, 1)
        s = evolve(p, drive, rho0, np.r_[0.0, times])
        got = np.c_[s.n1, s.n2, s.pe][1:]
        ref = np.array([list(expectations(r, p).values())
                        for r in evolve_oracle(p, drive, rho0, times)])
        worst = max(worst, float(np.abs(got - ref).max()))
    checks["integrator vs expm"] = worst < 1e-6

    _, _, _, scan_a = crossing_a
    pb = make_set_b()
    eb = effective_params(pb)
    scan_b2 = avoided_crossing_scan(pb, pb.delta2 + eb.g_eff * np.linspace(-5, 5, 101), n_exc=2)
    trace_err = max(scan_a["trace_error"].max(), scan_b2["trace_error"].max())
    checks["eigen trace"] = trace_err < 1e-10

    g0 = g2_scan(replace(pb, g=0.0), 0.0005, np.linspace(-0.15, 0.15, 31))
    g0_dev = float(np.abs(g0["g2"] - 1).max())
    checks["g2 decoupled"] = bool(np.all(g0["solved"])) and g0_dev < 1e-3

    pa = make_set_a()
    ea = effective_params(pa)
    spectrum = excitation_spectrum(pa, None, ea.shift_e + ea.g_eff * np.linspace(-3, 3, 61))
    lin = float(np.abs(spectrum["S"] - spectrum["S_half_eps"]).max())
    checks["weak-probe linearity"] = lin < 0.01

    report(7, "property suites", all(checks.values()),
           "; ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in checks.items())
           + f" (expm dev {worst:.1e}, eig trace {trace_err:.1e}, |g2-1| {g0_dev:.1e}, "
           f"eps-halving {lin:.1e})")


def test_criterion_8_breakdown_trend():
    p = make_set_a()
    scan = effective_agreement_scan(p, [100.0, 800.0], detuning_ratio=10.0)
    d100, d800 = scan["discrepancy"]
    report(8, "effective-model breakdown trend", d800 > d100,
           f"splitting discrepancy {d800:.4e} at kappa1 = 800 vs {d100:.4e} at kappa1 = 100 "
           f"(delta1 = 10 kappa1); must be strictly larger")


def test_regime_map_spot_values():
    p = make_set_a()
    d1 = np.linspace(100.0, 5000.0, 50)
    jj = np.linspace(0.5, 30.0, 60)
    m = regime_map(p, d1, jj)
    worst = 0.0
    for i, j in [(0, 0), (17, 33), (49, 59)]:
        s2 = d1[i] ** 2 + p.kappa1**2 / 4
        ge = jj[j] * p.g / math.sqrt(s2)
        ke = p.kappa2 + jj[j] ** 2 / s2 * p.kappa1
        gm = p.gamma + p.g**2 / s2 * p.kappa1
        for name, ref in (("g_over_k", ge / ke), ("g_over_gamma", ge / gm),
                          ("cooperativity", ge**2 / (ke * gm))):
            worst = max(worst, abs(m[name][i, j] - ref) / abs(ref))
    report("map", "contour-map spot values", worst < 1e-10,
           f"max rel. deviation {worst:.2e} over 3 points x 3 maps (< 1e-10)")

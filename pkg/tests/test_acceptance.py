"""One test per acceptance criterion; each records a pass/fail summary line."""

import time

import numpy as np
import pytest

from tzitzeica import asymptotics as asy
from tzitzeica import pde_solver as pde
from tzitzeica import scattering as scat
from tzitzeica.config import default_config

REL_RMS_BOUND = 0.03  # frozen after the dx convergence study (0.019, 0.021, 0.023 at dx 0.04..0.01)


def report(log, n, ok, detail):
    log.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def test_zero_data_identity_chain(acceptance_log):
    t0 = time.perf_counter()
    data = scat.InitialData.zero()
    table, samples = scat.build_reflection_table(data, validate=True, return_samples=True)
    s_err = max(max(abs((s.s11 if s.lam > 0 else s.sA11) - 1), abs(s.s12 if s.lam > 0 else s.sA12),
                    s.det_residual, s.sym_residual) for s in samples)
    r_max = table.max_abs()
    x = np.linspace(-75, 75, 3001)
    u_asym = max(np.abs(asy.u_asymptotic(x, t, table)).max() for t in (20.0, 50.0))
    state = pde.init_state(default_config().pde_config, lambda x: 0 * x, lambda x: 0 * x)
    for _ in range(100_000):
        state = pde.step(state)
    u_pde = np.abs(state.u).max()
    elapsed = time.perf_counter() - t0
    ok = s_err < 1e-10 and r_max == 0 and u_asym == 0 and u_pde == 0 and elapsed < 60
    report(acceptance_log, 1, ok,
           f"max |s - I| {s_err:.1e} over {len(samples)} lambda, max |r| {r_max:g}, "
           f"max |u_asym| {u_asym:g}, max |u_pde| after 1e5 steps {u_pde:g}, {elapsed:.0f} s")


def test_scattering_invariants(acceptance_log, reference):
    _, samples, elapsed = reference
    v = scat.validate_scattering(samples)
    s11_min = min(abs(s.s11 if s.lam > 0 else s.sA11) for s in samples)
    npos = sum(s.lam > 0 for s in samples)
    ok = (v.max_det_residual < 1e-8 and v.max_sym_residual < 1e-6 and s11_min > 1e-3
          and npos >= 400 and elapsed < 300)
    report(acceptance_log, 2, ok,
           f"max |det s - 1| {v.max_det_residual:.1e}, max sym residual "
           f"{v.max_sym_residual:.1e}, min |s11| {s11_min:.4f} over {len(samples)} lambda, "
           f"{elapsed:.0f} s")


def test_oracle_equivalence(acceptance_log, gaussian):
    d_s = max(np.abs(np.array(scat.compute_s(gaussian, lam))
                     - scat.transfer_matrix_s(gaussian, lam)[0, :2]).max()
              for lam in (0.5, 1.0, 2.0))
    d_a = max(np.abs(np.array(scat.compute_sA(gaussian, lam))
                     - scat.transfer_matrix_s_inverse(gaussian, lam).T[0, :2]).max()
              for lam in (-0.5, -1.0, -2.0))
    report(acceptance_log, 3, d_s < 1e-6 and d_a < 1e-6,
           f"s vs transfer oracle {d_s:.1e}, sA vs (s^-1)^T {d_a:.1e}")


def test_reflection_decay(acceptance_log, gaussian, table):
    low = [abs(scat.reflection_r1(gaussian, lam)) for lam in (0.005, 0.01, 0.02)]
    high_tab = np.abs(table.r1[table.lambda_pos >= 25]).max()
    high = [abs(scat.reflection_r1(gaussian, lam)) for lam in (25.0, 40.0)]
    worst_low, worst_high = np.max(low), np.max([high_tab, *high])
    report(acceptance_log, 4, worst_low < 1e-6 and worst_high < 1e-6,
           f"max |r1| for lambda <= 0.02: {worst_low:.1e}; for lambda >= 25: {worst_high:.1e}")


def test_model_coefficients(acceptance_log):
    worst_b = worst_g = 0.0
    for nu in (0.01, 0.1, 0.5, 1.0, 2.0):
        y = np.sqrt(-np.expm1(-2 * np.pi * nu)) * np.exp(0.4j)
        for b in (asy.beta_plus(y, nu), asy.beta_minus(y, nu)):
            worst_b = max(worst_b, abs(abs(b.beta12 * b.beta21) - nu))
        g2 = np.exp(2 * asy.log_gamma_complex(1j * nu).real)
        worst_g = max(worst_g, abs(g2 - np.pi / (nu * np.sinh(np.pi * nu))) / g2)
    report(acceptance_log, 5, worst_b < 1e-12 and worst_g < 1e-12,
           f"max | |b12 b21| - nu | {worst_b:.1e}, gamma reflection rel. error {worst_g:.1e}")


def test_pde_solver(acceptance_log, gaussian, comparison):
    cfg = pde.PDEConfig(dx=0.02, t_max=50)
    state = pde.init_state(cfg, gaussian.u0_fn, gaussian.u1_fn)
    _, _, reps = pde.run_until(state, 50.0, energy_every=10)
    drift = max(r.drift_rel for r in reps)
    sols = []
    for dx in (0.04, 0.02, 0.01):
        c = pde.PDEConfig(dx=dx, t_max=9)
        sols.append(pde.run_until(pde.init_state(c, gaussian.u0_fn, gaussian.u1_fn), 9.0)[0].u)
    rate = np.log2(np.abs(sols[0] - sols[1][::2]).max() / np.abs(sols[1][::2] - sols[2][::4]).max())
    audit = comparison[0].light_cone
    ok = drift < 1e-6 and 1.8 <= rate <= 2.2 and audit.passed and audit.min_margin >= 1e2
    report(acceptance_log, 6, ok,
           f"energy drift {drift:.1e}, convergence rate {rate:.3f}, "
           f"light-cone margin {audit.min_margin:.1e}")


def test_asymptotic_agreement(acceptance_log, comparison):
    rep, elapsed = comparison
    first, last = rep.records[0], rep.records[-1]
    ok = (last.max_abs_err < first.max_abs_err and last.rel_rms < REL_RMS_BOUND
          and elapsed < 900)
    report(acceptance_log, 7, ok,
           f"max err t=20 {first.max_abs_err:.3e}, t=50 {last.max_abs_err:.3e}; "
           f"rel RMS t=50 {last.rel_rms:.4f} (bound {REL_RMS_BOUND}); {elapsed:.0f} s")


def test_error_decay_law(acceptance_log, comparison):
    fit = comparison[0].fit
    ok = -1.4 <= fit.exponent_check <= -0.6 and fit.sqrt_rejected
    report(acceptance_log, 8, ok,
           f"exponent {fit.exponent_check:.3f}, C {fit.C:.4f}, log residual ln t/t "
           f"{fit.rms_log_resid_lnt:.3f} vs t^-1/2 {fit.rms_log_resid_sqrt:.3f}")


def test_sector_edge_continuity(acceptance_log, table):
    t = 50.0
    centre = abs(asy.u_asymptotic(0.0, t, table))
    edge = abs(asy.u_asymptotic(0.999 * t, t, table))
    # the oscillatory formula forced out to the edge: its envelope bound there
    l0 = np.sqrt(0.001 / 1.999)
    p = asy.asymptotic_params(table, l0)
    amp = 3 ** -0.25 * np.sqrt(2 * (1 + l0 * l0) / (t * l0))
    forced = amp * (np.sqrt(p.nu1) + np.sqrt(p.nu4))
    forced_u = abs(asy.u_asymptotic(0.999 * t, t, table, inner=0.9995))
    ok = edge < 0.1 * centre and forced < 0.1 * centre and forced_u < 0.1 * centre
    report(acceptance_log, 9, ok,
           f"|u_asym(0.999t)| {edge:g} (forced formula {forced_u:g}, envelope bound "
           f"{forced:.1e}) vs 10% of |u_asym(0)| = {0.1 * centre:.2e}")


@pytest.mark.parametrize("bound", [REL_RMS_BOUND])
def test_frozen_bound_matches_default(bound):
    assert default_config().compare.rel_rms_bound == bound

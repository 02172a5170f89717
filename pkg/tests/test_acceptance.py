"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import numpy as np
import pytest

from strat_ipm.analysis import (
    audit_mean_laws,
    extract_profile,
    fit_decay_exponent,
    random_spectrum,
    verify_balancing,
    verify_commutator,
    verify_convolution,
)
from strat_ipm.fields import (
    StripFieldX,
    StripFieldY,
    StripGrid,
    TorusGrid,
    evaluate,
    hermitian_part,
    physical_product,
    strip_forward_X,
    strip_forward_Y,
    strip_inverse_X,
    strip_inverse_Y,
)
from strat_ipm.operators import NormSpec, biot_savart, norm
from strat_ipm.propagator import (
    WitnessSpec,
    evolve_curves,
    gaussian_density,
    kernel_decay_ratio,
    plane_decay_curve,
    sharpness_witness,
)
from strat_ipm.solver import InitialData, SigmaSpec, SolverConfig, make_domain, run

L2 = NormSpec("L2")


def verdict(tag, passed, detail):
    print(f"{'PASS' if passed else 'FAIL'} {tag}: {detail}")
    return passed


def u_l2(f):
    vel = biot_savart(f)
    return float(np.hypot(norm(vel.u1, L2), norm(vel.u2, L2)))


def linear_sweep(domain, modes):
    cfg = SolverConfig(domain=domain, N=1.0, modes=modes, nonlinear=False,
                       initial=InitialData("algebraic", horizontal=4, seed=1))
    theta0 = make_domain(cfg).initial(cfg.initial, 4)
    obs = {"theta": lambda f: norm(f, L2), "u": u_l2, "u2": lambda f: norm(biot_savart(f).u2, L2)}
    curves = evolve_curves(theta0, 1.0, np.geomspace(1, 1e3, 40), obs)
    return {k: fit_decay_exponent(c, (10, 1e3)).exponent for k, c in curves.items()}


def test_ac01_torus_linear_rate_table():
    rates = linear_sweep("torus", (4, 1024))
    expected = {"theta": -2.0, "u": -2.5, "u2": -3.0}
    ok = all(abs(rates[k] - v) <= 0.15 for k, v in expected.items())
    detail = ", ".join(f"{k} {rates[k]:.3f} (want {v:+.1f})" for k, v in expected.items())
    assert verdict("AC1 torus linear rates +-0.15", ok, detail)


def test_ac02_plane_kernel_decay_variation():
    times = np.geomspace(1, 1e6, 25)
    curve = kernel_decay_ratio(gaussian_density(1.0), 1.0, times, 2.0)
    variation = float(curve.values.max() / curve.values.min())
    assert verdict("AC2 plane kernel (1+Nt)^(1/4) L1 norm varies < 3x", variation < 3,
                   f"max/min over Nt in [1, 1e6] = {variation:.3f}")


def test_ac03_sharpness_witness_slopes():
    eps = 0.05
    times = np.geomspace(1e2, 1e6, 25)
    ok, parts = True, []
    for j in (0, 1):
        density = sharpness_witness(WitnessSpec(eps=eps, s=3.0, j=j))
        for kind, lo, hi in (("L1", -(j / 2 + 0.25 + 2 * eps) - 0.02, -(j / 2 + 0.25) + 0.02),
                             ("L2", -(j / 2) - 2 * eps - 0.02, -(j / 2) + 0.02)):
            slope = fit_decay_exponent(plane_decay_curve(density, 1.0, times, kind, j), (1e2, 1e6)).exponent
            ok &= lo <= slope <= hi
            parts.append(f"{kind} j={j} {slope:.4f} in [{lo:.3f}, {hi:.3f}]")
    assert verdict("AC3 witness slopes", ok, "; ".join(parts))


def test_ac04_mean_laws():
    torus = run(SolverConfig(domain="torus", N=1.0, modes=(16, 16), T=20.0, snapshots=21, ndt_max=0.02,
                             initial=InitialData("band", amplitude=0.5, band=4, mean=1.0, seed=4)))
    strip = run(SolverConfig(domain="strip", N=1.0, modes=(8, 48), T=20.0, snapshots=21, ndt_max=0.02,
                             initial=InitialData("band", amplitude=0.5, band=4, zero_horizontal_mean=False, seed=4)))
    rt, rs = audit_mean_laws(torus), audit_mean_laws(strip)
    u1_max = max(rt.horizontal_velocity_mean, rs.horizontal_velocity_mean)
    ok = torus.completed and strip.completed and rt.mean_violation <= 1e-8 and rs.mean_violation <= 1e-8
    ok &= u1_max <= 1e-12 and abs(strip.means[0]) > 0
    assert verdict("AC4 mean laws", ok,
                   f"torus exp(-Nt) deviation {rt.mean_violation:.2e}, strip drift {rs.mean_violation:.2e}, "
                   f"max |int u1 dx1| {u1_max:.1e}")


def test_ac05_energy_ledger():
    traj = run(SolverConfig(domain="torus", N_ratio=100.0, modes=(128, 128), m=4, Nt_final=100.0, snapshots=20,
                            initial=InitialData("band", amplitude=1.0, band=8, seed=5)))
    hist = traj.ledger_history["total"]
    bound = traj.ledger.bound
    ok = traj.status == "completed" and traj.ledger.violation_time is None and np.all(hist <= bound)
    assert verdict("AC5 energy ledger at K=128", ok,
                   f"status {traj.status}, max total/bound {hist.max() / bound:.4f} over {traj.steps} steps")


def test_ac06_asymptotic_profile():
    traj = run(SolverConfig(domain="torus", N_ratio=20.0, modes=(16, 128), Nt_final=200.0, snapshots=60,
                            ndt_max=0.05, store_fields=True, initial=InitialData("algebraic", horizontal=4, seed=2)))
    prof = extract_profile(traj)
    window = (10.0, 50.0)
    slope = fit_decay_exponent(prof.curve, window).exponent
    # full-field distance to the limiting profile, reported alongside
    sigma = traj.final.with_coeffs(np.zeros_like(traj.final.coeffs))
    sigma.coeffs[traj.final.grid.K1, :] = prof.sigma_final
    dist = np.array([norm(th - sigma, L2) for _, th in traj.fields])
    full = fit_decay_exponent(type(prof.curve)(traj.times, traj.N * traj.times, dist), window).exponent
    m = traj.config.m
    ok = prof.relative_difference <= 1e-3 and slope <= -m / 2 + 0.3
    assert verdict("AC6 asymptotic profile", ok,
                   f"two-route difference {prof.relative_difference:.2e}; horizontal-mean slope {slope:.3f} "
                   f"(upper rate {-m / 2 + 0.3:+.1f}); full-field slope {full:.3f}")


def test_ac07_plane_quasilinear_regime():
    cfg = SolverConfig(domain="plane_box", N_ratio=20.0, modes=(32, 1024), length=32.0, Nt_final=120.0,
                       snapshots=30, ndt_max=0.5, sigma=SigmaSpec("bump", 0.5, 4.0),
                       initial=InitialData("algebraic", horizontal=32, horizontal_min=32, seed=2))
    traj = run(cfg)
    window = (10.0, 100.0)
    u = fit_decay_exponent(traj.curves["u:Hm"], window).exponent
    g = fit_decay_exponent(traj.curves["grad_u2:Hm-1"], window).exponent
    ok = traj.completed and not traj.profile_flag and abs(u + 0.5) <= 0.2 and abs(g + 1.0) <= 0.2
    assert verdict("AC7 plane quasi-linear rates +-0.2", ok,
                   f"||u||_Hm {u:.3f} (want -0.5), ||grad u2||_Hm-1 {g:.3f} (want -1.0), N = {traj.N:.3g}")


def test_ac08_balancing_inequality():
    rng = np.random.default_rng(0)
    grid = TorusGrid(8)
    spectra = [random_spectrum(grid, rng, rng.uniform(0, 6)) for _ in range(1000)]
    rep = verify_balancing(spectra, [2.0**k for k in range(11)], 4, slack=1e-12)
    assert verdict("AC8 balancing inequality", rep.violations == 0 and len(rep.ratios) == 11000,
                   f"{rep.violations} violations in {len(rep.ratios)} checks, max ratio {rep.max_ratio:.4f}")


def test_ac09_commutator_and_convolution_ensembles():
    reports = [verify_commutator(K=32, samples=100, s=3.0, seed=0)]
    for ex in ((1, 1, 1), (2, 2, 1), (np.inf, 2, 2)):
        reports.append(verify_convolution(K=32, samples=100, s=2.0, exponents=ex, seed=0))
    reports.append(verify_convolution(K=32, samples=100, s=2.0, exponents=(1, 1, 1), seed=0, anisotropic=True))
    ok = all(r.finite and r.drift < 0.2 for r in reports)
    assert verdict("AC9 ensemble constants drift < 20%", ok,
                   ", ".join(f"{r.name} {r.drift:.4f}" for r in reports))


def test_ac10_strip_suite():
    rng = np.random.default_rng(10)
    g = StripGrid(8, 32)
    errs = []
    for kind, cls, fwd, inv in (("X", StripFieldX, strip_forward_X, strip_inverse_X),
                                ("Y", StripFieldY, strip_forward_Y, strip_inverse_Y)):
        c = rng.standard_normal(g.shape(kind)) + 1j * rng.standard_normal(g.shape(kind))
        f = cls(g, hermitian_part(c, axes=(0,)))
        errs.append(np.linalg.norm(fwd(inv(f), g).coeffs - f.coeffs) / np.linalg.norm(f.coeffs))
        if kind == "X":
            trace = np.max(np.abs(inv(f)[:, [0, -1]]))
    rates = linear_sweep("strip", (4, 512))
    # parity algebra against dense quadrature
    small = StripGrid(3, 8)
    fine = StripGrid(3, 8, M1=32, J=256)
    prod_err = 0.0
    for ka, kb in (("X", "X"), ("X", "Y"), ("Y", "Y")):
        a = (StripFieldX if ka == "X" else StripFieldY)(small, hermitian_part(
            rng.standard_normal(small.shape(ka)) + 1j * rng.standard_normal(small.shape(ka)), axes=(0,)))
        b = (StripFieldX if kb == "X" else StripFieldY)(small, hermitian_part(
            rng.standard_normal(small.shape(kb)) + 1j * rng.standard_normal(small.shape(kb)), axes=(0,)))
        prod = physical_product(a, b)
        samples = evaluate(a, (32, 256)) * evaluate(b, (32, 256))
        oracle = (strip_forward_X if prod.kind == "X" else strip_forward_Y)(samples, fine, check=False)
        prod_err = max(prod_err, float(np.max(np.abs(prod.coeffs - oracle.coeffs))))
    ok = max(errs) <= 1e-12 and trace <= 1e-10 and abs(rates["u2"] + 3.0) <= 0.2 and prod_err <= 1e-10
    assert verdict("AC10 strip suite", ok,
                   f"round-trip {max(errs):.1e}, wall trace {trace:.1e}, u2 rate {rates['u2']:.3f} (want -3.0), "
                   f"product error {prod_err:.1e}")


def test_ac11_etdrk4_self_convergence():
    base = dict(domain="torus", N=1.0, modes=(16, 16), T=1.0, snapshots=2,
                initial=InitialData("band", amplitude=2.0, band=3, seed=7))
    finals = [run(SolverConfig(dt=dt, **base)).final.coeffs for dt in (0.02, 0.01, 0.005)]
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    assert verdict("AC11 ETDRK4 self-convergence ratio in [12, 20]", 12 <= ratio <= 20, f"ratio {ratio:.3f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))

"""Acceptance gate: every criterion at its stated scale and tolerance.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line (run with ``-s`` to
see them live). The heavy criteria simulate up to 1e7 paths and together
take on the order of ten minutes; seeds are pinned so every run is
bit-reproducible.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from volbound import (
    BsQuote,
    SabrParams,
    atmi_curvature_rho0,
    atmi_slope_bound,
    bs_call,
    eq9_positivity,
    implied_vol,
    malliavin_functionals,
    simulate_paths,
    t1_bound,
    t2_exact,
    t3_exact,
    t4_exact,
    volswap_strike,
)
from volbound.experiments import (
    ORDERING_RHOS,
    check_closed_forms,
    figure_config,
    richardson_slope,
    run_sweep,
    sweep_inequality_checks,
)
from volbound.smile import atmi


def report(criterion: int, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion} {'PASS' if passed else 'FAIL'}: {detail}")


def test_criterion_1_implied_vol_round_trip():
    rng = np.random.default_rng(12345)
    n = 10_000
    sigmas = rng.uniform(0.01, 3.0, n)
    taus = rng.uniform(0.01, 2.0, n)
    moneyness = rng.uniform(-2.0, 2.0, n)
    xs = rng.uniform(-0.5, 0.5, n)
    start = time.perf_counter()
    worst = 0.0
    for sigma, tau, m, x in zip(sigmas, taus, moneyness, xs):
        k = x - m * sigma * math.sqrt(tau)
        price = bs_call(BsQuote(x, k, tau, sigma))
        worst = max(worst, abs(implied_vol(price, x, k, tau) - sigma))
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-10 and elapsed < 1.0
    report(1, passed, f"{n} round trips, worst error {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed < 1.0


def test_criterion_2_closed_forms_vs_quadrature():
    start = time.perf_counter()
    checks = check_closed_forms()
    elapsed = time.perf_counter() - start
    failed = [c for c in checks if not c.passed]
    passed = not failed and elapsed < 5.0
    report(2, passed, f"{len(checks)} closed-form checks, {elapsed:.2f}s")
    assert not failed, "\n".join(c.line() for c in failed)
    assert elapsed < 5.0


def test_criterion_3_malliavin_mc_equivalence():
    start = time.perf_counter()
    failures = []
    for alpha in (0.5, 1.0):
        for T in (0.5, 1.0):
            batch = simulate_paths(
                SabrParams(sigma0=0.3, alpha=alpha), T, 512, 100_000, 7, keep_paths=True
            )
            f1, f2, f3, f4 = malliavin_functionals(batch)
            tag = f"alpha={alpha:g}, T={T:g}"
            bound = t1_bound(alpha, 0.3, T)
            if not f1.value <= bound + 3.0 * f1.std_error:
                failures.append(f"{tag}: T1 {f1.value:.3e} above bound {bound:.3e}")
            for name, est, target in (
                ("T2", f2, t2_exact(alpha, 0.3, T)),
                ("T3", f3, t3_exact(alpha, 0.3, T)),
                ("T4", f4, t4_exact(alpha, 0.3, T)),
            ):
                if abs(est.value - target) > 3.0 * est.std_error:
                    failures.append(
                        f"{tag}: {name} {est.value:.6g} vs {target:.6g} "
                        f"(3 se = {3 * est.std_error:.2g})"
                    )
    elapsed = time.perf_counter() - start
    passed = not failures and elapsed < 120.0
    report(3, passed, f"4 configs x 1e5 full paths, {elapsed:.1f}s")
    assert not failures, "\n".join(failures)
    assert elapsed < 120.0


def test_criterion_4_figures_reduced_scale():
    start = time.perf_counter()
    all_failures = []
    for fig_id in (1, 2, 3, 4):
        cfg = figure_config(fig_id, paths=1_000_000, steps=512, seed=42)
        rows = run_sweep(cfg)
        ordering = ORDERING_RHOS if fig_id == 4 else ()
        checks = sweep_inequality_checks(f"fig{fig_id}", rows, ordering)
        all_failures.extend(c.line() for c in checks if not c.passed)
    elapsed = time.perf_counter() - start
    passed = not all_failures and elapsed < 600.0
    report(
        4,
        passed,
        f"4 figures x 21 rho points at 1e6 paths, "
        f"{len(all_failures)} failing checks, {elapsed:.1f}s",
    )
    assert not all_failures, "\n".join(all_failures)
    assert elapsed < 600.0


def test_criterion_5_atmi_slope_bound():
    start = time.perf_counter()
    slopes = richardson_slope(
        sigma0=0.3, alpha=0.5, rho=-0.5, paths=10_000_000, steps=512, seed=7
    )
    value, se = slopes["atmi"]
    bound = atmi_slope_bound(-0.5, 0.5, 0.3)
    assert bound == pytest.approx(-0.0028125)
    elapsed = time.perf_counter() - start
    passed = value <= bound + 3.0 * se and elapsed < 300.0
    report(
        5,
        passed,
        f"Richardson slope {value:+.6f} (se {se:.2g}) vs bound {bound:+.6f}, {elapsed:.1f}s",
    )
    assert value <= bound + 3.0 * se
    assert elapsed < 300.0


def test_criterion_6_zero_correlation_curvature():
    start = time.perf_counter()
    batch = simulate_paths(SabrParams(sigma0=0.3, alpha=1.0), 0.5, 512, 10_000_000, 7)
    vs = volswap_strike(batch)
    a = atmi(batch, 0.0)
    diff = a.value - vs.value
    se = a.std_error + vs.std_error
    predicted = atmi_curvature_rho0(1.0, 0.3) * 0.5**2
    assert predicted == pytest.approx(-2.8125e-4)
    ratio = diff / predicted
    elapsed = time.perf_counter() - start
    passed = diff <= -3.0 * se and 0.5 <= ratio <= 2.0 and elapsed < 180.0
    report(
        6,
        passed,
        f"atmi - volswap = {diff:+.3e} (3 se = {3 * se:.2e}), ratio {ratio:.3f}, {elapsed:.1f}s",
    )
    assert diff <= -3.0 * se
    assert 0.5 <= ratio <= 2.0
    assert elapsed < 180.0


def test_criterion_7_eq9_positivity():
    start = time.perf_counter()
    batch = simulate_paths(
        SabrParams(sigma0=0.3, alpha=1.0), 1.0, 256, 10_000, 7, keep_paths=True
    )
    rng = np.random.default_rng(7)
    worst = math.inf
    for i in range(batch.n):
        path = batch.sigma_paths[i]
        for r, s in rng.integers(0, batch.steps, size=(10, 2)):
            worst = min(worst, eq9_positivity(path, batch.dt, 1.0, int(r), int(s)))
    elapsed = time.perf_counter() - start
    passed = worst >= -1e-12 and elapsed < 30.0
    report(7, passed, f"min over 1e4 paths x 10 pairs = {worst:.3e}, {elapsed:.1f}s")
    assert worst >= -1e-12
    assert elapsed < 30.0


def test_criterion_8_cli_determinism(tmp_path):
    def run_once(workdir, threads):
        env = dict(os.environ, VOLBOUND_THREADS=str(threads))
        workdir.mkdir()
        out = workdir / "fig1.txt"
        result = subprocess.run(
            [
                sys.executable, "-m", "volbound.cli", "figure", "--id", "1",
                "--paths", "100000", "--seed", "7", "--no-plot", "--out", str(out),
            ],
            env=env,
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        return out.read_bytes(), (workdir / "fig1.se.txt").read_bytes()

    first = run_once(tmp_path / "one", 1)
    second = run_once(tmp_path / "two", 2)
    passed = first == second
    report(8, passed, "figure --id 1 --paths 100000 --seed 7 byte-identical across worker counts")
    assert first == second

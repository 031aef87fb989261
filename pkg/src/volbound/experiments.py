"""Correlation sweeps, TSV emission, and the verification report.

A sweep simulates one volatility batch per configuration and reuses it for
every correlation and every strike (common random numbers), so the three
curves per figure (volswap strike, zero-vanna implied vol, ATM implied
vol) are smooth functions of the correlation and the volswap column is
constant by construction.

The verification report re-derives the closed forms by adaptive nested
quadrature, checks the Monte Carlo functionals against them, and runs the
inequality suite behind the figures at 3-standard-error tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from . import asymptotics
from .errors import InvalidConfigError, VolboundError
from .estimators import malliavin_functionals, volswap_strike
from .sabr import SabrParams, simulate_paths
from .smile import zero_vanna

#: (alpha, T) per figure id; every figure uses sigma0 = 0.3 and a rho grid
#: from -1 to 1 in 0.1 increments.
FIGURE_PRESETS: dict[int, tuple[float, float]] = {
    1: (0.5, 0.5),
    2: (0.5, 1.0),
    3: (1.0, 0.5),
    4: (1.0, 1.0),
}

#: Axis windows of the reference plots, keyed by figure id.
FIGURE_YLIM: dict[int, tuple[float, float]] = {
    1: (0.28, 0.32),
    2: (0.28, 0.32),
    3: (0.25, 0.35),
    4: (0.25, 0.35),
}


@dataclass
class SweepConfig:
    """Full description of one correlation sweep."""

    sigma0: float
    alpha: float
    T: float
    rho_start: float = -1.0
    rho_end: float = 1.0
    rho_step: float = 0.1
    paths: int = 10_000_000
    steps: int = 512
    seed: int = 42
    x0: float = 0.0
    out: str | None = None

    def validate(self) -> None:
        if not (self.sigma0 > 0.0 and self.alpha > 0.0 and self.T > 0.0):
            raise InvalidConfigError(
                f"sigma0, alpha, T must be positive, got {self.sigma0}, {self.alpha}, {self.T}"
            )
        if self.rho_step <= 0.0:
            raise InvalidConfigError(f"rho_step must be positive, got {self.rho_step}")
        if self.rho_end < self.rho_start:
            raise InvalidConfigError("rho_end must be >= rho_start")
        if self.paths < 1 or self.steps < 1:
            raise InvalidConfigError(
                f"paths and steps must be >= 1, got {self.paths}, {self.steps}"
            )
        grid = self.rho_grid()
        if grid[0] < -1.0 or grid[-1] > 1.0:
            raise InvalidConfigError(f"rho grid must stay in [-1, 1], got {grid[0]}..{grid[-1]}")

    def rho_grid(self) -> list[float]:
        """Inclusive grid from rho_start to rho_end, cleaned of float fuzz."""
        count = int(math.floor((self.rho_end - self.rho_start) / self.rho_step + 1e-9)) + 1
        return [round(self.rho_start + i * self.rho_step, 12) for i in range(count)]

    def params(self) -> SabrParams:
        # rho lives on the estimator side; the simulated batch never uses it
        return SabrParams(sigma0=self.sigma0, alpha=self.alpha, rho=0.0, x0=self.x0)


@dataclass(frozen=True)
class SweepRow:
    """One rho grid point of a sweep: the three curve values plus errors."""

    rho: float
    volswap: float
    zviv: float
    atmi: float
    volswap_se: float
    zviv_se: float
    atmi_se: float


def figure_config(
    fig_id: int,
    paths: int = 10_000_000,
    steps: int = 512,
    seed: int = 42,
    out: str | None = None,
) -> SweepConfig:
    """Sweep configuration of one of the four reference figures."""
    if fig_id not in FIGURE_PRESETS:
        raise InvalidConfigError(f"figure id must be in {sorted(FIGURE_PRESETS)}, got {fig_id}")
    alpha, T = FIGURE_PRESETS[fig_id]
    return SweepConfig(
        sigma0=0.3,
        alpha=alpha,
        T=T,
        paths=paths,
        steps=steps,
        seed=seed,
        out=out or f"fig{fig_id}.txt",
    )


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Simulate once, then solve ZVIV and ATMI on every rho of the grid.

    The volswap strike is computed once (it is rho-free); solver errors are
    re-raised annotated with the failing rho.
    """
    cfg.validate()
    batch = simulate_paths(cfg.params(), cfg.T, cfg.steps, cfg.paths, cfg.seed)
    vs = volswap_strike(batch)
    rows = []
    for rho in cfg.rho_grid():
        try:
            sol = zero_vanna(batch, rho)
        except VolboundError as exc:
            raise type(exc)(f"rho={rho:g}: {exc}") from exc
        rows.append(
            SweepRow(
                rho=rho,
                volswap=vs.value,
                zviv=sol.zviv.value,
                atmi=sol.atmi.value,
                volswap_se=vs.std_error,
                zviv_se=sol.zviv.std_error,
                atmi_se=sol.atmi.std_error,
            )
        )
    return rows


def write_tsv(rows: list[SweepRow], path: str | Path) -> Path:
    """Write sweep rows as tab-separated columns ``x y1 y2 y3``.

    ``y1`` is the volswap strike, ``y2`` the zero-vanna implied vol, ``y3``
    the ATM implied vol, all with 10 significant digits. A sibling file
    ``<name>.se.txt`` carries the standard errors in the same layout.
    Output bytes are a pure function of the rows.
    """
    if not rows:
        raise InvalidConfigError("rows must be nonempty")
    path = Path(path)

    def fmt(row: SweepRow, values: tuple[float, float, float]) -> str:
        return "\t".join([f"{row.rho:.10g}"] + [f"{v:.10g}" for v in values])

    header = "x\ty1\ty2\ty3"
    main = [header] + [fmt(r, (r.volswap, r.zviv, r.atmi)) for r in rows]
    se = [header] + [fmt(r, (r.volswap_se, r.zviv_se, r.atmi_se)) for r in rows]
    path.write_text("\n".join(main) + "\n", encoding="utf-8")
    path.with_suffix(".se.txt").write_text("\n".join(se) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Quadrature oracles: independent re-derivations of the closed forms by
# adaptive (Gauss-Kronrod) nesting of the defining iterated integrals.
# Verification-only; the production formulas in `asymptotics` never call
# these.
# ---------------------------------------------------------------------------

_QUAD = dict(epsabs=0.0, epsrel=1e-12, limit=200)


def t1_bound_quadrature(alpha: float, sigma0: float, T: float) -> float:
    """``T * I[0,T]((T-s) I[s,T](4 a s0^4 e^{6 a r} dr) ds)`` with a = alpha^2."""
    a = alpha**2

    def inner(s: float) -> float:
        return quad(lambda r: math.exp(6.0 * a * r), s, T, **_QUAD)[0]

    outer = quad(lambda s: (T - s) * inner(s), 0.0, T, **_QUAD)[0]
    return 4.0 * a * sigma0**4 * T * outer


def t2_exact_quadrature(alpha: float, sigma0: float, T: float) -> float:
    """``2 a s0^3 I[s<r<u](e^{a u + 2 a r})`` with a = alpha^2."""
    a = alpha**2

    def inner(r: float) -> float:
        return quad(lambda u: math.exp(a * u + 2.0 * a * r), r, T, **_QUAD)[0]

    def mid(s: float) -> float:
        return quad(inner, s, T, **_QUAD)[0]

    return 2.0 * a * sigma0**3 * quad(mid, 0.0, T, **_QUAD)[0]


def t3_exact_quadrature(alpha: float, sigma0: float, T: float) -> float:
    """``4 a s0^2 I[s<r<u](e^{a u})`` with a = alpha^2."""
    a = alpha**2

    def inner(r: float) -> float:
        return quad(lambda u: math.exp(a * u), r, T, **_QUAD)[0]

    def mid(s: float) -> float:
        return quad(inner, s, T, **_QUAD)[0]

    return 4.0 * a * sigma0**2 * quad(mid, 0.0, T, **_QUAD)[0]


def t4_exact_quadrature(alpha: float, sigma0: float, T: float) -> float:
    """``2 alpha s0^2 I[s<r](e^{a r})`` with a = alpha^2."""
    a = alpha**2

    def inner(s: float) -> float:
        return quad(lambda r: math.exp(a * r), s, T, **_QUAD)[0]

    return 2.0 * alpha * sigma0**2 * quad(inner, 0.0, T, **_QUAD)[0]


def atmi_curvature_rho0_quadrature(alpha: float, sigma0: float, T: float = 1e-3) -> float:
    """Zero-correlation curvature from its defining limit at small T.

    Evaluates ``-(1/(32 sigma0)) * (1/T^3) * I[0,T](E[sigma_r^4]
    * (2 alpha (e^{a (T-r)} - 1) / a)^2 dr)`` with a = alpha^2, which
    converges to ``-alpha^2 sigma0^3 / 24`` as T -> 0.
    """
    a = alpha**2

    def integrand(r: float) -> float:
        fourth_moment = sigma0**4 * math.exp(6.0 * a * r)
        weight = 2.0 * alpha * math.expm1(a * (T - r)) / a
        return fourth_moment * weight * weight

    val = quad(integrand, 0.0, T, **_QUAD)[0]
    return -val / (32.0 * sigma0 * T**3)


# ---------------------------------------------------------------------------
# Verification report
# ---------------------------------------------------------------------------

#: Parameter grid for closed-form/quadrature equivalence.
CLOSED_FORM_GRID = [
    (alpha, sigma0, T)
    for alpha in (0.25, 0.5, 1.0)
    for sigma0 in (0.1, 0.3)
    for T in (0.1, 0.5, 1.0)
]


@dataclass(frozen=True)
class CheckResult:
    """One verification entry: PASS/FAIL with a human-readable detail."""

    section: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.section}/{self.name}: {self.detail}"


@dataclass
class VerifyReport:
    """Collected verification entries; overall status is the conjunction."""

    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]

    def to_json(self) -> str:
        return json.dumps(
            {
                "passed": self.passed,
                "checks": [
                    {
                        "section": c.section,
                        "name": c.name,
                        "passed": c.passed,
                        "detail": c.detail,
                    }
                    for c in self.checks
                ],
            },
            indent=2,
        )


def check_closed_forms(grid=CLOSED_FORM_GRID, taylor_T: float = 1e-3) -> list[CheckResult]:
    """Closed forms vs nested quadrature (1e-10 relative) and Taylor ratios."""
    section = "closed-forms"
    out = []
    pairs = [
        ("t1_bound", asymptotics.t1_bound, t1_bound_quadrature, asymptotics.t1_leading),
        ("t2", asymptotics.t2_exact, t2_exact_quadrature, asymptotics.t2_leading),
        ("t3", asymptotics.t3_exact, t3_exact_quadrature, asymptotics.t3_leading),
        ("t4", asymptotics.t4_exact, t4_exact_quadrature, asymptotics.t4_leading),
    ]
    for name, closed, oracle, _ in pairs:
        worst = 0.0
        for alpha, sigma0, T in grid:
            c = closed(alpha, sigma0, T)
            q = oracle(alpha, sigma0, T)
            worst = max(worst, abs(c / q - 1.0))
        out.append(
            CheckResult(
                section,
                f"{name}-vs-quadrature",
                worst <= 1e-10,
                f"max relative deviation {worst:.3e} over {len(grid)} grid points (tol 1e-10)",
            )
        )
    for name, closed, _, leading in pairs:
        worst = 0.0
        for alpha, sigma0 in {(a, s) for a, s, _ in grid}:
            ratio = closed(alpha, sigma0, taylor_T) / leading(alpha, sigma0, taylor_T)
            worst = max(worst, abs(ratio - 1.0))
        out.append(
            CheckResult(
                section,
                f"{name}-taylor-ratio",
                worst <= 0.01,
                f"max |ratio - 1| = {worst:.3e} at T={taylor_T:g} (tol 1%)",
            )
        )
    curv = atmi_curvature_rho0_quadrature(1.0, 0.3)
    target = asymptotics.atmi_curvature_rho0(1.0, 0.3)
    out.append(
        CheckResult(
            section,
            "curvature-constant-lock",
            abs(curv / target - 1.0) <= 5e-3,
            f"limit quadrature {curv:.6e} vs closed {target:.6e}",
        )
    )
    return out


def check_malliavin(
    paths: int = 100_000,
    steps: int = 512,
    seed: int = 7,
    sigma0: float = 0.3,
    alphas: tuple[float, ...] = (0.5, 1.0),
    horizons: tuple[float, ...] = (0.5, 1.0),
) -> list[CheckResult]:
    """Pathwise functional estimates vs their closed forms, 3 s.e. each.

    The squared functional only has a closed-form upper bound, so it is
    checked one-sided.
    """
    section = "malliavin"
    out = []
    for alpha in alphas:
        for T in horizons:
            p = SabrParams(sigma0=sigma0, alpha=alpha)
            batch = simulate_paths(p, T, steps, paths, seed, keep_paths=True)
            f1, f2, f3, f4 = malliavin_functionals(batch)
            tag = f"alpha={alpha:g},T={T:g}"
            bound = asymptotics.t1_bound(alpha, sigma0, T)
            out.append(
                CheckResult(
                    section,
                    f"T1-bounded[{tag}]",
                    f1.value <= bound + 3.0 * f1.std_error,
                    f"estimate {f1.value:.6g} (se {f1.std_error:.2g}) <= bound {bound:.6g}",
                )
            )
            for label, est, target in (
                ("T2", f2, asymptotics.t2_exact(alpha, sigma0, T)),
                ("T3", f3, asymptotics.t3_exact(alpha, sigma0, T)),
                ("T4", f4, asymptotics.t4_exact(alpha, sigma0, T)),
            ):
                gap = abs(est.value - target)
                out.append(
                    CheckResult(
                        section,
                        f"{label}-matches[{tag}]",
                        gap <= 3.0 * est.std_error,
                        f"|{est.value:.6g} - {target:.6g}| = {gap:.2g} vs 3 se = {3*est.std_error:.2g}",
                    )
                )
    return out


def sweep_inequality_checks(
    label: str, rows: list[SweepRow], ordering_rhos: tuple[float, ...] = ()
) -> list[CheckResult]:
    """The 3-s.e. PASS rules applied to finished sweep rows.

    Per grid point: the zero-vanna implied vol must not exceed the volswap
    strike by more than 3 combined standard errors (every rho); the ATM
    implied vol is held to the same rule for rho <= 0 only. For the rhos in
    ``ordering_rhos`` the zero-vanna estimate must also be strictly closer
    to the volswap strike than the ATM one.
    """
    out = []
    for row in rows:
        se = row.zviv_se + row.volswap_se
        excess = row.zviv - row.volswap
        out.append(
            CheckResult(
                label,
                f"zviv<=volswap[rho={row.rho:+g}]",
                excess <= 3.0 * se,
                f"zviv - volswap = {excess:+.3e} vs 3 se = {3*se:.3e}",
            )
        )
        if row.rho <= 0.0:
            se_a = row.atmi_se + row.volswap_se
            excess_a = row.atmi - row.volswap
            out.append(
                CheckResult(
                    label,
                    f"atmi<=volswap[rho={row.rho:+g}]",
                    excess_a <= 3.0 * se_a,
                    f"atmi - volswap = {excess_a:+.3e} vs 3 se = {3*se_a:.3e}",
                )
            )
    by_rho = {row.rho: row for row in rows}
    for rho in ordering_rhos:
        row = by_rho.get(round(rho, 12))
        if row is None:
            continue
        z_gap = abs(row.zviv - row.volswap)
        a_gap = abs(row.atmi - row.volswap)
        out.append(
            CheckResult(
                label,
                f"zviv-closer-than-atmi[rho={row.rho:+g}]",
                z_gap < a_gap,
                f"|zviv - volswap| = {z_gap:.3e} vs |atmi - volswap| = {a_gap:.3e}",
            )
        )
    return out


#: rhos whose ZVIV/ATMI ordering is asserted on the (alpha=1, T=1) sweep.
ORDERING_RHOS = tuple(round(s * v, 1) for v in (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9) for s in (-1, 1))


def check_figures(configs: list[SweepConfig]) -> tuple[list[CheckResult], dict[str, list[SweepRow]]]:
    """Run every configured sweep and apply the inequality rules."""
    out = []
    all_rows = {}
    for i, cfg in enumerate(configs, start=1):
        label = f"figure{i}"
        rows = run_sweep(cfg)
        all_rows[label] = rows
        ordering = ORDERING_RHOS if (cfg.alpha, cfg.T) == (1.0, 1.0) else ()
        out.extend(sweep_inequality_checks(label, rows, ordering))
    return out, all_rows


def richardson_slope(
    sigma0: float,
    alpha: float,
    rho: float,
    paths: int,
    steps: int,
    seed: int,
    horizons: tuple[float, float] = (0.05, 0.025),
) -> dict[str, tuple[float, float]]:
    """Extrapolated short-maturity slope of (implied vol - volswap) / T.

    Evaluates the slope at the two horizons (same seed, so the batches are
    driven by common random numbers) and removes the linear-in-T error with
    ``2 * slope(T/2) - slope(T)``. Standard errors combine conservatively.
    Returns slopes for both the ATM and the zero-vanna implied volatility
    as ``(value, se)`` pairs.
    """
    coarse, fine = horizons
    if not fine < coarse:
        raise InvalidConfigError(f"need horizons[1] < horizons[0], got {horizons}")
    slopes: dict[str, list[tuple[float, float]]] = {"atmi": [], "zviv": []}
    for T in (coarse, fine):
        p = SabrParams(sigma0=sigma0, alpha=alpha)
        batch = simulate_paths(p, T, steps, paths, seed)
        vs = volswap_strike(batch)
        sol = zero_vanna(batch, rho)
        for key, est in (("atmi", sol.atmi), ("zviv", sol.zviv)):
            slopes[key].append(
                ((est.value - vs.value) / T, (est.std_error + vs.std_error) / T)
            )
    out = {}
    for key, [(s_coarse, e_coarse), (s_fine, e_fine)] in slopes.items():
        out[key] = (2.0 * s_fine - s_coarse, 2.0 * e_fine + e_coarse)
    return out


def check_slope(
    sigma0: float = 0.3,
    alpha: float = 0.5,
    rho: float = -0.5,
    paths: int = 10_000_000,
    steps: int = 512,
    seed: int = 7,
) -> list[CheckResult]:
    """Short-maturity slopes vs their closed-form bounds (3 s.e.)."""
    section = "slope"
    slopes = richardson_slope(sigma0, alpha, rho, paths, steps, seed)
    atmi_bound = asymptotics.atmi_slope_bound(rho, alpha, sigma0)
    zviv_bound = asymptotics.zviv_slope_limit()
    value, se = slopes["atmi"]
    out = [
        CheckResult(
            section,
            "atmi-slope<=bound",
            value <= atmi_bound + 3.0 * se,
            f"slope {value:+.6g} (se {se:.2g}) vs bound {atmi_bound:+.6g}",
        )
    ]
    value, se = slopes["zviv"]
    out.append(
        CheckResult(
            section,
            "zviv-slope<=0",
            value <= zviv_bound + 3.0 * se,
            f"slope {value:+.6g} (se {se:.2g}) vs bound {zviv_bound:+g}",
        )
    )
    return out


def check_curvature(
    sigma0: float = 0.3,
    alpha: float = 1.0,
    T: float = 0.5,
    paths: int = 10_000_000,
    steps: int = 512,
    seed: int = 7,
) -> list[CheckResult]:
    """Zero-correlation gap: sign by 3 s.e. and magnitude vs the T^2 law."""
    section = "curvature"
    from .smile import atmi as atmi_solver

    p = SabrParams(sigma0=sigma0, alpha=alpha)
    batch = simulate_paths(p, T, steps, paths, seed)
    vs = volswap_strike(batch)
    a = atmi_solver(batch, 0.0)
    diff = a.value - vs.value
    se = a.std_error + vs.std_error
    predicted = asymptotics.atmi_curvature_rho0(alpha, sigma0) * T**2
    ratio = diff / predicted
    return [
        CheckResult(
            section,
            "atmi-below-volswap",
            diff <= -3.0 * se,
            f"atmi - volswap = {diff:+.3e} vs -3 se = {-3*se:.3e}",
        ),
        CheckResult(
            section,
            "magnitude-vs-T2-law",
            0.5 <= ratio <= 2.0,
            f"ratio to predicted {predicted:+.3e} is {ratio:.3f} (window [0.5, 2])",
        ),
    ]


def check_eq9(
    paths: int = 10_000,
    steps: int = 256,
    pairs: int = 10,
    seed: int = 7,
    sigma0: float = 0.3,
    alpha: float = 1.0,
    T: float = 1.0,
) -> list[CheckResult]:
    """Pathwise positivity functional over random index pairs (tol -1e-12)."""
    section = "eq9"
    p = SabrParams(sigma0=sigma0, alpha=alpha)
    batch = simulate_paths(p, T, steps, paths, seed, keep_paths=True)
    rng = np.random.Generator(np.random.Philox(key=[seed, 0xE9]))
    worst = math.inf
    dt = batch.dt
    for i in range(paths):
        path = batch.sigma_paths[i]
        for r, s in rng.integers(0, steps, size=(pairs, 2)):
            value = asymptotics.eq9_positivity(path, dt, alpha, int(r), int(s))
            worst = min(worst, value)
    return [
        CheckResult(
            section,
            "pathwise-positivity",
            worst >= -1e-12,
            f"min over {paths} paths x {pairs} pairs = {worst:.3e} (tol -1e-12)",
        )
    ]


ALL_SECTIONS = ("closed-forms", "malliavin", "figures", "slope", "curvature", "eq9")


def verify_report(
    configs: list[SweepConfig] | None = None,
    sections: tuple[str, ...] = ALL_SECTIONS,
    sweep_paths: int = 1_000_000,
    slope_paths: int = 10_000_000,
    malliavin_paths: int = 100_000,
    eq9_paths: int = 10_000,
    steps: int = 512,
    seed: int = 7,
) -> VerifyReport:
    """Assemble the full verification report.

    ``configs`` defaults to the four reference-figure presets at
    ``sweep_paths`` paths. Failures are report entries, never exceptions;
    the caller maps ``report.passed`` to an exit status.
    """
    unknown = set(sections) - set(ALL_SECTIONS)
    if unknown:
        raise InvalidConfigError(f"unknown verify sections: {sorted(unknown)}")
    report = VerifyReport()
    if "closed-forms" in sections:
        report.checks.extend(check_closed_forms())
    if "malliavin" in sections:
        report.checks.extend(check_malliavin(paths=malliavin_paths, steps=steps, seed=seed))
    if "figures" in sections:
        if configs is None:
            configs = [
                figure_config(i, paths=sweep_paths, steps=steps, seed=seed) for i in (1, 2, 3, 4)
            ]
        checks, _ = check_figures(configs)
        report.checks.extend(checks)
    if "slope" in sections:
        report.checks.extend(check_slope(paths=slope_paths, steps=steps, seed=seed))
    if "curvature" in sections:
        report.checks.extend(check_curvature(paths=slope_paths, steps=steps, seed=seed))
    if "eq9" in sections:
        report.checks.extend(check_eq9(paths=eq9_paths, seed=seed))
    return report

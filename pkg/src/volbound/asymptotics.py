"""Closed-form short-maturity functionals and slope/curvature bounds.

The four moment functionals below are iterated time integrals of lognormal
volatility moments, evaluated in closed form at start time zero. Their
small-T leading terms combine into the short-maturity slope of the implied
volatility relative to the volatility swap strike: the three quadratic
correlation terms cancel exactly, leaving ``rho alpha sigma0^2 / 8`` for
the at-the-money strike and zero for the zero-vanna strike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError

#: Below this vol-of-vol the closed forms switch to their Taylor leading
#: terms: the exact expressions difference O(1/alpha^k) exponentials and
#: lose all precision to cancellation as alpha -> 0.
ALPHA_TINY = 1e-8


def _check_positive(**kwargs: float) -> None:
    for name, v in kwargs.items():
        if not (v > 0.0 and math.isfinite(v)):
            raise InvalidConfigError(f"{name} must be positive, got {v}")


def t1_leading(alpha: float, sigma0: float, T: float) -> float:
    """Small-T leading term ``(4 alpha^2 sigma0^4 / 3) T^4``."""
    return (4.0 / 3.0) * alpha**2 * sigma0**4 * T**4


def t1_bound(alpha: float, sigma0: float, T: float) -> float:
    """Upper bound for the squared doubly-integrated variance sensitivity.

    Cauchy-Schwarz turns the square of the double integral into
    ``T * I[0,T]((T-s) * I[s,T](4 alpha^2 sigma0^4 e^{6 alpha^2 r} dr) ds)``,
    which integrates to

    ``4 alpha^2 sigma0^4 (e^{6 a T} T^3 / (12 a) + T^2 / (36 a^2)
    - (e^{6 a T} - 1) T / (216 a^3))`` with ``a = alpha^2``.
    """
    _check_positive(alpha=alpha, sigma0=sigma0, T=T)
    if alpha < ALPHA_TINY:
        return t1_leading(alpha, sigma0, T)
    a = alpha**2
    e6 = math.exp(6.0 * a * T)
    bracket = (
        e6 * T**3 / (12.0 * a)
        + T**2 / (36.0 * a**2)
        - math.expm1(6.0 * a * T) * T / (216.0 * a**3)
    )
    return 4.0 * a * sigma0**4 * bracket


def t2_leading(alpha: float, sigma0: float, T: float) -> float:
    """Small-T leading term ``(alpha^2 sigma0^3 / 3) T^3``."""
    return alpha**2 * sigma0**3 * T**3 / 3.0


def t2_exact(alpha: float, sigma0: float, T: float) -> float:
    """Mixed volatility/variance sensitivity moment.

    Closed form of ``2 alpha^2 sigma0^3`` times the time-ordered triple
    integral of ``e^{a u + 2 a r}`` over ``s < r < u`` with ``a = alpha^2``:

    ``2 alpha^2 sigma0^3 (e^{3aT} T / (2 a^2) - (e^{3aT} - e^{aT}) / (4 a^3)
    - e^{3aT} T / (3 a^2) + (e^{3aT} - 1) / (9 a^3))``.
    """
    _check_positive(alpha=alpha, sigma0=sigma0, T=T)
    if alpha < ALPHA_TINY:
        return t2_leading(alpha, sigma0, T)
    a = alpha**2
    e3 = math.exp(3.0 * a * T)
    e1 = math.exp(a * T)
    # e^{3aT} - e^{aT} as e^{aT} expm1(2aT): the direct difference loses
    # relative precision for small aT and the 1/a^3 weight amplifies it.
    bracket = (
        e3 * T / (6.0 * a**2)
        - e1 * math.expm1(2.0 * a * T) / (4.0 * a**3)
        + math.expm1(3.0 * a * T) / (9.0 * a**3)
    )
    return 2.0 * a * sigma0**3 * bracket


def t3_leading(alpha: float, sigma0: float, T: float) -> float:
    """Small-T leading term ``(2 alpha^2 sigma0^2 / 3) T^3``."""
    return 2.0 * alpha**2 * sigma0**2 * T**3 / 3.0


def t3_exact(alpha: float, sigma0: float, T: float) -> float:
    """Second-order variance sensitivity moment.

    ``4 alpha^2 sigma0^2 (e^{aT} T^2 / (2a) - e^{aT} T / a^2 + (e^{aT} - 1) / a^3)``
    with ``a = alpha^2``.
    """
    _check_positive(alpha=alpha, sigma0=sigma0, T=T)
    if alpha < ALPHA_TINY:
        return t3_leading(alpha, sigma0, T)
    a = alpha**2
    e1 = math.exp(a * T)
    bracket = e1 * T**2 / (2.0 * a) - e1 * T / a**2 + math.expm1(a * T) / a**3
    return 4.0 * a * sigma0**2 * bracket


def t4_leading(alpha: float, sigma0: float, T: float) -> float:
    """Small-T leading term ``alpha sigma0^2 T^2``."""
    return alpha * sigma0**2 * T**2


def t4_exact(alpha: float, sigma0: float, T: float) -> float:
    """First-order integrated variance sensitivity moment.

    ``2 alpha sigma0^2 (e^{aT} T / a - (e^{aT} - 1) / a^2)`` with
    ``a = alpha^2``.
    """
    _check_positive(alpha=alpha, sigma0=sigma0, T=T)
    if alpha < ALPHA_TINY:
        return t4_leading(alpha, sigma0, T)
    a = alpha**2
    bracket = math.exp(a * T) * T / a - math.expm1(a * T) / a**2
    return 2.0 * alpha * sigma0**2 * bracket


def atmi_slope_bound(rho: float, alpha: float, sigma0: float) -> float:
    """``rho alpha sigma0^2 / 8``, bounding the short-maturity limit of
    ``(ATM implied vol - volswap strike) / T`` from above for ``rho <= 0``.

    Negative for ``rho < 0``: the at-the-money implied volatility is then a
    lower bound for the volatility swap strike near expiry.
    """
    if not -1.0 <= rho <= 1.0:
        raise InvalidConfigError(f"rho must be in [-1, 1], got {rho}")
    _check_positive(alpha=alpha, sigma0=sigma0)
    return rho * alpha * sigma0**2 / 8.0


def zviv_slope_limit() -> float:
    """Upper bound for the short-maturity limit of
    ``(zero-vanna implied vol - volswap strike) / T``.

    Identically zero: at the zero-vanna strike the linear correlation term
    drops out and the remaining quadratic terms cancel for every ``rho``,
    making the zero-vanna implied volatility a lower bound regardless of
    correlation.
    """
    return 0.0


def atmi_curvature_rho0(alpha: float, sigma0: float) -> float:
    """Limit of ``(ATM implied vol - volswap strike) / T^2`` at zero correlation.

    Specializing the uncorrelated curvature formula to lognormal
    volatility gives ``-(1 / (32 sigma0)) * (4 alpha^2 sigma0^4 / 3)
    = -alpha^2 sigma0^3 / 24``. Always negative, so the ATM implied
    volatility lies below the volatility swap strike near expiry.
    """
    _check_positive(alpha=alpha, sigma0=sigma0)
    return -(alpha**2) * sigma0**3 / 24.0


def eq9_positivity(
    sigma_path: np.ndarray,
    dt: float,
    alpha: float,
    r: int,
    s: int,
    t0: int = 0,
) -> float:
    """Pathwise positivity functional behind the zero-vanna lower bound.

    On a discretized volatility path evaluates

    ``-(1 / (2 I[t0,T] sigma^2)) * (2 alpha I[s,T] sigma^2)
    * (2 alpha I[r,T] sigma^2) + 4 alpha^2 I[max(r,s),T] sigma^2``

    with trapezoidal tail integrals on the grid. Because the total variance
    from ``t0`` dominates each tail, the expression is non-negative on
    every path; the property suite checks it against a ``-1e-12``
    tolerance.

    Parameters
    ----------
    sigma_path : ndarray
        Volatility values on a uniform grid.
    dt : float
        Grid spacing.
    r, s, t0 : int
        Grid indices with ``t0 <= r, s < len(sigma_path) - 1``.
    """
    _check_positive(dt=dt, alpha=alpha)
    last = len(sigma_path) - 1
    if not (0 <= t0 <= min(r, s) and max(r, s) < last):
        raise IndexError(
            f"need t0 <= r, s < last grid index, got t0={t0}, r={r}, s={s}, last={last}"
        )
    sig2 = np.asarray(sigma_path, dtype=float) ** 2

    def tail(i: int) -> float:
        return float(np.trapezoid(sig2[i:], dx=dt))

    total = tail(t0)
    return (
        -(2.0 * alpha * tail(s)) * (2.0 * alpha * tail(r)) / (2.0 * total)
        + 4.0 * alpha**2 * tail(max(r, s))
    )


@dataclass(frozen=True)
class AsymptoticReport:
    """All closed-form quantities at one ``(alpha, sigma0, T, rho)`` point."""

    alpha: float
    sigma0: float
    T: float
    rho: float
    t1_bound: float
    t2: float
    t3: float
    t4: float
    t1_leading: float
    t2_leading: float
    t3_leading: float
    t4_leading: float
    atmi_slope_bound: float
    zviv_slope_bound: float
    atmi_curvature_rho0: float


def asymptotic_report(alpha: float, sigma0: float, T: float, rho: float) -> AsymptoticReport:
    """Evaluate every closed form of this module at one parameter point."""
    return AsymptoticReport(
        alpha=alpha,
        sigma0=sigma0,
        T=T,
        rho=rho,
        t1_bound=t1_bound(alpha, sigma0, T),
        t2=t2_exact(alpha, sigma0, T),
        t3=t3_exact(alpha, sigma0, T),
        t4=t4_exact(alpha, sigma0, T),
        t1_leading=t1_leading(alpha, sigma0, T),
        t2_leading=t2_leading(alpha, sigma0, T),
        t3_leading=t3_leading(alpha, sigma0, T),
        t4_leading=t4_leading(alpha, sigma0, T),
        atmi_slope_bound=atmi_slope_bound(rho, alpha, sigma0),
        zviv_slope_bound=zviv_slope_limit(),
        atmi_curvature_rho0=atmi_curvature_rho0(alpha, sigma0),
    )

"""Normal-distribution and Black-Scholes call analytics in log coordinates.

All prices are undiscounted (zero rates) and expressed in log spot ``x``
and log strike ``k``, so a call is worth ``e^x N(d1) - e^k N(d2)``.
Functions here are scalar, pure and stateless; the Monte Carlo engine has
its own vectorized pricing path that follows the same formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoConvergenceError, OutOfBoundsError

#: Upper end of the implied-volatility search bracket.
SIGMA_MAX = 5.0

#: Lower end of the implied-volatility search bracket.
SIGMA_MIN = 1e-9

#: Absolute price tolerance of the implied-volatility inversion.
PRICE_TOL = 1e-12

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2 = math.sqrt(2.0)


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function.

    Accurate to ~1 ulp (absolute error well below 1e-15), which matters
    because quantities based on d2 near zero drive the zero-vanna root
    finder.
    """
    return 0.5 * math.erfc(-z / _SQRT_2)


def normal_pdf(z: float) -> float:
    """Standard normal density."""
    return math.exp(-0.5 * z * z) * _INV_SQRT_2PI


@dataclass(frozen=True)
class BsQuote:
    """One European call quote in log coordinates.

    Attributes
    ----------
    x : float
        Log spot price.
    k : float
        Log strike.
    tau : float
        Time to maturity in years, must be positive.
    sigma : float
        Annualized volatility. Strictly positive in normal use;
        ``sigma = 0`` is admitted as a declared limit case in which
        :func:`bs_call` returns intrinsic value (the mixing estimator
        needs the degenerate ``|rho| = 1`` branch).
    """

    x: float
    k: float
    tau: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.k)):
            raise ValueError(f"x and k must be finite, got x={self.x}, k={self.k}")
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


def d1d2(q: BsQuote) -> tuple[float, float]:
    """The two Black-Scholes arguments of the normal CDF.

    ``d1 = (x-k)/(sigma sqrt(tau)) + sigma sqrt(tau)/2`` and
    ``d2 = d1 - sigma sqrt(tau)``.

    Raises
    ------
    ValueError
        If ``sigma * sqrt(tau) == 0`` (the quote is degenerate).
    """
    srt = q.sigma * math.sqrt(q.tau)
    if srt == 0.0:
        raise ValueError("d1/d2 undefined: sigma * sqrt(tau) is zero")
    m = (q.x - q.k) / srt
    half = 0.5 * srt
    return m + half, m - half


def bs_call(q: BsQuote) -> float:
    """Undiscounted Black-Scholes call price ``e^x N(d1) - e^k N(d2)``.

    The ``sigma*sqrt(tau) = 0`` limit returns intrinsic value
    ``max(e^x - e^k, 0)`` rather than erroring.
    """
    if q.sigma * math.sqrt(q.tau) == 0.0:
        return max(math.exp(q.x) - math.exp(q.k), 0.0)
    d1, d2 = d1d2(q)
    return math.exp(q.x) * normal_cdf(d1) - math.exp(q.k) * normal_cdf(d2)


def bs_vega(q: BsQuote) -> float:
    """Price sensitivity to volatility, ``e^x phi(d1) sqrt(tau)``."""
    d1, _ = d1d2(q)
    return math.exp(q.x) * normal_pdf(d1) * math.sqrt(q.tau)


def implied_vol(price: float, x: float, k: float, tau: float, max_iter: int = 200) -> float:
    """Invert the Black-Scholes call formula for volatility.

    Newton iterations with the analytic vega, guarded by bisection on the
    bracket ``[SIGMA_MIN, SIGMA_MAX]``; falls back to a pure bisection step
    whenever vega is tiny or the Newton step leaves the bracket. The
    stopping rule is in price space (absolute tolerance ``PRICE_TOL``),
    with the Newton step additionally required to be small so the returned
    volatility is accurate even where vega is moderate.

    Parameters
    ----------
    price : float
        Observed call price, strictly inside ``(max(e^x - e^k, 0), e^x)``.
    x, k, tau : float
        Log spot, log strike and time to maturity in years.

    Returns
    -------
    float
        Volatility in ``(0, SIGMA_MAX]`` reproducing ``price`` to
        ``PRICE_TOL``.

    Raises
    ------
    OutOfBoundsError
        If ``price`` violates the arbitrage bounds (signals an unusable
        Monte Carlo estimate, e.g. deep-wing noise).
    NoConvergenceError
        If the tolerance is not reached within ``max_iter`` iterations or
        no root exists inside the bracket (pathological inputs).
    """
    if not (tau > 0.0 and math.isfinite(price)):
        raise OutOfBoundsError(f"need tau > 0 and finite price, got tau={tau}, price={price}")
    spot = math.exp(x)
    intrinsic = max(spot - math.exp(k), 0.0)
    if not (intrinsic < price < spot):
        raise OutOfBoundsError(
            f"price {price} outside arbitrage bounds ({intrinsic}, {spot}) for x={x}, k={k}"
        )

    lo, hi = SIGMA_MIN, SIGMA_MAX
    f_lo = bs_call(BsQuote(x, k, tau, lo)) - price
    if f_lo >= 0.0:
        # Implied volatility below the bracket floor; accept the floor only
        # if it already prices within tolerance.
        if abs(f_lo) <= PRICE_TOL:
            return lo
        raise NoConvergenceError(f"implied volatility below {lo} for price {price}")
    f_hi = bs_call(BsQuote(x, k, tau, hi)) - price
    if f_hi <= 0.0:
        if abs(f_hi) <= PRICE_TOL:
            return hi
        raise NoConvergenceError(f"implied volatility above {hi} for price {price}")

    sigma = 0.5 * (lo + hi)
    step = hi - lo
    for _ in range(max_iter):
        quote = BsQuote(x, k, tau, sigma)
        f = bs_call(quote) - price
        if f > 0.0:
            hi = sigma
        elif f < 0.0:
            lo = sigma
        else:
            return sigma
        if abs(f) <= PRICE_TOL and (abs(step) <= 1e-11 or hi - lo <= 1e-13):
            return sigma
        vega = bs_vega(quote)
        if vega > 1e-14:
            candidate = sigma - f / vega
            if not (lo < candidate < hi):
                candidate = 0.5 * (lo + hi)
        else:
            candidate = 0.5 * (lo + hi)
        step = candidate - sigma
        sigma = candidate
        if hi - lo <= 5e-16 * max(1.0, sigma):
            break

    if abs(bs_call(BsQuote(x, k, tau, sigma)) - price) <= PRICE_TOL:
        return sigma
    raise NoConvergenceError(
        f"implied volatility did not reach {PRICE_TOL} price tolerance for price {price}"
    )

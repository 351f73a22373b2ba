"""Independent reference implementations the test suite checks against.

These deliberately avoid the code paths under test: the week oracle walks
the calendar day by day, and the CRPS oracles integrate the scoring
integral numerically instead of using any closed form.
"""

from datetime import date, timedelta

import numpy as np
from scipy import integrate
from scipy.stats import norm


def enumerate_epiweeks(first_year: int, last_year: int) -> dict[date, tuple[int, int]]:
    """Map every date of first_year..last_year to its (year, week).

    Walks Sunday-to-Saturday weeks in calendar order: a week whose
    Saturday lands on Jan 4..10 starts week 1 of that Saturday's year;
    every other week increments the running counter.
    """
    day = date(first_year - 2, 11, 30)
    day -= timedelta(days=(day.weekday() + 1) % 7)  # back up to a Sunday
    label = None
    out: dict[date, tuple[int, int]] = {}
    while day.year <= last_year + 1:
        saturday = day + timedelta(days=6)
        if saturday.month == 1 and 4 <= saturday.day <= 10:
            label = (saturday.year, 1)
        elif label is not None:
            label = (label[0], label[1] + 1)
        if label is not None:
            for offset in range(7):
                out[day + timedelta(days=offset)] = label
        day += timedelta(days=7)
    return out


def crps_quad(mu: float, sigma: float, y: float) -> float:
    """CRPS by adaptive quadrature of integral((F(x) - 1{x >= y})^2 dx)."""

    def integrand(x):
        return (norm.cdf(x, loc=mu, scale=sigma) - (x >= y)) ** 2

    lo = min(mu - 12.0 * sigma, y - 1.0)
    hi = max(mu + 12.0 * sigma, y + 1.0)
    value, _ = integrate.quad(
        integrand, lo, hi, points=[y], limit=200, epsabs=1e-10, epsrel=1e-10
    )
    return value


def crps_gauss_legendre(mu, sigma, y, nodes: int = 200):
    """Vectorized CRPS quadrature, splitting the integral at the kink x = y.

    Accepts broadcastable arrays; integrates each smooth piece with
    fixed-order Gauss-Legendre, wide enough that the truncated tails are
    far below 1e-12.
    """
    mu, sigma, y = np.broadcast_arrays(
        np.asarray(mu, float), np.asarray(sigma, float), np.asarray(y, float)
    )
    x_nodes, weights = np.polynomial.legendre.leggauss(nodes)

    lo = np.minimum(mu - 12.0 * sigma, y - 1.0)
    hi = np.maximum(mu + 12.0 * sigma, y + 1.0)

    def piece(a, b, indicator):
        half = (b - a) / 2.0
        mid = (b + a) / 2.0
        x = mid[..., None] + half[..., None] * x_nodes
        f = (norm.cdf((x - mu[..., None]) / sigma[..., None]) - indicator) ** 2
        return half * (f * weights).sum(axis=-1)

    return piece(lo, y, 0.0) + piece(y, hi, 1.0)

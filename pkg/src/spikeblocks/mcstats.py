"""Small statistics helpers shared by the Monte Carlo suites."""

from __future__ import annotations

import math

#: Global significance conventions: binomial checks use a 4-sigma Wilson
#: interval, count-distribution checks a chi-square test at this level.
Z_SIGMA = 4.0
CHI2_SIGNIFICANCE = 1e-3


def wilson_interval(successes: int, n: int, z: float = Z_SIGMA) -> tuple[float, float]:
    """Wilson score interval center and half-width for a binomial proportion."""
    if n < 1:
        raise ValueError("need at least one sample")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    return center, half


def binomial_sigma(p: float, n: int) -> float:
    """Standard deviation of an empirical frequency at true probability p."""
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def chi_square_stat(observed, expected) -> float:
    """Pearson chi-square statistic; expected cells must be positive."""
    stat = 0.0
    for o, e in zip(observed, expected):
        if e <= 0:
            raise ValueError("expected cell count must be positive")
        stat += (o - e) ** 2 / e
    return stat


def chi_square_pvalue(observed, expected, dof: int) -> float:
    from scipy.stats import chi2

    return float(chi2.sf(chi_square_stat(observed, expected), dof))

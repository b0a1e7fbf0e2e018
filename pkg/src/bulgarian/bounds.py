"""Concentration bounds and the explicit finite-n deviation bound.

The asymptotic statement ``P(dist <= eps) >= 1 - exp(-f(eps) n p (1 - o(1)))``
is never reported on its own here. :func:`finite_n_bound` instead returns the
two explicit failure terms that the ``o(1)`` hides: one for the tracked bowls
``k <= m`` deviating and one for any older bowl still holding cards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "chernoff_upper",
    "chernoff_lower",
    "chernoff_abs",
    "theorem_rate",
    "DeviationBound",
    "finite_n_bound",
    "survival_per_unit_time",
    "uniform_conv_gap",
    "binomial_logpmf",
    "binomial_upper_tail",
    "binomial_lower_tail",
    "binomial_abs_tail",
]


def _check_nonneg(**kw):
    for name, v in kw.items():
        if not v >= 0:
            raise ValueError(f"{name} must be nonnegative, got {v}")


def chernoff_upper(mu: float, eta: float) -> float:
    """Bound on ``P(X >= (1+eta) mu)`` for a sum of independent 0/1 variables."""
    _check_nonneg(mu=mu, eta=eta)
    return math.exp(-eta * eta * mu / (2.0 + eta))


def chernoff_lower(mu: float, eta: float) -> float:
    """Bound on ``P(X <= (1-eta) mu)``."""
    _check_nonneg(mu=mu, eta=eta)
    return math.exp(-eta * eta * mu / 2.0)


def chernoff_abs(mu: float, gamma: float) -> float:
    """Bound on ``P(|X - mu| >= gamma)``, i.e. ``2 exp(-gamma^2 / (2 mu + gamma))``.

    At ``mu = gamma = 0`` the vacuous value 2 is returned; ``mu = 0`` with
    ``gamma > 0`` gives the formula's value ``2 exp(-gamma)``.
    """
    _check_nonneg(mu=mu, gamma=gamma)
    if gamma == 0:
        return 2.0
    return 2.0 * math.exp(-gamma * gamma / (2.0 * mu + gamma))


def theorem_rate(eps: float) -> float:
    """Rate function ``eps^2 / (2 + eps)``."""
    _check_nonneg(eps=eps)
    return eps * eps / (2.0 + eps)


@dataclass(frozen=True)
class DeviationBound:
    """Explicit failure-probability bound for one ``(n, p, eps, m)``.

    ``regime1`` bounds the chance that some bowl ``k <= m`` deviates from its
    mean by at least ``eps * n * p``; ``regime2`` bounds the chance that some
    bowl ``k > m`` is nonempty. ``combined`` is their clipped sum.
    """

    epsilon: float
    n: int
    p: float
    m: int
    regime1: float
    regime2: float
    combined: float
    asymptotic_rate: float

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "regime1": self.regime1,
            "regime2": self.regime2,
            "combined": self.combined,
            "asymptotic_rate": self.asymptotic_rate,
        }


def finite_n_bound(n: int, p: float, eps: float, m: int) -> DeviationBound:
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rate = theorem_rate(eps)
    regime1 = min(1.0, 2.0 * m * math.exp(-rate * n * p))
    regime2 = min(1.0, n * math.exp(-m * p))
    return DeviationBound(
        epsilon=float(eps),
        n=int(n),
        p=float(p),
        m=int(m),
        regime1=regime1,
        regime2=regime2,
        combined=min(1.0, regime1 + regime2),
        asymptotic_rate=rate * n * p,
    )


def survival_per_unit_time(p):
    """``(1-p)^(1/p)``: chance a card is never picked in ``1/p`` rounds."""
    p = np.asarray(p, dtype=float)
    return np.exp(np.log1p(-p) / p)


def uniform_conv_gap(p: float, x_max: float = 40.0, points: int = 4_000_001) -> float:
    """``sup_{x >= 0} (e^{-x} - (1-p)^{x/p})`` on a dense grid over ``[0, x_max]``.

    Past ``x_max`` the gap is below ``e^{-x_max}``; that value is returned
    instead if it exceeds the grid maximum.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    x = np.linspace(0.0, x_max, points)
    gap = np.exp(-x) - np.exp(x * (np.log1p(-p) / p))
    return float(max(gap.max(), math.exp(-x_max)))


def binomial_logpmf(n: int, p: float, k):
    k = np.asarray(k)
    out = np.full(k.shape, -np.inf)
    ok = (k >= 0) & (k <= n)
    if p == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    if p == 1.0:
        return np.where(k == n, 0.0, -np.inf)
    kk = k[ok].astype(float)
    lg = np.vectorize(math.lgamma, otypes=[float])
    out[ok] = (
        math.lgamma(n + 1)
        - lg(kk + 1)
        - lg(n - kk + 1)
        + kk * math.log(p)
        + (n - kk) * math.log1p(-p)
    )
    return out


def _logspace_sum(logs: np.ndarray) -> float:
    if logs.size == 0:
        return 0.0
    top = float(np.max(logs))
    if top == -math.inf:
        return 0.0
    return math.exp(top) * math.fsum(np.exp(logs - top).tolist())


def binomial_upper_tail(n: int, p: float, k: int) -> float:
    """``P(X >= k)`` for ``X ~ Bin(n, p)`` by direct pmf summation."""
    k = max(int(k), 0)
    return min(1.0, _logspace_sum(binomial_logpmf(n, p, np.arange(k, n + 1))))


def binomial_lower_tail(n: int, p: float, k: int) -> float:
    """``P(X <= k)``."""
    k = min(int(k), n)
    return min(1.0, _logspace_sum(binomial_logpmf(n, p, np.arange(0, k + 1))))


def binomial_abs_tail(n: int, p: float, lo: int, hi: int) -> float:
    """``P(X <= lo or X >= hi)`` for integer cut points ``lo < hi``."""
    ks = np.arange(0, n + 1)
    sel = (ks <= lo) | (ks >= hi)
    return min(1.0, _logspace_sum(binomial_logpmf(n, p, ks[sel])))

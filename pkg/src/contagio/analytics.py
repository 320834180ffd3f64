"""Risk statistics and model diagnostics.

Closed-form pairwise default correlations for all four model variants
(homogeneous pools), summary statistics of a loss PMF, and the discrete
Kullback-Leibler divergence used to grade Monte Carlo approximations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

from contagio.contagion import LossDistribution
from contagio.factor import gauss_hermite_rule
from contagio.mapping import map_parameters

__all__ = [
    "RiskSummary",
    "joint_default_probability_homogeneous",
    "bivariate_normal_cdf",
    "default_correlation_con",
    "default_correlation_ofg",
    "default_correlation_cond",
    "default_correlation_mix",
    "pairwise_default_correlation",
    "risk_summary",
    "kl_divergence",
]

KL_FLOOR = 1e-12


@dataclass(frozen=True)
class RiskSummary:
    """Expected loss, loss volatility and quantile, as notional fractions."""

    expected_loss: float
    unexpected_loss: float
    credit_var: float
    confidence: float = 0.95


def joint_default_probability_homogeneous(p: float, u: float, v: float, n: int) -> float:
    """Probability that two given names both default, homogeneous pool.

    Splits on which of the two default idiosyncratically; the remaining
    cases need a failed defence plus at least one live infection among the
    other n - 2 names (or the idiosyncratic defaulter itself).
    """
    if n < 2:
        raise ValueError("need at least two names")
    for name, val in (("p", p), ("u", u), ("v", v)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    rest = (1.0 - p * v) ** (n - 2)
    both_idio = p * p
    one_idio = 2.0 * p * (1.0 - p) * (1.0 - u) * (1.0 - (1.0 - v) * rest)
    none_idio = (1.0 - p) ** 2 * (1.0 - u) ** 2 * (1.0 - rest)
    return both_idio + one_idio + none_idio


def _homogeneous_marginal(p: float, u: float, v: float, n: int) -> float:
    return p + (1.0 - p) * (1.0 - u) * (1.0 - (1.0 - p * v) ** (n - 1))


def bivariate_normal_cdf(h: float, k: float, rho: float) -> float:
    """P(Z1 <= h, Z2 <= k) for standard normals with correlation rho.

    One-dimensional quadrature over the shared factor: conditional on the
    factor the two coordinates are independent normals.
    """
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie in (-1, 1)")
    if rho == 0.0:
        return float(ndtr(h) * ndtr(k))
    if rho < 0.0:
        # flip one coordinate: P(Z1<=h, Z2<=k; -r) = P(Z1<=h) - P(Z1<=h, -Z2<=-k; r)
        return float(ndtr(h)) - bivariate_normal_cdf(h, -k, -rho)
    load = np.sqrt(rho)
    rem = np.sqrt(1.0 - rho)

    def integrand(y):
        return (
            np.exp(-0.5 * y * y)
            / np.sqrt(2.0 * np.pi)
            * ndtr((h - load * y) / rem)
            * ndtr((k - load * y) / rem)
        )

    value, _ = quad(integrand, -12.0, 12.0, limit=200, epsabs=1e-12, epsrel=1e-12)
    return float(value)


def default_correlation_con(p: float, u: float, v: float, n: int) -> float:
    """Pairwise default correlation of the pure contagion model."""
    p_tilde = _homogeneous_marginal(p, u, v, n)
    joint = joint_default_probability_homogeneous(p, u, v, n)
    return (joint - p_tilde**2) / (p_tilde * (1.0 - p_tilde))


def default_correlation_ofg(p_tilde: float, rho: float) -> float:
    """Pairwise default correlation of the one-factor Gaussian model."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    theta = float(ndtri(p_tilde))
    joint = bivariate_normal_cdf(theta, theta, rho)
    return (joint - p_tilde**2) / (p_tilde * (1.0 - p_tilde))


def default_correlation_cond(
    p_tilde: float, omega: float, mu: float, rho: float, n: int, m: int = 10
) -> float:
    """Pairwise default correlation of the conditional contagion model.

    Total covariance over the quadrature: expected within-node covariance
    plus the covariance of node-conditional means.  Within each node the
    contagion closed form applies to the remapped parameters.
    """
    rule = gauss_hermite_rule(m)
    theta = float(ndtri(p_tilde))
    joint_bar = 0.0
    mean_bar = 0.0
    for y_j, w_j in zip(rule.nodes, rule.weights):
        q = float(ndtr((theta - np.sqrt(rho) * y_j) / np.sqrt(1.0 - rho)))
        q = min(max(q, 1e-14), 1.0 - 1e-14)
        params = map_parameters(np.full(n, q), omega, mu)
        joint_bar += w_j * joint_default_probability_homogeneous(
            float(params.p[0]), float(params.u[0]), float(params.v[0]), n
        )
        mean_bar += w_j * q
    return (joint_bar - mean_bar**2) / (mean_bar * (1.0 - mean_bar))


def default_correlation_mix(
    p_tilde: float,
    omega: float,
    mu: float,
    rho: float,
    pi: float,
    n: int,
) -> float:
    """Pairwise default correlation of the mixture model.

    Conditioning on the regime indicator: both regimes share the marginal,
    so the regime-mean covariance term vanishes and the joint probability is
    the pi-weighted average of the regime joints.
    """
    if not 0.0 <= pi <= 1.0:
        raise ValueError("pi must lie in [0, 1]")
    params = map_parameters(np.full(n, p_tilde), omega, mu)
    joint_con = joint_default_probability_homogeneous(
        float(params.p[0]), float(params.u[0]), float(params.v[0]), n
    )
    theta = float(ndtri(p_tilde))
    joint_ofg = bivariate_normal_cdf(theta, theta, rho)
    joint = pi * joint_con + (1.0 - pi) * joint_ofg
    return (joint - p_tilde**2) / (p_tilde * (1.0 - p_tilde))


def pairwise_default_correlation(model: str, **kwargs) -> float:
    """Dispatch to the closed-form correlation of the named model variant."""
    key = model.lower()
    if key == "con":
        return default_correlation_con(**kwargs)
    if key == "ofg":
        return default_correlation_ofg(**kwargs)
    if key == "cond":
        return default_correlation_cond(**kwargs)
    if key == "mix":
        return default_correlation_mix(**kwargs)
    raise ValueError(f"unknown model {model!r}")


def risk_summary(dist: LossDistribution, confidence: float = 0.95) -> RiskSummary:
    """EL, UL and Credit VaR of a loss PMF, in notional fractions.

    Credit VaR is the left-continuous generalized inverse: the smallest
    support point whose CDF reaches the confidence level.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    pmf = dist.pmf
    losses = dist.loss_fractions
    el = float(np.dot(losses, pmf))
    second = float(np.dot(losses**2, pmf))
    ul = float(np.sqrt(max(second - el * el, 0.0)))
    cdf = np.cumsum(pmf)
    idx = int(np.searchsorted(cdf, confidence - 1e-15))
    return RiskSummary(
        expected_loss=el,
        unexpected_loss=ul,
        credit_var=float(losses[min(idx, len(losses) - 1)]),
        confidence=confidence,
    )


def kl_divergence(p_true, p_approx, floor: float = KL_FLOOR) -> float:
    """Discrete KL divergence D(p_true || p_approx).

    Bins where the true probability vanishes contribute nothing; bins where
    only the approximation vanishes are floored before the log so that
    finite-sample estimates stay comparable.
    """
    p = np.asarray(p_true, dtype=float)
    q = np.asarray(p_approx, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share the same support")
    mask = p > 0.0
    q_safe = np.maximum(q[mask], floor)
    return float(np.sum(p[mask] * np.log(p[mask] / q_safe)))

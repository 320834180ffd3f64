"""Factor-driven loss distributions: one-factor Gaussian, conditional
contagion via Gauss-Hermite quadrature, and the two-regime mixture.

All three reuse the exact loss recursion.  The plain factor model is the
special case with zero infectivity and full immunization, so one code path
produces every conditional PMF.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from contagio.contagion import (
    ContagionParams,
    LossDistribution,
    contagion_loss_distribution,
)
from contagio.mapping import InfeasibleMappingError, map_parameters

__all__ = [
    "QuadratureRule",
    "FactorConfig",
    "gauss_hermite_rule",
    "conditional_default_prob",
    "ofg_loss_distribution",
    "cond_contagion_distribution",
    "mixture_distribution",
]

MAX_QUADRATURE_NODES = 64
DEFAULT_QUADRATURE_NODES = 10


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for expectations against a standard normal."""

    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class FactorConfig:
    """Single-factor setup: correlation, node count, default thresholds."""

    rho: float
    p_tilde: np.ndarray
    m: int = DEFAULT_QUADRATURE_NODES
    thresholds: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        arr = np.atleast_1d(np.asarray(self.p_tilde, dtype=float))
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise ValueError("p_tilde must lie strictly in (0, 1)")
        object.__setattr__(self, "p_tilde", arr)
        object.__setattr__(self, "thresholds", ndtri(arr))


def gauss_hermite_rule(m: int) -> QuadratureRule:
    """Gauss-Hermite rule rescaled for a standard normal measure.

    Physicists' nodes x are stretched by sqrt(2) and the weights divided by
    sqrt(pi), so that sum(w_j * f(y_j)) approximates E[f(Y)] for Y ~ N(0,1).
    """
    if m < 1:
        raise ValueError("node count must be >= 1")
    if m > MAX_QUADRATURE_NODES:
        raise ValueError(
            f"node count {m} exceeds {MAX_QUADRATURE_NODES}; the Hermite "
            "recurrence overflows beyond that"
        )
    x, w = np.polynomial.hermite.hermgauss(m)
    return QuadratureRule(nodes=np.sqrt(2.0) * x, weights=w / np.sqrt(np.pi))


def conditional_default_prob(p_tilde, rho: float, y: float):
    """Default probability conditional on the common factor taking value y."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    p_arr = np.asarray(p_tilde, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise ValueError("p_tilde must lie strictly in (0, 1)")
    out = ndtr((ndtri(p_arr) - np.sqrt(rho) * y) / np.sqrt(1.0 - rho))
    return float(out) if np.isscalar(p_tilde) else out


def ofg_loss_distribution(
    p_tilde,
    rho: float,
    m: int = DEFAULT_QUADRATURE_NODES,
    loss_units: Optional[Sequence[int]] = None,
    unit_loss_fraction: Optional[float] = None,
) -> LossDistribution:
    """One-factor Gaussian loss PMF.

    Conditionally on each node the names are independent, so the recursion
    runs with zero infectivity and full immunization; node PMFs are averaged
    with the quadrature weights.
    """
    p_arr = np.atleast_1d(np.asarray(p_tilde, dtype=float))
    n = len(p_arr)
    units = np.ones(n, dtype=np.int64) if loss_units is None else np.asarray(loss_units, dtype=np.int64)
    rule = gauss_hermite_rule(m)
    no_v = np.zeros(n)
    full_u = np.ones(n)
    pmf = None
    for y_j, w_j in zip(rule.nodes, rule.weights):
        cond = conditional_default_prob(p_arr, rho, y_j)
        cond = np.clip(cond, 0.0, 1.0)
        dist = contagion_loss_distribution(
            ContagionParams(p=cond, u=full_u, v=no_v), units
        )
        pmf = w_j * dist.pmf if pmf is None else pmf + w_j * dist.pmf
    if unit_loss_fraction is None:
        unit_loss_fraction = 1.0 / int(units.sum())
    return LossDistribution(pmf=pmf, unit_loss_fraction=unit_loss_fraction)


def cond_contagion_distribution(
    p_tilde,
    omega: float,
    mu_star,
    rho: float,
    m: int = DEFAULT_QUADRATURE_NODES,
    loss_units: Optional[Sequence[int]] = None,
    unit_loss_fraction: Optional[float] = None,
) -> LossDistribution:
    """Contagion applied on top of the factor, node by node.

    At each node the factor-conditional marginals are remapped to contagion
    parameters (keeping the contagion share equal to omega) and the exact
    recursion runs; node PMFs are averaged with the quadrature weights.
    Mapping infeasibility at any node is an error naming that node.
    """
    p_arr = np.atleast_1d(np.asarray(p_tilde, dtype=float))
    n = len(p_arr)
    units = np.ones(n, dtype=np.int64) if loss_units is None else np.asarray(loss_units, dtype=np.int64)
    rule = gauss_hermite_rule(m)
    pmf = None
    for j, (y_j, w_j) in enumerate(zip(rule.nodes, rule.weights)):
        cond = conditional_default_prob(p_arr, rho, y_j)
        # float underflow at extreme nodes would put the marginal on the
        # boundary of (0, 1); nudge back inside before mapping
        cond = np.clip(cond, 1e-14, 1.0 - 1e-14)
        try:
            params = map_parameters(cond, omega, mu_star)
        except InfeasibleMappingError as err:
            raise InfeasibleMappingError(
                f"quadrature node {j} (y = {y_j:.6g}): {err}",
                violation=err.violation,
                node=j,
            ) from err
        dist = contagion_loss_distribution(params, units)
        pmf = w_j * dist.pmf if pmf is None else pmf + w_j * dist.pmf
    if unit_loss_fraction is None:
        unit_loss_fraction = 1.0 / int(units.sum())
    return LossDistribution(pmf=pmf, unit_loss_fraction=unit_loss_fraction)


def mixture_distribution(
    dist_con: LossDistribution, dist_ofg: LossDistribution, pi: float
) -> LossDistribution:
    """Two-regime mixture: contagion state with probability pi, correlated
    default state with probability 1 - pi."""
    if not 0.0 <= pi <= 1.0:
        raise ValueError("pi must lie in [0, 1]")
    if len(dist_con.pmf) != len(dist_ofg.pmf):
        raise ValueError("mixture components must share the same support")
    if abs(dist_con.unit_loss_fraction - dist_ofg.unit_loss_fraction) > 1e-15:
        raise ValueError("mixture components must share the same unit size")
    return LossDistribution(
        pmf=pi * dist_con.pmf + (1.0 - pi) * dist_ofg.pmf,
        unit_loss_fraction=dist_con.unit_loss_fraction,
    )

"""Core contagion model: domain types, single-name formulas, loss recursion.

Defaults are driven by three independent Bernoulli layers per name: an
idiosyncratic trigger (probability ``p``), a system-wide infection attempt
broadcast on idiosyncratic default (``v``), and an immunization that shields
a surviving name from every attempt (``u``).  The portfolio loss PMF is
built exactly by adding names one at a time to a pair of probability tables
that split the state space on whether an infection is active.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

try:
    from contagio import _recursion_cy as _kernel

    KERNEL_BACKEND = "cython"
except ImportError:  # compiled extension not built; use the NumPy kernel
    from contagio import _recursion_py as _kernel

    KERNEL_BACKEND = "python"

from contagio import _recursion_py

__all__ = [
    "KERNEL_BACKEND",
    "ContagionParams",
    "PortfolioSpec",
    "AlphaBetaTables",
    "LossDistribution",
    "infection_probability",
    "all_infection_probabilities",
    "marginal_default_probability",
    "compute_alpha_beta",
    "assemble_loss_distribution",
    "no_loss_probability",
    "contagion_loss_distribution",
]


def _as_prob_array(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(~np.isfinite(arr)):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class ContagionParams:
    """Per-name triples (p_i, u_i, v_i) for one horizon."""

    p: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _as_prob_array(self.p, "p"))
        object.__setattr__(self, "u", _as_prob_array(self.u, "u"))
        object.__setattr__(self, "v", _as_prob_array(self.v, "v"))
        if not (len(self.p) == len(self.u) == len(self.v)):
            raise ValueError("p, u, v must have equal length")
        if len(self.p) < 1:
            raise ValueError("at least one name is required")

    @property
    def n(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class PortfolioSpec:
    """Static pool description: names, sectors, loss units, recovery."""

    names: tuple
    sectors: tuple
    loss_units: np.ndarray
    recovery: float = 0.4
    notional: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "sectors", tuple(self.sectors))
        units = np.atleast_1d(np.asarray(self.loss_units, dtype=np.int64))
        object.__setattr__(self, "loss_units", units)
        if not (len(self.names) == len(self.sectors) == len(units)):
            raise ValueError("names, sectors, loss_units must have equal length")
        if np.any(units < 1):
            raise ValueError("each loss unit count must be >= 1")
        if not 0.0 <= self.recovery < 1.0:
            raise ValueError("recovery must lie in [0, 1)")
        if self.notional <= 0.0:
            raise ValueError("notional must be positive")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def total_units(self) -> int:
        return int(self.loss_units.sum())

    @property
    def unit_loss_amount(self) -> float:
        """Monetary size of one loss unit."""
        return self.notional * (1.0 - self.recovery) / self.total_units

    @property
    def unit_loss_fraction(self) -> float:
        """Fraction of pool notional lost per unit."""
        return (1.0 - self.recovery) / self.total_units


@dataclass(frozen=True)
class AlphaBetaTables:
    """Final-stage recursion state.

    ``alpha[h, k]``: probability of h realized units with k units at risk
    and no active infection.  ``beta[h, k]``: probability of h idiosyncratic
    and k contagion units with an active infection.  Entries with
    h + k > ell_bar are identically zero.
    """

    alpha: np.ndarray
    beta: np.ndarray
    ell_bar: int

    def total_probability(self) -> float:
        return float(self.alpha.sum() + self.beta.sum())


@dataclass(frozen=True)
class LossDistribution:
    """Discrete PMF over integer loss units."""

    pmf: np.ndarray
    unit_loss_fraction: float

    def __post_init__(self):
        object.__setattr__(self, "pmf", np.asarray(self.pmf, dtype=float))

    @property
    def max_units(self) -> int:
        return len(self.pmf) - 1

    @property
    def loss_fractions(self) -> np.ndarray:
        """Support of the distribution as fractions of pool notional."""
        return np.arange(len(self.pmf)) * self.unit_loss_fraction

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)


def infection_probability(params: ContagionParams, excluded: Optional[int] = None) -> float:
    """Probability that at least one eligible name broadcasts an infection.

    With ``excluded`` set, that name is left out of the product (the usual
    "seen from name i" quantity); otherwise all names are eligible.
    """
    n = params.n
    if excluded is not None and not (0 <= excluded < n):
        raise IndexError(f"excluded index {excluded} out of range for n={n}")
    factors = 1.0 - params.p * params.v
    if excluded is not None:
        factors = np.delete(factors, excluded)
    return float(1.0 - np.prod(factors))


def all_infection_probabilities(params: ContagionParams) -> np.ndarray:
    """Vector of leave-one-out infection probabilities, one per name."""
    factors = 1.0 - params.p * params.v
    if np.any(factors == 0.0):
        # some name infects almost surely; fall back to explicit products
        return np.array(
            [infection_probability(params, i) for i in range(params.n)]
        )
    total = np.prod(factors)
    return 1.0 - total / factors


def marginal_default_probability(params: ContagionParams, i: int) -> float:
    """Total default probability of name i (idiosyncratic plus contagion)."""
    if not (0 <= i < params.n):
        raise IndexError(f"name index {i} out of range for n={params.n}")
    exposed = infection_probability(params, excluded=i)
    p_i = params.p[i]
    return float(p_i + (1.0 - p_i) * (1.0 - params.u[i]) * exposed)


def _loss_units_array(loss_units, n: int) -> np.ndarray:
    units = np.atleast_1d(np.asarray(loss_units, dtype=np.int64))
    if len(units) != n:
        raise ValueError("loss_units length must match the number of names")
    if np.any(units < 1):
        raise ValueError("loss units must be positive integers")
    return units


def compute_alpha_beta(
    params: ContagionParams,
    loss_units: Sequence[int],
    keep_stages: bool = False,
):
    """Run the two-table recursion over all names.

    Returns the final :class:`AlphaBetaTables`; with ``keep_stages=True``
    returns the list of tables after 0, 1, ..., n names instead (debug path,
    NumPy kernel only).
    """
    if params.n == 0:
        raise ValueError("empty portfolio")
    units = _loss_units_array(loss_units, params.n)
    total = int(units.sum())
    if keep_stages:
        alpha = np.zeros((total + 1, total + 1))
        beta = np.zeros((total + 1, total + 1))
        alpha[0, 0] = 1.0
        stages = [AlphaBetaTables(alpha.copy(), beta.copy(), total)]
        for pj, uj, vj, dj in zip(params.p, params.u, params.v, units):
            alpha, beta = _recursion_py.advance_tables(alpha, beta, pj, uj, vj, dj)
            stages.append(AlphaBetaTables(alpha.copy(), beta.copy(), total))
        return stages
    p = np.ascontiguousarray(params.p)
    u = np.ascontiguousarray(params.u)
    v = np.ascontiguousarray(params.v)
    alpha, beta = _kernel.alpha_beta_forward(p, u, v, np.ascontiguousarray(units))
    return AlphaBetaTables(alpha, beta, total)


def assemble_loss_distribution(
    tables: AlphaBetaTables, unit_loss_fraction: float
) -> LossDistribution:
    """Collapse the two tables into the loss PMF.

    P{L = h} sums the uninfected states over every at-risk count and the
    infected states over every idiosyncratic/contagion split of h.
    """
    ell = tables.ell_bar
    alpha, beta = tables.alpha, tables.beta
    pmf = np.empty(ell + 1)
    col_flipped = beta[:, ::-1]
    for h in range(ell + 1):
        acc = alpha[h, : ell - h + 1].sum()
        # beta(k, h-k) for k = 0..h is an anti-diagonal of the beta table
        acc += np.trace(col_flipped, offset=ell - h)
        pmf[h] = acc
    return LossDistribution(pmf=pmf, unit_loss_fraction=unit_loss_fraction)


def no_loss_probability(params: ContagionParams) -> float:
    """Probability of zero losses: every name must survive idiosyncratically."""
    return float(np.prod(1.0 - params.p))


def contagion_loss_distribution(
    params: ContagionParams,
    loss_units: Sequence[int],
    unit_loss_fraction: Optional[float] = None,
) -> LossDistribution:
    """Convenience wrapper: recursion plus assembly in one call."""
    tables = compute_alpha_beta(params, loss_units)
    if unit_loss_fraction is None:
        unit_loss_fraction = 1.0 / tables.ell_bar
    return assemble_loss_distribution(tables, unit_loss_fraction)

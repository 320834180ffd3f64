"""Independent validation paths: Monte Carlo simulation and exhaustive
enumeration of the joint Bernoulli state space.

Both evaluate the default indicator directly from its defining equation
(idiosyncratic trigger, or survive + fail to immunize + someone else
infects), so they share no code with the recursion they validate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from contagio.contagion import ContagionParams, LossDistribution

__all__ = [
    "SimulationConfig",
    "EnumerationResult",
    "simulate_losses",
    "enumerate_losses",
]

# Simulations are drawn in fixed-size batches; batch b uses a Philox
# counter-based stream keyed by (seed, b).  The empirical histogram is a sum
# over batches, so results do not depend on execution order or thread count.
BATCH_SIZE = 8192

MAX_ENUMERATION_NAMES = 8


@dataclass(frozen=True)
class SimulationConfig:
    """Inputs for a reproducible Monte Carlo run."""

    n_sims: int
    seed: int
    params: ContagionParams
    loss_units: Sequence[int]

    def __post_init__(self):
        if self.n_sims < 1:
            raise ValueError("n_sims must be >= 1")


@dataclass(frozen=True)
class EnumerationResult:
    """Exact distribution plus default moments from full enumeration."""

    distribution: LossDistribution
    marginal_default: np.ndarray
    joint_default: np.ndarray


def _batch_losses(params: ContagionParams, units: np.ndarray, n_draws: int, seed: int, batch: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed, batch]))
    n = params.n
    x = gen.random((n_draws, n)) < params.p
    v = gen.random((n_draws, n)) < params.v
    u = gen.random((n_draws, n)) < params.u
    spread = x & v
    spread_total = spread.sum(axis=1, keepdims=True)
    infected_from_others = (spread_total - spread) > 0
    z = x | (~x & ~u & infected_from_others)
    return z @ units


def simulate_losses(config: SimulationConfig) -> LossDistribution:
    """Empirical loss PMF from seeded simulation of the default indicators."""
    params = config.params
    units = np.atleast_1d(np.asarray(config.loss_units, dtype=np.int64))
    if len(units) != params.n:
        raise ValueError("loss_units length must match the number of names")
    total = int(units.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    remaining = config.n_sims
    batch = 0
    while remaining > 0:
        draws = min(BATCH_SIZE, remaining)
        losses = _batch_losses(params, units, draws, config.seed, batch)
        counts += np.bincount(losses, minlength=total + 1)
        remaining -= draws
        batch += 1
    pmf = counts / config.n_sims
    return LossDistribution(pmf=pmf, unit_loss_fraction=1.0 / total)


def enumerate_losses(params: ContagionParams, loss_units: Sequence[int]) -> EnumerationResult:
    """Exact loss PMF by summing the probability of every joint outcome.

    Walks all 2^(3n) combinations of the per-name Bernoulli variables,
    evaluates each default indicator, and accumulates state probabilities.
    Also returns the exact per-name and pairwise default probabilities.
    """
    n = params.n
    if n > MAX_ENUMERATION_NAMES:
        raise ValueError(
            f"enumeration supports at most {MAX_ENUMERATION_NAMES} names (got {n})"
        )
    units = np.atleast_1d(np.asarray(loss_units, dtype=np.int64))
    if len(units) != n:
        raise ValueError("loss_units length must match the number of names")
    total = int(units.sum())

    n_states = 1 << (3 * n)
    pmf = np.zeros(total + 1)
    marginal = np.zeros(n)
    joint = np.zeros((n, n))
    chunk = min(n_states, 1 << 20)
    bit = np.arange(n)
    for start in range(0, n_states, chunk):
        states = np.arange(start, min(start + chunk, n_states), dtype=np.int64)
        x = (states[:, None] >> bit) & 1
        v = (states[:, None] >> (bit + n)) & 1
        u = (states[:, None] >> (bit + 2 * n)) & 1
        prob = np.prod(np.where(x == 1, params.p, 1.0 - params.p), axis=1)
        prob *= np.prod(np.where(v == 1, params.v, 1.0 - params.v), axis=1)
        prob *= np.prod(np.where(u == 1, params.u, 1.0 - params.u), axis=1)
        spread = x * v
        others_spread = (spread.sum(axis=1, keepdims=True) - spread) > 0
        z = (x == 1) | ((x == 0) & (u == 0) & others_spread)
        losses = z @ units
        pmf += np.bincount(losses, weights=prob, minlength=total + 1)
        zf = z.astype(float)
        marginal += prob @ zf
        joint += (zf * prob[:, None]).T @ zf
    return EnumerationResult(
        distribution=LossDistribution(pmf=pmf, unit_loss_fraction=1.0 / total),
        marginal_default=marginal,
        joint_default=joint,
    )

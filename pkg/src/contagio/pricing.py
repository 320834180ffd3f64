"""Synthetic CDO tranche pricing from a term structure of loss distributions.

Legs follow the outstanding-notional formulation: the premium accrues on
whatever tranche notional the loss distribution leaves standing at each
coupon date, and the protection leg pays the per-period erosion, discounted
mid-period.  Quarterly schedule, no holiday calendar, no accrual on default.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from contagio.contagion import (
    ContagionParams,
    LossDistribution,
    contagion_loss_distribution,
)
from contagio.factor import (
    cond_contagion_distribution,
    mixture_distribution,
    ofg_loss_distribution,
)
from contagio.mapping import map_parameters
from contagio.market import DiscountCurve, discount_factor

__all__ = [
    "Tranche",
    "LossSurface",
    "STANDARD_TRANCHES",
    "MODEL_VARIANTS",
    "day_count_fraction",
    "quarterly_schedule",
    "outstanding_notional",
    "outstanding_fraction",
    "coupon_leg",
    "default_leg",
    "par_spread",
    "upfront",
    "build_loss_surface",
    "price_tranche_set",
]

MODEL_VARIANTS = ("con", "ofg", "cond", "mix")

DEFAULT_RUNNING_COUPON = 0.01  # 100 bps


@dataclass(frozen=True)
class Tranche:
    """Slice of the pool loss waterfall between two notional fractions."""

    attachment: float
    detachment: float

    def __post_init__(self):
        if not 0.0 <= self.attachment < self.detachment <= 1.0:
            raise ValueError("need 0 <= attachment < detachment <= 1")

    @property
    def width(self) -> float:
        return self.detachment - self.attachment

    def label(self) -> str:
        return f"{self.attachment * 100:g}-{self.detachment * 100:g}"


STANDARD_TRANCHES = (
    Tranche(0.00, 0.03),
    Tranche(0.03, 0.06),
    Tranche(0.06, 0.12),
    Tranche(0.12, 1.00),
)

INDEX_TRANCHE = Tranche(0.0, 1.0)


@dataclass(frozen=True)
class LossSurface:
    """One loss distribution per valuation date (year fractions)."""

    dates: np.ndarray
    distributions: tuple

    def __post_init__(self):
        dates = np.atleast_1d(np.asarray(self.dates, dtype=float))
        dists = tuple(self.distributions)
        if len(dates) != len(dists):
            raise ValueError("one distribution per date is required")
        if np.any(np.diff(dates) <= 0.0):
            raise ValueError("dates must be strictly increasing")
        lengths = {len(d.pmf) for d in dists}
        if len(lengths) != 1:
            raise ValueError("all distributions must share one support")
        els = [float(np.dot(d.loss_fractions, d.pmf)) for d in dists]
        if np.any(np.diff(els) < -1e-12):
            warnings.warn("expected loss decreases across surface dates")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "distributions", dists)


def day_count_fraction(t0: float, t1: float, convention: str = "act365f") -> float:
    """Accrual fraction between two year-fraction dates.

    ``act365f`` reads the model time directly; ``act360`` rescales the same
    calendar span by 365/360 (a 0.25y quarter counts 91.25/360).
    """
    key = convention.lower()
    if key == "act365f":
        return t1 - t0
    if key == "act360":
        return (t1 - t0) * 365.0 / 360.0
    raise ValueError(f"unknown day count convention {convention!r}")


def quarterly_schedule(maturity: float) -> np.ndarray:
    """Coupon grid 0, 0.25, ..., maturity in year fractions."""
    periods = int(round(maturity * 4))
    if periods < 1 or abs(periods * 0.25 - maturity) > 1e-9:
        raise ValueError("maturity must be a positive whole number of quarters")
    return np.linspace(0.0, maturity, periods + 1)


def outstanding_notional(dist: LossDistribution, tranche: Tranche) -> float:
    """Expected tranche notional left standing, unnormalized.

    Losses at or below the attachment leave the full width; losses inside
    the tranche leave the distance to detachment; losses beyond it leave
    nothing.
    """
    a, b = tranche.attachment, tranche.detachment
    losses = dist.loss_fractions
    # a tolerance on the attachment comparison keeps grid points that
    # should sit exactly on the boundary from flipping on float noise
    eps = 1e-12
    below = losses <= a + eps
    inside = (~below) & (losses <= b + eps)
    value = tranche.width * float(dist.pmf[below].sum())
    value += float(np.dot(b - losses[inside], dist.pmf[inside]))
    return value


def outstanding_fraction(dist: LossDistribution, tranche: Tranche) -> float:
    """Outstanding notional normalized by the tranche width."""
    return outstanding_notional(dist, tranche) / tranche.width


def _surface_outstanding(surface: LossSurface, tranche: Tranche) -> np.ndarray:
    return np.array(
        [outstanding_notional(d, tranche) for d in surface.distributions]
    )


def coupon_leg(
    surface: LossSurface,
    curve: DiscountCurve,
    tranche: Tranche,
    cpn: float,
    day_count: str = "act365f",
) -> float:
    """Present value of the premium payments at coupon rate ``cpn``."""
    dates = surface.dates
    if dates[0] != 0.0:
        raise ValueError("surface must start at t = 0")
    s = _surface_outstanding(surface, tranche)
    value = 0.0
    for t0, t1, s1 in zip(dates[:-1], dates[1:], s[1:]):
        value += day_count_fraction(t0, t1, day_count) * discount_factor(curve, t1) * s1
    return cpn * value


def default_leg(surface: LossSurface, curve: DiscountCurve, tranche: Tranche) -> float:
    """Present value of protection payments: per-period notional erosion
    discounted at the period midpoint."""
    dates = surface.dates
    if dates[0] != 0.0:
        raise ValueError("surface must start at t = 0")
    s = _surface_outstanding(surface, tranche)
    if abs(s[0] - tranche.width) > 1e-9:
        raise ValueError("surface must carry the full tranche notional at t = 0")
    value = 0.0
    for t0, t1, s0, s1 in zip(dates[:-1], dates[1:], s[:-1], s[1:]):
        erosion = s0 - s1
        if erosion < -1e-10:
            raise ValueError(
                f"outstanding notional increases between t={t0:.4g} and t={t1:.4g}"
            )
        value += discount_factor(curve, 0.5 * (t0 + t1)) * max(erosion, 0.0)
    return value


def par_spread(
    surface: LossSurface,
    curve: DiscountCurve,
    tranche: Tranche,
    day_count: str = "act365f",
) -> float:
    """Coupon rate with zero contract value: protection over risky annuity."""
    annuity = coupon_leg(surface, curve, tranche, 1.0, day_count)
    if annuity <= 0.0:
        raise ValueError("risky annuity is zero; par spread undefined")
    return default_leg(surface, curve, tranche) / annuity


def upfront(
    surface: LossSurface,
    curve: DiscountCurve,
    tranche: Tranche,
    running_coupon: float = DEFAULT_RUNNING_COUPON,
    day_count: str = "act365f",
) -> float:
    """Upfront payment (fraction of tranche notional) for a contract paying
    the given running coupon.  Negative for tranches whose protection is
    worth less than the coupon stream."""
    protection = default_leg(surface, curve, tranche)
    premium = coupon_leg(surface, curve, tranche, running_coupon, day_count)
    return (protection - premium) / tranche.width


def _degenerate_distribution(total_units: int, unit_loss_fraction: float) -> LossDistribution:
    pmf = np.zeros(total_units + 1)
    pmf[0] = 1.0
    return LossDistribution(pmf=pmf, unit_loss_fraction=unit_loss_fraction)


def build_loss_surface(
    variant: str,
    marginals_at: Callable[[float], np.ndarray],
    dates: Sequence[float],
    loss_units: np.ndarray,
    unit_loss_fraction: float,
    omega: Optional[float] = None,
    rho: Optional[float] = None,
    pi: Optional[float] = None,
    mu_star=None,
    m: int = 10,
    ofg_average: bool = True,
) -> LossSurface:
    """Loss distribution per date for one model variant.

    ``marginals_at(t)`` supplies the per-name marginal default
    probabilities for horizon t.  At t = 0 the distribution is degenerate at
    zero losses and no model evaluation happens.  For the factor-only model
    the constituent marginals are averaged into a uniform value by default.
    """
    variant = variant.lower()
    if variant not in MODEL_VARIANTS:
        raise ValueError(f"unknown model variant {variant!r}")
    units = np.asarray(loss_units, dtype=np.int64)
    total = int(units.sum())
    dists = []
    for t in dates:
        if t <= 0.0:
            dists.append(_degenerate_distribution(total, unit_loss_fraction))
            continue
        p_tilde = np.clip(marginals_at(float(t)), 1e-14, 1.0 - 1e-14)
        if variant == "con":
            params = map_parameters(p_tilde, omega, mu_star)
            dist = contagion_loss_distribution(params, units, unit_loss_fraction)
        elif variant == "ofg":
            p_used = np.full_like(p_tilde, p_tilde.mean()) if ofg_average else p_tilde
            dist = ofg_loss_distribution(p_used, rho, m, units, unit_loss_fraction)
        elif variant == "cond":
            dist = cond_contagion_distribution(
                p_tilde, omega, mu_star, rho, m, units, unit_loss_fraction
            )
        else:  # mix
            params = map_parameters(p_tilde, omega, mu_star)
            dist_con = contagion_loss_distribution(params, units, unit_loss_fraction)
            p_used = np.full_like(p_tilde, p_tilde.mean()) if ofg_average else p_tilde
            dist_ofg = ofg_loss_distribution(p_used, rho, m, units, unit_loss_fraction)
            dist = mixture_distribution(dist_con, dist_ofg, pi)
        dists.append(dist)
    return LossSurface(dates=np.asarray(dates, dtype=float), distributions=tuple(dists))


def price_tranche_set(
    surface: LossSurface,
    curve: DiscountCurve,
    tranches: Sequence[Tranche] = STANDARD_TRANCHES,
    running_coupon: float = DEFAULT_RUNNING_COUPON,
    day_count: str = "act365f",
) -> dict:
    """Upfronts (%) for the tranche set plus the index par spread (bps)."""
    quotes = {}
    for tranche in tranches:
        quotes[tranche.label()] = 100.0 * upfront(
            surface, curve, tranche, running_coupon, day_count
        )
    quotes["index"] = 10_000.0 * par_spread(surface, curve, INDEX_TRANCHE, day_count)
    return quotes

"""Shared fixtures: synthetic market data for pricing and calibration tests."""
import numpy as np
import pytest

from contagio.calibration import PricingSetup
from contagio.mapping import assign_mu
from contagio.market import DiscountCurve, TrancheQuote
from contagio.pricing import quarterly_schedule

SECTOR_CYCLE = (
    "Banking",
    "Finance",
    "Insurance",
    "Utilities",
    "Energy",
    "Consumer",
    "Industrial",
    "Telecom",
)


def synthetic_portfolio(n=125, seed=7):
    """Deterministic constituent list: names, sectors, 5Y CDS spreads in bps."""
    rng = np.random.default_rng(seed)
    names = tuple(f"N{i:03d}" for i in range(n))
    sectors = tuple(SECTOR_CYCLE[i % len(SECTOR_CYCLE)] for i in range(n))
    spreads = np.round(rng.uniform(40.0, 150.0, n), 2)
    return names, sectors, spreads


def flat_curve(rate=0.02, horizon=6.0):
    times = np.arange(0.5, horizon + 0.25, 0.5)
    return DiscountCurve(times=times, factors=np.exp(-rate * times))


def make_setup(n=125, seed=7, recovery=0.4, maturity=5.0, mu_scheme="flat", eta=1.0, rate=0.02):
    """In-memory pricing setup on the synthetic portfolio."""
    _, sectors, spreads = synthetic_portfolio(n, seed)
    hazards = (spreads / 10_000.0) / (1.0 - recovery)
    mu_star = assign_mu(sectors, mu_scheme, eta)
    return PricingSetup(
        marginals_at=lambda t: 1.0 - np.exp(-hazards * t),
        loss_units=np.ones(n, dtype=np.int64),
        unit_loss_fraction=(1.0 - recovery) / n,
        curve=flat_curve(rate),
        dates=quarterly_schedule(maturity),
        mu_star=mu_star,
    )


def quotes_from_vector(vector, labels):
    return [
        TrancheQuote(
            instrument=label,
            quote=float(value),
            quote_type="par_spread_bps" if label == "index" else "upfront_pct",
        )
        for label, value in zip(labels, vector)
    ]


def write_portfolio_csv(path, n=20, seed=7):
    names, sectors, spreads = synthetic_portfolio(n, seed)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("name,sector,cds_spread_bps\n")
        for name, sector, spread in zip(names, sectors, spreads):
            handle.write(f"{name},{sector},{spread}\n")
    return path


def write_curve_csv(path, rate=0.02, horizon=6.0):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("time_years,discount_factor\n")
        for t in np.arange(0.5, horizon + 0.25, 0.5):
            handle.write(f"{t},{np.exp(-rate * t):.12f}\n")
    return path


def write_quotes_csv(path, quotes):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("instrument,quote,quote_type\n")
        for quote in quotes:
            handle.write(f"{quote.instrument},{quote.quote:.12g},{quote.quote_type}\n")
    return path


@pytest.fixture
def small_setup():
    """Fast 12-name setup for calibration mechanics tests."""
    return make_setup(n=12, seed=11)


@pytest.fixture
def desk_setup():
    """Full-size 125-name setup."""
    return make_setup(n=125, seed=7)

"""Market data ingestion: constituents, discount curve, tranche quotes.

Input files are plain CSV with declared headers (see the loaders below).
Malformed rows raise with their line number; silently skipping rows would
corrupt any calibration downstream.  Marginal default probabilities come
from a flat hazard per name implied by its 5Y CDS spread (credit triangle);
a full bootstrap is deliberately out of scope.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DiscountCurve",
    "DefaultCurve",
    "TrancheQuote",
    "PortfolioData",
    "hazard_from_spread",
    "discount_factor",
    "cds_par_spread",
    "load_portfolio",
    "load_curve",
    "load_quotes",
]

QUOTE_TYPES = ("upfront_pct", "par_spread_bps")


@dataclass(frozen=True)
class DiscountCurve:
    """Discount factors at pillar times, log-linearly interpolated."""

    times: np.ndarray
    factors: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        f = np.atleast_1d(np.asarray(self.factors, dtype=float))
        if len(t) != len(f) or len(t) == 0:
            raise ValueError("times and factors must be non-empty and equal length")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("pillar times must be strictly increasing")
        if np.any(f <= 0.0) or np.any(f > 1.0):
            raise ValueError("discount factors must lie in (0, 1]")
        if t[0] < 0.0:
            raise ValueError("pillar times must be nonnegative")
        if t[0] == 0.0 and f[0] != 1.0:
            raise ValueError("the discount factor at t = 0 must be 1")
        if np.any(np.diff(f) > 0.0):
            warnings.warn("discount factors increase between pillars (negative rates)")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "factors", f)

    def factor(self, t: float) -> float:
        return discount_factor(self, t)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


def discount_factor(curve: DiscountCurve, t) -> float:
    """Log-linear interpolation in discount factors; exact at pillars.

    Extrapolation beyond the last pillar is refused; times before the first
    pillar interpolate against the implicit (0, 1) point.
    """
    t = float(t)
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t > curve.times[-1] + 1e-12:
        raise ValueError(
            f"time {t:.6g} beyond the last pillar {curve.times[-1]:.6g}; "
            "extend the curve instead of extrapolating"
        )
    times, factors = curve.times, curve.factors
    if times[0] > 0.0:
        times = np.concatenate(([0.0], times))
        factors = np.concatenate(([1.0], factors))
    log_df = np.interp(min(t, times[-1]), times, np.log(factors))
    return float(np.exp(log_df))


@dataclass(frozen=True)
class DefaultCurve:
    """Flat-hazard default probability term structure for one name."""

    hazard: float

    def __post_init__(self):
        if self.hazard < 0.0:
            raise ValueError("hazard must be nonnegative")

    def default_probability(self, t: float) -> float:
        if t < 0.0:
            raise ValueError("time must be nonnegative")
        return float(1.0 - np.exp(-self.hazard * t))


@dataclass(frozen=True)
class TrancheQuote:
    """One market quote: tranche upfront in % or index par spread in bps."""

    instrument: str
    quote: float
    quote_type: str

    def __post_init__(self):
        if self.quote_type not in QUOTE_TYPES:
            raise ValueError(
                f"quote_type must be one of {QUOTE_TYPES}, got {self.quote_type!r}"
            )


@dataclass(frozen=True)
class PortfolioData:
    """Loaded constituents: names, sectors and CDS spreads."""

    names: tuple
    sectors: tuple
    spreads_bps: np.ndarray

    @property
    def n(self) -> int:
        return len(self.names)

    def hazards(self, recovery: float) -> np.ndarray:
        return np.array([hazard_from_spread(s, recovery) for s in self.spreads_bps])

    def default_probabilities(self, t: float, recovery: float) -> np.ndarray:
        return 1.0 - np.exp(-self.hazards(recovery) * t)


def hazard_from_spread(spread_bps: float, recovery: float) -> float:
    """Flat hazard implied by a CDS spread via the credit triangle."""
    if spread_bps < 0.0:
        raise ValueError("spread must be nonnegative")
    if not 0.0 <= recovery < 1.0:
        raise ValueError("recovery must lie in [0, 1)")
    return (spread_bps / 10_000.0) / (1.0 - recovery)


def cds_par_spread(
    hazard: float,
    recovery: float,
    curve: DiscountCurve,
    maturity: float,
    freq: int = 4,
) -> float:
    """Single-name CDS par spread under a flat hazard, in bps.

    Quarterly periods; protection pays the survival-probability drop and the
    premium accrues on the average surviving notional, both valued at the
    period midpoint.  The symmetric discounting keeps the quote aligned with
    the flat-hazard closed form under any discount curve, which is what the
    credit-triangle bootstrap round trip verifies.
    """
    periods = int(round(maturity * freq))
    grid = np.linspace(0.0, maturity, periods + 1)
    survival = np.exp(-hazard * grid)
    protection = 0.0
    annuity = 0.0
    for t0, t1, s0, s1 in zip(grid[:-1], grid[1:], survival[:-1], survival[1:]):
        df_mid = discount_factor(curve, 0.5 * (t0 + t1))
        protection += (1.0 - recovery) * (s0 - s1) * df_mid
        annuity += (t1 - t0) * 0.5 * (s0 + s1) * df_mid
    if annuity <= 0.0:
        raise ValueError("degenerate premium leg")
    return 10_000.0 * protection / annuity


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header {expected_header}")
        header = [h.strip().lower() for h in header]
        if header != list(expected_header):
            raise ValueError(
                f"{path}: expected header {','.join(expected_header)} "
                f"but found {','.join(header)}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_header):
                raise ValueError(
                    f"{path} line {line_no}: expected {len(expected_header)} "
                    f"columns, found {len(row)}"
                )
            yield line_no, [cell.strip() for cell in row]


def _parse_float(path, line_no, column, text):
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{path} line {line_no}: {column} value {text!r} is not a number")


def load_portfolio(path) -> PortfolioData:
    """Read constituents from a CSV with columns name, sector, cds_spread_bps."""
    names, sectors, spreads = [], [], []
    for line_no, (name, sector, spread) in _read_rows(
        path, ("name", "sector", "cds_spread_bps")
    ):
        value = _parse_float(path, line_no, "cds_spread_bps", spread)
        if value < 0.0:
            raise ValueError(f"{path} line {line_no}: negative spread {value}")
        names.append(name)
        sectors.append(sector)
        spreads.append(value)
    if not names:
        raise ValueError(f"{path}: no constituent rows")
    return PortfolioData(
        names=tuple(names), sectors=tuple(sectors), spreads_bps=np.array(spreads)
    )


def load_curve(path) -> DiscountCurve:
    """Read a discount curve from a CSV with columns time_years, discount_factor."""
    times, factors = [], []
    for line_no, (t, f) in _read_rows(path, ("time_years", "discount_factor")):
        times.append(_parse_float(path, line_no, "time_years", t))
        factors.append(_parse_float(path, line_no, "discount_factor", f))
    if not times:
        raise ValueError(f"{path}: no pillar rows")
    return DiscountCurve(times=np.array(times), factors=np.array(factors))


def load_quotes(path) -> list:
    """Read tranche/index quotes from a CSV with columns instrument, quote,
    quote_type."""
    quotes = []
    for line_no, (instrument, quote, quote_type) in _read_rows(
        path, ("instrument", "quote", "quote_type")
    ):
        if quote_type not in QUOTE_TYPES:
            raise ValueError(
                f"{path} line {line_no}: quote_type {quote_type!r} "
                f"not one of {QUOTE_TYPES}"
            )
        quotes.append(
            TrancheQuote(
                instrument=instrument,
                quote=_parse_float(path, line_no, "quote", quote),
                quote_type=quote_type,
            )
        )
    if not quotes:
        raise ValueError(f"{path}: no quote rows")
    return quotes

"""Market data loading, curves, hazard bootstrap."""
import numpy as np
import pytest

from contagio.market import (
    DefaultCurve,
    DiscountCurve,
    TrancheQuote,
    cds_par_spread,
    discount_factor,
    hazard_from_spread,
    load_curve,
    load_portfolio,
    load_quotes,
)
from tests.conftest import write_curve_csv, write_portfolio_csv, write_quotes_csv


class TestHazardFromSpread:
    def test_zero_spread(self):
        assert hazard_from_spread(0.0, 0.4) == 0.0

    def test_credit_triangle(self):
        assert hazard_from_spread(60.0, 0.4) == pytest.approx(0.01, abs=1e-15)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            hazard_from_spread(60.0, 1.0)
        with pytest.raises(ValueError):
            hazard_from_spread(-5.0, 0.4)

    def test_flat_hazard_five_year_marginal(self):
        curve = DefaultCurve(hazard=0.01)
        assert curve.default_probability(5.0) == pytest.approx(1.0 - np.exp(-0.05), abs=1e-12)
        assert curve.default_probability(5.0) == pytest.approx(0.04877, abs=1e-5)

    def test_default_curve_monotone_from_zero(self):
        curve = DefaultCurve(hazard=0.02)
        grid = np.linspace(0.0, 10.0, 41)
        probs = [curve.default_probability(t) for t in grid]
        assert probs[0] == 0.0
        assert np.all(np.diff(probs) > 0.0)


class TestDiscountCurve:
    def test_exact_at_pillars(self):
        curve = DiscountCurve(times=[1.0, 2.0, 5.0], factors=[0.99, 0.97, 0.90])
        for t, f in ((1.0, 0.99), (2.0, 0.97), (5.0, 0.90)):
            assert discount_factor(curve, t) == pytest.approx(f, abs=1e-15)

    def test_log_linear_midpoint(self):
        curve = DiscountCurve(times=[1.0, 2.0], factors=[0.99, 0.97])
        expected = np.exp(0.5 * np.log(0.99) + 0.5 * np.log(0.97))
        assert discount_factor(curve, 1.5) == pytest.approx(expected, abs=1e-12)
        assert discount_factor(curve, 1.5) == pytest.approx(0.97995, abs=1e-5)

    def test_flat_zero_rates(self):
        curve = DiscountCurve(times=[1.0, 5.0], factors=[1.0, 1.0])
        for t in (0.0, 0.7, 3.2, 5.0):
            assert discount_factor(curve, t) == 1.0

    def test_interpolates_from_implicit_origin(self):
        curve = DiscountCurve(times=[2.0], factors=[0.96])
        expected = np.exp(0.5 * np.log(0.96))
        assert discount_factor(curve, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_extrapolation_refused(self):
        curve = DiscountCurve(times=[1.0], factors=[0.99])
        with pytest.raises(ValueError):
            discount_factor(curve, 1.5)
        with pytest.raises(ValueError):
            discount_factor(curve, -0.1)

    def test_validation(self):
        with pytest.raises(ValueError):
            DiscountCurve(times=[2.0, 1.0], factors=[0.9, 0.95])
        with pytest.raises(ValueError):
            DiscountCurve(times=[1.0], factors=[1.2])
        with pytest.raises(ValueError):
            DiscountCurve(times=[0.0, 1.0], factors=[0.99, 0.9])

    def test_increasing_factors_warn(self):
        with pytest.warns(UserWarning):
            DiscountCurve(times=[1.0, 2.0], factors=[0.95, 0.99])


class TestCdsRoundTrip:
    @pytest.mark.parametrize("spread", [20.0, 60.0, 150.0, 300.0, 500.0])
    def test_bootstrap_reprices_within_one_bp(self, spread):
        recovery = 0.4
        hazard = hazard_from_spread(spread, recovery)
        curve = DiscountCurve(times=[1.0, 3.0, 6.0], factors=np.exp(-0.02 * np.array([1.0, 3.0, 6.0])))
        repriced = cds_par_spread(hazard, recovery, curve, 5.0)
        assert abs(repriced - spread) < 1.0

    def test_flat_zero_rates_too(self):
        curve = DiscountCurve(times=[6.0], factors=[1.0])
        repriced = cds_par_spread(hazard_from_spread(500.0, 0.4), 0.4, curve, 5.0)
        assert abs(repriced - 500.0) < 1.0


class TestLoaders:
    def test_portfolio_happy_path(self, tmp_path):
        path = write_portfolio_csv(tmp_path / "portfolio.csv", n=8)
        portfolio = load_portfolio(path)
        assert portfolio.n == 8
        assert portfolio.names[0] == "N000"
        assert np.all(portfolio.spreads_bps > 0)
        probs = portfolio.default_probabilities(5.0, 0.4)
        assert np.all((probs > 0) & (probs < 1))

    def test_curve_happy_path(self, tmp_path):
        path = write_curve_csv(tmp_path / "curve.csv")
        curve = load_curve(path)
        assert discount_factor(curve, 0.5) == pytest.approx(np.exp(-0.01), abs=1e-10)

    def test_quotes_happy_path(self, tmp_path):
        quotes = [
            TrancheQuote("0-3", 42.16, "upfront_pct"),
            TrancheQuote("index", 85.22, "par_spread_bps"),
        ]
        path = write_quotes_csv(tmp_path / "quotes.csv", quotes)
        loaded = load_quotes(path)
        assert loaded[0].instrument == "0-3"
        assert loaded[1].quote == pytest.approx(85.22)

    def test_bad_number_reports_line(self, tmp_path):
        path = tmp_path / "portfolio.csv"
        path.write_text("name,sector,cds_spread_bps\nA,Banking,60\nB,Energy,notanumber\n")
        with pytest.raises(ValueError, match="line 3"):
            load_portfolio(path)

    def test_wrong_column_count_reports_line(self, tmp_path):
        path = tmp_path / "curve.csv"
        path.write_text("time_years,discount_factor\n1.0,0.99\n2.0\n")
        with pytest.raises(ValueError, match="line 3"):
            load_curve(path)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "portfolio.csv"
        path.write_text("id,industry,spread\nA,Banking,60\n")
        with pytest.raises(ValueError, match="header"):
            load_portfolio(path)

    def test_unknown_quote_type_rejected(self, tmp_path):
        path = tmp_path / "quotes.csv"
        path.write_text("instrument,quote,quote_type\n0-3,42.0,mid\n")
        with pytest.raises(ValueError, match="quote_type"):
            load_quotes(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "portfolio.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            load_portfolio(path)

    def test_negative_spread_rejected(self, tmp_path):
        path = tmp_path / "portfolio.csv"
        path.write_text("name,sector,cds_spread_bps\nA,Banking,-5\n")
        with pytest.raises(ValueError, match="negative"):
            load_portfolio(path)

"""Objective, error metric, and calibration mechanics on a small pool."""
import numpy as np
import pytest

from contagio.calibration import (
    CalibrationResult,
    calibrate,
    mae,
    market_quote_vector,
    model_quote_vector,
    objective,
)
from contagio.market import TrancheQuote
from tests.conftest import quotes_from_vector


class TestObjective:
    def test_perfect_fit(self):
        quotes = np.array([42.16, 12.15, 4.13, -2.78, 0.8522])
        assert objective(quotes, quotes) == 0.0

    def test_single_instrument_hand_value(self):
        assert objective([1.1], [1.0]) == pytest.approx(0.1 / 1.1, abs=1e-15)

    def test_degenerate_market_quote(self):
        with pytest.raises(ValueError, match="degenerate"):
            objective([0.0], [-0.1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            objective([1.0, 2.0], [1.0])

    def test_instrument_order_invariance(self):
        model = np.array([10.0, -2.0, 0.5])
        market = np.array([11.0, -2.5, 0.6])
        base = objective(model, market)
        perm = [2, 0, 1]
        assert objective(model[perm], market[perm]) == pytest.approx(base, abs=1e-15)


class TestMae:
    def test_perfect_fit(self):
        quotes = np.array([42.0, 12.0, 4.0, -2.8, 85.0])
        assert mae(quotes, quotes) == 0.0

    def test_commensurate_unit_offset(self):
        market = np.array([40.0, 10.0, 4.0, -3.0, 80.0])
        model = market + np.array([1.0, 1.0, 1.0, 1.0, 10.0])
        assert mae(model, market) == pytest.approx(1.0, abs=1e-12)

    def test_index_error_in_tens_of_bps(self):
        market = np.array([40.0, 10.0, 4.0, -3.0, 80.0])
        model = market.copy()
        model[-1] += 25.0
        assert mae(model, market) == pytest.approx(2.5 / 5.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mae([1.0], [1.0, 2.0])


class TestQuoteVectors:
    def test_market_vector_alignment(self, small_setup):
        labels = small_setup.instrument_labels()
        vector = np.array([30.0, 8.0, 2.0, -3.0, 90.0])
        quotes = quotes_from_vector(vector, labels)
        np.testing.assert_allclose(market_quote_vector(quotes, small_setup), vector)

    def test_missing_instrument(self, small_setup):
        quotes = quotes_from_vector([30.0], ["0-3"])
        with pytest.raises(ValueError, match="missing"):
            market_quote_vector(quotes, small_setup)

    def test_wrong_quote_type(self, small_setup):
        labels = small_setup.instrument_labels()
        quotes = [TrancheQuote(label, 1.0, "upfront_pct") for label in labels]
        with pytest.raises(ValueError, match="par_spread_bps"):
            market_quote_vector(quotes, small_setup)

    def test_model_vector_shape_and_sign(self, small_setup):
        vector = model_quote_vector(small_setup, "con", {"omega": 0.3})
        assert vector.shape == (5,)
        assert vector[-1] > 0.0  # index spread in bps
        assert vector[3] < 0.0  # senior upfront below its running coupon


class TestCalibrate:
    def _self_quotes(self, setup, variant, params):
        vector = model_quote_vector(setup, variant, params)
        return quotes_from_vector(vector, setup.instrument_labels())

    def test_contagion_round_trip(self, small_setup):
        quotes = self._self_quotes(small_setup, "con", {"omega": 0.35})
        result = calibrate("con", small_setup, quotes)
        assert result.objective_value <= 1e-6
        assert result.parameters["omega"] == pytest.approx(0.35, abs=1e-3)
        assert result.mae <= 0.05
        assert not any(result.on_boundary.values())

    def test_factor_round_trip(self, small_setup):
        quotes = self._self_quotes(small_setup, "ofg", {"rho": 0.3})
        result = calibrate("ofg", small_setup, quotes)
        assert result.objective_value <= 1e-6
        assert result.parameters["rho"] == pytest.approx(0.3, abs=1e-3)

    def test_boundary_solution_is_flagged(self, small_setup):
        quotes = self._self_quotes(small_setup, "ofg", {"rho": 0.95})
        result = calibrate("ofg", small_setup, quotes)
        assert result.on_boundary["rho"]

    def test_infeasible_regions_never_crash(self, small_setup):
        # a 12-name pool cannot source large contagion shares, so much of the
        # omega range is infeasible; calibration must still return cleanly
        quotes = self._self_quotes(small_setup, "con", {"omega": 0.2})
        result = calibrate("con", small_setup, quotes)
        assert isinstance(result, CalibrationResult)
        assert result.objective_value <= 1e-6
        assert result.parameters["omega"] == pytest.approx(0.2, abs=1e-3)

    def test_unknown_variant(self, small_setup):
        with pytest.raises(ValueError):
            calibrate("copula", small_setup, [])

    def test_result_serializes(self, small_setup):
        import json

        quotes = self._self_quotes(small_setup, "con", {"omega": 0.35})
        result = calibrate("con", small_setup, quotes)
        payload = json.dumps(result.to_dict())
        assert "omega" in payload

"""Tranche leg values, par spreads, upfronts, surface construction."""
import numpy as np
import pytest

from contagio.contagion import LossDistribution, contagion_loss_distribution
from contagio.mapping import map_parameters
from contagio.market import DiscountCurve
from contagio.pricing import (
    INDEX_TRANCHE,
    STANDARD_TRANCHES,
    LossSurface,
    Tranche,
    build_loss_surface,
    coupon_leg,
    day_count_fraction,
    default_leg,
    outstanding_fraction,
    outstanding_notional,
    par_spread,
    price_tranche_set,
    quarterly_schedule,
    upfront,
)


def flat_unit_curve(horizon=6.0):
    return DiscountCurve(times=[horizon], factors=[1.0])


def degenerate(total_units, unit, at=0):
    pmf = np.zeros(total_units + 1)
    pmf[at] = 1.0
    return LossDistribution(pmf=pmf, unit_loss_fraction=unit)


def hazard_surface(dates, hazard, n=125, omega=None, unit=None, mu=0.1):
    """Surface from a homogeneous flat-hazard pool, contagion or independent."""
    unit = 1.0 / n if unit is None else unit
    dists = []
    for t in dates:
        if t <= 0.0:
            dists.append(degenerate(n, unit))
            continue
        p_tilde = np.full(n, 1.0 - np.exp(-hazard * t))
        if omega is None:
            from contagio.contagion import ContagionParams

            params = ContagionParams(p=p_tilde, u=np.ones(n), v=np.zeros(n))
        else:
            params = map_parameters(p_tilde, omega, mu)
        dists.append(contagion_loss_distribution(params, np.ones(n, dtype=int), unit))
    return LossSurface(dates=np.asarray(dates), distributions=tuple(dists))


class TestTranche:
    def test_validation(self):
        with pytest.raises(ValueError):
            Tranche(0.06, 0.03)
        with pytest.raises(ValueError):
            Tranche(-0.1, 0.5)

    def test_labels(self):
        assert Tranche(0.0, 0.03).label() == "0-3"
        assert Tranche(0.12, 1.0).label() == "12-100"


class TestOutstandingNotional:
    def test_no_losses_gives_full_width(self):
        dist = degenerate(125, 1.0 / 125)
        tranche = Tranche(0.03, 0.06)
        assert outstanding_notional(dist, tranche) == pytest.approx(0.03, abs=1e-15)
        assert outstanding_fraction(dist, tranche) == pytest.approx(1.0, abs=1e-12)

    def test_wiped_out_tranche(self):
        dist = degenerate(125, 1.0 / 125, at=50)  # 40% loss
        assert outstanding_notional(dist, Tranche(0.0, 0.03)) == 0.0

    def test_discrete_sum_inside_tranche(self):
        pmf = np.zeros(126)
        pmf[:3] = 1.0 / 3.0
        dist = LossDistribution(pmf=pmf, unit_loss_fraction=0.0048)
        value = outstanding_notional(dist, Tranche(0.0, 0.006))
        assert value == pytest.approx((0.006 + 0.0012 + 0.0) / 3.0, abs=1e-15)
        assert value == pytest.approx(0.0024, abs=1e-15)


class TestSchedulesAndDayCounts:
    def test_quarterly_grid(self):
        dates = quarterly_schedule(5.0)
        assert len(dates) == 21
        assert dates[0] == 0.0
        assert dates[-1] == 5.0
        np.testing.assert_allclose(np.diff(dates), 0.25)

    def test_bad_maturity(self):
        with pytest.raises(ValueError):
            quarterly_schedule(5.1)
        with pytest.raises(ValueError):
            quarterly_schedule(0.0)

    def test_day_count_conventions(self):
        assert day_count_fraction(0.0, 0.25, "act365f") == pytest.approx(0.25)
        assert day_count_fraction(0.0, 0.25, "act360") == pytest.approx(0.25 * 365.0 / 360.0)
        with pytest.raises(ValueError):
            day_count_fraction(0.0, 0.25, "30/360")


class TestCouponLeg:
    def test_riskless_annuity(self):
        dates = quarterly_schedule(5.0)
        surface = hazard_surface(dates, hazard=0.0)
        tranche = Tranche(0.03, 0.06)
        value = coupon_leg(surface, flat_unit_curve(), tranche, 0.01)
        assert value == pytest.approx(0.01 * 5.0 * tranche.width, abs=1e-12)

    def test_riskless_annuity_act360(self):
        dates = quarterly_schedule(5.0)
        surface = hazard_surface(dates, hazard=0.0)
        tranche = Tranche(0.0, 0.03)
        value = coupon_leg(surface, flat_unit_curve(), tranche, 0.01, day_count="act360")
        assert value == pytest.approx(0.01 * 5.0 * tranche.width * 365.0 / 360.0, abs=1e-12)

    def test_zero_coupon(self):
        surface = hazard_surface(quarterly_schedule(5.0), hazard=0.01)
        assert coupon_leg(surface, flat_unit_curve(), Tranche(0.0, 0.03), 0.0) == 0.0

    def test_fully_eroded_pays_nothing(self):
        dates = quarterly_schedule(1.0)
        unit = 1.0 / 125
        dists = (degenerate(125, unit),) + tuple(
            degenerate(125, unit, at=125) for _ in dates[1:]
        )
        surface = LossSurface(dates=dates, distributions=dists)
        assert coupon_leg(surface, flat_unit_curve(), Tranche(0.0, 0.03), 0.01) == 0.0


class TestDefaultLeg:
    def test_no_defaults_no_protection(self):
        surface = hazard_surface(quarterly_schedule(5.0), hazard=0.0)
        assert default_leg(surface, flat_unit_curve(), Tranche(0.0, 0.03)) == 0.0

    def test_certain_wipeout_pays_width(self):
        dates = quarterly_schedule(1.0)
        unit = 1.0 / 125
        dists = (degenerate(125, unit),) + tuple(
            degenerate(125, unit, at=125) for _ in dates[1:]
        )
        surface = LossSurface(dates=dates, distributions=dists)
        tranche = Tranche(0.03, 0.06)
        assert default_leg(surface, flat_unit_curve(), tranche) == pytest.approx(
            tranche.width, abs=1e-15
        )

    def test_refinement_stability(self):
        quarterly = hazard_surface(quarterly_schedule(5.0), 0.01, omega=0.6)
        monthly_dates = np.linspace(0.0, 5.0, 61)
        monthly = hazard_surface(monthly_dates, 0.01, omega=0.6)
        curve = flat_unit_curve()
        for tranche in STANDARD_TRANCHES:
            coarse = default_leg(quarterly, curve, tranche)
            fine = default_leg(monthly, curve, tranche)
            assert abs(coarse - fine) < 1e-4

    def test_increasing_notional_rejected(self):
        dates = np.array([0.0, 0.5, 1.0])
        unit = 1.0 / 125
        dists = (
            degenerate(125, unit),
            degenerate(125, unit, at=10),
            degenerate(125, unit, at=5),
        )
        with pytest.warns(UserWarning, match="expected loss decreases"):
            surface = LossSurface(dates=dates, distributions=dists)
        with pytest.raises(ValueError, match="increases"):
            default_leg(surface, flat_unit_curve(), Tranche(0.0, 1.0))


class TestParSpreadAndUpfront:
    def test_zero_defaults_zero_spread(self):
        surface = hazard_surface(quarterly_schedule(5.0), hazard=0.0)
        assert par_spread(surface, flat_unit_curve(), Tranche(0.0, 0.03)) == 0.0

    def test_value_vanishes_at_par(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.012, omega=0.5, unit=0.6 / 125)
        curve = flat_unit_curve()
        for tranche in STANDARD_TRANCHES:
            par = par_spread(surface, curve, tranche)
            value = coupon_leg(surface, curve, tranche, par) - default_leg(
                surface, curve, tranche
            )
            assert abs(value) < 1e-12

    def test_upfront_zero_at_par_coupon(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.012, omega=0.5, unit=0.6 / 125)
        curve = flat_unit_curve()
        tranche = Tranche(0.03, 0.06)
        par = par_spread(surface, curve, tranche)
        assert upfront(surface, curve, tranche, running_coupon=par) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_zero_default_upfront_is_minus_annuity(self):
        surface = hazard_surface(quarterly_schedule(5.0), hazard=0.0)
        value = upfront(surface, flat_unit_curve(), Tranche(0.0, 0.03))
        assert value == pytest.approx(-0.05, abs=1e-12)

    def test_senior_upfront_negative_on_realistic_pool(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.015, omega=0.6, unit=0.6 / 125)
        value = upfront(surface, flat_unit_curve(), Tranche(0.12, 1.0))
        assert value < 0.0

    def test_single_name_credit_triangle(self):
        hazard, recovery = 0.01, 0.4
        dates = quarterly_schedule(5.0)
        dists = []
        for t in dates:
            p = 1.0 - np.exp(-hazard * t)
            dists.append(
                LossDistribution(pmf=np.array([1.0 - p, p]), unit_loss_fraction=1.0 - recovery)
            )
        surface = LossSurface(dates=dates, distributions=tuple(dists))
        par = par_spread(surface, flat_unit_curve(), INDEX_TRANCHE)
        assert abs(par - hazard * (1.0 - recovery)) < 1e-4  # within 1 bp

    def test_zero_annuity_rejected(self):
        dates = quarterly_schedule(1.0)
        unit = 1.0 / 125
        dists = (degenerate(125, unit),) + tuple(
            degenerate(125, unit, at=125) for _ in dates[1:]
        )
        surface = LossSurface(dates=dates, distributions=dists)
        with pytest.raises(ValueError, match="annuity"):
            par_spread(surface, flat_unit_curve(), Tranche(0.0, 0.03))


class TestPortfolioIdentities:
    def test_tranche_partition_additivity(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.012, omega=0.6, unit=0.6 / 125)
        curve = DiscountCurve(times=[6.0], factors=[np.exp(-0.02 * 6.0)])
        cpn_sum = sum(coupon_leg(surface, curve, t, 0.01) for t in STANDARD_TRANCHES)
        dflt_sum = sum(default_leg(surface, curve, t) for t in STANDARD_TRANCHES)
        assert cpn_sum == pytest.approx(
            coupon_leg(surface, curve, INDEX_TRANCHE, 0.01), abs=1e-10
        )
        assert dflt_sum == pytest.approx(
            default_leg(surface, curve, INDEX_TRANCHE), abs=1e-10
        )

    def test_subordination_monotonicity(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.012, omega=0.6, unit=0.6 / 125)
        curve = flat_unit_curve()
        width = 0.03
        spreads = [
            par_spread(surface, curve, Tranche(a, a + width))
            for a in (0.0, 0.03, 0.06, 0.09)
        ]
        assert np.all(np.diff(spreads) <= 0.0)

    def test_outstanding_notional_non_increasing_in_time(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.012, omega=0.6, unit=0.6 / 125)
        for tranche in STANDARD_TRANCHES:
            values = [outstanding_notional(d, tranche) for d in surface.distributions]
            assert np.all(np.diff(values) <= 1e-15)

    def test_index_quote_is_full_pool_par_spread(self):
        surface = hazard_surface(quarterly_schedule(5.0), 0.012, omega=0.6, unit=0.6 / 125)
        curve = flat_unit_curve()
        quotes = price_tranche_set(surface, curve)
        assert quotes["index"] == pytest.approx(
            1e4 * par_spread(surface, curve, INDEX_TRANCHE), abs=1e-12
        )


class TestBuildLossSurface:
    def _marginals(self, hazard=0.012, n=40):
        return lambda t: np.full(n, 1.0 - np.exp(-hazard * t))

    def test_starts_degenerate(self):
        surface = build_loss_surface(
            "con",
            self._marginals(),
            quarterly_schedule(1.0),
            np.ones(40, dtype=int),
            0.6 / 40,
            omega=0.5,
            mu_star=0.1,
        )
        assert surface.distributions[0].pmf[0] == 1.0

    def test_all_variants_produce_valid_surfaces(self):
        dates = np.array([0.0, 1.0, 2.0])
        units = np.ones(40, dtype=int)
        for variant, kwargs in (
            ("con", dict(omega=0.5)),
            ("ofg", dict(rho=0.3)),
            ("cond", dict(omega=0.3, rho=0.1)),
            ("mix", dict(omega=0.5, rho=0.3, pi=0.6)),
        ):
            surface = build_loss_surface(
                variant, self._marginals(), dates, units, 0.6 / 40, mu_star=0.1, **kwargs
            )
            for dist in surface.distributions:
                assert dist.pmf.sum() == pytest.approx(1.0, abs=1e-12)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            build_loss_surface(
                "copula", self._marginals(), [0.0, 1.0], np.ones(40, dtype=int), 0.015
            )

    def test_surface_requires_increasing_dates(self):
        with pytest.raises(ValueError):
            LossSurface(
                dates=np.array([0.0, 0.0]),
                distributions=(degenerate(5, 0.2), degenerate(5, 0.2)),
            )

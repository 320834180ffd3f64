"""Credit-portfolio loss distributions with infectious defaults and
immunization, factor extensions, and synthetic CDO tranche pricing."""

from contagio.contagion import (
    KERNEL_BACKEND,
    AlphaBetaTables,
    ContagionParams,
    LossDistribution,
    PortfolioSpec,
    assemble_loss_distribution,
    compute_alpha_beta,
    contagion_loss_distribution,
    infection_probability,
    marginal_default_probability,
    no_loss_probability,
)
from contagio.mapping import (
    InfeasibleMappingError,
    MappingConfig,
    assign_mu,
    map_parameters,
)
from contagio.factor import (
    FactorConfig,
    QuadratureRule,
    cond_contagion_distribution,
    conditional_default_prob,
    gauss_hermite_rule,
    mixture_distribution,
    ofg_loss_distribution,
)
from contagio.analytics import (
    RiskSummary,
    joint_default_probability_homogeneous,
    kl_divergence,
    pairwise_default_correlation,
    risk_summary,
)
from contagio.market import (
    DefaultCurve,
    DiscountCurve,
    PortfolioData,
    TrancheQuote,
    discount_factor,
    hazard_from_spread,
)
from contagio.pricing import (
    STANDARD_TRANCHES,
    LossSurface,
    Tranche,
    build_loss_surface,
    coupon_leg,
    default_leg,
    outstanding_notional,
    par_spread,
    price_tranche_set,
    upfront,
)
from contagio.calibration import CalibrationResult, PricingSetup, calibrate
from contagio.mc import SimulationConfig, enumerate_losses, simulate_losses

__version__ = "0.1.0"

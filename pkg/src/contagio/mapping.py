"""Map market-implied marginal default probabilities to contagion parameters.

The restricted one-parameter scheme splits each marginal into an
idiosyncratic part ``(1 - omega)`` and a contagion part ``omega``; per-name
infectivity follows a fixed sector-based coefficient scaled by ``eta``, and
the immunization probability is solved so the marginal is reproduced
exactly.  Healthier names are more infective: infectivity decreases with the
square root of the marginal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from contagio.contagion import ContagionParams

__all__ = [
    "MU_SCHEMES",
    "MappingConfig",
    "InfeasibleMappingError",
    "assign_mu",
    "map_parameters",
    "mapping_violation",
]

MU_SCHEMES = ("flat", "bnk", "fin")

_HIGH_MU = 0.2
_LOW_MU = 0.05
_FLAT_MU = 0.1
_BNK_SECTORS = frozenset({"banking"})
_FIN_SECTORS = frozenset({"banking", "finance", "insurance"})


class InfeasibleMappingError(ValueError):
    """Raised when no immunization probability in [0, 1] can reproduce the
    marginals for the requested (omega, mu) pair.

    ``violation`` carries the total amount by which the solved values leave
    [0, 1]; calibration uses it to shape its penalty.
    """

    def __init__(self, message: str, violation: float = 1.0, node: Optional[int] = None):
        super().__init__(message)
        self.violation = violation
        self.node = node


@dataclass(frozen=True)
class MappingConfig:
    """Scheme selection for producing contagion parameters from marginals."""

    omega: float
    mu_scheme: Union[str, Sequence[float]] = "flat"
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.omega < 1.0:
            raise ValueError("omega must lie in [0, 1)")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if isinstance(self.mu_scheme, str) and self.mu_scheme.lower() not in MU_SCHEMES:
            raise ValueError(f"unknown mu scheme {self.mu_scheme!r}")


def assign_mu(sectors: Sequence[str], scheme: Union[str, Sequence[float]] = "flat", eta: float = 1.0) -> np.ndarray:
    """Per-name infectivity coefficients, scaled by eta.

    ``flat`` uses one value for everyone; ``bnk`` raises banking names;
    ``fin`` raises banking, finance and insurance names.  Sector labels are
    matched case-insensitively and unknown labels simply get the low value.
    An explicit sequence of coefficients is passed through unchanged (before
    scaling).
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    if not isinstance(scheme, str):
        mu = np.asarray(scheme, dtype=float)
        if len(mu) != len(sectors):
            raise ValueError("explicit mu values must match the number of names")
    else:
        key = scheme.lower()
        if key == "flat":
            mu = np.full(len(sectors), _FLAT_MU)
        elif key in ("bnk", "fin"):
            high = _BNK_SECTORS if key == "bnk" else _FIN_SECTORS
            mu = np.array(
                [_HIGH_MU if str(s).lower() in high else _LOW_MU for s in sectors]
            )
        else:
            raise ValueError(f"unknown mu scheme {scheme!r}")
    return eta * mu


def _solve_parameters(p_tilde: np.ndarray, omega: float, mu_star: np.ndarray):
    p = (1.0 - omega) * p_tilde
    v = mu_star * (1.0 - np.sqrt(p_tilde))
    if np.any(v < 0.0) or np.any(v > 1.0):
        raise ValueError("mu_star * (1 - sqrt(p_tilde)) must lie in [0, 1]")
    factors = 1.0 - p * v
    total = np.prod(factors)
    exposed = 1.0 - total / factors  # leave-one-out infection probabilities
    gap = p_tilde - p
    with np.errstate(divide="ignore", invalid="ignore"):
        u = 1.0 - gap / ((1.0 - p) * exposed)
    # omega = 0 leaves no contagion share to explain: full immunity
    u = np.where(gap == 0.0, 1.0, u)
    return p, u, v


def _validate_p_tilde(p_tilde) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(p_tilde, dtype=float))
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("marginal default probabilities must lie strictly in (0, 1)")
    return arr


def map_parameters(p_tilde, omega: float, mu_star) -> ContagionParams:
    """Build contagion parameters reproducing the given marginals.

    Raises :class:`InfeasibleMappingError` when the implied immunization
    falls outside [0, 1] (contagion too weak to carry an omega share of the
    marginal); clamping instead would silently break marginal calibration.
    """
    arr = _validate_p_tilde(p_tilde)
    if not 0.0 <= omega < 1.0:
        raise ValueError("omega must lie in [0, 1)")
    mu_star = np.broadcast_to(np.asarray(mu_star, dtype=float), arr.shape)
    p, u, v = _solve_parameters(arr, omega, mu_star)
    bad = ~np.isfinite(u) | (u < 0.0) | (u > 1.0)
    if np.any(bad):
        finite_u = np.where(np.isfinite(u), u, -1e3)
        violation = float(
            np.sum(np.maximum(0.0, -finite_u) + np.maximum(0.0, finite_u - 1.0))
        )
        worst = int(np.argmax(bad))
        raise InfeasibleMappingError(
            f"immunization probability out of [0, 1] for name {worst} "
            f"(u = {u[worst]:.6g}); (omega, mu) infeasible for these marginals",
            violation=violation,
        )
    return ContagionParams(p=p, u=u, v=v)


def mapping_violation(p_tilde, omega: float, mu_star) -> float:
    """Total excess of the solved immunization outside [0, 1]; zero when the
    mapping is feasible.  Cheap (no table recursion), used for penalties."""
    arr = _validate_p_tilde(p_tilde)
    mu_star = np.broadcast_to(np.asarray(mu_star, dtype=float), arr.shape)
    _, u, _ = _solve_parameters(arr, omega, mu_star)
    u = np.where(np.isfinite(u), u, -1e3)
    return float(np.sum(np.maximum(0.0, -u) + np.maximum(0.0, u - 1.0)))

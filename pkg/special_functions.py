"""Regularized incomplete beta function and the tail transforms every P-value needs.

The continued fraction is the one from Numerical Recipes, evaluated with the
modified Lentz method. Tail quantities of the form 1 - q**k are always formed
in log space because k reaches tens of thousands while q sits next to 1.
"""
import math
from dataclasses import dataclass

from scipy.special import betaln

import config
from errors import ConvergenceError, DomainError

_TINY = 1e-300


@dataclass(frozen=True)
class BetaParams:
    """Shape pair (a, b) of a Beta distribution."""
    a: float
    b: float

    def __post_init__(self):
        for name, value in (("a", self.a), ("b", self.b)):
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"Beta shape {name}={value} must be finite and positive")


def log_beta(params: BetaParams) -> float:
    """ln B(a, b)."""
    return float(betaln(params.a, params.b))


def _continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, config.BETA_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < config.BETA_EPS:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x} "
        f"within {config.BETA_MAX_ITER} iterations"
    )


def _check_unit(x: float, name: str = "x") -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name}={x} must lie in [0, 1]")


def _incomplete_beta(x: float, params: BetaParams) -> tuple[float, float]:
    """Return (I_x(a,b), 1 - I_x(a,b)), each evaluated on the side where it is accurate."""
    _check_unit(x)
    if x == 0.0:
        return 0.0, 1.0
    if x == 1.0:
        return 1.0, 0.0
    a, b = params.a, params.b
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - log_beta(params))
    if x < (a + 1.0) / (a + b + 2.0):
        lower = min(front * _continued_fraction(a, b, x) / a, 1.0)
        return lower, 1.0 - lower
    upper = min(front * _continued_fraction(b, a, 1.0 - x) / b, 1.0)
    return 1.0 - upper, upper


def beta_cdf(x: float, params: BetaParams) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    return _incomplete_beta(x, params)[0]


def beta_sf(x: float, params: BetaParams) -> float:
    """Upper tail 1 - I_x(a, b) without cancellation."""
    return _incomplete_beta(x, params)[1]


def beta_tail_power(q: float, k_eff: float) -> float:
    """1 - q**k_eff computed as -expm1(k_eff * log q)."""
    _check_unit(q, "q")
    if k_eff <= 0:
        raise DomainError(f"k_eff={k_eff} must be positive")
    if q == 0.0:
        return 1.0
    return -math.expm1(k_eff * math.log(q))


def beta_tail_power_sf(sf: float, k_eff: float) -> float:
    """1 - (1 - sf)**k_eff computed as -expm1(k_eff * log1p(-sf))."""
    _check_unit(sf, "sf")
    if k_eff <= 0:
        raise DomainError(f"k_eff={k_eff} must be positive")
    if sf == 1.0:
        return 1.0
    return -math.expm1(k_eff * math.log1p(-sf))


def _check_order(k_eff: float, nu: float) -> None:
    if nu < 1:
        raise DomainError(f"nu={nu} must be at least 1")
    if k_eff < 1:
        raise DomainError(f"k_eff={k_eff} must be at least 1")
    if nu > k_eff:
        raise DomainError(f"nu={nu} exceeds k_eff={k_eff}")


def order_statistic_pvalue(u: float, k_eff: float, nu: float) -> float:
    """Probability that the nu-th smallest of k_eff uniforms lies below the observed transform.

    Equals 1 - I_u(k_eff - nu + 1, nu); for nu = 1 this is 1 - u**k_eff.
    """
    _check_unit(u, "u")
    _check_order(k_eff, nu)
    if nu == 1:
        return beta_tail_power(u, k_eff)
    return beta_sf(u, BetaParams(k_eff - nu + 1, nu))


def order_statistic_pvalue_sf(sf: float, k_eff: float, nu: float) -> float:
    """order_statistic_pvalue at u = 1 - sf, taking the accurately known complement.

    Uses 1 - I_{1-sf}(k - nu + 1, nu) = I_sf(nu, k - nu + 1).
    """
    _check_unit(sf, "sf")
    _check_order(k_eff, nu)
    if nu == 1:
        return beta_tail_power_sf(sf, k_eff)
    return beta_cdf(sf, BetaParams(nu, k_eff - nu + 1))

"""Closed-form spectra for the quadratic deformation f = 1 + alpha X^2 + beta P^2.

All formulas are in units with hbar = 1 and 2m = 1, i.e. the oscillator is
H = P^2 + X^2 and the well is H = P^2 on [-a, a].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .deformation import q_factor
from .errors import ParameterDomain

__all__ = [
    "OscillatorCoefficients",
    "oscillator_leading_coefficients",
    "oscillator_wkb_closed",
    "oscillator_exact_leading",
    "oscillator_linear",
    "oscillator_exact_offset",
    "well_linear",
    "well_beta0_exact",
    "well_free_limit",
    "well_area_limit_closed",
    "well_max_level_closed",
]


def _require_positive(alpha: float, beta: float) -> None:
    if not (alpha > 0.0 and beta > 0.0):
        raise ParameterDomain(
            f"formula needs alpha > 0 and beta > 0, got alpha={alpha!r}, beta={beta!r}")


@dataclass(frozen=True)
class OscillatorCoefficients:
    """Leading-order a, b, c of E_n = a q^n + b + c q^-n, with q exact."""

    a_lead: float
    b_lead: float
    c_lead: float
    q: float


def oscillator_leading_coefficients(alpha: float, beta: float) -> OscillatorCoefficients:
    _require_positive(alpha, beta)
    s = math.sqrt(alpha * beta)
    sa, sb = math.sqrt(alpha), math.sqrt(beta)
    return OscillatorCoefficients(
        a_lead=(sa + sb) ** 2 / (4.0 * alpha * beta) * (1.0 + s),
        b_lead=-(alpha + beta) / (2.0 * alpha * beta),
        c_lead=(sa - sb) ** 2 / (4.0 * alpha * beta) * (1.0 - s),
        q=q_factor(alpha, beta),
    )


def oscillator_wkb_closed(alpha: float, beta: float, n: int, delta: float = 0.5) -> float:
    """Semiclassical oscillator level in closed form.

    Exact inversion of the deformed area for H = P^2 + X^2.  The expression
    contains 1/(alpha beta), so the undeformed case must use 2n + 1 instead.
    """
    _require_positive(alpha, beta)
    s = math.sqrt(alpha * beta)
    sa, sb = math.sqrt(alpha), math.sqrt(beta)
    k = 2.0 * (n + delta) * s
    # the three coefficients sum to zero, so expm1 avoids the cancellation
    return ((sa + sb) ** 2 / (4.0 * alpha * beta) * math.expm1(k)
            + (sa - sb) ** 2 / (4.0 * alpha * beta) * math.expm1(-k))


def oscillator_exact_leading(alpha: float, beta: float, n: int) -> float:
    """Exact oscillator spectrum a q^n + b + c q^-n with a, b, c at leading order only."""
    if alpha * beta >= 1.0:
        raise ParameterDomain(f"alpha*beta = {alpha * beta!r} must be < 1")
    c = oscillator_leading_coefficients(alpha, beta)
    s = math.sqrt(alpha * beta)
    # a + b + c = 1 exactly; write the rest as expm1 terms in n ln q
    t = n * math.log1p(2.0 * s / (1.0 - s))
    return 1.0 + c.a_lead * math.expm1(t) + c.c_lead * math.expm1(-t)


def oscillator_linear(alpha: float, beta: float, n: int) -> float:
    return 2 * n + 1 + (alpha + beta) * (n + 0.5) ** 2


def oscillator_exact_offset(alpha: float, beta: float) -> float:
    """Leading gap (alpha + beta)/4 between the exact spectrum and :func:`oscillator_linear`."""
    return 0.25 * (alpha + beta)


def well_linear(alpha: float, beta: float, a: float, n: int) -> float:
    """Square-well levels to first order in alpha and beta."""
    if not a > 0.0:
        raise ValueError(f"half-width must be positive, got {a!r}")
    k2 = (math.pi * n / (2.0 * a)) ** 2
    return k2 * (1.0 + 2.0 / 3.0 * alpha * a * a + 2.0 / 3.0 * beta * k2)


def well_beta0_exact(alpha: float, a: float, n: int) -> float:
    """Square-well levels for beta = 0, exact in alpha."""
    if not alpha > 0.0:
        raise ParameterDomain(f"formula needs alpha > 0, got {alpha!r}")
    sa = math.sqrt(alpha)
    return (math.pi * n * sa / (2.0 * math.atan(sa * a))) ** 2


def well_free_limit(alpha: float, n: int) -> float:
    """The a -> infinity limit alpha n^2 of :func:`well_beta0_exact`."""
    if not alpha > 0.0:
        raise ParameterDomain(f"formula needs alpha > 0, got {alpha!r}")
    return alpha * n * n


def well_area_limit_closed(alpha: float, beta: float, a: float) -> float:
    """(2 pi / sqrt(alpha beta)) arcsinh(sqrt(alpha) a); 2 pi a / sqrt(beta) at alpha = 0."""
    if not beta > 0.0:
        return math.inf
    if alpha == 0.0:
        return 2.0 * math.pi * a / math.sqrt(beta)
    return 2.0 * math.pi / math.sqrt(alpha * beta) * math.asinh(math.sqrt(alpha) * a)


def well_max_level_closed(alpha: float, beta: float, a: float) -> int | None:
    """Integer part of arcsinh(sqrt(alpha) a) / sqrt(alpha beta); None when beta = 0."""
    limit = well_area_limit_closed(alpha, beta, a)
    if math.isinf(limit):
        return None
    return math.floor(limit / (2.0 * math.pi))

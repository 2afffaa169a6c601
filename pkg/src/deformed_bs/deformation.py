"""Deformation functions f(X, P) of the commutator [X, P] = i*hbar*f(X, P)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

from .errors import ParameterDomain, PositivityViolation
from .expr import Expression, parse
from .quadrature import QuadratureResult, integrate_adaptive

__all__ = [
    "Deformation",
    "QuadraticGUP",
    "MomentumOnly",
    "PositionOnly",
    "CustomDeformation",
    "deformation_from_expr",
    "min_position_uncertainty",
    "min_momentum_uncertainty",
    "q_factor",
    "POSITIVITY_GRID",
]

POSITIVITY_GRID = 64


class Deformation:
    """Common interface. Subclasses are immutable dataclasses."""

    #: True when f does not depend on X
    momentum_only: bool = False

    def eval_f(self, X: float, P: float) -> float:
        raise NotImplementedError

    def inner_momentum_integral(self, X: float, Pmax: float, tol: float = 1e-12) -> QuadratureResult:
        """Integral of 1/f(X, P) over P in [-Pmax, Pmax]."""
        raise NotImplementedError

    def saturated_slice(self, X: float) -> float | None:
        """Closed-form value of the P-slice with Pmax -> infinity, if known."""
        return None

    def position_scale(self) -> float | None:
        """Length on which f varies in X, used to seed quadrature breakpoints."""
        return None

    def check_region(self, x_lo: float, x_hi: float, p_max: float) -> None:
        """Fail loudly if f is not positive on the box [x_lo, x_hi] x [-p_max, p_max]."""

    @property
    def is_undeformed(self) -> bool:
        return False


@dataclass(frozen=True)
class QuadraticGUP(Deformation):
    """f = 1 + alpha*X^2 + beta*P^2, with alpha, beta >= 0."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not (self.alpha >= 0.0 and self.beta >= 0.0):
            raise ParameterDomain(
                f"alpha and beta must be non-negative, got alpha={self.alpha!r}, beta={self.beta!r}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ParameterDomain("alpha and beta must be finite")

    @property
    def momentum_only(self) -> bool:  # type: ignore[override]
        return self.alpha == 0.0

    @property
    def is_undeformed(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0

    def eval_f(self, X: float, P: float) -> float:
        return 1.0 + self.alpha * X * X + self.beta * P * P

    def inner_momentum_integral(self, X: float, Pmax: float, tol: float = 1e-12) -> QuadratureResult:
        if Pmax < 0.0:
            raise ValueError(f"Pmax must be non-negative, got {Pmax!r}")
        c = 1.0 + self.alpha * X * X
        if self.beta == 0.0:
            return QuadratureResult(2.0 * Pmax / c, 0.0, 1)
        value = 2.0 / math.sqrt(self.beta * c) * math.atan(math.sqrt(self.beta / c) * Pmax)
        return QuadratureResult(value, 0.0, 1)

    def saturated_slice(self, X: float) -> float | None:
        if self.beta == 0.0:
            return math.inf
        return math.pi / math.sqrt(self.beta * (1.0 + self.alpha * X * X))

    def position_scale(self) -> float | None:
        return 1.0 / math.sqrt(self.alpha) if self.alpha > 0.0 else None


class _ExpressionDeformation(Deformation):
    """Shared machinery for expression-backed variants."""

    g: Expression
    _fn: Callable[[float, float], float]

    def eval_f(self, X: float, P: float) -> float:
        value = self._fn(X, P)
        if not value > 0.0:
            raise PositivityViolation(X, P, value)
        return value

    def inner_momentum_integral(self, X: float, Pmax: float, tol: float = 1e-12) -> QuadratureResult:
        if Pmax < 0.0:
            raise ValueError(f"Pmax must be non-negative, got {Pmax!r}")
        if Pmax == 0.0:
            return QuadratureResult(0.0, 0.0, 1)
        return integrate_adaptive(lambda P: 1.0 / self.eval_f(X, P), -Pmax, Pmax, tol)

    def check_region(self, x_lo: float, x_hi: float, p_max: float) -> None:
        n = POSITIVITY_GRID
        xs = [x_lo + (x_hi - x_lo) * i / (n - 1) for i in range(n)]
        ps = [-p_max + 2.0 * p_max * j / (n - 1) for j in range(n)]
        for X in xs:
            for P in ps:
                self.eval_f(X, P)
        asymmetric = False
        for X in xs[:: n // 8]:
            for P in ps[:: n // 8]:
                f0 = self._fn(X, P)
                if not (math.isclose(f0, self._fn(-X, P), rel_tol=1e-9, abs_tol=1e-300)
                        and math.isclose(f0, self._fn(X, -P), rel_tol=1e-9, abs_tol=1e-300)):
                    asymmetric = True
                    break
            if asymmetric:
                break
        if asymmetric:
            warnings.warn(
                f"deformation {self.g} is not even in X and P; "
                "the quantization rule assumes left-right symmetry",
                stacklevel=3,
            )


@dataclass(frozen=True)
class MomentumOnly(_ExpressionDeformation):
    """f = g(P)."""

    g: Expression
    momentum_only = True

    def __post_init__(self):
        fn = self.g.bind(("P",))
        object.__setattr__(self, "_fn", lambda X, P: fn(P))


@dataclass(frozen=True)
class PositionOnly(_ExpressionDeformation):
    """f = g(X); the P-slice integral is exactly 2*Pmax/g(X)."""

    g: Expression

    def __post_init__(self):
        fn = self.g.bind(("X",))
        object.__setattr__(self, "_fn", lambda X, P: fn(X))

    def inner_momentum_integral(self, X: float, Pmax: float, tol: float = 1e-12) -> QuadratureResult:
        if Pmax < 0.0:
            raise ValueError(f"Pmax must be non-negative, got {Pmax!r}")
        return QuadratureResult(2.0 * Pmax / self.eval_f(X, 0.0), 0.0, 1)

    def saturated_slice(self, X: float) -> float | None:
        return math.inf


@dataclass(frozen=True)
class CustomDeformation(_ExpressionDeformation):
    """f = g(X, P)."""

    g: Expression

    def __post_init__(self):
        object.__setattr__(self, "_fn", self.g.bind(("X", "P")))


def deformation_from_expr(source: str) -> Deformation:
    """Parse ``source`` in X and P and pick the narrowest matching variant."""
    g = parse(source, {"X", "P"})
    used = g.used_variables()
    if used <= {"P"}:
        return MomentumOnly(g)
    if used == {"X"}:
        return PositionOnly(g)
    return CustomDeformation(g)


def _check_params(alpha: float, beta: float) -> None:
    if alpha < 0.0 or beta < 0.0:
        raise ParameterDomain(f"alpha and beta must be non-negative, got {alpha!r}, {beta!r}")


def min_position_uncertainty(alpha: float, beta: float, hbar: float = 1.0) -> float:
    """Minimal length hbar*sqrt(beta / (1 - hbar^2 alpha beta))."""
    _check_params(alpha, beta)
    denom = 1.0 - hbar * hbar * alpha * beta
    if denom <= 0.0:
        raise ParameterDomain(f"hbar^2*alpha*beta = {1.0 - denom!r} must be < 1")
    return hbar * math.sqrt(beta / denom)


def min_momentum_uncertainty(alpha: float, beta: float, hbar: float = 1.0) -> float:
    """Minimal momentum hbar*sqrt(alpha / (1 - hbar^2 alpha beta))."""
    _check_params(alpha, beta)
    denom = 1.0 - hbar * hbar * alpha * beta
    if denom <= 0.0:
        raise ParameterDomain(f"hbar^2*alpha*beta = {1.0 - denom!r} must be < 1")
    return hbar * math.sqrt(alpha / denom)


def q_factor(alpha: float, beta: float) -> float:
    """Geometric ratio (1 + sqrt(alpha beta)) / (1 - sqrt(alpha beta)) of the oscillator spectrum."""
    _check_params(alpha, beta)
    s = math.sqrt(alpha * beta)
    if s >= 1.0:
        raise ParameterDomain(f"alpha*beta = {alpha * beta!r} must be < 1")
    return (1.0 + s) / (1.0 - s)

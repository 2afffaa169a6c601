"""The eigenvalue problem H = P^2 + U(X) (units with 2m = 1)."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

from scipy.optimize import minimize_scalar

from .errors import MultipleWells, NoAllowedRegion, OutOfDomain
from .expr import Expression, parse

__all__ = [
    "Harmonic",
    "SquareWell",
    "CustomPotential",
    "Potential",
    "Problem",
    "SCAN_POINTS",
]

SCAN_POINTS = 1024
ROOT_XTOL = 1e-14
PMAX_CLAMP = 1e-14


@dataclass(frozen=True)
class Harmonic:
    """U(X) = X^2; the undeformed spectrum is 2n + 1."""

    smooth = True
    default_delta = 0.5


@dataclass(frozen=True)
class SquareWell:
    """U = 0 on [-a, a] with infinite walls."""

    a: float
    smooth = False
    default_delta = 0.0

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError(f"square well half-width must be positive, got {self.a!r}")


@dataclass(frozen=True)
class CustomPotential:
    """A single-well potential U(X) searched for turning points on [lo, hi].

    The scan domain edges act as hard walls when U stays below E there.
    """

    U: Expression
    lo: float
    hi: float
    smooth = True
    default_delta = 0.5

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"scan domain must satisfy lo < hi, got [{self.lo!r}, {self.hi!r}]")

    @classmethod
    def from_source(cls, source: str, lo: float, hi: float) -> "CustomPotential":
        return cls(parse(source, {"X"}), lo, hi)


Potential = Union[Harmonic, SquareWell, CustomPotential]


@dataclass(frozen=True)
class Problem:
    potential: Potential
    hbar: float = 1.0
    delta: float | None = None
    _u: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")
        if isinstance(self.potential, CustomPotential):
            object.__setattr__(self, "_u", self.potential.U.bind(("X",)))

    @property
    def delta_default(self) -> float:
        return self.potential.default_delta if self.delta is None else self.delta

    @property
    def kind(self) -> str:
        return {Harmonic: "oscillator", SquareWell: "well", CustomPotential: "custom"}[
            type(self.potential)]

    @property
    def is_even(self) -> bool:
        return not isinstance(self.potential, CustomPotential)

    def potential_at(self, X: float) -> float:
        pot = self.potential
        if isinstance(pot, Harmonic):
            return X * X
        if isinstance(pot, SquareWell):
            if abs(X) > pot.a:
                raise OutOfDomain(f"X={X!r} lies outside the well [-{pot.a!r}, {pot.a!r}]")
            return 0.0
        return self._u(X)

    def x_bounds(self) -> tuple[float, float]:
        """The a-priori position domain (infinite for the oscillator)."""
        pot = self.potential
        if isinstance(pot, Harmonic):
            return -math.inf, math.inf
        if isinstance(pot, SquareWell):
            return -pot.a, pot.a
        return pot.lo, pot.hi

    # ------------------------------------------------------------ custom scan

    @cached_property
    def _scan(self) -> tuple[list[float], list[float]]:
        pot = self.potential
        xs = [pot.lo + (pot.hi - pot.lo) * i / (SCAN_POINTS - 1) for i in range(SCAN_POINTS)]
        return xs, [self._u(x) for x in xs]

    @cached_property
    def _minimum(self) -> tuple[float, float]:
        if isinstance(self.potential, Harmonic):
            return 0.0, 0.0
        if isinstance(self.potential, SquareWell):
            return 0.0, 0.0
        xs, us = self._scan
        i = min(range(len(us)), key=us.__getitem__)
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, len(xs) - 1)]
        best_x, best_u = xs[i], us[i]
        res = minimize_scalar(self._u, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        if res.success and res.fun < best_u:
            best_x, best_u = float(res.x), float(res.fun)
        return best_x, best_u

    def min_potential(self) -> float:
        return self._minimum[1]

    def argmin_potential(self) -> float:
        return self._minimum[0]

    def _bisect_edge(self, inside: float, outside: float, E: float) -> float:
        """Root of U - E between an allowed and a forbidden point; returns the allowed side."""
        u = self._u
        while abs(outside - inside) > ROOT_XTOL:
            mid = 0.5 * (inside + outside)
            if mid == inside or mid == outside:
                break
            if u(mid) <= E:
                inside = mid
            else:
                outside = mid
        return inside

    def turning_points(self, E: float) -> tuple[float, float]:
        """Ends (x1, x2) of the classically allowed interval at energy E.

        Raises
        ------
        NoAllowedRegion
            If E does not exceed the minimum of U.
        MultipleWells
            If a custom potential has more than one allowed interval.
        """
        umin = self.min_potential()
        if not E > umin:
            raise NoAllowedRegion(f"E={E!r} does not exceed min U = {umin!r}")
        pot = self.potential
        if isinstance(pot, Harmonic):
            r = math.sqrt(E)
            return -r, r
        if isinstance(pot, SquareWell):
            return -pot.a, pot.a

        xs, us = self._scan
        allowed = [u < E for u in us]
        runs = []
        i = 0
        while i < len(xs):
            if allowed[i]:
                j = i
                while j + 1 < len(xs) and allowed[j + 1]:
                    j += 1
                runs.append((i, j))
                i = j + 1
            else:
                i += 1
        xmin = self.argmin_potential()
        if len(runs) > 1:
            spans = ", ".join(f"[{xs[i]:.6g}, {xs[j]:.6g}]" for i, j in runs)
            raise MultipleWells(f"allowed region at E={E!r} is disconnected: {spans}")
        if not runs:
            # well narrower than the scan spacing: its grid neighbours are both forbidden
            k = bisect.bisect_right(xs, xmin) - 1
            left_out = xs[k] if k >= 0 else pot.lo
            right_out = xs[k + 1] if k + 1 < len(xs) else pot.hi
            x1 = self._bisect_edge(xmin, left_out, E) if left_out < xmin else xmin
            x2 = self._bisect_edge(xmin, right_out, E) if right_out > xmin else xmin
            return x1, x2
        i, j = runs[0]
        x1 = self._bisect_edge(xs[i], xs[i - 1], E) if i > 0 else pot.lo
        x2 = self._bisect_edge(xs[j], xs[j + 1], E) if j < len(xs) - 1 else pot.hi
        return x1, x2

    def turning_points_inside(self, E: float, x1: float, x2: float) -> tuple[float, float]:
        """Turning points at E for a custom potential, known to lie in [x1, x2].

        Only valid below the energy at which (x1, x2) were found; cheaper than
        a full scan.
        """
        umin = self.min_potential()
        if not E > umin:
            raise NoAllowedRegion(f"E={E!r} does not exceed min U = {umin!r}")
        xmin = self.argmin_potential()
        u = self._u
        left = x1 if u(x1) <= E else self._bisect_edge(xmin, x1, E)
        right = x2 if u(x2) <= E else self._bisect_edge(xmin, x2, E)
        return left, right

    def p_max(self, X: float, E: float) -> float:
        """sqrt(E - U(X)); tiny negative radicands at turning points clamp to 0."""
        radicand = E - self.potential_at(X)
        if radicand < 0.0:
            if radicand >= -PMAX_CLAMP * max(abs(E), 1.0):
                return 0.0
            raise OutOfDomain(f"X={X!r} is outside the allowed region at E={E!r}")
        return math.sqrt(radicand)

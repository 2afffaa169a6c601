"""Deformed Bohr-Sommerfeld quantization.

The level E_n solves

    A(E_n) = 2*pi*hbar*(n + delta),   A(E) = integral over {P^2 + U(X) <= E} of dX dP / f(X, P).

``A`` is evaluated as nested one-dimensional integrals: the P-slice
(closed form for the quadratic family) inside an outer X-integral between the
turning points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .deformation import Deformation, QuadraticGUP
from .errors import NoBoundLevel, SolverFailure
from .problem import CustomPotential, Harmonic, Problem, SquareWell
from .quadrature import QuadratureResult, integrate_adaptive, turning_point_transform

__all__ = [
    "QuantizationTarget",
    "LevelResult",
    "AreaLimit",
    "phase_area",
    "contour_area_momentum_only",
    "area_limit",
    "solve_level",
    "spectrum",
    "max_level",
    "DEFAULT_TOL",
    "CUSTOM_ENERGY_CEILING",
]

DEFAULT_TOL = 1e-9
AREA_TOL_FLOOR = 1e-12
CUSTOM_ENERGY_CEILING = 1e12
BUILTIN_ENERGY_CEILING = 1e300
MAX_ROOT_ITERATIONS = 200
# relative slack when taking the integer part of A(inf)/(2 pi hbar) - delta
INTEGER_PART_GUARD = 1e-9


@dataclass(frozen=True)
class QuantizationTarget:
    n: int
    delta: float
    hbar: float = 1.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValueError(f"level index must be a non-negative integer, got {self.n!r}")
        if not self.n + self.delta > 0.0:
            raise ValueError(
                f"n + delta must be positive, got n={self.n}, delta={self.delta!r}")
        if not self.hbar > 0.0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")

    @property
    def target_area(self) -> float:
        return 2.0 * math.pi * self.hbar * (self.n + self.delta)


@dataclass(frozen=True)
class LevelResult:
    n: int
    energy: float | None
    target_area: float
    achieved_area: float | None
    iterations: int
    area_error_estimate: float
    status: str = "bound"
    reason: str = ""

    @property
    def bound(self) -> bool:
        return self.status == "bound"


@dataclass(frozen=True)
class AreaLimit:
    """Deformed area of the whole phase space, ``math.inf`` when unbounded."""

    value: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    @classmethod
    def infinite(cls) -> "AreaLimit":
        return cls(math.inf)


def _geometric_points(half_width: float, scale: float) -> list[float]:
    """Breakpoints 0, +-scale*2^k inside (-half_width, half_width)."""
    points = [0.0]
    x = scale
    while x < half_width:
        points += [-x, x]
        x *= 2.0
    return points


def _momentum_slice(d: Deformation, tol: float) -> Callable[[float, float], QuadratureResult]:
    if isinstance(d, QuadraticGUP):
        return d.inner_momentum_integral

    def slice_(X: float, Pmax: float) -> QuadratureResult:
        points = _geometric_points(Pmax, 1.0) if Pmax > 1.0 else ()
        if not points or Pmax == 0.0:
            return d.inner_momentum_integral(X, Pmax, tol)
        return integrate_adaptive(lambda P: 1.0 / d.eval_f(X, P), -Pmax, Pmax, tol, points)
    return slice_


def phase_area(pr: Problem, d: Deformation, E: float, tol: float = 1e-12) -> QuadratureResult:
    """Deformed phase-space area of the region P^2 + U(X) <= E."""
    x1, x2 = pr.turning_points(E)
    p_top = math.sqrt(E - pr.min_potential())
    d.check_region(x1, x2, p_top)
    slice_ = _momentum_slice(d, 0.1 * tol)
    inner_evals = 0
    inner_err = 0.0

    def outer(X: float) -> float:
        nonlocal inner_evals, inner_err
        r = slice_(X, pr.p_max(X, E))
        inner_evals += r.evaluations
        inner_err = max(inner_err, r.error_estimate)
        return r.value

    scale = d.position_scale() or 1.0
    if isinstance(pr.potential, SquareWell):
        a = pr.potential.a
        res = integrate_adaptive(outer, -a, a, tol, _geometric_points(a, scale))
    else:
        tr = turning_point_transform(x1, x2)
        centre, w = tr.center, tr.half_width
        thetas = [math.asin(max(-1.0, min(1.0, (x - centre) / w)))
                  for x in _geometric_points(w, scale) if abs(x - centre) < w]
        res = integrate_adaptive(tr.apply(outer), tr.lower, tr.upper, tol,
                                 [t for t in thetas if tr.lower < t < tr.upper])
    return QuadratureResult(res.value, res.error_estimate + (x2 - x1) * inner_err,
                            res.evaluations + inner_evals)


def contour_area_momentum_only(pr: Problem, d: Deformation, E: float,
                               tol: float = 1e-12) -> QuadratureResult:
    """The loop integral -contour X dP / f(P) over H = E, as an integral over P.

    Only defined for deformations that do not depend on X.
    """
    if not d.momentum_only:
        raise ValueError("contour form requires a deformation independent of X")
    umin = pr.min_potential()
    x1, x2 = pr.turning_points(E)
    p_top = math.sqrt(E - umin)
    d.check_region(x1, x2, p_top)
    pot = pr.potential

    if isinstance(pot, Harmonic):
        def width(P: float) -> float:
            return 2.0 * math.sqrt(max(E - P * P, 0.0))
    elif isinstance(pot, SquareWell):
        def width(P: float) -> float:
            return 2.0 * pot.a
    else:
        def width(P: float) -> float:
            e_slice = E - P * P
            if e_slice <= umin:
                return 0.0
            lo, hi = pr.turning_points_inside(e_slice, x1, x2)
            return hi - lo

    def integrand(P: float) -> float:
        return width(P) / d.eval_f(0.0, P)

    tr = turning_point_transform(-p_top, p_top)
    thetas = [math.asin(p / p_top) for p in _geometric_points(p_top, 1.0)]
    return integrate_adaptive(tr.apply(integrand), tr.lower, tr.upper, tol,
                              [t for t in thetas if tr.lower < t < tr.upper])


def _probe_limit(pr: Problem, d: Deformation, tol: float) -> AreaLimit:
    """Watch A at E = min U + 10^k for k = 0..12 and extrapolate if it converges."""
    umin = pr.min_potential()
    areas = []
    for k in range(13):
        areas.append(phase_area(pr, d, umin + 10.0 ** k, tol).value)
    increments = [b - a for a, b in zip(areas[:-1], areas[1:])]
    ratios = [inc / prev if prev > 0.0 else math.inf
              for prev, inc in zip(increments[:-1], increments[1:])]
    last = ratios[-3:]
    if all(0.0 <= r < 0.8 for r in last) and increments[-1] < 1e-3 * areas[-1]:
        r = last[-1]
        return AreaLimit(areas[-1] + increments[-1] * r / (1.0 - r))
    return AreaLimit.infinite()


def area_limit(pr: Problem, d: Deformation, tol: float = 1e-13) -> AreaLimit:
    """The E -> infinity limit of the deformed area.

    For the square well the saturated P-slice is integrated over the well
    directly; otherwise known-divergent cases return infinity and the rest are
    probed numerically.
    """
    pot = pr.potential
    if isinstance(pot, SquareWell):
        sat = d.saturated_slice(0.0)
        if sat is not None:
            if math.isinf(sat):
                return AreaLimit.infinite()
            scale = d.position_scale() or 1.0
            res = integrate_adaptive(d.saturated_slice, -pot.a, pot.a, tol,
                                     _geometric_points(pot.a, scale))
            return AreaLimit(res.value)
    if isinstance(pot, Harmonic) and isinstance(d, QuadraticGUP):
        return AreaLimit.infinite()
    return _probe_limit(pr, d, 1e-10)


def max_level(pr: Problem, d: Deformation, delta: float | None = None,
              limit: AreaLimit | None = None) -> int | None:
    """Largest quantum number admitted by a finite area limit; None if unbounded.

    The integer part follows the convention ``[A(inf) / (2 pi hbar) - delta]``
    with a 1e-9 relative guard, so a limit that equals an integer up to
    rounding counts that integer.
    """
    delta = pr.delta_default if delta is None else delta
    limit = area_limit(pr, d) if limit is None else limit
    if not limit.finite:
        return None
    x = limit.value / (2.0 * math.pi * pr.hbar) - delta
    return math.floor(x + INTEGER_PART_GUARD * max(1.0, abs(x)))


def _bracket_and_solve(area: Callable[[float, float], QuadratureResult], target: float,
                       e_floor: float, ceiling: float, tol: float, n: int,
                       n_max: int | None, custom: bool) -> tuple[float, QuadratureResult, int]:
    evaluations = 0
    quad_tol = max(AREA_TOL_FLOOR, 0.1 * tol)

    lo, a_lo = e_floor, 0.0
    step = 1.0
    hi = e_floor + step
    while True:
        r_hi = area(hi, quad_tol)
        evaluations += 1
        if r_hi.value >= target:
            break
        lo, a_lo = hi, r_hi.value
        step *= 2.0
        hi = e_floor + step
        if hi > ceiling:
            if custom:
                raise NoBoundLevel(n, n_max, f"area still below target at E={ceiling:g}")
            raise SolverFailure(f"bracket for level n={n} exceeded E={ceiling:g}")

    slope = (r_hi.value - a_lo) / (hi - lo)
    quad_tol = max(AREA_TOL_FLOOR,
                   min(quad_tol, 0.1 * tol * max(1.0, hi) * slope / max(target, 1.0)))

    g_lo, g_hi = a_lo - target, r_hi.value - target
    best = (abs(g_hi), hi, r_hi)
    if g_hi == 0.0:
        return hi, r_hi, evaluations
    x_prev, g_prev = lo, g_lo
    x_cur, g_cur = hi, g_hi
    widths = [hi - lo]
    for _ in range(MAX_ROOT_ITERATIONS):
        if hi - lo <= tol * max(1.0, abs(x_cur)):
            break
        # bisect when secant is undefined, leaves the bracket, or the bracket stalls
        stalled = len(widths) >= 3 and widths[-1] > 0.5 * widths[-3]
        s = None
        if g_cur != g_prev and not stalled:
            s = x_cur - g_cur * (x_cur - x_prev) / (g_cur - g_prev)
        if s is None or not (lo < s < hi):
            s = 0.5 * (lo + hi)
            widths = []
        r_s = area(s, quad_tol)
        evaluations += 1
        g_s = r_s.value - target
        if abs(g_s) < best[0]:
            best = (abs(g_s), s, r_s)
        if g_s < 0.0:
            lo = s
        else:
            hi = s
        widths.append(hi - lo)
        delta_e = abs(s - x_cur)
        x_prev, g_prev, x_cur, g_cur = x_cur, g_cur, s, g_s
        if g_s == 0.0 or delta_e <= tol * max(1.0, abs(s)):
            break
    else:
        raise SolverFailure(f"level n={n} did not converge in {MAX_ROOT_ITERATIONS} iterations")
    return best[1], best[2], evaluations


def solve_level(pr: Problem, d: Deformation, n: int, delta: float | None = None,
                tol: float = DEFAULT_TOL, limit: AreaLimit | None = None) -> LevelResult:
    """Energy of level ``n``: the root of A(E) = 2 pi hbar (n + delta).

    Raises
    ------
    NoBoundLevel
        The target meets or exceeds a finite area limit (or, for custom
        potentials, is still unreached at E = 1e12).
    """
    delta = pr.delta_default if delta is None else delta
    target = QuantizationTarget(n, delta, pr.hbar).target_area
    custom = isinstance(pr.potential, CustomPotential) or not isinstance(d, QuadraticGUP)
    if limit is None and not custom:
        limit = area_limit(pr, d)
    n_max = max_level(pr, d, delta, limit) if limit is not None else None
    if limit is not None and limit.finite and target >= limit.value:
        raise NoBoundLevel(n, n_max, f"target area {target!r} >= area limit {limit.value!r}")

    def area(E: float, quad_tol: float) -> QuadratureResult:
        return phase_area(pr, d, E, quad_tol)

    ceiling = CUSTOM_ENERGY_CEILING if custom else BUILTIN_ENERGY_CEILING
    energy, res, evaluations = _bracket_and_solve(
        area, target, pr.min_potential(), ceiling, tol, n, n_max, custom)
    return LevelResult(n, energy, target, res.value, evaluations, res.error_estimate)


def spectrum(pr: Problem, d: Deformation, n_from: int, n_to: int,
             delta: float | None = None, tol: float = DEFAULT_TOL) -> list[LevelResult]:
    """Levels n_from..n_to inclusive; levels past saturation come back with status 'unbound'."""
    if n_from > n_to:
        raise ValueError(f"empty level range {n_from}..{n_to}")
    delta = pr.delta_default if delta is None else delta
    custom = isinstance(pr.potential, CustomPotential) or not isinstance(d, QuadraticGUP)
    limit = None if custom else area_limit(pr, d)
    levels = []
    for n in range(n_from, n_to + 1):
        try:
            levels.append(solve_level(pr, d, n, delta, tol, limit))
        except NoBoundLevel as exc:
            target = QuantizationTarget(n, delta, pr.hbar).target_area
            levels.append(LevelResult(n, None, target, None, 0, 0.0, "unbound", str(exc)))
    return levels

"""Shared numerical kernels.

Panel-based adaptive quadrature (fixed-order Gauss-Legendre with an
embedded lower-order error estimate), bracketed bisection, golden-section
maximization of unimodal functions, Newton iteration constrained to the
unit sphere, and unit-ball volume/surface constants.

All routines are pure functions of their arguments and safe to call
concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "NumericsError",
    "QuadratureError",
    "BracketError",
    "ConvergenceError",
    "Bracket",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "integrate",
    "bisect_root",
    "maximize_unimodal",
    "newton_on_sphere",
    "unit_ball_constants",
]


class NumericsError(Exception):
    """Base class for numerical failures raised by this package."""


class QuadratureError(NumericsError):
    """Adaptive refinement ran out of depth before meeting the tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class BracketError(NumericsError):
    """A root bracket does not actually bracket a sign change."""


class ConvergenceError(NumericsError):
    """An iterative solver failed to converge."""

    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals = tuple(residuals)


@dataclass(frozen=True)
class Bracket:
    """An interval with lower < upper."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("bracket endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances, depth limit and breakpoints for adaptive quadrature.

    ``knots`` are abscissas where the integrand may lose smoothness; the
    interval is pre-split there before any adaptive refinement.  Knots
    falling outside the integration interval are ignored.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_depth: int = 48
    knots: tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        for k in self.knots:
            if not math.isfinite(k):
                raise ValueError("knots must be finite")

    def with_knots(self, knots: Sequence[float]) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol, self.abs_tol, self.max_depth, tuple(knots))


DEFAULT_QUADRATURE = QuadratureSpec()

# High and low order Gauss-Legendre rules on [-1, 1]; the 15/7 pair gives
# the embedded error estimate |I15 - I7| per panel.
_X15, _W15 = np.polynomial.legendre.leggauss(15)
_X7, _W7 = np.polynomial.legendre.leggauss(7)
_XALL = np.concatenate([_X15, _X7])


def _panel(f, a: float, b: float) -> tuple[float, float]:
    """High-order estimate and error indicator for one panel."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = np.asarray(f(mid + half * _XALL), dtype=float)
    if y.shape != _XALL.shape:
        raise NumericsError("integrand must map an array of abscissas to an array of values")
    hi = half * float(_W15 @ y[:15])
    lo = half * float(_W7 @ y[15:])
    return hi, abs(hi - lo)


def integrate(f: Callable[[np.ndarray], np.ndarray],
              interval: Bracket | tuple[float, float],
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integrate a vectorized integrand over an interval.

    The interval is split at every knot of ``spec`` first; each segment is
    then refined by recursive bisection until the embedded error estimate
    of every panel is below its share of the total tolerance
    ``max(abs_tol, rel_tol * |integral|)``.

    Raises QuadratureError (carrying the best estimate and its error
    bound) when the depth limit is exhausted before the tolerance is met.
    """
    if isinstance(interval, Bracket):
        a, b = interval.lo, interval.hi
    else:
        a, b = float(interval[0]), float(interval[1])
    if a == b:
        return 0.0
    if a > b:
        raise ValueError("integration interval must have a <= b")

    width = b - a
    cuts = sorted({k for k in spec.knots if a < k < b})
    edges = [a]
    for k in cuts:
        # knots closer than machine resolution to an existing edge are dropped
        if k - edges[-1] > 1e-14 * max(1.0, abs(k), abs(edges[-1])):
            edges.append(k)
    edges.append(b)

    segments = list(zip(edges[:-1], edges[1:]))
    first = [_panel(f, lo, hi) for lo, hi in segments]
    rough = sum(v for v, _ in first)
    tol_total = max(spec.abs_tol, spec.rel_tol * abs(rough))

    total = 0.0
    bound = 0.0
    exhausted = False
    for (lo, hi), (val, err) in zip(segments, first):
        tol_seg = tol_total * (hi - lo) / width
        # stack entries: (a, b, value, error, tol, depth)
        stack = [(lo, hi, val, err, tol_seg, spec.max_depth)]
        while stack:
            sa, sb, sv, se, st, depth = stack.pop()
            if se <= st or sb - sa <= 1e-15 * max(1.0, abs(sa), abs(sb)):
                total += sv
                bound += se
                continue
            if depth <= 0:
                exhausted = True
                total += sv
                bound += se
                continue
            sm = 0.5 * (sa + sb)
            lv, le = _panel(f, sa, sm)
            rv, re = _panel(f, sm, sb)
            stack.append((sa, sm, lv, le, 0.5 * st, depth - 1))
            stack.append((sm, sb, rv, re, 0.5 * st, depth - 1))

    if exhausted and bound > max(spec.abs_tol, spec.rel_tol * abs(total)):
        raise QuadratureError(
            f"quadrature depth {spec.max_depth} exhausted: estimate {total!r}, "
            f"error bound {bound:.3e}", total, bound)
    return total


def bisect_root(f: Callable[[float], float],
                bracket: Bracket | tuple[float, float],
                tol: float = 1e-12,
                max_iter: int = 256) -> float:
    """Locate a sign change of ``f`` by bisection.

    Requires f(lo) * f(hi) <= 0.  Returns the midpoint of the final
    bracket, whose width is at most ``tol``.
    """
    if isinstance(bracket, Bracket):
        a, b = bracket.lo, bracket.hi
    else:
        a, b = float(bracket[0]), float(bracket[1])
    fa = f(a)
    fb = f(b)
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise NumericsError("non-finite value at bracket endpoint")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa!r}, {fb!r}")
    pos_right = fb > 0.0
    for _ in range(max_iter):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0.0) == pos_right:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


_INV_PHI = 0.5 * (math.sqrt(5.0) - 1.0)


def maximize_unimodal(f: Callable[[float], float],
                      bracket: Bracket | tuple[float, float],
                      tol: float = 1e-12) -> tuple[float, float]:
    """Golden-section maximization of a unimodal function.

    The caller is responsible for unimodality.  Flat plateaus are fine:
    any point of a plateau narrower than ``tol`` may be returned.
    Returns (argmax, max).
    """
    if isinstance(bracket, Bracket):
        a, b = bracket.lo, bracket.hi
    else:
        a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise ValueError("bracket requires lo < hi")
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    while b - a > tol:
        if not (math.isfinite(fc) and math.isfinite(fd)):
            raise NumericsError("non-finite value during golden-section search")
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        if c >= d:
            break
    x = 0.5 * (a + b)
    return x, f(x)


def newton_on_sphere(F: Callable[[np.ndarray], np.ndarray],
                     x0: np.ndarray,
                     tol: float = 1e-12,
                     max_iter: int = 80,
                     jac: Callable[[np.ndarray], np.ndarray] | None = None,
                     fd_step: float = 1e-7) -> np.ndarray:
    """Solve F(x) = 0 for x on the unit sphere, F mapping R^(m+1) -> R^m.

    Each step solves the square bordered system [J; x^T] delta = [-F; 0]
    and renormalizes x + delta back to the sphere.  The Jacobian comes
    from ``jac`` when given, otherwise from central differences.
    """
    x = np.asarray(x0, dtype=float).copy()
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        raise ValueError("x0 must be nonzero")
    x /= nx

    def residual(v: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(F(v), dtype=float))

    r = residual(x)
    m = r.size
    n = x.size
    if n != m + 1:
        raise ValueError(f"F must map R^{m + 1} to R^{m}, got input size {n}")

    history = []
    for _ in range(max_iter):
        res = float(np.max(np.abs(r)))
        history.append(res)
        if res <= tol:
            return x
        if jac is not None:
            J = np.asarray(jac(x), dtype=float).reshape(m, n)
        else:
            J = np.empty((m, n))
            for i in range(n):
                h = fd_step * max(1.0, abs(x[i]))
                e = np.zeros(n)
                e[i] = h
                J[:, i] = (residual(x + e) - residual(x - e)) / (2.0 * h)
        A = np.vstack([J, x[np.newaxis, :]])
        rhs = np.concatenate([-r, [0.0]])
        try:
            delta = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular augmented Jacobian: {exc}", history) from exc
        if not np.all(np.isfinite(delta)):
            raise ConvergenceError("non-finite Newton step", history)
        x = x + delta
        x /= float(np.linalg.norm(x))
        r = residual(x)

    history.append(float(np.max(np.abs(r))))
    raise ConvergenceError(
        f"Newton on sphere: no convergence in {max_iter} iterations "
        f"(last residual {history[-1]:.3e})", history)


def unit_ball_constants(n: int) -> tuple[float, float]:
    """Volume of the unit n-ball and surface area of the unit (n-1)-sphere.

    v_n = pi^(n/2) / Gamma(n/2 + 1), s_(n-1) = n * v_n.  Evaluated through
    log-gamma so large n does not overflow.
    """
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    n = int(n)
    log_v = 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0)
    v = math.exp(log_v)
    return v, n * v

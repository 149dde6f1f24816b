"""Bodies of revolution and the geometry of slicing hyperplanes.

A body is the rotation of a concave profile about the x1-axis, scaled by
a global factor: membership is x2^2 + ... + xd^2 <= scale^2 * f(x1/scale)^2.
Hyperplanes with in-plane normal are parameterized by the line
eta = s*xi + h they trace in the (x1, x2)-plane; the chord of the profile
region cut by that line determines the section.

All operations work on immutable inputs and are safe to run concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profile import Profile
from .solvers import (
    Bracket,
    NumericsError,
    QuadratureSpec,
    integrate,
    maximize_unimodal,
    unit_ball_constants,
)
from .profile import _newton_bisect

__all__ = [
    "GeometryError",
    "BodyOfRevolution",
    "Chord",
    "chord_endpoints",
    "section_volume",
    "intercept_range",
    "support",
    "radial",
    "unit_ball_body",
]


class GeometryError(NumericsError):
    """A slicing line misses the body, or a precondition fails."""


@dataclass(frozen=True)
class BodyOfRevolution:
    """Body of revolution in R^dim with a unit-domain profile and a scale."""

    dim: int
    profile: Profile
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 3:
            raise ValueError(f"dimension must be at least 3, got {self.dim}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def to_dict(self) -> dict:
        return {"d": self.dim, "lambda": self.scale, "profile": self.profile.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "BodyOfRevolution":
        return cls(int(data["d"]), Profile.from_dict(data["profile"]),
                   float(data.get("lambda", 1.0)))


def unit_ball_body(dim: int, scale: float = 1.0) -> BodyOfRevolution:
    """The Euclidean ball of radius ``scale`` as a body of revolution."""
    return BodyOfRevolution(dim, Profile.semicircle(), scale)


@dataclass(frozen=True)
class Chord:
    """Intersection of the line eta = s*xi + h with the profile region.

    ``left`` and ``right`` are the first coordinates of the entry and exit
    points (physical units).  ``left_on_lower``/``right_on_upper`` record
    which graph (lower -f or upper f) each endpoint lies on; both are true
    for chords that cross the axis, which includes every volume-maximal
    chord.
    """

    s: float
    h: float
    left: float
    right: float
    left_on_lower: bool
    right_on_upper: bool

    @property
    def length_x(self) -> float:
        return self.right - self.left


def _concave_positive_interval(g, dg, peak_x: float, lo: float, hi: float,
                               g_lo: float, g_hi: float) -> tuple[float, float]:
    """Roots of a concave function around a point where it is positive."""
    if g_lo >= 0.0:
        a = lo
    else:
        a = _newton_bisect(g, dg, lo, peak_x, tol=5e-14)
    if g_hi >= 0.0:
        b = hi
    else:
        b = _newton_bisect(g, dg, peak_x, hi, tol=5e-14)
    return a, b


_SCAN = np.linspace(-1.0, 1.0, 65)


def chord_endpoints(body: BodyOfRevolution, s: float, h: float) -> Chord:
    """Endpoints of the chord cut by the line eta = s*xi + h.

    The set {|L| <= f} is the intersection of the two intervals
    {f - L >= 0} and {f + L >= 0} (each concave in xi); the binding
    constraint at each end determines which graph the endpoint lies on.
    Raises GeometryError when the line misses the body.
    """
    lam = body.scale
    f = body.profile
    hu = h / lam  # line in unit profile coordinates keeps the slope

    fs = f.values(_SCAN)
    line = s * _SCAN + hu
    gap = fs - np.abs(line)
    i = int(np.argmax(gap))
    if gap[i] <= 0.0:
        # near-tangent or missing: certify with a golden-section search
        x_t, g_t = maximize_unimodal(lambda x: f.value(x) - abs(s * x + hu),
                                     (-1.0, 1.0), tol=1e-13)
        if g_t < -1e-13:
            raise GeometryError(
                f"line with slope {s} and intercept {h} misses the body")
        x = float(np.clip(x_t, -1.0, 1.0))
        return Chord(s, h, lam * x, lam * x,
                     s * x + hu <= 0.0, s * x + hu >= 0.0)
    x_in = float(_SCAN[i])

    def g_minus(x: float) -> float:   # f - L, binds where endpoint is on f
        return f.value(x) - (s * x + hu)

    def dg_minus(x: float) -> float:
        return f.derivative(x) - s

    def g_plus(x: float) -> float:    # f + L, binds where endpoint is on -f
        return f.value(x) + s * x + hu

    def dg_plus(x: float) -> float:
        return f.derivative(x) + s

    a1, b1 = _concave_positive_interval(g_minus, dg_minus, x_in, -1.0, 1.0,
                                        g_minus(-1.0), g_minus(1.0))
    a2, b2 = _concave_positive_interval(g_plus, dg_plus, x_in, -1.0, 1.0,
                                        g_plus(-1.0), g_plus(1.0))
    left = max(a1, a2)
    right = min(b1, b2)
    if left > right:
        raise GeometryError(
            f"line with slope {s} and intercept {h} misses the body")
    return Chord(s, h, lam * left, lam * right,
                 left_on_lower=(a2 >= a1), right_on_upper=(b1 <= b2))


def _chord_unit(body: BodyOfRevolution, s: float, h: float) -> tuple[float, float]:
    c = chord_endpoints(body, s, h)
    return c.left / body.scale, c.right / body.scale


def _profile_knots(profile: Profile) -> tuple[float, ...]:
    """Abscissas where the profile may lose smoothness (bump edges)."""
    knots = []
    if profile.variant == "term_sum":
        for bump, reflected in profile.terms:
            lo, hi = bump.support
            if reflected:
                lo, hi = -hi, -lo
            knots += [lo, hi]
    else:
        knots += [profile._xr_lo, profile._xr_hi,
                  -profile._xr_lo, -profile._xr_hi]
    return tuple(knots)


def section_volume(body: BodyOfRevolution, s: float, h: float,
                   spec: QuadratureSpec | None = None) -> float:
    """(d-1)-volume of the hyperplane section carried by the line (s, h).

    The slice at abscissa xi is a (d-2)-ball of radius sqrt(f^2 - L^2), so

        vol = v_(d-2) * sqrt(1+s^2) * integral of (f^2 - L^2)^((d-2)/2)

    over the chord, evaluated in unit coordinates and scaled by
    lambda^(d-1).  Quadrature panels are pre-split at the chord endpoints
    and at every bump-support edge.
    """
    d = body.dim
    f = body.profile
    lam = body.scale
    hu = h / lam
    left, right = _chord_unit(body, s, h)
    if right - left <= 1e-14:
        return 0.0
    v, _ = unit_ball_constants(d - 2)
    power = 0.5 * (d - 2)
    base = QuadratureSpec() if spec is None else spec
    quad = base.with_knots(_profile_knots(f))

    def integrand(x: np.ndarray) -> np.ndarray:
        fx = f.values(x)
        line = s * x + hu
        return np.clip(fx * fx - line * line, 0.0, None) ** power

    val = integrate(integrand, (left, right), quad)
    return (lam ** (d - 1)) * v * math.sqrt(1.0 + s * s) * val


def intercept_range(body: BodyOfRevolution, s: float) -> Bracket:
    """Open range of intercepts h for which the line meets the interior.

    The bounds are the tangent intercepts -max(f + s*xi) and
    max(f - s*xi), each found by golden-section search on a concave
    function.
    """
    f = body.profile
    _, hi_minus = maximize_unimodal(lambda x: f.value(x) - s * x, (-1.0, 1.0),
                                    tol=1e-13)
    _, hi_plus = maximize_unimodal(lambda x: f.value(x) + s * x, (-1.0, 1.0),
                                   tol=1e-13)
    lam = body.scale
    return Bracket(-lam * hi_plus, lam * hi_minus)


def support(body: BodyOfRevolution, u: tuple[float, float]) -> float:
    """Support function at an in-plane direction (u1, u2).

    Rotational symmetry reduces any direction to the (x1, x2)-plane;
    h(u) = scale * max over xi of (xi*u1 + f(xi)*|u2|).
    """
    u1, u2 = float(u[0]), float(u[1])
    norm = math.hypot(u1, u2)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    u1, u2 = u1 / norm, u2 / norm
    f = body.profile
    if u2 == 0.0:
        return body.scale * abs(u1)
    a2 = abs(u2)
    _, val = maximize_unimodal(lambda x: x * u1 + f.value(x) * a2,
                               (-1.0, 1.0), tol=1e-13)
    val = max(val, u1 * 1.0, -u1 * 1.0)  # endpoint candidates xi = +-1
    return body.scale * val


def radial(body: BodyOfRevolution, u: tuple[float, float]) -> float:
    """Radial function at an in-plane direction: exit distance of the ray.

    Requires the origin in the interior (f(0) > 0).  Found by bisection
    on the monotone membership predicate along the ray, polished by a
    Newton step on the boundary equation.
    """
    u1, u2 = float(u[0]), float(u[1])
    norm = math.hypot(u1, u2)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    u1, u2 = u1 / norm, u2 / norm
    f = body.profile
    if f.value(0.0) <= 0.0:
        raise GeometryError("radial function requires the origin in the interior")
    lam = body.scale
    if u2 == 0.0:
        return lam
    a2 = abs(u2)
    fmax, _ = f.axis_extremes()

    def g(t: float) -> float:  # negative inside the body, zero on the boundary
        x = t * u1 / lam
        if abs(x) > 1.0:
            return t * a2 + (abs(x) - 1.0)
        return t * a2 - lam * f.value(x)

    def dg(t: float) -> float:
        x = t * u1 / lam
        if abs(x) >= 1.0:
            return a2 + abs(u1)
        return a2 - u1 * f.derivative(x)

    hi = lam * (1.0 + fmax) / max(a2, abs(u1))
    return _newton_bisect(g, dg, 0.0, hi, tol=1e-13)

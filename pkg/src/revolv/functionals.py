"""Central-section, maximal-section and projection functions.

Directions with in-plane normal are parameterized by the slope s of the
line the slicing hyperplane traces in the (x1, x2)-plane, i.e. the unit
normal (-s, 1, 0, ...)/sqrt(1+s^2).  The axis direction (s = infinity)
is handled separately by :func:`axis_functionals`.

Slope sweeps are embarrassingly parallel; :func:`sweep_functionals`
optionally distributes grid points over worker processes (capped by the
``REVOLV_THREADS`` environment variable) and assembles results in grid
order regardless of completion order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .body_geometry import (
    BodyOfRevolution,
    Chord,
    chord_endpoints,
    intercept_range,
    radial,
    section_volume,
    _profile_knots,
)
from .solvers import (
    NumericsError,
    QuadratureSpec,
    bisect_root,
    integrate,
    maximize_unimodal,
    unit_ball_constants,
)

__all__ = [
    "MaxSectionResult",
    "central_section",
    "central_section_via_radial",
    "maximal_section",
    "m_via_distribution",
    "max_condition_residual",
    "projection",
    "axis_functionals",
    "slope_grid",
    "sweep_functionals",
    "resolve_workers",
    "REGIME_SLOPE",
]

# slope at which the maximal chords of a near-ball body reach abscissa 3/4
REGIME_SLOPE = math.sqrt(7.0) / 3.0


@dataclass(frozen=True)
class MaxSectionResult:
    """Outcome of the maximal-section search at one slope."""

    s: float
    volume: float
    h_star: float
    chord: Chord
    residual: float          # |derivative condition| / normalizer at h_star
    condition_value: float   # signed value of the derivative-condition integral


def central_section(body: BodyOfRevolution, s: float,
                    spec: QuadratureSpec | None = None) -> float:
    """Volume of the section through the origin at slope s."""
    if body.profile.value(0.0) <= 0.0:
        raise NumericsError("central section requires the origin in the interior")
    return section_volume(body, s, 0.0, spec)


def _condition_integral(body: BodyOfRevolution, s: float, h: float,
                        absolute: bool = False) -> float:
    """The optimality integral over the chord at (s, h).

    The h-derivative of the section volume is proportional to
    -integral of (f^2 - L^2)^((d-4)/2) * L, so the signed value crosses
    zero exactly at the maximizing intercept.  With ``absolute`` the
    weight |L| is used instead, giving the normalizer for residuals.
    """
    d = body.dim
    f = body.profile
    lam = body.scale
    hu = h / lam
    chord = chord_endpoints(body, s, h)
    left, right = chord.left / lam, chord.right / lam
    if right - left <= 1e-14:
        return 0.0
    power = 0.5 * (d - 4)
    knots = list(_profile_knots(f))
    if absolute and s != 0.0:
        knots.append(-hu / s)  # kink of |L|
    quad = QuadratureSpec().with_knots(knots)

    def integrand(x: np.ndarray) -> np.ndarray:
        line = s * x + hu
        weight = np.abs(line) if absolute else line
        if power == 0.0:
            return weight
        fx = f.values(x)
        return np.clip(fx * fx - line * line, 0.0, None) ** power * weight

    return (lam ** (d - 2)) * integrate(integrand, (left, right), quad)


def max_condition_residual(body: BodyOfRevolution, s: float, h: float) -> float:
    """Signed value of the maximality condition integral at (s, h)."""
    return _condition_integral(body, s, h)


def maximal_section(body: BodyOfRevolution, s: float,
                    spec: QuadratureSpec | None = None) -> MaxSectionResult:
    """Maximal section volume over all intercepts at slope s.

    Golden-section search over the intercept range (the volume is
    unimodal in h for a convex body), then the optimum is polished by
    bisecting the signed optimality integral on a sign-changing bracket
    around the search result.  Flat plateaus fall back to the search
    point.
    """
    rng = intercept_range(body, s)
    width = rng.width
    pad = 1e-12 * max(1.0, width)

    def vol(h: float) -> float:
        return section_volume(body, s, h, spec)

    h0, _ = maximize_unimodal(vol, (rng.lo + pad, rng.hi - pad),
                              tol=1e-9 * max(1.0, width))

    def cond(h: float) -> float:
        return _condition_integral(body, s, h)

    h_star = h0
    w = max(1e-7 * width, 1e-12)
    bracket = None
    while w < 0.05 * width:
        lo = max(rng.lo + pad, h0 - w)
        hi = min(rng.hi - pad, h0 + w)
        if cond(lo) * cond(hi) <= 0.0:
            bracket = (lo, hi)
            break
        w *= 8.0
    if bracket is not None:
        h_star = bisect_root(cond, bracket, tol=1e-13 * max(1.0, width))

    volume = vol(h_star)
    chord = chord_endpoints(body, s, h_star)
    value = _condition_integral(body, s, h_star)
    normal = _condition_integral(body, s, h_star, absolute=True)
    residual = abs(value) / normal if normal > 0.0 else abs(value)
    return MaxSectionResult(s, volume, h_star, chord, residual, value)


def _mu_knots(profile) -> list[float]:
    """Levels where the superlevel width may lose smoothness."""
    levels = []
    if profile.variant == "term_sum":
        for bump, reflected in profile.terms:
            lo, hi = bump.support
            pts = (-hi, -lo, -bump.center) if reflected else (lo, hi, bump.center)
            for p in pts:
                levels.append(profile.value(p))
    else:
        levels += [profile._t_lo, profile._t_hi]
    return levels


def m_via_distribution(body: BodyOfRevolution, s: float) -> tuple[float, float]:
    """Maximal section volume in dimension 4 from the width function alone.

    Solves s = 2t / mu(t) for the level t (the left side is strictly
    increasing) and evaluates

        M = pi * sqrt(1+s^2) * ( (2/3) t^2 mu(t) + integral_t 2 tau mu(tau) dtau ),

    where mu is the superlevel width of the profile.  Returns (M, t).
    """
    if body.dim != 4:
        raise NumericsError("the distribution-function route requires dimension 4")
    if not s > 0.0:
        raise ValueError("slope must be positive")
    f = body.profile
    fmax, _ = f.axis_extremes()

    def mu(t: float) -> float:
        return f.superlevel(t)[1]

    def g(t: float) -> float:
        return 2.0 * t / mu(t) - s

    t_hi = fmax * (1.0 - 1e-13)
    t_lo = min(1e-12, 0.25 * s)
    t_star = bisect_root(g, (t_lo, t_hi), tol=1e-15)
    mu_star = mu(t_star)

    knots = [lv for lv in _mu_knots(f) if t_star < lv < fmax]

    def integrand(ts: np.ndarray) -> np.ndarray:
        return np.array([2.0 * t * mu(float(t)) for t in ts])

    tail = integrate(integrand, (t_star, fmax), QuadratureSpec().with_knots(knots)) \
        if fmax - t_star > 1e-15 else 0.0
    m_unit = math.pi * math.sqrt(1.0 + s * s) * (
        (2.0 / 3.0) * t_star * t_star * mu_star + tail)
    return (body.scale ** 3) * m_unit, t_star


def central_section_via_radial(body: BodyOfRevolution, s: float) -> float:
    """Central section volume from the radial function.

    Polar integration over the great sphere of the slicing hyperplane:
    rotational symmetry collapses it to a single angle, with the
    direction's axis component cos(beta)/sqrt(1+s^2).
    """
    d = body.dim
    if d < 4:
        raise NumericsError("radial-route central section requires dimension >= 4")
    _, sphere = unit_ball_constants(d - 2)  # area of the unit (d-3)-sphere
    root = 1.0 / math.sqrt(1.0 + s * s)

    def integrand(betas: np.ndarray) -> np.ndarray:
        out = np.empty_like(betas)
        for i, b in enumerate(betas):
            a = math.cos(b) * root
            rho = radial(body, (a, math.sqrt(max(0.0, 1.0 - a * a))))
            out[i] = (rho ** (d - 1)) * math.sin(b) ** (d - 3)
        return out

    val = integrate(integrand, (0.0, math.pi),
                    QuadratureSpec(rel_tol=1e-11, knots=(0.5 * math.pi,)))
    return sphere * val / (d - 1)


_INV_PHI = 0.5 * (math.sqrt(5.0) - 1.0)


def _batch_golden_max(g, lo: np.ndarray, hi: np.ndarray, iters: int = 40) -> np.ndarray:
    """Golden-section maximum of a vectorized function per bracket lane.

    The bracket endpoints participate in the final maximum, so boundary
    maxima (linear objectives) are returned exactly.
    """
    a = lo.astype(float).copy()
    b = hi.astype(float).copy()
    edge = np.maximum(g(a), g(b))
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = g(c)
    fd = g(d)
    for _ in range(iters):
        upd = fc >= fd
        b = np.where(upd, d, b)
        a = np.where(upd, a, c)
        x_new = np.where(upd, b - _INV_PHI * (b - a), a + _INV_PHI * (b - a))
        f_new = g(x_new)
        c, d = np.where(upd, x_new, d), np.where(upd, c, x_new)
        fc, fd = np.where(upd, f_new, fd), np.where(upd, fc, f_new)
    return np.maximum(np.maximum(fc, fd), edge)


def _superlevel_edges(profile, rs: np.ndarray, xmax: float,
                      iters: int = 44) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized superlevel interval edges for an array of levels.

    Both edges are bisected simultaneously on a doubled lane array: the
    profile rises through the level on the left lanes and falls through
    it on the right lanes.
    """
    m = rs.size
    rr = np.concatenate([rs, rs])
    inner = np.full(2 * m, xmax)   # side where f > r
    outer = np.empty(2 * m)
    outer[:m] = -1.0
    outer[m:] = 1.0
    for _ in range(iters):
        mid = 0.5 * (inner + outer)
        above = profile.values(mid) > rr
        inner = np.where(above, mid, inner)
        outer = np.where(above, outer, mid)
    res = 0.5 * (inner + outer)
    return res[:m], res[m:]


def projection(body: BodyOfRevolution, s: float,
               spec: QuadratureSpec | None = None) -> float:
    """Volume of the shadow on the hyperplane orthogonal to the normal.

    The shadow is itself a body of revolution inside the hyperplane: at
    distance r from its axis the extent along the in-plane direction
    w = (cos a, sin a) (tan a = s) is

        T_plus(r) - T_minus(r),
        T_plus(r) = max over {f >= r} of xi cos a + |sin a| sqrt(f^2 - r^2),
        T_minus(r) = min over {f >= r} of xi cos a - |sin a| sqrt(f^2 - r^2),

    each extremum of a concave/convex objective found by golden-section
    search.  The radial integral is taken in the angle variable
    r = fmax sin(theta), which removes the square-root edge at the apex.
    """
    d = body.dim
    f = body.profile
    lam = body.scale
    ca = 1.0 / math.sqrt(1.0 + s * s)
    sa = abs(s) / math.sqrt(1.0 + s * s)
    fmax, xmax = f.axis_extremes()
    v, _ = unit_ball_constants(d - 2)

    def integrand(thetas: np.ndarray) -> np.ndarray:
        rs = fmax * np.sin(thetas)
        lo, hi = _superlevel_edges(f, rs, xmax)
        # forward and mirrored extents share one batched search:
        # T_minus = -max of (-xi cos a + |sin a| sqrt(f^2 - r^2))
        m = rs.size
        rr = np.concatenate([rs, rs])
        coeff = np.concatenate([np.full(m, ca), np.full(m, -ca)])

        def extent(x: np.ndarray) -> np.ndarray:
            fx = f.values(x)
            return x * coeff + sa * np.sqrt(np.clip(fx * fx - rr * rr, 0.0, None))

        best = _batch_golden_max(extent, np.concatenate([lo, lo]),
                                 np.concatenate([hi, hi]))
        width = best[:m] + best[m:]
        return (rs ** (d - 3)) * width * fmax * np.cos(thetas)

    levels = sorted({lv for lv in _mu_knots(f) if 0.0 < lv < fmax})
    knots = [math.asin(min(1.0, lv / fmax)) for lv in levels]
    base = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13) if spec is None else spec
    val = integrate(integrand, (0.0, 0.5 * math.pi), base.with_knots(knots))
    return (lam ** (d - 1)) * (d - 2) * v * val


def axis_functionals(body: BodyOfRevolution) -> tuple[float, float, float]:
    """(A, M, P) for the axis direction.

    Sections perpendicular to the axis are (d-1)-balls, so the central
    section has radius f(0), and both the maximal section and the shadow
    have radius max f.
    """
    d = body.dim
    v, _ = unit_ball_constants(d - 1)
    lam = body.scale
    fmax, _ = body.profile.axis_extremes()
    a = v * (lam * body.profile.value(0.0)) ** (d - 1)
    m = v * (lam * fmax) ** (d - 1)
    return a, m, m


def slope_grid(s_min: float = 1e-2, s_max: float = 20.0, n: int = 100,
               cluster_width: float = 0.05, cluster_count: int = 11) -> np.ndarray:
    """Reporting grid: geometric spacing plus s = 0 and a cluster of
    points around the chord-regime boundary sqrt(7)/3."""
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    extra = 1 + (cluster_count if cluster_width > 0.0 else 0)
    base_n = max(2, n - extra)
    base = np.geomspace(s_min, s_max, base_n)
    parts = [np.array([0.0]), base]
    if cluster_width > 0.0:
        parts.append(REGIME_SLOPE + np.linspace(-cluster_width, cluster_width,
                                                cluster_count))
    return np.unique(np.concatenate(parts))


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, REVOLV_THREADS, then cpu count."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("REVOLV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def functionals_at(body: BodyOfRevolution, s: float) -> dict:
    """All three functionals and the maximal-chord data at one slope."""
    res = maximal_section(body, s)
    return {
        "s": s,
        "A": central_section(body, s),
        "M": res.volume,
        "P": projection(body, s),
        "h_star": res.h_star,
        "x": -res.chord.left,
        "y": res.chord.right,
        "residual": res.residual,
    }


def _sweep_task(args) -> dict:
    body, s = args
    return functionals_at(body, s)


def sweep_functionals(body: BodyOfRevolution, slopes,
                      workers: int | None = None) -> list[dict]:
    """Evaluate A, M, P over a slope grid, optionally in parallel.

    Results are assembled in grid order regardless of worker scheduling,
    so output is deterministic for a fixed grid.
    """
    slopes = [float(s) for s in slopes]
    nworkers = resolve_workers(workers)
    if nworkers <= 1 or len(slopes) < 4:
        return [functionals_at(body, s) for s in slopes]
    with ProcessPoolExecutor(max_workers=nworkers) as pool:
        return list(pool.map(_sweep_task, [(body, s) for s in slopes],
                             chunksize=max(1, len(slopes) // (4 * nworkers))))

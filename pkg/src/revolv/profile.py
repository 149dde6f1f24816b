"""Concave profile functions on [-1, 1].

A profile is the generator of a body of revolution: a nonnegative concave
function f on [-1, 1].  Two representations are supported:

* ``term_sum`` -- the unit semicircle plus a list of compactly supported
  smooth bumps (optionally mirrored), used for the perturbed profile
  pairs;
* ``level_branch`` -- the profile is defined through its superlevel sets:
  at height t the set {f > t} is the interval (B_left(t), B_right(t))
  with B_right(t) = sqrt(1 - t^2) + shift(t) and
  B_left(t) = -sqrt(1 - t^2) + shift(t).  Shifting levels sideways keeps
  every superlevel width equal to the semicircle's, so the profile stays
  equimeasurable with it while losing its symmetry.

Profiles are immutable after construction; evaluation is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .solvers import bisect_root, maximize_unimodal, NumericsError

__all__ = [
    "ProfileError",
    "SupportError",
    "ConcavityError",
    "BranchConditionError",
    "BumpTerm",
    "Profile",
    "semicircle",
    "perturbed_pair",
    "klee_profile",
    "CONCAVITY_TOL",
]

CONCAVITY_TOL = 1e-9
_GRID_SIZE = 4096


class ProfileError(ValueError):
    """Invalid profile data."""


class SupportError(ProfileError):
    """A bump support violates its required containment."""


class ConcavityError(ProfileError):
    """A constructed profile is not concave within tolerance."""


class BranchConditionError(ProfileError):
    """A level shift is too curved for the branches to stay monotone/convex."""


def _bump_value(u: float) -> float:
    if u <= -1.0 or u >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - u * u))


def _bump_deriv(u: float) -> float:
    if u <= -1.0 or u >= 1.0:
        return 0.0
    w = 1.0 - u * u
    return math.exp(1.0 - 1.0 / w) * (-2.0 * u / (w * w))


def _bump_second_deriv(u: float) -> float:
    if u <= -1.0 or u >= 1.0:
        return 0.0
    w = 1.0 - u * u
    g = 2.0 * u / (w * w)
    dg = 2.0 / (w * w) + 8.0 * u * u / (w * w * w)
    return math.exp(1.0 - 1.0 / w) * (g * g - dg)


def _bump_values(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    m = np.abs(u) < 1.0
    if np.any(m):
        w = 1.0 - u[m] * u[m]
        out[m] = np.exp(1.0 - 1.0 / w)
    return out


@dataclass(frozen=True)
class BumpTerm:
    """A scaled copy of the standard mollifier exp(1 - 1/(1-u^2)).

    ``amplitude`` is the signed peak value; the support is
    [center - half_width, center + half_width].
    """

    center: float
    half_width: float
    amplitude: float

    def __post_init__(self):
        if not self.half_width > 0.0:
            raise ProfileError(f"half_width must be positive, got {self.half_width}")
        for v in (self.center, self.amplitude):
            if not math.isfinite(v):
                raise ProfileError("bump parameters must be finite")

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    def value(self, x: float) -> float:
        return self.amplitude * _bump_value((x - self.center) / self.half_width)

    def deriv(self, x: float) -> float:
        return self.amplitude * _bump_deriv((x - self.center) / self.half_width) / self.half_width

    def second_deriv(self, x: float) -> float:
        u = (x - self.center) / self.half_width
        return self.amplitude * _bump_second_deriv(u) / (self.half_width * self.half_width)

    def values(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude * _bump_values((x - self.center) / self.half_width)

    def scaled(self, factor: float) -> "BumpTerm":
        return BumpTerm(self.center, self.half_width, self.amplitude * factor)


def _check_support(bump: BumpTerm, lo: float, hi: float, what: str) -> None:
    a, b = bump.support
    if a < lo - 1e-15 or b > hi + 1e-15:
        raise SupportError(
            f"{what} support [{a:.6g}, {b:.6g}] not contained in [{lo:.6g}, {hi:.6g}]")


class Profile:
    """A concave nonnegative profile on [-1, 1].

    Construct through :meth:`semicircle`, :meth:`term_sum` or
    :meth:`level_branch`; direct instantiation is discouraged.
    """

    def __init__(self, variant: str,
                 terms: Sequence[tuple[BumpTerm, bool]] = (),
                 shift: BumpTerm | None = None,
                 validate: bool = True):
        if variant not in ("term_sum", "level_branch"):
            raise ProfileError(f"unknown profile variant {variant!r}")
        self.variant = variant
        self.terms = tuple((b, bool(r)) for b, r in terms)
        self.shift = shift
        self._cache: dict = {}
        if variant == "term_sum" and self.terms:
            # stacked bump parameters for one-shot vectorized evaluation
            self._sgn = np.array([-1.0 if r else 1.0 for _, r in self.terms])[:, None]
            self._ctr = np.array([b.center for b, _ in self.terms])[:, None]
            self._inv = np.array([1.0 / b.half_width for b, _ in self.terms])[:, None]
            self._amp = np.array([b.amplitude for b, _ in self.terms])

        if variant == "term_sum":
            for bump, reflected in self.terms:
                lo, hi = bump.support
                ref = (-hi, -lo) if reflected else (lo, hi)
                if ref[0] <= -1.0 or ref[1] >= 1.0:
                    raise SupportError(
                        f"bump support ({ref[0]:.6g}, {ref[1]:.6g}) must lie inside (-1, 1)")
        else:
            if shift is None:
                raise ProfileError("level_branch profile requires a shift bump")
            lo, hi = shift.support
            if lo <= 0.0 or hi >= 1.0:
                raise SupportError(
                    f"shift support ({lo:.6g}, {hi:.6g}) must lie inside (0, 1)")
            # region of xi where the branch equation is non-trivial
            self._t_lo, self._t_hi = lo, hi
            self._xr_lo = math.sqrt(1.0 - hi * hi)
            self._xr_hi = math.sqrt(1.0 - lo * lo)

        if validate:
            self._validate()

    # -- construction -------------------------------------------------

    @classmethod
    def semicircle(cls) -> "Profile":
        return cls("term_sum", (), validate=False)

    @classmethod
    def term_sum(cls, terms: Iterable[tuple[BumpTerm, bool]],
                 validate: bool = True) -> "Profile":
        return cls("term_sum", tuple(terms), validate=validate)

    @classmethod
    def level_branch(cls, shift: BumpTerm, validate: bool = True) -> "Profile":
        return cls("level_branch", (), shift, validate=validate)

    # -- evaluation ---------------------------------------------------

    def value(self, x: float) -> float:
        """Profile value; 0 outside [-1, 1].  No domain error (internal use)."""
        if x <= -1.0 or x >= 1.0:
            if x == -1.0 or x == 1.0:
                return self._endpoint_value(x)
            return 0.0
        if self.variant == "term_sum":
            out = math.sqrt(1.0 - x * x)
            for bump, reflected in self.terms:
                out += bump.value(-x if reflected else x)
            return out
        return self._branch_height(x)

    def eval(self, x: float) -> float:
        """Profile value at x in [-1, 1]; raises outside the domain."""
        if not -1.0 <= x <= 1.0:
            raise ValueError(f"profile argument {x!r} outside [-1, 1]")
        return self.value(x)

    def values(self, x: np.ndarray) -> np.ndarray:
        """Vectorized profile values (arguments assumed within [-1, 1])."""
        x = np.asarray(x, dtype=float)
        if self.variant == "term_sum":
            out = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
            if self.terms:
                u = (self._sgn * x[None, :] - self._ctr) * self._inv
                w = np.maximum(1.0 - u * u, 1e-12)  # exp underflows to 0 off-support
                out += self._amp @ np.exp(1.0 - 1.0 / w)
            return out
        out = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
        band = self._band_mask(x)
        if np.any(band):
            flat = x[band]
            vals = np.array([self._branch_height(float(v)) for v in flat])
            out[band] = vals
        return out

    def derivative(self, x: float) -> float:
        """One-sided-safe derivative; +-inf near the rim of the semicircle."""
        if self.variant == "term_sum":
            w = 1.0 - x * x
            if w <= 0.0:
                return math.copysign(math.inf, -x)
            out = -x / math.sqrt(w)
            for bump, reflected in self.terms:
                if reflected:
                    out -= bump.deriv(-x)
                else:
                    out += bump.deriv(x)
            return out
        return self._branch_slope(x)

    def _endpoint_value(self, x: float) -> float:
        if self.variant == "term_sum":
            out = 0.0
            for bump, reflected in self.terms:
                out += bump.value(-x if reflected else x)
            return out
        return 0.0  # branches meet the axis at +-1 by construction

    # -- level-branch internals ---------------------------------------

    def _branch_right(self, t: float) -> float:
        return math.sqrt(max(0.0, 1.0 - t * t)) + self.shift.value(t)

    def _branch_left(self, t: float) -> float:
        return -math.sqrt(max(0.0, 1.0 - t * t)) + self.shift.value(t)

    def _band_mask(self, x: np.ndarray) -> np.ndarray:
        right = (x > self._xr_lo) & (x < self._xr_hi)
        left = (x > -self._xr_hi) & (x < -self._xr_lo)
        return right | left

    def _branch_height(self, x: float) -> float:
        """Invert the branch map: the level t whose boundary passes through x."""
        if x >= 0.0:
            if x >= self._xr_hi or x <= self._xr_lo:
                return math.sqrt(max(0.0, 1.0 - x * x))
            lo, hi = self._t_lo, self._t_hi

            def g(t: float) -> float:
                return self._branch_right(t) - x

            def dg(t: float) -> float:
                return -t / math.sqrt(1.0 - t * t) + self.shift.deriv(t)
        else:
            if x <= -self._xr_hi or x >= -self._xr_lo:
                return math.sqrt(max(0.0, 1.0 - x * x))
            lo, hi = self._t_lo, self._t_hi

            def g(t: float) -> float:
                return self._branch_left(t) - x

            def dg(t: float) -> float:
                return t / math.sqrt(1.0 - t * t) + self.shift.deriv(t)
        return _newton_bisect(g, dg, lo, hi)

    def _branch_slope(self, x: float) -> float:
        t = self._branch_height(x)
        w = 1.0 - t * t
        if w <= 0.0:
            return 0.0
        base = t / math.sqrt(w)
        if x >= 0.0:
            d = -base + self.shift.deriv(t)
        else:
            d = base + self.shift.deriv(t)
        if d == 0.0:
            return math.copysign(math.inf, -x)
        return 1.0 / d

    # -- spec operations ----------------------------------------------

    def superlevel(self, t: float) -> tuple[tuple[float, float], float]:
        """The interval {f > t} and its length.

        Concavity makes every superlevel set an interval; the length is 0
        for t at or above the maximum.
        """
        if t < 0.0:
            raise ValueError("level must be nonnegative")
        fmax, xmax = self.axis_extremes()
        if t >= fmax:
            return (xmax, xmax), 0.0
        if self.variant == "level_branch":
            lo = self._branch_left(t)
            hi = self._branch_right(t)
            return (lo, hi), 2.0 * math.sqrt(max(0.0, 1.0 - t * t))

        def g(x: float) -> float:
            return self.value(x) - t

        if g(-1.0) >= 0.0:
            lo = -1.0
        else:
            lo = _newton_bisect(g, self.derivative, -1.0, xmax)
        if g(1.0) >= 0.0:
            hi = 1.0
        else:
            hi = _newton_bisect(g, self.derivative, xmax, 1.0)
        return (lo, hi), hi - lo

    def concavity_margin(self) -> float:
        """Largest second difference of f on a 4096-point uniform grid.

        Nonpositive (up to tolerance) means concave.
        """
        if "margin" not in self._cache:
            xs = np.linspace(-1.0, 1.0, _GRID_SIZE)
            fs = self.values(xs)
            d2 = fs[:-2] - 2.0 * fs[1:-1] + fs[2:]
            self._cache["margin"] = float(np.max(d2))
        return self._cache["margin"]

    def axis_extremes(self) -> tuple[float, float]:
        """(max f, argmax) by golden-section search on the concave profile."""
        if "extremes" not in self._cache:
            x, fx = maximize_unimodal(self.value, (-1.0, 1.0), tol=1e-13)
            self._cache["extremes"] = (fx, x)
        return self._cache["extremes"]

    def reflect(self) -> "Profile":
        """The profile xi -> f(-xi)."""
        if self.variant == "term_sum":
            terms = tuple((b, not r) for b, r in self.terms)
            return Profile("term_sum", terms, validate=False)
        return Profile("level_branch", (), self.shift.scaled(-1.0), validate=False)

    # -- validation ----------------------------------------------------

    def _validate(self) -> None:
        xs = np.linspace(-1.0, 1.0, _GRID_SIZE)
        fs = self.values(xs)
        if float(np.min(fs)) < -1e-12:
            raise ProfileError("profile must be nonnegative on (-1, 1)")
        if self.concavity_margin() > CONCAVITY_TOL:
            raise ConcavityError(
                f"profile not concave: second-difference margin "
                f"{self.concavity_margin():.3e} > {CONCAVITY_TOL:.0e}")
        if self.variant == "level_branch":
            _check_branch_condition(self.shift)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        if self.variant == "term_sum":
            return {
                "variant": "term_sum",
                "base": "semicircle",
                "terms": [
                    {
                        "center": b.center,
                        "half_width": b.half_width,
                        "amplitude": abs(b.amplitude),
                        "sign": 1 if b.amplitude >= 0.0 else -1,
                        "reflected": r,
                    }
                    for b, r in self.terms
                ],
            }
        return {
            "variant": "level_branch",
            "shift": {
                "center": self.shift.center,
                "half_width": self.shift.half_width,
                "amplitude": self.shift.amplitude,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Profile":
        variant = data.get("variant")
        if variant == "term_sum":
            terms = []
            for td in data.get("terms", []):
                bump = BumpTerm(float(td["center"]), float(td["half_width"]),
                                float(td["amplitude"]) * float(td.get("sign", 1)))
                terms.append((bump, bool(td.get("reflected", False))))
            return cls("term_sum", terms)
        if variant == "level_branch":
            sd = data["shift"]
            shift = BumpTerm(float(sd["center"]), float(sd["half_width"]),
                             float(sd["amplitude"]))
            return cls.level_branch(shift)
        raise ProfileError(f"unknown profile variant {variant!r}")


def _newton_bisect(g, dg, lo: float, hi: float, tol: float = 1e-15,
                   max_iter: int = 80) -> float:
    """Root of a monotone function on [lo, hi]: bisection with Newton steps.

    Falls back to plain bisection whenever a Newton step leaves the
    current bracket.  The endpoints need not be evaluated exactly to
    opposite signs; the bracket is maintained from the sign at lo.
    """
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0.0) == (ghi > 0.0):
        raise NumericsError(f"no sign change on [{lo}, {hi}]")
    pos_lo = glo > 0.0
    x = 0.5 * (lo + hi)
    gx = g(x)
    for _ in range(max_iter):
        if gx == 0.0 or hi - lo <= tol:
            return x
        if (gx > 0.0) == pos_lo:
            lo = x
        else:
            hi = x
        d = dg(x)
        if d != 0.0 and math.isfinite(d):
            step = x - gx / d
        else:
            step = math.nan
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        x = step
        gx = g(x)
    return x


def semicircle() -> Profile:
    """The unit semicircle profile sqrt(1 - xi^2)."""
    return Profile.semicircle()


def concavity_margin(profile: Profile) -> float:
    return profile.concavity_margin()


def axis_extremes(profile: Profile) -> tuple[float, float]:
    return profile.axis_extremes()


def reflect(profile: Profile) -> Profile:
    return profile.reflect()


def superlevel(profile: Profile, t: float) -> tuple[tuple[float, float], float]:
    return profile.superlevel(t)


def perturbed_pair(phis: Sequence[BumpTerm], psi: BumpTerm | None, eps: float,
                   delta: float = 0.1, validate: bool = True) -> tuple[Profile, Profile]:
    """The antisymmetric perturbation pair around the semicircle.

    With inner bumps phi_i supported in [1/2 - delta, 1/2 + delta] and an
    outer bump psi supported in [1 - delta, 1], builds

        f_plus  = f_o + eps*phi(xi) - eps*phi(-xi) + eps*psi(xi)
        f_minus = f_o - eps*phi(xi) + eps*phi(-xi) + eps*psi(xi)

    Away from the inner supports and their mirror images the two profiles
    agree; on them each equals the other's mirror image.

    With ``validate`` the resulting profiles must pass the concavity
    check; callers shrink eps until they do.
    """
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if not 0.0 < delta < 0.125:
        raise ValueError(f"delta must lie in (0, 1/8), got {delta}")
    d_lo, d_hi = 0.5 - delta, 0.5 + delta
    for phi in phis:
        _check_support(phi, d_lo, d_hi, "inner bump")
    if psi is not None:
        _check_support(psi, 1.0 - delta, 1.0, "outer bump")

    plus_terms = []
    minus_terms = []
    for phi in phis:
        fwd = phi.scaled(eps)
        bwd = phi.scaled(-eps)
        plus_terms += [(fwd, False), (bwd, True)]
        minus_terms += [(bwd, False), (fwd, True)]
    if psi is not None:
        shared = psi.scaled(eps)
        plus_terms.append((shared, False))
        minus_terms.append((shared, False))
    f_plus = Profile.term_sum(plus_terms, validate=validate)
    f_minus = Profile.term_sum(minus_terms, validate=validate)
    return f_plus, f_minus


def _check_branch_condition(shift: BumpTerm) -> None:
    """Concavity/convexity of the shifted level branches.

    The right branch sqrt(1-t^2) + shift stays concave and the left one
    convex exactly when |shift''(t)| < (1-t^2)^(-3/2) on the support;
    checked on a dense grid with a strict margin.
    """
    lo, hi = shift.support
    ts = np.linspace(lo, hi, 2048)
    worst = 0.0
    for t in ts:
        bound = (1.0 - t * t) ** 1.5
        worst = max(worst, abs(shift.second_deriv(float(t))) * bound)
    if worst >= 1.0:
        raise BranchConditionError(
            f"level shift too curved: max |shift''| * (1-t^2)^(3/2) = {worst:.4f} >= 1")


def klee_profile(shift: BumpTerm, validate: bool = True) -> Profile:
    """Profile equimeasurable with the semicircle but not symmetric.

    Every superlevel set keeps the semicircle's width 2*sqrt(1-t^2) and
    is translated by shift(t).  The shift must satisfy the branch
    curvature condition; violations raise BranchConditionError.
    """
    lo, hi = shift.support
    if lo <= 0.0 or hi >= 1.0:
        raise SupportError(f"shift support ({lo:.6g}, {hi:.6g}) must lie inside (0, 1)")
    _check_branch_condition(shift)
    return Profile.level_branch(shift, validate=validate)

"""Section and projection functions of convex bodies of revolution.

The package computes the central-section, maximal-section and projection
functions of bodies obtained by rotating a concave profile about the
first coordinate axis, and constructs bodies for which these functionals
fail to determine the body: a non-ball with constant maximal-section
function in dimension 4, and pairs of essentially different bodies in
even dimensions whose three functionals coincide everywhere.
"""
from .solvers import (
    Bracket,
    QuadratureSpec,
    integrate,
    bisect_root,
    maximize_unimodal,
    newton_on_sphere,
    unit_ball_constants,
)
from .profile import BumpTerm, Profile, perturbed_pair, klee_profile
from .body_geometry import BodyOfRevolution, Chord

__version__ = "0.1.0"

__all__ = [
    "Bracket",
    "QuadratureSpec",
    "integrate",
    "bisect_root",
    "maximize_unimodal",
    "newton_on_sphere",
    "unit_ball_constants",
    "BumpTerm",
    "Profile",
    "perturbed_pair",
    "klee_profile",
    "BodyOfRevolution",
    "Chord",
]

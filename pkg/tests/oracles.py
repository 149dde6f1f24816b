"""Independent Monte Carlo oracles used by the test suite.

These deliberately avoid the library's quadrature/optimization paths:
section volumes come from rejection sampling over a bounding box, and
projection volumes from probing lines through sample points of the
shadow hyperplane.
"""
import math

import numpy as np

from revolv.body_geometry import chord_endpoints, support


def mc_section_volume(body, s, h, n=1_000_000, seed=0):
    """Rejection-sampling estimate of the hyperplane section volume.

    Samples (xi, z) uniformly over [left, right] x [-R, R]^(d-2) with
    R = scale * max f, accepts when the point (xi, s*xi+h, z) lies in the
    body, and rescales by the box measure and the line's length factor
    sqrt(1 + s^2).
    """
    rng = np.random.default_rng(seed)
    d = body.dim
    lam = body.scale
    fmax, _ = body.profile.axis_extremes()
    R = lam * fmax
    chord = chord_endpoints(body, s, h)
    left, right = chord.left, chord.right
    if right - left <= 0.0:
        return 0.0
    k = d - 2
    accepted = 0
    chunk = 250_000
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        xi = rng.uniform(left, right, size=m)
        z = rng.uniform(-R, R, size=(m, k))
        eta = s * xi + h
        fx = lam * body.profile.values(xi / lam)
        accepted += int(np.count_nonzero(
            eta * eta + np.einsum("ij,ij->i", z, z) <= fx * fx))
        remaining -= m
    box = (right - left) * (2.0 * R) ** k
    return math.sqrt(1.0 + s * s) * box * accepted / n


def _lower_envelope(slopes, intercepts):
    """Lower envelope of lines y = m*x + c.

    The pointwise minimum of lines is concave, so the active slope
    decreases left to right.  Returns (slopes, intercepts, breakpoints)
    of the envelope pieces for vectorized queries.
    """
    order = np.lexsort((np.asarray(intercepts), -np.asarray(slopes)))
    ms_in = np.asarray(slopes)[order]
    cs_in = np.asarray(intercepts)[order]
    ms, cs = [], []
    for m, c in zip(ms_in, cs_in):
        if ms and m == ms[-1]:
            continue  # parallel line with intercept >= the kept one
        while len(ms) >= 2:
            x_new_last = (cs[-1] - c) / (m - ms[-1])
            x_last_prev = (cs[-2] - cs[-1]) / (ms[-1] - ms[-2])
            if x_new_last <= x_last_prev:
                ms.pop()
                cs.pop()
            else:
                break
        ms.append(m)
        cs.append(c)
    bps = np.array([(cs[i + 1] - cs[i]) / (ms[i] - ms[i + 1])
                    for i in range(len(ms) - 1)])
    return np.array(ms), np.array(cs), bps


def _line_probe_max(body, taus, s):
    """For each tau, the max of scale^2 f^2 - eta^2 along the probe line.

    The probe line through tau*w in direction u traces
    eta(xi) = (tau - xi * cos(a)) / sin(a) in the profile plane; the max
    over a shared xi-grid reduces to the lower envelope of lines in tau.
    """
    lam = body.scale
    ca = 1.0 / math.sqrt(1.0 + s * s)
    sa = abs(s) / math.sqrt(1.0 + s * s)
    xi = np.linspace(-lam, lam, 8192)
    F = (lam * body.profile.values(xi / lam)) ** 2
    # (tau - xi*ca)^2 / sa^2 - F = tau^2/sa^2 + m*tau + c
    m = -2.0 * xi * ca / (sa * sa)
    c = (xi * ca) ** 2 / (sa * sa) - F
    ms, cs, bps = _lower_envelope(m, c)
    idx = np.searchsorted(bps, taus)
    env = ms[idx] * taus + cs[idx]
    return -(taus * taus / (sa * sa) + env)


def mc_projection(body, s, n=1_000_000, seed=0):
    """Line-probe Monte Carlo estimate of the shadow volume.

    Samples points of the hyperplane orthogonal to the slicing normal and
    tests whether the line through each point in the normal direction
    meets the body.
    """
    rng = np.random.default_rng(seed)
    d = body.dim
    lam = body.scale
    fmax, _ = body.profile.axis_extremes()
    R = lam * fmax
    k = d - 2
    if s == 0.0:
        # shadow along the x2-axis: {(xi, z): |z| <= scale * f(xi/scale)}
        accepted = 0
        chunk = 250_000
        remaining = n
        while remaining > 0:
            m = min(chunk, remaining)
            xi = rng.uniform(-lam, lam, size=m)
            z = rng.uniform(-R, R, size=(m, k))
            fx = lam * body.profile.values(xi / lam)
            accepted += int(np.count_nonzero(
                np.einsum("ij,ij->i", z, z) <= fx * fx))
            remaining -= m
        return 2.0 * lam * (2.0 * R) ** k * accepted / n

    ca = 1.0 / math.sqrt(1.0 + s * s)
    sa = abs(s) / math.sqrt(1.0 + s * s)
    tau_hi = support(body, (ca, sa))
    tau_lo = -support(body, (-ca, -sa))
    accepted = 0
    chunk = 250_000
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        tau = rng.uniform(tau_lo, tau_hi, size=m)
        z = rng.uniform(-R, R, size=(m, k))
        T = _line_probe_max(body, tau, s)
        accepted += int(np.count_nonzero(
            np.einsum("ij,ij->i", z, z) <= T))
        remaining -= m
    return (tau_hi - tau_lo) * (2.0 * R) ** k * accepted / n

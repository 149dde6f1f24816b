import math

import numpy as np
import pytest

from revolv.body_geometry import BodyOfRevolution, intercept_range, section_volume, unit_ball_body
from revolv.functionals import (
    REGIME_SLOPE,
    axis_functionals,
    central_section,
    central_section_via_radial,
    m_via_distribution,
    max_condition_residual,
    maximal_section,
    projection,
    slope_grid,
    sweep_functionals,
)
from revolv.profile import BumpTerm, klee_profile, perturbed_pair
from revolv.solvers import NumericsError, unit_ball_constants

from oracles import mc_projection, mc_section_volume

V3 = 4.0 * math.pi / 3.0
V5 = 8.0 * math.pi ** 2 / 15.0


@pytest.fixture(scope="module")
def klee_body():
    return BodyOfRevolution(4, klee_profile(BumpTerm(0.5, 0.2, 0.001)))


@pytest.fixture(scope="module")
def pair_bodies():
    fp, fm = perturbed_pair(
        [BumpTerm(0.45, 0.045, 1.0), BumpTerm(0.55, 0.045, -0.8)],
        BumpTerm(0.95, 0.04, 0.7), 1e-4)
    return BodyOfRevolution(6, fp), BodyOfRevolution(6, fm)


@pytest.fixture(scope="module")
def pair_bodies_d4():
    fp, fm = perturbed_pair([BumpTerm(0.5, 0.09, 1.0)], BumpTerm(0.95, 0.04, 1.0), 1e-4)
    return BodyOfRevolution(4, fp), BodyOfRevolution(4, fm)


class TestCentralSection:
    def test_ball_d4_any_slope(self):
        body = unit_ball_body(4)
        for s in (0.0, 0.3, 1.0, 5.0):
            assert central_section(body, s) == pytest.approx(V3, rel=1e-11)

    def test_ball_d6(self):
        body = unit_ball_body(6)
        for s in (0.0, 1.0, 8.0):
            assert central_section(body, s) == pytest.approx(V5, rel=1e-11)

    def test_klee_against_monte_carlo(self, klee_body):
        v = central_section(klee_body, 1.0)
        est = mc_section_volume(klee_body, 1.0, 0.0, n=1_000_000, seed=21)
        assert abs(est - v) / v < 0.01


class TestCentralViaRadial:
    def test_ball_d4(self):
        assert central_section_via_radial(unit_ball_body(4), 1.0) == pytest.approx(V3, rel=1e-10)

    def test_ball_d6(self):
        assert central_section_via_radial(unit_ball_body(6), 0.4) == pytest.approx(V5, rel=1e-10)

    def test_agreement_on_pair_body(self, pair_bodies):
        body = pair_bodies[0]
        for s in (0.0, 0.5, 2.0):
            direct = central_section(body, s)
            via_radial = central_section_via_radial(body, s)
            assert abs(direct - via_radial) / direct <= 1e-8

    def test_dimension_guard(self):
        with pytest.raises(NumericsError):
            central_section_via_radial(unit_ball_body(3), 1.0)


class TestMaximalSection:
    def test_ball_central_is_maximal(self):
        body = unit_ball_body(4)
        for s in (0.2, 1.0, 4.0):
            res = maximal_section(body, s)
            assert res.volume == pytest.approx(V3, rel=1e-10)
            assert abs(res.h_star) < 1e-10

    def test_ball_chord_and_residual_at_unit_slope(self):
        res = maximal_section(unit_ball_body(4), 1.0)
        r = 1.0 / math.sqrt(2.0)
        assert res.chord.left == pytest.approx(-r, abs=1e-10)
        assert res.chord.right == pytest.approx(r, abs=1e-10)
        assert res.residual <= 1e-10

    def test_klee_constant(self, klee_body):
        res = maximal_section(klee_body, 2.0)
        assert res.volume == pytest.approx(V3, rel=1e-6)

    def test_dominates_random_intercepts(self, pair_bodies):
        body = pair_bodies[0]
        rng = np.random.default_rng(17)
        for s in (0.4, 1.2):
            res = maximal_section(body, s)
            h_rng = intercept_range(body, s)
            for _ in range(20):
                h = rng.uniform(h_rng.lo * 0.98, h_rng.hi * 0.98)
                assert res.volume >= section_volume(body, s, float(h)) - 1e-12


class TestDistributionRoute:
    def test_ball_unit_slope(self):
        m, t = m_via_distribution(unit_ball_body(4), 1.0)
        assert t == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
        assert m == pytest.approx(V3, rel=1e-10)

    def test_ball_nice_slope(self):
        m, t = m_via_distribution(unit_ball_body(4), math.sqrt(7.0) / 3.0)
        assert t == pytest.approx(math.sqrt(7.0) / 4.0, abs=1e-12)
        assert m == pytest.approx(V3, rel=1e-10)

    def test_klee_agrees_with_search(self, klee_body):
        for s in (0.1, 1.0, 10.0):
            m, _ = m_via_distribution(klee_body, s)
            brute = maximal_section(klee_body, s).volume
            assert abs(m - brute) / brute <= 1e-7

    def test_level_chord_geometry(self, klee_body):
        # the maximal chord meets the graphs at heights -t and +t
        for s in (0.5, 2.0):
            res = maximal_section(klee_body, s)
            _, t = m_via_distribution(klee_body, s)
            assert s * res.chord.right + res.h_star == pytest.approx(t, abs=1e-8)
            assert s * res.chord.left + res.h_star == pytest.approx(-t, abs=1e-8)

    def test_guards(self, klee_body):
        with pytest.raises(NumericsError):
            m_via_distribution(unit_ball_body(6), 1.0)
        with pytest.raises(ValueError):
            m_via_distribution(unit_ball_body(4), 0.0)


class TestConditionResidual:
    def test_ball_symmetric_chord(self):
        assert max_condition_residual(unit_ball_body(4), 1.0, 0.0) == pytest.approx(0.0, abs=1e-13)

    def test_klee_level_chord(self, klee_body):
        # chord through levels -t, +t at the slope matching level 0.5
        t = 0.5
        _, mu = klee_body.profile.superlevel(t)
        s = 2.0 * t / mu
        res = maximal_section(klee_body, s)
        assert abs(res.condition_value) <= 1e-10

    def test_sign_tracks_displacement(self):
        # moving the chord past the optimum flips the derivative condition:
        # volume decreases, so the signed integral turns positive
        body = unit_ball_body(4)
        up = max_condition_residual(body, 1.0, 0.5)
        down = max_condition_residual(body, 1.0, -0.5)
        assert up > 0.0 and down < 0.0
        v_mid = section_volume(body, 1.0, 0.0)
        assert section_volume(body, 1.0, 0.5) < v_mid  # consistent with unimodality


class TestProjection:
    def test_ball_d4(self):
        for s in (0.0, 0.7, 3.0):
            assert projection(unit_ball_body(4), s) == pytest.approx(V3, rel=1e-9)

    def test_ball_d6(self):
        for s in (0.0, 1.3):
            assert projection(unit_ball_body(6), s) == pytest.approx(V5, rel=1e-9)

    def test_pair_body_against_shadow_oracle(self, pair_bodies):
        body = pair_bodies[0]
        p = projection(body, 0.3)
        est = mc_projection(body, 0.3, n=1_000_000, seed=33)
        assert abs(est - p) / p < 0.01


class TestAxisFunctionals:
    def test_ball(self):
        a, m, p = axis_functionals(unit_ball_body(4))
        assert a == pytest.approx(V3, rel=1e-12)
        assert m == p == a

    def test_klee_uses_profile_max(self, klee_body):
        xs = np.linspace(-1.0, 1.0, 200_001)
        fmax_oracle = float(np.max(klee_body.profile.values(xs)))
        a, m, p = axis_functionals(klee_body)
        assert m == pytest.approx(V3 * fmax_oracle ** 3, rel=1e-8)
        assert p == m

    def test_scaling(self):
        a, m, p = axis_functionals(unit_ball_body(4, 2.0))
        assert a == pytest.approx(8.0 * V3, rel=1e-12)
        assert m == p == a


class TestInvariants:
    def test_ordering_a_m_p(self, pair_bodies, klee_body):
        bodies = [unit_ball_body(4), klee_body, pair_bodies[0], pair_bodies[1]]
        for body in bodies:
            for s in (0.0, 0.5, REGIME_SLOPE, 3.0):
                a = central_section(body, s)
                m = maximal_section(body, s).volume
                p = projection(body, s)
                assert m >= a * (1.0 - 1e-9)
                assert p >= m * (1.0 - 1e-9)

    def test_scaling_all_functionals(self):
        s = 0.8
        for d in (4, 6):
            unit = unit_ball_body(d, 1.0)
            double = unit_ball_body(d, 2.0)
            k = 2.0 ** (d - 1)
            assert central_section(double, s) == pytest.approx(
                k * central_section(unit, s), rel=1e-9)
            assert maximal_section(double, s).volume == pytest.approx(
                k * maximal_section(unit, s).volume, rel=1e-9)
            assert projection(double, s) == pytest.approx(
                k * projection(unit, s), rel=1e-9)

    def test_reflection_covariance(self, klee_body):
        mirrored = BodyOfRevolution(4, klee_body.profile.reflect())
        for s in (0.3, 1.1):
            orig = maximal_section(klee_body, s)
            # at slope -s the mirrored body reproduces the original section
            refl = maximal_section(mirrored, -s)
            assert refl.volume == pytest.approx(orig.volume, rel=1e-9)
            # at the same slope the optimal intercept flips sign
            same = maximal_section(mirrored, s)
            assert same.volume == pytest.approx(orig.volume, rel=1e-9)
            assert same.h_star == pytest.approx(-orig.h_star, abs=1e-7)

    def test_residual_normalized_small_at_optimum(self, pair_bodies):
        for s in (0.2, 1.0, 5.0):
            res = maximal_section(pair_bodies[0], s)
            assert res.residual <= 1e-8

    def test_distribution_equals_search_d4_pair(self, pair_bodies_d4):
        for body in pair_bodies_d4:
            for s in (0.3, 1.0, 4.0):
                m, _ = m_via_distribution(body, s)
                brute = maximal_section(body, s).volume
                assert abs(m - brute) / brute <= 1e-7


class TestSlopeGrid:
    def test_default_composition(self):
        grid = slope_grid()
        assert len(grid) == 100
        assert grid[0] == 0.0
        cluster = grid[np.abs(grid - REGIME_SLOPE) <= 0.05 + 1e-12]
        assert len(cluster) >= 11

    def test_monotone_unique(self):
        grid = slope_grid(n=40)
        assert np.all(np.diff(grid) > 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            slope_grid(n=1)


class TestSweep:
    def test_rows_and_order(self):
        body = unit_ball_body(4)
        grid = [0.0, 0.5, 1.0]
        rows = sweep_functionals(body, grid, workers=1)
        assert [r["s"] for r in rows] == grid
        for r in rows:
            assert set(r) >= {"s", "A", "M", "P", "h_star", "x", "y"}
            assert r["A"] == pytest.approx(V3, rel=1e-9)

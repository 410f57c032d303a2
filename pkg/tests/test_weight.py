import math

import numpy as np
import pytest

from hardycut import geometry as geo
from hardycut import weight as wt


def brute_force_weight(g, x, n_total=100_000):
    """Oracle: composite midpoint quadrature of the kernel over the
    complement polyline."""
    comp = np.flatnonzero(~g.sigma_mask)
    total = g._edge_len[comp].sum()
    acc = 0.0
    for e in comp:
        k = max(4, int(n_total * g._edge_len[e] / total))
        t = (np.arange(k) + 0.5) / k
        pts = g.vertices[e] + t[:, None] * g._edge_vec[e]
        d2 = ((pts - np.asarray(x)) ** 2).sum(axis=1)
        acc += (g._edge_len[e] / k) * float(np.sum(1.0 / d2))
    return acc


class TestClosedForm:
    def test_rectangle_pi(self, rect_geom_full):
        # quarter turns from the two short sides plus a half turn from the top
        assert wt.weight_at(rect_geom_full, (0.0, 0.0)) == pytest.approx(
            math.pi, abs=1e-10)

    def test_circle_identity_polygonal(self, circle_geom_fine):
        comp = circle_geom_fine.components[0]
        x = circle_geom_fine.point_at(comp.s_start + comp.length / 2)
        theta = math.atan2(x[1], x[0])
        w = wt.weight_at(circle_geom_fine, x)
        assert w * math.sin(theta) == pytest.approx(1.0, abs=1e-5)

    def test_circle_identity_pi_over_6(self, circle_geom_fine):
        comp = circle_geom_fine.components[0]
        x = circle_geom_fine.point_at(comp.s_start + comp.length / 6)
        theta = math.atan2(x[1], x[0])
        w = wt.weight_at(circle_geom_fine, x)
        assert w == pytest.approx(2.0, abs=2e-4)
        assert w * math.sin(theta) == pytest.approx(1.0, abs=1e-5)

    def test_brute_force_agreement_random(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 20:
            if rng.random() < 0.5:
                lo = rng.uniform(0.0, 3.0)
                hi = lo + rng.uniform(0.5, 2.5)
                g = geo.build_circle_cut(64, [(lo, hi)])
            else:
                a = rng.uniform(-0.9, 0.0)
                b = rng.uniform(0.1, 0.9)
                g = geo.build_rectangle_slit(2.0, rng.uniform(0.5, 2.0), (a, b))
            comp = g.components[0]
            x = g.point_at(comp.s_start + rng.uniform(0.2, 0.8) * comp.length)
            w = wt.weight_at(g, x)
            assert w == pytest.approx(brute_force_weight(g, x), rel=1e-7)
            checked += 1

    def test_positive_everywhere(self, circle_geom, rect_geom):
        for g in (circle_geom, rect_geom):
            wp = wt.weight_profile(g, 40, grading=6.0)
            assert np.all(wp.values > 0)
            assert np.all(np.isfinite(wp.values))

    def test_scaling(self, circle_geom, rect_geom):
        for g in (circle_geom, rect_geom):
            comp = g.components[0]
            x = g.point_at(comp.s_start + 0.37 * comp.length)
            w1 = wt.weight_at(g, x)
            g2 = g.scaled(2.0)
            w2 = wt.weight_at(g2, 2.0 * np.asarray(x))
            assert w2 == pytest.approx(0.5 * w1, rel=1e-10)

    def test_boundary_divergence_signaled(self, rect_geom_full):
        with pytest.raises(wt.InfiniteWeightError, match="cut boundary"):
            wt.weight_at(rect_geom_full, (-1.0, 0.0))

    def test_off_cut_rejected(self, circle_geom):
        with pytest.raises(ValueError):
            wt.weight_at(circle_geom, (0.0, -1.0))

    def test_tol_validated(self, circle_geom):
        x = circle_geom.point_at(circle_geom.components[0].s_start + 1.0)
        with pytest.raises(ValueError):
            wt.weight_at(circle_geom, x, tol=1e-3)


class TestSmoothCircle:
    def test_identity_exact(self):
        theta = np.linspace(1e-4, math.pi - 1e-4, 513)
        w = wt.unit_circle_weight(theta, [(0.0, math.pi)])
        assert np.max(np.abs(w * np.sin(theta) - 1.0)) < 1e-9

    def test_against_brute_quadrature(self):
        # midpoint rule on the smooth parametrization
        theta = 1.1
        phi = math.pi + (np.arange(400_000) + 0.5) / 400_000 * math.pi
        brute = float(np.sum((math.pi / 400_000) / (4 * np.sin((theta - phi) / 2) ** 2)))
        assert wt.unit_circle_weight(theta, [(0.0, math.pi)]) == pytest.approx(
            brute, rel=1e-9)

    def test_radius_scaling(self):
        w1 = wt.unit_circle_weight(0.9, [(0.0, math.pi)])
        w2 = wt.unit_circle_weight(0.9, [(0.0, math.pi)], radius=3.0)
        assert w2 == pytest.approx(w1 / 3.0, rel=1e-12)


class TestProfile:
    def test_symmetric_half_arc(self, circle_geom_fine):
        wp = wt.weight_profile(circle_geom_fine, 101, grading=1.0)
        v = wp.values
        assert v.min() == pytest.approx(1.0, abs=1e-4)
        assert np.argmin(v) == 50
        # the weight itself is symmetric: compare against exactly mirrored
        # points (x -> -x is exact in floating point)
        mirrored = wp.points * np.array([-1.0, 1.0])
        v_mirror = np.array([wt.weight_at(circle_geom_fine, p) for p in mirrored])
        assert np.all(np.abs(v - v_mirror) <= 1e-8 * v)

    def test_two_samples_near_endpoints(self, circle_geom_fine):
        wp = wt.weight_profile(circle_geom_fine, 2)
        assert np.all(wp.values > 2.0)

    def test_grading_gap_ratio(self, circle_geom_fine):
        wp = wt.weight_profile(circle_geom_fine, 41, grading=10.0)
        gaps = np.diff(wp.s)
        assert gaps.max() / gaps.min() == pytest.approx(10.0, rel=1e-9)
        mid = len(gaps) // 2
        assert np.all(np.diff(gaps[: mid + 1]) >= -1e-12)  # monotone to the middle
        assert np.all(np.diff(gaps[mid:]) <= 1e-12)

    def test_monotone_divergence_toward_endpoint(self, circle_geom_fine):
        g = circle_geom_fine
        comp = g.components[0]
        local = comp.length * 10.0 ** -np.arange(1, 7)
        pts = np.atleast_2d(g.point_at(comp.s_start + local))
        w = np.array([wt.weight_at(g, p) for p in pts])
        assert np.all(np.diff(w) > 0)  # grows toward the endpoint
        rho_t = np.atleast_1d(g.dist_to_complement(pts))
        assert np.all(w * rho_t >= 0.25)

    def test_n_samples_validated(self, circle_geom):
        with pytest.raises(ValueError):
            wt.weight_profile(circle_geom, 1)


class TestLowerBound:
    def test_constant_quarter(self, circle_geom_fine):
        de = geo.DensityEstimate(c_minus=1.0, c_plus=2.0, r_star=0.1, sample_count=1)
        wp = wt.weight_profile(circle_geom_fine, 64, grading=8.0)
        cert = wt.lower_bound_check(circle_geom_fine, de, wp)
        assert cert.c == 0.25
        assert cert.passed and cert.margin >= 0

    def test_example_values(self, circle_geom_fine):
        g = circle_geom_fine
        comp = g.components[0]
        x = g.point_at(comp.s_start + comp.length / 2)
        prod = wt.weight_at(g, x) * g.dist_to_complement(x)
        assert prod == pytest.approx(math.sqrt(2.0), rel=1e-4)
        # near the endpoint the product approaches one from above
        x0 = g.point_at(comp.s_start + 1e-3)
        prod0 = wt.weight_at(g, x0) * g.dist_to_complement(x0)
        assert prod0 == pytest.approx(1.0, abs=1e-3)
        assert prod0 >= 0.25

    def test_violations_detected(self, circle_geom_fine):
        # inflated density constant forces reported violations
        de = geo.DensityEstimate(c_minus=40.0, c_plus=41.0, r_star=0.1, sample_count=1)
        wp = wt.weight_profile(circle_geom_fine, 32)
        cert = wt.lower_bound_check(circle_geom_fine, de, wp)
        assert not cert.passed
        assert cert.margin < 0


class TestOmegaStar:
    def test_half_arc(self, circle_geom_fine):
        wp = wt.weight_profile(circle_geom_fine, 101)
        res = wt.omega_star(circle_geom_fine, wp, c_num=0.3)
        assert res.omega_star_literal == pytest.approx(1.0, abs=1e-4)
        assert res.omega_star_corrected == pytest.approx(0.3, abs=1e-4)

    def test_rescale_halves_infimum(self, circle_geom):
        wp1 = wt.weight_profile(circle_geom, 51)
        g2 = circle_geom.scaled(2.0)
        wp2 = wt.weight_profile(g2, 51)
        assert wp2.values.min() == pytest.approx(0.5 * wp1.values.min(), rel=1e-9)

    def test_degenerate_min(self, circle_geom):
        wp = wt.weight_profile(circle_geom, 2)
        sub = wt.WeightProfile(s=wp.s[:1], local=wp.local[:1], component=wp.component[:1],
                               points=wp.points[:1], values=wp.values[:1],
                               tolerance=wp.tolerance)
        res = wt.omega_star(circle_geom, sub, c_num=2.0)
        assert res.omega_star_corrected == pytest.approx(2.0 * wp.values[0])


class TestFlat3D:
    def test_annulus_center_exact(self):
        m = 96
        a, b = 1.0, 2.0
        flat = geo.build_flat_annulus_cut(a, b, m)
        w = wt.weight_at(flat, (0.0, 0.0, 0.0), tol=1e-9)
        # per-edge angular antiderivative: the polygonal annulus integral at
        # the center is 2 m sin(pi/m) (1/d_a - 1/d_b) with apothems d
        d_a = a * math.cos(math.pi / m)
        d_b = b * math.cos(math.pi / m)
        exact = 2 * m * math.sin(math.pi / m) * (1.0 / d_a - 1.0 / d_b)
        assert w == pytest.approx(exact, rel=1e-7)
        assert w == pytest.approx(2 * math.pi * (1 / a - 1 / b), rel=1e-3)

    def test_membership_checked(self):
        flat = geo.build_flat_annulus_cut(1.0, 2.0, 64)
        with pytest.raises(ValueError):
            wt.weight_at(flat, (1.5, 0.0, 0.0))
        with pytest.raises(ValueError):
            wt.weight_at(flat, (0.0, 0.0, 0.5))


class TestCsv:
    def test_columns_and_product(self, circle_geom):
        wp = wt.weight_profile(circle_geom, 11)
        text = wt.profile_csv(circle_geom, wp)
        lines = text.strip().splitlines()
        assert lines[0] == "arc_coord,x,y,w,rho_tilde,rho_geo,w_times_rho_tilde"
        assert len(lines) == 12
        row = [float(t) for t in lines[1].split(",")]
        assert row[3] * row[4] == pytest.approx(row[6], rel=1e-12)
        assert row[4] <= row[5] + 1e-12

import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hardy_spectral.geometry import Ball, Box, Domain, DomainError, HalfSpace, Intersection
from hardy_spectral.hardy_field import delta_at, delta_field, delta_values, superlevel_E, write_field_csv
from hardy_spectral.quadrature import sphere_rule

from conftest import random_interior_points

SQUARE_CENTER_DELTA = math.sqrt(math.pi / (4 * (math.pi + 2)))


class TestDeltaAt:
    def test_interval_identity(self, interval, rng):
        x = rng.uniform(0.001, 0.999, 100)
        got = delta_values(interval, x[:, None])
        assert_allclose(got, np.minimum(x, 1 - x), rtol=0, atol=1e-12)
        assert delta_at(interval, [0.3]) == pytest.approx(0.3, abs=1e-15)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_ball_center(self, d):
        R = 1.7
        dom = Domain(Ball(np.zeros(d), R))
        assert delta_at(dom, np.zeros(d)) == pytest.approx(R / math.sqrt(d), rel=1e-9)

    @pytest.mark.parametrize("d", [2, 3])
    def test_half_space_height(self, d):
        normal = np.zeros(d)
        normal[-1] = 1.0
        dom = Domain(HalfSpace(normal, 0.0))
        for a in (0.1, 0.7, 3.0):
            x = np.zeros(d)
            x[-1] = a
            assert delta_at(dom, x) == pytest.approx(a, rel=1e-3)

    def test_square_center_closed_form(self, square):
        # integral of d_w^-2 over the circle at the center is 4 (pi + 2)
        assert delta_at(square, [0.5, 0.5]) == pytest.approx(SQUARE_CENTER_DELTA, rel=1e-5)

    def test_whole_space_gives_inf(self):
        dom = Domain(HalfSpace((1.0, 0.0), -10.0) | HalfSpace((-1.0, 0.0), -10.0))
        assert delta_at(dom, [0.0, 0.0]) == math.inf

    def test_outside_point_rejected(self, square):
        with pytest.raises(DomainError):
            delta_at(square, [1.5, 0.5])

    def test_not_above_max_directional_distance(self, corpus, rng):
        rule = sphere_rule(2)
        for name in ("square", "lshape", "annulus", "rooms"):
            dom = corpus[name]
            x = random_interior_points(dom, 50, rng)
            dmax = np.array([np.max(dom.d_omega(np.repeat(p[None], rule.n, 0), rule.nodes)) for p in x])
            assert np.all(delta_values(dom, x) <= dmax)

    def test_quadrature_convergence_at_square_center(self, square):
        vals = [delta_at(square, [0.5, 0.5], sphere_rule(2, 100 * 2 ** k)) for k in range(1, 5)]
        diffs = np.abs(np.diff(vals))
        assert np.all(np.diff(diffs) < 0)

    @pytest.mark.parametrize("s", [0.5, 2.0])
    @pytest.mark.parametrize("name", ["square", "disk"])
    def test_scaling_covariance(self, corpus, rng, name, s):
        dom = corpus[name]
        x = random_interior_points(dom, 40, rng)
        assert_allclose(delta_values(dom.scaled(s), s * x), s * delta_values(dom, x), rtol=1e-9)

    def test_domain_monotonicity(self, rng):
        inner = Domain(Box([(-0.5, 0.5), (-0.5, 0.5)]))
        outer = Domain(Ball((0, 0), 1.0))
        x = random_interior_points(inner, 200, rng)
        assert np.all(delta_values(inner, x) <= delta_values(outer, x) + 1e-12)


class TestDeltaField:
    def test_interval_quarter_grid(self, interval):
        f = delta_field(interval, 0.25)
        assert f.interior_count == 3
        assert_allclose(f.values[f.mask], [0.25, 0.5, 0.25])
        assert np.all(np.isnan(f.values[~f.mask]))

    def test_square_half_grid(self, square):
        f = delta_field(square, 0.5)
        assert f.interior_count == 1
        assert f.values[1, 1] == pytest.approx(SQUARE_CENTER_DELTA, rel=1e-5)

    def test_empty_domain(self):
        dom = Domain(Intersection((Box([(0, 1), (0, 1)]), Box([(2, 3), (0, 1)]))), bbox=[[0, 3], [0, 1]])
        f = delta_field(dom, 0.1)
        assert f.interior_count == 0

    def test_positive_and_finite(self, corpus):
        for dom in corpus.values():
            f = delta_field(dom, dom.diam / 64)
            v = f.values[f.mask]
            assert np.all(np.isfinite(v) & (v > 0))

    def test_error_estimate_bounds_refinement(self, corpus):
        for name in ("square", "lshape", "annulus", "rooms"):
            dom = corpus[name]
            a = delta_field(dom, dom.diam / 40)
            b = delta_field(dom, dom.diam / 40, rule=sphere_rule(2, 1440))
            m = a.mask
            change = np.abs(a.values[m] - b.values[m])
            assert np.all(change <= a.error[m] + 1e-12 * a.values[m])

    def test_coarse_h_rejected(self, square):
        with pytest.raises(DomainError):
            delta_field(square, 1.0)

    def test_unbounded_needs_window(self):
        with pytest.raises(DomainError):
            delta_field(Domain(HalfSpace((0, 1), 0.0)), 0.1)

    def test_csv(self, interval, tmp_path):
        f = delta_field(interval, 0.25)
        path = tmp_path / "d.csv"
        write_field_csv(f, path)
        rows = list(csv.DictReader(open(path)))
        assert [r["flag"] for r in rows] == ["outside", "inside", "inside", "inside", "outside"]
        assert [r["delta"] for r in rows if r["flag"] == "inside"] == ["0.25", "0.5", "0.25"]


class TestSuperlevel:
    def test_interval_examples(self, interval):
        f = delta_field(interval, 0.25)
        E = superlevel_E(f, 4.0)
        assert E.threshold == pytest.approx(0.25)
        assert_allclose(E.points[:, 0], [0.25, 0.5, 0.75])
        E = superlevel_E(f, 1 / (4 * 0.3 ** 2))
        assert_allclose(E.points[:, 0], [0.5])

    def test_large_lambda_takes_everything(self, square):
        f = delta_field(square, 1 / 16)
        assert len(superlevel_E(f, 1e12)) == f.interior_count

    def test_rejects_nonpositive(self, square):
        with pytest.raises(ValueError):
            superlevel_E(delta_field(square, 0.25), 0.0)

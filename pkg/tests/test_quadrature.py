import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hardy_spectral.quadrature import EXACTNESS_RTOL, sphere_area, sphere_rule, unit_ball_volume


class TestSphereRule:
    def test_d1(self):
        r = sphere_rule(1, 2)
        assert_allclose(r.nodes[:, 0], [1, -1])
        assert_allclose(r.weights, [1, 1])

    def test_d2_four_points(self):
        r = sphere_rule(2, 4)
        angles = np.degrees(np.arctan2(r.nodes[:, 1], r.nodes[:, 0])) % 360
        assert_allclose(np.sort(angles), [0, 90, 180, 270], atol=1e-12)
        assert_allclose(r.weights, np.pi / 2)
        assert r.weights.sum() == pytest.approx(2 * np.pi, rel=1e-12)

    def test_d3_512_exactness(self):
        r = sphere_rule(3, 512)
        assert r.integrate(lambda w: w[:, 2] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-3)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_default_invariants(self, d):
        r = sphere_rule(d)
        assert r.weights.sum() == pytest.approx(sphere_area(d), rel=1e-9)
        assert_allclose(np.linalg.norm(r.nodes, axis=1), 1.0, atol=1e-12)
        got = r.integrate(lambda w: w[:, -1] ** 2)
        assert got == pytest.approx(sphere_area(d) / d, rel=EXACTNESS_RTOL)

    def test_equispaced_rule_is_exact_for_quadratics(self):
        # equispaced rules integrate trigonometric polynomials of low degree exactly
        r = sphere_rule(2)
        assert r.integrate(lambda w: w[:, 1] ** 2) == pytest.approx(np.pi, rel=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            sphere_rule(4, 100)
        with pytest.raises(ValueError):
            sphere_rule(2, 1)
        with pytest.raises(ValueError):
            sphere_rule(3, 32)
        with pytest.raises(ValueError):
            sphere_rule(1, 4)
        with pytest.raises(ValueError, match="integrates"):
            sphere_rule(2, 2)

    def test_antipodal_fold(self):
        r = sphere_rule(2, 720)
        f = r.antipodal_fold()
        assert f.n == 360
        even = lambda w: w[:, 0] ** 4 + w[:, 1] ** 2  # noqa: E731
        assert f.integrate(even) == pytest.approx(r.integrate(even), rel=1e-12)


def test_areas_and_volumes():
    assert_allclose([sphere_area(d) for d in (1, 2, 3)], [2, 2 * math.pi, 4 * math.pi])
    assert_allclose([unit_ball_volume(d) for d in (1, 2, 3)], [2, math.pi, 4 * math.pi / 3])

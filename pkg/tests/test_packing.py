import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hardy_spectral.geometry import Ball, Box, Domain
from hardy_spectral.hardy_field import delta_field, superlevel_E
from hardy_spectral.packing import (
    BallPacking,
    greedy_disjoint,
    lattice_variant,
    packing_radius,
    rozenblum_extract,
    verify_packing,
    write_packing,
)
from hardy_spectral.spectral import assemble, count_leq, eigenvalues_covering

PI2 = math.pi ** 2


@pytest.fixture(scope="module")
def square_setup():
    dom = Domain(Box([(0, 1), (0, 1)]))
    h = 1 / 128
    field = delta_field(dom, h)
    res = eigenvalues_covering(assemble(dom, h), 200)
    return dom, field, res


def disk_delta_oracle(r, n=4000):
    """delta at distance r from the center of the unit disk, from closed-form chords."""
    phi = 2 * np.pi * (np.arange(n) + 0.5) / n
    b = r * np.cos(phi)
    disc = np.sqrt(b ** 2 + 1 - r ** 2)
    d = np.minimum(-b + disc, b + disc)
    return (2 / (2 * np.pi) * np.sum(d ** -2.0) * 2 * np.pi / n) ** -0.5


def brute_greedy_disk(threshold, rho, h):
    """Greedy disjoint packing of E on a grid, with a boolean stencil instead of a tree."""
    rs = np.linspace(0, 0.999, 2001)
    deltas = np.array([disk_delta_oracle(r) for r in rs])
    r_E = np.interp(-threshold, -deltas, rs)  # delta decreases in r
    k = int(math.floor(1 / h))
    ax = np.arange(-k, k + 1) * h
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    R = np.hypot(X, Y)
    cand = np.argwhere(R < r_E)
    order = np.lexsort((Y[cand[:, 0], cand[:, 1]], X[cand[:, 0], cand[:, 1]], R[cand[:, 0], cand[:, 1]]))
    m = int(math.ceil(2 * rho / h))
    off = np.argwhere(np.hypot(*np.mgrid[-m:m + 1, -m:m + 1]) * h < 2 * rho) - m
    blocked = np.zeros(X.shape, dtype=bool)
    kept = 0
    for i, j in cand[order]:
        if blocked[i, j]:
            continue
        kept += 1
        ii, jj = off[:, 0] + i, off[:, 1] + j
        ok = (ii >= 0) & (ii < X.shape[0]) & (jj >= 0) & (jj < X.shape[1])
        blocked[ii[ok], jj[ok]] = True
    return kept, r_E


class TestExtract:
    def test_square_low_lambda(self, square):
        lam = PI2  # lambda_1 / 2
        field = delta_field(square, 1 / 32)
        pk = rozenblum_extract(square, field, lam, 0.5)
        assert len(superlevel_E(field, lam)) > 0
        assert pk.M >= 1
        assert pk.radius == pytest.approx(math.sqrt(0.5 * 2 / (4 * lam)))

    def test_disk_against_brute_force(self, disk):
        lam, theta = 4.0e3, 1.0
        rho = packing_radius(lam, theta, 2)
        field = delta_field(disk, rho / 4)
        pk = rozenblum_extract(disk, field, lam, theta, samples=2000)
        oracle_M, r_E = brute_greedy_disk((4 * lam) ** -0.5, rho, rho / 8)
        area_ratio = r_E ** 2 / (2 * rho) ** 2
        assert area_ratio / 4 <= pk.M <= 4 * area_ratio
        assert oracle_M / 1.2 <= pk.M <= 1.2 * oracle_M

    def test_theta_precondition(self, square):
        field = delta_field(square, 1 / 64)
        for theta in (0.0, 1.5):
            with pytest.raises(ValueError):
                rozenblum_extract(square, field, 100.0, theta)

    def test_coarse_field_rejected(self, square):
        with pytest.raises(ValueError, match="coarse"):
            rozenblum_extract(square, delta_field(square, 1 / 8), 200.0, 0.5)

    def test_empty_E(self, square):
        field = delta_field(square, 1 / 8)
        pk = rozenblum_extract(square, field, 0.3, 1.0)
        assert pk.M == 0 and len(pk.E) == 0

    def test_deterministic_order(self, square_setup):
        dom, field, _ = square_setup
        a = rozenblum_extract(dom, field, 200.0, 0.5)
        b = rozenblum_extract(dom, field, 200.0, 0.5)
        assert np.array_equal(a.centers, b.centers)
        # the first kept center is the deepest point, lowest coordinates among ties
        _, vals = field.interior()
        assert field.values.ravel()[field.grid.points().tolist().index(a.centers[0].tolist())] == vals.max()

    def test_scaling(self, square):
        lam, theta = 200.0, 0.5
        small = rozenblum_extract(square, delta_field(square, 1 / 128), lam, theta)
        big_dom = square.scaled(2.0)
        big = rozenblum_extract(big_dom, delta_field(big_dom, 2 / 128), lam / 4, theta)
        assert big.radius == pytest.approx(2 * small.radius)
        assert big.M == small.M


class TestVerify:
    def test_square_lambda_200(self, square_setup):
        dom, field, res = square_setup
        pk = rozenblum_extract(dom, field, 200.0, 0.5)
        rep = verify_packing(pk, dom, res, field)
        assert rep.passed, rep.details["checks"]
        assert rep.details["c2_implied"] > 0
        assert rep.details["chain_lhs"] <= rep.details["chain_rhs"] * rep.details["chain_grid_slack"]
        assert rep.details["chain_rhs_closed_form"] == pytest.approx(rep.details["chain_rhs"])
        assert rep.details["chain_integral"] <= rep.details["chain_lhs"]

    def test_chain_at_two_grid_levels(self, square):
        sides = []
        for h in (1 / 128, 1 / 256):
            field = delta_field(square, h)
            rep = verify_packing(rozenblum_extract(square, field, 200.0, 0.5), square, None, field)
            assert rep.details["checks"]["chain"]
            sides.append(rep.details["E_grid_measure"])
        assert sides[0] == pytest.approx(sides[1], rel=0.05)

    def test_empty_packing(self, square):
        field = delta_field(square, 1 / 8)
        res = eigenvalues_covering(assemble(square, 1 / 8), 0.3)
        pk = rozenblum_extract(square, field, 0.3, 1.0)
        assert count_leq(res, 0.3) == 0
        rep = verify_packing(pk, square, res)
        assert rep.passed
        assert not rep.details["c2_defined"] and math.isnan(rep.details["c2_implied"])

    def test_overlapping_pair_reported(self, square_setup):
        dom, field, _ = square_setup
        pk = rozenblum_extract(dom, field, 200.0, 0.5)
        rho = pk.radius
        bad = BallPacking(
            radius=rho, centers=np.array([[0.5, 0.5], [0.5 + 1.9 * rho, 0.5]]), overlap=np.ones(2),
            overlap_stderr=np.full(2, 0.001), lam=200.0, theta=0.5, d=2, candidates=np.zeros((0, 2)),
            kept=np.zeros(0, dtype=np.int64), E=np.zeros((0, 2)), h=field.h, coverage_radius=2 * rho,
            density_floor=0.5, samples=10_000, seed=0)
        rep = verify_packing(bad, dom)
        assert not rep.passed
        assert rep.details["violations"]["disjoint"] == [[0, 1]]

    def test_maximality_and_coverage_detect_gaps(self, square_setup):
        dom, field, _ = square_setup
        pk = rozenblum_extract(dom, field, 200.0, 0.5)
        pk.centers = pk.centers[1:]
        pk.overlap, pk.overlap_stderr = pk.overlap[1:], pk.overlap_stderr[1:]
        pk.kept = pk.kept[1:]
        checks = verify_packing(pk, dom).details["checks"]
        assert not checks["maximal"] and not checks["coverage"]

    def test_density_violation(self, square_setup):
        dom, field, _ = square_setup
        pk = rozenblum_extract(dom, field, 200.0, 0.5)
        pk.overlap = pk.overlap.copy()
        pk.overlap[3] = 0.3
        rep = verify_packing(pk, dom)
        assert not rep.passed and rep.details["violations"]["density"] == [3]


class TestLattice:
    def test_centers_on_lattice(self, square_setup):
        dom, field, res = square_setup
        lv = lattice_variant(dom, field, 200.0, 0.5)
        q = lv.centers / lv.lattice_spacing
        assert np.max(np.abs(q - np.round(q))) <= 1e-12
        assert_allclose(lv.centers, lv.extra["lattice_index"] * lv.lattice_spacing, rtol=0, atol=0)
        assert verify_packing(lv, dom, res).passed

    def test_compare_with_free(self, square_setup):
        dom, field, _ = square_setup
        free = rozenblum_extract(dom, field, 200.0, 0.5)
        lv = lattice_variant(dom, field, 200.0, 0.5)
        assert lv.M >= free.M / 9
        assert 0 < lv.effective_density <= 1

    def test_spacing_precondition(self, square_setup):
        dom, field, _ = square_setup
        with pytest.raises(ValueError):
            lattice_variant(dom, field, 200.0, 0.5, c=1.0)

    def test_empty(self, square):
        lv = lattice_variant(square, delta_field(square, 1 / 8), 0.3, 1.0)
        assert lv.M == 0


def test_greedy_disjoint_line():
    pts = np.arange(10, dtype=float)[:, None]
    kept = greedy_disjoint(pts, np.arange(10), 1.0)
    assert kept.tolist() == [0, 2, 4, 6, 8]


def test_export(square_setup, tmp_path):
    dom, field, res = square_setup
    pk = rozenblum_extract(dom, field, 200.0, 0.5)
    rep = verify_packing(pk, dom, res)
    write_packing(pk, tmp_path / "p.csv", tmp_path / "p.json", rep)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "m,x1,x2,overlap,stderr"
    assert len(lines) == pk.M + 1
    header = json.loads((tmp_path / "p.json").read_text())
    assert header["M"] == pk.M and header["c2_implied"] > 0
    assert set(header) >= {"lambda", "theta", "rho", "M", "c2_implied"}

"""Greedy extraction of disjoint, well-filled balls at scale lambda^{-1/2}.

Candidates are the grid points of E = {delta >= (4 lambda)^{-1/2}}. Balls of
radius rho = (theta d / (4 lambda))^{1/2} centered in E satisfy the density
bound |Omega n B| >= (1 - theta)|B|; a maximal disjoint subfamily is kept, and
its doubled balls cover E.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from hardy_spectral.geometry import Domain
from hardy_spectral.hardy_field import DeltaField, superlevel_E
from hardy_spectral.measure import OverlapEstimate, overlap_fractions
from hardy_spectral.quadrature import unit_ball_volume
from hardy_spectral.reports import BoundReport, to_jsonable
from hardy_spectral.spectral import SpectralResult, count_leq

__all__ = ["BallPacking", "packing_radius", "rozenblum_extract", "lattice_variant", "verify_packing",
           "write_packing", "greedy_disjoint"]

PACKING_SAMPLES = 10_000
DISJOINT_SLACK = 1e-12


def packing_radius(lam: float, theta: float, d: int) -> float:
    return math.sqrt(theta * d / (4.0 * lam))


@dataclass
class BallPacking:
    radius: float
    centers: np.ndarray  # (M, d)
    overlap: np.ndarray  # (M,) measured |Omega n B| / |B|
    overlap_stderr: np.ndarray
    lam: float
    theta: float
    d: int
    candidates: np.ndarray  # points the greedy pass ran over
    kept: np.ndarray  # indices into candidates
    E: np.ndarray  # grid points of the superlevel set
    h: float
    coverage_radius: float  # every E point lies within this distance of a center
    density_floor: float | None  # asserted lower bound on overlaps (None: only measured)
    samples: int
    seed: int
    variant: str = "free"
    lattice_spacing: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.centers)

    @property
    def c1(self) -> float:
        return math.sqrt(self.theta * self.d / 4.0)

    @property
    def overlaps(self) -> list[OverlapEstimate]:
        return [OverlapEstimate(float(v), float(s), self.samples, "monte-carlo", self.seed)
                for v, s in zip(self.overlap, self.overlap_stderr)]

    @property
    def effective_density(self) -> float:
        return float(self.overlap.min()) if self.M else math.nan


def greedy_disjoint(points: np.ndarray, order: np.ndarray, rho: float) -> np.ndarray:
    """Keep points in the given order unless within 2 rho of an already kept point."""
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    tree = cKDTree(points)
    blocked = np.zeros(len(points), dtype=bool)
    kept = []
    reach = 2.0 * rho
    for i in order:
        if blocked[i]:
            continue
        kept.append(i)
        nbrs = np.asarray(tree.query_ball_point(points[i], reach), dtype=np.int64)
        close = nbrs[np.linalg.norm(points[nbrs] - points[i], axis=1) < reach - DISJOINT_SLACK]
        blocked[close] = True
    return np.array(kept, dtype=np.int64)


def _delta_order(points: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """delta descending, ties broken lexicographically on coordinates."""
    keys = [points[:, k] for k in range(points.shape[1] - 1, -1, -1)] + [-delta]
    return np.lexsort(keys)


def _check_params(field: DeltaField, lam: float, theta: float) -> float:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    rho = packing_radius(lam, theta, field.dim)
    if field.h > rho / 4 * (1 + 1e-12):
        raise ValueError(f"field spacing h = {field.h:.4g} is too coarse; need h <= rho/4 = {rho / 4:.4g}")
    return rho


def _empty(rho, lam, theta, field, variant, samples, seed, spacing=None):
    d = field.dim
    z = np.zeros((0, d))
    return BallPacking(rho, z, np.zeros(0), np.zeros(0), lam, theta, d, z, np.zeros(0, dtype=np.int64), z,
                       field.h, 2.0 * rho, 1.0 - theta, samples, seed, variant, spacing)


def rozenblum_extract(dom: Domain, field: DeltaField, lam: float, theta: float,
                      samples: int = PACKING_SAMPLES, seed: int = 0) -> BallPacking:
    rho = _check_params(field, lam, theta)
    E = superlevel_E(field, lam)
    if len(E) == 0:
        return _empty(rho, lam, theta, field, "free", samples, seed)
    kept = greedy_disjoint(E.points, _delta_order(E.points, E.delta), rho)
    centers = E.points[kept]
    vals, errs = overlap_fractions(dom, centers, rho, samples=samples, seed=seed)
    return BallPacking(rho, centers, vals, errs, lam, theta, field.dim, E.points, kept, E.points, field.h,
                       coverage_radius=2.0 * rho, density_floor=1.0 - theta, samples=samples, seed=seed)


def lattice_variant(dom: Domain, field: DeltaField, lam: float, theta: float, c: float | None = None,
                    samples: int = PACKING_SAMPLES, seed: int = 0) -> BallPacking:
    """Greedy packing with centers restricted to the lattice (c lambda^{-1/2}) Z^d.

    Admissible centers are lattice points within rho/2 of E. Shifting a center
    by up to rho/2 weakens the density guarantee, so the overlaps are measured
    and reported rather than asserted; E is covered by balls of radius 5 rho/2.
    """
    rho = _check_params(field, lam, theta)
    d = field.dim
    c = math.sqrt(theta * d / 4.0) / math.sqrt(d) if c is None else float(c)
    spacing = c / math.sqrt(lam)
    if spacing > rho / math.sqrt(d) * (1 + 1e-12):
        raise ValueError(f"lattice spacing {spacing:.4g} exceeds rho/sqrt(d) = {rho / math.sqrt(d):.4g}")
    E = superlevel_E(field, lam)
    if len(E) == 0:
        return _empty(rho, lam, theta, field, "lattice", samples, seed, spacing)
    lo = np.ceil((E.points.min(axis=0) - rho / 2) / spacing).astype(np.int64)
    hi = np.floor((E.points.max(axis=0) + rho / 2) / spacing).astype(np.int64)
    ints = np.stack(np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij"),
                    axis=-1).reshape(-1, d)
    lattice = ints * spacing
    dist, near = cKDTree(E.points).query(lattice, distance_upper_bound=rho / 2 * (1 + 1e-12))
    ok = np.isfinite(dist)
    ints, lattice, near = ints[ok], lattice[ok], near[ok]
    keys = [ints[:, k] for k in range(d - 1, -1, -1)] + [-E.delta[near]]
    kept = greedy_disjoint(lattice, np.lexsort(keys), rho)
    centers = lattice[kept]
    vals, errs = overlap_fractions(dom, centers, rho, samples=samples, seed=seed)
    return BallPacking(rho, centers, vals, errs, lam, theta, d, lattice, kept, E.points, field.h,
                       coverage_radius=2.5 * rho, density_floor=None, samples=samples, seed=seed,
                       variant="lattice", lattice_spacing=spacing,
                       extra={"lattice_index": ints[kept], "c": c})


def verify_packing(pk: BallPacking, dom: Domain, res: SpectralResult | None = None,
                   field: DeltaField | None = None) -> BoundReport:
    """Certify the packing invariants and evaluate the volume chain of the extraction argument.

    Chain: lambda^{d/2} |E| <= lambda^{d/2} M |B_R|, R the coverage radius
    (R = 2 rho gives d^{d/2} omega_d theta^{d/2} M), with the grid measure of E
    inflated by (1 + h sqrt(d) / (2R))^d for the cells around E points.
    """
    d, rho, lam, M = pk.d, pk.radius, pk.lam, pk.M
    checks: dict[str, bool] = {}
    violations: dict[str, list] = {}

    expected = packing_radius(lam, pk.theta, d)
    checks["radius"] = abs(rho - expected) <= 1e-12 * expected

    bad_pairs = []
    if M > 1:
        tree = cKDTree(pk.centers)
        for i, j in sorted(tree.query_pairs(2.0 * rho)):
            if np.linalg.norm(pk.centers[i] - pk.centers[j]) < 2.0 * rho - DISJOINT_SLACK:
                bad_pairs.append([int(i), int(j)])
    checks["disjoint"] = not bad_pairs
    violations["disjoint"] = bad_pairs[:20]

    if pk.density_floor is not None:
        low = np.flatnonzero(pk.overlap < pk.density_floor - 3.0 * pk.overlap_stderr)
        checks["density"] = low.size == 0
        violations["density"] = low[:20].tolist()

    if M:
        center_tree = cKDTree(pk.centers)
        rest = np.setdiff1d(np.arange(len(pk.candidates)), pk.kept)
        gap, _ = center_tree.query(pk.candidates[rest]) if rest.size else (np.zeros(0), None)
        loose = rest[gap >= 2.0 * rho - DISJOINT_SLACK]
        checks["maximal"] = loose.size == 0
        violations["maximal"] = loose[:20].tolist()
        cover, _ = center_tree.query(pk.E)
        uncovered = np.flatnonzero(cover >= pk.coverage_radius)
        checks["coverage"] = uncovered.size == 0
        violations["coverage"] = uncovered[:20].tolist()
    else:
        checks["maximal"] = len(pk.candidates) == 0
        checks["coverage"] = len(pk.E) == 0

    R = pk.coverage_radius
    e_measure = len(pk.E) * pk.h ** d
    chain_lhs = lam ** (d / 2) * e_measure
    chain_balls = lam ** (d / 2) * M * unit_ball_volume(d) * R ** d
    slack = (1.0 + pk.h * math.sqrt(d) / (2.0 * R)) ** d
    checks["chain"] = chain_lhs <= chain_balls * slack
    details = {
        "M": M,
        "radius": rho,
        "c1": pk.c1,
        "variant": pk.variant,
        "checks": checks,
        "violations": violations,
        "effective_density": pk.effective_density,
        "E_grid_measure": e_measure,
        "chain_lhs": chain_lhs,
        "chain_rhs": chain_balls,
        "chain_grid_slack": slack,
    }
    if pk.variant == "free":
        details["chain_rhs_closed_form"] = d ** (d / 2) * unit_ball_volume(d) * pk.theta ** (d / 2) * M
    if field is not None:
        with np.errstate(divide="ignore"):
            inner = lam - 0.25 / field.values[field.mask] ** 2
        details["chain_integral"] = float(np.sum(np.clip(inner, 0, None) ** (d / 2))) * field.h ** d
    count = None
    if res is not None:
        count = count_leq(res, lam)
        details["count"] = count
    c2 = M / count if count else math.nan
    details["c2_implied"] = c2
    details["c2_defined"] = bool(count)
    return BoundReport(
        name="rozenblum" if pk.variant == "free" else "rozenblum_lattice",
        bound_value=float(M),
        reference_value=math.nan if count is None else float(count),
        passed=all(checks.values()),
        parameters={"lambda": lam, "theta": pk.theta, "rho": rho, "h": pk.h, "samples": pk.samples,
                    "seed": pk.seed, "lattice_spacing": pk.lattice_spacing},
        tolerances={"disjoint_slack": DISJOINT_SLACK, "stderr_multiple": 3.0},
        details=details,
    )


def write_packing(pk: BallPacking, csv_path, json_path, report: BoundReport | None = None) -> None:
    """CSV rows (m, center, overlap, stderr) plus a JSON header."""
    d = pk.d
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m"] + [f"x{k + 1}" for k in range(d)] + ["overlap", "stderr"])
        for m, (c, v, s) in enumerate(zip(pk.centers, pk.overlap, pk.overlap_stderr), start=1):
            writer.writerow([m] + [f"{x:.12g}" for x in c] + [f"{v:.12g}", f"{s:.12g}"])
    header = {"lambda": pk.lam, "theta": pk.theta, "rho": pk.radius, "M": pk.M, "variant": pk.variant,
              "c2_implied": None if report is None else report.details.get("c2_implied")}
    with open(json_path, "w") as fh:
        json.dump(to_jsonable(header), fh, indent=2, sort_keys=True)
        fh.write("\n")

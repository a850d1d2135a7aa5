"""Mean-distance function delta(x) and its superlevel sets.

    delta(x) = ( d / |S^{d-1}| * int_{S^{d-1}} d_w(x)^-2 dw )^{-1/2}

Directions along which the whole line stays in the set (d_w = +inf) add
nothing to the integral.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from hardy_spectral.geometry import DEFAULT_NODE_BUDGET, Domain, DomainError, Grid
from hardy_spectral.quadrature import SphereRule, sphere_area, sphere_rule

__all__ = ["DeltaField", "SuperLevelSet", "delta_at", "delta_values", "delta_field", "superlevel_E", "write_field_csv"]


def _half_rule(rule: SphereRule) -> SphereRule | None:
    if rule.dim == 1:
        return None
    n = rule.n // 2
    if rule.dim == 3 and n < 64:
        return None
    return sphere_rule(rule.dim, n)


def _inv_square_means(dom: Domain, pts: np.ndarray, rule: SphereRule, with_half: bool):
    """Quadrature of d_w^-2 over the sphere for the rule and its companions.

    Returns (full, others): ``others`` lists the sums of the n/2 rule and, for
    equispaced circle rules, of the rule rotated by half a step. The 2n rule
    averages the rule and its rotation, so delta_2n lies between the two.
    """
    folded = rule.antipodal_fold() or rule
    half = _half_rule(rule) if with_half else None
    if half is None:
        return dom.line_inv_square_sums(pts, folded.nodes, folded.weights)[:, 0], []
    if rule.kind == "equispaced" and rule.n % 4 == 0 and folded is not rule:
        m = folded.n
        ang = 2.0 * np.pi * (np.arange(m) + 0.5) / rule.n
        dirs = np.vstack([folded.nodes, np.column_stack([np.cos(ang), np.sin(ang)])])
        W = np.zeros((3, 2 * m))
        W[0, :m] = folded.weights
        # the n/2 rule uses every other angle of the folded set
        W[1, :m:2] = 2.0 * half.weights[0]
        W[2, m:] = folded.weights
        sums = dom.line_inv_square_sums(pts, dirs, W)
        return sums[:, 0], [sums[:, 1], sums[:, 2]]
    full = dom.line_inv_square_sums(pts, folded.nodes, folded.weights)[:, 0]
    hf = half.antipodal_fold() or half
    return full, [dom.line_inv_square_sums(pts, hf.nodes, hf.weights)[:, 0]]


def _delta_from_sum(s: np.ndarray, d: int) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(s > 0, (d / sphere_area(d) * s) ** -0.5, np.inf)


def delta_values(dom: Domain, points, rule: SphereRule | None = None) -> np.ndarray:
    """delta at an array of points (..., dim); NaN where a point is outside."""
    rule = rule or sphere_rule(dom.dim)
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, dom.dim)
    s, _ = _inv_square_means(dom, flat, rule, with_half=False)
    return _delta_from_sum(s, dom.dim).reshape(pts.shape[:-1])


def delta_at(dom: Domain, x, rule: SphereRule | None = None) -> float:
    """delta(x) for a single point of the domain; +inf if every sampled line stays inside."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not dom.contains(x):
        raise DomainError(f"point {x.tolist()} is not in the domain")
    return float(delta_values(dom, x[None, :], rule)[0])


@dataclass
class DeltaField:
    grid: Grid
    values: np.ndarray  # grid.shape; NaN marks points outside the domain
    rule: SphereRule
    error: np.ndarray  # max |delta_n - delta'| over the companion rules, per grid point

    @property
    def dom(self) -> Domain:
        return self.grid.domain

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def mask(self) -> np.ndarray:
        return self.grid.mask

    @property
    def interior_count(self) -> int:
        return int(self.mask.sum())

    @property
    def quadrature_error(self) -> float:
        e = self.error[self.mask]
        return float(e.max()) if e.size else 0.0

    def interior(self) -> tuple[np.ndarray, np.ndarray]:
        """(points, delta) for the interior grid points, in C order."""
        return self.grid.interior_points(), self.values[self.mask]


def delta_field(dom: Domain, h: float, rule: SphereRule | None = None,
                budget: int = DEFAULT_NODE_BUDGET) -> DeltaField:
    rule = rule or sphere_rule(dom.dim)
    if not dom.has_window:
        raise DomainError("delta_field needs a finite bbox window")
    if h > dom.diam / 2:
        raise DomainError(f"h = {h} exceeds diam(bbox)/2 = {dom.diam / 2:.6g}")
    grid = dom.grid(h, budget=budget)
    values = np.full(grid.shape, np.nan)
    error = np.zeros(grid.shape)
    mask = grid.mask
    if mask.any():
        pts = grid.interior_points()
        full, others = _inv_square_means(dom, pts, rule, with_half=True)
        delta = _delta_from_sum(full, dom.dim)
        values[mask] = delta
        err = np.zeros(len(pts))
        for other in others:
            with np.errstate(invalid="ignore"):
                diff = np.abs(delta - _delta_from_sum(other, dom.dim))
            err = np.maximum(err, np.nan_to_num(diff, nan=0.0, posinf=np.inf))
        error[mask] = err
    return DeltaField(grid=grid, values=values, rule=rule, error=error)


@dataclass
class SuperLevelSet:
    """Grid points of E = {delta >= (4 lambda)^-1/2}."""

    points: np.ndarray
    delta: np.ndarray
    flat_index: np.ndarray
    threshold: float
    lam: float

    def __len__(self):
        return self.points.shape[0]


def superlevel_E(field: DeltaField, lam: float) -> SuperLevelSet:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    threshold = (4.0 * lam) ** -0.5
    vals = field.values.ravel()
    with np.errstate(invalid="ignore"):
        keep = np.flatnonzero(vals >= threshold)
    pts = field.grid.points()[keep] if keep.size else np.zeros((0, field.dim))
    return SuperLevelSet(points=pts, delta=vals[keep], flat_index=keep, threshold=threshold, lam=float(lam))


def write_field_csv(field: DeltaField, path) -> None:
    """One row per grid node: coordinates, delta (6 significant digits), inside/outside."""
    d = field.dim
    pts = field.grid.points()
    vals = field.values.ravel()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{k + 1}" for k in range(d)] + ["delta", "flag"])
        for p, v in zip(pts, vals):
            inside = not np.isnan(v)
            writer.writerow([f"{c:.12g}" for c in p] + [f"{v:.6g}" if inside else "", "inside" if inside else "outside"])

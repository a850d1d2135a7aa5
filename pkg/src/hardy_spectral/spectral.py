"""Finite-difference Dirichlet Laplacian and the eigenvalue inequalities checked against it.

The operator is the (2d+1)-point stencil on the grid points strictly inside the
domain; neighbours outside are Dirichlet zeros (boundary by exclusion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from hardy_spectral.geometry import DEFAULT_NODE_BUDGET, Domain, DomainError, Grid
from hardy_spectral.hardy_field import DeltaField
from hardy_spectral.measure import DEFAULT_SAMPLES, sup_overlap_ratio
from hardy_spectral.quadrature import unit_ball_volume
from hardy_spectral.reports import BoundReport

__all__ = [
    "SolverError",
    "GridOperator",
    "SpectralResult",
    "assemble",
    "eigenvalues",
    "eigenvalues_covering",
    "lambda_min",
    "count_leq",
    "weyl_prediction",
    "riesz_mean",
    "lieb_bound",
    "remark2_witness_check",
    "dirichlet_energy",
    "hardy_quadratic_check",
    "hardy_two_grid",
    "hardy_family_check",
    "eigenfunction",
    "band_limited_function",
    "floss_rhs",
    "riesz_bound_rhs_2d",
]

DENSE_LIMIT = 2000
RESIDUAL_RTOL = 1e-8


class SolverError(RuntimeError):
    """Eigensolver failed to converge or to meet the residual bound."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class GridOperator:
    grid: Grid
    index: np.ndarray  # flat grid index of each unknown
    matrix: sp.csr_matrix
    _lu: object = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> LinearOperator:
        """A^-1 from a cached sparse LU factorization (shift-invert at sigma = 0)."""
        if self._lu is None:
            self._lu = splu(self.matrix.tocsc())
        n = self.size
        return LinearOperator((n, n), matvec=self._lu.solve, dtype=float)


def assemble(dom: Domain, h: float, budget: int = DEFAULT_NODE_BUDGET) -> GridOperator:
    grid = dom.grid(h, budget=budget)
    mask = grid.mask
    n = int(mask.sum())
    if n == 0:
        raise DomainError("no grid point lies inside the domain")
    d = grid.dim
    idx = np.full(grid.shape, -1, dtype=np.int64)
    idx[mask] = np.arange(n)
    inv_h2 = 1.0 / h ** 2
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [np.full(n, 2.0 * d * inv_h2)]
    for k in range(d):
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        a, b = idx[tuple(lo)], idx[tuple(hi)]
        both = (a >= 0) & (b >= 0)
        a, b = a[both], b[both]
        rows += [a, b]
        cols += [b, a]
        vals += [np.full(a.size, -inv_h2)] * 2
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return GridOperator(grid=grid, index=np.flatnonzero(mask.ravel()), matrix=A)


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray | None  # (n, k), unit 2-norm columns
    opr: GridOperator
    domain_hash: str
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def h(self) -> float:
        return self.opr.h

    @property
    def complete(self) -> bool:
        return self.k == self.opr.size

    def covers(self, lam: float) -> bool:
        return self.complete or lam <= self.eigenvalues[-1]


def eigenvalues(opr: GridOperator, k: int, vectors: bool = True) -> SpectralResult:
    """k smallest eigenvalues (ascending); dense below DENSE_LIMIT unknowns, shift-invert Lanczos above."""
    n = opr.size
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} outside [1, {n}]")
    A = opr.matrix
    if n <= DENSE_LIMIT:
        w, V = scipy.linalg.eigh(A.toarray(), subset_by_index=[0, k - 1])
    else:
        v0 = np.random.default_rng(0).standard_normal(n)
        try:
            w, V = eigsh(A, k=k, sigma=0.0, which="LM", v0=v0, OPinv=opr.inverse())
        except ArpackNoConvergence as exc:
            raise SolverError(f"shift-invert Lanczos did not converge for k = {k}") from exc
        order = np.argsort(w)
        w, V = w[order], V[:, order]
    res = np.linalg.norm(A @ V - V * w, axis=0) / np.maximum(np.abs(w), 1e-300)
    if np.any(res > RESIDUAL_RTOL):
        raise SolverError(f"residuals {res.max():.3g} exceed {RESIDUAL_RTOL}", residuals=res)
    return SpectralResult(eigenvalues=w, vectors=V if vectors else None, opr=opr,
                          domain_hash=opr.grid.domain.digest(), residuals=res)


def eigenvalues_covering(opr: GridOperator, lam: float, k0: int | None = None, vectors: bool = False) -> SpectralResult:
    """Enough eigenvalues that N(lam) is complete: largest computed exceeds lam."""
    if k0 is None:
        d = opr.grid.dim
        vol = opr.size * opr.h ** d
        k0 = int(1.5 * weyl_prediction(opr.grid.domain, lam, vol)) + 8
    k = min(k0, opr.size)
    while True:
        res = eigenvalues(opr, k, vectors=vectors)
        if res.eigenvalues[-1] > lam or res.complete:
            return res
        k = min(2 * k, opr.size)


def lambda_min(dom: Domain, h: float) -> float:
    return float(eigenvalues(assemble(dom, h), 1, vectors=False).eigenvalues[0])


def count_leq(res: SpectralResult, lam: float) -> int:
    """N(lam): eigenvalues in the closed interval [0, lam]."""
    if not res.covers(lam):
        raise ValueError(f"spectrum computed only up to {res.eigenvalues[-1]:.6g} < lambda = {lam}; raise k")
    return int(np.count_nonzero(res.eigenvalues <= lam))


def weyl_prediction(dom: Domain, lam: float, vol: float) -> float:
    d = dom.dim
    return (2.0 * math.pi) ** -d * unit_ball_volume(d) * vol * max(lam, 0.0) ** (d / 2)


def riesz_mean(res: SpectralResult, mu: float, gamma: float) -> float:
    """sum_k (mu - lambda_k)_+^gamma; gamma = 0 counts eigenvalues strictly below mu."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if not res.covers(mu):
        raise ValueError(f"spectrum computed only up to {res.eigenvalues[-1]:.6g} < mu = {mu}; raise k")
    gap = mu - res.eigenvalues
    gap = gap[gap > 0]
    if gamma == 0:
        return float(gap.size)
    return float(np.sum(gap ** gamma))


# ---------------------------------------------------------------------------
# Principal eigenvalue bounds
# ---------------------------------------------------------------------------


def lieb_bound(dom: Domain, rho: float, lam1: float | None = None, h: float | None = None,
               grid_h: float | None = None, samples: int = DEFAULT_SAMPLES, seed: int = 0,
               tol_disc: float = 1e-2) -> BoundReport:
    """lambda_1 >= d / (4 rho^2) * (1 - sup_x |Omega n B_rho(x)| / |B_rho(x)|)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    if lam1 is None:
        if h is None:
            raise ValueError("give lam1 or a grid spacing h for the reference eigenvalue")
        lam1 = lambda_min(dom, h)
    d = dom.dim
    sup = sup_overlap_ratio(dom, rho, grid_h=grid_h, samples=samples, seed=seed)
    scale = d / (4.0 * rho ** 2)
    bound = scale * (1.0 - sup.value)
    mc_slack = 3.0 * scale * sup.stderr
    return BoundReport(
        name="lieb",
        bound_value=bound,
        reference_value=lam1,
        passed=bool(bound <= lam1 * (1.0 + tol_disc) + mc_slack),
        parameters={"rho": rho, "d": d, "h": h},
        tolerances={"tol_disc": tol_disc, "mc_slack": mc_slack},
        details={"sup_overlap": sup.to_dict()},
    )


def remark2_witness_check(dom: Domain, field: DeltaField, res: SpectralResult, j: int,
                          tol: float = 1e-6) -> BoundReport:
    """A point x in the support of the j-th eigenvector with lambda_j >= 1/(4 delta(x)^2)."""
    if res.vectors is None or not 1 <= j <= res.k:
        raise ValueError(f"eigenvector {j} not computed")
    if not field.grid.same_as(res.opr.grid):
        raise ValueError("delta field and eigenvector live on different grids")
    v = res.vectors[:, j - 1]
    support = np.abs(v) > 1e-12 * np.abs(v).max()
    delta = field.values.ravel()[res.opr.index[support]]
    i = int(np.argmax(delta))
    lam = float(res.eigenvalues[j - 1])
    margin = lam * 4.0 * delta[i] ** 2 - 1.0
    x_star = field.grid.points()[res.opr.index[support][i]]
    return BoundReport(
        name="remark2_witness",
        bound_value=1.0 / (4.0 * delta[i] ** 2),
        reference_value=lam,
        passed=bool(margin >= -tol),
        parameters={"j": j, "h": res.h},
        tolerances={"tol": tol},
        details={"witness": x_star.tolist(), "delta_witness": float(delta[i]), "margin": float(margin)},
    )


# ---------------------------------------------------------------------------
# Hardy inequality
# ---------------------------------------------------------------------------


def dirichlet_energy(u: np.ndarray, h: float) -> float:
    """Forward-difference energy sum |grad_h u|^2 h^d, with zero padding outside the grid."""
    d = u.ndim
    up = np.pad(u, 1)
    total = 0.0
    for k in range(d):
        total += float(np.sum(np.diff(up, axis=k) ** 2))
    return total * h ** (d - 2)


def hardy_quadratic_check(dom: Domain, field: DeltaField, u: np.ndarray, h: float | None = None,
                          tol_h: float = 0.0) -> BoundReport:
    """int |grad u|^2  >=  1/4 int delta^-2 |u|^2, both sides as grid sums."""
    h = field.h if h is None else h
    u = np.asarray(u, dtype=float)
    if u.shape != field.grid.shape or h != field.h:
        raise ValueError("u and the delta field must share one grid")
    mask = field.mask
    if np.any(u[~mask] != 0):
        raise ValueError("u must vanish at grid points outside the domain")
    lhs = dirichlet_energy(u, h)
    with np.errstate(divide="ignore"):
        weight = 0.25 / field.values[mask] ** 2
    rhs = float(np.sum(weight * u[mask] ** 2)) * h ** field.dim
    if rhs == 0.0:
        ratio, passed = math.nan, None
    else:
        ratio = lhs / rhs
        passed = bool(ratio >= 1.0 - tol_h)
    return BoundReport(
        name="hardy",
        bound_value=rhs,
        reference_value=lhs,
        passed=passed,
        parameters={"h": h, "d": field.dim},
        tolerances={"tol_h": tol_h},
        details={"lhs": lhs, "rhs": rhs, "hardy_ratio": ratio, "vacuous": rhs == 0.0},
    )


def hardy_two_grid(dom: Domain, u: Callable[[np.ndarray], np.ndarray], field_h: DeltaField,
                   field_h2: DeltaField, taper: float | None = None) -> BoundReport:
    """Hardy check for a function u(x) sampled on two grids (h, h/2).

    tol_h = 2 |ratio(h) - ratio(h/2)| + 1e-6 absorbs O(h) boundary effects of
    the exclusion discretization; the verdict is ratio(h) >= 1 - tol_h.
    With ``taper = l`` the function is multiplied by min(1, delta / l), which
    vanishes on the boundary, so u need not vanish there itself. The ratio of
    the untapered function at h is kept as ``ratio_untapered``.
    """
    reports = []
    raw = math.nan
    for fld in (field_h, field_h2):
        vals = np.zeros(fld.grid.shape)
        vals[fld.mask] = u(fld.grid.interior_points())
        if taper is not None:
            if fld is field_h:
                raw = hardy_quadratic_check(dom, fld, vals).details["hardy_ratio"]
            vals[fld.mask] *= np.minimum(1.0, fld.values[fld.mask] / taper)
        reports.append(hardy_quadratic_check(dom, fld, vals))
    r1, r2 = (r.details["hardy_ratio"] for r in reports)
    if math.isnan(r1) or math.isnan(r2):
        out = reports[0]
        out.details["ratio_half"] = r2
        return out
    tol_h = 2.0 * abs(r1 - r2) + 1e-6
    out = reports[0]
    out.passed = bool(r1 >= 1.0 - tol_h)
    out.tolerances["tol_h"] = tol_h
    out.details["ratio_half"] = r2
    out.details["ratio_untapered"] = raw
    out.parameters["h_half"] = field_h2.h
    out.parameters["taper"] = taper
    return out


def eigenfunction(res: SpectralResult, j: int) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-linear extension of the j-th discrete eigenvector (zero outside the domain)."""
    if res.vectors is None:
        raise ValueError("eigenvectors not computed")
    grid = res.opr.grid
    vals = np.zeros(int(np.prod(grid.shape)))
    vals[res.opr.index] = res.vectors[:, j - 1]
    interp = RegularGridInterpolator(grid.axes(), vals.reshape(grid.shape), method="linear",
                                     bounds_error=False, fill_value=0.0)
    dom = grid.domain

    def u(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.where(dom.contains(points), interp(points), 0.0)

    return u


def band_limited_function(dom: Domain, rng: np.random.Generator, kmax: int = 4) -> Callable[[np.ndarray], np.ndarray]:
    """Random combination of bbox sine modes with frequencies <= kmax, cut off outside the domain.

    The modes vanish on the bbox only; pass the result through ``hardy_two_grid(..., taper=l)``
    when the domain boundary is not the bbox boundary.
    """
    d = dom.dim
    modes = np.stack(np.meshgrid(*([np.arange(1, kmax + 1)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    coef = rng.standard_normal(len(modes)) / np.sum(modes ** 2, axis=1)
    lo, length = dom.bbox[:, 0], dom.lengths

    def u(points: np.ndarray) -> np.ndarray:
        s = (np.asarray(points, dtype=float) - lo) / length * math.pi
        out = np.zeros(s.shape[0])
        for c, m in zip(coef, modes):
            out += c * np.prod(np.sin(m * s), axis=1)
        return np.where(dom.contains(points), out, 0.0)

    return u


def hardy_family_check(dom: Domain, field_h: DeltaField, field_h2: DeltaField, n_eigen: int = 5,
                       n_random: int = 20, seed: int = 0) -> list[BoundReport]:
    """Two-grid Hardy checks on eigenfunctions 1..n_eigen and n_random band-limited functions.

    Eigenfunctions are tapered by min(1, delta / h) and band-limited functions by delta / diam,
    so every test function vanishes on the boundary.
    """
    out = []
    if n_eigen:
        opr = assemble(dom, field_h.h)
        res = eigenvalues(opr, min(n_eigen, opr.size))
        for j in range(1, res.k + 1):
            rep = hardy_two_grid(dom, eigenfunction(res, j), field_h, field_h2, taper=field_h.h)
            rep.parameters["test_function"] = f"eigenfunction {j}"
            out.append(rep)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(5,)))
    for i in range(n_random):
        rep = hardy_two_grid(dom, band_limited_function(dom, rng), field_h, field_h2, taper=dom.diam)
        rep.parameters["test_function"] = f"band-limited {i + 1}"
        out.append(rep)
    return out


# ---------------------------------------------------------------------------
# Counting and Riesz-mean bounds in terms of delta
# ---------------------------------------------------------------------------


def _positive_part_integral(field: DeltaField, energy: float, power: float) -> float:
    _, delta = field.interior()
    with np.errstate(divide="ignore"):
        inner = energy - 0.25 / delta ** 2
    return float(np.sum(np.clip(inner, 0.0, None) ** power)) * field.h ** field.dim


def floss_rhs(field: DeltaField, lam: float, constant: float | None = None,
              res: SpectralResult | None = None) -> BoundReport:
    """N(lam) <= L_d int (lam - 1/(4 delta^2))_+^{d/2} dx, with the implied constant.

    L_d has no published numerical value here: with ``constant=None`` the
    integral is reported with constant 1 and no verdict.
    """
    d = field.dim
    integral = _positive_part_integral(field, lam, d / 2)
    rhs = (1.0 if constant is None else constant) * integral
    count = count_leq(res, lam) if res is not None else None
    implied = count / integral if count is not None and integral > 0 else math.nan
    passed = None if constant is None or count is None else bool(count <= rhs)
    return BoundReport(
        name="floss",
        bound_value=rhs,
        reference_value=math.nan if count is None else float(count),
        passed=passed,
        parameters={"lambda": lam, "constant": constant, "d": d, "h": field.h, "dim_at_least_3": d >= 3},
        details={"integral": integral, "count": count, "implied_constant": implied},
    )


def riesz_bound_rhs_2d(field: DeltaField, mu: float, gamma: float, constant: float | None = None,
                       res: SpectralResult | None = None, mu_factor: float = 2.0) -> BoundReport:
    """Tr(-Delta - mu)_-^gamma <= L_{gamma,2} int (mu - 1/(4 delta^2))_+^{gamma+1} dx in d = 2.

    Also evaluates the counting chain at lam = mu / mu_factor:
    N(lam) <= lam^-gamma Tr(-Delta - mu)_-^gamma <= lam^-gamma * rhs.
    """
    if field.dim != 2:
        raise ValueError("the Riesz-mean route is stated for d = 2")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    integral = _positive_part_integral(field, mu, gamma + 1)
    rhs = (1.0 if constant is None else constant) * integral
    details: dict = {"integral": integral}
    reference = math.nan
    passed = None
    if res is not None:
        riesz = riesz_mean(res, mu, gamma)
        lam = mu / mu_factor
        count = count_leq(res, lam)
        reference = riesz
        details.update({
            "riesz_mean": riesz,
            "implied_constant": riesz / integral if integral > 0 else math.nan,
            "chain_lambda": lam,
            "chain_count": count,
            "chain_riesz_over_lambda_gamma": riesz / lam ** gamma,
            "chain_rhs_over_lambda_gamma": rhs / lam ** gamma,
            "chain_count_ok": bool(count <= riesz / lam ** gamma),
        })
        if constant is not None:
            passed = bool(riesz <= rhs)
    return BoundReport(
        name="riesz_2d",
        bound_value=rhs,
        reference_value=reference,
        passed=passed,
        parameters={"mu": mu, "gamma": gamma, "constant": constant, "mu_factor": mu_factor, "h": field.h},
        details=details,
    )

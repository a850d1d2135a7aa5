"""Overlap ratios |Omega n B_rho(x)| / |B_rho(x)| and the quantities built on them.

Monte Carlo everywhere: intersections of CSG sets with balls have no closed
form in general. A single integer seed expands into independent streams
(``numpy.random.SeedSequence`` spawn keys), so results are reproducible for a
fixed seed and a fixed partition count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hardy_spectral.geometry import Domain, DomainError
from hardy_spectral.reports import BoundReport

__all__ = [
    "OverlapEstimate",
    "RhoTheta",
    "ball_samples",
    "ball_overlap",
    "lemma1_check",
    "lemma1_rhs",
    "sup_overlap_ratio",
    "rho_theta",
    "domain_volume",
    "overlap_fractions",
]

DEFAULT_SAMPLES = 100_000
DEFAULT_PARTITIONS = 4
# cap on points per membership call
_CHUNK = 2_000_000

# spawn-key prefixes for independent streams
_STREAM_OVERLAP = 1
_STREAM_SUP = 2
_STREAM_VOLUME = 3
_STREAM_BATCH = 4


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


@dataclass
class OverlapEstimate:
    value: float
    stderr: float
    samples: int
    method: str
    seed: int | None = None
    location: np.ndarray | None = None
    lipschitz_slack: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"overlap ratio {self.value} outside [0, 1]")

    def to_dict(self) -> dict:
        out = {"value": self.value, "stderr": self.stderr, "samples": self.samples, "method": self.method,
               "seed": self.seed}
        if self.location is not None:
            out["location"] = np.asarray(self.location).tolist()
        if self.lipschitz_slack is not None:
            out["lipschitz_slack"] = self.lipschitz_slack
        out.update(self.extra)
        return out


def ball_samples(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform in the unit ball of R^d."""
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(n) ** (1.0 / d)
    return g * r[:, None]


def _binomial_stderr(p, n: int):
    """sqrt(p(1-p)/n) with p kept half a count away from 0 and 1, so it never vanishes."""
    eps = 0.5 / (n + 1)
    q = np.clip(p, eps, 1.0 - eps)
    return np.sqrt(q * (1.0 - q) / n)


def _fractions_inside(dom: Domain, centers: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Fraction of ``center + offset`` inside the domain, for each center."""
    out = np.empty(len(centers))
    per = max(1, _CHUNK // max(len(offsets), 1))
    for s in range(0, len(centers), per):
        c = centers[s:s + per]
        inside = dom.contains(c[:, None, :] + offsets[None, :, :])
        out[s:s + per] = inside.mean(axis=1)
    return out


def overlap_fractions(dom: Domain, centers: np.ndarray, rho: float, samples: int = DEFAULT_SAMPLES,
                      seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Overlap ratios for many balls of one radius, sharing one set of sample offsets.

    Returns (values, stderrs). Each estimate is unbiased; estimates for
    different centers are correlated.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, dom.dim)
    offsets = rho * ball_samples(dom.dim, samples, _rng(seed, _STREAM_BATCH))
    vals = _fractions_inside(dom, centers, offsets)
    return vals, _binomial_stderr(vals, samples)


def _grid_overlap(dom: Domain, x: np.ndarray, rho: float, samples: int) -> tuple[float, float]:
    """Lattice-point count in the ball at two resolutions; spread as error proxy."""
    d = dom.dim
    vals = []
    for n_target in (max(samples // 2 ** d, 8), samples):
        # lattice spacing giving about n_target points inside the ball
        a = rho * (math.pi ** (d / 2) / math.gamma(d / 2 + 1) / n_target) ** (1.0 / d)
        k = int(math.ceil(rho / a))
        ticks = (np.arange(-k, k + 1) + 0.5) * a
        mesh = np.stack(np.meshgrid(*([ticks] * d), indexing="ij"), axis=-1).reshape(-1, d)
        mesh = mesh[np.sum(mesh ** 2, axis=1) < rho ** 2]
        vals.append(float(np.mean(dom.contains(x + mesh))))
    return vals[1], abs(vals[1] - vals[0])


def ball_overlap(dom: Domain, x, rho: float, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                 method: str = "monte-carlo", partitions: int = DEFAULT_PARTITIONS) -> OverlapEstimate:
    """Estimate |Omega n B_rho(x)| / |B_rho(x)|; x need not lie in Omega."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != dom.dim:
        raise DomainError(f"expected a point with {dom.dim} coordinates")
    if method == "grid":
        value, err = _grid_overlap(dom, x, rho, samples)
        return OverlapEstimate(value, err, samples, "grid", None)
    if method != "monte-carlo":
        raise ValueError(f"unknown overlap method {method!r}")
    counts = 0
    sizes = np.full(partitions, samples // partitions)
    sizes[: samples % partitions] += 1
    for p, n in enumerate(sizes):
        offsets = rho * ball_samples(dom.dim, int(n), _rng(seed, _STREAM_OVERLAP, p))
        counts += int(np.count_nonzero(dom.contains(x + offsets)))
    value = counts / samples
    return OverlapEstimate(value, float(_binomial_stderr(value, samples)), samples, "monte-carlo", int(seed))


def lemma1_rhs(rho: float, delta_x: float, d: int) -> float:
    """max(0, 1 - rho^2 / (d delta^2)), the guaranteed overlap fraction."""
    if math.isinf(delta_x):
        return 1.0
    return max(0.0, 1.0 - rho ** 2 / (d * delta_x ** 2))


def lemma1_check(dom: Domain, x, rho: float, delta_x: float, samples: int = DEFAULT_SAMPLES,
                 seed: int = 0, escalate: int = 10) -> BoundReport:
    """Measured overlap vs. 1 - rho^2 / (d delta^2); margins under 3 stderr are re-sampled ``escalate`` times larger."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not dom.contains(x):
        raise DomainError(f"point {x.tolist()} is not in the domain")
    rhs = lemma1_rhs(rho, delta_x, dom.dim)
    est = ball_overlap(dom, x, rho, samples=samples, seed=seed)
    if escalate > 1 and rhs > 0 and est.value - rhs < 3.0 * est.stderr:
        samples *= escalate
        est = ball_overlap(dom, x, rho, samples=samples, seed=seed)
    return BoundReport(
        name="lemma1",
        bound_value=rhs,
        reference_value=est.value,
        passed=bool(est.value >= rhs - 3.0 * est.stderr),
        parameters={"x": x.tolist(), "rho": rho, "delta": delta_x, "d": dom.dim},
        tolerances={"stderr_multiple": 3.0},
        details={"lhs": est.value, "rhs": rhs, "stderr": est.stderr, "samples": samples, "seed": seed,
                 "vacuous": rhs == 0.0},
    )


def sup_overlap_ratio(dom: Domain, rho: float, grid_h: float | None = None, samples: int = DEFAULT_SAMPLES,
                      seed: int = 0, scan_samples: int = 8192, rescore: int = 4) -> OverlapEstimate:
    """sup over x in Omega of the overlap ratio, by grid scan plus one halving level.

    ``grid_h`` defaults to min(rho/2, diam/64).
    The coarse scan uses ``scan_samples`` points per center; the best
    ``rescore`` centers and the 3^d half-step stencil around the winner are
    re-estimated with ``samples`` points. All centers share the same sample
    offsets (common random numbers). The attached slack d * grid_h / rho
    bounds what the grid can miss.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if grid_h is None:
        grid_h = min(rho / 2, dom.diam / 64) if dom.has_window else rho / 2
    grid_h = float(grid_h)
    if grid_h > rho / 2 * (1 + 1e-12):
        raise ValueError(f"grid_h = {grid_h} exceeds rho/2 = {rho / 2}")
    d = dom.dim
    centers = dom.grid(grid_h).interior_points()
    # thin sets can slip between coarse nodes; refine until the scan sees the set
    for _ in range(12):
        if len(centers):
            break
        grid_h /= 2
        centers = dom.grid(grid_h).interior_points()
    if len(centers) == 0:
        raise DomainError("no grid point of the sup scan lies inside the domain")
    rng = _rng(seed, _STREAM_SUP)
    offsets = rho * ball_samples(d, samples, rng)
    coarse = _fractions_inside(dom, centers, offsets[: min(scan_samples, samples)])
    top = np.argsort(-coarse, kind="stable")[:rescore]
    fine = _fractions_inside(dom, centers[top], offsets)
    best = centers[top[int(np.argmax(fine))]]
    steps = np.stack(np.meshgrid(*([np.array([-0.5, 0.0, 0.5])] * d), indexing="ij"), axis=-1).reshape(-1, d)
    local = best + grid_h * steps
    local = local[np.atleast_1d(dom.contains(local))]
    vals = _fractions_inside(dom, local, offsets)
    i = int(np.argmax(vals))
    value = float(vals[i])
    return OverlapEstimate(value, float(_binomial_stderr(value, samples)), samples, "monte-carlo", int(seed),
                           location=local[i], lipschitz_slack=d * grid_h / rho,
                           extra={"grid_h": grid_h, "rho": rho, "scan_points": int(len(centers))})


@dataclass
class RhoTheta:
    value: float  # +inf when no rho in the grid qualifies
    theta: float
    rhos: np.ndarray
    sups: list[OverlapEstimate]
    crossing: int | None
    later_violations: list[float]

    def to_dict(self) -> dict:
        return {
            "rho_theta": self.value,
            "theta": self.theta,
            "found": self.crossing is not None,
            "later_violations": self.later_violations,
            "scan": [{"rho": r, "sup": s.value, "stderr": s.stderr, "samples": s.samples}
                     for r, s in zip(self.rhos, self.sups)],
        }


def rho_theta(dom: Domain, theta: float, rho_grid, grid_h: float | None = None,
              samples: int = DEFAULT_SAMPLES, seed: int = 0, escalate: int = 10) -> RhoTheta:
    """First rho in ``rho_grid`` whose sup overlap ratio is <= theta.

    The scan is exhaustive; monotonicity in rho is not assumed, and any later
    rho with sup ratio above theta is reported. Estimates within 3 stderr of
    theta are repeated with ``escalate`` times more samples.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    rhos = np.asarray(rho_grid, dtype=float)
    if rhos.size == 0 or np.any(np.diff(rhos) <= 0):
        raise ValueError("rho_grid must be nonempty and strictly ascending")
    sups = []
    crossing = None
    later = []
    for k, rho in enumerate(rhos):
        est = sup_overlap_ratio(dom, rho, grid_h=grid_h, samples=samples, seed=seed)
        if abs(est.value - theta) < 3.0 * est.stderr and escalate > 1:
            est = sup_overlap_ratio(dom, rho, grid_h=grid_h, samples=samples * escalate, seed=seed)
        sups.append(est)
        ok = est.value <= theta
        if ok and crossing is None:
            crossing = k
        elif not ok and crossing is not None:
            later.append(float(rho))
    value = float(rhos[crossing]) if crossing is not None else math.inf
    return RhoTheta(value, theta, rhos, sups, crossing, later)


def domain_volume(dom: Domain, samples: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo |Omega| over the bbox window: (volume, stderr)."""
    if not dom.has_window:
        raise DomainError("volume estimate needs a finite bbox window")
    box_vol = float(np.prod(dom.lengths))
    rng = _rng(seed, _STREAM_VOLUME)
    inside = 0
    for s in range(0, samples, _CHUNK):
        n = min(_CHUNK, samples - s)
        pts = dom.bbox[:, 0] + rng.random((n, dom.dim)) * dom.lengths
        inside += int(np.count_nonzero(dom.contains(pts)))
    p = inside / samples
    return box_vol * p, box_vol * float(_binomial_stderr(p, samples))

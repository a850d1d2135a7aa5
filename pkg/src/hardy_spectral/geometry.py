"""Open sets in R^d (d = 1, 2, 3) built from convex primitives by CSG.

Every primitive is convex, so the trace of a primitive on a line is a single
open interval. The trace of a CSG tree is therefore piecewise constant between
primitive endpoints, which makes directional exit distances exact: the exit
is the first endpoint at which the tree evaluates to "outside". Marching with
bisection is kept as an independent route (``method="march"``).

Boundary convention: primitives are open. ``Complement`` is the complement of
the closure, so ``a - b`` removes the closed set ``b`` and every tree is open.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable, Sequence

import numpy as np

from hardy_spectral import _rays

__all__ = [
    "DomainError",
    "Box",
    "Ball",
    "HalfSpace",
    "Polygon",
    "Union",
    "Intersection",
    "Complement",
    "Difference",
    "Domain",
    "Grid",
    "node_from_config",
    "domain_from_config",
    "load_domain",
    "CORPUS",
    "corpus_config",
    "corpus_domain",
]

DEFAULT_NODE_BUDGET = 10_000_000


class DomainError(ValueError):
    """Invalid domain description or a query outside the domain's contract."""


# ---------------------------------------------------------------------------
# CSG nodes
# ---------------------------------------------------------------------------


class Node:
    """Base class for CSG expressions; supports ``|``, ``&``, ``-`` and ``~``."""

    def __or__(self, other: Node) -> Node:
        return Union((self, other))

    def __and__(self, other: Node) -> Node:
        return Intersection((self, other))

    def __sub__(self, other: Node) -> Node:
        return Difference(self, other)

    def __invert__(self) -> Node:
        return Complement(self)

    def primitives(self) -> list[Node]:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


def _vec(values: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True, eq=False)
class Box(Node):
    """Open axis-aligned box; bounds may be infinite."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not 1 <= len(b) <= 3:
            raise DomainError("box must have 1 to 3 axes")
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.dim
        rows, rhs = [], []
        for k, (lo, hi) in enumerate(self.bounds):
            e = np.zeros(d)
            e[k] = 1.0
            if math.isfinite(hi):
                rows.append(e)
                rhs.append(hi)
            if math.isfinite(lo):
                rows.append(-e)
                rhs.append(-lo)
        return np.array(rows).reshape(-1, d), np.array(rhs)

    def extent(self) -> np.ndarray:
        return np.array(self.bounds, dtype=float)

    def primitives(self):
        return [self]

    def to_config(self):
        return {"box": [list(b) for b in self.bounds]}


@dataclass(frozen=True, eq=False)
class Ball(Node):
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        if not 1 <= len(self.center) <= 3:
            raise DomainError("ball center must have 1 to 3 coordinates")

    @property
    def dim(self) -> int:
        return len(self.center)

    def extent(self) -> np.ndarray:
        c = np.array(self.center)
        return np.stack([c - self.radius, c + self.radius], axis=1)

    def primitives(self):
        return [self]

    def to_config(self):
        return {"ball": {"center": list(self.center), "radius": self.radius}}


@dataclass(frozen=True, eq=False)
class HalfSpace(Node):
    """The open half-space ``{y : normal . y > offset}``."""

    normal: tuple[float, ...]
    offset: float = 0.0

    def __post_init__(self):
        n = np.array(_vec(self.normal))
        if not 1 <= n.size <= 3 or not np.any(n):
            raise DomainError("half-space normal must be a nonzero 1-3 vector")
        object.__setattr__(self, "normal", tuple(n))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def halfspaces(self):
        return -np.array([self.normal]), np.array([-self.offset])

    def extent(self) -> np.ndarray:
        n = np.array(self.normal)
        ext = np.tile([-np.inf, np.inf], (self.dim, 1))
        nz = np.flatnonzero(n)
        if nz.size == 1:
            k = nz[0]
            if n[k] > 0:
                ext[k, 0] = self.offset / n[k]
            else:
                ext[k, 1] = self.offset / n[k]
        return ext

    def primitives(self):
        return [self]

    def to_config(self):
        return {"halfspace": {"normal": list(self.normal), "offset": self.offset}}


@dataclass(frozen=True, eq=False)
class Polygon(Node):
    """Open convex polygon in the plane; vertices in either orientation."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise DomainError("polygon needs at least 3 planar vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if not (np.all(cross > 0) or np.all(cross < 0)):
            raise DomainError("polygon must be strictly convex; build other shapes by union")
        if cross[0] < 0:
            v = v[::-1]
        object.__setattr__(self, "vertices", tuple(map(tuple, v)))

    dim = 2

    def halfspaces(self):
        v = np.array(self.vertices)
        e = np.roll(v, -1, axis=0) - v
        # inside lies to the left of each counter-clockwise edge
        rows = np.stack([e[:, 1], -e[:, 0]], axis=1)
        return rows, np.einsum("ij,ij->i", rows, v)

    def extent(self):
        v = np.array(self.vertices)
        return np.stack([v.min(axis=0), v.max(axis=0)], axis=1)

    def primitives(self):
        return [self]

    def to_config(self):
        return {"polygon": [list(p) for p in self.vertices]}


@dataclass(frozen=True, eq=False)
class Union(Node):
    parts: tuple[Node, ...]

    def __post_init__(self):
        if len(self.parts) < 1:
            raise DomainError("union needs at least one operand")
        object.__setattr__(self, "parts", tuple(self.parts))

    def primitives(self):
        return [p for part in self.parts for p in part.primitives()]

    def to_config(self):
        return {"op": "union", "args": [p.to_config() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Intersection(Node):
    parts: tuple[Node, ...]

    def __post_init__(self):
        if len(self.parts) < 1:
            raise DomainError("intersection needs at least one operand")
        object.__setattr__(self, "parts", tuple(self.parts))

    def primitives(self):
        return [p for part in self.parts for p in part.primitives()]

    def to_config(self):
        return {"op": "intersection", "args": [p.to_config() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Complement(Node):
    part: Node

    def primitives(self):
        return self.part.primitives()

    def to_config(self):
        return {"op": "complement", "a": self.part.to_config()}


@dataclass(frozen=True, eq=False)
class Difference(Node):
    a: Node
    b: Node

    def primitives(self):
        return self.a.primitives() + self.b.primitives()

    def to_config(self):
        return {"op": "difference", "a": self.a.to_config(), "b": self.b.to_config()}


# ---------------------------------------------------------------------------
# Compilation to flat arrays (shared by numpy membership and the ray kernel)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Compiled:
    kind: np.ndarray  # 0 = polytope rows, 1 = ball
    row_start: np.ndarray
    row_end: np.ndarray
    A: np.ndarray
    b: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    prog_op: np.ndarray
    prog_arg: np.ndarray


def _compile(tree: Node, dim: int) -> _Compiled:
    prims: list[Node] = []
    ops: list[tuple[int, int]] = []

    def emit(node: Node):
        if isinstance(node, (Box, Ball, HalfSpace, Polygon)):
            ops.append((_rays.OP_PUSH, len(prims)))
            prims.append(node)
        elif isinstance(node, (Union, Intersection)):
            code = _rays.OP_UNION if isinstance(node, Union) else _rays.OP_INTER
            emit(node.parts[0])
            for part in node.parts[1:]:
                emit(part)
                ops.append((code, 0))
        elif isinstance(node, Complement):
            emit(node.part)
            ops.append((_rays.OP_COMPL, 0))
        elif isinstance(node, Difference):
            emit(node.a)
            emit(node.b)
            ops.append((_rays.OP_DIFF, 0))
        else:
            raise DomainError(f"unknown CSG node {type(node).__name__}")

    emit(tree)
    kind, start, end, rows, rhs, centers, radii = [], [], [], [], [], [], []
    n_rows = 0
    for p in prims:
        if isinstance(p, Ball):
            kind.append(1)
            centers.append(p.center)
            radii.append(p.radius)
            start.append(len(centers) - 1)
            end.append(len(centers))
        else:
            A, b = p.halfspaces()
            kind.append(0)
            start.append(n_rows)
            n_rows += len(b)
            end.append(n_rows)
            rows.append(A)
            rhs.append(b)
    return _Compiled(
        kind=np.array(kind, dtype=np.int64),
        row_start=np.array(start, dtype=np.int64),
        row_end=np.array(end, dtype=np.int64),
        A=np.vstack(rows) if rows else np.zeros((0, dim)),
        b=np.concatenate(rhs) if rhs else np.zeros(0),
        centers=np.array(centers, dtype=float).reshape(-1, dim),
        radii=np.array(radii, dtype=float),
        prog_op=np.array([o for o, _ in ops], dtype=np.int64),
        prog_arg=np.array([a for _, a in ops], dtype=np.int64),
    )


def _extent(node: Node, dim: int) -> np.ndarray:
    if isinstance(node, (Box, Ball, HalfSpace, Polygon)):
        return node.extent()
    if isinstance(node, Union):
        exts = [_extent(p, dim) for p in node.parts]
        return np.stack([np.min([e[:, 0] for e in exts], axis=0), np.max([e[:, 1] for e in exts], axis=0)], axis=1)
    if isinstance(node, Intersection):
        exts = [_extent(p, dim) for p in node.parts]
        return np.stack([np.max([e[:, 0] for e in exts], axis=0), np.min([e[:, 1] for e in exts], axis=0)], axis=1)
    if isinstance(node, Difference):
        return _extent(node.a, dim)
    return np.tile([-np.inf, np.inf], (dim, 1))


# ---------------------------------------------------------------------------
# Domain
# ---------------------------------------------------------------------------


class Domain:
    """An open set given by a CSG tree, with a bounding box for grid work.

    ``bbox`` defaults to the extent derived from the tree. Unbounded sets
    (half-spaces, complements) need an explicit ``bbox`` window before any
    grid-based operation; pointwise queries work without one.
    """

    def __init__(self, tree: Node, bbox: Sequence[Sequence[float]] | None = None,
                 ray_step: float | None = None, name: str | None = None):
        dims = {p.dim for p in tree.primitives()}
        if len(dims) != 1:
            raise DomainError(f"primitives disagree on dimension: {sorted(dims)}")
        self.dim = dims.pop()
        self.tree = tree
        self.name = name
        self._c = _compile(tree, self.dim)
        ext = _extent(tree, self.dim)
        self.bounded = bool(np.all(np.isfinite(ext)))
        if bbox is None:
            if not self.bounded:
                bbox = np.where(np.isfinite(ext), ext, np.nan)
            else:
                bbox = ext
        bbox = np.array(bbox, dtype=float).reshape(self.dim, 2)
        # empty intersections give lo > hi
        bbox[:, 1] = np.maximum(bbox[:, 1], bbox[:, 0])
        self.bbox = bbox
        self._ray_step = None if ray_step is None else float(ray_step)
        if self._ray_step is not None and not self._ray_step > 0:
            raise DomainError("ray_step must be positive")

    # -- basic geometry ----------------------------------------------------

    @property
    def has_window(self) -> bool:
        return bool(np.all(np.isfinite(self.bbox)))

    @property
    def lengths(self) -> np.ndarray:
        return self.bbox[:, 1] - self.bbox[:, 0]

    @property
    def diam(self) -> float:
        return float(np.linalg.norm(self.lengths))

    @property
    def ray_step(self) -> float:
        if self._ray_step is not None:
            return self._ray_step
        if not self.has_window:
            raise DomainError("unbounded domain needs a bbox window or explicit ray_step")
        return self.diam / 1024

    def scaled(self, s: float) -> Domain:
        """The domain ``s * Omega`` (used for scaling checks)."""
        cfg = _scale_config(self.tree.to_config(), s)
        return Domain(node_from_config(cfg), bbox=None if not self.has_window else self.bbox * s,
                      name=None if self.name is None else f"{self.name}*{s:g}")

    def to_config(self) -> dict:
        cfg: dict[str, Any] = {"dim": self.dim, "tree": self.tree.to_config()}
        if self.has_window:
            cfg["bbox"] = self.bbox.tolist()
        if self._ray_step is not None:
            cfg["ray_step"] = self._ray_step
        return cfg

    def digest(self) -> str:
        text = json.dumps(self.to_config(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def __repr__(self):
        label = self.name or "Domain"
        return f"<{label} dim={self.dim} bbox={self.bbox.tolist()}>"

    # -- membership --------------------------------------------------------

    def _points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1)
        if x.shape[-1] != self.dim:
            raise DomainError(f"expected points with {self.dim} coordinates, got shape {x.shape}")
        return x

    def contains(self, x) -> np.ndarray | bool:
        """Open-set membership for one point or an array of shape (..., dim)."""
        x = self._points(x)
        single = x.ndim == 1
        pts = x.reshape(-1, self.dim)
        c = self._c
        prim_open, prim_closed = [], []
        for p in range(len(c.kind)):
            lo, hi = c.row_start[p], c.row_end[p]
            if c.kind[p] == 1:
                r2 = np.sum((pts - c.centers[lo]) ** 2, axis=1)
                rad2 = c.radii[lo] ** 2
                prim_open.append(r2 < rad2)
                prim_closed.append(r2 <= rad2)
            else:
                slack = c.b[lo:hi] - pts @ c.A[lo:hi].T
                prim_open.append(np.all(slack > 0, axis=1))
                prim_closed.append(np.all(slack >= 0, axis=1))
        stack: list[tuple[np.ndarray, np.ndarray]] = []
        for op, arg in zip(c.prog_op, c.prog_arg):
            if op == _rays.OP_PUSH:
                stack.append((prim_open[arg], prim_closed[arg]))
            elif op == _rays.OP_COMPL:
                o, cl = stack.pop()
                stack.append((~cl, ~o))
            else:
                bo, bc = stack.pop()
                ao, ac = stack.pop()
                if op == _rays.OP_UNION:
                    stack.append((ao | bo, ac | bc))
                elif op == _rays.OP_INTER:
                    stack.append((ao & bo, ac & bc))
                else:
                    stack.append((ao & ~bc, ac & ~bo))
        inside = stack.pop()[0]
        if single:
            return bool(inside[0])
        return inside.reshape(x.shape[:-1])

    # -- rays --------------------------------------------------------------

    def _kernel_args(self):
        c = self._c
        return (c.kind, c.row_start, c.row_end, c.A, c.b, c.centers, c.radii, c.prog_op, c.prog_arg)

    def _rays(self, x, w) -> tuple[np.ndarray, np.ndarray, tuple]:
        x = self._points(x)
        w = self._points(w)
        shape = np.broadcast_shapes(x.shape, w.shape)
        xs = np.ascontiguousarray(np.broadcast_to(x, shape).reshape(-1, self.dim))
        ws = np.ascontiguousarray(np.broadcast_to(w, shape).reshape(-1, self.dim))
        norms = np.linalg.norm(ws, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise DomainError("direction vectors must have unit norm")
        return xs, ws, shape[:-1]

    def _check_inside(self, xs: np.ndarray):
        inside = np.atleast_1d(self.contains(xs))
        if not np.all(inside):
            bad = xs[np.flatnonzero(~inside)[0]]
            raise DomainError(f"point {bad.tolist()} is not in the domain")

    def exit_distance(self, x, w, method: str = "exact"):
        """One-sided exit distance inf{t > 0 : x + t w not in Omega}.

        ``method="exact"`` uses primitive endpoints; ``method="march"`` steps by
        ``ray_step`` and bisects to ``1e-10 * diam``. Returns +inf when the
        ray never leaves an unbounded domain.
        """
        xs, ws, shape = self._rays(x, w)
        self._check_inside(xs)
        if method == "exact":
            tp, _ = _rays.line_exits(xs, ws, *self._kernel_args())
        elif method == "march":
            tp = self._march(xs, ws)
        else:
            raise DomainError(f"unknown exit method {method!r}")
        return tp[0] if shape == () else tp.reshape(shape)

    def d_omega(self, x, w, method: str = "exact"):
        """Two-sided directional distance min(tau(x, w), tau(x, -w))."""
        xs, ws, shape = self._rays(x, w)
        self._check_inside(xs)
        if method == "exact":
            tp, tm = _rays.line_exits(xs, ws, *self._kernel_args())
        else:
            tp, tm = self._march(xs, ws), self._march(xs, -ws)
        d = np.minimum(tp, tm)
        return d[0] if shape == () else d.reshape(shape)

    def _march(self, xs: np.ndarray, ws: np.ndarray) -> np.ndarray:
        if not self.has_window:
            raise DomainError("marching needs a finite bbox window")
        step = self.ray_step
        tol = 1e-10 * self.diam
        lo, hi = self.bbox[:, 0], self.bbox[:, 1]
        # parameter at which the ray leaves the closed bbox
        with np.errstate(divide="ignore", invalid="ignore"):
            t_hi = np.where(ws > 0, (hi - xs) / ws, np.where(ws < 0, (lo - xs) / ws, np.inf))
        t_box = np.min(t_hi, axis=1)
        n = xs.shape[0]
        t_in = np.zeros(n)
        t_out = np.full(n, np.inf)
        active = np.ones(n, dtype=bool)
        k = 0
        while np.any(active):
            k += 1
            idx = np.flatnonzero(active)
            t = k * step
            inside = self.contains(xs[idx] + t * ws[idx])
            left = ~inside
            t_out[idx[left]] = t
            beyond = inside & (t > t_box[idx] + step)
            active[idx[left | beyond]] = False
            t_in[idx[inside]] = t
        # beyond the window with Omega still present: unbounded in that direction
        found = np.isfinite(t_out)
        a, b = t_in[found], t_out[found]
        xf, wf = xs[found], ws[found]
        while np.any(b - a > tol):
            m = 0.5 * (a + b)
            inside = self.contains(xf + m[:, None] * wf)
            a = np.where(inside, m, a)
            b = np.where(inside, b, m)
        out = np.full(n, np.inf)
        out[found] = b
        if self.bounded and not np.all(found):
            raise DomainError("ray left the bounding box inside a bounded domain; bbox is too small")
        return out

    def line_inv_square_sums(self, points: np.ndarray, dirs: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """sum_i W[m, i] * d_{w_i}(x)^-2 for every point; infinite distances add 0."""
        pts = np.ascontiguousarray(self._points(points).reshape(-1, self.dim))
        return _rays.inv_square_sums(pts, np.ascontiguousarray(dirs, dtype=float),
                                     np.ascontiguousarray(np.atleast_2d(weights), dtype=float),
                                     *self._kernel_args())

    # -- grids -------------------------------------------------------------

    def grid(self, h: float, budget: int = DEFAULT_NODE_BUDGET) -> Grid:
        if not self.has_window:
            raise DomainError("grid operations need a finite bbox window")
        if not h > 0:
            raise DomainError("grid spacing must be positive")
        counts = np.floor(self.lengths / h * (1 + 1e-12)).astype(int) + 1
        if np.prod(counts.astype(float)) > budget:
            raise DomainError(f"grid of {int(np.prod(counts.astype(float)))} nodes exceeds budget {budget}")
        return Grid(lo=self.bbox[:, 0].copy(), h=float(h), shape=tuple(int(c) for c in counts), domain=self)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform nodes ``lo + k * h`` over a bounding box, with the interior mask."""

    lo: np.ndarray
    h: float
    shape: tuple[int, ...]
    domain: Domain
    _mask: list = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return len(self.shape)

    def axes(self) -> list[np.ndarray]:
        return [self.lo[k] + self.h * np.arange(n) for k, n in enumerate(self.shape)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @property
    def mask(self) -> np.ndarray:
        if not self._mask:
            if 0 in self.shape:
                self._mask.append(np.zeros(self.shape, dtype=bool))
            else:
                self._mask.append(np.asarray(self.domain.contains(self.points())).reshape(self.shape))
        return self._mask[0]

    def interior_points(self) -> np.ndarray:
        return self.points()[self.mask.ravel()]

    def same_as(self, other: Grid) -> bool:
        return self.shape == other.shape and self.h == other.h and np.array_equal(self.lo, other.lo)


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def node_from_config(cfg: dict) -> Node:
    if not isinstance(cfg, dict):
        raise DomainError(f"tree node must be an object, got {type(cfg).__name__}")
    if "box" in cfg:
        return Box(tuple(tuple(b) for b in cfg["box"]))
    if "ball" in cfg:
        spec = cfg["ball"]
        return Ball(spec["center"], spec["radius"])
    if "halfspace" in cfg:
        spec = cfg["halfspace"]
        return HalfSpace(spec["normal"], spec.get("offset", 0.0))
    if "polygon" in cfg:
        return Polygon(tuple(tuple(v) for v in cfg["polygon"]))
    op = cfg.get("op")
    if op is None:
        raise DomainError(f"tree node needs a primitive key or 'op': {sorted(cfg)}")
    if op in ("union", "intersection"):
        args = cfg.get("args") or [cfg[k] for k in ("a", "b") if k in cfg]
        parts = tuple(node_from_config(a) for a in args)
        return Union(parts) if op == "union" else Intersection(parts)
    if op == "complement":
        return Complement(node_from_config(cfg["a"]))
    if op == "difference":
        return Difference(node_from_config(cfg["a"]), node_from_config(cfg["b"]))
    raise DomainError(f"unknown op {op!r}")


def domain_from_config(cfg: dict, name: str | None = None) -> Domain:
    for key in ("dim", "tree"):
        if key not in cfg:
            raise DomainError(f"domain config is missing required field '{key}'")
    dim = cfg["dim"]
    if dim not in (1, 2, 3):
        raise DomainError(f"field 'dim' must be 1, 2 or 3, got {dim!r}")
    try:
        tree = node_from_config(cfg["tree"])
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed field 'tree': {exc}") from exc
    dom = Domain(tree, bbox=cfg.get("bbox"), ray_step=cfg.get("ray_step"), name=name or cfg.get("name"))
    if dom.dim != dim:
        raise DomainError(f"field 'dim' is {dim} but the tree's primitives have dimension {dom.dim}")
    return dom


def load_domain(path) -> Domain:
    with open(path) as fh:
        cfg = json.load(fh)
    cfg = cfg.get("domain", cfg)
    return domain_from_config(cfg)


CORPUS = ("interval", "square", "disk", "lshape", "annulus", "rooms")


def corpus_config(name: str) -> dict:
    """Packaged config (domain plus default parameters) of a corpus domain."""
    if name not in CORPUS:
        raise KeyError(f"no corpus domain {name!r}; choose from {CORPUS}")
    return json.loads((resources.files("hardy_spectral") / "corpus" / f"{name}.json").read_text())


def corpus_domain(name: str) -> Domain:
    return domain_from_config(corpus_config(name))


def _scale_config(cfg: dict, s: float) -> dict:
    if "box" in cfg:
        return {"box": [[lo * s, hi * s] for lo, hi in cfg["box"]]}
    if "ball" in cfg:
        return {"ball": {"center": [c * s for c in cfg["ball"]["center"]], "radius": cfg["ball"]["radius"] * s}}
    if "halfspace" in cfg:
        hs = cfg["halfspace"]
        return {"halfspace": {"normal": hs["normal"], "offset": hs.get("offset", 0.0) * s}}
    if "polygon" in cfg:
        return {"polygon": [[v * s for v in p] for p in cfg["polygon"]]}
    out = {"op": cfg["op"]}
    if "args" in cfg:
        out["args"] = [_scale_config(a, s) for a in cfg["args"]]
    for key in ("a", "b"):
        if key in cfg:
            out[key] = _scale_config(cfg[key], s)
    return out

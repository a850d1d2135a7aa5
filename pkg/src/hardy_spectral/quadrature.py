"""Quadrature rules on the unit sphere S^{d-1}, d = 1, 2, 3."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SphereRule", "sphere_rule", "sphere_area", "unit_ball_volume", "DEFAULT_RULE_SIZE"]

# chosen so the half-space identity delta = height holds to 1e-3
DEFAULT_RULE_SIZE = {1: 2, 2: 720, 3: 2048}

# relative tolerance of the check  sum w_i (w_i)_d^2 = |S^{d-1}| / d
EXACTNESS_RTOL = 1e-3


def sphere_area(d: int) -> float:
    """|S^{d-1}|: 2, 2 pi, 4 pi for d = 1, 2, 3."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class SphereRule:
    nodes: np.ndarray  # (n, d) unit vectors
    weights: np.ndarray  # (n,)
    kind: str

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    def antipodal_fold(self) -> SphereRule | None:
        """Half rule with doubled weights when nodes come in +/- pairs in order.

        Two-sided distances are even in the direction, so the folded rule gives
        the same sums at half the cost.
        """
        if self.kind not in ("pair", "equispaced") or self.n % 2:
            return None
        half = self.n // 2
        if not np.allclose(self.nodes[:half], -self.nodes[half:], atol=1e-14):
            return None
        return SphereRule(self.nodes[:half], 2.0 * self.weights[:half], self.kind + "-folded")

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _fibonacci(n: int) -> np.ndarray:
    i = np.arange(n, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = 2.0 * math.pi * i / ((1.0 + math.sqrt(5.0)) / 2.0)
    r = np.sqrt(1.0 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def sphere_rule(dim: int, n: int | None = None) -> SphereRule:
    """Equal-weight rule: +-1 (d = 1), equispaced angles (d = 2), Fibonacci spiral (d = 3)."""
    if dim not in (1, 2, 3):
        raise ValueError(f"unsupported dimension {dim}")
    if n is None:
        n = DEFAULT_RULE_SIZE[dim]
    if n < 2:
        raise ValueError("sphere rule needs n >= 2")
    if dim == 1:
        if n != 2:
            raise ValueError("S^0 has exactly two points; use n = 2")
        return SphereRule(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]), "pair")
    if dim == 2:
        # node k and k + n/2 are antipodal for even n
        ang = 2.0 * math.pi * np.arange(n) / n
        nodes = np.column_stack([np.cos(ang), np.sin(ang)])
        rule = SphereRule(nodes, np.full(n, 2.0 * math.pi / n), "equispaced")
    else:
        if n < 64:
            raise ValueError("Fibonacci rule needs n >= 64")
        rule = SphereRule(_fibonacci(n), np.full(n, 4.0 * math.pi / n), "fibonacci")
    exact = sphere_area(dim) / dim
    got = float(np.dot(rule.weights, rule.nodes[:, -1] ** 2))
    if abs(got - exact) > EXACTNESS_RTOL * exact:
        raise ValueError(f"rule with n = {n} integrates w_d^2 to {got:.6g}, expected {exact:.6g}")
    return rule

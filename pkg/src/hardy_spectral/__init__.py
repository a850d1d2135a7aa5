"""Numerical toolkit for Hardy-type inequalities and Dirichlet eigenvalue bounds on CSG domains."""

__version__ = "0.1.0"

from hardy_spectral.geometry import Ball, Box, Domain, DomainError, HalfSpace, Polygon, domain_from_config, load_domain
from hardy_spectral.hardy_field import DeltaField, delta_at, delta_field, superlevel_E
from hardy_spectral.quadrature import SphereRule, sphere_rule
from hardy_spectral.reports import BoundReport

__all__ = [
    "Ball",
    "BoundReport",
    "Box",
    "DeltaField",
    "Domain",
    "DomainError",
    "HalfSpace",
    "Polygon",
    "SphereRule",
    "delta_at",
    "delta_field",
    "domain_from_config",
    "load_domain",
    "sphere_rule",
    "superlevel_E",
]

"""Infinitesimal rigidity of polyhedra through hyperideal hyperbolic geometry."""
from . import angles, ellipsoid, hypcore, instances, mesh, pogorelov, rigidity, simplex
from .errors import GeometryError

__all__ = ["GeometryError", "angles", "ellipsoid", "hypcore", "instances", "mesh", "pogorelov", "rigidity", "simplex"]

"""
Process catalog: subordinate Brownian motions and unimodal Lévy triplets.
"""

from src.catalog.processes import (
    ALL_KINDS,
    BernsteinFunction,
    ProcessSpec,
    RadialLevyDensity,
    SubordinateBM,
    UnimodalLevy,
    check_bernstein,
    check_profile,
    default_catalog,
    make_named,
    make_stable,
)
from src.catalog.projection import ProjectedDensity, project_density_1d
from src.catalog.spec_io import dump_spec, load_spec, resolve_spec, spec_fingerprint

__all__ = [
    'ALL_KINDS', 'BernsteinFunction', 'ProcessSpec', 'RadialLevyDensity', 'SubordinateBM',
    'UnimodalLevy', 'check_bernstein', 'check_profile', 'default_catalog', 'make_named',
    'make_stable', 'ProjectedDensity', 'project_density_1d', 'dump_spec', 'load_spec',
    'resolve_spec', 'spec_fingerprint',
]

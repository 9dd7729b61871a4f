"""Numerical lab for quantitative unique continuation of planar elliptic equations."""

from ._landis import *  # noqa: F401,F403
from ._landis import GridSpec, ScalarField

__version__ = "0.1.0"


def field_from_function(spec: GridSpec, fn) -> ScalarField:
    """Sample fn(x, y) (vectorized over numpy arrays) on the grid nodes."""
    import numpy as np

    x, y = np.meshgrid(spec.x, spec.y)
    return ScalarField(spec, np.asarray(fn(x, y), dtype=float))

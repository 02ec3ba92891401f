"""Weighted tent spaces on a discretised upper half-space.

Quasi-norms of ``T^{p,r}_{q,beta}``, the constructive factorizations and
multiplication checks, discrete Carleson measures, and a verification
harness.  Hot loops run under numba when available; set
``TENTSPACE_DISABLE_NUMBA=1`` for the pure numpy path.
"""

from .functionals import DEFAULT_WHITNEY, NormSpec, pairing, tent_norm, whitney_average
from .geometry import WhitneyParams, derive_params
from .grid import GridFunction, GridSpec, random_function, read_grid_function, write_grid_function

__version__ = "0.1.0"

__all__ = ["DEFAULT_WHITNEY", "GridFunction", "GridSpec", "NormSpec", "WhitneyParams",
           "derive_params", "pairing", "random_function", "read_grid_function",
           "tent_norm", "whitney_average", "write_grid_function"]

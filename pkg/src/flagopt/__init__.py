"""Riemannian and coordinate optimization on flag manifolds.

Subpackages and modules:

* :mod:`flagopt.matcore` dense kernels and a Peano-Baker ODE solver,
* :mod:`flagopt.grassmann` Grassmannians as involutions,
* :mod:`flagopt.flag` flag points, tangents, geodesics and transport,
* :mod:`flagopt.objectives` the block-trace and separation objectives,
* :mod:`flagopt.optim` gradient and coordinate methods,
* :mod:`flagopt.cli` the command-line harness.
"""

from . import errors, flag, grassmann, matcore, objectives, optim
from .flag import FlagPoint, FlagSignature, flag_signature
from .objectives import separation_objective, trace_objective
from .optim import (
    LineSearch,
    RunTrace,
    StopRule,
    coordinate_gradient_descent,
    coordinate_minimization,
    gradient_descent,
)

__version__ = "0.1.0"

"""siegelmate: numerical toolkit for matings of Siegel quadratic polynomials.

Blaschke-product models, quadratic rational maps with two Siegel disks,
drop combinatorics, the angle arithmetic of omega(theta), external rays and
orbit-classification renderers.
"""

__version__ = "0.1.0"

from .cf_arith import (BigAngle, ContinuedFraction, cf_expand, check_relation, convergent, dyadic_preimages,
                       omega_of_theta, parse_rotation, staircase_rho, sturmian_point)
from .errors import (AmbiguityError, DegenerateModelError, NoTrapError, NumericError, PrecisionError,
                     SiegelMateError, SolverError, TrackingError)

__all__ = [
    "BigAngle", "ContinuedFraction", "cf_expand", "check_relation", "convergent", "dyadic_preimages",
    "omega_of_theta", "parse_rotation", "staircase_rho", "sturmian_point",
    "AmbiguityError", "DegenerateModelError", "NoTrapError", "NumericError", "PrecisionError",
    "SiegelMateError", "SolverError", "TrackingError", "__version__",
]

"""Formal normal forms of vector fields, small divisors and Gevrey growth."""

__version__ = "0.1.0"

from .errors import (DomainError, GNFError, NotLinearizableError,  # noqa: E402
                     ParameterError)
from .homological import LinearPart, build_degree_operator, solve_cohomological  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .normalform import normalize, pushforward_check  # noqa: E402
from .polyvec import GradedVectorField, HomogeneousVF, lie_bracket  # noqa: E402
from .scalars import RATIONAL, float_field  # noqa: E402

__all__ = [
    "__version__", "BACKEND", "GNFError", "DomainError", "ParameterError",
    "NotLinearizableError", "HomogeneousVF", "GradedVectorField", "lie_bracket",
    "LinearPart", "build_degree_operator", "solve_cohomological", "normalize",
    "pushforward_check", "RATIONAL", "float_field",
]

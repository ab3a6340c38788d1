"""convolab: a numerical laboratory for multiplicative convolutions.

The package builds the classical number-theoretic error terms (divisor
problem, abelian-group counts, critical-line second moment, Rankin-Selberg
coefficients), runs them through the multiplicative convolution functional

    C_a[f](x) = integral_a^{x/a} f(y) f(x/y) dy/y,

and checks every closed form, identity, and growth law that is numerically
reachable at desk scale.  See the README for the module map and the
``convolab verify`` acceptance suite.
"""

from .errors import (
    CacheFormatError,
    CapError,
    ConvergenceError,
    ConvolabError,
    DependencyError,
    DomainError,
    FitError,
    PoleError,
    RangeError,
)
from .numerics import CONSTANTS, DEFAULT_QUAD, Constants, QuadratureSpec, gamma_fn, integrate, zeta_real

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "Constants",
    "DEFAULT_QUAD",
    "QuadratureSpec",
    "gamma_fn",
    "integrate",
    "zeta_real",
    "ConvolabError",
    "DomainError",
    "PoleError",
    "RangeError",
    "ConvergenceError",
    "FitError",
    "DependencyError",
    "CapError",
    "CacheFormatError",
    "__version__",
]

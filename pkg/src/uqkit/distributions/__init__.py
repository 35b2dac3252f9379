"""Univariate laws, copulas, joint and conditional constructions."""
from .compound import LinearCombination, RandomSum
from .conditional import ConditionalDistribution, ConditionalRandomVector
from .multivariate import *  # noqa: F401,F403
from .multivariate import __all__ as _multi
from .univariate import *  # noqa: F401,F403
from .univariate import __all__ as _uni

__all__ = list(_uni) + list(_multi) + [
    "ConditionalRandomVector",
    "ConditionalDistribution",
    "RandomSum",
    "LinearCombination",
]

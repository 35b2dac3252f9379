"""Surrogate models: polynomial chaos, kriging, Taylor and least squares."""
from .chaos import *  # noqa: F401,F403
from .io import *  # noqa: F401,F403
from .kriging import *  # noqa: F401,F403
from .polynomials import *  # noqa: F401,F403
from .surrogates import *  # noqa: F401,F403

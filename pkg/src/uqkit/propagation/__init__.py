"""Propagation of input uncertainty: extremes, central tendency, failure probability."""
from .central import *  # noqa: F401,F403
from .central import __all__ as _central_all
from .reliability import *  # noqa: F401,F403
from .reliability import __all__ as _reliability_all

__all__ = list(_central_all) + list(_reliability_all)

"""Kernel projection learning for function-valued outputs."""

from ._kpl import *  # noqa: F401,F403
from ._kpl import __doc__  # noqa: F401

"""Frequency-domain quantum noise simulator for EPR-based frequency-dependent squeezing."""

from ._core import *  # noqa: F401,F403
from ._core import EprsqError, __version__  # noqa: F401
